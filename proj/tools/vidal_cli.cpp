// Copyright 2026 The Vidal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vidal: run active-learning experiments, generate synthetic manifests,
// render report CSVs, and serve live annotation sessions.

#include <CLI11.hpp>
#include <algorithm>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>

#include "vidal/annotation_service.hpp"
#include "vidal/dataset.hpp"
#include "vidal/error.hpp"
#include "vidal/harness.hpp"
#include "vidal/http_server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) vidal::fail(vidal::ErrorCode::kIoError, "cannot write " + path.string());
}

void print_summary(std::span<const vidal::ExperimentReport> reports) {
  std::cout << std::fixed << std::setprecision(2);
  std::cout << "strategy   final_acc        queried  correct%        incorrect%      discarded%\n";
  for (const auto& rep : reports) {
    const auto& last = rep.accuracy.back();
    const auto s = vidal::summarize_oracle_stats(rep);
    std::cout << std::left << std::setw(10) << vidal::to_string(rep.config.strategy) << ' '
              << std::right << std::setw(6) << 100.0 * last.mean << " +- " << std::setw(5)
              << 100.0 * last.std << "  " << std::setw(7) << s.total_queried << "  " << std::setw(6)
              << s.correct_mean << " +- " << std::setw(5) << s.correct_std << "  " << std::setw(6)
              << s.incorrect_mean << " +- " << std::setw(5) << s.incorrect_std << "  "
              << std::setw(6) << s.discarded_mean << " +- " << std::setw(5) << s.discarded_std << '\n';
  }
}

void write_report_csvs(std::span<const vidal::ExperimentReport> reports, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "accuracy.csv", vidal::accuracy_csv(reports));
  write_text(dir / "oracle_stats.csv", vidal::oracle_stats_csv(reports));
}

// One small PPM tile per frame: the first three embedding coordinates
// squashed to colors, so a human sees something per frame.
void write_frame_assets(vidal::Dataset& ds, const fs::path& manifest_dir) {
  for (auto& v : ds.videos) {
    const fs::path rel = fs::path("frames") / v.id;
    fs::create_directories(manifest_dir / rel);
    v.frame_assets.clear();
    for (Eigen::Index f = 0; f < v.frames.rows(); ++f) {
      const fs::path file = rel / (std::to_string(f) + ".ppm");
      std::ofstream out(manifest_dir / file, std::ios::binary);
      constexpr int kSide = 16;
      out << "P6\n" << kSide << ' ' << kSide << "\n255\n";
      unsigned char rgb[3];
      for (int c = 0; c < 3; ++c) {
        const double x = c < v.frames.cols() ? v.frames(f, c) : 0.0;
        rgb[c] = static_cast<unsigned char>(255.0 / (1.0 + std::exp(-x)));
      }
      for (int p = 0; p < kSide * kSide; ++p) out.write(reinterpret_cast<const char*>(rgb), 3);
      v.frame_assets.push_back(file.generic_string());
    }
  }
}

vidal::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch active learning for video classification with frame-subset queries"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a YAML config");
  std::string config_path;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  run->add_option("config", config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--strategy", strategies, "proposed, rr, er or ek; repeat to compare");
  run->add_option("--seed", seeds, "Run seed; repeat for several runs (overrides the config)");
  run->add_option("--out", out_dir, "Output directory");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset manifest");
  vidal::SyntheticParams params;
  std::string manifest_out;
  bool with_assets = false;
  synth->add_option("--out", manifest_out, "Manifest path (.jsonl)")->required();
  synth->add_option("--classes", params.num_classes)->capture_default_str();
  synth->add_option("--videos-per-class", params.videos_per_class)->capture_default_str();
  synth->add_option("--n-frames", params.n_frames)->capture_default_str();
  synth->add_option("--dim", params.dim)->capture_default_str();
  synth->add_option("--cluster-spread", params.cluster_spread)->capture_default_str();
  synth->add_option("--frame-noise", params.frame_noise)->capture_default_str();
  synth->add_option("--seed", params.seed)->capture_default_str();
  synth->add_flag("--assets", with_assets, "Also write a small image per frame for live annotation");

  // report
  auto* report = app.add_subcommand("report", "Render CSVs from a report file");
  std::string report_path;
  std::string report_out = ".";
  report->add_option("report", report_path, "report.json written by `run`")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Directory for accuracy.csv and oracle_stats.csv");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve live annotation sessions over HTTP");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string state_dir = "sessions";
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--state-dir", state_dir, "Audit logs; sessions found here are recovered")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      vidal::ExperimentConfig base = vidal::load_config(config_path);
      if (!seeds.empty()) base.seeds = seeds;
      if (strategies.empty()) strategies.push_back(std::string(vidal::to_string(base.strategy)));
      const vidal::Dataset data = vidal::materialize_dataset(base);

      std::vector<vidal::ExperimentReport> reports;
      for (const auto& name : strategies) {
        vidal::ExperimentConfig cfg = base;
        cfg.strategy = vidal::parse_strategy(name);
        std::cerr << "running " << name << " over " << cfg.seeds.size() << " seed(s)\n";
        reports.push_back(vidal::run_experiment(cfg, data));
      }
      fs::create_directories(out_dir);
      write_text(fs::path(out_dir) / "report.json", vidal::report_to_json(reports).dump(2) + "\n");
      write_text(fs::path(out_dir) / "timings.json", vidal::report_to_json(reports, true).dump(2) + "\n");
      write_report_csvs(reports, out_dir);
      print_summary(reports);
    } else if (*synth) {
      vidal::Dataset ds;
      ds.videos = vidal::generate_synthetic(params);
      ds.num_classes = params.num_classes;
      ds.dim = params.dim;
      const fs::path path(manifest_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      if (with_assets) write_frame_assets(ds, path.parent_path().empty() ? fs::path(".") : path.parent_path());
      vidal::write_dataset(ds, path);
      std::cout << "wrote " << ds.videos.size() << " videos to " << path << '\n';
    } else if (*report) {
      std::ifstream in(report_path);
      const auto reports = vidal::report_from_json(json::parse(in));
      write_report_csvs(reports, report_out);
      print_summary(reports);
    } else if (*serve) {
      vidal::AnnotationService service(state_dir);
      const std::size_t recovered = service.recover();
      vidal::HttpServer server(service);
      if (!server.bind(host, port)) {
        std::cerr << "error: cannot bind " << host << ':' << port << '\n';
        return 1;
      }
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving on http://" << host << ':' << port << "/v1 (" << recovered
                << " session(s) recovered)\n";
      server.listen_after_bind();
    }
  } catch (const vidal::Error& e) {
    std::cerr << "error [" << vidal::to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
