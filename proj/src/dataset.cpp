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

#include "vidal/dataset.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "vidal/error.hpp"
#include "vidal/random.hpp"

namespace vidal {

using nlohmann::json;

namespace {

[[noreturn]] void record_error(std::size_t line, const std::string& id,
                               const std::string& field,
                               const std::string& what) {
  std::ostringstream os;
  os << "manifest line " << line;
  if (!id.empty()) os << ", video '" << id << "'";
  os << ", field '" << field << "': " << what;
  fail(ErrorCode::kDataError, os.str());
}

VideoSample parse_record(const json& rec, std::size_t line, std::size_t dim,
                         int num_classes) {
  VideoSample v;
  if (!rec.is_object()) record_error(line, "", "<record>", "not an object");
  if (!rec.contains("id") || !rec["id"].is_string()) {
    record_error(line, "", "id", "missing or not a string");
  }
  v.id = rec["id"].get<std::string>();

  if (!rec.contains("label")) record_error(line, v.id, "label", "missing");
  const json& lab = rec["label"];
  if (!lab.is_null()) {
    if (!lab.is_number_integer()) {
      record_error(line, v.id, "label", "not an integer or null");
    }
    const auto value = lab.get<long long>();
    if (value < 0 || value >= num_classes) {
      record_error(line, v.id, "label",
                   "value " + std::to_string(value) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
    v.label = static_cast<int>(value);
  }

  if (!rec.contains("frames") || !rec["frames"].is_array()) {
    record_error(line, v.id, "frames", "missing or not an array");
  }
  const json& frames = rec["frames"];
  if (frames.empty()) record_error(line, v.id, "frames", "no frames");
  v.frames.resize(static_cast<Eigen::Index>(frames.size()),
                  static_cast<Eigen::Index>(dim));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const json& row = frames[f];
    if (!row.is_array()) {
      record_error(line, v.id, "frames", "frame " + std::to_string(f) +
                                             " is not an array");
    }
    if (row.size() != dim) {
      record_error(line, v.id, "frames",
                   "dimension mismatch at frame " + std::to_string(f) +
                       ": expected " + std::to_string(dim) + ", got " +
                       std::to_string(row.size()));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (!row[d].is_number()) {
        record_error(line, v.id, "frames",
                     "non-numeric or non-finite value at frame " +
                         std::to_string(f) + ", coordinate " +
                         std::to_string(d));
      }
      const double x = row[d].get<double>();
      if (!std::isfinite(x)) {
        record_error(line, v.id, "frames",
                     "non-finite value at frame " + std::to_string(f));
      }
      v.frames(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(d)) = x;
    }
  }

  if (rec.contains("frame_assets") && !rec["frame_assets"].is_null()) {
    const json& assets = rec["frame_assets"];
    if (!assets.is_array()) {
      record_error(line, v.id, "frame_assets", "not an array");
    }
    if (assets.size() != frames.size()) {
      record_error(line, v.id, "frame_assets",
                   "length " + std::to_string(assets.size()) +
                       " does not match frame count " +
                       std::to_string(frames.size()));
    }
    for (const auto& a : assets) {
      if (!a.is_string()) {
        record_error(line, v.id, "frame_assets", "entry is not a string");
      }
      v.frame_assets.push_back(a.get<std::string>());
    }
  }
  return v;
}

}  // namespace

void validate_video(const VideoSample& video) {
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::kDataError, "video '" + video.id + "': " + what);
  };
  if (video.frames.rows() < 1) bad("has no frames");
  if (video.frames.cols() < 1) bad("frame dimension must be >= 1");
  if (!video.frames.allFinite()) bad("non-finite embedding value");
  if (video.has_assets() && video.frame_assets.size() != video.n_frames()) {
    bad("frame_assets length does not match frame count");
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open manifest " + path.string());

  Dataset ds;
  ds.base_dir = path.parent_path();
  std::unordered_set<std::string> ids;
  bool have_header = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      record_error(line, "", "<record>", std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      if (!rec.is_object() || !rec.contains("version")) {
        record_error(line, "", "version", "first record must be the header");
      }
      if (rec["version"] != 1) {
        record_error(line, "", "version", "unsupported manifest version");
      }
      if (!rec.contains("C") || !rec["C"].is_number_integer() ||
          rec["C"].get<long long>() < 1) {
        record_error(line, "", "C", "missing or not a positive integer");
      }
      if (!rec.contains("dim") || !rec["dim"].is_number_integer() ||
          rec["dim"].get<long long>() < 1) {
        record_error(line, "", "dim", "missing or not a positive integer");
      }
      ds.num_classes = rec["C"].get<int>();
      ds.dim = rec["dim"].get<std::size_t>();
      have_header = true;
      continue;
    }
    VideoSample v = parse_record(rec, line, ds.dim, ds.num_classes);
    if (!ids.insert(v.id).second) {
      record_error(line, v.id, "id", "duplicate id '" + v.id + "'");
    }
    ds.videos.push_back(std::move(v));
  }
  if (!have_header) {
    fail(ErrorCode::kDataError, "manifest " + path.string() + " is empty");
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write manifest " + path.string());
  json header = {{"version", 1}, {"C", dataset.num_classes}, {"dim", dataset.dim}};
  out << header.dump() << '\n';
  for (const auto& v : dataset.videos) {
    validate_video(v);
    json rec;
    rec["id"] = v.id;
    rec["label"] = v.label ? json(*v.label) : json(nullptr);
    json frames = json::array();
    for (Eigen::Index f = 0; f < v.frames.rows(); ++f) {
      json row = json::array();
      for (Eigen::Index d = 0; d < v.frames.cols(); ++d) row.push_back(v.frames(f, d));
      frames.push_back(std::move(row));
    }
    rec["frames"] = std::move(frames);
    if (v.has_assets()) rec["frame_assets"] = v.frame_assets;
    out << rec.dump() << '\n';
  }
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

DatasetSplits split_dataset(std::span<const VideoSample> videos,
                            int num_classes, const SplitSizes& sizes,
                            std::uint64_t seed) {
  if (sizes.total() > videos.size()) {
    fail(ErrorCode::kInvalidArgument,
         "insufficient videos: split needs " + std::to_string(sizes.total()) +
             ", have " + std::to_string(videos.size()));
  }
  for (const auto& v : videos) {
    if (!v.label) {
      fail(ErrorCode::kInvalidArgument, "video '" + v.id + "' is unlabeled");
    }
  }
  Rng rng(seed);
  const auto order = sample_without_replacement(videos.size(), sizes.total(), rng);

  DatasetSplits out;
  out.num_classes = num_classes;
  auto cursor = order.begin();
  auto take = [&](std::vector<std::size_t>& pool, std::size_t n) {
    pool.assign(cursor, cursor + static_cast<std::ptrdiff_t>(n));
    cursor += static_cast<std::ptrdiff_t>(n);
  };
  take(out.labeled, sizes.labeled);
  take(out.unlabeled, sizes.unlabeled);
  take(out.test, sizes.test);
  take(out.oracle_train, sizes.oracle_train);
  take(out.oracle_test, sizes.oracle_test);

  auto require_coverage = [&](const std::vector<std::size_t>& pool,
                              const char* name) {
    std::set<int> seen;
    for (auto i : pool) seen.insert(*videos[i].label);
    for (int c = 0; c < num_classes; ++c) {
      if (!seen.contains(c)) {
        fail(ErrorCode::kDataError, std::string("class coverage failure: class ") +
                                        std::to_string(c) + " absent from " + name);
      }
    }
  };
  require_coverage(out.labeled, "L");
  require_coverage(out.oracle_train, "L_oracle");
  return out;
}

Eigen::VectorXd pool_video(const VideoSample& video) {
  return video.frames.colwise().mean().transpose();
}

Eigen::VectorXd pool_frames(const VideoSample& video,
                            std::span<const std::size_t> frame_indices) {
  if (frame_indices.empty()) {
    fail(ErrorCode::kInvalidArgument, "video '" + video.id + "': empty frame subset");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(video.frames.cols());
  for (auto f : frame_indices) {
    if (f >= video.n_frames()) {
      fail(ErrorCode::kOutOfRange, "video '" + video.id + "': frame index " +
                                       std::to_string(f) + " out of range");
    }
    sum += video.frames.row(static_cast<Eigen::Index>(f)).transpose();
  }
  return sum / static_cast<double>(frame_indices.size());
}

Eigen::MatrixXd pooled_features(std::span<const VideoSample> videos,
                                std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  const auto dim = videos[indices.front()].frames.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), dim);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = pool_video(videos[indices[r]]).transpose();
  }
  return out;
}

std::vector<VideoSample> generate_synthetic(const SyntheticParams& p) {
  if (p.num_classes < 1 || p.videos_per_class < 1 || p.n_frames < 1 || p.dim < 1) {
    fail(ErrorCode::kInvalidArgument, "synthetic counts must be >= 1");
  }
  if (p.cluster_spread < 0.0 || p.frame_noise < 0.0) {
    fail(ErrorCode::kInvalidArgument, "synthetic spreads must be non-negative");
  }
  const auto dim = static_cast<Eigen::Index>(p.dim);
  const auto n_frames = static_cast<Eigen::Index>(p.n_frames);

  Rng rng(mix_seed(p.seed, 0));
  Eigen::MatrixXd centers(p.num_classes, dim);
  for (int c = 0; c < p.num_classes; ++c) {
    for (Eigen::Index d = 0; d < dim; ++d) centers(c, d) = standard_normal(rng);
  }

  std::vector<VideoSample> out;
  out.reserve(p.videos_per_class * static_cast<std::size_t>(p.num_classes));
  for (std::size_t i = 0; i < p.videos_per_class; ++i) {
    for (int c = 0; c < p.num_classes; ++c) {
      VideoSample v;
      v.id = "syn-c" + std::to_string(c) + "-" + std::to_string(i);
      v.label = c;
      Eigen::RowVectorXd base = centers.row(c);
      for (Eigen::Index d = 0; d < dim; ++d) {
        base(d) += p.cluster_spread * standard_normal(rng);
      }
      v.frames.resize(n_frames, dim);
      for (Eigen::Index f = 0; f < n_frames; ++f) {
        for (Eigen::Index d = 0; d < dim; ++d) {
          v.frames(f, d) = base(d) + p.frame_noise * standard_normal(rng);
        }
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace vidal
