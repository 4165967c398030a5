// Copyright 2026 The Diarcluster Authors.
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

#include "diarcluster/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "diarcluster/bic.hpp"
#include "diarcluster/dec.hpp"
#include "diarcluster/frame_io.hpp"
#include "diarcluster/kmeans.hpp"
#include "diarcluster/rng.hpp"
#include "diarcluster/rttm.hpp"
#include "diarcluster/smoothing.hpp"
#include "diarcluster/spectral.hpp"
#include "diarcluster/whitening.hpp"

namespace diarcluster {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::spectral: return "spectral";
    case Algorithm::xmeans: return "xmeans";
    case Algorithm::dec_original: return "dec_original";
    case Algorithm::dec_improved: return "dec_improved";
  }
  throw std::invalid_argument("unknown Algorithm value");
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "kmeans") return Algorithm::kmeans;
  if (name == "spectral") return Algorithm::spectral;
  if (name == "xmeans") return Algorithm::xmeans;
  if (name == "dec_original") return Algorithm::dec_original;
  if (name == "dec_improved") return Algorithm::dec_improved;
  throw std::invalid_argument(
      "unknown algorithm '" + name +
      "' (expected kmeans, spectral, xmeans, dec_original or dec_improved)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::min_duration: return "min_duration";
    case SweepAxis::aggregation: return "aggregation";
    case SweepAxis::algorithm: return "algorithm";
    case SweepAxis::filter_order: return "filter_order";
  }
  throw std::invalid_argument("unknown SweepAxis value");
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "min_duration") return SweepAxis::min_duration;
  if (name == "aggregation") return SweepAxis::aggregation;
  if (name == "algorithm") return SweepAxis::algorithm;
  if (name == "filter_order") return SweepAxis::filter_order;
  throw std::invalid_argument(
      "unknown sweep axis '" + name +
      "' (expected min_duration, aggregation, algorithm or filter_order)");
}

void validate(const PipelineConfig& c) {
  if (c.pca_dim < 0) {
    throw std::invalid_argument("pipeline: pca_dim must be >= 0");
  }
  if (!(c.pca_min_duration >= 0.0)) {
    throw std::invalid_argument("pipeline: pca_min_duration must be >= 0");
  }
  if (!(c.pca_eigenvalue_floor >= 0.0 && c.pca_eigenvalue_floor < 1.0)) {
    throw std::invalid_argument(
        "pipeline: pca_eigenvalue_floor must be in [0, 1)");
  }
  if (c.k < 0) {
    throw std::invalid_argument("pipeline: k must be >= 0 (0 = from session)");
  }
  if (c.k_min < 1 || c.k_max < c.k_min) {
    throw std::invalid_argument("pipeline: need 1 <= k_min <= k_max");
  }
  if (c.kmeans_restarts < 1) {
    throw std::invalid_argument("pipeline: kmeans_restarts must be >= 1");
  }
  if (!(c.collar >= 0.0)) {
    throw std::invalid_argument("pipeline: collar must be >= 0");
  }
  if (c.dec_hidden < 1 || c.dec_bottleneck < 1) {
    throw std::invalid_argument(
        "pipeline: dec layer widths must be positive");
  }
  if (c.dec_epochs < 0 || c.dec_pretrain_epochs < 0) {
    throw std::invalid_argument("pipeline: dec epochs must be >= 0");
  }
  if (c.dec_batch < 1) {
    throw std::invalid_argument("pipeline: dec_batch must be >= 1");
  }
  if (!(c.dec_lr > 0.0)) {
    throw std::invalid_argument("pipeline: dec_lr must be > 0");
  }
  if (!(c.dec_dropout >= 0.0 && c.dec_dropout < 1.0)) {
    throw std::invalid_argument("pipeline: dec_dropout must be in [0, 1)");
  }
  if (c.dec_target_update_period < 1 || c.dec_recalib_period < 1) {
    throw std::invalid_argument("pipeline: dec periods must be >= 1");
  }
  if (c.n_workers < 0) {
    throw std::invalid_argument("pipeline: n_workers must be >= 0");
  }
  if (!c.profiles_path.empty() && c.algorithm != Algorithm::kmeans) {
    throw std::invalid_argument(
        "pipeline: the profiles initializer requires algorithm=kmeans");
  }
}

// ---------------------------------------------------------------------------
// Config JSON

std::string pipeline_config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["filter_order"] = c.filter_order;
  j["aggregation"] = to_string(c.aggregation);
  j["pca_dim"] = c.pca_dim;
  j["pca_eigenvalue_floor"] = c.pca_eigenvalue_floor;
  j["pca_min_duration"] = c.pca_min_duration;
  j["algorithm"] = to_string(c.algorithm);
  j["k"] = c.k;
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["collar"] = c.collar;
  j["profiles_path"] = c.profiles_path;
  j["n_workers"] = c.n_workers;
  j["seed"] = c.seed;
  ordered_json d;
  d["hidden"] = c.dec_hidden;
  d["full_arch"] = c.dec_full_arch;
  d["bottleneck"] = c.dec_bottleneck;
  d["epochs"] = c.dec_epochs;
  d["batch"] = c.dec_batch;
  d["lr"] = c.dec_lr;
  d["pretrain_epochs"] = c.dec_pretrain_epochs;
  d["dropout"] = c.dec_dropout;
  d["target_update_period"] = c.dec_target_update_period;
  d["recalib_period"] = c.dec_recalib_period;
  j["dec"] = std::move(d);
  return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config root must be a JSON object");
  }
  PipelineConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "filter_order") {
        c.filter_order = value.get<int>();
      } else if (key == "aggregation") {
        c.aggregation = aggregation_from_string(value.get<std::string>());
      } else if (key == "pca_dim") {
        c.pca_dim = value.get<int>();
      } else if (key == "pca_eigenvalue_floor") {
        c.pca_eigenvalue_floor = value.get<double>();
      } else if (key == "pca_min_duration") {
        c.pca_min_duration = value.get<double>();
      } else if (key == "algorithm") {
        c.algorithm = algorithm_from_string(value.get<std::string>());
      } else if (key == "k") {
        c.k = value.get<int>();
      } else if (key == "k_min") {
        c.k_min = value.get<int>();
      } else if (key == "k_max") {
        c.k_max = value.get<int>();
      } else if (key == "kmeans_restarts") {
        c.kmeans_restarts = value.get<int>();
      } else if (key == "collar") {
        c.collar = value.get<double>();
      } else if (key == "profiles_path") {
        c.profiles_path = value.get<std::string>();
      } else if (key == "n_workers") {
        c.n_workers = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "dec") {
        if (!value.is_object()) {
          throw std::invalid_argument("config key 'dec' must be an object");
        }
        for (const auto& [dkey, dvalue] : value.items()) {
          if (dkey == "hidden") {
            c.dec_hidden = dvalue.get<int>();
          } else if (dkey == "full_arch") {
            c.dec_full_arch = dvalue.get<bool>();
          } else if (dkey == "bottleneck") {
            c.dec_bottleneck = dvalue.get<int>();
          } else if (dkey == "epochs") {
            c.dec_epochs = dvalue.get<int>();
          } else if (dkey == "batch") {
            c.dec_batch = dvalue.get<int>();
          } else if (dkey == "lr") {
            c.dec_lr = dvalue.get<double>();
          } else if (dkey == "pretrain_epochs") {
            c.dec_pretrain_epochs = dvalue.get<int>();
          } else if (dkey == "dropout") {
            c.dec_dropout = dvalue.get<double>();
          } else if (dkey == "target_update_period") {
            c.dec_target_update_period = dvalue.get<int>();
          } else if (dkey == "recalib_period") {
            c.dec_recalib_period = dvalue.get<int>();
          } else {
            throw std::invalid_argument("unknown config key 'dec." + dkey +
                                        "'");
          }
        }
      } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  validate(c);
  return c;
}

PipelineConfig load_pipeline_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides) {
  ordered_json j;
  if (config_path.empty()) {
    j = ordered_json::parse(pipeline_config_to_json(PipelineConfig{}));
  } else {
    std::ifstream in(config_path);
    if (!in) {
      throw std::runtime_error("cannot open config file: " + config_path);
    }
    try {
      j = ordered_json::parse(in);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config file " + config_path +
                                  " is not valid JSON: " + e.what());
    }
  }
  for (const std::string& item : overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override must be key=value, got '" + item +
                                  "'");
    }
    const std::string path = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    ordered_json value;
    try {
      value = ordered_json::parse(raw);
    } catch (const std::exception&) {
      value = raw;  // unquoted strings such as aggregation=median
    }
    ordered_json* node = &j;
    std::size_t begin = 0;
    while (true) {
      const std::size_t dot = path.find('.', begin);
      const std::string part = path.substr(
          begin, dot == std::string::npos ? std::string::npos : dot - begin);
      if (part.empty()) {
        throw std::invalid_argument("bad override key '" + path + "'");
      }
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      begin = dot + 1;
    }
  }
  return pipeline_config_from_json(j.dump());
}

// ---------------------------------------------------------------------------
// Profiles

namespace {

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t half = n / 2;
  std::nth_element(values.begin(), values.begin() + half, values.end());
  const double upper = values[half];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + half);
  return 0.5 * (lower + upper);
}

}  // namespace

SpeakerProfiles profiles_from_session(
    const std::vector<SegmentEmbedding>& embeddings,
    const std::vector<int>& assignments, int k,
    std::vector<std::string>* warnings) {
  if (assignments.size() != embeddings.size()) {
    throw std::invalid_argument(
        "profiles_from_session: one assignment per embedding required");
  }
  if (k < 1) {
    throw std::invalid_argument("profiles_from_session: k must be >= 1");
  }
  if (embeddings.empty()) {
    throw std::invalid_argument("profiles_from_session: no embeddings");
  }
  const Eigen::Index dim = embeddings.front().vector.size();

  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int c = assignments[i];
    if (c < 0 || c >= k) {
      throw std::invalid_argument(
          "profiles_from_session: assignment out of range");
    }
    members[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
  }

  SpeakerProfiles profiles;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> scratch;
  for (int c = 0; c < k; ++c) {
    const auto& idx = members[static_cast<std::size_t>(c)];
    if (idx.empty()) {
      if (warnings != nullptr) {
        warnings->push_back("cluster " + std::to_string(c) +
                            " has no segments; profile excluded");
      }
      continue;
    }
    Eigen::VectorXd profile(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
      scratch.clear();
      for (const int i : idx) {
        scratch.push_back(embeddings[static_cast<std::size_t>(i)].vector[d]);
      }
      profile[d] = median_of(scratch);
    }
    profiles.labels.push_back("c" + std::to_string(c));
    rows.push_back(std::move(profile));
  }
  if (rows.empty()) {
    throw std::invalid_argument(
        "profiles_from_session: every cluster is empty");
  }
  profiles.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    profiles.vectors.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  validate(profiles);
  return profiles;
}

// ---------------------------------------------------------------------------
// Single session

namespace {

int distinct_ref_speakers(const SegmentTable& table) {
  std::set<std::string> names;
  for (const Segment& seg : table.segments) {
    if (seg.ref_speaker.has_value()) names.insert(*seg.ref_speaker);
  }
  return static_cast<int>(names.size());
}

// Carries the hypothesis of the merged table back onto the raw segments:
// each raw segment takes the label of the merged segment covering its
// midpoint (merging only ever extends segments, so the midpoint is covered).
std::vector<int> propagate_to_raw(const SegmentTable& merged,
                                  const SegmentTable& raw,
                                  const std::vector<int>& hyp) {
  std::vector<int> out(raw.segments.size(), 0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < raw.segments.size(); ++i) {
    const double mid = 0.5 * (raw.segments[i].start + raw.segments[i].end);
    while (j + 1 < merged.segments.size() && merged.segments[j].end < mid) {
      ++j;
    }
    out[i] = hyp[j];
  }
  return out;
}

}  // namespace

SessionResult run_session(const SessionInput& input,
                          const PipelineConfig& config,
                          std::uint64_t session_seed,
                          const SpeakerProfiles* profiles) {
  validate(config);
  validate(input.frames);
  validate(input.ref);

  SessionResult r;
  r.session_id = input.frames.session_id.empty() ? input.ref.session_id
                                                 : input.frames.session_id;
  r.seed = session_seed;
  r.merged = merge_short_silences(input.ref, config.collar);

  const FrameMatrix* frames = &input.frames;
  FrameMatrix smoothed;
  if (config.filter_order >= 0) {
    smoothed = smooth_frames(input.frames, config.filter_order);
    frames = &smoothed;
  }

  const std::vector<SegmentEmbedding> embeddings =
      aggregate_table(*frames, r.merged, config.aggregation);
  const Eigen::MatrixXd emb = embedding_matrix(embeddings);
  const Eigen::Index n = emb.rows();

  int k = config.k;
  if (profiles != nullptr) {
    const int pk = static_cast<int>(profiles->vectors.rows());
    if (k > 0 && k != pk) {
      throw std::invalid_argument(
          "config k conflicts with the supplied profile count");
    }
    k = pk;
  }
  if (k == 0) k = input.num_speakers;
  if (k == 0) k = distinct_ref_speakers(input.ref);
  if (k < 1) {
    throw std::invalid_argument(
        "cannot determine the speaker count for session " + r.session_id);
  }

  // Training subset: segments strictly longer than the duration threshold.
  std::vector<Eigen::Index> train_idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (embeddings[static_cast<std::size_t>(i)].duration >
        config.pca_min_duration) {
      train_idx.push_back(i);
    }
  }
  const Eigen::Index min_train =
      std::max<Eigen::Index>(config.algorithm == Algorithm::xmeans
                                 ? config.k_min
                                 : k,
                             2);
  if (static_cast<Eigen::Index>(train_idx.size()) < min_train) {
    r.warnings.push_back(
        "fewer than " + std::to_string(min_train) + " segments longer than " +
        std::to_string(config.pca_min_duration) +
        " s; training on all segments");
    train_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) train_idx.push_back(i);
  }
  Eigen::MatrixXd train(static_cast<Eigen::Index>(train_idx.size()),
                        emb.cols());
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    train.row(static_cast<Eigen::Index>(i)) = emb.row(train_idx[i]);
  }

  ClusterModel model;
  std::vector<int> hyp;
  switch (config.algorithm) {
    case Algorithm::kmeans:
    case Algorithm::xmeans: {
      PcaWhitener pca;
      Eigen::MatrixXd train_p = train;
      Eigen::MatrixXd all_p = emb;
      if (config.pca_dim > 0) {
        Eigen::Index out_dim =
            std::min<Eigen::Index>(config.pca_dim, emb.cols());
        if (out_dim > train.rows()) {
          out_dim = train.rows();
          r.warnings.push_back(
              "pca_dim reduced to the " + std::to_string(train.rows()) +
              " available training segments");
        }
        pca.fit(train, out_dim);
        if (config.pca_eigenvalue_floor > 0.0 && pca.output_dim() > 1) {
          // Drop near-degenerate components: whitening would inflate them
          // to unit variance and drown the informative directions.
          const Eigen::VectorXd& sd = pca.stddevs();
          const double cutoff = std::sqrt(config.pca_eigenvalue_floor) * sd(0);
          Eigen::Index kept = 0;
          while (kept < sd.size() && sd(kept) >= cutoff) ++kept;
          if (kept < 1) kept = 1;
          if (kept < pca.output_dim()) pca.fit(train, kept);
        }
        train_p = pca.apply(train);
        all_p = pca.apply(emb);
      }
      if (config.algorithm == Algorithm::kmeans) {
        KmeansOptions opts;
        opts.k = k;
        opts.seed = session_seed;
        if (profiles != nullptr) {
          SpeakerProfiles projected = *profiles;
          if (config.pca_dim > 0) {
            projected.vectors = pca.apply(profiles->vectors);
          }
          opts.init = ProfilesInit{std::move(projected)};
          model = kmeans(train_p, opts);
        } else {
          // Best of kmeans_restarts (by within-cluster sum of squares).
          double best = std::numeric_limits<double>::infinity();
          for (int r = 0; r < config.kmeans_restarts; ++r) {
            opts.seed = derive_seed(session_seed, static_cast<std::uint64_t>(r));
            ClusterModel candidate = kmeans(train_p, opts);
            const double objective = kmeans_objective(train_p, candidate);
            if (objective < best) {
              best = objective;
              model = std::move(candidate);
            }
          }
        }
      } else {
        XmeansOptions opts;
        opts.k_min = config.k_min;
        opts.k_max = static_cast<int>(
            std::min<Eigen::Index>(config.k_max, train_p.rows()));
        opts.seed = session_seed;
        model = xmeans(train_p, opts);
      }
      hyp = assign_to_centroids(model, all_p);
      break;
    }
    case Algorithm::spectral: {
      model = spectral_cluster(train, k, session_seed);
      hyp = assign_to_centroids(model, emb);
      break;
    }
    case Algorithm::dec_original:
    case Algorithm::dec_improved: {
      DecConfig dc;
      dc.hidden = config.dec_full_arch ? 2048 : config.dec_hidden;
      dc.bottleneck = config.dec_bottleneck;
      dc.lr = config.dec_lr;
      dc.batch = config.dec_batch;
      dc.epochs = config.dec_epochs;
      dc.target_update_period = config.dec_target_update_period;
      dc.recalib_period = config.dec_recalib_period;
      dc.original_mode = config.algorithm == Algorithm::dec_original;
      dc.seed = session_seed;
      dc.pretrain.epochs = config.dec_pretrain_epochs;
      dc.pretrain.dropout_rate = config.dec_dropout;
      dc.pretrain.lr = config.dec_lr;
      dc.pretrain.batch = config.dec_batch;
      DecTrainResult trained = train_dec(train, k, dc);
      for (const std::string& w : trained.warnings) r.warnings.push_back(w);
      if (trained.diverged) {
        r.warnings.push_back(
            "training diverged; continuing from the last stable epoch");
      }
      model = trained.model;
      const Eigen::MatrixXd z_all = encode(trained.state.params, emb);
      hyp = assign_to_centroids(model, z_all);
      break;
    }
  }

  model.assignments = hyp;  // cover every segment, not just the training set
  r.model = std::move(model);
  r.hyp = std::move(hyp);
  r.profiles =
      profiles_from_session(embeddings, r.hyp, r.model.k, &r.warnings);

  r.with_merge = score(r.merged, r.hyp);
  r.hyp_raw = propagate_to_raw(r.merged, input.ref, r.hyp);
  r.without_merge = score(input.ref, r.hyp_raw);
  try {
    r.longer = score_filtered(r.merged, r.hyp, config.pca_min_duration,
                              DurationFilter::keep_longer);
    r.has_longer = true;
  } catch (const std::exception&) {
    r.has_longer = false;
  }
  try {
    r.shorter = score_filtered(r.merged, r.hyp, config.pca_min_duration,
                               DurationFilter::keep_shorter);
    r.has_shorter = true;
  } catch (const std::exception&) {
    r.has_shorter = false;
  }

  r.ok = true;
  return r;
}

// ---------------------------------------------------------------------------
// Manifest runs

namespace {

std::vector<SessionResult> run_pool(
    const std::vector<const SessionInput*>& items,
    const std::vector<std::uint64_t>& seeds, const PipelineConfig& config,
    const SpeakerProfiles* profiles) {
  const int n = static_cast<int>(items.size());
  std::vector<SessionResult> results(static_cast<std::size_t>(n));
  int workers = config.n_workers > 0
                    ? config.n_workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const std::size_t slot = static_cast<std::size_t>(i);
      try {
        results[slot] =
            run_session(*items[slot], config, seeds[slot], profiles);
      } catch (const std::exception& e) {
        results[slot] = SessionResult{};
        results[slot].session_id = items[slot]->frames.session_id.empty()
                                       ? items[slot]->ref.session_id
                                       : items[slot]->frames.session_id;
        results[slot].seed = seeds[slot];
        results[slot].ok = false;
        results[slot].error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

double weighted_recall(double correct, double total) {
  return total > 0.0 ? 100.0 * correct / total : kNan;
}

PipelineResult reduce(std::vector<SessionResult> results) {
  PipelineResult out;
  double correct_m = 0.0, total_m = 0.0;
  double correct_r = 0.0, total_r = 0.0;
  double correct_l = 0.0, total_l = 0.0;
  double correct_s = 0.0, total_s = 0.0;
  for (const SessionResult& r : results) {
    if (!r.ok) {
      ++out.n_failed;
      continue;
    }
    ++out.n_ok;
    correct_m += r.with_merge.correct;
    total_m += r.with_merge.total_speech;
    correct_r += r.without_merge.correct;
    total_r += r.without_merge.total_speech;
    if (r.has_longer) {
      correct_l += r.longer.correct;
      total_l += r.longer.total_speech;
    }
    if (r.has_shorter) {
      correct_s += r.shorter.correct;
      total_s += r.shorter.total_speech;
    }
  }
  out.recall_with_merge = weighted_recall(correct_m, total_m);
  out.recall_without_merge = weighted_recall(correct_r, total_r);
  out.recall_longer = weighted_recall(correct_l, total_l);
  out.recall_shorter = weighted_recall(correct_s, total_s);
  out.sessions = std::move(results);
  return out;
}

ordered_json json_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

void write_session_outputs(const SessionResult& r, const std::string& dir) {
  fs::create_directories(dir);

  std::vector<std::string> labels;
  labels.reserve(r.hyp.size());
  for (const int c : r.hyp) labels.push_back("c" + std::to_string(c));
  write_rttm_file(r.merged, labels, dir + "/hyp.rttm");

  ordered_json clusters;
  clusters["session_id"] = r.session_id;
  clusters["k"] = r.model.k;
  clusters["source"] = to_string(r.model.source);
  clusters["seed"] = r.seed;
  clusters["assignments"] = r.model.assignments;
  ordered_json centroids = ordered_json::array();
  for (Eigen::Index i = 0; i < r.model.centroids.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < r.model.centroids.cols(); ++j) {
      row.push_back(r.model.centroids(i, j));
    }
    centroids.push_back(std::move(row));
  }
  clusters["centroids"] = std::move(centroids);
  std::ofstream(dir + "/clusters.json") << clusters.dump(2) << "\n";

  ordered_json report;
  report["session_id"] = r.session_id;
  report["seed"] = r.seed;
  report["with_merge"] = ordered_json::parse(to_json(r.with_merge));
  report["without_merge"] = ordered_json::parse(to_json(r.without_merge));
  if (r.has_longer) {
    report["longer"] = ordered_json::parse(to_json(r.longer));
  }
  if (r.has_shorter) {
    report["shorter"] = ordered_json::parse(to_json(r.shorter));
  }
  report["warnings"] = r.warnings;
  std::ofstream(dir + "/report.json") << report.dump(2) << "\n";

  write_profiles(r.profiles, dir + "/profiles.json");
}

void write_aggregate_report(const PipelineResult& result,
                            const PipelineConfig& config,
                            const std::string& out_dir) {
  ordered_json j;
  j["config"] = ordered_json::parse(pipeline_config_to_json(config));
  ordered_json sessions = ordered_json::array();
  for (const SessionResult& r : result.sessions) {
    ordered_json s;
    s["session_id"] = r.session_id;
    s["ok"] = r.ok;
    if (r.ok) {
      s["recall_with_merge"] = json_or_null(r.with_merge.recall_pct);
      s["recall_without_merge"] = json_or_null(r.without_merge.recall_pct);
      s["total_speech"] = r.with_merge.total_speech;
      s["warnings"] = r.warnings;
    } else {
      s["error"] = r.error;
    }
    sessions.push_back(std::move(s));
  }
  j["sessions"] = std::move(sessions);
  ordered_json agg;
  agg["n_ok"] = result.n_ok;
  agg["n_failed"] = result.n_failed;
  agg["recall_with_merge"] = json_or_null(result.recall_with_merge);
  agg["recall_without_merge"] = json_or_null(result.recall_without_merge);
  agg["recall_longer"] = json_or_null(result.recall_longer);
  agg["recall_shorter"] = json_or_null(result.recall_shorter);
  j["aggregate"] = std::move(agg);
  fs::create_directories(out_dir);
  std::ofstream(out_dir + "/report.json") << j.dump(2) << "\n";
}

void write_outputs(const PipelineResult& result, const PipelineConfig& config,
                   const std::string& out_dir) {
  for (const SessionResult& r : result.sessions) {
    if (r.ok) write_session_outputs(r, out_dir + "/" + r.session_id);
  }
  write_aggregate_report(result, config, out_dir);
}

}  // namespace

PipelineResult run_pipeline(const std::vector<SessionInput>& inputs,
                            const PipelineConfig& config,
                            const std::string& out_dir) {
  validate(config);
  SpeakerProfiles profiles;
  bool have_profiles = false;
  if (!config.profiles_path.empty()) {
    profiles = read_profiles(config.profiles_path);
    have_profiles = true;
  }
  std::vector<const SessionInput*> items;
  std::vector<std::uint64_t> seeds;
  items.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    items.push_back(&inputs[i]);
    seeds.push_back(derive_seed(config.seed, i));
  }
  PipelineResult result = reduce(
      run_pool(items, seeds, config, have_profiles ? &profiles : nullptr));
  if (!out_dir.empty()) write_outputs(result, config, out_dir);
  return result;
}

PipelineResult run_pipeline(const std::string& manifest_path,
                            const PipelineConfig& config,
                            const std::string& out_dir) {
  validate(config);
  SpeakerProfiles profiles;
  bool have_profiles = false;
  if (!config.profiles_path.empty()) {
    profiles = read_profiles(config.profiles_path);
    have_profiles = true;
  }
  const std::vector<SessionSpec> specs = read_manifest(manifest_path);

  // Load failures poison only their own session; seeds stay bound to the
  // manifest position so a bad file never shifts another session's run.
  std::vector<SessionInput> loaded;
  std::vector<const SessionInput*> items;
  std::vector<std::uint64_t> seeds;
  std::vector<SessionResult> failed(specs.size());
  std::vector<bool> is_loaded(specs.size(), false);
  std::vector<std::size_t> loaded_pos(specs.size(), 0);
  loaded.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      SessionInput input;
      input.frames = load_session_frames(specs[i]);
      input.ref = read_rttm_file(specs[i].rttm_path);
      input.ref.session_id = specs[i].session_id;
      input.num_speakers = specs[i].num_speakers;
      loaded_pos[i] = loaded.size();
      loaded.push_back(std::move(input));
      is_loaded[i] = true;
    } catch (const std::exception& e) {
      failed[i].session_id = specs[i].session_id;
      failed[i].seed = derive_seed(config.seed, i);
      failed[i].ok = false;
      failed[i].error = e.what();
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (is_loaded[i]) {
      items.push_back(&loaded[loaded_pos[i]]);
      seeds.push_back(derive_seed(config.seed, i));
    }
  }
  std::vector<SessionResult> ran =
      run_pool(items, seeds, config, have_profiles ? &profiles : nullptr);

  std::vector<SessionResult> results(specs.size());
  std::size_t next_ran = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    results[i] = is_loaded[i] ? std::move(ran[next_ran++])
                              : std::move(failed[i]);
  }
  PipelineResult result = reduce(std::move(results));
  if (!out_dir.empty()) write_outputs(result, config, out_dir);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

std::string format_value(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::vector<std::pair<std::string, PipelineConfig>> sweep_settings(
    const PipelineConfig& base, SweepAxis axis) {
  std::vector<std::pair<std::string, PipelineConfig>> out;
  switch (axis) {
    case SweepAxis::min_duration: {
      for (const double v : {0.0, 0.5, 1.0, 1.5}) {
        PipelineConfig c = base;
        c.pca_min_duration = v;
        out.emplace_back("min_duration=" + format_value(v, 1), c);
      }
      break;
    }
    case SweepAxis::aggregation: {
      for (const Aggregation a : {Aggregation::median, Aggregation::mean}) {
        PipelineConfig c = base;
        c.aggregation = a;
        out.emplace_back(std::string("aggregation=") + to_string(a), c);
      }
      break;
    }
    case SweepAxis::algorithm: {
      for (const Algorithm a :
           {Algorithm::kmeans, Algorithm::spectral, Algorithm::xmeans,
            Algorithm::dec_original, Algorithm::dec_improved}) {
        PipelineConfig c = base;
        c.algorithm = a;
        if (a != Algorithm::kmeans) c.profiles_path.clear();
        out.emplace_back(std::string("algorithm=") + to_string(a), c);
      }
      break;
    }
    case SweepAxis::filter_order: {
      for (const int o : {-1, 0, 1, 2, 4}) {
        PipelineConfig c = base;
        c.filter_order = o;
        out.emplace_back(
            o < 0 ? std::string("filter_order=off")
                  : "filter_order=" + std::to_string(o),
            c);
      }
      break;
    }
  }
  return out;
}

std::string cell(double v) { return std::isfinite(v) ? format_value(v, 2) : "-"; }

std::string render_table(const std::vector<SweepRun>& runs) {
  std::size_t name_w = std::string("setting").size();
  for (const SweepRun& run : runs) name_w = std::max(name_w, run.setting.size());

  auto row = [&](const std::string& setting, const std::string& merged,
                 const std::string& raw, const std::string& longer,
                 const std::string& shorter, const std::string& sessions) {
    std::string line(setting);
    line.resize(name_w, ' ');
    auto col = [&line](const std::string& v, std::size_t width) {
      line += "  ";
      std::string padded = v;
      if (padded.size() < width) {
        padded.insert(padded.begin(), width - padded.size(), ' ');
      }
      line += padded;
    };
    col(merged, 12);
    col(raw, 12);
    col(longer, 12);
    col(shorter, 12);
    col(sessions, 8);
    return line + "\n";
  };

  std::string table;
  table += row("setting", "recall", "recall_raw", "recall_long",
               "recall_short", "ok");
  table += std::string(name_w + 4 * 14 + 10, '-') + "\n";
  for (const SweepRun& run : runs) {
    const PipelineResult& r = run.result;
    table += row(run.setting, cell(r.recall_with_merge),
                 cell(r.recall_without_merge), cell(r.recall_longer),
                 cell(r.recall_shorter),
                 std::to_string(r.n_ok) + "/" +
                     std::to_string(r.n_ok + r.n_failed));
  }
  return table;
}

}  // namespace

SweepResult run_sweep(const std::vector<SessionInput>& inputs,
                      const PipelineConfig& base_config, SweepAxis axis,
                      const std::string& out_dir) {
  validate(base_config);
  SweepResult sweep;
  sweep.axis = axis;
  for (auto& [setting, config] : sweep_settings(base_config, axis)) {
    SweepRun run;
    run.setting = setting;
    run.result = run_pipeline(
        inputs, config, out_dir.empty() ? "" : out_dir + "/" + setting);
    sweep.runs.push_back(std::move(run));
  }
  sweep.table = render_table(sweep.runs);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(out_dir + "/sweep.txt") << sweep.table;
  }
  return sweep;
}

SweepResult run_sweep(const std::string& manifest_path,
                      const PipelineConfig& base_config, SweepAxis axis,
                      const std::string& out_dir) {
  const std::vector<SessionSpec> specs = read_manifest(manifest_path);
  std::vector<SessionInput> inputs;
  inputs.reserve(specs.size());
  for (const SessionSpec& spec : specs) {
    SessionInput input;
    input.frames = load_session_frames(spec);
    input.ref = read_rttm_file(spec.rttm_path);
    input.ref.session_id = spec.session_id;
    input.num_speakers = spec.num_speakers;
    inputs.push_back(std::move(input));
  }
  return run_sweep(inputs, base_config, axis, out_dir);
}

}  // namespace diarcluster
