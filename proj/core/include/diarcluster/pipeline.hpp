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

#ifndef DIARCLUSTER_PIPELINE_HPP_
#define DIARCLUSTER_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "diarcluster/aggregate.hpp"
#include "diarcluster/scoring.hpp"
#include "diarcluster/types.hpp"

namespace diarcluster {

enum class Algorithm { kmeans, spectral, xmeans, dec_original, dec_improved };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

// End-to-end pipeline settings: smooth -> aggregate -> (PCA) -> cluster ->
// score.  PCA applies to the centroid-based algorithms only; spectral and
// the DEC modes cluster the raw aggregated embeddings.
struct PipelineConfig {
  int filter_order = 4;  // binomial smoothing order; negative disables it
  Aggregation aggregation = Aggregation::median;
  int pca_dim = 70;  // 0 disables the projection
  // Components whose eigenvalue falls below this fraction of the largest
  // eigenvalue are dropped before whitening: inflating a near-degenerate
  // direction to unit variance would only add noise.  0 keeps all pca_dim.
  double pca_eigenvalue_floor = 1e-2;
  // Training-set duration threshold: PCA and centroids are fitted on
  // segments strictly longer than this, then every segment is assigned.
  double pca_min_duration = 1.0;
  Algorithm algorithm = Algorithm::kmeans;
  int k = 0;      // 0: per-session speaker count from manifest or reference
  int k_min = 1;  // xmeans search range
  int k_max = 16;
  // k-means++ runs per session; the restart with the lowest within-cluster
  // sum of squares wins.  Ignored for the profiles initializer.
  int kmeans_restarts = 10;
  double collar = 0.25;  // sub-collar silences are treated as speech
  // DEC profile.  full_arch switches the hidden width to 2048 (the
  // production-size stack); the default 256 keeps desk-scale runtimes.
  int dec_hidden = 256;
  bool dec_full_arch = false;
  int dec_bottleneck = 15;
  int dec_epochs = 60;
  int dec_batch = 64;
  double dec_lr = 0.001;
  int dec_pretrain_epochs = 30;
  double dec_dropout = 0.2;
  int dec_target_update_period = 5;
  int dec_recalib_period = 20;
  std::string profiles_path;  // optional k-means initializer (kmeans only)
  int n_workers = 0;          // session pool size; 0 = hardware concurrency
  std::uint64_t seed = 0;
};

void validate(const PipelineConfig& config);

// JSON round trip.  Keys mirror the field names, with the dec_* fields
// nested under "dec" (e.g. {"dec": {"hidden": 512}}).  Unknown keys are
// errors.  Overrides are "key=value" pairs using dot paths into the JSON
// tree ("dec.epochs=10"); values parse as JSON when possible and as strings
// otherwise.
PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides);

// One session's inputs: raw frames plus the oracle (unmerged) segmentation.
struct SessionInput {
  FrameMatrix frames;
  SegmentTable ref;
  int num_speakers = 0;  // 0: count the distinct reference speakers
};

struct SessionResult {
  std::string session_id;
  bool ok = false;
  std::string error;          // failure reason when !ok
  std::uint64_t seed = 0;     // per-session seed actually used
  SegmentTable merged;  // collar-merged reference table (the working table)
  std::vector<int> hyp;      // cluster id per merged segment
  std::vector<int> hyp_raw;  // cluster id per raw segment
  // Cluster model with assignments covering every merged segment; centroids
  // live in the clustering space (PCA space for kmeans/xmeans, embedding
  // space for spectral, bottleneck space for the DEC modes).
  ClusterModel model;
  SpeakerProfiles profiles;  // per-cluster median of member embeddings
  ScoreReport with_merge;     // scored on the merged table
  ScoreReport without_merge;  // scored on the raw table
  // Scores restricted to merged segments longer (respectively not longer)
  // than pca_min_duration; the has_* flags clear when the subset is empty.
  ScoreReport longer;
  ScoreReport shorter;
  bool has_longer = false;
  bool has_shorter = false;
  std::vector<std::string> warnings;
};

// Runs one session end to end.  Failures propagate as exceptions; callers
// that need the skip-and-report behavior use run_pipeline.
SessionResult run_session(const SessionInput& input,
                          const PipelineConfig& config,
                          std::uint64_t session_seed,
                          const SpeakerProfiles* profiles = nullptr);

struct PipelineResult {
  std::vector<SessionResult> sessions;  // manifest order
  int n_ok = 0;
  int n_failed = 0;
  // Duration-weighted aggregates over the successful sessions (NaN when the
  // contributing set is empty).
  double recall_with_merge = 0.0;
  double recall_without_merge = 0.0;
  double recall_longer = 0.0;
  double recall_shorter = 0.0;
};

// Processes the sessions in a worker pool (session i uses the seed derived
// from config.seed and i), reduces in manifest order, and — when out_dir is
// non-empty — writes per-session directories (hypothesis RTTM, cluster JSON,
// score report, profiles) plus an aggregate report.json embedding the
// resolved config.  Per-session failures are recorded and skipped.
PipelineResult run_pipeline(const std::vector<SessionInput>& inputs,
                            const PipelineConfig& config,
                            const std::string& out_dir = "");
PipelineResult run_pipeline(const std::string& manifest_path,
                            const PipelineConfig& config,
                            const std::string& out_dir = "");

enum class SweepAxis { min_duration, aggregation, algorithm, filter_order };

const char* to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepRun {
  std::string setting;  // e.g. "min_duration=0.5"
  PipelineResult result;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::min_duration;
  std::vector<SweepRun> runs;
  std::string table;  // fixed-width comparison table
};

// One pipeline run per axis value at constant seed: min_duration sweeps
// {0, 0.5, 1.0, 1.5}; aggregation {median, mean}; algorithm all five;
// filter_order {off, 0, 1, 2, 4}.  Per-run outputs land under
// out_dir/<setting>/ when out_dir is non-empty.
SweepResult run_sweep(const std::vector<SessionInput>& inputs,
                      const PipelineConfig& base_config, SweepAxis axis,
                      const std::string& out_dir = "");
SweepResult run_sweep(const std::string& manifest_path,
                      const PipelineConfig& base_config, SweepAxis axis,
                      const std::string& out_dir = "");

// Speaker profiles from a prior session's clustering: one vector per
// cluster, the per-dimension median of that cluster's segment embeddings.
// Empty clusters are excluded with a warning pushed to `warnings`.
SpeakerProfiles profiles_from_session(
    const std::vector<SegmentEmbedding>& embeddings,
    const std::vector<int>& assignments, int k,
    std::vector<std::string>* warnings = nullptr);

}  // namespace diarcluster

#endif  // DIARCLUSTER_PIPELINE_HPP_
