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
//
// diarcluster command-line front end:
//   run       end-to-end pipeline over a manifest
//   sweep     one pipeline run per value of a config axis
//   synth     deterministic synthetic session suites
//   score     score a hypothesis RTTM against a reference RTTM
//   pretrain  autoencoder pretraining on a manifest's embeddings
//
// Exit codes: 0 success, 2 partial per-session failures, 1 hard error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diarcluster/aggregate.hpp"
#include "diarcluster/autoencoder.hpp"
#include "diarcluster/dec.hpp"
#include "diarcluster/frame_io.hpp"
#include "diarcluster/kmeans.hpp"
#include "diarcluster/pipeline.hpp"
#include "diarcluster/rng.hpp"
#include "diarcluster/rttm.hpp"
#include "diarcluster/scoring.hpp"
#include "diarcluster/smoothing.hpp"
#include "diarcluster/synthgen.hpp"

namespace {

namespace fs = std::filesystem;
using diarcluster::PipelineConfig;
using ordered_json = nlohmann::ordered_json;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_config_options(CLI::App* sub, CommonArgs* args) {
  sub->add_option("--config", args->config_path,
                  "pipeline config JSON file (defaults apply when omitted)");
  sub->add_option("--set", args->overrides,
                  "config override key=value (dot paths, repeatable)");
  sub->add_option("--seed", args->seed, "RNG seed (overrides the config)")
      ->default_val(0);
}

PipelineConfig resolve_config(const CLI::App* sub, CommonArgs* args) {
  PipelineConfig config =
      diarcluster::load_pipeline_config(args->config_path, args->overrides);
  if (sub->count("--seed") > 0) config.seed = args->seed;
  return config;
}

std::string fmt_pct(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

int finish_run(const diarcluster::PipelineResult& result) {
  for (const diarcluster::SessionResult& r : result.sessions) {
    if (r.ok) {
      std::cout << r.session_id << ": recall " << fmt_pct(r.with_merge.recall_pct)
                << " (raw " << fmt_pct(r.without_merge.recall_pct) << ", k="
                << r.model.k << ")\n";
      for (const std::string& w : r.warnings) {
        std::cerr << r.session_id << ": warning: " << w << "\n";
      }
    } else {
      std::cerr << r.session_id << ": failed: " << r.error << "\n";
    }
  }
  std::cout << "aggregate: recall " << fmt_pct(result.recall_with_merge)
            << " (raw " << fmt_pct(result.recall_without_merge) << "), "
            << result.n_ok << "/" << result.n_ok + result.n_failed
            << " sessions\n";
  if (result.n_ok == 0) return 1;
  return result.n_failed > 0 ? 2 : 0;
}

int cmd_run(const std::string& manifest, const CLI::App* sub, CommonArgs* args,
            const std::string& out_dir) {
  const PipelineConfig config = resolve_config(sub, args);
  return finish_run(diarcluster::run_pipeline(manifest, config, out_dir));
}

int cmd_sweep(const std::string& manifest, const CLI::App* sub,
              CommonArgs* args, const std::string& axis,
              const std::string& out_dir) {
  const PipelineConfig config = resolve_config(sub, args);
  const diarcluster::SweepResult sweep = diarcluster::run_sweep(
      manifest, config, diarcluster::sweep_axis_from_string(axis), out_dir);
  std::cout << sweep.table;
  int failed = 0, ok = 0;
  for (const diarcluster::SweepRun& run : sweep.runs) {
    failed += run.result.n_failed;
    ok += run.result.n_ok;
  }
  if (ok == 0) return 1;
  return failed > 0 ? 2 : 0;
}

int cmd_synth(const std::string& suite, std::uint64_t seed,
              const std::string& out_dir) {
  const std::vector<diarcluster::SynthSession> sessions =
      diarcluster::generate_suite(suite, seed);
  fs::create_directories(out_dir);
  std::vector<diarcluster::SessionSpec> specs;
  for (const diarcluster::SynthSession& s : sessions) {
    const std::string base = out_dir + "/" + s.config.session_id;
    diarcluster::write_frames(s.frames, base + ".frames");
    std::vector<std::string> labels;
    labels.reserve(s.segments.segments.size());
    for (const diarcluster::Segment& seg : s.segments.segments) {
      labels.push_back(seg.ref_speaker.value());
    }
    diarcluster::write_rttm_file(s.segments, labels, base + ".rttm");
    diarcluster::write_profiles(s.profiles, base + ".profiles.json");
    diarcluster::SessionSpec spec;
    spec.session_id = s.config.session_id;
    spec.frames_path = s.config.session_id + ".frames";
    spec.rttm_path = s.config.session_id + ".rttm";
    spec.num_speakers = s.config.n_speakers;
    specs.push_back(std::move(spec));
    std::cout << s.config.session_id << ": " << s.frames.n_frames()
              << " frames, " << s.segments.segments.size() << " segments, k="
              << s.config.n_speakers << "\n";
  }
  diarcluster::write_manifest(specs, out_dir + "/manifest.json");
  std::cout << "wrote " << sessions.size() << " sessions to " << out_dir
            << "\n";
  return 0;
}

// Labels each reference segment with the hypothesis segment covering its
// midpoint, then maps hypothesis labels to cluster ids by first appearance.
std::vector<int> hyp_ids_for_ref(const diarcluster::SegmentTable& ref,
                                 const diarcluster::SegmentTable& hyp) {
  std::vector<int> ids;
  ids.reserve(ref.segments.size());
  std::vector<std::string> order;
  std::size_t j = 0;
  for (const diarcluster::Segment& seg : ref.segments) {
    const double mid = 0.5 * (seg.start + seg.end);
    while (j + 1 < hyp.segments.size() && hyp.segments[j].end < mid) ++j;
    if (!hyp.segments[j].ref_speaker.has_value()) {
      throw std::invalid_argument("hypothesis RTTM has an unlabeled segment");
    }
    const std::string& label = *hyp.segments[j].ref_speaker;
    int id = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == label) {
        id = static_cast<int>(i);
        break;
      }
    }
    if (id < 0) {
      id = static_cast<int>(order.size());
      order.push_back(label);
    }
    ids.push_back(id);
  }
  return ids;
}

int cmd_score(const std::string& ref_path, const std::string& hyp_path,
              double collar, double min_duration,
              const std::string& out_path) {
  const diarcluster::SegmentTable ref = diarcluster::read_rttm_file(ref_path);
  const diarcluster::SegmentTable hyp = diarcluster::read_rttm_file(hyp_path);
  const diarcluster::SegmentTable merged =
      diarcluster::merge_short_silences(ref, collar);

  ordered_json j;
  j["ref"] = ref_path;
  j["hyp"] = hyp_path;
  j["collar"] = collar;
  const std::vector<int> ids_merged = hyp_ids_for_ref(merged, hyp);
  j["with_merge"] =
      ordered_json::parse(to_json(diarcluster::score(merged, ids_merged)));
  const std::vector<int> ids_raw = hyp_ids_for_ref(ref, hyp);
  j["without_merge"] =
      ordered_json::parse(to_json(diarcluster::score(ref, ids_raw)));
  if (min_duration >= 0.0) {
    j["min_duration"] = min_duration;
    j["longer"] = ordered_json::parse(to_json(diarcluster::score_filtered(
        merged, ids_merged, min_duration,
        diarcluster::DurationFilter::keep_longer)));
    j["shorter"] = ordered_json::parse(to_json(diarcluster::score_filtered(
        merged, ids_merged, min_duration,
        diarcluster::DurationFilter::keep_shorter)));
  }
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << text;
  }
  return 0;
}

int cmd_pretrain(const std::string& manifest, const CLI::App* sub,
                 CommonArgs* args, const std::string& out_dir) {
  const PipelineConfig config = resolve_config(sub, args);
  const std::vector<diarcluster::SessionSpec> specs =
      diarcluster::read_manifest(manifest);

  // Pool the aggregated segment embeddings of every session.
  std::vector<Eigen::VectorXd> rows;
  int k = config.k;
  std::set<std::string> speakers;
  for (const diarcluster::SessionSpec& spec : specs) {
    diarcluster::FrameMatrix frames = diarcluster::load_session_frames(spec);
    diarcluster::SegmentTable ref =
        diarcluster::read_rttm_file(spec.rttm_path);
    const diarcluster::SegmentTable merged =
        diarcluster::merge_short_silences(ref, config.collar);
    if (config.filter_order >= 0) {
      frames = diarcluster::smooth_frames(frames, config.filter_order);
    }
    for (const diarcluster::SegmentEmbedding& e : diarcluster::aggregate_table(
             frames, merged, config.aggregation)) {
      rows.push_back(e.vector);
      if (e.ref_speaker.has_value()) speakers.insert(*e.ref_speaker);
    }
  }
  if (rows.empty()) throw std::runtime_error("manifest yields no segments");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                       rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  if (k == 0) k = static_cast<int>(speakers.size());
  if (k < 1) throw std::runtime_error("cannot determine k for pretraining");

  const int hidden = config.dec_full_arch ? 2048 : config.dec_hidden;
  const int d = static_cast<int>(data.cols());
  const std::vector<int> layer_sizes = {
      d, hidden, hidden, config.dec_bottleneck, hidden, hidden, d};
  diarcluster::AutoencoderParams params = diarcluster::make_autoencoder(
      layer_sizes, diarcluster::derive_seed(config.seed, 0));
  diarcluster::PretrainConfig pre;
  pre.epochs = config.dec_pretrain_epochs;
  pre.dropout_rate = config.dec_dropout;
  pre.lr = config.dec_lr;
  pre.batch =
      std::min<int>(config.dec_batch, static_cast<int>(data.rows()));
  pre.seed = diarcluster::derive_seed(config.seed, 1);
  const diarcluster::PretrainResult trained =
      diarcluster::pretrain_autoencoder(params, data, pre);

  diarcluster::DecState state;
  state.params = trained.params;
  const Eigen::MatrixXd codes = diarcluster::encode(state.params, data);
  diarcluster::KmeansOptions ko;
  ko.k = std::min<int>(k, static_cast<int>(codes.rows()));
  ko.seed = diarcluster::derive_seed(config.seed, 2);
  state.centroids = diarcluster::kmeans(codes, ko).centroids;
  state.recalib_period = config.dec_recalib_period;

  fs::create_directories(out_dir);
  diarcluster::save_checkpoint(state, config.seed, 0,
                               out_dir + "/checkpoint.bin");
  std::ofstream curve(out_dir + "/pretrain_loss.csv");
  curve << "epoch,loss\n";
  curve.precision(17);
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
    curve << e << "," << trained.epoch_loss[e] << "\n";
  }
  std::cout << "pretrained " << layer_sizes.size() - 1 << "-layer stack on "
            << data.rows() << " embeddings";
  if (!trained.epoch_loss.empty()) {
    std::cout << ", final loss " << trained.epoch_loss.back();
  }
  std::cout << "; checkpoint in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speaker-embedding clustering pipeline"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "pipeline over a session manifest");
  std::string run_manifest, run_out = "out";
  CommonArgs run_args;
  run->add_option("--manifest", run_manifest, "manifest JSON")->required();
  run->add_option("--out", run_out, "output directory");
  add_config_options(run, &run_args);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "compare configs along one axis");
  std::string sweep_manifest, sweep_axis, sweep_out;
  CommonArgs sweep_args;
  sweep->add_option("--manifest", sweep_manifest, "manifest JSON")->required();
  sweep->add_option("--axis", sweep_axis,
                    "min_duration | aggregation | algorithm | filter_order")
      ->required();
  sweep->add_option("--out", sweep_out, "output directory (optional)");
  add_config_options(sweep, &sweep_args);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic suite");
  std::string synth_suite, synth_out = "synth_out";
  std::uint64_t synth_seed = 0;
  synth->add_option("--suite", synth_suite,
                    "easy | noisy | short_segments | many_speakers")
      ->required();
  synth->add_option("--seed", synth_seed, "RNG seed")->default_val(0);
  synth->add_option("--out", synth_out, "output directory");

  // score
  auto* score = app.add_subcommand("score", "score hypothesis vs reference");
  std::string score_ref, score_hyp, score_out;
  double score_collar = 0.25, score_min_duration = -1.0;
  score->add_option("--ref", score_ref, "reference RTTM")->required();
  score->add_option("--hyp", score_hyp, "hypothesis RTTM")->required();
  score->add_option("--collar", score_collar, "silence-merge collar seconds")
      ->default_val(0.25);
  score->add_option("--min-duration", score_min_duration,
                    "also report scores split at this duration");
  score->add_option("--out", score_out, "report path (stdout when omitted)");

  // pretrain
  auto* pretrain =
      app.add_subcommand("pretrain", "autoencoder pretraining checkpoint");
  std::string pre_manifest, pre_out = "pretrain_out";
  CommonArgs pre_args;
  pretrain->add_option("--manifest", pre_manifest, "manifest JSON")
      ->required();
  pretrain->add_option("--out", pre_out, "output directory");
  add_config_options(pretrain, &pre_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_manifest, run, &run_args, run_out);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_manifest, sweep, &sweep_args, sweep_axis,
                       sweep_out);
    }
    if (synth->parsed()) return cmd_synth(synth_suite, synth_seed, synth_out);
    if (score->parsed()) {
      return cmd_score(score_ref, score_hyp, score_collar, score_min_duration,
                       score_out);
    }
    if (pretrain->parsed()) {
      return cmd_pretrain(pre_manifest, pretrain, &pre_args, pre_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
