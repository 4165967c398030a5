// End-to-end tests of the session pipeline: configuration parsing and
// overrides, the smooth/aggregate/project/cluster/score chain, the worker
// pool with failure isolation, on-disk outputs and their reproducibility,
// parameter sweeps, and profile extraction.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "diarcluster/frame_io.hpp"
#include "diarcluster/pipeline.hpp"
#include "diarcluster/rng.hpp"
#include "diarcluster/rttm.hpp"
#include "diarcluster/synthgen.hpp"

using namespace diarcluster;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("diarcluster_pipe_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

SynthConfig session_config(const std::string& id, std::uint64_t seed) {
  SynthConfig config;
  config.session_id = id;
  config.n_speakers = 4;
  config.dim = 16;
  config.speaker_separation = 18.0;
  config.frame_noise_std = 1.0;
  config.n_segments = 40;
  config.duration = DurationDist{0.5, 3.0, 1.0};
  config.seed = seed;
  return config;
}

SessionInput as_input(const SynthSession& session) {
  SessionInput input;
  input.frames = session.frames;
  input.ref = session.segments;
  return input;
}

PipelineConfig fast_config() {
  PipelineConfig config;
  config.filter_order = 2;
  config.pca_dim = 6;
  config.pca_eigenvalue_floor = 0.0;  // keep the full requested projection
  config.kmeans_restarts = 3;
  config.n_workers = 2;
  config.seed = 1234;
  return config;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

TEST_CASE("algorithm and sweep-axis names round-trip") {
  for (Algorithm a : {Algorithm::kmeans, Algorithm::spectral,
                      Algorithm::xmeans, Algorithm::dec_original,
                      Algorithm::dec_improved})
    CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK_THROWS_AS(algorithm_from_string("gmm"), std::invalid_argument);

  for (SweepAxis axis :
       {SweepAxis::min_duration, SweepAxis::aggregation, SweepAxis::algorithm,
        SweepAxis::filter_order})
    CHECK(sweep_axis_from_string(to_string(axis)) == axis);
  CHECK_THROWS_AS(sweep_axis_from_string("collar"), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range settings") {
  PipelineConfig config;
  CHECK_NOTHROW(validate(config));

  config = PipelineConfig{};
  config.pca_dim = -1;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);

  config = PipelineConfig{};
  config.k = -2;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);

  config = PipelineConfig{};
  config.k_min = 5;
  config.k_max = 2;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);

  config = PipelineConfig{};
  config.kmeans_restarts = 0;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);

  config = PipelineConfig{};
  config.dec_lr = 0.0;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);

  config = PipelineConfig{};
  config.dec_dropout = 1.0;
  CHECK_THROWS_AS(validate(config), std::invalid_argument);
}

TEST_CASE("configs survive a JSON round trip") {
  PipelineConfig config = fast_config();
  config.algorithm = Algorithm::xmeans;
  config.aggregation = Aggregation::mean;
  config.k_min = 2;
  config.k_max = 9;
  config.dec_hidden = 48;

  const PipelineConfig parsed =
      pipeline_config_from_json(pipeline_config_to_json(config));
  CHECK(parsed.filter_order == config.filter_order);
  CHECK(parsed.aggregation == config.aggregation);
  CHECK(parsed.pca_dim == config.pca_dim);
  CHECK(parsed.pca_eigenvalue_floor == config.pca_eigenvalue_floor);
  CHECK(parsed.pca_min_duration == config.pca_min_duration);
  CHECK(parsed.algorithm == config.algorithm);
  CHECK(parsed.k_min == config.k_min);
  CHECK(parsed.k_max == config.k_max);
  CHECK(parsed.kmeans_restarts == config.kmeans_restarts);
  CHECK(parsed.dec_hidden == config.dec_hidden);
  CHECK(parsed.seed == config.seed);

  // The profiles path survives too (it constrains the algorithm to k-means).
  PipelineConfig with_profiles;
  with_profiles.profiles_path = "profiles.json";
  CHECK(pipeline_config_from_json(pipeline_config_to_json(with_profiles))
            .profiles_path == "profiles.json");
}

TEST_CASE("unknown configuration keys are rejected") {
  CHECK_THROWS_AS(pipeline_config_from_json("{\"filtre\": 3}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(pipeline_config_from_json("{\"dec\": {\"layers\": 2}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(pipeline_config_from_json("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(pipeline_config_from_json("{\"pca_dim\": -3}"),
                  std::invalid_argument);
}

TEST_CASE("file loading applies dotted overrides") {
  const std::filesystem::path dir = fresh_dir("config");
  const std::filesystem::path path = dir / "config.json";
  {
    std::ofstream out(path);
    out << "{\"algorithm\": \"spectral\", \"seed\": 5, "
        << "\"dec\": {\"epochs\": 12}}\n";
  }
  const PipelineConfig loaded = load_pipeline_config(
      path.string(),
      {"seed=99", "dec.epochs=3", "aggregation=mean", "filter_order=-1"});
  CHECK(loaded.algorithm == Algorithm::spectral);
  CHECK(loaded.seed == 99);
  CHECK(loaded.dec_epochs == 3);
  CHECK(loaded.aggregation == Aggregation::mean);
  CHECK(loaded.filter_order == -1);

  CHECK_THROWS_AS(load_pipeline_config(path.string(), {"nonsense"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(load_pipeline_config((dir / "absent.json").string(), {}),
                  std::runtime_error);
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Single sessions
// ---------------------------------------------------------------------------

TEST_CASE("a separated session is solved end to end") {
  const SynthSession session = generate_session(session_config("one", 70));
  const SessionResult result =
      run_session(as_input(session), fast_config(), 555);

  CHECK(result.ok);
  CHECK(result.session_id == "one");
  CHECK(result.seed == 555);
  CHECK(result.error.empty());
  CHECK(result.model.k == 4);  // resolved from the reference speakers
  CHECK(result.hyp.size() == result.merged.segments.size());
  CHECK(result.hyp_raw.size() == session.segments.segments.size());
  CHECK(result.with_merge.recall_pct >= 99.0);
  CHECK(result.without_merge.recall_pct >= 99.0);
  CHECK(result.profiles.vectors.rows() == 4);
  // Durations straddle the 1 s threshold, so both duration-restricted
  // reports exist.
  CHECK(result.has_longer);
  CHECK(result.has_shorter);
}

TEST_CASE("each algorithm clusters in its documented space") {
  const SynthSession session = generate_session(session_config("space", 71));
  const SessionInput input = as_input(session);

  PipelineConfig config = fast_config();
  config.algorithm = Algorithm::kmeans;
  CHECK(run_session(input, config, 1).model.centroids.cols() == 6);

  config.algorithm = Algorithm::xmeans;
  config.k_min = 1;
  config.k_max = 8;
  CHECK(run_session(input, config, 1).model.centroids.cols() == 6);

  // Spectral bypasses the projection and stays in embedding coordinates.
  config = fast_config();
  config.algorithm = Algorithm::spectral;
  CHECK(run_session(input, config, 1).model.centroids.cols() == 16);

  // The DEC modes cluster bottleneck codes.
  config = fast_config();
  config.algorithm = Algorithm::dec_improved;
  config.dec_hidden = 16;
  config.dec_bottleneck = 3;
  config.dec_epochs = 3;
  config.dec_pretrain_epochs = 2;
  CHECK(run_session(input, config, 1).model.centroids.cols() == 3);
}

TEST_CASE("an explicit cluster count overrides the reference") {
  const SynthSession session = generate_session(session_config("k", 72));
  PipelineConfig config = fast_config();
  config.k = 2;
  const SessionResult result = run_session(as_input(session), config, 9);
  CHECK(result.model.k == 2);
  std::set<int> used(result.hyp.begin(), result.hyp.end());
  CHECK(used.size() <= 2);
}

// ---------------------------------------------------------------------------
// Pipeline runs
// ---------------------------------------------------------------------------

TEST_CASE("the pool processes sessions in manifest order with derived seeds") {
  std::vector<SessionInput> inputs;
  inputs.push_back(as_input(generate_session(session_config("alpha", 73))));
  inputs.push_back(as_input(generate_session(session_config("beta", 74))));

  const PipelineConfig config = fast_config();
  const PipelineResult result = run_pipeline(inputs, config);
  REQUIRE(result.sessions.size() == 2);
  CHECK(result.n_ok == 2);
  CHECK(result.n_failed == 0);
  CHECK(result.sessions[0].session_id == "alpha");
  CHECK(result.sessions[1].session_id == "beta");
  CHECK(result.sessions[0].seed == derive_seed(config.seed, 0));
  CHECK(result.sessions[1].seed == derive_seed(config.seed, 1));

  // Duration-weighted aggregation over the successful sessions.
  double weighted = 0.0;
  double total = 0.0;
  for (const SessionResult& s : result.sessions) {
    weighted += s.with_merge.recall_pct * s.with_merge.total_speech;
    total += s.with_merge.total_speech;
  }
  CHECK(result.recall_with_merge ==
        doctest::Approx(weighted / total).epsilon(1e-12));
}

TEST_CASE("one broken session does not sink the batch") {
  std::vector<SessionInput> inputs;
  inputs.push_back(as_input(generate_session(session_config("good", 75))));
  SessionInput broken =
      as_input(generate_session(session_config("bad", 76)));
  // Truncate the frames so later segments cover nothing.
  broken.frames.frames.conservativeResize(5, Eigen::NoChange);
  inputs.push_back(broken);

  const PipelineResult result = run_pipeline(inputs, fast_config());
  REQUIRE(result.sessions.size() == 2);
  CHECK(result.n_ok == 1);
  CHECK(result.n_failed == 1);
  CHECK(result.sessions[0].ok);
  CHECK_FALSE(result.sessions[1].ok);
  CHECK_FALSE(result.sessions[1].error.empty());
  // The aggregate covers the surviving session.
  CHECK(result.recall_with_merge ==
        doctest::Approx(result.sessions[0].with_merge.recall_pct)
            .epsilon(1e-12));
}

TEST_CASE("output directories are complete and rerun byte-identical") {
  std::vector<SessionInput> inputs;
  inputs.push_back(as_input(generate_session(session_config("disk", 77))));

  const std::filesystem::path out1 = fresh_dir("out1");
  const std::filesystem::path out2 = fresh_dir("out2");
  const PipelineConfig config = fast_config();
  run_pipeline(inputs, config, out1.string());
  run_pipeline(inputs, config, out2.string());

  for (const char* name :
       {"hyp.rttm", "clusters.json", "report.json", "profiles.json"}) {
    CAPTURE(name);
    const std::filesystem::path file = out1 / "disk" / name;
    REQUIRE(std::filesystem::exists(file));
    CHECK(slurp(file) == slurp(out2 / "disk" / name));
  }
  REQUIRE(std::filesystem::exists(out1 / "report.json"));
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));

  // The aggregate report embeds the resolved configuration.
  const nlohmann::json report =
      nlohmann::json::parse(slurp(out1 / "report.json"));
  CHECK(report.contains("config"));
  CHECK(report.at("config").at("pca_dim").get<int>() == 6);

  // The hypothesis RTTM uses cluster labels and parses back.
  const SegmentTable hyp = read_rttm_file((out1 / "disk" / "hyp.rttm").string());
  CHECK(hyp.session_id == "disk");
  REQUIRE(!hyp.segments.empty());
  REQUIRE(hyp.segments.front().ref_speaker.has_value());
  CHECK(hyp.segments.front().ref_speaker->rfind("c", 0) == 0);

  const nlohmann::json clusters =
      nlohmann::json::parse(slurp(out1 / "disk" / "clusters.json"));
  CHECK(clusters.at("k").get<int>() == 4);
  CHECK(clusters.contains("assignments"));
  CHECK(clusters.contains("centroids"));

  std::filesystem::remove_all(out1);
  std::filesystem::remove_all(out2);
}

TEST_CASE("sessions load through a manifest file") {
  const SynthSession session = generate_session(session_config("mani", 78));
  const std::filesystem::path dir = fresh_dir("manifest");

  write_frames(session.frames, (dir / "mani.frames").string());
  write_rttm_file(session.segments, [&] {
    std::vector<std::string> labels;
    for (const Segment& segment : session.segments.segments)
      labels.push_back(*segment.ref_speaker);
    return labels;
  }(), (dir / "mani.rttm").string());

  SessionSpec spec;
  spec.session_id = "mani";
  spec.frames_path = "mani.frames";  // relative to the manifest
  spec.rttm_path = "mani.rttm";
  write_manifest({spec}, (dir / "manifest.json").string());

  const PipelineResult via_files =
      run_pipeline((dir / "manifest.json").string(), fast_config());
  REQUIRE(via_files.sessions.size() == 1);
  CHECK(via_files.n_ok == 1);

  const PipelineResult direct = run_pipeline(
      std::vector<SessionInput>{as_input(session)}, fast_config());
  CHECK(via_files.recall_with_merge ==
        doctest::Approx(direct.recall_with_merge).epsilon(1e-9));
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

TEST_CASE("an aggregation sweep covers both settings faithfully") {
  std::vector<SessionInput> inputs;
  inputs.push_back(as_input(generate_session(session_config("sweep", 79))));

  const std::filesystem::path out = fresh_dir("sweep");
  const PipelineConfig base = fast_config();
  const SweepResult sweep =
      run_sweep(inputs, base, SweepAxis::aggregation, out.string());
  REQUIRE(sweep.runs.size() == 2);
  CHECK(sweep.runs[0].setting == "aggregation=median");
  CHECK(sweep.runs[1].setting == "aggregation=mean");
  CHECK(sweep.table.find("aggregation=median") != std::string::npos);
  CHECK(sweep.table.find("aggregation=mean") != std::string::npos);
  CHECK(std::filesystem::exists(out / "sweep.txt"));
  CHECK(std::filesystem::exists(out / "aggregation=mean" / "report.json"));

  // Each run equals the standalone pipeline at that setting.
  PipelineConfig mean_config = base;
  mean_config.aggregation = Aggregation::mean;
  const PipelineResult standalone = run_pipeline(inputs, mean_config);
  CHECK(sweep.runs[1].result.recall_with_merge ==
        doctest::Approx(standalone.recall_with_merge).epsilon(1e-12));
  std::filesystem::remove_all(out);
}

TEST_CASE("the filter-order sweep spans off through order four") {
  std::vector<SessionInput> inputs;
  inputs.push_back(as_input(generate_session(session_config("filt", 80))));
  const SweepResult sweep =
      run_sweep(inputs, fast_config(), SweepAxis::filter_order);
  REQUIRE(sweep.runs.size() == 5);
  CHECK(sweep.runs[0].setting == "filter_order=off");
  CHECK(sweep.runs[4].setting == "filter_order=4");
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

TEST_CASE("profiles are per-cluster medians with empty clusters dropped") {
  std::vector<SegmentEmbedding> embeddings(5);
  for (int i = 0; i < 5; ++i) {
    embeddings[static_cast<std::size_t>(i)].vector = Eigen::VectorXd(2);
    embeddings[static_cast<std::size_t>(i)].segment_index = i;
  }
  embeddings[0].vector << 1.0, 10.0;
  embeddings[1].vector << 2.0, 20.0;
  embeddings[2].vector << 3.0, 30.0;
  embeddings[3].vector << -5.0, 7.0;
  embeddings[4].vector << -7.0, 5.0;
  const std::vector<int> assignments = {0, 0, 0, 2, 2};

  std::vector<std::string> warnings;
  const SpeakerProfiles profiles =
      profiles_from_session(embeddings, assignments, 3, &warnings);
  REQUIRE(profiles.labels.size() == 2);
  CHECK(profiles.labels[0] == "c0");
  CHECK(profiles.labels[1] == "c2");
  CHECK(profiles.vectors(0, 0) == doctest::Approx(2.0).epsilon(0.0));
  CHECK(profiles.vectors(0, 1) == doctest::Approx(20.0).epsilon(0.0));
  CHECK(profiles.vectors(1, 0) == doctest::Approx(-6.0).epsilon(0.0));
  CHECK(profiles.vectors(1, 1) == doctest::Approx(6.0).epsilon(0.0));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("cluster 1") != std::string::npos);

  CHECK_THROWS_AS(profiles_from_session(embeddings, {0, 0}, 2, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(profiles_from_session(embeddings, assignments, 0, nullptr),
                  std::invalid_argument);
}

TEST_CASE("supplied profiles drive the k-means initialization") {
  const SynthSession session = generate_session(session_config("prof", 81));
  const std::filesystem::path dir = fresh_dir("profiles");
  const std::filesystem::path path = dir / "profiles.json";
  write_profiles(session.profiles, path.string());

  PipelineConfig config = fast_config();
  config.pca_dim = 0;  // profiles live in embedding space
  config.filter_order = -1;
  config.profiles_path = path.string();
  const SessionResult result = run_session(as_input(session), config, 3);
  CHECK(result.ok);
  CHECK(result.model.source == CentroidSource::profile_init);
  CHECK(result.with_merge.recall_pct >= 99.0);
  std::filesystem::remove_all(dir);
}
