// Tests for the deep-embedded-clustering stack: the autoencoder forward and
// backward passes, Adamax pretraining, the Student-t soft assignment and its
// sharpened target, the four-term loss, finite-difference gradient checks,
// the trainer itself, and checkpoint/loss-curve serialization.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diarcluster/dec.hpp"
#include "diarcluster/kmeans.hpp"
#include "diarcluster/rng.hpp"

using namespace diarcluster;

namespace {

std::filesystem::path temp_file(const std::string& tag) {
  return std::filesystem::temp_directory_path() /
         ("diarcluster_dec_" + tag + "_" + std::to_string(::getpid()));
}

Eigen::MatrixXd gaussian_clouds(std::uint64_t seed, int per_cloud,
                                const std::vector<Eigen::VectorXd>& centers,
                                double sigma) {
  Rng rng(seed);
  const Eigen::Index dim = centers.front().size();
  Eigen::MatrixXd data(
      static_cast<Eigen::Index>(per_cloud * centers.size()), dim);
  Eigen::Index row = 0;
  for (const Eigen::VectorXd& center : centers)
    for (int i = 0; i < per_cloud; ++i, ++row)
      for (Eigen::Index c = 0; c < dim; ++c)
        data(row, c) = center(c) + sigma * rng.gaussian();
  return data;
}

std::vector<Eigen::VectorXd> simplex_centers(int k, Eigen::Index dim,
                                             double separation) {
  std::vector<Eigen::VectorXd> centers;
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
    center(j % dim) = (j < static_cast<int>(dim) ? separation : -separation);
    centers.push_back(center);
  }
  return centers;
}

// Fraction of samples matching `truth` under the best relabeling of the
// hypothesis (exhaustive over permutations; fine for small k).
double permutation_accuracy(const std::vector<int>& hyp,
                            const std::vector<int>& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) perm[static_cast<std::size_t>(j)] = j;
  int best = 0;
  do {
    int correct = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i)
      if (perm[static_cast<std::size_t>(hyp[i])] == truth[i]) ++correct;
    best = std::max(best, correct);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(hyp.size());
}

// A small, fully specified state for loss evaluations.
DecState toy_state() {
  DecState state;
  state.params = make_autoencoder({2, 3, 1, 3, 2}, 7);
  state.centroids.resize(2, 1);
  state.centroids << 0.0, 4.0;
  state.z.resize(2, 1);
  state.z << 0.0, 3.0;
  state.q = soft_assign(state.z, state.centroids);
  state.p = target_distribution(state.q);
  return state;
}

}  // namespace

// ---------------------------------------------------------------------------
// Autoencoder plumbing
// ---------------------------------------------------------------------------

TEST_CASE("initialization is fan-in bounded, zero-biased, deterministic") {
  const std::vector<int> sizes = {6, 5, 3, 5, 6};
  const AutoencoderParams params = make_autoencoder(sizes, 11);
  CHECK_NOTHROW(validate(params));
  REQUIRE(params.n_layers() == 4);
  CHECK(params.encoder_layers() == 2);
  CHECK(params.bottleneck_size() == 3);

  std::size_t expected_params = 0;
  for (int l = 0; l < 4; ++l) {
    const auto rows = static_cast<Eigen::Index>(sizes[static_cast<std::size_t>(l)]);
    const auto cols = static_cast<Eigen::Index>(sizes[static_cast<std::size_t>(l) + 1]);
    REQUIRE(params.weights[static_cast<std::size_t>(l)].rows() == rows);
    REQUIRE(params.weights[static_cast<std::size_t>(l)].cols() == cols);
    CHECK(params.biases[static_cast<std::size_t>(l)].isZero(0.0));
    const double bound = std::sqrt(6.0 / static_cast<double>(rows));
    CHECK(params.weights[static_cast<std::size_t>(l)].cwiseAbs().maxCoeff() <=
          bound + 1e-12);
    expected_params += static_cast<std::size_t>(rows * cols + cols);
  }
  CHECK(params.n_params() == expected_params);

  const AutoencoderParams again = make_autoencoder(sizes, 11);
  for (int l = 0; l < 4; ++l)
    CHECK(params.weights[static_cast<std::size_t>(l)] ==
          again.weights[static_cast<std::size_t>(l)]);
}

TEST_CASE("parameter validation rejects malformed networks") {
  AutoencoderParams params = make_autoencoder({4, 3, 4}, 1);
  CHECK_NOTHROW(validate(params));

  AutoencoderParams uneven = params;
  uneven.layer_sizes = {4, 3, 5};
  CHECK_THROWS_AS(validate(uneven), std::invalid_argument);

  AutoencoderParams bad_shape = params;
  bad_shape.weights[0] = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(validate(bad_shape), std::invalid_argument);

  AutoencoderParams non_finite = params;
  non_finite.weights[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(non_finite), std::invalid_argument);
}

TEST_CASE("a zeroed network maps everything to zero") {
  AutoencoderParams params = make_autoencoder({3, 2, 1, 2, 3}, 5);
  for (auto& w : params.weights) w.setZero();
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(4, 3);
  const ForwardCache cache = ae_forward(params, batch, 0.0, nullptr);
  CHECK(cache.latent(params).isZero(0.0));
  CHECK(cache.reconstruction().isZero(0.0));
}

TEST_CASE("an identity network reconstructs its input exactly") {
  AutoencoderParams params = make_autoencoder({2, 2, 2}, 3);
  params.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  params.weights[1] = Eigen::MatrixXd::Identity(2, 2);
  params.biases[0].setZero();
  params.biases[1].setZero();
  Eigen::MatrixXd batch(3, 2);
  batch << 1.0, -2.0, 0.5, 4.0, -3.0, -0.25;  // negatives survive: linear path
  const ForwardCache cache = ae_forward(params, batch, 0.0, nullptr);
  CHECK((cache.reconstruction() - batch).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(encode(params, batch) == cache.latent(params));
}

TEST_CASE("dropout is reproducible per seed and off at rate zero") {
  const AutoencoderParams params = make_autoencoder({4, 8, 2, 8, 4}, 9);
  const Eigen::MatrixXd batch = Eigen::MatrixXd::Random(6, 4);

  Rng rng_a(333);
  Rng rng_b(333);
  const ForwardCache a = ae_forward(params, batch, 0.5, &rng_a);
  const ForwardCache b = ae_forward(params, batch, 0.5, &rng_b);
  CHECK(a.reconstruction() == b.reconstruction());
  CHECK(a.latent(params) == b.latent(params));

  const ForwardCache no_rate = ae_forward(params, batch, 0.0, &rng_a);
  const ForwardCache no_rng = ae_forward(params, batch, 0.7, nullptr);
  CHECK(no_rate.reconstruction() == no_rng.reconstruction());
}

TEST_CASE("forward validation catches bad inputs") {
  const AutoencoderParams params = make_autoencoder({4, 3, 4}, 2);
  CHECK_THROWS_AS(ae_forward(params, Eigen::MatrixXd::Zero(2, 5), 0.0,
                             nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(ae_forward(params, Eigen::MatrixXd::Zero(2, 4), 1.0,
                             nullptr),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Pretraining
// ---------------------------------------------------------------------------

TEST_CASE("zero pretraining epochs return the parameters untouched") {
  const AutoencoderParams params = make_autoencoder({3, 2, 3}, 13);
  PretrainConfig config;
  config.epochs = 0;
  config.batch = 4;
  const Eigen::MatrixXd data = Eigen::MatrixXd::Random(8, 3);
  const PretrainResult result = pretrain_autoencoder(params, data, config);
  for (int l = 0; l < params.n_layers(); ++l) {
    CHECK(result.params.weights[static_cast<std::size_t>(l)] ==
          params.weights[static_cast<std::size_t>(l)]);
    CHECK(result.params.biases[static_cast<std::size_t>(l)] ==
          params.biases[static_cast<std::size_t>(l)]);
  }
  CHECK(result.epoch_loss.empty());
}

TEST_CASE("a linear bottleneck learns rank-one data to machine precision") {
  Rng rng(14);
  Eigen::VectorXd direction(2);
  direction << 1.0, 2.0;
  direction.normalize();
  Eigen::MatrixXd data(64, 2);
  for (Eigen::Index i = 0; i < 64; ++i)
    data.row(i) = rng.gaussian() * direction.transpose();

  PretrainConfig config;
  config.epochs = 500;
  config.dropout_rate = 0.0;
  config.lr = 0.01;
  config.batch = 64;
  config.seed = 15;
  const PretrainResult result =
      pretrain_autoencoder(make_autoencoder({2, 1, 2}, 16), data, config);
  REQUIRE(result.epoch_loss.size() == 500);
  CHECK(result.epoch_loss.back() < 1e-3);
}

TEST_CASE("the pretraining loss trends down on clustered data") {
  const Eigen::MatrixXd data =
      gaussian_clouds(17, 40, simplex_centers(2, 4, 5.0), 1.0);
  PretrainConfig config;
  config.epochs = 60;
  config.dropout_rate = 0.0;
  config.batch = 16;
  config.seed = 18;
  const PretrainResult result =
      pretrain_autoencoder(make_autoencoder({4, 16, 2, 16, 4}, 19), data,
                           config);
  REQUIRE(result.epoch_loss.size() == 60);
  for (std::size_t e = 0; e + 10 < 60; e += 10)
    CHECK(result.epoch_loss[e + 10] < result.epoch_loss[e]);
  // Overall reduction of at least half.
  CHECK(result.epoch_loss.back() < 0.5 * result.epoch_loss.front());
}

TEST_CASE("pretraining needs at least one full batch") {
  PretrainConfig config;
  config.batch = 64;
  CHECK_THROWS_AS(
      pretrain_autoencoder(make_autoencoder({3, 2, 3}, 1),
                           Eigen::MatrixXd::Random(10, 3), config),
      std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Soft assignment and targets
// ---------------------------------------------------------------------------

TEST_CASE("a code sitting on a centroid claims nearly all its mass") {
  Eigen::MatrixXd z(1, 2);
  z << 0.0, 0.0;
  Eigen::MatrixXd centroids(2, 2);
  centroids << 0.0, 0.0, 1e6, 0.0;
  const Eigen::MatrixXd q = soft_assign(z, centroids, 1.0);
  CHECK(q(0, 0) > 0.999999);
  CHECK(q.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equidistant centroids share the assignment evenly") {
  Eigen::MatrixXd z(1, 1);
  z << 0.0;
  Eigen::MatrixXd centroids(2, 1);
  centroids << -2.0, 2.0;
  const Eigen::MatrixXd q = soft_assign(z, centroids);
  CHECK(q(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("the default kernel matches a hand evaluation") {
  // Distances 1 and sqrt(3) with a=1: kernel values (1+1)^-2 and (1+3)^-2,
  // i.e. 0.25 and 0.0625, normalizing to 0.8 / 0.2.
  Eigen::MatrixXd z(1, 1);
  z << 0.0;
  Eigen::MatrixXd centroids(2, 1);
  centroids << 1.0, std::sqrt(3.0);
  const Eigen::MatrixXd q = soft_assign(z, centroids, 1.0);
  CHECK(q(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("the alternative exponent convention is selectable") {
  Eigen::MatrixXd z(1, 1);
  z << 0.0;
  Eigen::MatrixXd centroids(2, 1);
  centroids << 1.0, std::sqrt(3.0);
  // a=1 with exponent (a+1)/2 = 1: kernels 1/2 and 1/4 -> 2/3, 1/3.
  const Eigen::MatrixXd q =
      soft_assign(z, centroids, 1.0, StudentExponent::standard);
  CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // A non-unit dof changes the printed exponent to (a+1)/a.
  Eigen::MatrixXd far(1, 1);
  far << 3.0;
  Eigen::MatrixXd two(2, 1);
  two << 0.0, 3.0;
  const Eigen::MatrixXd qa = soft_assign(far, two, 3.0);
  const double k0 = std::pow(1.0 + 9.0 / 3.0, -4.0 / 3.0);
  const double k1 = 1.0;
  CHECK(qa(0, 0) == doctest::Approx(k0 / (k0 + k1)).epsilon(1e-12));
}

TEST_CASE("exponent conventions round-trip through strings") {
  CHECK(std::string(to_string(StudentExponent::as_printed)) == "as_printed");
  CHECK(std::string(to_string(StudentExponent::standard)) == "standard");
  CHECK(student_exponent_from_string("as_printed") ==
        StudentExponent::as_printed);
  CHECK(student_exponent_from_string("standard") ==
        StudentExponent::standard);
  CHECK_THROWS_AS(student_exponent_from_string("cauchy"),
                  std::invalid_argument);
}

TEST_CASE("soft assignments form proper probability rows") {
  Rng rng(20);
  Eigen::MatrixXd z(40, 3);
  Eigen::MatrixXd centroids(5, 3);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index c = 0; c < 3; ++c) z(i, c) = rng.uniform(-50.0, 50.0);
  for (Eigen::Index j = 0; j < 5; ++j)
    for (Eigen::Index c = 0; c < 3; ++c)
      centroids(j, c) = rng.uniform(-50.0, 50.0);
  const Eigen::MatrixXd q = soft_assign(z, centroids);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    CHECK(q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q.row(i).minCoeff() > 0.0);
    CHECK(q.row(i).maxCoeff() <= 1.0);
  }
}

TEST_CASE("one-hot assignments are a fixed point of the target") {
  Eigen::MatrixXd q(3, 2);
  q << 1.0, 0.0, 0.0, 1.0, 1.0, 0.0;
  CHECK((target_distribution(q) - q).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("a uniform assignment stays uniform after sharpening") {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(4, 4, 0.25);
  CHECK((target_distribution(q) - q).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("the sharpened target matches a hand evaluation") {
  Eigen::MatrixXd q(2, 2);
  q << 0.8, 0.2, 0.4, 0.6;
  const Eigen::MatrixXd p = target_distribution(q);
  // Column frequencies f = [1.2, 0.8]; p_ij proportional to q_ij^2 / f_j.
  CHECK(p(0, 0) == doctest::Approx(32.0 / 35.0).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(3.0 / 35.0).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(8.0 / 35.0).epsilon(1e-12));
  CHECK(p(1, 1) == doctest::Approx(27.0 / 35.0).epsilon(1e-12));
}

TEST_CASE("an empty soft cluster cannot be sharpened") {
  Eigen::MatrixXd q(2, 2);
  q << 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(target_distribution(q), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Loss terms
// ---------------------------------------------------------------------------

TEST_CASE("the cluster term vanishes when targets equal assignments") {
  DecState state = toy_state();
  state.p = state.q;
  const Eigen::MatrixXd data = Eigen::MatrixXd::Random(2, 2);
  const LossBreakdown loss = loss_terms(data, state);
  CHECK(loss.l_c == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the balance term vanishes on uniform targets") {
  DecState state = toy_state();
  state.p = Eigen::MatrixXd::Constant(2, 2, 0.5);
  const Eigen::MatrixXd data = Eigen::MatrixXd::Random(2, 2);
  const LossBreakdown loss = loss_terms(data, state);
  CHECK(loss.l_u == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("one-hot balanced targets pay log k in the balance term") {
  DecState state = toy_state();
  state.p.resize(2, 2);
  state.p << 1.0, 0.0, 0.0, 1.0;
  const Eigen::MatrixXd data = Eigen::MatrixXd::Random(2, 2);
  const LossBreakdown loss = loss_terms(data, state);
  CHECK(loss.l_u == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("every term matches a direct hand computation") {
  DecState state = toy_state();
  for (auto& w : state.params.weights) w.setZero();
  for (auto& b : state.params.biases) b.setZero();

  Eigen::MatrixXd data(2, 2);
  data << 1.0, 0.0, 0.0, 2.0;

  const LossBreakdown loss = loss_terms(data, state);

  // Reconstruction of the zero network is zero: mean squared norm of rows.
  CHECK(loss.l_r == doctest::Approx((1.0 + 4.0) / 2.0).epsilon(1e-12));

  // Hard assignments: z0=0 -> centroid 0 (distance 0 vs 16); z1=3 ->
  // centroid 1 (9 vs 1).  Mean squared distance = (0 + 1) / 2.
  CHECK(loss.l_mse == doctest::Approx(0.5).epsilon(1e-12));

  // KL terms against an independent evaluation.
  double l_c = 0.0, l_u = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      l_c += state.p(i, j) * std::log(state.p(i, j) / state.q(i, j));
      l_u += state.p(i, j) * std::log(2.0 * state.p(i, j));
    }
  CHECK(loss.l_c == doctest::Approx(l_c / 2.0).epsilon(1e-12));
  CHECK(loss.l_u == doctest::Approx(l_u / 2.0).epsilon(1e-12));

  // Weighted combination (defaults: 0.1, 1, 10, 1).
  CHECK(loss.total ==
        doctest::Approx(0.1 * loss.l_c + 1.0 * loss.l_r + 10.0 * loss.l_u +
                        1.0 * loss.l_mse)
            .epsilon(1e-9));

  // KL non-negativity.
  CHECK(loss.l_c >= 0.0);
  CHECK(loss.l_u >= 0.0);
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

TEST_CASE("analytic gradients agree with finite differences") {
  Rng rng(21);
  DecState state;
  state.params = make_autoencoder({4, 3, 2, 3, 4}, 22);
  state.centroids.resize(2, 2);
  state.centroids << 0.5, -0.5, -0.25, 0.75;
  Eigen::MatrixXd data(6, 4);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index c = 0; c < 4; ++c) data(i, c) = rng.uniform(-1.0, 1.0);
  state.z = encode(state.params, data);
  state.q = soft_assign(state.z, state.centroids);
  state.p = target_distribution(state.q);

  CHECK(grad_check(state, data, LossTerm::reconstruction) < 1e-4);
  CHECK(grad_check(state, data, LossTerm::cluster) < 1e-4);
  CHECK(grad_check(state, data, LossTerm::balance) < 1e-4);
  CHECK(grad_check(state, data, LossTerm::compactness) < 1e-4);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

DecConfig small_config(std::uint64_t seed) {
  DecConfig config;
  config.hidden = 32;
  config.bottleneck = 4;
  config.epochs = 20;
  config.lr = 0.001;
  config.batch = 64;
  config.seed = seed;
  config.pretrain.epochs = 10;
  return config;
}

}  // namespace

TEST_CASE("both trainer modes solve three separated clouds") {
  const Eigen::MatrixXd data =
      gaussian_clouds(23, 50, simplex_centers(3, 8, 10.0), 0.5);
  std::vector<int> truth(150);
  for (int i = 0; i < 150; ++i) truth[static_cast<std::size_t>(i)] = i / 50;

  DecConfig improved = small_config(24);
  const DecTrainResult accepted = train_dec(data, 3, improved);
  CHECK_FALSE(accepted.diverged);
  CHECK(accepted.empty_clusters.empty());
  CHECK(permutation_accuracy(accepted.model.assignments, truth, 3) >= 0.99);

  DecConfig original = small_config(24);
  original.original_mode = true;
  const DecTrainResult baseline = train_dec(data, 3, original);
  CHECK_FALSE(baseline.diverged);
  CHECK(permutation_accuracy(baseline.model.assignments, truth, 3) >= 0.99);
}

TEST_CASE("original mode equals manually zeroed weights") {
  const Eigen::MatrixXd data =
      gaussian_clouds(25, 30, simplex_centers(2, 6, 8.0), 1.0);

  DecConfig flag = small_config(26);
  flag.epochs = 8;
  flag.pretrain.epochs = 4;
  flag.original_mode = true;

  DecConfig manual = flag;
  manual.original_mode = false;
  manual.weights = LossWeights{1.0, 0.0, 0.0, 0.0};
  manual.recalib_period = 1000;  // beyond the epoch budget: never fires

  const DecTrainResult a = train_dec(data, 2, flag);
  const DecTrainResult b = train_dec(data, 2, manual);
  REQUIRE(a.epoch_losses.size() == b.epoch_losses.size());
  for (std::size_t e = 0; e < a.epoch_losses.size(); ++e) {
    CHECK(a.epoch_losses[e].l_c == b.epoch_losses[e].l_c);
    CHECK(a.epoch_losses[e].l_r == b.epoch_losses[e].l_r);
    CHECK(a.epoch_losses[e].total == b.epoch_losses[e].total);
  }
  CHECK(a.model.assignments == b.model.assignments);
  CHECK(a.state.centroids == b.state.centroids);
}

TEST_CASE("a recalibration period beyond the run changes nothing") {
  const Eigen::MatrixXd data =
      gaussian_clouds(27, 30, simplex_centers(2, 6, 8.0), 1.0);
  DecConfig never = small_config(28);
  never.epochs = 8;
  never.pretrain.epochs = 4;
  never.recalib_period = 8;  // would fire at epoch 8, which never runs

  DecConfig much_later = never;
  much_later.recalib_period = 10000;

  const DecTrainResult a = train_dec(data, 2, never);
  const DecTrainResult b = train_dec(data, 2, much_later);
  REQUIRE(a.epoch_losses.size() == b.epoch_losses.size());
  for (std::size_t e = 0; e < a.epoch_losses.size(); ++e)
    CHECK(a.epoch_losses[e].total == b.epoch_losses[e].total);
  CHECK(a.model.assignments == b.model.assignments);
}

TEST_CASE("training is reproducible for a fixed seed") {
  const Eigen::MatrixXd data =
      gaussian_clouds(29, 25, simplex_centers(2, 5, 6.0), 1.0);
  DecConfig config = small_config(30);
  config.epochs = 6;
  config.pretrain.epochs = 3;
  const DecTrainResult a = train_dec(data, 2, config);
  const DecTrainResult b = train_dec(data, 2, config);
  CHECK(a.model.assignments == b.model.assignments);
  CHECK(a.state.centroids == b.state.centroids);
  REQUIRE(a.epoch_losses.size() == b.epoch_losses.size());
  for (std::size_t e = 0; e < a.epoch_losses.size(); ++e)
    CHECK(a.epoch_losses[e].total == b.epoch_losses[e].total);
}

TEST_CASE("the trainer's state rows stay stochastic") {
  const Eigen::MatrixXd data =
      gaussian_clouds(31, 25, simplex_centers(3, 5, 6.0), 1.0);
  DecConfig config = small_config(32);
  config.epochs = 5;
  config.pretrain.epochs = 3;
  const DecTrainResult result = train_dec(data, 3, config);
  for (Eigen::Index i = 0; i < result.state.q.rows(); ++i) {
    CHECK(result.state.q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.state.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  // The reported model is the hard argmax of q.
  for (Eigen::Index i = 0; i < result.state.q.rows(); ++i) {
    Eigen::Index argmax = 0;
    result.state.q.row(i).maxCoeff(&argmax);
    CHECK(result.model.assignments[static_cast<std::size_t>(i)] ==
          static_cast<int>(argmax));
  }
  CHECK(result.model.centroids == result.state.centroids);
}

TEST_CASE("an absurd learning rate triggers the divergence guard") {
  const Eigen::MatrixXd data =
      gaussian_clouds(33, 25, simplex_centers(2, 5, 6.0), 1.0);
  DecConfig config = small_config(34);
  config.epochs = 10;
  config.pretrain.epochs = 0;
  config.lr = 1e18;
  const DecTrainResult result = train_dec(data, 2, config);
  CHECK(result.diverged);
  // The surviving state is still usable.
  CHECK(result.state.centroids.allFinite());
  CHECK(result.state.q.allFinite());
  CHECK_FALSE(result.warnings.empty());
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

TEST_CASE("checkpoints round-trip the model to float precision") {
  const Eigen::MatrixXd data =
      gaussian_clouds(35, 25, simplex_centers(2, 5, 6.0), 1.0);
  DecConfig config = small_config(36);
  config.epochs = 4;
  config.pretrain.epochs = 2;
  const DecTrainResult result = train_dec(data, 2, config);

  const std::filesystem::path path = temp_file("ckpt");
  save_checkpoint(result.state, 36, 4, path.string());

  std::uint64_t seed = 0;
  int epoch = -1;
  const DecState loaded = load_checkpoint(path.string(), &seed, &epoch);
  std::filesystem::remove(path);

  CHECK(seed == 36);
  CHECK(epoch == 4);
  CHECK(loaded.params.layer_sizes == result.state.params.layer_sizes);
  CHECK(loaded.a == result.state.a);
  CHECK(loaded.exponent == result.state.exponent);
  CHECK(loaded.recalib_period == result.state.recalib_period);
  CHECK(loaded.weights.cluster == result.state.weights.cluster);
  CHECK(loaded.weights.balance == result.state.weights.balance);
  REQUIRE(loaded.centroids.rows() == result.state.centroids.rows());
  CHECK((loaded.centroids - result.state.centroids).cwiseAbs().maxCoeff() <=
        1e-6);
  for (int l = 0; l < loaded.params.n_layers(); ++l)
    CHECK((loaded.params.weights[static_cast<std::size_t>(l)] -
           result.state.params.weights[static_cast<std::size_t>(l)])
              .cwiseAbs()
              .maxCoeff() <= 1e-6);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/path/x.ckpt"),
                  std::runtime_error);
}

TEST_CASE("loss curves serialize as CSV") {
  std::vector<LossBreakdown> curve(3);
  curve[1].l_c = 0.25;
  curve[2].total = 1.5;
  const std::filesystem::path path = temp_file("curve");
  write_loss_curve(curve, path.string());

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,l_c,l_r,l_u,l_mse,total");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  in.close();
  std::filesystem::remove(path);
}
