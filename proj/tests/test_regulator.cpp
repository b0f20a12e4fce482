// Copyright 2026 The Strata Authors. All Rights Reserved.
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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strata/errors.hpp"
#include "strata/gradcheck.hpp"
#include "strata/regulator.hpp"
#include "support.hpp"

using namespace strata;
using strata::testing::fixed_modulator_loss;
using strata::testing::random_labels;
using strata::testing::random_matrix;
using strata::testing::random_net;

namespace {

// exp(tanh(z)) and friends at 40 digits, truncated to double precision.
constexpr double kSigma123 = 0.8164965809277260327;
constexpr double kZ123 = 1.2247448713915890491;
constexpr double kExpTanhNeg1 = 0.46692148772244257354;
constexpr double kExpTanh1 = 2.1416876847493498138;
constexpr double kGammaLow = 0.0021562910840007339642;
constexpr double kGammaHigh = 0.011593981993198971291;
constexpr double kAlphaLow = 2.3187963986397942581;
constexpr double kAlphaHigh = 0.43125821680014679284;
constexpr double kZeroWeightLoss = 9.2563920738360636498;  // 4·1.005·ln 10
constexpr double kE = 2.7182818284590452354;

std::vector<double> random_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (double& v : out) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace

TEST_SUITE("regulator") {
  TEST_CASE("z-scores of 1, 2, 3") {
    const std::vector<double> v{1, 2, 3};
    const ZScores z = layer_zscores(v);
    CHECK(z.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(z.stddev - kSigma123) < 1e-12);
    CHECK(std::abs(z.z[0] + kZ123) < 1e-12);
    CHECK(std::abs(z.z[1]) < 1e-15);
    CHECK(std::abs(z.z[2] - kZ123) < 1e-12);
  }

  TEST_CASE("degenerate spread gives zero scores") {
    const std::vector<double> v{0.5, 0.5, 0.5, 0.5};
    for (double z : layer_zscores(v).z) CHECK(z == 0.0);
  }

  TEST_CASE("fewer than two layers is a usage error") {
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(layer_zscores(one), UsageError);
  }

  TEST_CASE("property: two-point z-scores are always -1 and +1") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> v{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      if (v[0] == v[1]) continue;
      const auto z = layer_zscores(v).z;
      const double lo = v[0] < v[1] ? z[0] : z[1];
      const double hi = v[0] < v[1] ? z[1] : z[0];
      CHECK(lo == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("gamma worked examples") {
    EntropyStats flat;
    flat.z = {0, 0, 0, 0};
    for (double g : entropy_scaling(flat, 0.005)) CHECK(g == 0.005);

    EntropyStats unit;
    unit.z = {-1, 0, 1};
    const auto g = entropy_scaling(unit, 1.0);
    CHECK(std::abs(g[0] - kExpTanhNeg1) < 1e-12);
    CHECK(g[1] == 1.0);
    CHECK(std::abs(g[2] - kExpTanh1) < 1e-12);

    const std::vector<double> h{1, 2, 3};
    const auto g3 = entropy_scaling(entropy_stats(h), 0.005);
    CHECK(std::abs(g3[0] - kGammaLow) < 1e-12);
    CHECK(g3[1] == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(std::abs(g3[2] - kGammaHigh) < 1e-12);

    CHECK_THROWS_AS(entropy_scaling(unit, -0.1), ConfigError);
  }

  TEST_CASE("alpha worked examples") {
    const std::vector<double> same{0.7, 0.7, 0.7};
    for (double a : accuracy_modulators(same).alpha) CHECK(a == 1.0);

    const std::vector<double> three{0.2, 0.5, 0.8};
    const ModulatorState m = accuracy_modulators(three);
    CHECK(std::abs(m.score[0] + kZ123) < 1e-9);
    CHECK(std::abs(m.alpha[0] - kAlphaLow) < 1e-9);
    CHECK(std::abs(m.alpha[1] - 1.0) < 1e-12);
    CHECK(std::abs(m.alpha[2] - kAlphaHigh) < 1e-9);

    const std::vector<double> two{0.9, 0.1};
    const auto a2 = accuracy_modulators(two).alpha;
    CHECK(std::abs(a2[0] - kExpTanhNeg1) < 1e-12);
    CHECK(std::abs(a2[1] - kExpTanh1) < 1e-12);
  }

  TEST_CASE("accuracies outside [0, 1] are input errors") {
    const std::vector<double> bad{0.5, 1.5};
    CHECK_THROWS_AS(accuracy_modulators(bad), InputError);
    const std::vector<double> negative{-0.1, 0.5};
    CHECK_THROWS_AS(accuracy_modulators(negative), InputError);
  }

  TEST_CASE("property: modulators stay within their bounds") {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t layers = rng.uniform_int(2, 8);
      const double beta = rng.uniform(1e-4, 2.0);
      const auto h = random_values(rng, layers, 0.0, 5.0);
      for (double g : entropy_scaling(entropy_stats(h), beta)) {
        CHECK(g >= beta / kE * (1 - 1e-12));
        CHECK(g <= beta * kE * (1 + 1e-12));
      }
      for (double a : accuracy_modulators(random_values(rng, layers, 0.0, 1.0)).alpha) {
        CHECK(a >= (1 / kE) * (1 - 1e-12));
        CHECK(a <= kE * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("property: permuting layers permutes gamma and alpha") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t layers = rng.uniform_int(2, 7);
      const auto h = random_values(rng, layers, 0.0, 3.0);
      const auto acc = random_values(rng, layers, 0.0, 1.0);
      std::vector<std::size_t> perm(layers);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm.begin(), perm.end());
      std::vector<double> hp(layers), ap(layers);
      for (std::size_t i = 0; i < layers; ++i) {
        hp[i] = h[perm[i]];
        ap[i] = acc[perm[i]];
      }
      const auto g = entropy_scaling(entropy_stats(h), 0.005);
      const auto gp = entropy_scaling(entropy_stats(hp), 0.005);
      const auto a = accuracy_modulators(acc).alpha;
      const auto apm = accuracy_modulators(ap).alpha;
      for (std::size_t i = 0; i < layers; ++i) {
        CHECK(gp[i] == doctest::Approx(g[perm[i]]).epsilon(1e-12));
        CHECK(apm[i] == doctest::Approx(a[perm[i]]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("property: z-scores ignore shifts and positive rescaling") {
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t layers = rng.uniform_int(2, 7);
      const auto h = random_values(rng, layers, 0.0, 3.0);
      const double shift = rng.uniform(-10, 10);
      const double factor = rng.uniform(0.1, 10);
      std::vector<double> moved(layers);
      for (std::size_t i = 0; i < layers; ++i) moved[i] = factor * h[i] + shift;
      const auto z = layer_zscores(h).z;
      const auto zm = layer_zscores(moved).z;
      for (std::size_t i = 0; i < layers; ++i) CHECK(std::abs(z[i] - zm[i]) < 1e-8);
    }
  }

  TEST_CASE("property: raising one entropy never lowers its gamma; raising one accuracy never raises its alpha") {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t layers = rng.uniform_int(2, 7);
      auto h = random_values(rng, layers, 0.0, 3.0);
      auto acc = random_values(rng, layers, 0.0, 0.9);
      const std::size_t i = rng.uniform_int(0, layers - 1);
      const double g0 = entropy_scaling(entropy_stats(h), 0.005)[i];
      const double a0 = accuracy_modulators(acc).alpha[i];
      h[i] += rng.uniform(1e-3, 2.0);
      acc[i] = std::min(1.0, acc[i] + rng.uniform(1e-3, 0.1));
      CHECK(entropy_scaling(entropy_stats(h), 0.005)[i] >= g0 - 1e-12);
      CHECK(accuracy_modulators(acc).alpha[i] <= a0 + 1e-12);
    }
  }

  TEST_CASE("zero-weight net loss in closed form") {
    LayeredNet net = LayeredNet::init(6, {8, 8, 8, 8}, 10, 3);
    for (Tensor& p : net.parameters()) {
      for (double& v : p.values()) v = 0.0;
    }
    Rng rng(2);
    Tape tape;
    const ForwardRecord rec = forward(tape, net, random_matrix(rng, 5, 6));
    const std::vector<int> labels = random_labels(rng, 5, 10);
    const std::vector<double> alpha(4, 1.0);
    const CompositeLoss loss = composite_loss(rec, labels, alpha, RegularizerOptions{});
    CHECK(std::abs(loss.total.value().item() - kZeroWeightLoss) < 1e-9);
    for (double z : loss.entropy.z) CHECK(z == 0.0);
    for (double g : loss.gamma) CHECK(g == 0.005);
  }

  TEST_CASE("beta zero leaves pure multi-head cross-entropy") {
    Rng rng(6);
    const LayeredNet net = random_net(rng, 4, {5, 5, 5}, 3);
    Tape tape;
    const ForwardRecord rec = forward(tape, net, random_matrix(rng, 7, 4));
    const std::vector<int> labels = random_labels(rng, 7, 3);
    const std::vector<double> alpha(3, 1.0);
    const CompositeLoss loss = composite_loss(rec, labels, alpha, RegularizerOptions{0.0, true});
    double expected = 0.0;
    for (double l : loss.layer_loss) expected += l;
    CHECK(loss.total.value().item() == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("disabling entropy scaling pins gamma to beta") {
    Rng rng(7);
    const LayeredNet net = random_net(rng, 4, {5, 5, 5}, 3);
    Tape tape;
    const ForwardRecord rec = forward(tape, net, random_matrix(rng, 7, 4));
    const std::vector<int> labels = random_labels(rng, 7, 3);
    const std::vector<double> alpha(3, 1.0);
    const CompositeLoss loss = composite_loss(rec, labels, alpha, RegularizerOptions{0.02, false});
    for (double g : loss.gamma) CHECK(g == 0.02);
  }

  TEST_CASE("reward sign flips the entropy term") {
    Rng rng(9);
    const LayeredNet net = random_net(rng, 4, {5, 5}, 3);
    const Tensor x = random_matrix(rng, 6, 4);
    const std::vector<int> labels = random_labels(rng, 6, 3);
    const std::vector<double> alpha(2, 1.0);
    Tape t1, t2;
    const auto pen = composite_loss(forward(t1, net, x), labels, alpha, {0.1, true, EntropySign::kPenalize});
    const auto rew = composite_loss(forward(t2, net, x), labels, alpha, {0.1, true, EntropySign::kReward});
    double ce = 0.0, reg = 0.0;
    for (std::size_t l = 0; l < 2; ++l) {
      ce += pen.layer_loss[l];
      reg += pen.gamma[l] * pen.entropy.mean_entropy[l];
    }
    CHECK(pen.total.value().item() == doctest::Approx(ce + reg).epsilon(1e-13));
    CHECK(rew.total.value().item() == doctest::Approx(ce - reg).epsilon(1e-13));
    CHECK(parse_entropy_sign("reward") == EntropySign::kReward);
    CHECK_THROWS_AS(parse_entropy_sign("sideways"), ConfigError);
  }

  TEST_CASE("modulator count must match the layers") {
    Rng rng(10);
    const LayeredNet net = random_net(rng, 4, {5, 5}, 3);
    Tape tape;
    const ForwardRecord rec = forward(tape, net, random_matrix(rng, 2, 4));
    const std::vector<int> labels{0, 1};
    const std::vector<double> alpha(3, 1.0);
    CHECK_THROWS_AS(composite_loss(rec, labels, alpha, RegularizerOptions{}), DimensionError);
  }

  TEST_CASE("property: composite loss gradient matches finite differences with modulators held fixed") {
    Rng rng(29);
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t layers = rng.uniform_int(2, 4);
      const std::vector<std::size_t> widths(layers, rng.uniform_int(2, 5));
      const LayeredNet net = random_net(rng, 3, widths, 3);
      const Tensor x = random_matrix(rng, 4, 3);
      const std::vector<int> labels = random_labels(rng, 4, 3);
      std::vector<double> alpha(layers);
      for (double& a : alpha) a = rng.uniform(0.4, 2.7);
      const RegularizerOptions options{rng.uniform(0.001, 0.5), true,
                                       trial % 2 ? EntropySign::kReward : EntropySign::kPenalize};
      Tape tape;
      const CompositeLoss loss = composite_loss(forward(tape, net, x), labels, alpha, options);
      const Gradients g = tape.backward(loss.total);
      const double sign = options.sign == EntropySign::kPenalize ? 1.0 : -1.0;
      const Objective f = [&](const std::vector<Tensor>& ps) {
        return fixed_modulator_loss(LayeredNet(net.input_dim(), net.widths(), net.classes(), ps), x, labels, alpha,
                                    loss.gamma, sign);
      };
      const auto numeric = finite_difference_gradient(f, net.parameters(), 1e-5);
      for (std::size_t i = 0; i < numeric.size(); ++i) CHECK(max_relative_error(g[i], numeric[i]) < 1e-4);
    }
  }
}
