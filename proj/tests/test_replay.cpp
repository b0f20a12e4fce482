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

#include <cmath>
#include <map>
#include <set>

#include "strata/errors.hpp"
#include "strata/replay.hpp"
#include "support.hpp"

using namespace strata;
using strata::testing::random_net;
using strata::testing::scratch_dir;

namespace {

Example item(int id, int label = 0, int task = 1) { return Example{{static_cast<double>(id), -0.5 * id}, label, task}; }

std::vector<Example> two_class_task(int per_class, int first_label, int task) {
  std::vector<Example> out;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < per_class; ++i) out.push_back(item(1000 * c + i, first_label + c, task));
  }
  return out;
}

}  // namespace

TEST_SUITE("replay") {
  TEST_CASE("under capacity every item is resident") {
    ReplayBuffer buf(5, Rng(1));
    for (int i = 0; i < 3; ++i) buf.insert(item(i));
    CHECK(buf.size() == 3);
    CHECK(buf.seen() == 3);
    CHECK(buf.items()[2] == item(2));
  }

  TEST_CASE("capacity one replaces when the draw is zero") {
    std::uint64_t seed = 0;
    while (Rng(seed).uniform_int(0, 1) != 0) ++seed;
    ReplayBuffer buf(1, Rng(seed));
    buf.insert(item(1));
    buf.insert(item(2));
    REQUIRE(buf.size() == 1);
    CHECK(buf.items()[0] == item(2));
  }

  TEST_CASE("zero capacity is a config error") { CHECK_THROWS_AS(ReplayBuffer(0, Rng(0)), ConfigError); }

  TEST_CASE("property: capacity is never exceeded") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t cap = rng.uniform_int(1, 20);
      ReplayBuffer buf(cap, Rng(rng.uniform_int(0, 1000)));
      const std::size_t n = rng.uniform_int(0, 200);
      for (std::size_t i = 0; i < n; ++i) {
        buf.insert(item(static_cast<int>(i)));
        CHECK(buf.size() == std::min(cap, i + 1));
      }
    }
  }

  TEST_CASE("residency frequency follows M over n") {
    constexpr int kTrials = 2000;
    constexpr int kStream = 200;
    constexpr std::size_t kCapacity = 10;
    std::vector<int> hits(kStream, 0);
    for (int t = 0; t < kTrials; ++t) {
      ReplayBuffer buf(kCapacity, Rng::derive(t, 99));
      for (int i = 0; i < kStream; ++i) buf.insert(item(i));
      for (const Example& e : buf.items()) ++hits[static_cast<int>(e.x[0])];
    }
    // The full-size version of this check runs in the acceptance binary.
    for (int h : hits) CHECK(std::abs(h / double(kTrials) - 0.05) < 0.025);
  }

  TEST_CASE("sample sizes and determinism") {
    ReplayBuffer empty(4, Rng(0));
    Rng rng(1);
    CHECK(empty.sample(3, rng).empty());

    ReplayBuffer buf(8, Rng(0));
    for (int i = 0; i < 6; ++i) buf.insert(item(i));
    CHECK(buf.sample(0, rng).empty());
    CHECK(buf.sample(6, rng).size() == 6);
    CHECK(buf.sample(10, rng).size() == 6);

    Rng a(5), b(5);
    const auto sa = buf.sample(3, a);
    CHECK(sa == buf.sample(3, b));
    std::set<double> distinct;
    for (const Example& e : sa) distinct.insert(e.x[0]);
    CHECK(distinct.size() == 3);
  }

  TEST_CASE("property: identical seeds give identical buffer contents at every step") {
    ReplayBuffer a(7, Rng(42)), b(7, Rng(42));
    for (int i = 0; i < 300; ++i) {
      a.insert(item(i));
      b.insert(item(i));
      REQUIRE(std::equal(a.items().begin(), a.items().end(), b.items().begin(), b.items().end()));
    }
  }

  TEST_CASE("jsonl export round trip is bitwise") {
    ReplayBuffer buf(4, Rng(0));
    buf.insert(Example{{0.1, -1e-300, 3.141592653589793}, 2, 1});
    buf.insert(Example{{1.0 / 3.0, 0.0, -7.5}, 5, 3});
    const auto dir = scratch_dir("replay_jsonl");
    buf.export_jsonl(dir / "buf.jsonl");
    const auto back = ReplayBuffer::import_jsonl(dir / "buf.jsonl");
    CHECK(std::equal(back.begin(), back.end(), buf.items().begin(), buf.items().end()));
  }

  TEST_CASE("validation buffer balance rules") {
    Rng rng(2);
    ValidationBuffer vbuf(10);
    vbuf.update(two_class_task(100, 0, 1), 1, rng);
    std::map<int, int> counts;
    for (const Example& e : vbuf.tasks().at(1)) ++counts[e.label];
    CHECK(counts[0] == 5);
    CHECK(counts[1] == 5);

    ValidationBuffer odd(3);
    odd.update(two_class_task(100, 0, 1), 1, rng);
    counts.clear();
    for (const Example& e : odd.tasks().at(1)) ++counts[e.label];
    CHECK(std::min(counts[0], counts[1]) == 1);
    CHECK(std::max(counts[0], counts[1]) == 2);

    ValidationBuffer big(500);
    big.update(two_class_task(7, 0, 1), 1, rng);
    CHECK(big.size() == 14);

    CHECK_THROWS_AS(vbuf.update(std::vector<Example>{}, 2, rng), UsageError);
  }

  TEST_CASE("property: validation buffer stays class balanced after every task") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      ValidationBuffer vbuf(rng.uniform_int(1, 40));
      for (int task = 1; task <= 4; ++task) {
        const int per_class = static_cast<int>(rng.uniform_int(1, 30));
        vbuf.update(two_class_task(per_class, 2 * (task - 1), task), task, rng);
        REQUIRE(vbuf.tasks().size() == static_cast<std::size_t>(task));
        for (const auto& [t, items] : vbuf.tasks()) {
          std::map<int, int> counts;
          for (const Example& e : items) ++counts[e.label];
          int lo = 1 << 30, hi = 0;
          for (int c = 2 * (t - 1); c < 2 * t; ++c) {
            lo = std::min(lo, counts[c]);
            hi = std::max(hi, counts[c]);
          }
          // Short classes may cap out; otherwise counts differ by at most one.
          CHECK((hi - lo <= 1 || static_cast<std::size_t>(lo) < vbuf.quota() / 2));
          CHECK(items.size() <= vbuf.quota());
        }
      }
    }
  }

  TEST_CASE("layer accuracies on a perfect and a guessing net") {
    // Head biases dominate so every head predicts class 1.
    LayeredNet net = LayeredNet::init(2, {3, 3}, 2, 0);
    for (std::size_t l = 0; l < 2; ++l) net.parameters()[net.head_bias(l)][1] = 100.0;
    ValidationBuffer vbuf(10);
    Rng rng(1);
    std::vector<Example> ones;
    for (int i = 0; i < 10; ++i) ones.push_back(item(i, 1, 1));
    vbuf.update(ones, 1, rng);
    for (double a : evaluate_layer_accuracies(net, vbuf)) CHECK(a == 1.0);

    Rng gen(8);
    const LayeredNet guess = random_net(gen, 2, {3, 3}, 2);
    ValidationBuffer wide(10000);
    std::vector<Example> noise;
    for (int i = 0; i < 10000; ++i) noise.push_back(Example{{gen.normal(), gen.normal()}, i % 2, 1});
    wide.update(noise, 1, rng);
    for (double a : evaluate_layer_accuracies(guess, wide)) CHECK(std::abs(a - 0.5) < 0.02);

    CHECK_THROWS_AS(evaluate_layer_accuracies(net, ValidationBuffer(4)), UsageError);
  }
}
