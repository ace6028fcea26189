// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Solver and evaluation throughput on random instances.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/prompt_history.hpp"
#include "deltacheck/selection.hpp"
#include "deltacheck/subsumption.hpp"

namespace {

using namespace deltacheck;

struct Instance {
  ResultMatrix m;
  std::vector<Label> labels;
  SubsumptionMatrix k;
};

// Pass-heavy matrix with about a third of the examples BAD, and a random
// DAG for K closed by Warshall.
Instance make_instance(std::size_t n, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pass(0.85), good(0.65), edge(0.03);
  Instance in;
  for (std::size_t j = 0; j < cols; ++j) in.m.assertion_ids.push_back("f" + std::to_string(1000 + j));
  for (std::size_t i = 0; i < n; ++i) {
    in.m.example_ids.push_back("e" + std::to_string(i));
    std::vector<std::uint8_t> row(cols);
    for (auto& c : row) c = pass(rng) ? 1 : 0;
    in.m.cells.push_back(std::move(row));
    in.labels.push_back(good(rng) ? Label::kGood : Label::kBad);
  }
  in.k = identity_subsumption(in.m.assertion_ids);
  std::vector<std::size_t> order(cols);
  for (std::size_t j = 0; j < cols; ++j) order[j] = j;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t a = 0; a < cols; ++a) {
    for (std::size_t b = a + 1; b < cols; ++b) {
      if (edge(rng)) in.k.cells[order[a]][order[b]] = 1;
    }
  }
  transitive_closure(in.k);
  return in;
}

void BM_SolveCov(benchmark::State& state) {
  const auto in = make_instance(82, static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_cov(in.m, in.labels, 0.6, 0.25));
  }
}
BENCHMARK(BM_SolveCov)->Arg(15)->Arg(40)->Arg(106)->Unit(benchmark::kMillisecond);

void BM_SolveSub(benchmark::State& state) {
  const auto in = make_instance(82, static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_sub(in.m, in.labels, in.k, 0.6, 0.25));
  }
}
BENCHMARK(BM_SolveSub)->Arg(15)->Arg(40)->Arg(106)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto in = make_instance(20, static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        brute_force_oracle(in.m, in.labels, &in.k, 0.6, 0.25, SelectionMode::kSub));
  }
}
BENCHMARK(BM_BruteForce)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_TransitiveClosure(benchmark::State& state) {
  const auto in = make_instance(1, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    auto k = in.k;
    transitive_closure(k);
    benchmark::DoNotOptimize(k);
  }
}
BENCHMARK(BM_TransitiveClosure)->Arg(106)->Arg(400);

void BM_SetFfr(benchmark::State& state) {
  const auto in = make_instance(82, 106, 5);
  std::set<std::string> selected(in.m.assertion_ids.begin(), in.m.assertion_ids.begin() + 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(set_ffr(in.m, in.labels, selected));
  }
}
BENCHMARK(BM_SetFfr);

void BM_DiffSentences(benchmark::State& state) {
  std::vector<std::string> prev, next;
  for (int i = 0; i < state.range(0); ++i) {
    prev.push_back("Sentence number " + std::to_string(i) + ".");
    if (i % 7 != 3) next.push_back(prev.back());
    if (i % 11 == 5) next.push_back("Inserted line " + std::to_string(i) + ".");
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(diff_sentences(prev, next, 1, 2));
  }
}
BENCHMARK(BM_DiffSentences)->Arg(50)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
