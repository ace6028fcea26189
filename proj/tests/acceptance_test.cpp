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

// Prints one PASS or FAIL line per acceptance criterion and exits nonzero
// when any of them fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "deltacheck/assertion_engine.hpp"
#include "deltacheck/assertion_spec.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/prompt_history.hpp"
#include "deltacheck/selection.hpp"
#include "deltacheck/subsumption.hpp"
#include "support/fuzz.hpp"
#include "support/oracles.hpp"

namespace deltacheck {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Ids = std::vector<std::string>;
using testing::Rng;
using Clock = std::chrono::steady_clock;

const fs::path kFixtures = DELTACHECK_FIXTURES;

// A criterion body returns an empty string on success, else the reason.
using Check = std::function<std::string(std::string& note)>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

template <class E>
std::string text(E value) {
  return std::string(to_string(value));
}

std::string ids_text(const Ids& ids) {
  std::string s = "{";
  for (const auto& id : ids) s += (s.size() > 1 ? "," : "") + id;
  return s + "}";
}

std::string oracle_equivalence(std::string& note) {
  Rng rng(424242);
  const double alphas[] = {0.4, 0.6, 0.8, 1.0};
  const double taus[] = {0.0, 0.1, 0.25, 0.5};
  const auto start = Clock::now();
  int instances = 0, infeasible = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform(1, 20));
    const auto cols = static_cast<std::size_t>(rng.uniform(1, 12));
    const auto m = testing::random_matrix(rng, n, cols, 0.3 + 0.6 * rng.unit());
    const auto labels = testing::random_labels(rng, n, 0.5);
    const auto k = testing::random_transitive_k(rng, m.assertion_ids, rng.unit() * 0.4);
    const double alpha = alphas[rng.uniform(0, 3)];
    const double tau = taus[rng.uniform(0, 3)];
    for (const SubsumptionMatrix* kk : {static_cast<const SubsumptionMatrix*>(nullptr), &k}) {
      const auto mode = kk ? SelectionMode::kSub : SelectionMode::kCov;
      const auto want = brute_force_oracle(m, labels, kk, alpha, tau, mode);
      const auto got =
          kk ? solve_sub(m, labels, *kk, alpha, tau) : solve_cov(m, labels, alpha, tau);
      const auto where = "trial " + std::to_string(trial) + " " + text(mode);
      if (got.status != want.status) return where + ": status " + text(got.status);
      if (got.status == SelectionStatus::kOptimal && got.objective != want.objective) {
        return where + ": objective " + std::to_string(got.objective) + " vs " +
               std::to_string(want.objective);
      }
      if (got.status == SelectionStatus::kInfeasible) ++infeasible;
    }
    ++instances;
  }
  const double secs = seconds_since(start);
  note = std::to_string(instances) + " instances, " + std::to_string(infeasible) +
         " infeasible solves, " + fmt(secs) + " s";
  if (secs >= 60.0) return "took " + fmt(secs) + " s";
  return "";
}

SubsumptionMatrix w_k() {
  auto k = identity_subsumption({"f1", "f2", "f3"});
  k.cells[2][0] = 1;  // f3 => f1
  return k;
}

std::string instance_w(std::string& note) {
  const auto m = testing::instance_w_matrix();
  const auto labels = testing::instance_w_labels();
  const auto cov = solve_cov(m, labels, 1.0, 0.25);
  if (cov.selected_ids != Ids{"f3"} || cov.objective != 1 || cov.coverage != 1.0 ||
      cov.ffr != 0.0) {
    return "cov selected " + ids_text(cov.selected_ids);
  }
  const auto sub = solve_sub(m, labels, w_k(), 1.0, 0.25);
  if (sub.selected_ids != Ids{"f3"} || sub.excluded_not_subsumed_ids != Ids{"f2"} ||
      sub.objective != 2) {
    return "sub selected " + ids_text(sub.selected_ids) + " G " +
           ids_text(sub.excluded_not_subsumed_ids);
  }
  const auto base = solve_baseline(m, labels, 0.25);
  if (base.selected_ids != Ids{"f1", "f3"})
    return "baseline selected " + ids_text(base.selected_ids);
  note = "cov {f3}, sub {f3} G {f2}, baseline {f1,f3}";
  return "";
}

std::string two_trees(std::string& note) {
  auto k = identity_subsumption({"a", "b", "c", "d", "e", "f"});
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {1, 3}, {4, 5}}) k.cells[i][j] = 1;
  const auto r = solve_no_examples(k);
  if (r.selected_ids != Ids{"a", "e"} || r.objective != 2) {
    return "selected " + ids_text(r.selected_ids) + " objective " + std::to_string(r.objective);
  }
  note = "selected {a,e}, objective 2";
  return "";
}

std::string ffr_bounds(std::string& note) {
  Rng rng(9001);
  constexpr double kEps = 1e-12;
  int draws = 0;
  for (; draws < 1000; ++draws) {
    const auto n = static_cast<std::size_t>(rng.uniform(1, 30));
    const auto cols = static_cast<std::size_t>(rng.uniform(2, 15));
    const auto m = testing::random_matrix(rng, n, cols, rng.unit());
    const auto labels = testing::random_labels(rng, n, rng.unit());
    std::set<std::string> s, t;
    for (const auto& id : m.assertion_ids) {
      if (rng.chance(0.4)) s.insert(id);
    }
    t = s;
    for (const auto& id : m.assertion_ids) {
      if (rng.chance(0.3)) t.insert(id);
    }
    const std::string f = rng.pick(m.assertion_ids);
    auto sf = s;
    sf.insert(f);
    const double a = set_ffr(m, labels, s), b = set_ffr(m, labels, {f}), u = set_ffr(m, labels, sf);
    const auto where = "draw " + std::to_string(draws);
    if (u < std::max(a, b) - kEps || u > a + b + kEps) return where + ": bound violated";
    if (set_ffr(m, labels, s) > set_ffr(m, labels, t) + kEps) return where + ": ffr not monotone";
    if (set_coverage(m, labels, s) > set_coverage(m, labels, t) + kEps) {
      return where + ": coverage not monotone";
    }
  }
  note = std::to_string(draws) + " draws, 0 violations";
  return "";
}

std::string dsl_soundness(std::string& note) {
  const auto min_two = spec_from_json({{"kind", "json_list_min_len"}, {"min", 2}});
  const auto list = spec_from_json({{"kind", "json_parseable"}, {"shape", "list"}});
  if (!dsl_subsumes(min_two, list)) return "min-length-2 list does not imply parseable list";
  if (dsl_subsumes(list, min_two)) return "parseable list implies min-length-2 list";
  const auto outcome = testing::dsl_soundness_fuzz(10000, 5150);
  if (outcome.witnesses != 0) return outcome.first_witness;
  note = std::to_string(outcome.pairs) + " rule pairs, 10000 responses, 0 witnesses";
  return "";
}

std::string scale(std::string& note) {
  Rng rng(1);
  const auto m = testing::random_matrix(rng, 82, 106, 0.9);
  const auto labels = testing::random_labels(rng, 82, 0.65);
  const auto k = testing::random_transitive_k(rng, m.assertion_ids, 0.03);
  auto start = Clock::now();
  const auto sub = solve_sub(m, labels, k, 0.6, 0.25, std::chrono::seconds(30));
  const double sub_secs = seconds_since(start);
  start = Clock::now();
  const auto cov = solve_cov(m, labels, 0.6, 0.25, std::chrono::seconds(30));
  const double cov_secs = seconds_since(start);
  note = "sub " + text(sub.status) + " " + fmt(sub_secs) + " s, cov " + text(cov.status) + " " +
         fmt(cov_secs) + " s";
  if (sub.status != SelectionStatus::kOptimal || cov.status != SelectionStatus::kOptimal) {
    return "not solved to optimality";
  }
  if (sub_secs >= 5.0 || cov_secs >= 2.0) return "too slow";
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string determinism(std::string& note) {
  const fs::path movie = kFixtures / "movie";
  const fs::path root =
      fs::temp_directory_path() / ("deltacheck-accept-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, unsigned>> runs = {{"a", 1}, {"b", 1}, {"c", 8}};
  std::string failure;
  for (const auto& [name, threads] : runs) {
    json c = read_json_file(movie / "run.json");
    c["history"] = (movie / "history.json").string();
    c["examples"] = (movie / "examples.json").string();
    c["out_dir"] = (root / name).string();
    c["gateway"]["cache_dir"] = (movie / "cache").string();
    const fs::path config = root / (name + ".json");
    fs::create_directories(root);
    write_json_file(config, c);
    std::ostringstream out, err;
    if (cli::cmd_run(config, out, err, threads) != cli::kExitOk) {
      failure = "run " + name + " failed: " + err.str();
      break;
    }
  }
  if (failure.empty()) {
    for (const char* file :
         {"candidates.json", "matrix.json", "subsumption.json", "selection.json"}) {
      const std::string want = slurp(root / "a" / file);
      if (want.empty()) failure = std::string(file) + " is empty";
      if (slurp(root / "b" / file) != want) failure = std::string(file) + " differs across runs";
      if (slurp(root / "c" / file) != want) failure = std::string(file) + " differs at 8 threads";
      if (!failure.empty()) break;
    }
  }
  fs::remove_all(root);
  note = "two runs at 1 thread and one at 8, four artifacts compared";
  return failure;
}

std::string delta_round_trip(std::string& note) {
  std::vector<PromptVersionHistory> histories = {
      load_history(kFixtures / "movie" / "history.json")};
  Rng rng(777);
  for (int i = 0; i < 1000; ++i) histories.push_back(testing::random_history(rng));
  std::size_t deltas = 0;
  for (std::size_t h = 0; h < histories.size(); ++h) {
    const auto& versions = histories[h].versions;
    const auto ds = compute_deltas(histories[h]);
    for (std::size_t v = 0; v + 1 < versions.size(); ++v, ++deltas) {
      if (apply_delta(segment_sentences(versions[v].text), ds[v]) !=
          segment_sentences(versions[v + 1].text)) {
        return "history " + std::to_string(h) + " delta " + std::to_string(v + 1);
      }
    }
  }
  note = std::to_string(histories.size()) + " histories, " + std::to_string(deltas) + " deltas";
  return "";
}

std::string vacuous_and_infeasible(std::string& note) {
  Rng rng(31);
  const auto m = testing::random_matrix(rng, 6, 5, 0.5);
  const std::vector<Label> all_good(6, Label::kGood);
  if (set_coverage(m, all_good, {"f000", "f001"}) != 1.0)
    return "coverage without failures is not 1";
  const auto k = identity_subsumption(m.assertion_ids);
  for (const auto& r : {solve_cov(m, all_good, 1.0, 0.0), solve_sub(m, all_good, k, 1.0, 0.0)}) {
    if (r.status != SelectionStatus::kOptimal || !r.selected_ids.empty() || r.coverage != 1.0) {
      return text(r.mode) + " on a set without failures: " + text(r.status);
    }
  }

  auto ones = testing::instance_w_matrix();
  for (auto& row : ones.cells) std::fill(row.begin(), row.end(), 1);
  const auto labels = testing::instance_w_labels();
  for (const auto& r :
       {solve_cov(ones, labels, 0.5, 0.25),
        solve_sub(ones, labels, identity_subsumption(ones.assertion_ids), 0.5, 0.25)}) {
    if (r.status != SelectionStatus::kInfeasible) return "all-ones matrix: " + text(r.status);
    if (r.max_coverage_at_tau != 0.0) return "all-ones matrix: max coverage not reported as 0";
  }
  note = "empty selection with coverage 1; all-ones INFEASIBLE with max coverage 0";
  return "";
}

}  // namespace
}  // namespace deltacheck

int main() {
  using namespace deltacheck;
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"instance W", instance_w},
      {"no-examples graph", two_trees},
      {"FFR bounds and monotonicity", ffr_bounds},
      {"DSL subsumption soundness", dsl_soundness},
      {"scale m=106 n=82", scale},
      {"end-to-end determinism", determinism},
      {"delta round-trip", delta_round_trip},
      {"vacuous denominators and infeasibility", vacuous_and_infeasible},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string note, reason;
    try {
      reason = criteria[i].second(note);
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    const bool ok = reason.empty();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": "
              << (ok ? note : reason) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
