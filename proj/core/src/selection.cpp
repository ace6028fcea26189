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

#include "deltacheck/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bitset.hpp"
#include "deltacheck/errors.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {
namespace {

using detail::Bits;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kEps = 1e-9;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void check_threshold(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

std::size_t required_count(double alpha, std::size_t nbad) {
  if (nbad == 0) return 0;
  const double v = std::ceil(alpha * static_cast<double>(nbad) - kEps);
  return v <= 0.0 ? 0 : static_cast<std::size_t>(v);
}

std::size_t allowed_count(double tau, std::size_t ngood) {
  return static_cast<std::size_t>(std::floor(tau * static_cast<double>(ngood) + kEps));
}

double ratio(std::size_t num, std::size_t den, double empty) {
  return den == 0 ? empty : static_cast<double>(num) / static_cast<double>(den);
}

// Position of every id of `k` in `ids`; throws when the id sets differ.
std::vector<std::size_t> align(const SubsumptionMatrix& k, const std::vector<std::string>& ids) {
  if (k.size() != ids.size()) {
    throw DimensionMismatchError("subsumption matrix has " + std::to_string(k.size()) +
                                 " assertions, expected " + std::to_string(ids.size()));
  }
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < ids.size(); ++i) at[ids[i]] = i;
  std::vector<std::size_t> pos(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto it = at.find(k.assertion_ids[i]);
    if (it == at.end()) {
      throw DimensionMismatchError("subsumption matrix names unknown assertion '" +
                                   k.assertion_ids[i] + "'");
    }
    pos[i] = it->second;
  }
  return pos;
}

class Deadline {
 public:
  explicit Deadline(std::chrono::duration<double> limit)
      : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(limit)) {}

  bool expired() {
    if (hit_) return true;
    if ((++ticks_ & 4095U) == 0 && Clock::now() >= end_) hit_ = true;
    return hit_;
  }
  bool hit() const { return hit_; }

 private:
  Clock::time_point end_;
  std::uint64_t ticks_ = 0;
  bool hit_ = false;
};

// Assertions in id order, with the examples each one flags as bit sets.
struct Instance {
  std::vector<std::string> ids;
  std::vector<std::size_t> column;
  std::vector<std::size_t> bad_rows;
  std::vector<std::size_t> good_rows;
  std::vector<Bits> bad;
  std::vector<Bits> good;
  std::vector<Bits> out;  // out[i]: j != i with {i} => j
  std::vector<Bits> in;   // in[j]: i != j with {i} => j
  std::size_t need = 0;
  std::size_t allow = 0;

  std::size_t size() const { return ids.size(); }
  std::size_t nbad() const { return bad_rows.size(); }
  std::size_t ngood() const { return good_rows.size(); }
};

Instance make_instance(const ResultMatrix& m, std::span<const Label> labels,
                       const SubsumptionMatrix* k, double alpha, double tau) {
  check_threshold(alpha, "alpha");
  check_threshold(tau, "tau");
  m.validate();
  if (labels.size() != m.rows()) {
    throw DimensionMismatchError("got " + std::to_string(labels.size()) + " labels for " +
                                 std::to_string(m.rows()) + " examples");
  }
  Instance inst;
  const std::size_t n = m.cols();
  inst.column.resize(n);
  std::iota(inst.column.begin(), inst.column.end(), 0);
  std::sort(inst.column.begin(), inst.column.end(), [&](std::size_t a, std::size_t b) {
    return m.assertion_ids[a] < m.assertion_ids[b];
  });
  for (auto c : inst.column) inst.ids.push_back(m.assertion_ids[c]);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    (labels[r] == Label::kBad ? inst.bad_rows : inst.good_rows).push_back(r);
  }
  inst.need = required_count(alpha, inst.nbad());
  inst.allow = allowed_count(tau, inst.ngood());
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t c = inst.column[p];
    Bits bad(inst.nbad()), good(inst.ngood());
    for (std::size_t b = 0; b < inst.nbad(); ++b) {
      if (!m.passes(inst.bad_rows[b], c)) bad.set(b);
    }
    for (std::size_t g = 0; g < inst.ngood(); ++g) {
      if (!m.passes(inst.good_rows[g], c)) good.set(g);
    }
    inst.bad.push_back(std::move(bad));
    inst.good.push_back(std::move(good));
  }
  inst.out.assign(n, Bits(n));
  inst.in.assign(n, Bits(n));
  if (k != nullptr) {
    const auto pos = align(*k, inst.ids);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && k->implies(i, j)) {
          inst.out[pos[i]].set(pos[j]);
          inst.in[pos[j]].set(pos[i]);
        }
      }
    }
  }
  return inst;
}

// Smallest number of the given gains whose sum reaches `deficit`, or kNone.
std::size_t picks_needed(std::vector<std::size_t>& gains, std::size_t deficit) {
  if (deficit == 0) return 0;
  std::sort(gains.begin(), gains.end(), std::greater<>());
  std::size_t sum = 0;
  for (std::size_t t = 0; t < gains.size(); ++t) {
    sum += gains[t];
    if (sum >= deficit) return t + 1;
  }
  return kNone;
}

// Branch and bound on include/exclude, largest failure sets first.
class MaxCoverage {
 public:
  MaxCoverage(const Instance& inst, std::size_t stop_at, Deadline& deadline)
      : inst_(inst), stop_at_(stop_at), deadline_(deadline) {}

  std::size_t run() {
    std::vector<std::size_t> order(inst_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return inst_.bad[a].count() > inst_.bad[b].count();
    });
    visit(order, Bits(inst_.nbad()), Bits(inst_.ngood()));
    return best_;
  }

 private:
  void visit(const std::vector<std::size_t>& pool, Bits cov, const Bits& fal) {
    if (best_ >= stop_at_ || deadline_.expired()) return;
    std::vector<std::size_t> rest;
    for (auto r : pool) {
      if (inst_.bad[r].subset_of(cov)) continue;
      if (inst_.good[r].subset_of(fal)) {
        cov |= inst_.bad[r];  // costs nothing
      } else if (Bits::count_or(fal, inst_.good[r]) <= inst_.allow) {
        rest.push_back(r);
      }
    }
    best_ = std::max(best_, cov.count());
    if (rest.empty()) return;
    Bits bound = cov;
    for (auto r : rest) bound |= inst_.bad[r];
    if (bound.count() <= best_) return;

    const std::size_t r = rest.front();
    std::vector<std::size_t> tail(rest.begin() + 1, rest.end());
    Bits cov_in = cov;
    cov_in |= inst_.bad[r];
    Bits fal_in = fal;
    fal_in |= inst_.good[r];
    visit(tail, std::move(cov_in), fal_in);
    visit(tail, std::move(cov), fal);
  }

  const Instance& inst_;
  std::size_t stop_at_;
  Deadline& deadline_;
  std::size_t best_ = 0;
};

struct Selection {
  std::vector<std::size_t> picks;  // positions, increasing
  Bits cov, fal, chosen, subsumed;
};

Selection evaluate(const Instance& inst, const std::vector<std::size_t>& picks) {
  Selection s{picks, Bits(inst.nbad()), Bits(inst.ngood()), Bits(inst.size()),
              Bits(inst.size())};
  for (auto p : picks) {
    s.cov |= inst.bad[p];
    s.fal |= inst.good[p];
    s.chosen.set(p);
    s.subsumed |= inst.out[p];
  }
  return s;
}

std::size_t sub_objective(const Instance& inst, const Selection& s) {
  return s.picks.size() + inst.size() - Bits::count_or(s.chosen, s.subsumed);
}

// Most new failures first until the coverage target is met; nullopt when
// the greedy pass gets stuck.
std::optional<std::vector<std::size_t>> greedy_cover(const Instance& inst) {
  Bits cov(inst.nbad()), fal(inst.ngood());
  std::vector<std::size_t> picks;
  std::vector<std::uint8_t> used(inst.size(), 0);
  while (cov.count() < inst.need) {
    std::size_t best = kNone, gain = 0;
    for (std::size_t q = 0; q < inst.size(); ++q) {
      if (used[q] || Bits::count_or(fal, inst.good[q]) > inst.allow) continue;
      const std::size_t g = Bits::count_andnot(inst.bad[q], cov);
      if (g > gain) {
        gain = g;
        best = q;
      }
    }
    if (best == kNone) return std::nullopt;
    used[best] = 1;
    picks.push_back(best);
    cov |= inst.bad[best];
    fal |= inst.good[best];
  }
  std::sort(picks.begin(), picks.end());
  return picks;
}

// Iterative deepening on |F'|; depth-first in id order so the first hit at
// the smallest depth is the lexicographically smallest optimum.
class CovSearch {
 public:
  CovSearch(const Instance& inst, Deadline& deadline) : inst_(inst), deadline_(deadline) {}

  std::optional<std::vector<std::size_t>> run() {
    for (std::size_t depth = 0; depth <= inst_.size(); ++depth) {
      chosen_.clear();
      Bits cov(inst_.nbad()), fal(inst_.ngood());
      if (visit(0, depth, cov, fal)) return chosen_;
      if (deadline_.hit()) return std::nullopt;
    }
    return std::nullopt;
  }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool visit(std::size_t start, std::size_t left, const Bits& cov, const Bits& fal) {
    ++nodes_;
    const std::size_t covered = cov.count();
    if (covered >= inst_.need) return true;
    if (left == 0 || deadline_.expired()) return false;
    std::vector<std::size_t> cand, gains;
    for (std::size_t q = start; q < inst_.size(); ++q) {
      if (Bits::count_or(fal, inst_.good[q]) > inst_.allow) continue;
      const std::size_t g = Bits::count_andnot(inst_.bad[q], cov);
      if (g == 0) continue;
      cand.push_back(q);
      gains.push_back(g);
    }
    const std::size_t deficit = inst_.need - covered;
    for (std::size_t idx = 0; idx < cand.size(); ++idx) {
      // Later picks come from cand[idx..]; their best gains bound the depth.
      std::vector<std::size_t> tail(gains.begin() + static_cast<std::ptrdiff_t>(idx), gains.end());
      const std::size_t t = picks_needed(tail, deficit);
      if (t == kNone || t > left) return false;
      const std::size_t q = cand[idx];
      Bits cov2 = cov;
      cov2 |= inst_.bad[q];
      Bits fal2 = fal;
      fal2 |= inst_.good[q];
      chosen_.push_back(q);
      if (visit(q + 1, left - 1, cov2, fal2)) return true;
      chosen_.pop_back();
      if (deadline_.hit()) return false;
    }
    return false;
  }

  const Instance& inst_;
  Deadline& deadline_;
  std::vector<std::size_t> chosen_;
  std::uint64_t nodes_ = 0;
};

// Depth-first over sets in id order (pre-order equals lexicographic order)
// with the bound |S| + max(t_cov + e, pack):
//   t_cov  fewest further picks that can restore coverage,
//   e      unreached assertions no remaining pick can reach,
//   pack   unreached assertions with pairwise disjoint sets of pickers, each
//          of which costs either a pick or a place in G.
class SubSearch {
 public:
  SubSearch(const Instance& inst, Deadline& deadline) : inst_(inst), deadline_(deadline) {}

  void seed(std::vector<std::size_t> picks) {
    best_obj_ = sub_objective(inst_, evaluate(inst_, picks));
    best_ = std::move(picks);
    from_dfs_ = false;
  }

  void run() {
    Selection s = evaluate(inst_, {});
    visit(0, s);
  }

  bool found() const { return best_obj_ != kNone; }
  const std::vector<std::size_t>& best() const { return best_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool prunes(std::size_t bound) const {
    return best_obj_ != kNone && (bound > best_obj_ || (bound == best_obj_ && from_dfs_));
  }

  void visit(std::size_t start, Selection& s) {
    ++nodes_;
    if (deadline_.expired()) return;
    const std::size_t covered = s.cov.count();
    if (covered >= inst_.need) {
      const std::size_t obj = sub_objective(inst_, s);
      if (best_obj_ == kNone || obj < best_obj_ || (obj == best_obj_ && !from_dfs_)) {
        best_obj_ = obj;
        best_ = s.picks;
        from_dfs_ = true;
      }
    }

    const std::size_t m = inst_.size();
    std::vector<std::size_t> cand, gains;
    Bits allowed(m);
    for (std::size_t q = start; q < m; ++q) {
      if (Bits::count_or(s.fal, inst_.good[q]) > inst_.allow) continue;
      cand.push_back(q);
      allowed.set(q);
      gains.push_back(Bits::count_andnot(inst_.bad[q], s.cov));
    }
    if (cand.empty()) return;

    const std::size_t deficit = covered >= inst_.need ? 0 : inst_.need - covered;
    const std::size_t t_cov = picks_needed(gains, deficit);
    if (t_cov == kNone) return;

    std::size_t unreachable = 0;
    std::vector<Bits> pickers;
    for (std::size_t j = 0; j < m; ++j) {
      if (s.chosen.test(j) || s.subsumed.test(j)) continue;
      Bits p = inst_.in[j];
      p &= allowed;
      if (allowed.test(j)) p.set(j);
      if (p.any()) {
        pickers.push_back(std::move(p));
      } else {
        ++unreachable;
      }
    }
    std::stable_sort(pickers.begin(), pickers.end(),
                     [](const Bits& a, const Bits& b) { return a.count() < b.count(); });
    std::size_t pack = unreachable;
    Bits taken(m);
    for (const auto& p : pickers) {
      if (!Bits::intersects(p, taken)) {
        taken |= p;
        ++pack;
      }
    }
    const std::size_t bound =
        s.picks.size() + std::max(std::max<std::size_t>(1, t_cov) + unreachable, pack);
    if (prunes(bound)) return;

    for (auto q : cand) {
      Selection child = s;
      child.picks.push_back(q);
      child.cov |= inst_.bad[q];
      child.fal |= inst_.good[q];
      child.chosen.set(q);
      child.subsumed |= inst_.out[q];
      visit(q + 1, child);
      if (deadline_.hit() || prunes(bound)) return;
    }
  }

  const Instance& inst_;
  Deadline& deadline_;
  std::vector<std::size_t> best_;
  std::size_t best_obj_ = kNone;
  bool from_dfs_ = false;
  std::uint64_t nodes_ = 0;
};

// Adds single assertions while that lowers |F'| + |G|.
std::vector<std::size_t> improve_sub(const Instance& inst, std::vector<std::size_t> picks) {
  while (true) {
    Selection s = evaluate(inst, picks);
    Bits reached = s.chosen;
    reached |= s.subsumed;
    std::size_t best = kNone, best_gain = 1;
    for (std::size_t q = 0; q < inst.size(); ++q) {
      if (s.chosen.test(q) || Bits::count_or(s.fal, inst.good[q]) > inst.allow) continue;
      Bits add = inst.out[q];
      add.set(q);
      const std::size_t gain = Bits::count_andnot(add, reached);
      if (gain > best_gain) {
        best_gain = gain;
        best = q;
      }
    }
    if (best == kNone) break;
    picks.push_back(best);
    std::sort(picks.begin(), picks.end());
  }
  return picks;
}

IlpAssignment ilp_from_selection(const ResultMatrix& m, const Instance& inst,
                                 const Selection& s) {
  const std::size_t n = m.rows(), cols = m.cols();
  IlpAssignment a;
  a.x.assign(cols, 0);
  a.r.assign(cols, 0);
  a.s.assign(cols, 0);
  a.u.assign(n, 0);
  a.z.assign(n, 0);
  a.w.assign(n, std::vector<std::uint8_t>(cols, 0));
  for (std::size_t p = 0; p < inst.size(); ++p) {
    const std::size_t c = inst.column[p];
    a.x[c] = s.chosen.test(p) ? 1 : 0;
    a.r[c] = s.subsumed.test(p) ? 1 : 0;
    a.s[c] = (!a.x[c] && !a.r[c]) ? 1 : 0;
    if (!a.x[c]) continue;
    for (std::size_t b = 0; b < inst.nbad(); ++b) {
      if (inst.bad[p].test(b)) a.w[inst.bad_rows[b]][c] = 1;
    }
    for (std::size_t g = 0; g < inst.ngood(); ++g) {
      if (inst.good[p].test(g)) a.w[inst.good_rows[g]][c] = 1;
    }
  }
  for (std::size_t b = 0; b < inst.nbad(); ++b) a.u[inst.bad_rows[b]] = s.cov.test(b) ? 1 : 0;
  for (std::size_t g = 0; g < inst.ngood(); ++g) a.z[inst.good_rows[g]] = s.fal.test(g) ? 1 : 0;
  return a;
}

SelectionResult make_result(SelectionMode mode, double alpha, double tau, const ResultMatrix& m,
                            const Instance& inst, const Selection& s, SelectionStatus status) {
  SelectionResult r;
  r.mode = mode;
  r.alpha = alpha;
  r.tau = tau;
  r.status = status;
  for (auto p : s.picks) r.selected_ids.push_back(inst.ids[p]);
  for (std::size_t p = 0; p < inst.size(); ++p) {
    if (!s.chosen.test(p) && !s.subsumed.test(p)) r.excluded_not_subsumed_ids.push_back(inst.ids[p]);
  }
  r.coverage = ratio(s.cov.count(), inst.nbad(), 1.0);
  r.ffr = ratio(s.fal.count(), inst.ngood(), 0.0);
  r.objective = static_cast<std::int64_t>(
      mode == SelectionMode::kSub ? sub_objective(inst, s) : s.picks.size());
  r.ilp = ilp_from_selection(m, inst, s);
  return r;
}

SelectionResult infeasible(SelectionMode mode, double alpha, double tau, const Instance& inst,
                           std::size_t best_count) {
  SelectionResult r;
  r.mode = mode;
  r.alpha = alpha;
  r.tau = tau;
  r.status = SelectionStatus::kInfeasible;
  r.max_coverage_at_tau = ratio(best_count, inst.nbad(), 1.0);
  return r;
}

std::size_t max_coverage_count(const Instance& inst, std::size_t stop_at, Deadline& deadline) {
  return MaxCoverage(inst, stop_at, deadline).run();
}

std::int64_t count_selected_and_g(const SelectionResult& r) {
  return static_cast<std::int64_t>(r.selected_ids.size() + r.excluded_not_subsumed_ids.size());
}

}  // namespace

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kCov: return "cov";
    case SelectionMode::kSub: return "sub";
    case SelectionMode::kBaseline: return "baseline";
    case SelectionMode::kNoExamples: return "no-examples";
  }
  return "sub";
}

std::string_view to_string(SelectionStatus status) {
  switch (status) {
    case SelectionStatus::kOptimal: return "OPTIMAL";
    case SelectionStatus::kInfeasible: return "INFEASIBLE";
    case SelectionStatus::kTimeLimit: return "TIME_LIMIT";
  }
  return "OPTIMAL";
}

SelectionMode parse_selection_mode(std::string_view name) {
  std::string n = text::fold_case(name);
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "cov") return SelectionMode::kCov;
  if (n == "sub") return SelectionMode::kSub;
  if (n == "baseline") return SelectionMode::kBaseline;
  if (n == "no-examples") return SelectionMode::kNoExamples;
  throw ValidationError("unknown selection mode '" + std::string(name) +
                        "' (expected cov, sub, baseline or no-examples)");
}

SelectionStatus parse_selection_status(std::string_view name) {
  if (name == "OPTIMAL") return SelectionStatus::kOptimal;
  if (name == "INFEASIBLE") return SelectionStatus::kInfeasible;
  if (name == "TIME_LIMIT") return SelectionStatus::kTimeLimit;
  throw ValidationError("unknown selection status '" + std::string(name) + "'");
}

void SelectionConfig::validate() const {
  check_threshold(alpha, "alpha");
  check_threshold(tau, "tau");
  if (!(time_limit.count() > 0.0)) throw ValidationError("time limit must be positive");
}

json selection_to_json(const SelectionResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"mode", to_string(r.mode)},
              {"alpha", r.alpha},
              {"tau", r.tau},
              {"status", to_string(r.status)},
              {"selected", r.selected_ids},
              {"excluded_not_subsumed", r.excluded_not_subsumed_ids},
              {"coverage", opt(r.coverage)},
              {"ffr", opt(r.ffr)},
              {"objective", r.objective},
              {"diagnostics", {{"max_coverage_at_tau", opt(r.max_coverage_at_tau)}}}};
}

SelectionResult selection_from_json(const json& doc) {
  auto opt = [](const json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  SelectionResult r;
  try {
    r.mode = parse_selection_mode(doc.at("mode").get<std::string>());
    r.alpha = doc.at("alpha").get<double>();
    r.tau = doc.at("tau").get<double>();
    r.status = parse_selection_status(doc.at("status").get<std::string>());
    r.selected_ids = doc.at("selected").get<std::vector<std::string>>();
    r.excluded_not_subsumed_ids = doc.at("excluded_not_subsumed").get<std::vector<std::string>>();
    r.coverage = opt(doc.at("coverage"));
    r.ffr = opt(doc.at("ffr"));
    r.objective = doc.at("objective").get<std::int64_t>();
    r.max_coverage_at_tau = opt(doc.at("diagnostics").at("max_coverage_at_tau"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed selection file: ") + e.what());
  }
  return r;
}

SelectionResult load_selection(const std::filesystem::path& path) {
  return selection_from_json(read_json_file(path));
}

SelectionResult solve_cov(const ResultMatrix& m, std::span<const Label> labels, double alpha,
                          double tau, std::chrono::duration<double> time_limit) {
  const Instance inst = make_instance(m, labels, nullptr, alpha, tau);
  Deadline deadline(time_limit);
  const std::size_t reach = max_coverage_count(inst, inst.need, deadline);
  if (!deadline.hit() && reach < inst.need) {
    Deadline full(time_limit);
    return infeasible(SelectionMode::kCov, alpha, tau, inst,
                      max_coverage_count(inst, inst.nbad(), full));
  }
  CovSearch search(inst, deadline);
  auto picks = deadline.hit() ? std::nullopt : search.run();
  SelectionResult r;
  if (picks) {
    r = make_result(SelectionMode::kCov, alpha, tau, m, inst, evaluate(inst, *picks),
                    SelectionStatus::kOptimal);
  } else {
    auto fallback = greedy_cover(inst);
    r = make_result(SelectionMode::kCov, alpha, tau, m, inst,
                    evaluate(inst, fallback.value_or(std::vector<std::size_t>{})),
                    SelectionStatus::kTimeLimit);
  }
  r.nodes = search.nodes();
  return r;
}

SelectionResult solve_sub(const ResultMatrix& m, std::span<const Label> labels,
                          const SubsumptionMatrix& k, double alpha, double tau,
                          std::chrono::duration<double> time_limit) {
  const Instance inst = make_instance(m, labels, &k, alpha, tau);
  Deadline deadline(time_limit);
  SubSearch search(inst, deadline);
  if (auto greedy = greedy_cover(inst)) {
    search.seed(improve_sub(inst, std::move(*greedy)));
  } else {
    const std::size_t reach = max_coverage_count(inst, inst.need, deadline);
    if (!deadline.hit() && reach < inst.need) {
      Deadline full(time_limit);
      return infeasible(SelectionMode::kSub, alpha, tau, inst,
                        max_coverage_count(inst, inst.nbad(), full));
    }
  }
  if (!deadline.hit()) search.run();
  const auto status = deadline.hit() ? SelectionStatus::kTimeLimit : SelectionStatus::kOptimal;
  SelectionResult r = make_result(
      SelectionMode::kSub, alpha, tau, m, inst,
      evaluate(inst, search.found() ? search.best() : std::vector<std::size_t>{}), status);
  r.nodes = search.nodes();
  return r;
}

SelectionResult solve_baseline(const ResultMatrix& m, std::span<const Label> labels, double tau,
                               const SubsumptionMatrix* k) {
  const Instance inst = make_instance(m, labels, k, 0.0, tau);
  std::vector<std::size_t> picks;
  for (std::size_t p = 0; p < inst.size(); ++p) {
    if (inst.good[p].count() <= inst.allow) picks.push_back(p);
  }
  return make_result(SelectionMode::kBaseline, 0.0, tau, m, inst, evaluate(inst, picks),
                     SelectionStatus::kOptimal);
}

SelectionResult solve_no_examples(const SubsumptionMatrix& k) {
  k.validate();
  SubsumptionMatrix closed = k;
  transitive_closure(closed);
  const std::size_t n = closed.size();
  std::vector<std::string> selected;
  for (std::size_t i = 0; i < n; ++i) {
    bool representative = true;
    for (std::size_t j = 0; j < n && representative; ++j) {
      if (j == i || !closed.implies(j, i)) continue;
      if (!closed.implies(i, j)) {
        representative = false;  // reached from outside its component
      } else if (closed.assertion_ids[j] < closed.assertion_ids[i]) {
        representative = false;  // not the smallest id of its component
      }
    }
    if (representative) selected.push_back(closed.assertion_ids[i]);
  }
  std::sort(selected.begin(), selected.end());
  SelectionResult r;
  r.mode = SelectionMode::kNoExamples;
  r.selected_ids = selected;
  r.excluded_not_subsumed_ids = excluded_not_subsumed(closed.assertion_ids, selected, &closed);
  r.objective = count_selected_and_g(r);
  return r;
}

SelectionResult solve(const SelectionConfig& config, const ResultMatrix* m,
                      std::span<const Label> labels, const SubsumptionMatrix* k) {
  config.validate();
  const bool needs_k =
      config.mode == SelectionMode::kSub || config.mode == SelectionMode::kNoExamples;
  if (needs_k && k == nullptr) {
    throw PreconditionError(std::string("mode ") + std::string(to_string(config.mode)) +
                            " needs a subsumption matrix");
  }
  if (m == nullptr && config.mode != SelectionMode::kNoExamples) {
    throw PreconditionError(std::string("mode ") + std::string(to_string(config.mode)) +
                            " needs a result matrix");
  }
  SelectionResult r;
  switch (config.mode) {
    case SelectionMode::kCov:
      r = solve_cov(*m, labels, config.alpha, config.tau, config.time_limit);
      if (k != nullptr && r.status != SelectionStatus::kInfeasible) {
        r.excluded_not_subsumed_ids = excluded_not_subsumed(m->assertion_ids, r.selected_ids, k);
      }
      return r;
    case SelectionMode::kSub:
      return solve_sub(*m, labels, *k, config.alpha, config.tau, config.time_limit);
    case SelectionMode::kBaseline:
      return solve_baseline(*m, labels, config.tau, k);
    case SelectionMode::kNoExamples:
      r = solve_no_examples(*k);
      if (m != nullptr) {
        if (labels.size() != m->rows()) {
          throw DimensionMismatchError("label count does not match the result matrix rows");
        }
        align(*k, m->assertion_ids);
        const std::set<std::string> chosen(r.selected_ids.begin(), r.selected_ids.end());
        r.coverage = set_coverage(*m, labels, chosen);
        r.ffr = set_ffr(*m, labels, chosen);
      }
      return r;
  }
  return r;
}

SelectionResult brute_force_oracle(const ResultMatrix& m, std::span<const Label> labels,
                                   const SubsumptionMatrix* k, double alpha, double tau,
                                   SelectionMode mode) {
  if (mode == SelectionMode::kBaseline) {
    throw PreconditionError("the oracle covers the cov, sub and no-examples modes");
  }
  if ((mode == SelectionMode::kSub || mode == SelectionMode::kNoExamples) && k == nullptr) {
    throw PreconditionError("the oracle needs a subsumption matrix in this mode");
  }
  const std::size_t cols = mode == SelectionMode::kNoExamples ? k->size() : m.cols();
  if (cols > 20) throw TooLargeError("oracle enumeration is limited to 20 assertions");

  std::vector<std::string> ids =
      mode == SelectionMode::kNoExamples ? k->assertion_ids : m.assertion_ids;
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

  SubsumptionMatrix kk;
  if (k != nullptr) {
    kk = *k;
    if (mode == SelectionMode::kNoExamples) transitive_closure(kk);
  }
  auto implies = [&](const std::string& a, const std::string& b) {
    return kk.implies(kk.index(a), kk.index(b));
  };

  bool have = false;
  SelectionResult best;
  std::vector<std::string> best_ids;
  std::int64_t best_obj = 0;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << cols); ++mask) {
    std::vector<std::string> sel;
    for (auto c : order) {
      if (mask & (std::uint32_t{1} << c)) sel.push_back(ids[c]);
    }
    std::optional<double> cov, ffr;
    if (mode != SelectionMode::kNoExamples) {
      std::size_t bad = 0, good = 0, caught = 0, false_flags = 0;
      for (std::size_t row = 0; row < m.rows(); ++row) {
        bool flagged = false;
        for (std::size_t c = 0; c < cols; ++c) {
          if ((mask & (std::uint32_t{1} << c)) && m.cells[row][c] == 0) flagged = true;
        }
        if (labels[row] == Label::kBad) {
          ++bad;
          caught += flagged ? 1 : 0;
        } else {
          ++good;
          false_flags += flagged ? 1 : 0;
        }
      }
      cov = bad == 0 ? 1.0 : static_cast<double>(caught) / static_cast<double>(bad);
      ffr = good == 0 ? 0.0 : static_cast<double>(false_flags) / static_cast<double>(good);
      if (*cov < alpha - kEps || *ffr > tau + kEps) continue;
    }
    std::vector<std::string> g;
    for (const auto& j : ids) {
      if (std::find(sel.begin(), sel.end(), j) != sel.end()) continue;
      bool covered = false;
      for (const auto& i : sel) {
        if (k != nullptr && implies(i, j)) covered = true;
      }
      if (!covered) g.push_back(j);
    }
    std::sort(g.begin(), g.end());
    const std::int64_t obj = static_cast<std::int64_t>(
        mode == SelectionMode::kCov ? sel.size() : sel.size() + g.size());
    if (!have || obj < best_obj || (obj == best_obj && sel < best_ids)) {
      have = true;
      best_obj = obj;
      best_ids = sel;
      best = SelectionResult{};
      best.selected_ids = sel;
      best.excluded_not_subsumed_ids = g;
      best.coverage = cov;
      best.ffr = ffr;
      best.objective = obj;
    }
  }
  best.mode = mode;
  best.alpha = mode == SelectionMode::kNoExamples ? 0.0 : alpha;
  best.tau = mode == SelectionMode::kNoExamples ? 0.0 : tau;
  if (!have) {
    best.status = SelectionStatus::kInfeasible;
    best.max_coverage_at_tau = max_coverage_at_tau(m, labels, tau);
  }
  return best;
}

double max_coverage_at_tau(const ResultMatrix& m, std::span<const Label> labels, double tau) {
  const Instance inst = make_instance(m, labels, nullptr, 0.0, tau);
  Deadline unlimited(std::chrono::hours(24 * 365));
  return ratio(max_coverage_count(inst, inst.nbad(), unlimited), inst.nbad(), 1.0);
}

std::vector<std::string> excluded_not_subsumed(const std::vector<std::string>& all_ids,
                                               const std::vector<std::string>& selected,
                                               const SubsumptionMatrix* k) {
  const std::set<std::string> chosen(selected.begin(), selected.end());
  std::vector<std::size_t> chosen_k;
  if (k != nullptr) {
    for (const auto& id : selected) chosen_k.push_back(k->index(id));
  }
  std::vector<std::string> g;
  for (const auto& j : all_ids) {
    if (chosen.count(j)) continue;
    bool covered = false;
    if (k != nullptr) {
      const std::size_t jj = k->index(j);
      for (auto i : chosen_k) covered = covered || k->implies(i, jj);
    }
    if (!covered) g.push_back(j);
  }
  std::sort(g.begin(), g.end());
  return g;
}

IlpAssignment derive_ilp_variables(const ResultMatrix& m, std::span<const Label> labels,
                                   const SubsumptionMatrix* k,
                                   const std::vector<std::string>& selected) {
  if (labels.size() != m.rows()) {
    throw DimensionMismatchError("label count does not match the result matrix rows");
  }
  const std::size_t n = m.rows(), cols = m.cols();
  IlpAssignment a;
  a.x.assign(cols, 0);
  for (const auto& id : selected) a.x[m.assertion_index(id)] = 1;
  a.w.assign(n, std::vector<std::uint8_t>(cols, 0));
  a.u.assign(n, 0);
  a.z.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t any = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      a.w[i][j] = static_cast<std::uint8_t>((1 - m.cells[i][j]) * a.x[j]);
      any = static_cast<std::uint8_t>(any | a.w[i][j]);
    }
    (labels[i] == Label::kBad ? a.u[i] : a.z[i]) = any;
  }
  a.r.assign(cols, 0);
  a.s.assign(cols, 0);
  for (std::size_t j = 0; j < cols; ++j) {
    if (k != nullptr) {
      const std::size_t kj = k->index(m.assertion_ids[j]);
      for (std::size_t i = 0; i < cols; ++i) {
        if (i != j && a.x[i] && k->implies(k->index(m.assertion_ids[i]), kj)) a.r[j] = 1;
      }
    }
    a.s[j] = static_cast<std::uint8_t>(a.x[j] == 0 && a.r[j] == 0);
  }
  return a;
}

bool check_ilp_constraints(const ResultMatrix& m, std::span<const Label> labels,
                           const SubsumptionMatrix* k, double alpha, double tau,
                           const IlpAssignment& a, std::string* violation) {
  auto fail = [&](std::string what) {
    if (violation) *violation = std::move(what);
    return false;
  };
  const std::size_t n = m.rows(), cols = m.cols();
  if (a.x.size() != cols || a.w.size() != n || a.u.size() != n || a.z.size() != n) {
    return fail("variable vectors have the wrong size");
  }
  std::size_t nbad = 0, ngood = 0, covered = 0, false_flags = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.w[i].size() != cols) return fail("w row has the wrong size");
    int sum_w = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (a.w[i][j] != (1 - m.cells[i][j]) * a.x[j]) {
        return fail("w[" + std::to_string(i) + "][" + std::to_string(j) + "] != (1 - M) * x");
      }
      sum_w += a.w[i][j];
      if (labels[i] == Label::kGood && a.z[i] < a.w[i][j]) {
        return fail("z[" + std::to_string(i) + "] < y * w");
      }
    }
    if (labels[i] == Label::kBad) {
      ++nbad;
      if (a.u[i] > sum_w) return fail("u[" + std::to_string(i) + "] > sum of w");
      covered += a.u[i];
    } else {
      ++ngood;
      false_flags += a.z[i];
    }
  }
  if (nbad > 0 && static_cast<double>(covered) < alpha * static_cast<double>(nbad) - kEps) {
    return fail("coverage constraint violated");
  }
  if (ngood > 0 && static_cast<double>(false_flags) > tau * static_cast<double>(ngood) + kEps) {
    return fail("FFR constraint violated");
  }
  if (k == nullptr) return true;
  if (a.r.size() != cols || a.s.size() != cols) return fail("r or s has the wrong size");
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t kj = k->index(m.assertion_ids[j]);
    int sum = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      if (i == j) continue;
      const int term = a.x[i] * (k->implies(k->index(m.assertion_ids[i]), kj) ? 1 : 0);
      if (term > a.r[j]) return fail("x_i * K_ij > r_j for j=" + std::to_string(j));
      sum += term;
    }
    if (a.r[j] > sum) return fail("r_j exceeds its subsumers for j=" + std::to_string(j));
    if (a.s[j] > 1 - a.x[j]) return fail("s_j > 1 - x_j for j=" + std::to_string(j));
    if (a.s[j] > 1 - a.r[j]) return fail("s_j > 1 - r_j for j=" + std::to_string(j));
    if (a.s[j] < 1 - a.x[j] - a.r[j]) return fail("s_j < 1 - x_j - r_j for j=" + std::to_string(j));
  }
  return true;
}

}  // namespace deltacheck
