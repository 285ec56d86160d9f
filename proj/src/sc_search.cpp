// Superposition-coding search. For fixed power splits the flow program is solved
// by column generation: a restricted master holds a working set of states, and
// every other state is priced against the master's conservation and time-share
// duals. Coordinate moves on the splits are evaluated on the restricted master.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <tuple>

#include <spdlog/spdlog.h>

#include "flow_program.hpp"
#include "hdrelay/flowopt.hpp"

namespace hdrelay {

namespace {

constexpr double kPriceTolerance = 1e-9;
constexpr double kImprovement = 1e-12;
constexpr std::size_t kAdmitPerRound = 4;
constexpr std::size_t kTunedPerRound = 8;
constexpr int kMaxCycles = 1000;

struct ScBlock {
  State state;
  StateView view;
  std::vector<NodeId> splitters;  // transmitters with more than one receiver
  PowerSplit split;
  ConstraintSet region;
  std::vector<double> link_cap;   // interference-free capacity of each link
};

struct Master {
  double rate = 0.0;
  lp::LpSolution sol;
  FlowLayout layout;
  std::vector<std::size_t> members;  // block indices, in layout order
};

class Engine {
 public:
  Engine(const Network& net, const std::vector<State>& states, const ScSearchConfig& cfg) : net_(net), cfg_(cfg) {
    for (const auto& s : states) {
      validate_state(net, s);
      StateView v(net, s);
      ScBlock b{s, v, {}, PowerSplit::equal(v), {}, {}};
      for (auto i : s.tx.members())
        if (v.degree(i) > 1) b.splitters.push_back(i);
      refresh(b);
      for (const auto& l : b.region.links) {
        const double g = net.gain(l.from, l.to);
        b.link_cap.push_back(awgn_capacity(net.snr() * g * g));
      }
      blocks_.push_back(std::move(b));
    }
  }

  std::size_t size() const { return blocks_.size(); }
  const std::vector<ScBlock>& blocks() const { return blocks_; }

  void initialize(int start, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& b : blocks_) {
      switch (start) {
        case 0: b.split = PowerSplit::equal(b.view); break;
        case 1: b.split = PowerSplit::strongest(b.view); break;
        case 2: b.split = PowerSplit::weakest(b.view); break;
        default: b.split = random_split(b.view, rng); break;
      }
      refresh(b);
    }
    in_w_.assign(blocks_.size(), false);
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      if (blocks_[k].state.tx.size() == 1 && blocks_[k].state.rx.size() == 1) in_w_[k] = true;
  }

  void set_splits(const std::vector<PowerSplit>& splits) {
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      blocks_[k].split = splits[k];
      refresh(blocks_[k]);
    }
    in_w_.assign(blocks_.size(), false);
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      if (blocks_[k].state.tx.size() == 1 && blocks_[k].state.rx.size() == 1) in_w_[k] = true;
  }

  Master solve_master() const {
    Master m;
    std::vector<const ConstraintSet*> ptrs;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      if (!in_w_[k]) continue;
      ptrs.push_back(&blocks_[k].region);
      m.members.push_back(k);
    }
    auto prog = detail::build_flow_program(net_, ptrs, m.layout, false);
    m.sol = lp::solve(prog, cfg_.lp);
    if (!m.sol.optimal())
      throw SolverError(std::string("superposition master: ") + lp::to_string(m.sol.status) + " " + m.sol.message);
    m.rate = m.sol.primal[static_cast<std::size_t>(m.layout.rate)];
    spdlog::trace("master over {} states: rate {:.9f} after {} pivots", m.members.size(), m.rate, m.sol.iterations);
    return m;
  }

  /// Column generation to optimality at the current splits.
  Master optimize(double step) {
    for (;;) {
      Master m = solve_master();
      std::vector<double> pi(static_cast<std::size_t>(net_.node_count()));
      for (std::size_t n = 0; n < pi.size(); ++n)
        pi[n] = m.sol.dual[static_cast<std::size_t>(m.layout.conservation_row[n])];
      const double mu = m.sol.dual[static_cast<std::size_t>(m.layout.share_row)];
      auto candidates = price_all(pi, mu, 0.0);
      if (candidates.empty() && cfg_.split_aware_pricing && step > 0.0) candidates = price_all(pi, mu, step);
      if (candidates.empty()) return m;
      // Admit the few most attractive states; ties resolve to the lower index.
      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const auto& a, const auto& b) { return a.value > b.value; });
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto& cand = candidates[c];
        if (c < kAdmitPerRound) {
          in_w_[cand.block] = true;
        } else if (cand.previous) {
          std::tie(blocks_[cand.block].split, blocks_[cand.block].region) = std::move(*cand.previous);
        }
      }
    }
  }

  /// Drops working-set states with no time share; the master optimum is unchanged.
  void shrink(const Master& m) {
    for (std::size_t q = 0; q < m.members.size(); ++q) {
      const auto k = m.members[q];
      const auto& st = blocks_[k].state;
      if (st.tx.size() == 1 && st.rx.size() == 1) continue;
      if (m.sol.primal[static_cast<std::size_t>(m.layout.lambda[q])] <= 1e-12) in_w_[k] = false;
    }
  }

  /// One coordinate-ascent cycle over the splits of the active working-set states.
  void cycle(Master& current, double step) {
    std::vector<std::size_t> active;
    for (std::size_t q = 0; q < current.members.size(); ++q)
      if (current.sol.primal[static_cast<std::size_t>(current.layout.lambda[q])] > 1e-9)
        active.push_back(current.members[q]);
    for (auto k : active) {
      auto& b = blocks_[k];
      for (auto i : b.splitters) {
        const auto& rs = b.view.receivers(i);
        for (auto a : rs) {
          for (auto c : rs) {
            if (a == c) continue;
            const double delta = std::min(step, b.split.alpha(i, a));
            if (delta <= 0.0) continue;
            try_move(b, i, a, c, delta, [&] {
              Master trial = solve_master();
              if (trial.rate <= current.rate + kImprovement) return false;
              current = std::move(trial);
              return true;
            });
          }
        }
      }
    }
  }

  std::vector<PowerSplit> splits() const {
    std::vector<PowerSplit> out;
    for (const auto& b : blocks_) out.push_back(b.split);
    return out;
  }

 private:
  struct Candidate {
    double value;
    std::size_t block;
    std::optional<std::pair<PowerSplit, ConstraintSet>> previous;  // before tuning, if tuning changed it
  };

  /// States outside the working set with positive reduced value; with a positive step
  /// their splits are first tuned towards the current prices.
  std::vector<Candidate> price_all(const std::vector<double>& pi, double mu, double step) {
    std::vector<Candidate> out;
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      if (in_w_[k]) continue;
      auto& b = blocks_[k];
      if (step > 0.0 && b.splitters.empty()) continue;
      auto w = weights(b, pi);
      if (optimistic(b, w) <= mu + kPriceTolerance) continue;
      const double value = price(b.region, w);
      if (step > 0.0) near.emplace_back(value, k);
      else if (value > mu + kPriceTolerance) out.push_back({value, k, std::nullopt});
    }
    if (step <= 0.0) return out;
    // Only the states priced closest to admission are worth tuning.
    std::stable_sort(near.begin(), near.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    near.resize(std::min(near.size(), kTunedPerRound));
    for (auto [value, k] : near) {
      auto& b = blocks_[k];
      auto saved = std::pair(b.split, b.region);
      const double tuned = tune_for_price(b, weights(b, pi), value, step);
      if (tuned > value + kImprovement && tuned > mu + kPriceTolerance) {
        out.push_back({tuned, k, std::move(saved)});
      } else {
        std::tie(b.split, b.region) = std::move(saved);
      }
    }
    return out;
  }

  static PowerSplit random_split(const StateView& v, std::mt19937_64& rng) {
    PowerSplit p;
    for (auto i : v.state().tx.members()) {
      const auto& rs = v.receivers(i);
      if (rs.size() < 2) continue;
      std::vector<double> e;
      double total = 0.0;
      for (std::size_t l = 0; l < rs.size(); ++l) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        e.push_back(-std::log1p(-u));
        total += e.back();
      }
      for (std::size_t l = 0; l < rs.size(); ++l) p.set(i, rs[l], total > 0 ? e[l] / total : 1.0 / rs.size());
    }
    return p;
  }

  static void move(PowerSplit& p, NodeId i, NodeId from, NodeId to, double delta) {
    p.set(i, from, std::max(0.0, p.alpha(i, from) - delta));
    p.set(i, to, std::min(1.0, p.alpha(i, to) + delta));
  }

  void refresh(ScBlock& b) const { b.region = sc_region(net_, b.state, b.split); }

  /// Shifts `delta` of transmitter i's power from one receiver to another and keeps
  /// the move only if `accept` approves the updated region.
  template <class Accept>
  bool try_move(ScBlock& b, NodeId i, NodeId from, NodeId to, double delta, Accept&& accept) {
    PowerSplit split = b.split;
    ConstraintSet region = std::move(b.region);
    move(b.split, i, from, to, delta);
    refresh(b);
    if (accept()) return true;
    b.split = std::move(split);
    b.region = std::move(region);
    return false;
  }

  static std::vector<double> weights(const ScBlock& b, const std::vector<double>& pi) {
    std::vector<double> w;
    for (const auto& l : b.region.links) w.push_back(pi[l.to.index()] - pi[l.from.index()]);
    return w;
  }

  static double optimistic(const ScBlock& b, const std::vector<double>& w) {
    double v = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) v += std::max(w[l], 0.0) * b.link_cap[l];
    return v;
  }

  /// max sum_l w_l f_l over the state's region at unit time share.
  double price(const ConstraintSet& cs, const std::vector<double>& w) const {
    // Only links with positive weight enter the program.
    lp::LinearProgram prog;
    std::vector<int> var(w.size(), -1);
    for (std::size_t l = 0; l < w.size(); ++l)
      if (w[l] > 0.0) var[l] = prog.add_variable({}, w[l]);
    if (prog.num_variables() == 0) return 0.0;
    for (const auto& row : cs.rows) {
      std::vector<lp::Term> terms;
      for (int v : row.vars)
        if (var[static_cast<std::size_t>(v)] >= 0) terms.push_back({var[static_cast<std::size_t>(v)], 1.0});
      if (!terms.empty()) prog.add_constraint({}, std::move(terms), lp::Relation::LessEqual, row.rhs);
    }
    auto options = cfg_.lp;
    options.rule = lp::PivotRule::DantzigBland;
    auto sol = lp::solve(prog, options);
    if (!sol.optimal()) throw SolverError(std::string("superposition pricing: ") + lp::to_string(sol.status));
    return sol.objective;
  }

  double tune_for_price(ScBlock& b, const std::vector<double>& w, double value, double step) {
    for (int sweep = 0; sweep < 32; ++sweep) {
      bool improved = false;
      for (auto i : b.splitters) {
        const auto& rs = b.view.receivers(i);
        for (auto a : rs) {
          for (auto c : rs) {
            if (a == c) continue;
            const double delta = std::min(step, b.split.alpha(i, a));
            if (delta <= 0.0) continue;
            improved |= try_move(b, i, a, c, delta, [&] {
              const double v = price(b.region, w);
              if (v <= value + kImprovement) return false;
              value = v;
              return true;
            });
          }
        }
      }
      if (!improved) break;
    }
    return value;
  }

  const Network& net_;
  const ScSearchConfig& cfg_;
  std::vector<ScBlock> blocks_;
  std::vector<bool> in_w_;
};

SchemeSolution to_solution(const Engine& engine, const Master& m) {
  SchemeSolution sol;
  sol.scheme = Scheme::SC;
  sol.status = lp::Status::Optimal;
  sol.rate = m.rate;
  for (std::size_t k = 0; k < engine.size(); ++k) {
    const auto& b = engine.blocks()[k];
    sol.blocks.push_back(detail::idle_block(b.region));
    sol.blocks.back().split = b.split;
  }
  for (std::size_t q = 0; q < m.members.size(); ++q) {
    const auto k = m.members[q];
    auto split = sol.blocks[k].split;
    sol.blocks[k] = detail::extract_block(engine.blocks()[k].region, m.layout, q, m.sol.primal);
    sol.blocks[k].split = std::move(split);
  }
  return sol;
}

std::vector<double> lambdas(const SchemeSolution& s) {
  std::vector<double> out;
  for (const auto& b : s.blocks) out.push_back(b.lambda);
  return out;
}

SchemeSolution run_start(Engine& engine, int start, const ScSearchConfig& cfg) {
  engine.initialize(start, cfg.seed ^ static_cast<std::uint64_t>(start));
  const double first_step = cfg.steps.empty() ? 0.0 : cfg.steps.front();
  Master current = engine.optimize(first_step);
  engine.shrink(current);
  for (double step : cfg.steps) {
    for (int c = 0; c < kMaxCycles; ++c) {
      const double before = current.rate;
      engine.cycle(current, step);
      current = engine.optimize(step);
      engine.shrink(current);
      if (current.rate - before < cfg.cycle_tolerance) break;
    }
  }
  return to_solution(engine, current);
}

}  // namespace

SchemeSolution solve_sc(const Network& net, const std::vector<State>& states, const ScSearchConfig& cfg) {
  if (states.empty()) throw ValidationError("no states to schedule");
  if (cfg.starts < 1) throw ValidationError("the search needs at least one start");
  const auto starts = static_cast<std::size_t>(cfg.starts);
  std::vector<std::optional<SchemeSolution>> results(starts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    Engine engine(net, states, cfg);
    for (std::size_t s = next++; s < starts; s = next++) {
      try {
        results[s] = run_start(engine, static_cast<int>(s), cfg);
        spdlog::debug("superposition start {} reached {:.9f}", s, results[s]->rate);
      } catch (const SolverError& e) {
        spdlog::warn("superposition start {} skipped: {}", s, e.what());
      }
    }
  };
  const unsigned threads = std::min<unsigned>(cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency()),
                                              static_cast<unsigned>(starts));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::optional<SchemeSolution> best;
  std::vector<double> rates;
  int skipped = 0, best_start = -1;
  for (std::size_t s = 0; s < starts; ++s) {
    if (!results[s]) {
      ++skipped;
      rates.push_back(std::nan(""));
      continue;
    }
    auto& sol = *results[s];
    rates.push_back(sol.rate);
    const bool better = !best || sol.rate > best->rate + kImprovement ||
                        (sol.rate >= best->rate - kImprovement && lambdas(sol) < lambdas(*best));
    if (better) {
      best = std::move(sol);
      best_start = static_cast<int>(s);
    }
  }
  if (!best) throw SolverError("every superposition search start failed");
  best->starts = cfg.starts;
  best->skipped_starts = skipped;
  best->best_start = best_start;
  best->start_rates = std::move(rates);
  return *best;
}

SchemeSolution solve_sc_fixed(const Network& net, const std::vector<State>& states,
                              const std::vector<PowerSplit>& splits, const lp::SolverOptions& lp_options) {
  if (splits.size() != states.size()) throw ValidationError("one power split per state is required");
  std::vector<ConstraintSet> blocks;
  for (std::size_t k = 0; k < states.size(); ++k) blocks.push_back(sc_region(net, states[k], splits[k]));
  auto sol = solve_blocks(net, std::move(blocks), Scheme::SC, lp_options);
  for (std::size_t k = 0; k < states.size(); ++k) sol.blocks[k].split = splits[k];
  return sol;
}

}  // namespace hdrelay
