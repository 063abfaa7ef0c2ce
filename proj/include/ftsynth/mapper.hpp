#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftsynth/circuit.hpp"
#include "ftsynth/dag.hpp"
#include "ftsynth/ir.hpp"
#include "ftsynth/layout.hpp"

namespace ftsynth {

/// Bijection between declared logical qubits and a subset of physical cells.
/// Cells without an occupant are dummies.
struct MappingTable {
  std::vector<int> qubit_to_cell;
  std::vector<int> cell_to_qubit;

  MappingTable() = default;
  MappingTable(int num_qubits, int num_cells)
      : qubit_to_cell(num_qubits, -1), cell_to_qubit(num_cells, -1) {}

  int num_qubits() const { return static_cast<int>(qubit_to_cell.size()); }
  int num_cells() const { return static_cast<int>(cell_to_qubit.size()); }

  void place(int qubit, int cell) {
    if (cell_to_qubit[cell] >= 0) {
      throw std::invalid_argument("cell " + std::to_string(cell) +
                                  " already occupied");
    }
    if (qubit_to_cell[qubit] >= 0) {
      throw std::invalid_argument("qubit already placed");
    }
    qubit_to_cell[qubit] = cell;
    cell_to_qubit[cell] = qubit;
  }

  void apply_swap(int c1, int c2) {
    const int a = cell_to_qubit[c1];
    const int b = cell_to_qubit[c2];
    std::swap(cell_to_qubit[c1], cell_to_qubit[c2]);
    if (a >= 0) qubit_to_cell[a] = c2;
    if (b >= 0) qubit_to_cell[b] = c1;
  }

  friend bool operator==(const MappingTable&, const MappingTable&) = default;
};

/// Uniformly random placement of all declared qubits, with pinned qubits
/// fixed first. Remaining cells stay dummies.
inline MappingTable random_mapping(const Protocol& protocol,
                                   const QubitLayout& layout,
                                   const std::vector<std::pair<int, int>>& pinned,
                                   std::mt19937_64& rng) {
  if (protocol.num_qubits() > layout.size()) {
    throw std::invalid_argument("layout too small: " +
                                std::to_string(protocol.num_qubits()) +
                                " qubits on " + std::to_string(layout.size()) +
                                " cells");
  }
  MappingTable mapping(protocol.num_qubits(), layout.size());
  for (const auto& [qubit, cell] : pinned) {
    if (cell < 0 || cell >= layout.size()) {
      throw std::invalid_argument("pinned cell out of range");
    }
    mapping.place(qubit, cell);  // throws on anchor conflicts
  }
  std::vector<int> free_cells;
  for (int c = 0; c < layout.size(); ++c) {
    if (mapping.cell_to_qubit[c] < 0) free_cells.push_back(c);
  }
  std::shuffle(free_cells.begin(), free_cells.end(), rng);
  size_t next = 0;
  for (int q = 0; q < protocol.num_qubits(); ++q) {
    if (mapping.qubit_to_cell[q] < 0) mapping.place(q, free_cells[next++]);
  }
  return mapping;
}

/// Per-cell activated/inactivated flags. The status is a property of the
/// held state, so a SWAP exchanges the two flags.
struct UsageTracker {
  std::vector<char> active;

  bool is_active(int cell) const { return active[cell] != 0; }
  void set(int cell, bool value) { active[cell] = value ? 1 : 0; }
  void swap_cells(int a, int b) { std::swap(active[a], active[b]); }
};

inline UsageTracker initial_usage(const MappingTable& mapping,
                                  const std::vector<char>& qubit_active) {
  UsageTracker tracker;
  tracker.active.assign(mapping.num_cells(), 0);
  for (int q = 0; q < mapping.num_qubits(); ++q) {
    if (qubit_active[q]) tracker.set(mapping.qubit_to_cell[q], true);
  }
  return tracker;
}

/// Forward status change: preparation activates, measurement inactivates.
/// The backward traversal applies the opposite rule.
inline void update_usage(UsageTracker& tracker, InstrKind kind, int cell,
                         Direction direction) {
  const bool forward = direction == Direction::forward;
  if (is_prep(kind)) {
    tracker.set(cell, forward);
  } else if (is_meas(kind)) {
    tracker.set(cell, !forward);
  }
}

/// Per-qubit statuses after running the whole protocol forward; these seed
/// the backward traversal.
inline std::vector<char> statuses_at_end(const Protocol& protocol) {
  std::vector<char> active(protocol.qubit_encoded.begin(),
                           protocol.qubit_encoded.end());
  for (const auto& instr : protocol.instructions) {
    if (is_prep(instr.kind)) {
      active[instr.q0] = 1;
    } else if (is_meas(instr.kind)) {
      active[instr.q0] = 0;
    }
  }
  return active;
}

struct SynthesisConfig {
  int code_distance = 3;
  int dd_budget_override = -1;  // negative: derive from the code distance
  int iterations = 1;
  std::uint64_t seed = 0;
  double time_limit_secs = 30.0;
  double lookahead_weight = 0.5;  // W
  double decay_factor = 1.001;    // delta
  int decay_reset_interval = 5;
  int extended_window = 20;

  int dd_budget() const {
    return dd_budget_override >= 0 ? dd_budget_override
                                   : (code_distance - 1) / 4;
  }
};

enum class SwapKind { nn, nd, dd };

struct SwapCandidate {
  int p0 = -1;  // p0 < p1
  int p1 = -1;
  SwapKind kind = SwapKind::nn;

  std::pair<int, int> pair() const { return {p0, p1}; }
};

inline SwapKind classify_pair(const UsageTracker& tracker, int a, int b) {
  const int actives = (tracker.is_active(a) ? 1 : 0) + (tracker.is_active(b) ? 1 : 0);
  return actives == 2 ? SwapKind::dd : (actives == 1 ? SwapKind::nd : SwapKind::nn);
}

/// Collects SWAP candidates around the cells the front layer acts on.
/// Data-data pairs are admitted only while the budget has headroom. For each
/// data-type neighbor of a frontier cell, that neighbor's own NN/ND pairs
/// are added as well, which relieves traffic jams of surrounding data-type
/// qubits.
inline std::vector<SwapCandidate> collect_swap_candidates(
    const std::vector<int>& frontier_cells, const UsageTracker& tracker,
    const QubitLayout& layout, int dd_used, int dd_budget) {
  std::set<std::pair<int, int>> pairs;
  auto add = [&](int a, int b, bool allow_dd) {
    const auto kind = classify_pair(tracker, a, b);
    if (kind == SwapKind::dd && !allow_dd) return;
    pairs.insert({std::min(a, b), std::max(a, b)});
  };
  const bool dd_ok = dd_used < dd_budget;
  for (int p : frontier_cells) {
    for (int nb : layout.neighbors(p)) {
      add(p, nb, dd_ok);
      if (tracker.is_active(nb)) {
        for (int nb2 : layout.neighbors(nb)) {
          if (nb2 == p) continue;
          add(nb, nb2, false);
        }
      }
    }
  }
  std::vector<SwapCandidate> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    out.push_back({a, b, classify_pair(tracker, a, b)});
  }
  return out;
}

/// A distance term of the cost function: either a 2-qubit gate (two logical
/// qubits) or a Move (one logical qubit against a fixed destination cell).
struct CostTerm {
  int qa = -1;
  int qb = -1;
  int dest_cell = -1;
};

/// Decayed lookahead cost of hypothetically applying a candidate: average
/// front-layer distance plus W times the average extended-window distance,
/// scaled by the candidate cells' decay.
inline double swap_cost(const SwapCandidate& cand,
                        const std::vector<CostTerm>& fl_terms,
                        const std::vector<CostTerm>& ext_terms,
                        const MappingTable& mapping, const DistanceMatrix& dist,
                        const std::vector<double>& decay, double lookahead_w) {
  auto cell_after = [&](int qubit) {
    const int cell = mapping.qubit_to_cell[qubit];
    if (cell == cand.p0) return cand.p1;
    if (cell == cand.p1) return cand.p0;
    return cell;
  };
  auto dest_after = [&](int cell) {
    // Destinations are fixed cells; the swap does not move them.
    return cell;
  };
  auto sum_terms = [&](const std::vector<CostTerm>& terms) {
    double sum = 0.0;
    for (const auto& term : terms) {
      const int ca = cell_after(term.qa);
      const int cb = term.qb >= 0 ? cell_after(term.qb) : dest_after(term.dest_cell);
      sum += dist(ca, cb);
    }
    return sum;
  };
  double cost = 0.0;
  if (!fl_terms.empty()) cost += sum_terms(fl_terms) / fl_terms.size();
  if (!ext_terms.empty() && lookahead_w > 0.0) {
    cost += lookahead_w * sum_terms(ext_terms) / ext_terms.size();
  }
  return std::max(decay[cand.p0], decay[cand.p1]) * cost;
}

/// Minimum-cost candidate; ties break to the lexicographically smallest
/// pair. Re-selecting the previous pair is rejected in favor of a uniformly
/// random NN/ND alternative; if no alternative exists the winner stands.
inline SwapCandidate select_swap(const std::vector<SwapCandidate>& candidates,
                                 const std::vector<double>& costs,
                                 std::optional<std::pair<int, int>> last_selected,
                                 std::mt19937_64& rng, int* repeat_overrides) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_swap: no candidates");
  }
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (costs[i] < costs[best] ||
        (costs[i] == costs[best] && candidates[i].pair() < candidates[best].pair())) {
      best = i;
    }
  }
  if (last_selected && candidates[best].pair() == *last_selected) {
    std::vector<size_t> alternatives;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].kind != SwapKind::dd &&
          candidates[i].pair() != *last_selected) {
        alternatives.push_back(i);
      }
    }
    if (!alternatives.empty()) {
      std::uniform_int_distribution<size_t> pick(0, alternatives.size() - 1);
      return candidates[alternatives[pick(rng)]];
    }
    if (repeat_overrides) ++(*repeat_overrides);
  }
  return candidates[best];
}

inline bool is_executable(const Instruction& instr, const MappingTable& mapping,
                          const QubitLayout& layout) {
  switch (instr.kind) {
    case InstrKind::CNOT:
    case InstrKind::SWAP:
      return layout.adjacent(mapping.qubit_to_cell[instr.q0],
                             mapping.qubit_to_cell[instr.q1]);
    case InstrKind::Move:
      if (instr.dest.kind != Destination::Kind::concrete) {
        throw std::logic_error("is_executable: unresolved move destination");
      }
      return mapping.qubit_to_cell[instr.q0] == instr.dest.cell;
    case InstrKind::Barrier:
      throw std::logic_error("is_executable: barriers are traversal control");
    default:
      return true;  // single-qubit gates act locally by definition
  }
}

enum class TraversalStatus { ok, timeout, jammed };

struct TraversalOutcome {
  TraversalStatus status = TraversalStatus::ok;
  std::vector<CircuitInstr> sequence;
  MappingTable final_mapping;
  int dd_swaps = 0;
  int partitions = 1;
  int repeat_overrides = 0;
};

namespace detail {

struct TraversalInput {
  const Protocol* protocol;
  Direction direction = Direction::forward;
  // Instruction list for this direction, with noop flags for Move nodes that
  // belong to the opposite direction's move-back.
  std::vector<Instruction> instrs;
  std::vector<char> noop_move;
  std::vector<char> qubit_active_at_start;
};

/// Builds the direction-local instruction list. Forward: the protocol as-is
/// with init destinations resolved against the traversal's input mapping.
/// Backward: the reversed protocol, whose original Move nodes become
/// satisfied roots, plus one trailing Move per pinned qubit so the traversal
/// hands the next pass a mapping that still honors every pin.
inline TraversalInput make_traversal_input(
    const Protocol& protocol, Direction direction, const MappingTable& input,
    const std::unordered_map<int, int>& anchors,
    const std::vector<std::pair<int, int>>& pinned) {
  TraversalInput in;
  in.protocol = &protocol;
  in.direction = direction;
  auto resolve = [&](Instruction instr) {
    if (instr.kind == InstrKind::Move) {
      switch (instr.dest.kind) {
        case Destination::Kind::init:
          instr.dest =
              Destination::concrete(input.qubit_to_cell[instr.dest.qubit]);
          break;
        case Destination::Kind::anchor: {
          auto it = anchors.find(instr.dest.qubit);
          if (it == anchors.end()) {
            throw std::invalid_argument("unresolvable anchor destination");
          }
          instr.dest = Destination::concrete(it->second);
          break;
        }
        case Destination::Kind::concrete:
          break;
        case Destination::Kind::none:
          throw std::invalid_argument("move without destination");
      }
    }
    return instr;
  };
  if (direction == Direction::forward) {
    for (const auto& instr : protocol.instructions) {
      in.instrs.push_back(resolve(instr));
      in.noop_move.push_back(0);
    }
    in.qubit_active_at_start.assign(protocol.qubit_encoded.begin(),
                                    protocol.qubit_encoded.end());
  } else {
    for (auto it = protocol.instructions.rbegin();
         it != protocol.instructions.rend(); ++it) {
      in.instrs.push_back(*it);
      // Forward move-back targets are meaningless against the reversed
      // program; they are treated as already satisfied.
      in.noop_move.push_back(it->kind == InstrKind::Move ? 1 : 0);
    }
    for (const auto& [qubit, cell] : pinned) {
      in.instrs.push_back(Instruction::move(qubit, Destination::concrete(cell)));
      in.noop_move.push_back(0);
    }
    in.qubit_active_at_start = statuses_at_end(protocol);
  }
  return in;
}

}  // namespace detail

/// One SABRE-style graph traversal: emits every DAG node, inserting SWAPs
/// chosen by the decayed lookahead cost, within the data-data budget. Moves
/// are positional constraints: satisfied Moves emit nothing, and a SWAP that
/// later displaces a satisfied Move's qubit forces that Move back into the
/// front layer.
inline TraversalOutcome traverse(const detail::TraversalInput& in,
                                 const QubitLayout& layout,
                                 const DistanceMatrix& dist,
                                 const SynthesisConfig& config,
                                 MappingTable mapping, std::mt19937_64& rng,
                                 int dd_budget) {
  TraversalOutcome out;
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(config.time_limit_secs));

  Protocol dag_protocol = *in.protocol;
  dag_protocol.instructions = in.instrs;
  // The instruction list is already direction-ordered.
  const Dag dag = build_dag(dag_protocol, Direction::forward);
  FrontLayer fl(dag);

  UsageTracker tracker = initial_usage(mapping, in.qubit_active_at_start);
  std::vector<double> decay(layout.size(), 1.0);
  int decay_rounds = 0;
  std::optional<std::pair<int, int>> last_swap;
  std::unordered_map<int, int> satisfied_move;  // qubit -> node id

  auto node_executable = [&](int id) {
    const auto& instr = dag.nodes[id].instr;
    if (instr.kind == InstrKind::Barrier) return false;
    if (instr.kind == InstrKind::Move && in.noop_move[id]) return true;
    return is_executable(instr, mapping, layout);
  };

  while (!fl.empty()) {
    if (std::chrono::steady_clock::now() > deadline) {
      out.status = TraversalStatus::timeout;
      return out;
    }
    if (fl.nodes().size() == 1 && dag.is_barrier(*fl.nodes().begin())) {
      fl.flush_barrier();
      continue;
    }

    std::vector<int> executable;
    for (int id : fl.nodes()) {
      if (node_executable(id)) executable.push_back(id);
    }

    if (!executable.empty()) {
      for (int id : executable) {
        const auto& instr = dag.nodes[id].instr;
        fl.pop_executed(id);
        if (instr.kind == InstrKind::Move) {
          if (!in.noop_move[id]) satisfied_move[instr.q0] = id;
          continue;  // a satisfied Move emits nothing
        }
        CircuitInstr ci;
        ci.kind = instr.kind;
        ci.q0 = instr.q0;
        ci.p0 = mapping.qubit_to_cell[instr.q0];
        if (instr.q1 >= 0) {
          ci.q1 = instr.q1;
          ci.p1 = mapping.qubit_to_cell[instr.q1];
        }
        ci.inserted = false;
        ci.partition = fl.partition();
        out.sequence.push_back(ci);
        if (instr.kind == InstrKind::SWAP) {
          // Protocol-native SWAP moves the held states and their statuses.
          mapping.apply_swap(ci.p0, ci.p1);
          tracker.swap_cells(ci.p0, ci.p1);
        }
        update_usage(tracker, instr.kind, ci.p0, in.direction);
      }
      continue;
    }

    // Nothing executable: route. Frontier cells come from the operands of
    // the blocked 2-qubit gates and from blocked Move sources.
    std::vector<int> frontier;
    for (int id : fl.nodes()) {
      const auto& instr = dag.nodes[id].instr;
      if (instr.kind == InstrKind::Move) {
        frontier.push_back(mapping.qubit_to_cell[instr.q0]);
      } else if (is_two_qubit(instr.kind)) {
        frontier.push_back(mapping.qubit_to_cell[instr.q0]);
        frontier.push_back(mapping.qubit_to_cell[instr.q1]);
      }
    }
    auto candidates = collect_swap_candidates(frontier, tracker, layout,
                                              out.dd_swaps, dd_budget);
    if (candidates.empty()) {
      out.status = TraversalStatus::jammed;
      return out;
    }

    std::vector<CostTerm> fl_terms;
    for (int id : fl.nodes()) {
      const auto& instr = dag.nodes[id].instr;
      if (instr.kind == InstrKind::Move) {
        fl_terms.push_back({instr.q0, -1, instr.dest.cell});
      } else if (is_two_qubit(instr.kind)) {
        fl_terms.push_back({instr.q0, instr.q1, -1});
      }
    }
    std::vector<CostTerm> ext_terms;
    if (config.extended_window > 0) {
      std::set<int> visited;
      std::vector<int> queue(fl.nodes().begin(), fl.nodes().end());
      size_t head = 0;
      while (head < queue.size() &&
             static_cast<int>(ext_terms.size()) < config.extended_window) {
        const int id = queue[head++];
        for (int succ : dag.nodes[id].succs) {
          if (!visited.insert(succ).second) continue;
          // The lookahead stops at partition boundaries: gates behind a
          // barrier must not steer the current partition's routing.
          if (dag.is_barrier(succ)) continue;
          const auto& instr = dag.nodes[succ].instr;
          if (instr.kind == InstrKind::Move && !in.noop_move[succ]) {
            ext_terms.push_back({instr.q0, -1, instr.dest.cell});
          } else if (is_two_qubit(instr.kind)) {
            ext_terms.push_back({instr.q0, instr.q1, -1});
          }
          if (static_cast<int>(ext_terms.size()) >= config.extended_window) break;
          queue.push_back(succ);
        }
      }
    }

    std::vector<double> costs;
    costs.reserve(candidates.size());
    for (const auto& cand : candidates) {
      costs.push_back(swap_cost(cand, fl_terms, ext_terms, mapping, dist, decay,
                                config.lookahead_weight));
    }
    const SwapCandidate chosen = select_swap(candidates, costs, last_swap, rng,
                                             &out.repeat_overrides);
    last_swap = chosen.pair();

    if (classify_pair(tracker, chosen.p0, chosen.p1) == SwapKind::dd) {
      ++out.dd_swaps;
    }
    CircuitInstr swap_instr;
    swap_instr.kind = InstrKind::SWAP;
    swap_instr.p0 = chosen.p0;
    swap_instr.p1 = chosen.p1;
    swap_instr.q0 = mapping.cell_to_qubit[chosen.p0];
    swap_instr.q1 = mapping.cell_to_qubit[chosen.p1];
    swap_instr.inserted = true;
    swap_instr.partition = fl.partition();
    out.sequence.push_back(swap_instr);
    mapping.apply_swap(chosen.p0, chosen.p1);
    tracker.swap_cells(chosen.p0, chosen.p1);

    decay[chosen.p0] += config.decay_factor - 1.0;
    decay[chosen.p1] += config.decay_factor - 1.0;
    if (++decay_rounds >= config.decay_reset_interval) {
      std::fill(decay.begin(), decay.end(), 1.0);
      decay_rounds = 0;
    }

    // Forcible re-insertion: a satisfied Move whose qubit was just displaced
    // goes back into the front layer.
    for (int cell : {chosen.p0, chosen.p1}) {
      const int qubit = mapping.cell_to_qubit[cell];
      if (qubit < 0) continue;
      auto it = satisfied_move.find(qubit);
      if (it == satisfied_move.end()) continue;
      const auto& move = dag.nodes[it->second].instr;
      if (mapping.qubit_to_cell[qubit] != move.dest.cell) {
        fl.reinsert(it->second);
        satisfied_move.erase(it);
      }
    }
  }

  out.final_mapping = std::move(mapping);
  out.partitions = fl.partition() + 1;
  return out;
}

/// Cancels consecutive identical self-inverse routing instructions on the
/// same cells within one partition, repeated to a fixpoint. Protocol
/// instructions are never removed so the circuit keeps the protocol's exact
/// instruction multiset.
inline std::vector<CircuitInstr> postprocess(std::vector<CircuitInstr> sequence) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> last_by_cell;
    int max_cell = -1;
    for (const auto& instr : sequence) {
      max_cell = std::max({max_cell, instr.p0, instr.p1});
    }
    last_by_cell.assign(max_cell + 1, -1);
    std::vector<char> removed(sequence.size(), 0);
    for (size_t i = 0; i < sequence.size(); ++i) {
      const auto& cur = sequence[i];
      const int prev0 = last_by_cell[cur.p0];
      const int prev1 = cur.two_cells() ? last_by_cell[cur.p1] : prev0;
      if (prev0 >= 0 && prev0 == prev1 && !removed[prev0]) {
        const auto& prev = sequence[prev0];
        const bool same_cells =
            cur.two_cells()
                ? (cur.kind == InstrKind::SWAP
                       ? std::minmax(prev.p0, prev.p1) == std::minmax(cur.p0, cur.p1)
                       : prev.p0 == cur.p0 && prev.p1 == cur.p1)
                : prev.p0 == cur.p0 && !prev.two_cells();
        if (same_cells && prev.kind == cur.kind && is_self_inverse(cur.kind) &&
            prev.inserted && cur.inserted && prev.partition == cur.partition) {
          removed[prev0] = 1;
          removed[i] = 1;
          changed = true;
        }
      }
      if (!removed[i]) {
        last_by_cell[cur.p0] = static_cast<int>(i);
        if (cur.two_cells()) last_by_cell[cur.p1] = static_cast<int>(i);
      }
    }
    if (changed) {
      std::vector<CircuitInstr> kept;
      kept.reserve(sequence.size());
      for (size_t i = 0; i < sequence.size(); ++i) {
        if (!removed[i]) kept.push_back(sequence[i]);
      }
      sequence = std::move(kept);
    }
  }
  return sequence;
}

struct SynthesisJob {
  Protocol protocol;  // move-back already injected
  QubitLayout layout;
  SynthesisConfig config;
  std::vector<std::pair<int, int>> pinned;  // qubit id -> cell
  std::unordered_map<int, int> anchors;     // anchor() referent -> cell
};

struct IterationResult {
  Circuit circuit;
  int dd_swaps = 0;
  std::uint64_t seed = 0;
  int iteration_index = -1;
  int failed_iterations = 0;
  int timed_out_iterations = 0;
  int repeat_overrides = 0;
};

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline int replay_dd_swaps(const std::vector<CircuitInstr>& sequence,
                           const Protocol& protocol, const MappingTable& initial) {
  std::vector<char> start(protocol.qubit_encoded.begin(),
                          protocol.qubit_encoded.end());
  UsageTracker tracker = initial_usage(initial, start);
  int dd = 0;
  for (const auto& instr : sequence) {
    if (instr.kind == InstrKind::SWAP) {
      if (instr.inserted &&
          classify_pair(tracker, instr.p0, instr.p1) == SwapKind::dd) {
        ++dd;
      }
      tracker.swap_cells(instr.p0, instr.p1);
    }
    update_usage(tracker, instr.kind, instr.p0, Direction::forward);
  }
  return dd;
}

inline Circuit assemble_circuit(const Protocol& protocol,
                                const QubitLayout& layout,
                                const MappingTable& initial,
                                const MappingTable& final_mapping,
                                const std::vector<CircuitInstr>& sequence,
                                int partitions) {
  Circuit circuit;
  circuit.name = protocol.name;
  circuit.layout = layout;
  circuit.qubit_names = protocol.qubit_names;
  circuit.initial_mapping = initial.qubit_to_cell;
  circuit.final_mapping = final_mapping.qubit_to_cell;
  circuit.data_qubits = protocol.data_qubits();
  for (const auto& instr : protocol.instructions) {
    if (instr.kind == InstrKind::Move) circuit.moveback_qubits.push_back(instr.q0);
  }
  std::sort(circuit.moveback_qubits.begin(), circuit.moveback_qubits.end());
  circuit.moveback_qubits.erase(
      std::unique(circuit.moveback_qubits.begin(), circuit.moveback_qubits.end()),
      circuit.moveback_qubits.end());
  for (const auto& reg : protocol.registers) {
    if (reg.encoded_input) circuit.encoded_registers.push_back(reg.name);
  }
  schedule_steps(circuit, sequence, partitions);
  return circuit;
}

}  // namespace detail

/// Full synthesis: per iteration a random initial mapping (pins first), a
/// forward, backward and forward traversal with the mapping handed along,
/// post-processing, then best-of selection by KQ, depth, then SWAP count.
/// Timed-out or jammed iterations contribute nothing.
inline IterationResult run_sabre(const SynthesisJob& job) {
  const auto dist = distance_matrix(job.layout);
  IterationResult best;
  bool have_best = false;
  int failed = 0;
  int timed_out = 0;
  std::string last_error = "no iterations ran";

  // The data-data budget is a property of the emitted circuit, so only the
  // final traversal enforces it; the two discarded warm-up traversals route
  // unconstrained.
  constexpr int kUnbounded = std::numeric_limits<int>::max();

  for (int it = 0; it < job.config.iterations; ++it) {
    const std::uint64_t seed = detail::splitmix64(job.config.seed + it);
    std::mt19937_64 rng(seed);
    MappingTable m0 = random_mapping(job.protocol, job.layout, job.pinned, rng);

    auto fwd1 = detail::make_traversal_input(job.protocol, Direction::forward,
                                             m0, job.anchors, job.pinned);
    auto t1 = traverse(fwd1, job.layout, dist, job.config, m0, rng, kUnbounded);
    if (t1.status != TraversalStatus::ok) {
      ++failed;
      timed_out += t1.status == TraversalStatus::timeout;
      last_error = t1.status == TraversalStatus::timeout ? "timeout" : "jammed";
      continue;
    }
    auto bwd = detail::make_traversal_input(job.protocol, Direction::backward,
                                            t1.final_mapping, job.anchors,
                                            job.pinned);
    auto t2 = traverse(bwd, job.layout, dist, job.config, t1.final_mapping, rng,
                       kUnbounded);
    if (t2.status != TraversalStatus::ok) {
      ++failed;
      timed_out += t2.status == TraversalStatus::timeout;
      last_error = t2.status == TraversalStatus::timeout ? "timeout" : "jammed";
      continue;
    }
    auto fwd2 = detail::make_traversal_input(job.protocol, Direction::forward,
                                             t2.final_mapping, job.anchors,
                                             job.pinned);
    auto t3 = traverse(fwd2, job.layout, dist, job.config, t2.final_mapping, rng,
                       job.config.dd_budget());
    if (t3.status != TraversalStatus::ok) {
      ++failed;
      timed_out += t3.status == TraversalStatus::timeout;
      last_error = t3.status == TraversalStatus::timeout ? "timeout" : "jammed";
      continue;
    }

    auto sequence = postprocess(t3.sequence);
    // Postprocessing removes swap pairs that compose to the identity, so the
    // final mapping is unchanged; the data-data count is recomputed.
    IterationResult result;
    result.circuit =
        detail::assemble_circuit(job.protocol, job.layout, t2.final_mapping,
                                 t3.final_mapping, sequence, t3.partitions);
    result.dd_swaps =
        detail::replay_dd_swaps(sequence, job.protocol, t2.final_mapping);
    result.seed = job.config.seed;
    result.iteration_index = it;
    result.repeat_overrides = t3.repeat_overrides;

    const auto& cur = result.circuit.analysis;
    const auto& b = best.circuit.analysis;
    const bool better =
        !have_best || cur.kq < b.kq ||
        (cur.kq == b.kq &&
         (cur.depth < b.depth ||
          (cur.depth == b.depth && cur.inserted_swaps < b.inserted_swaps)));
    if (better) {
      best = std::move(result);
      have_best = true;
    }
  }
  best.failed_iterations = failed;
  best.timed_out_iterations = timed_out;
  if (!have_best) {
    throw SynthesisError("synthesis failed for " + job.protocol.name + ": " +
                         last_error + " in all " +
                         std::to_string(job.config.iterations) + " iterations");
  }
  return best;
}

}  // namespace ftsynth
