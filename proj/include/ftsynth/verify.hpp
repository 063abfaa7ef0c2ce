#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftsynth/circuit.hpp"
#include "ftsynth/ir.hpp"
#include "ftsynth/layout.hpp"

namespace ftsynth {

// The validator re-derives everything it checks from the circuit text alone:
// mapping evolution, usage statuses and partition structure are recomputed
// here rather than taken from the mapper's bookkeeping.

struct Violation {
  int step = -1;
  std::string detail;
};

struct CheckResult {
  enum class Status { pass, fail, skipped };
  Status status = Status::pass;
  std::vector<Violation> violations;

  bool ok() const { return status != Status::fail; }
  void fail(int step, std::string detail) {
    status = Status::fail;
    violations.push_back({step, std::move(detail)});
  }
};

struct ValidationReport {
  CheckResult locality;
  CheckResult dd_budget;
  CheckResult self_contained;
  CheckResult partition_order;
  CheckResult equivalence;
  CheckResult mapping_consistency;
  int dd_swaps = 0;
  int inserted_swaps = 0;

  bool all_pass() const {
    return locality.ok() && dd_budget.ok() && self_contained.ok() &&
           partition_order.ok() && equivalence.ok() && mapping_consistency.ok();
  }

  std::string to_json() const {
    using json = nlohmann::ordered_json;
    auto check = [](const CheckResult& c) {
      json out = json::object();
      out["status"] = c.status == CheckResult::Status::pass     ? "pass"
                      : c.status == CheckResult::Status::fail   ? "fail"
                                                                : "skipped";
      json vs = json::array();
      for (const auto& v : c.violations) {
        vs.push_back({{"step", v.step}, {"detail", v.detail}});
      }
      out["violations"] = vs;
      return out;
    };
    json doc = json::object();
    doc["checks"] = {{"locality", check(locality)},
                     {"dd_budget", check(dd_budget)},
                     {"self_contained", check(self_contained)},
                     {"partition_order", check(partition_order)},
                     {"equivalence", check(equivalence)},
                     {"mapping_consistency", check(mapping_consistency)}};
    doc["dd_swaps"] = dd_swaps;
    doc["inserted_swaps"] = inserted_swaps;
    doc["pass"] = all_pass();
    return doc.dump(2) + "\n";
  }
};

/// Applies every SWAP in step order as a transposition of the initial
/// mapping. Swaps touching dummy cells are legal.
inline std::vector<int> replay_permutation(const Circuit& circuit) {
  std::vector<int> cell_of(circuit.initial_mapping);
  std::vector<int> occupant(circuit.layout.size(), -1);
  for (size_t q = 0; q < cell_of.size(); ++q) {
    occupant[cell_of[q]] = static_cast<int>(q);
  }
  for (const auto& step : circuit.steps) {
    for (const auto& instr : step) {
      if (instr.kind != InstrKind::SWAP) continue;
      const int a = occupant[instr.p0];
      const int b = occupant[instr.p1];
      std::swap(occupant[instr.p0], occupant[instr.p1]);
      if (a >= 0) cell_of[a] = instr.p1;
      if (b >= 0) cell_of[b] = instr.p0;
    }
  }
  return cell_of;
}

/// True iff the data-qubit permutation of the circuit is the identity, i.e.
/// the circuit composes with itself. Skipped (nullopt) when the protocol
/// carries no move-back directive.
inline std::optional<bool> check_composition(const Circuit& circuit) {
  if (circuit.moveback_qubits.empty()) return std::nullopt;
  const auto final_cells = replay_permutation(circuit);
  for (int q : circuit.data_qubits) {
    if (final_cells[q] != circuit.initial_mapping[q]) return false;
  }
  return true;
}

/// Runs all six checks. `dd_budget` is the allowed number of inserted SWAPs
/// between activated cells. `expected_initial` optionally pins where named
/// qubits must sit in the initial mapping (anchored starts, magic-block
/// premises); violations count against mapping consistency.
inline ValidationReport validate(
    const Circuit& circuit, const Protocol& protocol, const QubitLayout& layout,
    int dd_budget,
    const std::map<std::string, int>& expected_initial = {}) {
  ValidationReport report;

  // --- locality: every 2-cell instruction acts on adjacent cells, and the
  // cells of one step are pairwise disjoint.
  for (size_t s = 0; s < circuit.steps.size(); ++s) {
    std::set<int> used;
    for (const auto& instr : circuit.steps[s]) {
      if (instr.two_cells() && !layout.adjacent(instr.p0, instr.p1)) {
        report.locality.fail(
            static_cast<int>(s),
            std::string(mnemonic(instr.kind)) + " on non-adjacent cells " +
                std::to_string(instr.p0) + "," + std::to_string(instr.p1));
      }
      for (int cell : {instr.p0, instr.p1}) {
        if (cell < 0) continue;
        if (!used.insert(cell).second) {
          report.locality.fail(static_cast<int>(s),
                               "cell " + std::to_string(cell) +
                                   " used twice in one step");
        }
      }
    }
  }

  // --- partition structure: per-step stamps are non-decreasing and within
  // range; the partition count matches the protocol's barrier count.
  int barriers = 0;
  for (const auto& instr : protocol.instructions) {
    barriers += instr.kind == InstrKind::Barrier;
  }
  if (circuit.num_partitions != barriers + 1) {
    report.partition_order.fail(
        -1, "circuit has " + std::to_string(circuit.num_partitions) +
                " partitions, protocol implies " + std::to_string(barriers + 1));
  }
  for (size_t s = 1; s < circuit.step_partition.size(); ++s) {
    if (circuit.step_partition[s] < circuit.step_partition[s - 1]) {
      report.partition_order.fail(static_cast<int>(s),
                                  "partition stamps regress");
    }
  }
  for (size_t s = 0; s < circuit.step_partition.size(); ++s) {
    if (circuit.step_partition[s] < 0 ||
        circuit.step_partition[s] >= circuit.num_partitions) {
      report.partition_order.fail(static_cast<int>(s),
                                  "partition stamp out of range");
    }
  }

  // Home partition of every protocol instruction.
  std::vector<int> proto_partition;
  {
    int current = 0;
    for (const auto& instr : protocol.instructions) {
      if (instr.kind == InstrKind::Barrier) {
        ++current;
        proto_partition.push_back(-1);
      } else {
        proto_partition.push_back(current);
      }
    }
  }

  // --- equivalence: replay the circuit, relabel protocol-provenance
  // instructions through the evolving mapping, and require per-qubit
  // protocol order, partition residency and multiset equality.
  {
    std::vector<int> occupant(layout.size(), -1);
    for (size_t q = 0; q < circuit.initial_mapping.size(); ++q) {
      occupant[circuit.initial_mapping[q]] = static_cast<int>(q);
    }
    struct Replayed {
      InstrKind kind;
      int q0, q1, partition, step;
    };
    std::vector<Replayed> replayed;
    for (size_t s = 0; s < circuit.steps.size(); ++s) {
      for (const auto& instr : circuit.steps[s]) {
        if (!instr.inserted) {
          const int q0 = occupant[instr.p0];
          const int q1 = instr.two_cells() ? occupant[instr.p1] : -1;
          if (q0 < 0 || (instr.two_cells() && q1 < 0)) {
            report.equivalence.fail(static_cast<int>(s),
                                    "protocol instruction acts on a dummy cell");
          } else {
            replayed.push_back({instr.kind, q0, q1,
                                circuit.step_partition[s], static_cast<int>(s)});
          }
        }
        if (instr.kind == InstrKind::SWAP) {
          std::swap(occupant[instr.p0], occupant[instr.p1]);
        }
      }
    }

    // Per-qubit order and partition residency against the protocol.
    std::vector<std::vector<int>> proto_by_qubit(protocol.num_qubits());
    for (size_t i = 0; i < protocol.instructions.size(); ++i) {
      const auto& instr = protocol.instructions[i];
      if (instr.kind == InstrKind::Barrier || instr.kind == InstrKind::Move) {
        continue;
      }
      proto_by_qubit[instr.q0].push_back(static_cast<int>(i));
      if (instr.q1 >= 0) proto_by_qubit[instr.q1].push_back(static_cast<int>(i));
    }
    std::vector<size_t> cursor(protocol.num_qubits(), 0);
    bool order_ok = true;
    for (const auto& r : replayed) {
      for (int q : {r.q0, r.q1}) {
        if (q < 0) continue;
        if (cursor[q] >= proto_by_qubit[q].size()) {
          report.equivalence.fail(r.step, "extra instruction on " +
                                              protocol.qubit_names[q]);
          order_ok = false;
          continue;
        }
        const auto& expect = protocol.instructions[proto_by_qubit[q][cursor[q]]];
        const bool match = expect.kind == r.kind && expect.q0 == r.q0 &&
                           expect.q1 == r.q1;
        if (!match) {
          report.equivalence.fail(
              r.step, "out-of-order instruction on " + protocol.qubit_names[q] +
                          ": got " + std::string(mnemonic(r.kind)));
          order_ok = false;
        } else if (proto_partition[proto_by_qubit[q][cursor[q]]] != r.partition) {
          report.equivalence.fail(
              r.step, std::string(mnemonic(r.kind)) + " on " +
                          protocol.qubit_names[q] + " emitted in partition " +
                          std::to_string(r.partition) + ", protocol expects " +
                          std::to_string(
                              proto_partition[proto_by_qubit[q][cursor[q]]]));
          order_ok = false;
        }
        if (cursor[q] < proto_by_qubit[q].size()) ++cursor[q];
      }
    }
    if (order_ok) {
      for (int q = 0; q < protocol.num_qubits(); ++q) {
        if (cursor[q] != proto_by_qubit[q].size()) {
          report.equivalence.fail(-1, "missing instructions on " +
                                          protocol.qubit_names[q]);
        }
      }
    }
  }

  // --- mapping consistency: the recorded final mapping equals the replayed
  // permutation.
  {
    const auto replayed = replay_permutation(circuit);
    for (size_t q = 0; q < replayed.size(); ++q) {
      if (replayed[q] != circuit.final_mapping[q]) {
        report.mapping_consistency.fail(
            -1, circuit.qubit_names[q] + " replays to cell " +
                    std::to_string(replayed[q]) + ", recorded " +
                    std::to_string(circuit.final_mapping[q]));
      }
    }
    for (const auto& [name, cell] : expected_initial) {
      const auto it = std::find(circuit.qubit_names.begin(),
                                circuit.qubit_names.end(), name);
      if (it == circuit.qubit_names.end()) {
        report.mapping_consistency.fail(-1, "expected qubit " + name +
                                                " not present in circuit");
        continue;
      }
      const auto q = it - circuit.qubit_names.begin();
      if (circuit.initial_mapping[q] != cell) {
        report.mapping_consistency.fail(
            -1, name + " starts at cell " +
                    std::to_string(circuit.initial_mapping[q]) +
                    ", precondition requires " + std::to_string(cell));
      }
    }
  }

  // --- data-data budget: recompute usage statuses from scratch and count
  // inserted SWAPs whose both cells were activated.
  {
    std::vector<char> active(layout.size(), 0);
    std::set<std::string> encoded(circuit.encoded_registers.begin(),
                                  circuit.encoded_registers.end());
    for (const auto& reg : protocol.registers) {
      if (!encoded.count(reg.name)) continue;
      for (int i = 0; i < reg.size; ++i) {
        active[circuit.initial_mapping[reg.first_id + i]] = 1;
      }
    }
    for (size_t s = 0; s < circuit.steps.size(); ++s) {
      for (const auto& instr : circuit.steps[s]) {
        if (instr.kind == InstrKind::SWAP) {
          if (instr.inserted) {
            ++report.inserted_swaps;
            if (active[instr.p0] && active[instr.p1]) {
              ++report.dd_swaps;
              if (report.dd_swaps > dd_budget) {
                report.dd_budget.fail(
                    static_cast<int>(s),
                    "data-data swap on cells " + std::to_string(instr.p0) + "," +
                        std::to_string(instr.p1) + " exceeds budget " +
                        std::to_string(dd_budget));
              }
            }
          }
          std::swap(active[instr.p0], active[instr.p1]);
        } else if (is_prep(instr.kind)) {
          active[instr.p0] = 1;
        } else if (is_meas(instr.kind)) {
          active[instr.p0] = 0;
        }
      }
    }
  }

  // --- self-containment: move-back qubits end where they started.
  if (circuit.moveback_qubits.empty()) {
    report.self_contained.status = CheckResult::Status::skipped;
  } else {
    const auto final_cells = replay_permutation(circuit);
    for (int q : circuit.moveback_qubits) {
      if (final_cells[q] != circuit.initial_mapping[q]) {
        report.self_contained.fail(
            -1, circuit.qubit_names[q] + " displaced to cell " +
                    std::to_string(final_cells[q]) + ", expected " +
                    std::to_string(circuit.initial_mapping[q]));
      }
    }
  }

  return report;
}

}  // namespace ftsynth
