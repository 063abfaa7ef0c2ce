#pragma once

#include <map>
#include <string>

namespace ftsynth {

/// KQ circuit-size metric: depth times qubit count.
inline long long compute_kq(long long depth, long long qubits) {
  return depth * qubits;
}

/// Depth and gate-count summary shared by protocols and synthesized circuits.
/// Moves never appear; barriers are tallied separately from the gate counts.
struct StaticAnalysis {
  int depth = 0;
  int qubits = 0;
  int barriers = 0;
  int inserted_swaps = 0;
  long long kq = 0;
  std::map<std::string, int> gate_counts;

  int count(const std::string& mnemonic) const {
    auto it = gate_counts.find(mnemonic);
    return it == gate_counts.end() ? 0 : it->second;
  }

  int total_gates() const {
    int total = 0;
    for (const auto& [_, c] : gate_counts) total += c;
    return total;
  }
};

}  // namespace ftsynth
