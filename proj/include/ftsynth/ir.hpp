#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftsynth/analysis.hpp"

namespace ftsynth {

enum class InstrKind {
  PrepZ,
  PrepX,
  MeasZ,
  MeasX,
  H,
  X,
  Z,
  S,
  Sdag,
  T,
  Tdag,
  CNOT,
  SWAP,
  Barrier,
  Move,
};

inline std::string_view mnemonic(InstrKind k) {
  switch (k) {
    case InstrKind::PrepZ: return "prepz";
    case InstrKind::PrepX: return "prepx";
    case InstrKind::MeasZ: return "measz";
    case InstrKind::MeasX: return "measx";
    case InstrKind::H: return "h";
    case InstrKind::X: return "x";
    case InstrKind::Z: return "z";
    case InstrKind::S: return "s";
    case InstrKind::Sdag: return "sdg";
    case InstrKind::T: return "t";
    case InstrKind::Tdag: return "tdg";
    case InstrKind::CNOT: return "cx";
    case InstrKind::SWAP: return "swap";
    case InstrKind::Barrier: return "barrier";
    case InstrKind::Move: return "move";
  }
  return "?";
}

inline bool is_two_qubit(InstrKind k) {
  return k == InstrKind::CNOT || k == InstrKind::SWAP;
}

inline bool is_prep(InstrKind k) {
  return k == InstrKind::PrepZ || k == InstrKind::PrepX;
}

inline bool is_meas(InstrKind k) {
  return k == InstrKind::MeasZ || k == InstrKind::MeasX;
}

inline bool is_self_inverse(InstrKind k) {
  switch (k) {
    case InstrKind::H:
    case InstrKind::X:
    case InstrKind::Z:
    case InstrKind::CNOT:
    case InstrKind::SWAP:
      return true;
    default:
      return false;
  }
}

enum class Role { data, ancilla, checkup, magic, dummy };

inline std::string_view role_name(Role r) {
  switch (r) {
    case Role::data: return "data";
    case Role::ancilla: return "ancilla";
    case Role::checkup: return "checkup";
    case Role::magic: return "magic";
    case Role::dummy: return "dummy";
  }
  return "?";
}

/// Destination of a Move. Symbolic forms name another qubit: `init` targets
/// that qubit's position at the start of the synthesis run, `anchor` targets
/// its cell in a previously fixed logical-qubit configuration.
struct Destination {
  enum class Kind { none, concrete, init, anchor };
  Kind kind = Kind::none;
  int cell = -1;   // concrete only
  int qubit = -1;  // init/anchor referent

  static Destination concrete(int cell) { return {Kind::concrete, cell, -1}; }
  static Destination init(int qubit) { return {Kind::init, -1, qubit}; }
  static Destination anchor(int qubit) { return {Kind::anchor, -1, qubit}; }

  friend bool operator==(const Destination&, const Destination&) = default;
};

/// One protocol statement. Operands are dense qubit ids; q1 is -1 for
/// single-qubit gates and both are -1 for barriers. Measurements implicitly
/// produce a classical bit named after the measured qubit.
struct Instruction {
  InstrKind kind = InstrKind::H;
  int q0 = -1;
  int q1 = -1;
  Destination dest;

  static Instruction gate1(InstrKind k, int q) { return {k, q, -1, {}}; }
  static Instruction gate2(InstrKind k, int a, int b) { return {k, a, b, {}}; }
  static Instruction barrier() { return {InstrKind::Barrier, -1, -1, {}}; }
  static Instruction move(int q, Destination d) {
    return {InstrKind::Move, q, -1, d};
  }

  int arity() const { return kind == InstrKind::Barrier ? 0 : (q1 >= 0 ? 2 : 1); }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Register {
  std::string name;
  int size = 0;
  Role role = Role::ancilla;
  bool encoded_input = false;  // arrives holding significant state
  int first_id = 0;
};

/// A parsed protocol: named registers with roles, an ordered instruction
/// list, and the code distance the synthesis budget derives from.
struct Protocol {
  std::string name;
  int code_distance = 1;
  std::vector<Register> registers;
  std::vector<std::string> qubit_names;
  std::vector<Role> qubit_roles;
  std::vector<bool> qubit_encoded;
  std::vector<Instruction> instructions;

  int num_qubits() const { return static_cast<int>(qubit_names.size()); }

  int find_qubit(std::string_view name) const {
    for (int i = 0; i < num_qubits(); ++i) {
      if (qubit_names[i] == name) return i;
    }
    return -1;
  }

  std::vector<int> qubits_with_role(Role r) const {
    std::vector<int> out;
    for (int i = 0; i < num_qubits(); ++i) {
      if (qubit_roles[i] == r) out.push_back(i);
    }
    return out;
  }

  std::vector<int> data_qubits() const { return qubits_with_role(Role::data); }

  int add_register(const std::string& name, int size, Role role,
                   bool encoded_input) {
    for (const auto& r : registers) {
      if (r.name == name) {
        throw std::invalid_argument("duplicate register '" + name + "'");
      }
    }
    const int first = num_qubits();
    registers.push_back({name, size, role, encoded_input, first});
    for (int i = 0; i < size; ++i) {
      qubit_names.push_back(name + "[" + std::to_string(i) + "]");
      qubit_roles.push_back(role);
      qubit_encoded.push_back(encoded_input);
    }
    return first;
  }
};

/// Appends one Move per (qubit, destination) target after the last existing
/// instruction, in ascending qubit order. No existing instruction is touched.
inline Protocol inject_moveback(
    Protocol protocol, const std::vector<std::pair<int, Destination>>& targets) {
  auto sorted = targets;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [qubit, dest] : sorted) {
    if (qubit < 0 || qubit >= protocol.num_qubits()) {
      throw std::invalid_argument("moveback target names an undeclared qubit");
    }
    if (dest.kind == Destination::Kind::none) {
      throw std::invalid_argument("moveback target has no destination");
    }
    protocol.instructions.push_back(Instruction::move(qubit, dest));
  }
  return protocol;
}

/// Rewrites every symbolic Move destination to a concrete cell index.
/// `initial_cells[q]` resolves init(q); `anchors` resolves anchor(q).
inline Protocol resolve_destinations(
    Protocol protocol, const std::vector<int>& initial_cells,
    const std::unordered_map<int, int>& anchors) {
  for (auto& instr : protocol.instructions) {
    if (instr.kind != InstrKind::Move) continue;
    switch (instr.dest.kind) {
      case Destination::Kind::concrete:
        break;
      case Destination::Kind::init: {
        const int q = instr.dest.qubit;
        if (q < 0 || q >= static_cast<int>(initial_cells.size()) ||
            initial_cells[q] < 0) {
          throw std::invalid_argument("unresolvable init destination for " +
                                      protocol.qubit_names[instr.q0]);
        }
        instr.dest = Destination::concrete(initial_cells[q]);
        break;
      }
      case Destination::Kind::anchor: {
        auto it = anchors.find(instr.dest.qubit);
        if (it == anchors.end()) {
          throw std::invalid_argument("unresolvable anchor destination for " +
                                      protocol.qubit_names[instr.q0]);
        }
        instr.dest = Destination::concrete(it->second);
        break;
      }
      case Destination::Kind::none:
        throw std::invalid_argument("move without destination");
    }
  }
  return protocol;
}

/// Per-kind gate counts plus the ideal depth: the longest dependency chain
/// under per-qubit ordering, with barriers acting as zero-cost global syncs.
inline StaticAnalysis static_analysis(const Protocol& protocol) {
  StaticAnalysis out;
  out.qubits = protocol.num_qubits();
  std::vector<int> level(protocol.num_qubits(), 0);
  int floor = 0;
  for (const auto& instr : protocol.instructions) {
    if (instr.kind == InstrKind::Barrier) {
      ++out.barriers;
      for (int lv : level) floor = std::max(floor, lv);
      continue;
    }
    if (instr.kind == InstrKind::Move) continue;
    ++out.gate_counts[std::string(mnemonic(instr.kind))];
    int start = floor;
    start = std::max(start, level[instr.q0]);
    if (instr.q1 >= 0) start = std::max(start, level[instr.q1]);
    level[instr.q0] = start + 1;
    if (instr.q1 >= 0) level[instr.q1] = start + 1;
  }
  for (int lv : level) out.depth = std::max(out.depth, lv);
  out.kq = compute_kq(out.depth, out.qubits);
  return out;
}

}  // namespace ftsynth
