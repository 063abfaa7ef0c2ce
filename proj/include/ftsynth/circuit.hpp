#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftsynth/analysis.hpp"
#include "ftsynth/ir.hpp"
#include "ftsynth/layout.hpp"

namespace ftsynth {

/// One executed instruction. Cells are physical; q0/q1 are the logical
/// occupants at execution time (-1 when a dummy is involved). Instructions
/// inserted by routing carry inserted=true; everything else is protocol
/// provenance.
struct CircuitInstr {
  InstrKind kind = InstrKind::H;
  int p0 = -1;
  int p1 = -1;
  int q0 = -1;
  int q1 = -1;
  bool inserted = false;
  int partition = 0;

  bool two_cells() const { return p1 >= 0; }
};

/// Timestep-structured synthesized circuit together with both mappings and
/// the synthesis directives a validator needs (data qubits, move-back set,
/// encoded registers).
struct Circuit {
  std::string name;
  QubitLayout layout;
  std::vector<std::string> qubit_names;
  std::vector<int> initial_mapping;  // qubit id -> cell
  std::vector<int> final_mapping;
  std::vector<int> data_qubits;      // qubit ids
  std::vector<int> moveback_qubits;  // qubit ids
  std::vector<std::string> encoded_registers;
  std::vector<std::vector<CircuitInstr>> steps;
  std::vector<int> step_partition;
  int num_partitions = 1;
  StaticAnalysis analysis;

  int depth() const { return static_cast<int>(steps.size()); }

  std::vector<CircuitInstr> flattened() const {
    std::vector<CircuitInstr> out;
    for (const auto& step : steps) out.insert(out.end(), step.begin(), step.end());
    return out;
  }
};

/// Greedy ASAP packing of an emission-ordered instruction sequence into
/// timesteps: cells are disjoint within a step, per-cell program order is
/// kept, and no instruction is placed into a step of a different partition.
inline void schedule_steps(Circuit& circuit,
                           const std::vector<CircuitInstr>& sequence,
                           int num_partitions) {
  circuit.steps.clear();
  circuit.step_partition.clear();
  circuit.num_partitions = std::max(1, num_partitions);
  std::vector<int> busy(circuit.layout.size(), 0);
  int partition_floor = 0;
  int current_partition = 0;
  for (const auto& instr : sequence) {
    if (instr.partition != current_partition) {
      if (instr.partition < current_partition) {
        throw std::logic_error("schedule_steps: partition stamps regressed");
      }
      current_partition = instr.partition;
      partition_floor = static_cast<int>(circuit.steps.size());
    }
    int step = std::max(partition_floor, busy[instr.p0]);
    if (instr.two_cells()) step = std::max(step, busy[instr.p1]);
    while (static_cast<int>(circuit.steps.size()) <= step) {
      circuit.steps.emplace_back();
      circuit.step_partition.push_back(current_partition);
    }
    circuit.steps[step].push_back(instr);
    busy[instr.p0] = step + 1;
    if (instr.two_cells()) busy[instr.p1] = step + 1;
  }

  auto& a = circuit.analysis;
  a = StaticAnalysis{};
  a.depth = circuit.depth();
  a.qubits = circuit.layout.size();
  a.barriers = circuit.num_partitions - 1;
  for (const auto& step : circuit.steps) {
    for (const auto& instr : step) {
      if (instr.inserted) {
        ++a.inserted_swaps;
      } else {
        ++a.gate_counts[std::string(mnemonic(instr.kind))];
      }
    }
  }
  a.kq = compute_kq(a.depth, a.qubits);
}

namespace detail {

inline nlohmann::ordered_json mapping_to_json(
    const std::vector<std::string>& names, const std::vector<int>& mapping) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (size_t i = 0; i < names.size(); ++i) out[names[i]] = mapping[i];
  return out;
}

}  // namespace detail

/// Canonical JSON form. Key order is fixed, so emit(parse(emit(c))) is
/// byte-identical to emit(c).
inline std::string emit_json(const Circuit& circuit) {
  using json = nlohmann::ordered_json;
  json doc = json::object();
  doc["name"] = circuit.name;
  doc["layout"] = {{"rows", circuit.layout.rows}, {"cols", circuit.layout.cols}};
  doc["qubits"] = circuit.qubit_names;
  doc["initial_mapping"] =
      detail::mapping_to_json(circuit.qubit_names, circuit.initial_mapping);
  doc["final_mapping"] =
      detail::mapping_to_json(circuit.qubit_names, circuit.final_mapping);
  json data = json::array();
  for (int q : circuit.data_qubits) data.push_back(circuit.qubit_names[q]);
  doc["data_qubits"] = data;
  json moveback = json::array();
  for (int q : circuit.moveback_qubits) moveback.push_back(circuit.qubit_names[q]);
  doc["moveback"] = moveback;
  doc["encoded_registers"] = circuit.encoded_registers;
  doc["partitions"] = circuit.step_partition;
  json steps = json::array();
  for (const auto& step : circuit.steps) {
    json stepj = json::array();
    for (const auto& instr : step) {
      json ij = json::object();
      ij["op"] = std::string(mnemonic(instr.kind));
      json cells = json::array();
      cells.push_back(instr.p0);
      if (instr.two_cells()) cells.push_back(instr.p1);
      ij["qubits"] = cells;
      if (!instr.inserted) {
        json ops = json::array();
        ops.push_back(instr.q0 >= 0 ? circuit.qubit_names[instr.q0] : "");
        if (instr.two_cells()) {
          ops.push_back(instr.q1 >= 0 ? circuit.qubit_names[instr.q1] : "");
        }
        ij["operands"] = ops;
      }
      ij["inserted"] = instr.inserted;
      stepj.push_back(ij);
    }
    steps.push_back(stepj);
  }
  doc["steps"] = steps;
  json analysis = json::object();
  analysis["depth"] = circuit.analysis.depth;
  analysis["qubits"] = circuit.analysis.qubits;
  analysis["swaps"] = circuit.analysis.inserted_swaps;
  analysis["barriers"] = circuit.analysis.barriers;
  analysis["kq"] = circuit.analysis.kq;
  analysis["gates"] = circuit.analysis.gate_counts;
  doc["analysis"] = analysis;
  return doc.dump(2) + "\n";
}

inline Circuit parse_circuit_json(const std::string& text) {
  using json = nlohmann::ordered_json;
  const json doc = json::parse(text);
  Circuit circuit;
  circuit.name = doc.at("name").get<std::string>();
  circuit.layout = build_layout(doc.at("layout").at("rows").get<int>(),
                                doc.at("layout").at("cols").get<int>());
  circuit.qubit_names = doc.at("qubits").get<std::vector<std::string>>();
  auto name_id = [&circuit](const std::string& name) {
    auto it = std::find(circuit.qubit_names.begin(), circuit.qubit_names.end(), name);
    if (it == circuit.qubit_names.end()) {
      throw std::invalid_argument("circuit json references unknown qubit " + name);
    }
    return static_cast<int>(it - circuit.qubit_names.begin());
  };
  circuit.initial_mapping.assign(circuit.qubit_names.size(), -1);
  for (const auto& [name, cell] : doc.at("initial_mapping").items()) {
    circuit.initial_mapping[name_id(name)] = cell.get<int>();
  }
  circuit.final_mapping.assign(circuit.qubit_names.size(), -1);
  for (const auto& [name, cell] : doc.at("final_mapping").items()) {
    circuit.final_mapping[name_id(name)] = cell.get<int>();
  }
  for (const auto& name : doc.at("data_qubits")) {
    circuit.data_qubits.push_back(name_id(name.get<std::string>()));
  }
  for (const auto& name : doc.at("moveback")) {
    circuit.moveback_qubits.push_back(name_id(name.get<std::string>()));
  }
  circuit.encoded_registers =
      doc.at("encoded_registers").get<std::vector<std::string>>();
  circuit.step_partition = doc.at("partitions").get<std::vector<int>>();

  std::vector<CircuitInstr> flat;
  int step_index = 0;
  for (const auto& stepj : doc.at("steps")) {
    for (const auto& ij : stepj) {
      CircuitInstr instr;
      const std::string op = ij.at("op").get<std::string>();
      bool found = false;
      for (InstrKind k :
           {InstrKind::PrepZ, InstrKind::PrepX, InstrKind::MeasZ,
            InstrKind::MeasX, InstrKind::H, InstrKind::X, InstrKind::Z,
            InstrKind::S, InstrKind::Sdag, InstrKind::T, InstrKind::Tdag,
            InstrKind::CNOT, InstrKind::SWAP}) {
        if (mnemonic(k) == op) {
          instr.kind = k;
          found = true;
          break;
        }
      }
      if (!found) throw std::invalid_argument("circuit json has unknown op " + op);
      const auto& cells = ij.at("qubits");
      instr.p0 = cells.at(0).get<int>();
      if (cells.size() > 1) instr.p1 = cells.at(1).get<int>();
      instr.inserted = ij.at("inserted").get<bool>();
      if (!instr.inserted && ij.contains("operands")) {
        const auto& ops = ij.at("operands");
        const std::string o0 = ops.at(0).get<std::string>();
        instr.q0 = o0.empty() ? -1 : name_id(o0);
        if (ops.size() > 1) {
          const std::string o1 = ops.at(1).get<std::string>();
          instr.q1 = o1.empty() ? -1 : name_id(o1);
        }
      }
      instr.partition = circuit.step_partition.at(step_index);
      flat.push_back(instr);
    }
    ++step_index;
  }
  int partitions = 1;
  for (int p : circuit.step_partition) partitions = std::max(partitions, p + 1);
  schedule_steps(circuit, flat, partitions);
  return circuit;
}

}  // namespace ftsynth
