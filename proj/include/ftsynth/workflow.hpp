#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ftsynth/ir.hpp"
#include "ftsynth/layout.hpp"
#include "ftsynth/mapper.hpp"

namespace ftsynth {

/// The shared arrangement of data qubits inside one m x n block, fixed by
/// the pivot synthesis and anchored by every other protocol. Entries are
/// ordered by data-qubit index.
struct LogicalQubitConfig {
  std::vector<std::pair<std::string, int>> anchors;

  int cell_of_index(size_t i) const { return anchors.at(i).second; }

  int find(const std::string& name) const {
    for (const auto& [n, cell] : anchors) {
      if (n == name) return cell;
    }
    return -1;
  }

  std::string to_json() const {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [name, cell] : anchors) doc[name] = cell;
    return doc.dump(2) + "\n";
  }

  static LogicalQubitConfig from_json(const std::string& text) {
    LogicalQubitConfig config;
    for (const auto& [name, cell] : nlohmann::ordered_json::parse(text).items()) {
      config.anchors.emplace_back(name, cell.get<int>());
    }
    return config;
  }
};

enum class MovebackStyle { none, init, anchor };

struct ProtocolDirectives {
  MovebackStyle moveback = MovebackStyle::none;
  bool anchored_start = false;
};

inline std::vector<std::pair<int, Destination>> moveback_targets(
    const Protocol& protocol, MovebackStyle style) {
  std::vector<std::pair<int, Destination>> targets;
  if (style == MovebackStyle::none) return targets;
  for (int q : protocol.data_qubits()) {
    targets.emplace_back(q, style == MovebackStyle::init
                                ? Destination::init(q)
                                : Destination::anchor(q));
  }
  return targets;
}

struct PivotResults {
  IterationResult sm;
  IterationResult msp;
  LogicalQubitConfig config;
  std::vector<std::pair<std::string, int>> msp_final;  // magic-state block cells
};

/// Pivot pass: the syndrome measurement is synthesized unconstrained and its
/// initial mapping's data positions become the logical-qubit configuration;
/// the magic-state preparation is synthesized without move-back and its final
/// mapping is recorded for the T gate.
inline PivotResults synthesize_pivots(const Protocol& sm, const Protocol& msp,
                                      const QubitLayout& layout,
                                      const SynthesisConfig& config) {
  PivotResults out;

  SynthesisJob sm_job;
  sm_job.protocol = inject_moveback(sm, moveback_targets(sm, MovebackStyle::init));
  sm_job.layout = layout;
  sm_job.config = config;
  out.sm = run_sabre(sm_job);
  for (int q : sm.data_qubits()) {
    out.config.anchors.emplace_back(sm.qubit_names[q],
                                    out.sm.circuit.initial_mapping[q]);
  }

  SynthesisJob msp_job;
  msp_job.protocol = msp;
  msp_job.layout = layout;
  msp_job.config = config;
  out.msp = run_sabre(msp_job);
  for (int q : msp.data_qubits()) {
    out.msp_final.emplace_back(msp.qubit_names[q],
                               out.msp.circuit.final_mapping[q]);
  }
  return out;
}

/// Synthesizes a non-pivot protocol against the pivot-derived anchors.
/// Anchored starts pin the data qubits in every iteration's initial mapping;
/// anchor-style move-back steers them to the configuration cells regardless
/// of where they started.
inline IterationResult synthesize_nonpivot(const Protocol& protocol,
                                           const LogicalQubitConfig& anchors,
                                           const QubitLayout& layout,
                                           const SynthesisConfig& config,
                                           const ProtocolDirectives& directives) {
  SynthesisJob job;
  job.layout = layout;
  job.config = config;
  for (const auto& [name, cell] : anchors.anchors) {
    const int q = protocol.find_qubit(name);
    if (q >= 0) job.anchors[q] = cell;
  }
  if (directives.anchored_start) {
    for (int q : protocol.data_qubits()) {
      auto it = job.anchors.find(q);
      if (it == job.anchors.end()) {
        throw std::invalid_argument("no anchor for data qubit " +
                                    protocol.qubit_names[q]);
      }
      job.pinned.emplace_back(q, it->second);
    }
  }
  job.protocol =
      inject_moveback(protocol, moveback_targets(protocol, directives.moveback));
  return run_sabre(job);
}

/// Relative arrangement of the two logical blocks on the extended layout:
/// v_ns places the first block north, h_ew places it east, and so on.
enum class Arrangement { v_ns, v_sn, h_ew, h_we };

inline std::string_view arrangement_name(Arrangement a) {
  switch (a) {
    case Arrangement::v_ns: return "v_ns";
    case Arrangement::v_sn: return "v_sn";
    case Arrangement::h_ew: return "h_ew";
    case Arrangement::h_we: return "h_we";
  }
  return "?";
}

inline Arrangement parse_arrangement(std::string_view name) {
  if (name == "v_ns") return Arrangement::v_ns;
  if (name == "v_sn") return Arrangement::v_sn;
  if (name == "h_ew") return Arrangement::h_ew;
  if (name == "h_we") return Arrangement::h_we;
  throw std::invalid_argument("unknown arrangement '" + std::string(name) +
                              "' (expected v_ns, v_sn, h_ew or h_we)");
}

inline Arrangement mirrored(Arrangement a) {
  switch (a) {
    case Arrangement::v_ns: return Arrangement::v_sn;
    case Arrangement::v_sn: return Arrangement::v_ns;
    case Arrangement::h_ew: return Arrangement::h_we;
    case Arrangement::h_we: return Arrangement::h_ew;
  }
  return a;
}

struct TwoQubitPlan {
  QubitLayout ext;
  ExtensionPlan plan;
  bool first_is_block0 = true;

  const std::vector<int>& first_map() const {
    return first_is_block0 ? plan.block0 : plan.block1;
  }
  const std::vector<int>& second_map() const {
    return first_is_block0 ? plan.block1 : plan.block0;
  }
};

/// Doubles the base layout for a 2-qubit logical gate. Vertically, block 0
/// is north; horizontally, block 0 is west.
inline TwoQubitPlan plan_two_qubit(const QubitLayout& base, Arrangement a) {
  TwoQubitPlan out;
  const bool vertical = a == Arrangement::v_ns || a == Arrangement::v_sn;
  auto [ext, plan] = extend_layout(
      base, vertical ? ExtendDirection::vertical : ExtendDirection::horizontal);
  out.ext = ext;
  out.plan = std::move(plan);
  out.first_is_block0 = a == Arrangement::v_ns || a == Arrangement::h_we;
  return out;
}

namespace detail {

/// The two equally sized data blocks of a 2-qubit gate protocol, paired by
/// index (declaration order).
inline std::pair<const Register*, const Register*> data_block_pair(
    const Protocol& protocol) {
  const Register* first = nullptr;
  const Register* second = nullptr;
  for (const auto& reg : protocol.registers) {
    if (reg.role != Role::data) continue;
    if (!first) {
      first = &reg;
    } else if (!second) {
      second = &reg;
    } else {
      throw std::invalid_argument("expected exactly two data blocks");
    }
  }
  if (!first || !second || first->size != second->size) {
    throw std::invalid_argument(
        "2-qubit gate protocol needs two equally sized data blocks");
  }
  return {first, second};
}

}  // namespace detail

/// Transversal-CNOT synthesis on the extended layout. Both blocks start (and
/// end) at the anchor configuration relabeled into their halves.
inline IterationResult synthesize_cnot(const Protocol& protocol,
                                       const LogicalQubitConfig& anchors,
                                       const QubitLayout& base,
                                       const SynthesisConfig& config,
                                       Arrangement arrangement) {
  const TwoQubitPlan plan = plan_two_qubit(base, arrangement);
  const auto [ctrl, tgt] = detail::data_block_pair(protocol);
  if (static_cast<size_t>(ctrl->size) != anchors.anchors.size()) {
    throw std::invalid_argument("anchor count does not match block size");
  }
  SynthesisJob job;
  job.layout = plan.ext;
  job.config = config;
  for (int i = 0; i < ctrl->size; ++i) {
    const int cell = anchors.cell_of_index(i);
    job.pinned.emplace_back(ctrl->first_id + i, plan.first_map()[cell]);
    job.pinned.emplace_back(tgt->first_id + i, plan.second_map()[cell]);
  }
  job.protocol =
      inject_moveback(protocol, moveback_targets(protocol, MovebackStyle::init));
  return run_sabre(job);
}

/// Derives the mirrored arrangement's circuit from a synthesized CNOT: the
/// two blocks exchange their cells and every protocol CNOT flips direction;
/// inserted SWAPs are reused unchanged.
inline Circuit mirror_cnot(const Circuit& circuit, const Protocol& protocol) {
  const auto [ctrl, tgt] = detail::data_block_pair(protocol);
  std::vector<int> exchange(circuit.qubit_names.size());
  for (size_t q = 0; q < exchange.size(); ++q) exchange[q] = static_cast<int>(q);
  for (int i = 0; i < ctrl->size; ++i) {
    exchange[ctrl->first_id + i] = tgt->first_id + i;
    exchange[tgt->first_id + i] = ctrl->first_id + i;
  }
  Circuit out = circuit;
  for (size_t q = 0; q < exchange.size(); ++q) {
    out.initial_mapping[q] = circuit.initial_mapping[exchange[q]];
    out.final_mapping[q] = circuit.final_mapping[exchange[q]];
  }
  std::vector<CircuitInstr> sequence;
  for (const auto& step : circuit.steps) {
    for (CircuitInstr instr : step) {
      if (!instr.inserted && instr.kind == InstrKind::CNOT) {
        std::swap(instr.p0, instr.p1);
      } else if (instr.inserted) {
        instr.q0 = instr.q0 >= 0 ? exchange[instr.q0] : -1;
        instr.q1 = instr.q1 >= 0 ? exchange[instr.q1] : -1;
      }
      sequence.push_back(instr);
    }
  }
  schedule_steps(out, sequence, circuit.num_partitions);
  return out;
}

/// T-gate synthesis as a single complex gate: the data block starts at (and
/// returns to) the anchors; the magic block starts exactly where the
/// magic-state preparation left it, relabeled into the extension, and is not
/// moved back.
inline IterationResult synthesize_t_gate(
    const Protocol& protocol, const LogicalQubitConfig& data_anchors,
    const std::vector<std::pair<std::string, int>>& magic_final_mapping,
    const QubitLayout& base, const SynthesisConfig& config,
    Arrangement arrangement) {
  const TwoQubitPlan plan = plan_two_qubit(base, arrangement);
  const Register* data = nullptr;
  const Register* magic = nullptr;
  for (const auto& reg : protocol.registers) {
    if (reg.role == Role::data) data = &reg;
    if (reg.role == Role::magic) magic = &reg;
  }
  if (!data || !magic || data->size != magic->size) {
    throw std::invalid_argument(
        "T protocol needs matching data and magic blocks");
  }
  if (static_cast<size_t>(data->size) != data_anchors.anchors.size() ||
      magic_final_mapping.size() != data_anchors.anchors.size()) {
    throw std::invalid_argument("anchor count does not match block size");
  }
  SynthesisJob job;
  job.layout = plan.ext;
  job.config = config;
  for (int i = 0; i < data->size; ++i) {
    job.pinned.emplace_back(data->first_id + i,
                            plan.first_map()[data_anchors.cell_of_index(i)]);
    job.pinned.emplace_back(magic->first_id + i,
                            plan.second_map()[magic_final_mapping[i].second]);
  }
  job.protocol =
      inject_moveback(protocol, moveback_targets(protocol, MovebackStyle::init));
  return run_sabre(job);
}

struct GolayResult {
  IterationResult prep;
  IterationResult verification;
  IterationResult sm;
  LogicalQubitConfig block_config;  // final mapping of the non-FT preparation
  QubitLayout prep_layout;
  QubitLayout verification_layout;
  QubitLayout sm_layout;
  ExtensionPlan vertical_plan;    // base -> 2m x n
  ExtensionPlan horizontal_plan;  // 2m x n -> 2m x 2n
};

/// Divide-and-conquer pipeline: the non-FT preparation fixes the block
/// configuration on m x n; verification runs on 2m x 2n seeded with four
/// relabeled copies of that configuration and moves only the surviving
/// block's data back; the syndrome measurement runs on 2m x n with the data
/// and logical-ancilla blocks stacked and a one-noisy-SWAP budget.
inline GolayResult golay_pipeline(const Protocol& prep, const Protocol& verif,
                                  const Protocol& sm, const QubitLayout& base,
                                  const SynthesisConfig& config) {
  GolayResult out;
  out.prep_layout = base;

  SynthesisConfig stage1 = config;
  stage1.dd_budget_override = 0;
  SynthesisJob prep_job;
  prep_job.protocol = prep;
  prep_job.layout = base;
  prep_job.config = stage1;
  out.prep = run_sabre(prep_job);
  const auto block_qubits = prep.data_qubits();
  for (int q : block_qubits) {
    out.block_config.anchors.emplace_back(prep.qubit_names[q],
                                          out.prep.circuit.final_mapping[q]);
  }
  const int block_size = static_cast<int>(block_qubits.size());

  auto [ext_v, plan_v] = extend_layout(base, ExtendDirection::vertical);
  auto [ext_vh, plan_h] = extend_layout(ext_v, ExtendDirection::horizontal);
  out.vertical_plan = plan_v;
  out.horizontal_plan = plan_h;
  out.verification_layout = ext_vh;
  out.sm_layout = ext_v;

  // Quadrants in row-major order: (north, west), (north, east),
  // (south, west), (south, east).
  auto quadrant_cell = [&](int quadrant, int base_cell) {
    const auto& v = (quadrant / 2 == 0) ? plan_v.block0 : plan_v.block1;
    const auto& h = (quadrant % 2 == 0) ? plan_h.block0 : plan_h.block1;
    return h[v[base_cell]];
  };

  if (static_cast<int>(verif.registers.size()) != 4) {
    throw std::invalid_argument(
        "verification protocol must declare exactly 4 block registers");
  }
  SynthesisConfig stage2 = config;
  stage2.dd_budget_override = 0;
  SynthesisJob verif_job;
  verif_job.layout = ext_vh;
  verif_job.config = stage2;
  for (int k = 0; k < 4; ++k) {
    const auto& reg = verif.registers[k];
    if (reg.size != block_size) {
      throw std::invalid_argument("verification block " + reg.name +
                                  " does not match the preparation block size");
    }
    for (int i = 0; i < reg.size; ++i) {
      verif_job.pinned.emplace_back(
          reg.first_id + i, quadrant_cell(k, out.block_config.cell_of_index(i)));
    }
  }
  verif_job.protocol =
      inject_moveback(verif, moveback_targets(verif, MovebackStyle::init));
  out.verification = run_sabre(verif_job);

  SynthesisConfig stage3 = config;  // budget follows the code distance
  SynthesisJob sm_job;
  sm_job.layout = ext_v;
  sm_job.config = stage3;
  const Register* data_reg = nullptr;
  const Register* anc_reg = nullptr;
  for (const auto& reg : sm.registers) {
    if (reg.role == Role::data && !data_reg) {
      data_reg = &reg;
    } else if (!anc_reg) {
      anc_reg = &reg;
    }
  }
  if (!data_reg || !anc_reg || data_reg->size != block_size ||
      anc_reg->size != block_size) {
    throw std::invalid_argument(
        "syndrome measurement needs data and ancilla blocks of the "
        "preparation block size");
  }
  for (int i = 0; i < block_size; ++i) {
    const int cell = out.block_config.cell_of_index(i);
    sm_job.pinned.emplace_back(data_reg->first_id + i, plan_v.block0[cell]);
    sm_job.pinned.emplace_back(anc_reg->first_id + i, plan_v.block1[cell]);
  }
  sm_job.protocol = inject_moveback(sm, moveback_targets(sm, MovebackStyle::init));
  out.sm = run_sabre(sm_job);

  return out;
}

}  // namespace ftsynth
