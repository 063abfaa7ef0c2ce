#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftsynth/ir.hpp"

namespace ftsynth {

enum class Direction { forward, backward };

struct DagNode {
  Instruction instr;
  int proto_index = -1;  // position in the (direction-ordered) instruction list
  std::vector<int> preds;
  std::vector<int> succs;
};

struct Dag {
  Direction direction = Direction::forward;
  std::vector<DagNode> nodes;
  std::vector<int> roots;

  bool is_barrier(int id) const {
    return nodes[id].instr.kind == InstrKind::Barrier;
  }
};

/// Builds the dependency DAG by per-qubit last-writer chaining. A barrier is
/// chained as if it touched every declared qubit, so it depends on all
/// earlier instructions and precedes all later ones. The backward DAG chains
/// the reversed instruction list.
inline Dag build_dag(const Protocol& protocol, Direction direction) {
  Dag dag;
  dag.direction = direction;
  std::vector<Instruction> instrs = protocol.instructions;
  if (direction == Direction::backward) {
    std::reverse(instrs.begin(), instrs.end());
  }
  const int n = static_cast<int>(instrs.size());
  dag.nodes.resize(n);
  std::vector<int> last(protocol.num_qubits(), -1);

  auto link = [&dag](int from, int to) {
    auto& succs = dag.nodes[from].succs;
    if (std::find(succs.begin(), succs.end(), to) == succs.end()) {
      succs.push_back(to);
      dag.nodes[to].preds.push_back(from);
    }
  };

  for (int i = 0; i < n; ++i) {
    dag.nodes[i].instr = instrs[i];
    dag.nodes[i].proto_index = i;
    if (instrs[i].kind == InstrKind::Barrier) {
      for (int q = 0; q < protocol.num_qubits(); ++q) {
        if (last[q] >= 0) link(last[q], i);
        last[q] = i;
      }
      continue;
    }
    for (int q : {instrs[i].q0, instrs[i].q1}) {
      if (q < 0) continue;
      if (last[q] >= 0) link(last[q], i);
      last[q] = i;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (dag.nodes[i].preds.empty()) dag.roots.push_back(i);
  }
  return dag;
}

inline std::string to_dot(const Dag& dag, const Protocol& protocol) {
  std::ostringstream out;
  out << "digraph dag {\n";
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& instr = dag.nodes[i].instr;
    out << "  n" << i << " [label=\"" << i << ": " << mnemonic(instr.kind);
    if (instr.q0 >= 0) out << " " << protocol.qubit_names[instr.q0];
    if (instr.q1 >= 0) out << "," << protocol.qubit_names[instr.q1];
    out << "\"];\n";
  }
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    for (int s : dag.nodes[i].succs) {
      out << "  n" << i << " -> n" << s << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

/// Traversal frontier over a Dag. Nodes whose predecessors are all emitted
/// sit in the front layer; while a barrier occupies the front layer, newly
/// ready nodes are parked in the holding list until the barrier is flushed.
class FrontLayer {
public:
  explicit FrontLayer(const Dag& dag)
      : dag_(&dag), emitted_(dag.nodes.size(), false) {
    for (size_t i = 0; i < dag.nodes.size(); ++i) {
      if (dag.nodes[i].preds.empty()) fl_.insert(static_cast<int>(i));
    }
  }

  const std::set<int>& nodes() const { return fl_; }
  const std::vector<int>& holding() const { return holding_; }
  bool empty() const { return fl_.empty(); }
  int partition() const { return partition_; }
  bool emitted(int id) const { return emitted_[id]; }

  int barrier_in_fl() const {
    for (int id : fl_) {
      if (dag_->is_barrier(id)) return id;
    }
    return -1;
  }

  /// Removes an emitted node and promotes any successor whose predecessors
  /// are all emitted (a barrier currently in the front layer counts as
  /// satisfied). Promotions land in the holding list while a barrier is
  /// present, otherwise in the front layer. Barrier successors are promoted
  /// first so a following barrier takes effect before its siblings.
  void pop_executed(int id) {
    if (fl_.erase(id) == 0) {
      throw std::logic_error("pop_executed: node not in front layer");
    }
    emitted_[id] = true;
    promote_ready_successors(id);
  }

  /// Retires the barrier once it is the only node left, releasing the
  /// holding list into the front layer and advancing the partition counter.
  void flush_barrier() {
    if (fl_.size() != 1 || !dag_->is_barrier(*fl_.begin())) {
      throw std::logic_error(
          "flush_barrier: front layer must contain only the barrier");
    }
    const int barrier = *fl_.begin();
    fl_.clear();
    emitted_[barrier] = true;
    ++partition_;
    promote_ready_successors(barrier);
    if (barrier_in_fl() < 0) {
      for (int id : holding_) fl_.insert(id);
      holding_.clear();
    }
  }

  /// Forcibly returns an already-emitted node to the front layer (used when a
  /// SWAP displaces a qubit whose Move was previously satisfied).
  void reinsert(int id) {
    if (!emitted_[id]) {
      throw std::logic_error("reinsert: node was never emitted");
    }
    emitted_[id] = false;
    fl_.insert(id);
  }

private:
  bool ready(int id) const {
    if (emitted_[id]) return false;
    const bool self_barrier = dag_->is_barrier(id);
    for (int p : dag_->nodes[id].preds) {
      if (emitted_[p]) continue;
      // A barrier sitting in the front layer satisfies its successors, which
      // is what parks them in the holding list. Barriers themselves wait for
      // a full flush of any preceding barrier.
      if (!self_barrier && dag_->is_barrier(p) && fl_.count(p) > 0) continue;
      return false;
    }
    return true;
  }

  void promote_ready_successors(int id) {
    std::vector<int> succs = dag_->nodes[id].succs;
    std::sort(succs.begin(), succs.end(), [this](int a, int b) {
      const bool ba = dag_->is_barrier(a);
      const bool bb = dag_->is_barrier(b);
      if (ba != bb) return ba;
      return a < b;
    });
    for (int s : succs) {
      if (!ready(s) || fl_.count(s) > 0) continue;
      if (std::find(holding_.begin(), holding_.end(), s) != holding_.end()) {
        continue;
      }
      if (barrier_in_fl() >= 0 && !dag_->is_barrier(s)) {
        holding_.push_back(s);
      } else {
        fl_.insert(s);
      }
    }
  }

  const Dag* dag_;
  std::set<int> fl_;
  std::vector<int> holding_;
  std::vector<char> emitted_;
  int partition_ = 0;
};

}  // namespace ftsynth
