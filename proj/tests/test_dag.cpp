#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "ftsynth/dag.hpp"
#include "ftsynth/parse.hpp"

using namespace ftsynth;

namespace {

Protocol fixture(const std::string& name) {
  return load_protocol(std::string(FTSYNTH_FIXTURES_DIR) + "/" + name);
}

// Pops everything in node-id order, ignoring executability; returns the pop
// sequence with per-node partition stamps.
std::vector<std::pair<int, int>> drain(const Dag& dag) {
  FrontLayer fl(dag);
  std::vector<std::pair<int, int>> order;
  while (!fl.empty()) {
    const int barrier = fl.barrier_in_fl();
    if (barrier >= 0 && fl.nodes().size() == 1) {
      order.emplace_back(barrier, fl.partition());
      fl.flush_barrier();
      continue;
    }
    int pick = -1;
    for (int id : fl.nodes()) {
      if (!dag.is_barrier(id)) {
        pick = id;
        break;
      }
    }
    REQUIRE(pick >= 0);
    order.emplace_back(pick, fl.partition());
    fl.pop_executed(pick);
  }
  return order;
}

}  // namespace

TEST_CASE("build_dag edges from shared qubits") {
  auto p = parse_protocol(
      "qreg q[4] role=data;\ncx q[0], q[1];\ncx q[1], q[2];\n");
  auto dag = build_dag(p, Direction::forward);
  REQUIRE(dag.nodes.size() == 2);
  CHECK(dag.nodes[0].succs == std::vector<int>{1});
  CHECK(dag.roots == std::vector<int>{0});

  auto disjoint = parse_protocol(
      "qreg q[4] role=data;\ncx q[0], q[1];\ncx q[2], q[3];\n");
  auto ddag = build_dag(disjoint, Direction::forward);
  CHECK(ddag.roots == std::vector<int>{0, 1});
  CHECK(ddag.nodes[0].succs.empty());
}

TEST_CASE("moves injected at the end are forward-DAG leaves") {
  auto p = parse_protocol(
      "qreg data[3] role=data encoded;\nqreg s[3] role=syndrome;\n"
      "prepz s[0]; prepz s[1]; prepz s[2];\n"
      "cx data[0], s[0]; cx data[1], s[1]; cx data[2], s[2];\n"
      "measz s[0]; measz s[1]; measz s[2];\n");
  std::vector<std::pair<int, Destination>> targets;
  for (int q = 0; q < 3; ++q) targets.emplace_back(q, Destination::init(q));
  auto with_moves = inject_moveback(p, targets);
  auto dag = build_dag(with_moves, Direction::forward);
  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    if (dag.nodes[i].instr.kind == InstrKind::Move) {
      CHECK(dag.nodes[i].succs.empty());
    }
  }
  // And they become roots of the backward DAG.
  auto bdag = build_dag(with_moves, Direction::backward);
  int move_roots = 0;
  for (int r : bdag.roots) {
    move_roots += bdag.nodes[r].instr.kind == InstrKind::Move;
  }
  CHECK(move_roots == 3);
}

TEST_CASE("barrier orders everything across it") {
  auto p = parse_protocol(
      "qreg q[4] role=data;\n"
      "cx q[0], q[1];\nh q[2];\nbarrier;\nh q[3];\ncx q[2], q[3];\n");
  auto dag = build_dag(p, Direction::forward);
  const int barrier = 2;
  REQUIRE(dag.is_barrier(barrier));
  // Everything before reaches the barrier, everything after is reached by it.
  CHECK(dag.nodes[barrier].preds.size() == 2);
  std::set<int> after(dag.nodes[barrier].succs.begin(),
                      dag.nodes[barrier].succs.end());
  CHECK(after.count(3) == 1);
  CHECK(after.count(4) == 1);
}

TEST_CASE("pop_executed promotion rules") {
  SECTION("chain promotion") {
    auto p = parse_protocol("qreg q[2] role=data;\nh q[0];\nx q[0];\n");
    auto dag = build_dag(p, Direction::forward);
    FrontLayer fl(dag);
    REQUIRE(fl.nodes() == std::set<int>{0});
    fl.pop_executed(0);
    CHECK(fl.nodes() == std::set<int>{1});
  }

  SECTION("diamond waits for both predecessors") {
    auto p = parse_protocol(
        "qreg q[2] role=data;\nh q[0];\nh q[1];\ncx q[0], q[1];\n");
    auto dag = build_dag(p, Direction::forward);
    FrontLayer fl(dag);
    fl.pop_executed(0);
    CHECK(fl.nodes() == std::set<int>{1});  // CNOT not promoted yet
    fl.pop_executed(1);
    CHECK(fl.nodes() == std::set<int>{2});
  }

  SECTION("successors ready behind an in-layer barrier go to the holding list") {
    auto p = parse_protocol(
        "qreg q[2] role=data;\nh q[0];\nbarrier;\nx q[0];\n");
    auto dag = build_dag(p, Direction::forward);
    FrontLayer fl(dag);
    fl.pop_executed(0);  // promotes the barrier into the front layer
    REQUIRE(fl.barrier_in_fl() == 1);
    CHECK(fl.nodes() == std::set<int>{1});

    // x q[0] was not promoted past the barrier.
    CHECK(fl.holding().empty());
    fl.flush_barrier();
    CHECK(fl.nodes() == std::set<int>{2});
    CHECK(fl.partition() == 1);
  }

  SECTION("popping a sibling while a barrier is in the layer holds promotions") {
    // Hand-built mid-traversal state: the barrier shares the layer with a
    // sibling whose successor becomes ready while the barrier is present.
    Dag dag;
    dag.nodes.resize(3);
    dag.nodes[0].instr = Instruction::gate1(InstrKind::H, 0);
    dag.nodes[1].instr = Instruction::barrier();
    dag.nodes[2].instr = Instruction::gate1(InstrKind::X, 0);
    dag.nodes[0].succs = {2};
    dag.nodes[2].preds = {0, 1};
    dag.nodes[1].succs = {2};
    dag.roots = {0, 1};

    FrontLayer fl(dag);
    REQUIRE(fl.nodes() == std::set<int>{0, 1});
    REQUIRE(fl.barrier_in_fl() == 1);
    fl.pop_executed(0);
    // Node 2 is ready modulo the in-layer barrier: parked, not promoted.
    CHECK(fl.holding() == std::vector<int>{2});
    CHECK(fl.nodes() == std::set<int>{1});
    fl.flush_barrier();
    CHECK(fl.nodes() == std::set<int>{2});
    CHECK(fl.holding().empty());
  }

  SECTION("pop of a node outside the layer throws") {
    auto p = parse_protocol("qreg q[1] role=data;\nh q[0];\nx q[0];\n");
    auto dag = build_dag(p, Direction::forward);
    FrontLayer fl(dag);
    CHECK_THROWS_AS(fl.pop_executed(1), std::logic_error);
  }
}

TEST_CASE("flush_barrier preconditions and end-of-protocol barrier") {
  auto p = parse_protocol("qreg q[2] role=data;\nh q[0];\nh q[1];\nbarrier;\n");
  auto dag = build_dag(p, Direction::forward);
  FrontLayer fl(dag);
  CHECK_THROWS_AS(fl.flush_barrier(), std::logic_error);  // non-barrier nodes
  fl.pop_executed(0);
  fl.pop_executed(1);
  REQUIRE(fl.nodes() == std::set<int>{2});
  fl.flush_barrier();
  CHECK(fl.empty());
  CHECK(fl.partition() == 1);
}

TEST_CASE("drained order is a topological order with contiguous partitions") {
  auto check_protocol = [](const Protocol& p) {
    auto dag = build_dag(p, Direction::forward);
    auto order = drain(dag);
    REQUIRE(order.size() == dag.nodes.size());
    std::vector<char> seen(dag.nodes.size(), 0);
    int max_partition = 0;
    std::vector<int> node_partition(dag.nodes.size(), 0);
    for (const auto& [id, partition] : order) {
      for (int pred : dag.nodes[id].preds) REQUIRE(seen[pred]);
      seen[id] = 1;
      REQUIRE(partition >= max_partition - 1);
      max_partition = std::max(max_partition, partition);
      node_partition[id] = partition;
    }
    // Instructions of partition k all pop before any of partition k+1.
    int barriers_before = 0;
    for (size_t i = 0; i < p.instructions.size(); ++i) {
      if (p.instructions[i].kind == InstrKind::Barrier) {
        ++barriers_before;
      } else {
        CHECK(node_partition[i] == barriers_before);
      }
    }
  };
  check_protocol(fixture("steane_sm.qasm"));
  check_protocol(fixture("steane_msp.qasm"));
}

TEST_CASE("forward DAG of a protocol equals backward DAG of its reverse") {
  auto p = fixture("steane_sm.qasm");
  Protocol reversed = p;
  std::reverse(reversed.instructions.begin(), reversed.instructions.end());
  auto fwd = build_dag(reversed, Direction::forward);
  auto bwd = build_dag(p, Direction::backward);
  REQUIRE(fwd.nodes.size() == bwd.nodes.size());
  for (size_t i = 0; i < fwd.nodes.size(); ++i) {
    auto fs = fwd.nodes[i].succs;
    auto bs = bwd.nodes[i].succs;
    std::sort(fs.begin(), fs.end());
    std::sort(bs.begin(), bs.end());
    CHECK(fs == bs);
    CHECK(fwd.nodes[i].instr == bwd.nodes[i].instr);
  }
}

TEST_CASE("static_analysis depth equals DAG longest path") {
  // Longest path over the forward DAG, gates weighing 1, barriers and moves 0.
  auto longest = [](const Protocol& p) {
    auto dag = build_dag(p, Direction::forward);
    std::vector<int> dist(dag.nodes.size(), 0);
    int best = 0;
    for (size_t i = 0; i < dag.nodes.size(); ++i) {  // ids are topo-ordered
      const auto kind = dag.nodes[i].instr.kind;
      const int weight =
          kind == InstrKind::Barrier || kind == InstrKind::Move ? 0 : 1;
      dist[i] += weight;
      best = std::max(best, dist[i]);
      for (int s : dag.nodes[i].succs) {
        dist[s] = std::max(dist[s], dist[i]);
      }
    }
    return best;
  };
  for (const auto* name : {"steane_sm.qasm", "steane_msp.qasm",
                           "steane_encoder.qasm", "golay_prep.qasm"}) {
    auto p = fixture(name);
    CHECK(static_analysis(p).depth == longest(p));
  }
}

TEST_CASE("to_dot emits nodes and edges") {
  auto p = parse_protocol("qreg q[2] role=data;\nh q[0];\ncx q[0], q[1];\n");
  auto dag = build_dag(p, Direction::forward);
  auto dot = to_dot(dag, p);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("n0 -> n1") != std::string::npos);
}
