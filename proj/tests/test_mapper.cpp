#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <string>

#include "ftsynth/mapper.hpp"
#include "ftsynth/parse.hpp"

using namespace ftsynth;

namespace {

Protocol fixture(const std::string& name) {
  return load_protocol(std::string(FTSYNTH_FIXTURES_DIR) + "/" + name);
}

MappingTable identity_mapping(int qubits, int cells) {
  MappingTable m(qubits, cells);
  for (int q = 0; q < qubits; ++q) m.place(q, q);
  return m;
}

CircuitInstr swap_instr(int p0, int p1, bool inserted = true, int partition = 0) {
  CircuitInstr ci;
  ci.kind = InstrKind::SWAP;
  ci.p0 = p0;
  ci.p1 = p1;
  ci.inserted = inserted;
  ci.partition = partition;
  return ci;
}

}  // namespace

TEST_CASE("is_executable") {
  auto layout = build_layout(5, 7);
  auto p = parse_protocol("qreg q[2] role=data;\ncx q[0], q[1];\n");
  MappingTable m(2, layout.size());

  SECTION("adjacent CNOT") {
    m.place(0, 0);
    m.place(1, 1);
    CHECK(is_executable(p.instructions[0], m, layout));
  }
  SECTION("distant CNOT") {
    m.place(0, 0);
    m.place(1, 34);
    CHECK_FALSE(is_executable(p.instructions[0], m, layout));
  }
  SECTION("move is positional") {
    m.place(0, 3);
    m.place(1, 4);
    auto move = Instruction::move(0, Destination::concrete(3));
    CHECK(is_executable(move, m, layout));
    move.dest = Destination::concrete(5);
    CHECK_FALSE(is_executable(move, m, layout));
    move.dest = Destination::init(0);
    CHECK_THROWS_AS(is_executable(move, m, layout), std::logic_error);
  }
  SECTION("single-qubit gates always") {
    m.place(0, 0);
    m.place(1, 34);
    CHECK(is_executable(Instruction::gate1(InstrKind::H, 0), m, layout));
  }
}

TEST_CASE("update_usage direction rules") {
  UsageTracker tracker;
  tracker.active.assign(4, 0);

  update_usage(tracker, InstrKind::PrepZ, 0, Direction::forward);
  CHECK(tracker.is_active(0));
  update_usage(tracker, InstrKind::MeasZ, 0, Direction::forward);
  CHECK_FALSE(tracker.is_active(0));

  update_usage(tracker, InstrKind::MeasZ, 1, Direction::backward);
  CHECK(tracker.is_active(1));
  update_usage(tracker, InstrKind::PrepZ, 1, Direction::backward);
  CHECK_FALSE(tracker.is_active(1));

  update_usage(tracker, InstrKind::CNOT, 2, Direction::forward);
  CHECK_FALSE(tracker.is_active(2));  // gates do not toggle status
}

TEST_CASE("statuses travel with the state under SWAP") {
  UsageTracker tracker;
  tracker.active = {1, 0, 0};
  tracker.swap_cells(0, 1);
  CHECK_FALSE(tracker.is_active(0));
  CHECK(tracker.is_active(1));
}

TEST_CASE("collect_swap_candidates") {
  // 3x3 grid, centre cell 4.
  auto layout = build_layout(3, 3);
  UsageTracker tracker;
  tracker.active.assign(9, 0);

  SECTION("surrounded data qubit with zero budget") {
    // Centre and all four neighbors activated: no DD pair may appear, but the
    // neighbors' outward sides are offered (jam relief).
    for (int cell : {4, 1, 3, 5, 7}) tracker.set(cell, true);
    auto cands = collect_swap_candidates({4}, tracker, layout, 0, 0);
    REQUIRE_FALSE(cands.empty());
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : cands) {
      CHECK(c.kind != SwapKind::dd);
      CHECK(layout.adjacent(c.p0, c.p1));
      pairs.insert(c.pair());
    }
    // Outward moves of the blocking neighbors are present.
    CHECK(pairs.count({0, 1}) == 1);
    CHECK(pairs.count({1, 2}) == 1);
    CHECK(pairs.count({0, 3}) == 1);
    CHECK(pairs.count({5, 8}) == 1);
    // No pair touches two activated cells.
    CHECK(pairs.count({1, 4}) == 0);
    CHECK(pairs.count({3, 4}) == 0);
  }

  SECTION("isolated ND pair") {
    tracker.set(4, true);
    auto cands = collect_swap_candidates({4}, tracker, layout, 0, 0);
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : cands) pairs.insert(c.pair());
    CHECK(pairs == std::set<std::pair<int, int>>{{1, 4}, {3, 4}, {4, 5}, {4, 7}});
  }

  SECTION("DD pair admitted under budget") {
    tracker.set(4, true);
    tracker.set(1, true);
    auto with_budget = collect_swap_candidates({4}, tracker, layout, 0, 1);
    bool has_dd = false;
    for (const auto& c : with_budget) {
      has_dd |= c.pair() == std::make_pair(1, 4) && c.kind == SwapKind::dd;
    }
    CHECK(has_dd);

    auto spent = collect_swap_candidates({4}, tracker, layout, 1, 1);
    for (const auto& c : spent) CHECK(c.pair() != std::make_pair(1, 4));
  }
}

TEST_CASE("swap_cost hand examples") {
  std::vector<double> decay;

  SECTION("single CNOT on a 1x3 line") {
    auto layout = build_layout(1, 3);
    auto dist = distance_matrix(layout);
    auto m = identity_mapping(2, 3);
    m.apply_swap(1, 2);  // q0 at 0, q1 at 2
    decay.assign(3, 1.0);
    std::vector<CostTerm> fl = {{0, 1, -1}};
    CHECK(swap_cost({0, 1, SwapKind::nn}, fl, {}, m, dist, decay, 0.0) == 1.0);
    CHECK(swap_cost({1, 2, SwapKind::nn}, fl, {}, m, dist, decay, 0.0) == 1.0);
  }

  SECTION("move as a virtual gate against its destination") {
    auto layout = build_layout(1, 5);
    auto dist = distance_matrix(layout);
    MappingTable m(1, 5);
    m.place(0, 0);
    decay.assign(5, 1.0);
    std::vector<CostTerm> fl = {{0, -1, 4}};
    CHECK(swap_cost({0, 1, SwapKind::nd}, fl, {}, m, dist, decay, 0.0) == 3.0);
  }

  SECTION("decay scales the cost") {
    auto layout = build_layout(1, 3);
    auto dist = distance_matrix(layout);
    auto m = identity_mapping(2, 3);
    m.apply_swap(1, 2);
    decay = {1.0, 2.0, 1.0};
    std::vector<CostTerm> fl = {{0, 1, -1}};
    CHECK(swap_cost({0, 1, SwapKind::nn}, fl, {}, m, dist, decay, 0.0) == 2.0);
  }
}

TEST_CASE("select_swap") {
  std::mt19937_64 rng(1);
  std::vector<SwapCandidate> cands = {{0, 1, SwapKind::nn}, {1, 2, SwapKind::nd}};

  SECTION("argmin") {
    int overrides = 0;
    auto pick = select_swap(cands, {2.0, 3.0}, std::nullopt, rng, &overrides);
    CHECK(pick.pair() == std::make_pair(0, 1));
    CHECK(overrides == 0);
  }

  SECTION("repeat rejection takes an alternative") {
    for (int trial = 0; trial < 10; ++trial) {
      auto pick = select_swap(cands, {2.0, 3.0}, std::make_pair(0, 1), rng,
                              nullptr);
      CHECK(pick.pair() == std::make_pair(1, 2));
    }
  }

  SECTION("repeat rejection never picks a data-data alternative") {
    std::vector<SwapCandidate> with_dd = {{0, 1, SwapKind::nn},
                                          {1, 2, SwapKind::dd},
                                          {2, 3, SwapKind::nd}};
    for (int trial = 0; trial < 20; ++trial) {
      auto pick = select_swap(with_dd, {1.0, 2.0, 3.0}, std::make_pair(0, 1),
                              rng, nullptr);
      CHECK(pick.pair() == std::make_pair(2, 3));
    }
  }

  SECTION("no alternative: keep the winner, flag the override") {
    std::vector<SwapCandidate> lone = {{0, 1, SwapKind::nn}};
    int overrides = 0;
    auto pick = select_swap(lone, {1.0}, std::make_pair(0, 1), rng, &overrides);
    CHECK(pick.pair() == std::make_pair(0, 1));
    CHECK(overrides == 1);
  }

  SECTION("ties break to the smallest pair, deterministically") {
    auto a = select_swap(cands, {2.0, 2.0}, std::nullopt, rng, nullptr);
    auto b = select_swap(cands, {2.0, 2.0}, std::nullopt, rng, nullptr);
    CHECK(a.pair() == b.pair());
    CHECK(a.pair() == std::make_pair(0, 1));
  }
}

TEST_CASE("random_mapping honors pins and rejects conflicts") {
  auto p = parse_protocol("qreg q[3] role=data;\nh q[0];\n");
  auto layout = build_layout(2, 2);
  std::mt19937_64 rng(7);
  auto m = random_mapping(p, layout, {{0, 3}}, rng);
  CHECK(m.qubit_to_cell[0] == 3);
  CHECK(m.cell_to_qubit[3] == 0);
  std::set<int> cells(m.qubit_to_cell.begin(), m.qubit_to_cell.end());
  CHECK(cells.size() == 3);

  CHECK_THROWS_AS(random_mapping(p, layout, {{0, 3}, {1, 3}}, rng),
                  std::invalid_argument);
  auto big = parse_protocol("qreg q[9] role=data;\nh q[0];\n");
  CHECK_THROWS_AS(random_mapping(big, layout, {}, rng), std::invalid_argument);
}

TEST_CASE("traverse routes a distance-2 CNOT with exactly one SWAP") {
  auto p = parse_protocol("qreg q[2] role=data encoded;\ncx q[0], q[1];\n");
  auto layout = build_layout(1, 3);
  SynthesisConfig config;
  config.iterations = 1;
  config.dd_budget_override = 8;  // keep the line test about routing, not budget

  SynthesisJob job;
  job.protocol = p;
  job.layout = layout;
  job.config = config;
  job.pinned = {{0, 0}, {1, 2}};
  auto result = run_sabre(job);
  CHECK(result.circuit.analysis.inserted_swaps == 1);
  CHECK(result.circuit.analysis.count("cx") == 1);
}

TEST_CASE("pre-local protocol routes with zero SWAPs") {
  auto p = parse_protocol(
      "qreg q[4] role=data encoded;\ncx q[0], q[1];\ncx q[2], q[3];\n");
  auto layout = build_layout(2, 2);
  SynthesisJob job;
  job.protocol = p;
  job.layout = layout;
  job.config.iterations = 1;
  job.config.dd_budget_override = 99;
  job.pinned = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  auto result = run_sabre(job);
  CHECK(result.circuit.analysis.inserted_swaps == 0);
  CHECK(result.circuit.depth() == 1);
}

TEST_CASE("postprocess cancellation") {
  SECTION("back-to-back inserted swaps cancel") {
    auto out = postprocess({swap_instr(0, 1), swap_instr(0, 1)});
    CHECK(out.empty());
  }
  SECTION("intervening use blocks cancellation") {
    CircuitInstr h;
    h.kind = InstrKind::H;
    h.p0 = 0;
    auto out = postprocess({swap_instr(0, 1), h, swap_instr(0, 1)});
    CHECK(out.size() == 3);
  }
  SECTION("non-self-inverse pairs survive") {
    CircuitInstr t;
    t.kind = InstrKind::T;
    t.p0 = 0;
    auto out = postprocess({t, t});
    CHECK(out.size() == 2);
  }
  SECTION("protocol instructions are never removed") {
    auto out = postprocess({swap_instr(0, 1, false), swap_instr(0, 1, false)});
    CHECK(out.size() == 2);
  }
  SECTION("partition boundary blocks cancellation") {
    auto out = postprocess({swap_instr(0, 1, true, 0), swap_instr(0, 1, true, 1)});
    CHECK(out.size() == 2);
  }
  SECTION("cascades cancel to a fixpoint") {
    auto out = postprocess({swap_instr(0, 1), swap_instr(1, 2),
                            swap_instr(1, 2), swap_instr(0, 1)});
    CHECK(out.empty());
  }
}

TEST_CASE("run_sabre determinism and best-of selection") {
  auto p = fixture("steane_sm.qasm");
  std::vector<std::pair<int, Destination>> targets;
  for (int q : p.data_qubits()) targets.emplace_back(q, Destination::init(q));
  auto with_moves = inject_moveback(p, targets);

  SynthesisJob job;
  job.protocol = with_moves;
  job.layout = build_layout(5, 7);
  job.config.iterations = 2;
  job.config.seed = 11;
  job.config.code_distance = 3;

  auto a = run_sabre(job);
  auto b = run_sabre(job);
  CHECK(emit_json(a.circuit) == emit_json(b.circuit));
  CHECK(a.dd_swaps == 0);  // floor((3-1)/4) = 0

  // More iterations can only improve (or match) the best KQ.
  SynthesisJob more = job;
  more.config.iterations = 4;
  auto c = run_sabre(more);
  CHECK(c.circuit.analysis.kq <= a.circuit.analysis.kq);
}

TEST_CASE("run_sabre pins anchored qubits in the result's initial mapping") {
  auto p = fixture("steane_t.qasm");
  std::vector<std::pair<int, Destination>> targets;
  for (int q : p.data_qubits()) targets.emplace_back(q, Destination::init(q));

  SynthesisJob job;
  job.protocol = inject_moveback(p, targets);
  job.layout = build_layout(10, 7);
  job.config.iterations = 1;
  job.config.seed = 3;
  // Data block pinned to the top rows, magic block to the bottom rows.
  for (int i = 0; i < 7; ++i) {
    job.pinned.emplace_back(i, i);             // data[i]
    job.pinned.emplace_back(7 + i, 63 + i);    // magic[i]
  }
  auto result = run_sabre(job);
  for (int i = 0; i < 7; ++i) {
    CHECK(result.circuit.initial_mapping[i] == i);
    CHECK(result.circuit.initial_mapping[7 + i] == 63 + i);
    // Move-back applies to the data block only.
    CHECK(result.circuit.final_mapping[i] == i);
  }
}

TEST_CASE("iteration failures are reported, full failure throws") {
  // Full 2x2 grid of encoded data and a non-adjacent interaction: every swap
  // candidate is data-data and the budget is zero, so routing jams.
  auto p = parse_protocol("qreg q[4] role=data encoded;\ncx q[0], q[3];\n");
  SynthesisJob job;
  job.protocol = p;
  job.layout = build_layout(2, 2);
  job.config.iterations = 2;
  job.config.code_distance = 3;            // budget 0
  job.pinned = {{0, 0}, {3, 3}, {1, 1}, {2, 2}};  // interacting pair diagonal
  CHECK_THROWS_AS(run_sabre(job), SynthesisError);
}
