#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "synlearn/circuit.hpp"
#include "synlearn/rng.hpp"

using namespace synlearn;

TEST_CASE("single-gate conjugations") {
    CliffordCircuit c;
    c.n = 2;
    c.layers.push_back({Location::gate1(GateKind::H, 0)});
    c.layers.push_back({Location::gate2(GateKind::CNOT, 0, 1)});
    c.fill_idle();
    for (std::size_t q = 0; q < 2; ++q) c.initial_stabilizers.push_back(PauliOperator::single(2, q, 'Z'));

    CHECK(propagate(PauliOperator::parse("XI", 2), 0, 1, c).to_string() == "ZI");
    CHECK(propagate(PauliOperator::parse("XI", 2), 1, 2, c).to_string() == "XX");
    CHECK(propagate(PauliOperator::parse("ZI", 2), 1, 2, c).to_string() == "ZI");
    CHECK(propagate(PauliOperator::parse("IZ", 2), 1, 2, c).to_string() == "ZZ");
    // backward through the same layers
    CHECK(propagate(PauliOperator::parse("ZI", 2), 1, 0, c).to_string() == "XI");
    CHECK_THROWS(propagate(PauliOperator::parse("XI", 2), 0, 5, c));
}

TEST_CASE("propagation roundtrip on random circuits") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto c = random_clifford_circuit(5, 20, 100 + seed, 0.1);
        CounterRng rng(seed);
        for (int trial = 0; trial < 20; ++trial) {
            PauliOperator p(5);
            for (std::size_t q = 0; q < 5; ++q) {
                auto b = rng.next_u64();
                p.set_x(q, b & 1);
                p.set_z(q, b & 2);
            }
            auto forward = propagate(p, 0, c.depth(), c);
            CHECK(propagate(forward, c.depth(), 0, c) == p);
        }
    }
}

TEST_CASE("no measurements means no checks") {
    CliffordCircuit c;
    c.n = 2;
    c.initial_stabilizers = {PauliOperator::parse("ZI", 2), PauliOperator::parse("IZ", 2)};
    c.layers.push_back({Location::gate1(GateKind::H, 0), Location::gate1(GateKind::S, 1)});
    c.fill_idle();
    auto ps = build_parity_structure(c);
    CHECK(ps.o_perp.empty());
    CHECK(ps.k_logical.empty());
}

TEST_CASE("single-qubit prepare-and-measure pairs with the initial stabilizer") {
    CliffordCircuit c;
    c.n = 1;
    c.initial_stabilizers = {PauliOperator::single(1, 0, 'Z')};
    c.layers.push_back({Location::measure(PauliOperator::single(1, 0, 'Z'))});
    auto ps = build_parity_structure(c);
    REQUIRE(ps.o_perp.size() == 1);
    CHECK(ps.o_perp[0].get(0));  // initial stabilizer slot
    CHECK(ps.o_perp[0].get(1));  // the measurement slot
    CHECK(ps.k_logical.empty());
}

TEST_CASE("repetition EC parity structure localizes round pairs") {
    auto c = repetition_ec_circuit(3);
    auto ps = build_parity_structure(c);
    const std::size_t s0 = ps.num_initial;
    REQUIRE(s0 == 3);
    REQUIRE(ps.o_perp.size() == 3);  // one check per round
    // Round 1 pairs with the initial X1X2 and ancilla X slots.
    CHECK(ps.o_perp[0].get(s0 + 0));
    CHECK(ps.o_perp[0].get(0));
    CHECK(ps.o_perp[0].get(2));
    // Round 2 pairs with the initial ancilla slot only.
    CHECK(ps.o_perp[1].get(s0 + 1));
    CHECK(ps.o_perp[1].get(2));
    CHECK(!ps.o_perp[1].get(0));
    // Round 3 pairs with round 1: parity constraint on the first and third results.
    CHECK(ps.o_perp[2].get(s0 + 2));
    CHECK(ps.o_perp[2].get(s0 + 0));
    CHECK(!ps.o_perp[2].get(2));
}

TEST_CASE("noiseless shots satisfy all checks, repetition") {
    auto c = repetition_ec_circuit(4);
    auto ps = build_parity_structure(c);
    for (std::uint64_t shot = 0; shot < 200; ++shot) {
        auto o = simulate_shot(c, 11, shot);
        for (std::size_t i = 0; i < ps.o_perp.size(); ++i) CHECK(ps.detector_value(i, o) == 0);
    }
}

TEST_CASE("measuring the logical Z emits a logical index vector") {
    CliffordCircuit c;
    c.n = 3;
    c.initial_stabilizers = {PauliOperator::parse("XXI", 3), PauliOperator::parse("IXX", 3)};
    c.initial_logical_x = {PauliOperator::parse("XII", 3)};
    c.initial_logical_z = {PauliOperator::parse("ZZZ", 3)};
    c.layers.push_back({Location::measure(PauliOperator::parse("ZZZ", 3))});
    c.fill_idle();
    auto ps = build_parity_structure(c);
    CHECK(ps.o_perp.empty());
    REQUIRE(ps.k_logical.size() == 1);
    // Input is the logical |0>; the frame-corrected outcome is deterministic 0.
    for (std::uint64_t shot = 0; shot < 50; ++shot) {
        auto o = simulate_shot(c, 3, shot);
        CHECK(ps.logical_value(0, o) == 0);
    }
}

TEST_CASE("surface EC circuit has 8r+4 checks and one measured logical") {
    for (std::size_t rounds : {1u, 2u, 3u}) {
        auto c = surface_ec_circuit(3, rounds);
        c.validate();
        auto ps = build_parity_structure(c);
        CHECK(ps.o_perp.size() == 8 * rounds + 4);
        CHECK(ps.k_logical.size() == 1);
        // All checks deterministic on noiseless shots.
        for (std::uint64_t shot = 0; shot < 20; ++shot) {
            auto o = simulate_shot(c, 7, shot);
            for (std::size_t i = 0; i < ps.o_perp.size(); ++i) CHECK(ps.detector_value(i, o) == 0);
            CHECK(ps.logical_value(0, o) == 0);
        }
    }
}

TEST_CASE("surface circuit shape") {
    auto c = surface_ec_circuit(3, 2);
    CHECK(c.n == 17);
    CHECK(c.depth() == 7 * 2 + 1);
    CHECK(c.num_measurements() == 8 * 2 + 9);
    // every layer covers all qubits after fill_idle
    for (const auto& layer : c.layers) {
        std::size_t covered = 0;
        for (const auto& loc : layer) covered += loc.qubits.size();
        CHECK(covered == c.n);
    }
}

TEST_CASE("random circuits: noiseless checks always pass and K_L has full rank") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto c = random_clifford_circuit(5 + seed % 2, 8, 500 + seed);
        auto ps = build_parity_structure(c);
        for (std::uint64_t shot = 0; shot < 100; ++shot) {
            auto o = simulate_shot(c, seed, shot);
            for (std::size_t i = 0; i < ps.o_perp.size(); ++i) CHECK(ps.detector_value(i, o) == 0);
        }
        if (!ps.k_logical.empty()) {
            Gf2Matrix m(ps.operators.size());
            for (const auto& ul : ps.k_logical) m.append_row(ul);
            CHECK(m.rank() == ps.k_logical.size());
        }
    }
}

TEST_CASE("prepare-zero mid-circuit resets the qubit") {
    // |0>, H (random), reset, then measure Z: the measurement is deterministic 0.
    CliffordCircuit c;
    c.n = 1;
    c.initial_stabilizers = {PauliOperator::single(1, 0, 'Z')};
    c.layers.push_back({Location::gate1(GateKind::H, 0)});
    c.layers.push_back({Location::prepare_zero(0)});
    c.layers.push_back({Location::measure(PauliOperator::single(1, 0, 'Z'))});
    for (std::uint64_t shot = 0; shot < 50; ++shot) {
        auto o = simulate_shot(c, 21, shot);
        REQUIRE(o.size() == 1);
        CHECK(o[0] == 0);
    }
    auto ps = build_parity_structure(c);
    REQUIRE(ps.o_perp.size() == 1);  // the final measurement is deterministic
    CHECK(ps.o_perp[0].get(1));
    CHECK(!ps.o_perp[0].get(0));  // pinned by the reset, not the initial state
}

TEST_CASE("deterministic outcomes are reproducible and random ones seed-dependent") {
    auto c = repetition_ec_circuit(2);
    auto a = simulate_shot(c, 5, 0);
    auto b = simulate_shot(c, 5, 0);
    CHECK(a == b);
}

TEST_CASE("circuit json round trip") {
    auto c = surface_ec_circuit(3, 1);
    auto text = c.to_json();
    auto loaded = CliffordCircuit::from_json(text);
    CHECK(loaded.n == c.n);
    CHECK(loaded.depth() == c.depth());
    CHECK(loaded.num_measurements() == c.num_measurements());
    auto ps1 = build_parity_structure(c);
    auto ps2 = build_parity_structure(loaded);
    CHECK(ps1.o_perp.size() == ps2.o_perp.size());
    for (std::size_t i = 0; i < ps1.o_perp.size(); ++i) CHECK(ps1.o_perp[i] == ps2.o_perp[i]);
}

TEST_CASE("layer collision is rejected") {
    CliffordCircuit c;
    c.n = 2;
    c.initial_stabilizers = {PauliOperator::parse("ZI", 2), PauliOperator::parse("IZ", 2)};
    c.layers.push_back({Location::gate1(GateKind::H, 0), Location::gate1(GateKind::S, 0)});
    CHECK_THROWS(c.validate());
}
