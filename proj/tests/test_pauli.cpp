#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "synlearn/pauli.hpp"
#include "synlearn/rng.hpp"
#include "synlearn/wht.hpp"

using namespace synlearn;

namespace {

PauliOperator random_pauli(std::size_t n, CounterRng& rng) {
    PauliOperator p(n);
    for (std::size_t q = 0; q < n; ++q) {
        auto bits = rng.next_u64();
        p.set_x(q, bits & 1);
        p.set_z(q, bits & 2);
    }
    return p;
}

}  // namespace

TEST_CASE("single-qubit multiplication table") {
    auto X = PauliOperator::single(1, 0, 'X');
    auto Y = PauliOperator::single(1, 0, 'Y');
    auto Z = PauliOperator::single(1, 0, 'Z');
    CHECK(X * Z == Y);  // up to phase
    CHECK(X * Y == Z);
    CHECK(Y * Z == X);
    CHECK((X * X).is_identity());
    CHECK((Y * Y).is_identity());
}

TEST_CASE("two-qubit products") {
    auto a = PauliOperator::parse("XZ", 2);  // X1 Z2
    auto b = PauliOperator::parse("ZZ", 2);
    CHECK((a * b).to_string() == "YI");
}

TEST_CASE("involution on random operators") {
    CounterRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_pauli(40, rng);
        CHECK((p * p).is_identity());
    }
}

TEST_CASE("scalar commutator basics") {
    auto X1 = PauliOperator::parse("X", 1);
    auto Z1 = PauliOperator::parse("Z", 1);
    CHECK(scalar_commutator(X1, Z1) == -1);

    auto XX = PauliOperator::parse("XX", 2);
    auto ZZ = PauliOperator::parse("ZZ", 2);
    CHECK(scalar_commutator(XX, ZZ) == 1);

    auto Y1 = PauliOperator::parse("YI", 2);
    auto XZ = PauliOperator::parse("XZ", 2);
    CHECK(scalar_commutator(Y1, XZ) == -1);
}

TEST_CASE("symplectic bilinearity, exhaustive n<=3") {
    for (std::size_t n = 1; n <= 3; ++n) {
        std::size_t total = pow4(n);
        Support all;
        for (std::size_t q = 0; q < n; ++q) all.qubits.push_back(q);
        for (std::size_t ia = 0; ia < total; ++ia) {
            for (std::size_t ib = 0; ib < total; ++ib) {
                for (std::size_t ic = 0; ic < total; ++ic) {
                    auto a = embed(ia, all, n), b = embed(ib, all, n), c = embed(ic, all, n);
                    int lhs = binary_commutator(a * b, c);
                    int rhs = binary_commutator(a, c) ^ binary_commutator(b, c);
                    REQUIRE(lhs == rhs);
                }
            }
        }
    }
}

TEST_CASE("symplectic bilinearity, randomized n=64") {
    CounterRng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_pauli(64, rng), b = random_pauli(64, rng), c = random_pauli(64, rng);
        CHECK(binary_commutator(a * b, c) == (binary_commutator(a, c) ^ binary_commutator(b, c)));
    }
}

TEST_CASE("weight subadditivity") {
    CounterRng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_pauli(20, rng), b = random_pauli(20, rng);
        CHECK((a * b).weight() <= a.weight() + b.weight());
    }
}

TEST_CASE("embed and restrict") {
    auto p = embed(restrict_to(PauliOperator::parse("X", 1), Support{0}), Support{2}, 7);
    CHECK(p.to_string() == "IIXIIII");
    auto zz = PauliOperator::parse("ZZ", 2);
    CHECK(embed(restrict_to(zz, Support{0, 1}), Support{0, 3}, 4).to_string() == "ZIIZ");

    CounterRng rng(5);
    Support gamma{1, 4, 6};
    for (int trial = 0; trial < 50; ++trial) {
        LocalPauliIndex r = rng.next_u64() % pow4(3);
        auto embedded = embed(r, gamma, 8);
        CHECK(restrict_to(embedded, gamma) == r);
        CHECK(supported_on(embedded, gamma));
    }
}

TEST_CASE("tensor ordering is base-4 with leading digit on the first support qubit") {
    // rank of X (x) Z on {0,1} = 1*4 + 3.
    Support s{0, 1};
    CHECK(restrict_to(PauliOperator::parse("XZ", 2), s) == 7);
    CHECK(embed(7, s, 2).to_string() == "XZ");
    // Y on second support qubit only.
    CHECK(embed(2, Support{3, 5}, 6).to_string() == "IIIIIY");
}

TEST_CASE("string round trips") {
    auto p = PauliOperator::parse("IXYZ                ", 4);
    CHECK(p.to_string() == "IXYZ");
    CHECK(p.to_sparse_string() == "X2 Y3 Z4");
    CHECK(PauliOperator::parse("X2 Y3 Z4", 4) == p);
    CHECK(PauliOperator::parse(p.to_string(), 4) == p);
    CHECK(PauliOperator::parse("I", 9).is_identity());
    CHECK_THROWS(PauliOperator::parse("XX", 3));
    CHECK_THROWS(PauliOperator::parse("X9", 4));
}

TEST_CASE("walsh-hadamard first column and roundtrip") {
    std::vector<double> delta = {1, 0, 0, 0};
    walsh_hadamard(delta);
    CHECK(delta == std::vector<double>{1, 1, 1, 1});

    // Noiseless channel has all eigenvalues 1 at p=0.
    std::vector<double> noiseless = {1.0, 0.0, 0.0, 0.0};
    auto eig = walsh_hadamard_copy(noiseless);
    for (double v : eig) CHECK(v == doctest::Approx(1.0));

    CounterRng rng(19);
    for (std::size_t k = 1; k <= 3; ++k) {
        std::vector<double> v(pow4(k));
        for (auto& x : v) x = rng.next_uniform() - 0.5;
        auto round = inverse_walsh_hadamard_copy(walsh_hadamard_copy(v));
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(round[i] - v[i]) < 1e-12);
    }
}

TEST_CASE("walsh-hadamard rejects bad lengths") {
    std::vector<double> v(8, 0.0);
    CHECK_THROWS(walsh_hadamard(v));
    std::vector<double> big(pow4(5), 0.0);
    CHECK_THROWS(walsh_hadamard(big));       // beyond default k_max = 4
    CHECK_NOTHROW(walsh_hadamard(big, 5));   // configurable
}
