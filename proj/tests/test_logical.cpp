#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "synlearn/code.hpp"
#include "synlearn/logical.hpp"
#include "synlearn/rng.hpp"

using namespace synlearn;

namespace {

SignatureMap five_qubit_signatures(const NoiseModel& model) {
    auto code = named_code("five_qubit");
    std::vector<PauliOperator> logicals = {code.logical_x[0], code.logical_z[0]};
    return SignatureMap(code.measured_gens, logicals, model);
}

NoiseModel model_from_log_mu(const NoiseModel& base, const std::vector<double>& log_mu) {
    std::vector<LocalChannel> chans = base.channels();
    std::size_t flat = 0;
    for (auto& ch : chans) {
        const std::size_t m = ch.probs.size();
        std::vector<double> lambda(m, 1.0);
        for (std::size_t k = 1; k < m; ++k) {
            double acc = 0.0;
            for (std::size_t e = 1; e < m; ++e)
                if (binary_commutator(base.error_pauli(flat + k - 1), base.error_pauli(flat + e - 1)))
                    acc += log_mu[flat + e - 1];
            lambda[k] = std::exp(acc);
        }
        ch.probs = inverse_walsh_hadamard_copy(lambda);
        flat += m - 1;
    }
    return NoiseModel(base.num_qubits(), std::move(chans));
}

}  // namespace

TEST_CASE("signatures compose by XOR") {
    auto model = gaussian_single_qubit_model(5, 1e-3, 2e-4, 1);
    auto sig = five_qubit_signatures(model);
    CHECK(sig.of_pauli(PauliOperator(5)) == LogicalSignature{});
    CounterRng rng(3);
    for (int t = 0; t < 50; ++t) {
        PauliOperator a(5), b(5);
        for (std::size_t q = 0; q < 5; ++q) {
            auto bits = rng.next_u64();
            a.set_x(q, bits & 1);
            a.set_z(q, bits & 2);
            b.set_x(q, bits & 4);
            b.set_z(q, bits & 8);
        }
        auto sa = sig.of_pauli(a), sb = sig.of_pauli(b), sab = sig.of_pauli(a * b);
        CHECK(sab.syndrome == (sa.syndrome ^ sb.syndrome));
        CHECK(sab.logical == (sa.logical ^ sb.logical));
    }
}

TEST_CASE("noiseless model concentrates on the trivial signature") {
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < 5; ++q) chans.push_back(depolarizing1_channel(q, 0.0));
    NoiseModel model(5, std::move(chans));
    auto sig = five_qubit_signatures(model);
    auto dist = logical_class_probabilities(sig, model);
    REQUIRE(dist.probability.size() == 1);
    CHECK(dist.probability.begin()->first == LogicalSignature{});
    CHECK(dist.probability.begin()->second == doctest::Approx(1.0));
}

TEST_CASE("five-qubit exhaustive class probabilities normalize and span 64 classes") {
    auto model = gaussian_single_qubit_model(5, 1e-3, 5e-4, 7);
    auto sig = five_qubit_signatures(model);
    auto dist = logical_class_probabilities(sig, model);
    CHECK(dist.method == "exhaustive");
    CHECK(dist.probability.size() == 64);
    double total = 0;
    for (const auto& [s, p] : dist.probability) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monte carlo class probabilities agree with exhaustive at 3 sigma") {
    auto model = gaussian_single_qubit_model(5, 8e-3, 2e-3, 9);
    auto sig = five_qubit_signatures(model);
    auto exact = logical_class_probabilities(sig, model);
    LogicalClassOptions opt;
    opt.mc_shots = 1000000;
    auto mc = logical_class_probabilities(sig, model, opt);
    CHECK(mc.method == "monte_carlo");
    std::size_t violations = 0, compared = 0;
    for (const auto& [s, p] : exact.probability) {
        if (p < 1e-5) continue;
        auto it = mc.probability.find(s);
        double emp = it == mc.probability.end() ? 0.0 : it->second;
        double sigma = std::sqrt(p * (1 - p) / 1e6);
        ++compared;
        if (std::abs(emp - p) > 3 * sigma) ++violations;
    }
    CHECK(compared > 20);
    CHECK(violations * 100 <= compared * 5);
}

TEST_CASE("fault tolerance: surface(3) passes, [[4,2,2]] fails with a weight-2 witness") {
    auto surf = named_code("rotated_surface", {3});
    auto model9 = gaussian_single_qubit_model(9, 1e-3, 2e-4, 4);
    SignatureMap sig_surf(surf.measured_gens, {surf.logical_x[0], surf.logical_z[0]}, model9);
    CHECK(check_fault_tolerance(sig_surf, model9).tolerant);

    SubsystemCode toy;
    toy.n = 4;
    toy.stabilizer_gens = {PauliOperator::parse("XXXX", 4), PauliOperator::parse("ZZZZ", 4)};
    toy.measured_gens = toy.stabilizer_gens;
    toy.logical_x = {PauliOperator::parse("XXII", 4), PauliOperator::parse("XIXI", 4)};
    toy.logical_z = {PauliOperator::parse("ZIZI", 4), PauliOperator::parse("ZZII", 4)};
    auto model4 = gaussian_single_qubit_model(4, 1e-3, 2e-4, 5);
    std::vector<PauliOperator> logicals;
    for (const auto& l : toy.logical_x) logicals.push_back(l);
    for (const auto& l : toy.logical_z) logicals.push_back(l);
    SignatureMap sig_toy(toy.measured_gens, logicals, model4);
    auto ft = check_fault_tolerance(sig_toy, model4);
    CHECK(!ft.tolerant);
    REQUIRE(ft.violating_pair.has_value());
    auto prod = ft.violating_pair->first * ft.violating_pair->second;
    CHECK(prod.weight() <= 2);

    NoiseModel empty(4, {});
    SignatureMap sig_empty(toy.measured_gens, logicals, empty);
    CHECK(check_fault_tolerance(sig_empty, empty).tolerant);
}

TEST_CASE("p_fail: zero rates concentrate on the identity flip") {
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < 5; ++q) chans.push_back(depolarizing1_channel(q, 0.0));
    NoiseModel model(5, std::move(chans));
    auto sig = five_qubit_signatures(model);
    TrivialDecoder trivial;
    PFailOptions opt;
    opt.method = PFailOptions::Method::Exhaustive;
    auto report = estimate_p_fail(sig, model, trivial, opt);
    CHECK(report.p_fail[0] == doctest::Approx(1.0));
}

TEST_CASE("exhaustive and monte carlo p_fail agree at 3 sigma on [[5,1,3]]") {
    auto model = gaussian_single_qubit_model(5, 8e-3, 2e-3, 11);
    auto sig = five_qubit_signatures(model);
    LookupMleDecoder mle(sig, model);
    PFailOptions ex;
    ex.method = PFailOptions::Method::Exhaustive;
    auto exact = estimate_p_fail(sig, model, mle, ex);
    PFailOptions mc;
    mc.method = PFailOptions::Method::MonteCarlo;
    mc.mc_shots = 1000000;
    auto sampled = estimate_p_fail(sig, model, mle, mc);
    for (std::size_t f = 0; f < exact.p_fail.size(); ++f) {
        double sigma = std::sqrt(exact.p_fail[f] * (1 - exact.p_fail[f]) / 1e6) + 1e-9;
        CHECK(std::abs(sampled.p_fail[f] - exact.p_fail[f]) < 3.5 * sigma);
    }
}

TEST_CASE("MLE decoding never increases the total failure rate") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto model = gaussian_single_qubit_model(5, 1e-2, 3e-3, seed);
        auto sig = five_qubit_signatures(model);
        LookupMleDecoder mle(sig, model);
        TrivialDecoder trivial;
        PFailOptions opt;
        opt.method = PFailOptions::Method::Exhaustive;
        auto with_mle = estimate_p_fail(sig, model, mle, opt);
        auto with_trivial = estimate_p_fail(sig, model, trivial, opt);
        CHECK(1 - with_mle.p_fail[0] <= 1 - with_trivial.p_fail[0] + 1e-12);
    }
}

TEST_CASE("min-weight decoder matches MLE at low rates on the surface code") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 1e-3, 2e-4, 21);
    SignatureMap sig(code.measured_gens, {code.logical_z[0]}, model);
    MinWeightDecoder mw(sig, model);
    LookupMleDecoder mle(sig, model, 10);
    PFailOptions opt;
    opt.method = PFailOptions::Method::Exhaustive;
    auto a = estimate_p_fail(sig, model, mw, opt);
    auto b = estimate_p_fail(sig, model, mle, opt);
    // Both are sensible decoders at these rates; total failures are within a
    // factor of a few and tiny.
    CHECK(a.p_fail[1] < 1e-4);
    CHECK(b.p_fail[1] < 1e-4);
    CHECK(a.p_fail[1] <= 3 * b.p_fail[1] + 1e-12);
}

TEST_CASE("weight-capped exhaustive path covers nearly all mass") {
    auto code = named_code("rotated_surface", {3});
    // 9 qubits is within the dense budget; force the capped path with a tiny
    // dense limit to exercise it.
    auto model = gaussian_single_qubit_model(9, 1e-3, 2e-4, 33);
    SignatureMap sig(code.measured_gens, {code.logical_z[0]}, model);
    MinWeightDecoder mw(sig, model);
    PFailOptions capped;
    capped.method = PFailOptions::Method::Exhaustive;
    capped.dense_qubit_limit = 2;
    capped.weight_cap = 4;
    auto approx = estimate_p_fail(sig, model, mw, capped);
    PFailOptions dense;
    dense.method = PFailOptions::Method::Exhaustive;
    auto exact = estimate_p_fail(sig, model, mw, dense);
    CHECK(approx.truncated_mass < 1e-6);
    CHECK(std::abs(approx.p_fail[1] - exact.p_fail[1]) < 1e-7 + approx.truncated_mass);
}

TEST_CASE("equivalent rate vectors give identical p_fail") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 2e-3, 5e-4, 13);
    SignatureMap sig(code.measured_gens, {code.logical_x[0], code.logical_z[0]}, model);
    REQUIRE(check_fault_tolerance(sig, model).tolerant);

    // Perturb log mu inside a two-element syndrome class, keeping the class
    // sums; expectations are unchanged, so p_fail must be too.
    auto log_mu = model.log_mu();
    // X1 and X4 share a syndrome; their flat indices are X on qubits 0 and 3.
    std::size_t e_x1 = 0, e_x4 = 0;
    for (std::size_t e = 0; e < model.num_errors(); ++e) {
        if (model.error_pauli(e).to_sparse_string() == "X1") e_x1 = e;
        if (model.error_pauli(e).to_sparse_string() == "X4") e_x4 = e;
    }
    auto perturbed = log_mu;
    perturbed[e_x1] += 5e-4;
    perturbed[e_x4] -= 5e-4;
    auto model2 = model_from_log_mu(model, perturbed);

    LookupMleDecoder mle(sig, model);
    PFailOptions opt;
    opt.method = PFailOptions::Method::Exhaustive;
    auto a = estimate_p_fail(sig, model, mle, opt);
    auto b = estimate_p_fail(sig, model2, mle, opt);
    for (std::size_t f = 0; f < a.p_fail.size(); ++f)
        CHECK(std::abs(a.p_fail[f] - b.p_fail[f]) < 1e-9);
}

TEST_CASE("non-identifiable models are flagged but still estimated") {
    SubsystemCode toy;
    toy.n = 4;
    toy.stabilizer_gens = {PauliOperator::parse("XXXX", 4), PauliOperator::parse("ZZZZ", 4)};
    toy.measured_gens = toy.stabilizer_gens;
    auto model = gaussian_single_qubit_model(4, 1e-3, 2e-4, 6);
    SignatureMap sig(toy.measured_gens, {PauliOperator::parse("ZZII", 4)}, model);
    TrivialDecoder trivial;
    PFailOptions opt;
    opt.method = PFailOptions::Method::Exhaustive;
    auto report = estimate_p_fail(sig, model, trivial, opt);
    CHECK(!report.identifiable);
    CHECK(report.p_fail[0] > 0.9);
}

TEST_CASE("fidelity combination formulas") {
    // P_fail(0) = 1 gives F = 1 on a complete stabilizer basis.
    std::vector<double> clean = {1.0, 0.0};
    std::vector<FidelityTerm> terms = {{0, 1.0}, {1, 1.0}};
    auto est = logical_fidelity(clean, terms, 1);
    CHECK(est.value == doctest::Approx(1.0));
    CHECK(est.complete_basis);

    double q = 0.07;
    std::vector<double> noisy = {1 - q, q};
    CHECK(logical_fidelity(noisy, terms, 1).value == doctest::Approx(1 - q));

    auto partial = logical_fidelity(noisy, {{0, 1.0}}, 1);
    CHECK(!partial.complete_basis);
}
