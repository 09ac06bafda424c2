#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "synlearn/noise.hpp"
#include "synlearn/rng.hpp"

using namespace synlearn;

namespace {

std::size_t global_rank(const PauliOperator& p) {
    std::size_t g = 0;
    for (std::size_t q = 0; q < p.num_qubits(); ++q)
        g = (g << 2) | static_cast<std::size_t>(pauli_digit(p.x(q), p.z(q)));
    return g;
}

}  // namespace

TEST_CASE("depolarizing at p=0 has unit eigenvalues") {
    auto ch = depolarizing1_channel(0, 0.0);
    for (double v : ch.eigenvalues()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("single-qubit eigenvalues by hand") {
    double p = 0.005;
    LocalChannel ch;
    ch.support = Support{0};
    ch.probs = {1 - 3 * p, p, p, p};
    auto eig = ch.eigenvalues();
    CHECK(eig[0] == doctest::Approx(1.0));
    for (int i = 1; i < 4; ++i) CHECK(eig[i] == doctest::Approx(0.98).epsilon(1e-12));
}

TEST_CASE("eigenvalue roundtrip recovers probabilities") {
    auto ch = gaussian_channel(Support{2, 5}, 4e-3, 1e-3, 99, 0);
    auto eig = ch.eigenvalues();
    auto back = inverse_walsh_hadamard_copy(eig);
    for (std::size_t i = 0; i < ch.probs.size(); ++i) CHECK(std::abs(back[i] - ch.probs[i]) < 1e-12);
}

TEST_CASE("total eigenvalue factorizes") {
    double p = 0.01;
    NoiseModel model(2, {depolarizing1_channel(0, p), depolarizing1_channel(1, p)});
    CHECK(model.total_eigenvalue(PauliOperator::identity(2)) == doctest::Approx(1.0));
    double lx = 1.0 - 4.0 * p / 3.0;
    CHECK(model.total_eigenvalue(PauliOperator::parse("XX", 2)) == doctest::Approx(lx * lx).epsilon(1e-12));
}

TEST_CASE("factorization equals WH of the convolved distribution, exhaustive n<=3") {
    for (std::size_t n = 2; n <= 3; ++n) {
        std::vector<LocalChannel> chans;
        chans.push_back(gaussian_channel(Support{0, 1}, 3e-3, 1e-3, 17, 1));
        chans.push_back(gaussian_channel(Support{n - 1}, 5e-3, 1e-3, 17, 2));
        chans.push_back(gaussian_channel(Support{0}, 2e-3, 5e-4, 17, 3));
        NoiseModel model(n, std::move(chans));
        auto dist = model.convolved_distribution();
        std::size_t total = pow4(n);
        Support all;
        for (std::size_t q = 0; q < n; ++q) all.qubits.push_back(q);
        for (std::size_t rank = 0; rank < total; ++rank) {
            auto op = embed(rank, all, n);
            double direct = 0.0;
            for (std::size_t e = 0; e < total; ++e) {
                auto err = embed(e, all, n);
                direct += dist[global_rank(err)] * scalar_commutator(err, op);
            }
            CHECK(std::abs(direct - model.total_eigenvalue(op)) < 1e-10);
        }
    }
}

TEST_CASE("mu for noiseless and single-error channels") {
    NoiseModel clean(2, {depolarizing1_channel(0, 0.0), depolarizing1_channel(1, 0.0)});
    for (double lm : clean.log_mu()) CHECK(lm == doctest::Approx(0.0));

    double p = 0.013;
    NoiseModel one(1, {single_error_channel(Support{0}, 1, p)});
    auto mu = one.log_mu();
    REQUIRE(mu.size() == 3);
    CHECK(std::exp(mu[0]) == doctest::Approx(1 - 2 * p).epsilon(1e-12));  // X
    CHECK(std::exp(mu[1]) == doctest::Approx(1.0));                       // Y
    CHECK(std::exp(mu[2]) == doctest::Approx(1.0));                       // Z
}

TEST_CASE("mu matches the eigenvalue-ratio closed form") {
    auto ch = gaussian_channel(Support{0}, 6e-3, 2e-3, 5, 0);
    NoiseModel model(1, {ch});
    auto eig = ch.eigenvalues();
    auto mu = model.log_mu();
    double expect = std::sqrt(eig[2] * eig[3] / eig[1]);
    CHECK(std::exp(mu[0]) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mu approximation is second order with the fitted module constant") {
    CounterRng rng(8);
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        double scale = 1e-3 + 3e-2 * rng.next_uniform();
        LocalChannel ch;
        ch.support = Support{0};
        ch.probs.assign(4, 0.0);
        double total = 0;
        for (int i = 1; i < 4; ++i) {
            ch.probs[i] = scale * (0.2 + rng.next_uniform());
            total += ch.probs[i];
        }
        ch.probs[0] = 1 - total;
        NoiseModel model(1, {ch});
        auto approx = model.mu_rate_approximation();
        double norm2 = 0;
        for (int i = 1; i < 4; ++i) norm2 += ch.probs[i] * ch.probs[i];
        for (int i = 1; i < 4; ++i)
            worst_ratio = std::max(worst_ratio, std::abs(approx[i - 1] - ch.probs[i]) / norm2);
    }
    CHECK(worst_ratio < kMuSecondOrderConstant);
}

TEST_CASE("assumption violation is reported") {
    LocalChannel bad;
    bad.support = Support{0};
    bad.probs = {0.4, 0.6, 0.0, 0.0};  // P(I) < 1/2, eigenvalue goes negative
    CHECK(!bad.satisfies_assumption1());
    NoiseModel model(1, {bad});
    CHECK_THROWS_AS(model.log_mu(), std::domain_error);
}

TEST_CASE("sampling: identity model always yields identity") {
    NoiseModel model(3, {depolarizing1_channel(0, 0.0), depolarizing1_channel(2, 0.0)});
    for (std::uint64_t shot = 0; shot < 20; ++shot) CHECK(model.sample_error(1, shot).is_identity());
}

TEST_CASE("sampling is deterministic in (seed, shot)") {
    NoiseModel model(2, {depolarizing1_channel(0, 0.3), depolarizing1_channel(1, 0.3)});
    for (std::uint64_t shot = 0; shot < 10; ++shot)
        CHECK(model.sample_error(42, shot) == model.sample_error(42, shot));
}

TEST_CASE("empirical X frequency matches the channel rate") {
    double px = 0.01;
    NoiseModel model(1, {single_error_channel(Support{0}, 1, px)});
    const std::size_t shots = 1000000;
    std::size_t count = 0;
    for (std::size_t s = 0; s < shots; ++s)
        if (!model.sample_error(7, s).is_identity()) ++count;
    double freq = static_cast<double>(count) / shots;
    double ci = 3 * std::sqrt(px * (1 - px) / shots);
    CHECK(std::abs(freq - px) < ci);
}

TEST_CASE("two overlapping channels convolve") {
    double q = 0.04;
    std::vector<LocalChannel> chans = {single_error_channel(Support{0}, 1, q),
                                       single_error_channel(Support{0}, 1, q)};
    NoiseModel model(1, chans);
    CHECK(model.num_errors() == 6);  // |E_Gamma| counts every channel slot, 3 per channel
    const std::size_t shots = 1000000;
    std::size_t count = 0;
    for (std::size_t s = 0; s < shots; ++s)
        if (!model.sample_error(3, s).is_identity()) ++count;
    double expect = 2 * q * (1 - q);
    double freq = static_cast<double>(count) / shots;
    CHECK(std::abs(freq - expect) < 3 * std::sqrt(expect * (1 - expect) / shots));
}

TEST_CASE("sampled distribution matches brute-force convolution in TVD") {
    std::vector<LocalChannel> chans = {gaussian_channel(Support{0, 1}, 8e-3, 2e-3, 21, 0),
                                       gaussian_channel(Support{1, 2}, 6e-3, 2e-3, 21, 1),
                                       gaussian_channel(Support{3}, 9e-3, 3e-3, 21, 2)};
    NoiseModel model(4, chans);
    auto exact = model.convolved_distribution();
    const std::size_t shots = 1000000;
    std::vector<double> empirical(exact.size(), 0.0);
    for (std::size_t s = 0; s < shots; ++s) empirical[global_rank(model.sample_error(13, s))] += 1.0;
    double tvd = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) tvd += std::abs(empirical[i] / shots - exact[i]);
    CHECK(tvd / 2 <= 5e-3);
}

TEST_CASE("gaussian rates are clipped") {
    auto ch = gaussian_channel(Support{0}, 1e-5, 1e-3, 3, 0);
    for (std::size_t i = 1; i < 4; ++i) CHECK(ch.probs[i] >= kRateClip);
}

TEST_CASE("rates round trip through with_rates") {
    auto model = gaussian_single_qubit_model(4, 5e-3, 1e-3, 11);
    auto r = model.rates();
    r[2] *= 2.0;
    auto model2 = model.with_rates(r);
    CHECK(model2.rates()[2] == doctest::Approx(r[2]));
    const auto& probs = model2.channels()[0].probs;
    CHECK(probs[0] + probs[1] + probs[2] + probs[3] == doctest::Approx(1.0));
}
