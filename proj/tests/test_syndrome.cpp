#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "synlearn/syndrome.hpp"

using namespace synlearn;

TEST_CASE("noiseless model gives unit expectations") {
    auto code = named_code("steane");
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < 7; ++q) chans.push_back(depolarizing1_channel(q, 0.0));
    NoiseModel model(7, std::move(chans));
    auto vals = exact_expectations(code, model, code.measured_gens);
    for (double v : vals) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("elements outside the measured group are rejected") {
    auto code = named_code("steane");
    NoiseModel model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 1);
    CHECK_THROWS(exact_expectations(code, model, {PauliOperator::single(7, 0, 'X')}));
}

TEST_CASE("product rule on channel-disjoint supports") {
    // Lambda(M1 M2) = Lambda(M1) Lambda(M2) when the supports share no channel.
    auto surf = named_code("rotated_surface", {3});
    NoiseModel model9 = gaussian_single_qubit_model(9, 5e-3, 1e-3, 23);
    const auto& gens = surf.stabilizer_gens;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            auto si = gens[i].support();
            auto sj = gens[j].support();
            bool disjoint = true;
            for (auto q : si)
                for (auto r : sj)
                    if (q == r) disjoint = false;
            if (!disjoint) continue;
            auto vals = exact_expectations(surf, model9, {gens[i], gens[j], gens[i] * gens[j]});
            CHECK(vals[2] == doctest::Approx(vals[0] * vals[1]).epsilon(1e-12));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("empty dataset errors on query") {
    SyndromeDataset ds;
    CHECK_THROWS(ds.expectation(0));
}

TEST_CASE("empirical expectations track exact values at binomial scale") {
    auto code = named_code("steane");
    NoiseModel model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 7);
    auto tracked = code.measured_gens;
    const std::size_t shots = 100000;
    auto ds = sample_syndromes(code, model, shots, tracked, 99);
    auto exact = exact_expectations(code, model, tracked);
    for (std::size_t i = 0; i < tracked.size(); ++i) {
        double sigma = std::sqrt((1 - exact[i] * exact[i]) / shots);
        CHECK(std::abs(ds.expectation(i) - exact[i]) < 5 * sigma + 1e-9);
    }
}

TEST_CASE("hoeffding envelope holds for nearly all tracked elements") {
    auto code = named_code("rotated_surface", {3});
    NoiseModel model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 3);
    auto tracked = code.measured_gens;
    const std::size_t shots = 50000;
    const double delta = 0.01;
    auto ds = sample_syndromes(code, model, shots, tracked, 123);
    auto exact = exact_expectations(code, model, tracked);
    double envelope = std::sqrt(2.0 * std::log(2.0 / delta) / shots);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < tracked.size(); ++i)
        if (std::abs(ds.expectation(i) - exact[i]) <= envelope) ++ok;
    CHECK(ok * 100 >= tracked.size() * 99);
}

TEST_CASE("per-shot linearity of syndromes over products") {
    auto code = named_code("rotated_surface", {3});
    NoiseModel model = gaussian_single_qubit_model(9, 2e-2, 5e-3, 17);
    auto g0 = code.measured_gens[0];
    auto g1 = code.measured_gens[1];
    std::vector<PauliOperator> tracked = {g0, g1, g0 * g1};
    auto ds = sample_syndromes(code, model, 2000, tracked, 5);
    REQUIRE(!ds.bits.empty());
    for (const auto& row : ds.bits) CHECK(row[2] == (row[0] ^ row[1]));
}

TEST_CASE("result is independent of the shard count") {
    auto code = named_code("steane");
    NoiseModel model = gaussian_single_qubit_model(7, 1e-2, 2e-3, 31);
    auto one = sample_syndromes(code, model, 20000, code.measured_gens, 4, 1);
    auto four = sample_syndromes(code, model, 20000, code.measured_gens, 4, 4);
    CHECK(one.flip_counts == four.flip_counts);
}

TEST_CASE("variance scales as 1/N") {
    // Doubling N four-fold should reduce the variance of the empirical
    // expectation by ~4: regression slope -0.5 +- 0.05 on log-log.
    auto code = named_code("steane");
    NoiseModel model = gaussian_single_qubit_model(7, 1e-2, 2e-3, 13);
    auto tracked = std::vector<PauliOperator>{code.measured_gens[0]};
    double exact = exact_expectations(code, model, tracked)[0];
    std::vector<std::size_t> sizes = {1000, 4000, 16000, 64000};
    std::vector<double> log_n, log_rmse;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        double se = 0.0;
        const int reps = 150;
        for (int rep = 0; rep < reps; ++rep) {
            auto ds = sample_syndromes(code, model, sizes[k], tracked,
                                       1000 + 7919 * static_cast<std::uint64_t>(rep) + k);
            double d = ds.expectation(0) - exact;
            se += d * d;
        }
        log_n.push_back(std::log(static_cast<double>(sizes[k])));
        log_rmse.push_back(0.5 * std::log(se / reps));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        mx += log_n[i];
        my += log_rmse[i];
    }
    mx /= log_n.size();
    my /= log_n.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        num += (log_n[i] - mx) * (log_rmse[i] - my);
        den += (log_n[i] - mx) * (log_n[i] - mx);
    }
    double slope = num / den;
    CHECK(std::abs(slope + 0.5) < 0.05);
}

TEST_CASE("dataset json round trip") {
    auto code = named_code("repetition", {3});
    NoiseModel model = gaussian_single_qubit_model(3, 1e-2, 2e-3, 2);
    auto ds = sample_syndromes(code, model, 5000, code.measured_gens, 8);
    auto loaded = SyndromeDataset::from_json(ds.to_json());
    CHECK(loaded.shots == ds.shots);
    CHECK(loaded.flip_counts == ds.flip_counts);
    CHECK(loaded.tracked[0] == ds.tracked[0]);
}
