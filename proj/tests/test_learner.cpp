#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "synlearn/learner.hpp"
#include "synlearn/syndrome.hpp"

using namespace synlearn;

namespace {

std::vector<double> uniform_strength(std::size_t n) { return std::vector<double>(n, 1.0); }

std::vector<double> exact_row_expectations(const LearningProblem& problem, const NoiseModel& model) {
    std::vector<double> out;
    for (const auto& row : problem.rows) out.push_back(model.total_eigenvalue(row.op));
    return out;
}

// Rebuild per-channel lambdas from a perturbed log-mu vector via the
// commutator relation, then recover probabilities by the inverse transform.
NoiseModel model_from_log_mu(const NoiseModel& base, const std::vector<double>& log_mu) {
    std::vector<LocalChannel> chans = base.channels();
    std::size_t flat = 0;
    for (auto& ch : chans) {
        const std::size_t m = ch.probs.size();
        std::vector<double> lambda(m, 1.0);
        for (std::size_t k = 1; k < m; ++k) {
            double acc = 0.0;
            for (std::size_t e = 1; e < m; ++e) {
                if (binary_commutator(base.error_pauli(flat + k - 1), base.error_pauli(flat + e - 1)))
                    acc += log_mu[flat + e - 1];
            }
            lambda[k] = std::exp(acc);
        }
        auto probs = inverse_walsh_hadamard_copy(lambda);
        ch.probs = probs;
        flat += m - 1;
    }
    return NoiseModel(base.num_qubits(), std::move(chans));
}

}  // namespace

TEST_CASE("partition: steane single-qubit classes are singletons") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 1);
    auto part = partition_classes(code.measured_gens, model);
    CHECK(part.num_classes() == 21);
    CHECK(part.trivial_class.empty());
    for (const auto& cls : part.classes) CHECK(cls.size() == 1);
}

TEST_CASE("partition: surface(3) pairs match the known classes") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 2);
    auto part = partition_classes(code.measured_gens, model);
    CHECK(part.trivial_class.empty());
    CHECK(part.num_classes() == 23);  // 27 errors, four merged pairs
    std::set<std::set<std::string>> pair_classes;
    for (const auto& cls : part.classes) {
        if (cls.size() < 2) continue;
        std::set<std::string> names;
        for (std::size_t e : cls) names.insert(model.error_pauli(e).to_sparse_string());
        pair_classes.insert(names);
    }
    std::set<std::set<std::string>> expect = {{"X1", "X4"}, {"Z2", "Z3"}, {"X6", "X9"}, {"Z7", "Z8"}};
    CHECK(pair_classes == expect);
}

TEST_CASE("partition: color code merges all Z errors") {
    auto code = named_code("color_832");
    auto model = gaussian_single_qubit_model(8, 5e-3, 1e-3, 3);
    auto part = partition_classes(code.measured_gens, model);
    std::size_t z_class = SIZE_MAX;
    for (std::size_t c = 0; c < part.num_classes(); ++c)
        if (part.classes[c].size() == 8) z_class = c;
    REQUIRE(z_class != SIZE_MAX);
    for (std::size_t e : part.classes[z_class])
        CHECK(model.error_pauli(e).to_string().find('Z') != std::string::npos);
}

TEST_CASE("minimal subset: steane reaches rank 21 with single generators-products") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 4);
    auto problem = minimal_subset(code.measured_gens, model);
    CHECK(problem.num_rows() == 21);
    CHECK(problem.rank_a() == 21);
    CHECK(problem.rank_dp() == 21);
}

TEST_CASE("minimal subset: surface(3) rank identity with order <= 4") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 5);
    auto problem = minimal_subset(code.measured_gens, model, 4);
    CHECK(problem.num_rows() == problem.partition.num_classes());
    CHECK(problem.rank_a() == problem.partition.num_classes());
    CHECK(problem.rank_dp() == problem.partition.num_classes());
}

TEST_CASE("recursive solve: independent errors give the product identity") {
    for (const char* name : {"steane", "rotated_surface"}) {
        auto code = named_code(name, {3});
        auto model = gaussian_independent_model(code.n, 5e-3, 1e-3, 7);
        auto problem = analytic_subset(code.measured_gens, model);
        auto expectations = exact_row_expectations(problem, model);
        auto log_nu = recursive_solve(problem, expectations);
        auto rates = model.rates();
        for (std::size_t c = 0; c < problem.partition.num_classes(); ++c) {
            double expect = 1.0;
            for (std::size_t e : problem.partition.classes[c]) expect *= 1.0 - 2.0 * rates[e];
            CHECK(std::abs(std::exp(log_nu[c]) - expect) < 1e-10);
        }
    }
}

TEST_CASE("recursive solve: noiseless inputs give nu = 1") {
    auto code = named_code("steane");
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < 7; ++q) chans.push_back(depolarizing1_channel(q, 0.0));
    NoiseModel model(7, std::move(chans));
    auto problem = analytic_subset(code.measured_gens, model);
    auto log_nu = recursive_solve(problem, exact_row_expectations(problem, model));
    for (double v : log_nu) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("recursive solve agrees with the pseudoinverse on exact inputs") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 4e-3, 1e-3, 11);
    auto problem = analytic_subset(code.measured_gens, model);
    auto expectations = exact_row_expectations(problem, model);
    auto log_nu = recursive_solve(problem, expectations);
    auto lin = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                        {.solver = SolverKind::LinearLsq});
    for (std::size_t c = 0; c < log_nu.size(); ++c)
        CHECK(std::abs(log_nu[c] - lin.log_nu[c]) < 1e-9);
}

TEST_CASE("recursive solve rejects nonpositive expectations") {
    auto code = named_code("steane");
    auto model = gaussian_independent_model(7, 5e-3, 1e-3, 7);
    auto problem = analytic_subset(code.measured_gens, model);
    auto expectations = exact_row_expectations(problem, model);
    expectations[3] = -0.01;
    CHECK_THROWS_AS(recursive_solve(problem, expectations), std::domain_error);
}

TEST_CASE("constraints: uniform class-ratio row and count identity") {
    for (const char* name : {"steane", "rotated_surface"}) {
        auto code = named_code(name, {3});
        auto model = gaussian_single_qubit_model(code.n, 5e-3, 1e-3, 2);
        auto part = partition_classes(code.measured_gens, model);
        auto b = build_constraints(part, uniform_strength(model.num_errors()), {});
        std::size_t expected = part.trivial_class.size();
        for (const auto& cls : part.classes) expected += cls.size() - 1;
        CHECK(b.size() == expected);
        // Constraint-count audit: the B rows plus the |C*| independent
        // syndrome equations exhaust the noise-model degrees of freedom.
        CHECK(b.size() + part.num_classes() == model.num_errors());
        // Every class-ratio row with uniform strengths is (1, -1) on its pair.
        for (const auto& row : b) {
            double pos = 0, neg = 0;
            for (double v : row) {
                if (v > 0) pos += v;
                if (v < 0) neg += v;
            }
            CHECK(pos == doctest::Approx(1.0));
            CHECK(neg == doctest::Approx(-1.0));
        }
    }
}

TEST_CASE("constraints: typed strengths set the ratio") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 2);
    auto part = partition_classes(code.measured_gens, model);
    std::vector<double> r(model.num_errors(), 1.0);
    // Give the representative of a two-element class strength 3.
    std::size_t pair_class = SIZE_MAX;
    for (std::size_t c = 0; c < part.num_classes(); ++c)
        if (part.classes[c].size() == 2) pair_class = c;
    REQUIRE(pair_class != SIZE_MAX);
    std::size_t rep = part.representative(pair_class);
    std::size_t other = part.classes[pair_class][1];
    r[rep] = 3.0;
    auto b = build_constraints(part, r, {});
    bool found = false;
    for (const auto& row : b) {
        if (row[rep] == 1.0 && row[other] != 0.0) {
            CHECK(row[other] == doctest::Approx(-3.0));
            found = true;
        }
    }
    CHECK(found);
    CHECK_THROWS(build_constraints(part, std::vector<double>(model.num_errors(), 0.0), {}));
}

TEST_CASE("intraclass uniformity adds the requested rows") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 2);
    auto part = partition_classes(code.measured_gens, model);
    ConstraintOptions opt;
    opt.class_ratio = false;
    opt.trivial_average = false;
    opt.uniformity_rows = 5;
    auto b = build_constraints(part, uniform_strength(model.num_errors()), opt);
    CHECK(b.size() == 5);
    for (const auto& row : b) {
        int ones = 0;
        for (double v : row)
            if (v == 1.0) ++ones;
        CHECK(ones == 1);
    }
}

TEST_CASE("exact steane recovery via the nonlinear path") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 21);
    auto problem = minimal_subset(code.measured_gens, model);
    auto expectations = exact_row_expectations(problem, model);
    auto learned = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                            {.solver = SolverKind::Nonlinear});
    auto truth = model.rates();
    double worst = 0;
    for (std::size_t e = 0; e < truth.size(); ++e)
        worst = std::max(worst, std::abs(learned.p_hat[e] - truth[e]));
    CHECK(worst < 1e-8);
}

TEST_CASE("surface(3) class sums match truth to second order") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 22);
    auto problem = minimal_subset(code.measured_gens, model);
    auto expectations = exact_row_expectations(problem, model);
    auto learned = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                            {.solver = SolverKind::Nonlinear});
    auto truth = model.rates();
    for (std::size_t c = 0; c < problem.partition.num_classes(); ++c) {
        double true_sum = 0, learned_sum = 0, norm2 = 0;
        std::set<std::size_t> channels;
        for (std::size_t e : problem.partition.classes[c]) {
            true_sum += truth[e];
            learned_sum += learned.p_hat[e];
            channels.insert(model.errors()[e].channel_id);
        }
        for (std::size_t ch : channels)
            for (std::size_t k = 1; k < model.channel(ch).probs.size(); ++k)
                norm2 += model.channel(ch).probs[k] * model.channel(ch).probs[k];
        CHECK(std::abs(learned_sum - true_sum) <= 3 * kMuSecondOrderConstant * norm2);
    }
}

TEST_CASE("solver cross-validation on exact inputs") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 31);
    auto problem = analytic_subset(code.measured_gens, model);
    auto expectations = exact_row_expectations(problem, model);
    auto rec = recursive_solve(problem, expectations);
    auto lin = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                        {.solver = SolverKind::LinearLsq});
    auto nonlin = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                           {.solver = SolverKind::Nonlinear});
    for (std::size_t c = 0; c < rec.size(); ++c) {
        CHECK(std::abs(rec[c] - lin.log_nu[c]) < 1e-6);
        CHECK(std::abs(rec[c] - nonlin.log_nu[c]) < 1e-6);
    }
}

TEST_CASE("kernel perturbations within a class leave expectations unchanged") {
    auto code = named_code("rotated_surface", {3});
    auto model = gaussian_single_qubit_model(9, 5e-3, 1e-3, 13);
    auto part = partition_classes(code.measured_gens, model);
    auto log_mu = model.log_mu();
    // Shift within a class while keeping the class sum fixed.
    std::size_t pair_class = SIZE_MAX;
    for (std::size_t c = 0; c < part.num_classes(); ++c)
        if (part.classes[c].size() == 2) pair_class = c;
    REQUIRE(pair_class != SIZE_MAX);
    auto perturbed = log_mu;
    perturbed[part.classes[pair_class][0]] += 1e-3;
    perturbed[part.classes[pair_class][1]] -= 1e-3;
    auto model2 = model_from_log_mu(model, perturbed);
    // Different rates, same exact expectations.
    double rate_diff = 0;
    auto r1 = model.rates(), r2 = model2.rates();
    for (std::size_t e = 0; e < r1.size(); ++e) rate_diff = std::max(rate_diff, std::abs(r1[e] - r2[e]));
    CHECK(rate_diff > 1e-5);
    auto problem = analytic_subset(code.measured_gens, model);
    for (const auto& row : problem.rows)
        CHECK(model.total_eigenvalue(row.op) == doctest::Approx(model2.total_eigenvalue(row.op)).epsilon(1e-10));
}

TEST_CASE("detector error rates map") {
    CHECK(detector_error_rates({1.0})[0] == doctest::Approx(0.0));
    double p = 0.004;
    CHECK(detector_error_rates({1 - 2 * p})[0] == doctest::Approx(p));
    double p1 = 0.003, p2 = 0.008;
    CHECK(detector_error_rates({(1 - 2 * p1) * (1 - 2 * p2)})[0] ==
          doctest::Approx(p1 + p2 - 2 * p1 * p2));
    CHECK_THROWS(detector_error_rates({-0.1}));
}

TEST_CASE("learning from sampled steane data tracks the truth") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 99);
    auto problem = minimal_subset(code.measured_gens, model);
    std::vector<PauliOperator> tracked;
    for (const auto& row : problem.rows) tracked.push_back(row.op);
    const std::size_t shots = 100000;
    auto ds = sample_syndromes(code, model, shots, tracked, 5);
    auto learned = optimize(problem, ds.expectations(), uniform_strength(model.num_errors()), {},
                            {.solver = SolverKind::Nonlinear});
    auto truth = model.rates();
    for (std::size_t e = 0; e < truth.size(); ++e) {
        double sigma = std::sqrt(truth[e] / shots) + 1e-4;
        CHECK(std::abs(learned.p_hat[e] - truth[e]) < 6 * sigma);
    }
}

TEST_CASE("layer averages bucket by layer and arity") {
    auto c = surface_ec_circuit(3, 1);
    StandardNoiseParams params;
    params.sigma1q = 0.0;
    params.sigma2q = 0.0;
    auto model = standard_circuit_noise(c, params);
    auto truth = model.rates();
    auto averages = layer_averages(truth, model, c);
    for (const auto& avg : averages) {
        double expect = avg.arity == 1 ? params.mean1q * 3 : params.mean2q * 15;
        CHECK(avg.average == doctest::Approx(expect).epsilon(1e-9));
    }
    // A layer without 2Q gates produces no 2Q bucket.
    for (const auto& avg : averages)
        if (avg.layer == 1) CHECK(avg.arity == 1);
}

TEST_CASE("gram identity for the full measured group") {
    // (D'^T D') over all of M equals |M|/4 (J + I), checked exhaustively.
    for (const char* name : {"five_qubit", "steane"}) {
        auto code = named_code(name);
        auto model = gaussian_single_qubit_model(code.n, 5e-3, 1e-3, 6);
        auto part = partition_classes(code.measured_gens, model);
        const std::size_t m = code.measured_gens.size();
        const std::size_t group = std::size_t{1} << m;
        std::vector<std::vector<double>> gram(part.num_classes(),
                                              std::vector<double>(part.num_classes(), 0.0));
        for (std::size_t mask = 0; mask < group; ++mask) {
            PauliOperator op(code.n);
            for (std::size_t g = 0; g < m; ++g)
                if ((mask >> g) & 1) op *= code.measured_gens[g];
            std::vector<int> bits(part.num_classes());
            for (std::size_t c = 0; c < part.num_classes(); ++c)
                bits[c] = binary_commutator(op, model.error_pauli(part.representative(c)));
            for (std::size_t a = 0; a < part.num_classes(); ++a)
                for (std::size_t b = 0; b < part.num_classes(); ++b) gram[a][b] += bits[a] * bits[b];
        }
        double quarter = static_cast<double>(group) / 4.0;
        for (std::size_t a = 0; a < part.num_classes(); ++a)
            for (std::size_t b = 0; b < part.num_classes(); ++b)
                CHECK(gram[a][b] == doctest::Approx(quarter * (a == b ? 2.0 : 1.0)));
    }
}

TEST_CASE("nonpositive empirical expectations are dropped, rank permitting") {
    auto code = named_code("steane");
    auto model = gaussian_single_qubit_model(7, 5e-3, 1e-3, 44);
    auto problem = analytic_subset(code.measured_gens, model);  // overdetermined rows
    auto expectations = exact_row_expectations(problem, model);
    // Corrupt one redundant row; learning drops it and recovers.
    expectations[5] = -0.2;
    auto learned = optimize(problem, expectations, uniform_strength(model.num_errors()), {},
                            {.solver = SolverKind::LinearLsq});
    CHECK(learned.diagnostics.dropped_rows == 1);
    auto truth = model.rates();
    for (std::size_t e = 0; e < truth.size(); ++e)
        CHECK(std::abs(learned.p_hat[e] - truth[e]) < 5e-4);

    // Minimal subset: dropping any row loses rank and must abort.
    auto minimal = minimal_subset(code.measured_gens, model);
    auto min_exp = exact_row_expectations(minimal, model);
    min_exp[0] = 0.0;
    CHECK_THROWS_AS(optimize(minimal, min_exp, uniform_strength(model.num_errors()), {},
                             {.solver = SolverKind::LinearLsq}),
                    std::runtime_error);
}

TEST_CASE("D equals A times the per-channel commutator blocks") {
    // Structural identity between the restriction matrix A and the syndrome
    // matrix D on small instances.
    for (const char* name : {"steane", "rotated_surface"}) {
        auto code = named_code(name, {3});
        auto model = gaussian_single_qubit_model(code.n, 5e-3, 1e-3, 9);
        auto problem = minimal_subset(code.measured_gens, model);
        for (std::size_t r = 0; r < problem.num_rows(); ++r) {
            for (std::size_t e = 0; e < problem.num_errors(); ++e) {
                int av = 0;
                for (std::size_t k : problem.a_cols[r]) {
                    if (model.errors()[k].channel_id != model.errors()[e].channel_id) continue;
                    av += binary_commutator(model.error_pauli(k), model.error_pauli(e));
                }
                REQUIRE(av == (problem.d_rows[r].get(e) ? 1 : 0));
            }
        }
    }
}
