#include "synlearn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "synlearn/rng.hpp"

namespace synlearn {

std::vector<double> exact_problem_expectations(const LearningProblem& problem, const NoiseModel& model) {
    std::vector<double> out;
    out.reserve(problem.num_rows());
    for (const auto& row : problem.rows) out.push_back(model.total_eigenvalue(row.op));
    return out;
}

std::vector<double> sampled_problem_expectations_static(const SubsystemCode& code,
                                                        const NoiseModel& model,
                                                        const LearningProblem& problem,
                                                        std::size_t shots, std::uint64_t seed,
                                                        int threads) {
    std::vector<PauliOperator> tracked;
    for (const auto& row : problem.rows) tracked.push_back(row.op);
    auto ds = sample_syndromes(code, model, shots, tracked, seed, threads);
    return ds.expectations();
}

std::vector<double> sampled_problem_expectations_circuit(const SpacetimeCode& code,
                                                         const NoiseModel& model,
                                                         const LearningProblem& problem,
                                                         std::size_t shots, std::uint64_t seed,
                                                         int threads) {
    std::vector<Gf2Vector> subsets;
    for (const auto& row : problem.rows) subsets.push_back(row.gen_subset);
    auto flips = sample_detector_flips(code, model, subsets, shots, seed, threads);
    std::vector<double> out(flips.size());
    for (std::size_t i = 0; i < flips.size(); ++i)
        out[i] = 1.0 - 2.0 * static_cast<double>(flips[i]) / static_cast<double>(shots);
    return out;
}

std::vector<double> uniform_strengths(const NoiseModel& model) {
    return std::vector<double>(model.num_errors(), 1.0);
}

std::vector<double> typed_strengths(const NoiseModel& model, const CliffordCircuit& circuit,
                                    double r_idle, double r_1q, double r_2q, double r_meas) {
    std::vector<double> out;
    out.reserve(model.num_errors());
    for (const auto& ch : model.channels()) {
        auto prov = channel_provenance(circuit, ch.support);
        double r = r_1q;
        if (prov.arity == 2)
            r = r_2q;
        else if (prov.kind == GateKind::Idle)
            r = r_idle;
        else if (prov.kind == GateKind::MeasurePauli)
            r = r_meas;
        for (std::size_t k = 1; k < ch.probs.size(); ++k) out.push_back(r);
    }
    return out;
}

std::vector<double> reference_strengths(const std::vector<double>& rates) {
    std::vector<double> out(rates);
    for (auto& v : out) v = std::max(v, 1e-9);
    return out;
}

std::vector<double> true_class_rates(const SyndromeClassPartition& partition,
                                     const std::vector<double>& truth_rates) {
    std::vector<double> out(partition.num_classes(), 0.0);
    for (std::size_t c = 0; c < partition.num_classes(); ++c)
        for (std::size_t e : partition.classes[c]) out[c] += truth_rates[e];
    return out;
}

double mean_relative_class_error(const SyndromeClassPartition& partition,
                                 const std::vector<double>& truth_rates,
                                 const std::vector<double>& class_estimates) {
    auto truth = true_class_rates(partition, truth_rates);
    double total = 0.0;
    for (std::size_t c = 0; c < truth.size(); ++c)
        total += std::abs(class_estimates[c] - truth[c]) / truth[c];
    return total / static_cast<double>(truth.size());
}

EarlyStopCalibration calibrate_early_stopping(
    const LearningProblem& problem, const NoiseModel& prior,
    const std::function<std::vector<double>(std::uint64_t seed)>& sampler,
    const std::vector<double>& relative_strength, const ConstraintOptions& constraints,
    std::size_t replicas, std::uint64_t seed, std::size_t checkpoint_every,
    std::size_t max_iterations) {
    EarlyStopCalibration cal;
    auto truth = prior.rates();
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        auto expectations = sampler(counter_hash(seed, 0xca11, rep));
        std::vector<std::pair<std::size_t, double>> trace;
        OptimizeOptions opt;
        opt.solver = SolverKind::Nonlinear;
        opt.max_iterations = max_iterations;
        opt.iteration_callback = [&](std::size_t iter, const std::vector<double>& p) {
            if (iter % checkpoint_every != 0) return;
            std::vector<double> class_est(problem.partition.num_classes(), 0.0);
            for (std::size_t c = 0; c < class_est.size(); ++c)
                for (std::size_t e : problem.partition.classes[c]) class_est[c] += p[e];
            trace.emplace_back(iter, mean_relative_class_error(problem.partition, truth, class_est));
        };
        optimize(problem, expectations, relative_strength, constraints, opt);
        // First checkpoint where the error turns upward; fall back to the
        // minimum when it decreases monotonically.
        std::size_t stop = trace.empty() ? max_iterations : trace.back().first;
        double best = 1e300;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace[i].second < best) {
                best = trace[i].second;
                stop = trace[i].first;
            } else if (i > 0 && trace[i].second > trace[i - 1].second) {
                stop = trace[i - 1].first;
                break;
            }
        }
        cal.per_replica.push_back(stop);
    }
    auto sorted = cal.per_replica;
    std::sort(sorted.begin(), sorted.end());
    cal.median_iteration = sorted.empty() ? 0 : sorted[sorted.size() / 2];
    return cal;
}

GhzToyCircuits make_ghz_toy() {
    const std::size_t block = 7, n = 14;
    auto steane = steane_code();
    CliffordCircuit base;
    base.n = n;
    for (std::size_t b = 0; b < 2; ++b) {
        for (const auto& g : steane.stabilizer_gens) {
            PauliOperator big(n);
            for (std::size_t q = 0; q < block; ++q) {
                big.set_x(b * block + q, g.x(q));
                big.set_z(b * block + q, g.z(q));
            }
            base.initial_stabilizers.push_back(big);
        }
        PauliOperator lx(n), lz(n);
        for (std::size_t q = 0; q < block; ++q) {
            lx.set_x(b * block + q, true);
            lz.set_z(b * block + q, true);
        }
        base.initial_logical_x.push_back(lx);
        base.initial_logical_z.push_back(lz);
    }
    // Logical Bell preparation: transversal H on block 1, transversal CNOT.
    Layer h1, cnot;
    for (std::size_t q = 0; q < block; ++q) {
        h1.push_back(Location::gate1(GateKind::H, q));
        cnot.push_back(Location::gate2(GateKind::CNOT, q, block + q));
    }
    base.layers.push_back(h1);
    base.layers.push_back(cnot);

    auto with_readout = [&base, n](const std::vector<Layer>& rotation) {
        CliffordCircuit c = base;
        for (const auto& layer : rotation) c.layers.push_back(layer);
        Layer reads;
        for (std::size_t q = 0; q < n; ++q)
            reads.push_back(Location::measure(PauliOperator::single(n, q, 'Z')));
        c.layers.push_back(reads);
        c.fill_idle();
        c.complete_tableau();
        return c;
    };

    GhzToyCircuits out;
    out.zz = with_readout({});
    Layer h_all;
    for (std::size_t q = 0; q < n; ++q) h_all.push_back(Location::gate1(GateKind::H, q));
    out.xx = with_readout({h_all});
    // Y basis: rotate Y to Z per qubit via S-dagger (= Z then S) followed by H.
    Layer z_all, s_all;
    for (std::size_t q = 0; q < n; ++q) {
        z_all.push_back(Location::gate1(GateKind::Z, q));
        s_all.push_back(Location::gate1(GateKind::S, q));
    }
    out.yy = with_readout({z_all, s_all, h_all});
    return out;
}

DriftDemo make_drift_demo(std::size_t distance, std::size_t rounds, double p0_1q, double p0_2q,
                          double sigma_ratio, std::uint64_t seed) {
    DriftDemo demo;
    demo.circuit = surface_ec_circuit(distance, rounds);
    const std::size_t T = demo.circuit.depth();
    StandardNoiseParams params;
    params.mean1q = p0_1q / 3.0;
    params.mean2q = p0_2q / 15.0;
    params.sigma1q = 0.0;
    params.sigma2q = 0.0;
    params.seed = seed;
    double p1 = p0_1q, p2 = p0_2q;
    for (std::size_t t = 1; t <= T; ++t) {
        if (t > 1) {
            p1 += sigma_ratio * p0_1q * normal01(seed, 0x31716bull, t);
            p2 += sigma_ratio * p0_2q * normal01(seed, 0x32716bull, t);
            p1 = std::max(p1, 10 * kRateClip);
            p2 = std::max(p2, 10 * kRateClip);
        }
        params.layer_scale_1q.push_back(p1 / p0_1q);
        params.layer_scale_2q.push_back(p2 / p0_2q);
        demo.true_1q_per_layer.push_back(p1);
        bool has_2q = false;
        for (const auto& loc : demo.circuit.layers[t - 1])
            if (loc.qubits.size() == 2) has_2q = true;
        demo.true_2q_per_layer.push_back(has_2q ? p2 : 0.0);
    }
    demo.truth = standard_circuit_noise(demo.circuit, params);
    return demo;
}

}  // namespace synlearn
