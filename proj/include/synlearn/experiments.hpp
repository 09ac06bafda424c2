#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "synlearn/code.hpp"
#include "synlearn/learner.hpp"
#include "synlearn/logical.hpp"
#include "synlearn/spacetime.hpp"
#include "synlearn/syndrome.hpp"

namespace synlearn {

// Lambda for every problem row through the eigenvalue factorization; works
// for static codes and spacetime codes alike.
std::vector<double> exact_problem_expectations(const LearningProblem& problem, const NoiseModel& model);

// Empirical expectations in the channel-coding setting (perfect readout).
std::vector<double> sampled_problem_expectations_static(const SubsystemCode& code,
                                                        const NoiseModel& model,
                                                        const LearningProblem& problem,
                                                        std::size_t shots, std::uint64_t seed,
                                                        int threads = 0);

// Empirical detector expectations from full circuit simulation.
std::vector<double> sampled_problem_expectations_circuit(const SpacetimeCode& code,
                                                         const NoiseModel& model,
                                                         const LearningProblem& problem,
                                                         std::size_t shots, std::uint64_t seed,
                                                         int threads = 0);

// Relative-strength vectors for the B constraints.
std::vector<double> uniform_strengths(const NoiseModel& model);
// Per location type, e.g. (1, 3, 10, 20) for idle / 1Q gate / 2Q gate /
// measurement; preparations count as single-qubit gates.
std::vector<double> typed_strengths(const NoiseModel& model, const CliffordCircuit& circuit,
                                    double r_idle, double r_1q, double r_2q, double r_meas);
// Strengths proportional to a reference rate vector (truth-consistent B).
std::vector<double> reference_strengths(const std::vector<double>& rates);

// Early-stopping calibration: simulate replicas at the prior rates, record
// where the mean relative class error turns upward, return the median.
struct EarlyStopCalibration {
    std::size_t median_iteration = 0;
    std::vector<std::size_t> per_replica;
};

EarlyStopCalibration calibrate_early_stopping(
    const LearningProblem& problem, const NoiseModel& prior,
    const std::function<std::vector<double>(std::uint64_t seed)>& sampler,
    const std::vector<double>& relative_strength, const ConstraintOptions& constraints,
    std::size_t replicas = 20, std::uint64_t seed = 1, std::size_t checkpoint_every = 10,
    std::size_t max_iterations = 4000);

// Mean over classes of |estimate - truth| / truth.
double mean_relative_class_error(const SyndromeClassPartition& partition,
                                 const std::vector<double>& truth_rates,
                                 const std::vector<double>& class_estimates);
std::vector<double> true_class_rates(const SyndromeClassPartition& partition,
                                     const std::vector<double>& truth_rates);

// Two-block GHZ-style verification circuits on the Steane code: transversal
// H then CNOT prepares the logical Bell pair; one readout circuit per
// stabilizer basis of the target (ZZ, XX, YY).
struct GhzToyCircuits {
    CliffordCircuit zz, xx, yy;
};
GhzToyCircuits make_ghz_toy();

// Time-varying noise demo: per-layer 1Q/2Q total rates follow independent
// random walks (theta = 1) with step sigma_ratio * p0.
struct DriftDemo {
    CliffordCircuit circuit;
    NoiseModel truth;
    std::vector<double> true_1q_per_layer;  // total location rate per gate layer
    std::vector<double> true_2q_per_layer;  // empty entries = no 2Q locations
};
DriftDemo make_drift_demo(std::size_t distance, std::size_t rounds, double p0_1q, double p0_2q,
                          double sigma_ratio, std::uint64_t seed);

}  // namespace synlearn
