#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synlearn/circuit.hpp"
#include "synlearn/gf2.hpp"
#include "synlearn/noise.hpp"
#include "synlearn/spacetime.hpp"

namespace synlearn {

// Partition of the (flat-indexed) error set into syndrome classes with
// respect to a generator list. Classes are ordered lexicographically on the
// syndrome bit pattern; representatives are the lowest flat error index.
struct SyndromeClassPartition {
    std::size_t num_generators = 0;
    std::vector<Gf2Vector> syndromes;               // per nontrivial class
    std::vector<std::vector<std::size_t>> classes;  // flat error ids per class
    std::vector<std::size_t> trivial_class;         // C0 (possibly empty)
    std::vector<std::ptrdiff_t> class_of_error;     // -1 for C0 members

    std::size_t num_classes() const { return classes.size(); }
    std::size_t representative(std::size_t c) const { return classes[c].front(); }
};

SyndromeClassPartition partition_classes(const std::vector<PauliOperator>& generators,
                                         const NoiseModel& model);

// One measured element of M': a subset of generators and its product.
struct StabilizerRow {
    Gf2Vector gen_subset;
    PauliOperator op;
};

// Matrices of the learning problem for a chosen row set. A maps log lambda
// (flat error order) to log Lambda; D holds binary commutators; D' keeps one
// column per nontrivial class.
struct LearningProblem {
    std::vector<PauliOperator> generators;
    SyndromeClassPartition partition;
    std::vector<StabilizerRow> rows;
    std::vector<std::vector<std::size_t>> a_cols;   // per row: flat errors with A=1
    std::vector<Gf2Vector> d_rows;                  // per row: commutator bits over errors
    std::vector<Gf2Vector> dp_rows;                 // per row: bits over classes

    // Channel block structure in flat error order: pairwise anticommutation
    // masks inside each channel, used by the lambda(p) map.
    struct ChannelBlock {
        std::size_t first = 0;
        std::size_t count = 0;
        std::vector<std::uint32_t> anticommute;
    };
    std::vector<ChannelBlock> blocks;

    std::size_t num_rows() const { return rows.size(); }
    std::size_t num_errors() const { return partition.class_of_error.size(); }

    // Real ranks (QR-style elimination) and the GF(2) rank of D.
    std::size_t rank_a() const;
    std::size_t rank_dp() const;
    std::size_t rank_d_gf2() const;
};

// Algorithm: walk connected subgraphs of the stabilizer correlation graph by
// increasing order, adding the corresponding products while they grow the
// real rank of D', until rank |C*| is reached.
LearningProblem minimal_subset(const std::vector<PauliOperator>& generators, const NoiseModel& model,
                               std::size_t max_order = 8);

// The stabilizer set of the analytic solver: all sub-products of J(C) per
// class. Returns the problem with that row set.
LearningProblem analytic_subset(const std::vector<PauliOperator>& generators, const NoiseModel& model);

// Problem over explicit generator subsets.
LearningProblem problem_for_rows(const std::vector<PauliOperator>& generators, const NoiseModel& model,
                                 const std::vector<Gf2Vector>& gen_subsets);

// Constraint matrix B over the flat error space.
struct ConstraintOptions {
    bool class_ratio = true;      // pairwise rows inside each nontrivial class
    bool trivial_average = true;  // averages for C0 members
    std::size_t uniformity_rows = 0;  // extra intraclass-uniformity rows
    std::uint64_t seed = 0;           // selects the uniformity targets
};

std::vector<std::vector<double>> build_constraints(const SyndromeClassPartition& partition,
                                                   const std::vector<double>& relative_strength,
                                                   const ConstraintOptions& options);

// Split class rates into per-error rates by relative strength (the K_B map),
// then fill the trivial class by the weighted average rule.
std::vector<double> split_class_rates(const SyndromeClassPartition& partition,
                                      const std::vector<double>& relative_strength,
                                      const std::vector<double>& class_rates);

enum class SolverKind { Recursive, LinearLsq, Nonlinear };

struct OptimizeOptions {
    SolverKind solver = SolverKind::Nonlinear;
    std::size_t max_iterations = 100000;
    double objective_tolerance = 1e-10;
    std::ptrdiff_t fixed_iterations = -1;  // >= 0: stop exactly there (early stopping)
    double constraint_weight = 1.0;
    // Rows with clamped (originally nonpositive) empirical expectations are
    // dropped; learning aborts if the D' rank then falls below |C*|.
    bool drop_nonpositive_rows = true;
    std::function<void(std::size_t, const std::vector<double>&)> iteration_callback;
};

struct LearnedRates {
    std::vector<double> log_nu;          // per class
    std::vector<double> nu;
    std::vector<double> class_rates;     // -log(nu)/2
    std::vector<double> detector_rates;  // (1-nu)/2
    std::vector<double> p_hat;           // per flat error
    struct Diagnostics {
        std::string solver;
        std::size_t iterations = 0;
        double residual = 0.0;
        std::size_t dropped_rows = 0;
        bool converged = true;
    } diagnostics;
};

// The recursive analytic solution over the generator set: expectations must
// cover every sub-product of each J(C) (use analytic_subset). Expectations
// are indexed like problem.rows.
std::vector<double> recursive_solve(const LearningProblem& problem,
                                    const std::vector<double>& expectations);

// Full estimation: solve for nu / p-hat from (possibly noisy) expectations.
LearnedRates optimize(const LearningProblem& problem, const std::vector<double>& expectations,
                      const std::vector<double>& relative_strength, const ConstraintOptions& constraints,
                      const OptimizeOptions& options);

std::vector<double> detector_error_rates(const std::vector<double>& nu);

// Arithmetic mean of total channel rates per (gate layer, location arity).
struct LayerAverage {
    std::size_t layer;
    std::size_t arity;
    double average;
    std::size_t locations;
};

std::vector<LayerAverage> layer_averages(const std::vector<double>& p_hat, const NoiseModel& model,
                                         const CliffordCircuit& circuit);

}  // namespace synlearn
