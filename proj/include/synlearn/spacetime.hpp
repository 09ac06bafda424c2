#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "synlearn/circuit.hpp"
#include "synlearn/noise.hpp"

namespace synlearn {

// Backward conjugation-accumulation: layer tau of the result is the product
// of all components at tau' >= tau conjugated back to tau.
PauliOperator back_cumulant(const PauliOperator& spacetime_op, const CliffordCircuit& circuit);
PauliOperator forward_cumulant(const PauliOperator& spacetime_op, const CliffordCircuit& circuit);

// Flat spacetime embedding of a circuit error: component e_t acts before gate
// layer t (t in 1..T+1; t = T+1 is the slice after the last layer).
PauliOperator map_error(const std::vector<std::pair<std::size_t, PauliOperator>>& circuit_error,
                        const CliffordCircuit& circuit);
// Inverse accessor: per-layer slices of a flat spacetime Pauli, skipping
// identity slices.
std::vector<std::pair<std::size_t, PauliOperator>> split_error(const PauliOperator& spacetime_error,
                                                               const CliffordCircuit& circuit);

// The spacetime subsystem code of a circuit: one measured generator per
// parity check and one measured logical per logical index vector.
struct SpacetimeCode {
    CliffordCircuit circuit;
    ParityStructure parity;
    std::size_t n_st = 0;
    std::vector<PauliOperator> measured_gens;      // M(u), aligned with parity.o_perp
    std::vector<PauliOperator> measured_logicals;  // L'(u^L), aligned with parity.k_logical

    std::size_t layer_of(std::size_t spacetime_index) const { return spacetime_index / circuit.n; }

    // Every support index of M(u) lies strictly between the earliest and
    // latest measurement time of u; throws when violated.
    void check_support_bound() const;

    std::string to_json() const;
};

SpacetimeCode build_spacetime_code(const CliffordCircuit& circuit, const ParityStructure& parity);

enum class LocalizeStrategy { SurfaceRecipe, GreedyWindow };

// Produce an equivalent parity-check basis (identical GF(2) row span over the
// measurement slots) whose checks couple temporally adjacent measurements.
// SurfaceRecipe implements the hand recipe for the surface EC circuit:
// rounds 1 and 2 pair an ancilla result with its initial stabilizer value,
// round r > 2 pairs rounds r and r-2, and the transversal data readout pairs
// with the ancilla results of the last two rounds. GreedyWindow is a generic
// elimination preferring small temporal windows, with no weight guarantee.
ParityStructure localize_generator_basis(const ParityStructure& parity, LocalizeStrategy strategy,
                                         const CliffordCircuit& circuit);

// Standard circuit-level noise: one w-qubit channel per w-qubit location,
// placed on the spacetime qubits at t-0.5 (after the location for state
// preparations). Per-component rates are Gaussian around the arity means.
struct StandardNoiseParams {
    double mean1q = 1e-3 / 3;   // per Pauli component, single-qubit locations
    double sigma1q = 2e-4 / 3;
    double mean2q = 1e-2 / 15;  // per Pauli component, two-qubit locations
    double sigma2q = 2e-3 / 15;
    std::uint64_t seed = 0;
    // Optional per-gate-layer multipliers (index t-1) for drifting noise.
    std::vector<double> layer_scale_1q;
    std::vector<double> layer_scale_2q;
};

NoiseModel standard_circuit_noise(const CliffordCircuit& circuit, const StandardNoiseParams& params);

// Provenance of a spacetime channel, derived from its support.
struct ChannelProvenance {
    std::size_t layer;  // gate layer the channel precedes
    std::size_t arity;  // 1 or 2
    GateKind kind;      // location kind at that layer
};

ChannelProvenance channel_provenance(const CliffordCircuit& circuit, const Support& support);

// Exact detector-bit expectation of a product of measured generators,
// evaluated through the spacetime noise model.
double exact_detector_expectation(const SpacetimeCode& code, const NoiseModel& model,
                                  const PauliOperator& generator_product);

// Monte Carlo detector statistics: simulates shots of the circuit under the
// model and accumulates flips of each requested generator subset (rows of
// `subsets` index into parity.o_perp).
std::vector<std::size_t> sample_detector_flips(const SpacetimeCode& code, const NoiseModel& model,
                                               const std::vector<Gf2Vector>& subsets,
                                               std::size_t shots, std::uint64_t seed,
                                               int threads = 0);

}  // namespace synlearn
