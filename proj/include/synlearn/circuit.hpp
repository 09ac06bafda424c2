#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synlearn/gf2.hpp"
#include "synlearn/pauli.hpp"

namespace synlearn {

enum class GateKind { H, S, X, Y, Z, CNOT, CZ, SWAP, MeasurePauli, PrepareZero, Idle };

const char* gate_name(GateKind kind);
GateKind gate_from_name(const std::string& name);

// One indivisible operation at one layer. qubits: 1 entry for single-qubit
// kinds, 2 for CNOT/CZ/SWAP (control first), the measured support for
// MeasurePauli.
struct Location {
    GateKind kind = GateKind::Idle;
    std::vector<std::size_t> qubits;
    PauliOperator pauli;  // MeasurePauli only, over all n qubits

    static Location gate1(GateKind k, std::size_t q) { return {k, {q}, {}}; }
    static Location gate2(GateKind k, std::size_t a, std::size_t b) { return {k, {a, b}, {}}; }
    static Location measure(PauliOperator p);
    static Location prepare_zero(std::size_t q) { return {GateKind::PrepareZero, {q}, {}}; }
    static Location idle(std::size_t q) { return {GateKind::Idle, {q}, {}}; }
};

using Layer = std::vector<Location>;

// Layered Clifford circuit with a stabilizer-code input. Layers are 1-based
// in the time coordinate: gate layer t sits between spacetime qubit layers
// t-0.5 and t+0.5; arguments named tau index the qubit layers 0..T
// (tau = t - 0.5 + 0.5 maps to "after layer tau").
struct CliffordCircuit {
    std::size_t n = 0;
    std::vector<Layer> layers;
    std::vector<PauliOperator> initial_stabilizers;
    std::vector<PauliOperator> initial_destabilizers;  // leave empty to derive
    std::vector<PauliOperator> initial_logical_x;
    std::vector<PauliOperator> initial_logical_z;

    std::size_t depth() const { return layers.size(); }
    std::size_t num_spacetime_qubits() const { return n * (depth() + 1); }
    std::size_t num_measurements() const;

    // Disjoint supports within each layer, tableau pairings, index ranges.
    void validate() const;
    // Append Idle locations so every (qubit, layer) is covered by a location.
    void fill_idle();
    // Compute initial_destabilizers (and logical pairs when missing).
    void complete_tableau();

    std::size_t spacetime_index(std::size_t q, std::size_t tau) const { return tau * n + q; }

    std::string to_json() const;
    static CliffordCircuit from_json(const std::string& text);
};

// Phase-free conjugation of op from "after layer from_tau" to "after layer
// to_tau"; measurements and preparations act as identity on propagation.
PauliOperator propagate(const PauliOperator& op, std::size_t from_tau, std::size_t to_tau,
                        const CliffordCircuit& circuit);

// Parity checks of the measurement record plus measured-logical index sets.
// Slot space: s initial-stabilizer slots (virtual measurements at t=0,
// value 0 by convention) followed by the m circuit measurements in temporal
// order.
struct ParityStructure {
    struct Entry {
        PauliOperator op;    // measured Pauli (initial stabilizers at t=0)
        std::size_t layer;   // 0 for initial stabilizers
    };
    std::vector<Entry> operators;         // length s + m
    std::size_t num_initial = 0;          // s
    std::vector<Gf2Vector> o_perp;        // parity checks u
    std::vector<int> o_perp_offsets;      // deterministic noiseless value of u . o
    std::vector<Gf2Vector> k_logical;     // measured-logical index vectors u^L
    std::vector<int> k_logical_offsets;   // frame offset of u^L . o

    std::size_t num_measurements() const { return operators.size() - num_initial; }
    // Raw parity u . o for a full slot vector [0^s | outcomes].
    int check_value(const Gf2Vector& u, const std::vector<std::uint8_t>& outcomes) const;
    // Detector value: raw parity of check i minus its noiseless offset.
    int detector_value(std::size_t i, const std::vector<std::uint8_t>& outcomes) const {
        return check_value(o_perp[i], outcomes) ^ o_perp_offsets[i];
    }
    int logical_value(std::size_t i, const std::vector<std::uint8_t>& outcomes) const {
        return check_value(k_logical[i], outcomes) ^ k_logical_offsets[i];
    }
};

// Online tableau reduction over the measurement sequence: classifies each
// measurement as a destabilizer / logical / stabilizer measurement, updating
// the (stabilizer, destabilizer, logical) rows and their outcome-provenance
// vectors, and emits a parity check or logical index vector accordingly.
ParityStructure build_parity_structure(const CliffordCircuit& circuit);

// Full stabilizer simulation of one shot. The input state is stabilized by
// initial_stabilizers plus initial_logical_z (i.e. logical |0...0>).
// spacetime_error holds the Pauli injected before each gate layer: the
// component on qubit layer tau acts before gate layer tau+1. Outcomes of
// non-deterministic measurements are drawn from (seed, shot).
std::vector<std::uint8_t> simulate_shot(const CliffordCircuit& circuit,
                                        const PauliOperator& spacetime_error, std::uint64_t seed,
                                        std::uint64_t shot);

// Identity-error convenience overload.
std::vector<std::uint8_t> simulate_shot(const CliffordCircuit& circuit, std::uint64_t seed,
                                        std::uint64_t shot);

// Named experiment circuits.

// r rounds of a 3-layer extraction of X1X2 on the 3-qubit X-basis repetition
// code with one ancilla prepared in |+>.
CliffordCircuit repetition_ec_circuit(std::size_t rounds);

// Rotated-surface-code memory circuit: |0_L> data, one |0> ancilla per
// plaquette, `rounds` rounds of 7-layer syndrome extraction (no ancilla
// reset between rounds), then a transversal Z readout of the data qubits.
CliffordCircuit surface_ec_circuit(std::size_t distance, std::size_t rounds);

// Random gate layers (H,S,CNOT,CZ,SWAP) on |0^n> with optional single-qubit
// Z measurements sprinkled in; used by property tests.
CliffordCircuit random_clifford_circuit(std::size_t n, std::size_t depth, std::uint64_t seed,
                                        double measure_prob = 0.15);

}  // namespace synlearn
