#pragma once

#include <string>
#include <vector>

#include "synlearn/gf2.hpp"
#include "synlearn/pauli.hpp"

namespace synlearn {

// Bit vector of commutators with the measured generators.
struct Syndrome {
    Gf2Vector bits;

    bool trivial() const { return bits.is_zero(); }
    bool operator==(const Syndrome& other) const { return bits == other.bits; }
};

// A stabilizer/subsystem code with an explicitly measured subgroup.
// measured_gens defaults to all stabilizer generators.
struct SubsystemCode {
    std::size_t n = 0;
    std::vector<PauliOperator> stabilizer_gens;
    std::vector<PauliOperator> measured_gens;
    std::vector<PauliOperator> logical_x;
    std::vector<PauliOperator> logical_z;
    std::vector<PauliOperator> gauge_gens;

    std::size_t num_measured() const { return measured_gens.size(); }

    // Structural checks: generators commute, measured lies in the stabilizer
    // span, logical operators commute with the stabilizers, and each
    // generator list is GF(2)-independent.
    void validate() const;

    Syndrome syndrome_of(const PauliOperator& error) const;
};

// Canonical code builders. Supported names: repetition, steane,
// rotated_surface, five_qubit, color_832, bivariate_bicycle.
SubsystemCode named_code(const std::string& name, const std::vector<int>& params = {});

SubsystemCode repetition_code(std::size_t n);       // X-basis: <X1X2, X2X3, ...>
SubsystemCode steane_code();
SubsystemCode rotated_surface_code(std::size_t d);  // row-major qubits 1..d^2
SubsystemCode five_qubit_code();
SubsystemCode color_832_code();
SubsystemCode bivariate_bicycle_code();             // [[72,12,6]], A=x^3+y+y^2, B=y^3+x+x^2

// Minimum weight of any nonidentity element of N(S), by incremental-weight
// search. Brute-force oracle; requires n <= 25 and gives up beyond max_weight.
std::size_t pure_distance(const SubsystemCode& code, std::size_t max_weight = 6);

// Code definition file (JSON): {n, stabilizers, measured, logical_x, logical_z}.
std::string code_to_json(const SubsystemCode& code);
SubsystemCode code_from_json(const std::string& text);

}  // namespace synlearn
