#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synlearn/gf2.hpp"
#include "synlearn/noise.hpp"
#include "synlearn/pauli.hpp"

namespace synlearn {

// Packed (syndrome, logical) signature of an error: bit i of `syndrome` is
// the commutator with the i-th measured generator, bit i of `logical` the
// commutator with the i-th measured logical. Signatures compose by XOR.
struct LogicalSignature {
    std::uint64_t syndrome = 0;
    std::uint64_t logical = 0;

    bool operator==(const LogicalSignature& o) const {
        return syndrome == o.syndrome && logical == o.logical;
    }
    bool operator<(const LogicalSignature& o) const {
        return syndrome != o.syndrome ? syndrome < o.syndrome : logical < o.logical;
    }
};

// Signature evaluation for a fixed generator/logical set (both <= 64 bits).
class SignatureMap {
  public:
    SignatureMap(std::vector<PauliOperator> measured_gens, std::vector<PauliOperator> measured_logicals,
                 const NoiseModel& model);

    std::size_t syndrome_bits() const { return gens_.size(); }
    std::size_t logical_bits() const { return logicals_.size(); }
    const std::vector<PauliOperator>& generators() const { return gens_; }
    const std::vector<PauliOperator>& logicals() const { return logicals_; }

    LogicalSignature of_error(std::size_t flat) const { return per_error_[flat]; }
    LogicalSignature of_pauli(const PauliOperator& p) const;
    // Signature of a sampled channel outcome (local ranks per channel).
    LogicalSignature of_draw(const std::vector<LocalPauliIndex>& ranks, const NoiseModel& model) const;

  private:
    std::vector<PauliOperator> gens_;
    std::vector<PauliOperator> logicals_;
    std::vector<LogicalSignature> per_error_;
};

// decode(syndrome) -> logical class bits.
class Decoder {
  public:
    virtual ~Decoder() = default;
    virtual std::uint64_t decode(std::uint64_t syndrome) const = 0;
    virtual std::string name() const = 0;
};

// Always returns the trivial class.
class TrivialDecoder : public Decoder {
  public:
    std::uint64_t decode(std::uint64_t) const override { return 0; }
    std::string name() const override { return "trivial"; }
};

// Most likely logical class per syndrome under a reference noise model.
// Exhausts the full Pauli group for small systems, otherwise enumerates fault
// sets up to a weight cap.
class LookupMleDecoder : public Decoder {
  public:
    LookupMleDecoder(const SignatureMap& sig, const NoiseModel& model, std::size_t dense_qubit_limit = 10,
                     std::size_t weight_cap = 2);
    std::uint64_t decode(std::uint64_t syndrome) const override;
    std::string name() const override { return "lookup_mle"; }

  private:
    std::map<std::uint64_t, std::uint64_t> table_;
};

// Logical class of a minimum-weight fault set reaching the syndrome, by
// breadth-first search over the syndrome space (needs <= 26 syndrome bits).
class MinWeightDecoder : public Decoder {
  public:
    MinWeightDecoder(const SignatureMap& sig, const NoiseModel& model);
    std::uint64_t decode(std::uint64_t syndrome) const override;
    std::string name() const override { return "min_weight"; }

  private:
    std::size_t bits_;
    std::vector<std::uint8_t> dist_;
    std::vector<std::uint8_t> logical_;
};

// P-bar over signature cosets.
struct LogicalClassDistribution {
    std::map<LogicalSignature, double> probability;
    std::map<LogicalSignature, double> ci_half;  // Monte Carlo only
    std::string method;
};

struct LogicalClassOptions {
    std::size_t dense_qubit_limit = 10;  // full convolution budget
    std::size_t mc_shots = 0;            // > 0 forces the Monte Carlo path
    std::uint64_t seed = 1;
};

LogicalClassDistribution logical_class_probabilities(const SignatureMap& sig, const NoiseModel& model,
                                                     const LogicalClassOptions& options = {});

// Fault-tolerance check per the pruned pair condition: undetectable single
// errors must be logically trivial, and same-syndrome errors must share their
// logical signature.
struct FaultToleranceResult {
    bool tolerant = true;
    std::optional<std::pair<PauliOperator, PauliOperator>> violating_pair;
};

FaultToleranceResult check_fault_tolerance(const SignatureMap& sig, const NoiseModel& model);

struct LogicalErrorReport {
    std::vector<double> p_fail;    // indexed by the logical flip bits
    std::vector<double> ci_half;   // 95% Wilson half-widths (Monte Carlo)
    std::string method;
    std::string decoder;
    bool identifiable = true;
    double truncated_mass = 0.0;   // probability not covered by a weight cap
};

struct PFailOptions {
    enum class Method { Exhaustive, MonteCarlo } method = Method::MonteCarlo;
    std::size_t mc_shots = 1000000;
    std::uint64_t seed = 1;
    std::size_t dense_qubit_limit = 10;
    std::size_t weight_cap = 4;  // exhaustive fallback for larger systems
    int threads = 0;
};

LogicalErrorReport estimate_p_fail(const SignatureMap& sig, const NoiseModel& model,
                                   const Decoder& decoder, const PFailOptions& options = {});

// Direct-fidelity combination: F = 2^{-k} sum_terms <L'>_corrected <L'>_ideal
// with <L'>_corrected = (sum_f (-1)^{alpha.f} P_fail(f)) <L'>_ideal.
struct FidelityTerm {
    std::uint64_t alpha = 0;     // measurement bits entering <L'>
    double ideal = 1.0;          // <L'> on the target state
};

struct FidelityEstimate {
    double value = 0.0;
    bool complete_basis = true;  // false: partial-fidelity warning
};

FidelityEstimate logical_fidelity(const std::vector<double>& p_fail,
                                  const std::vector<FidelityTerm>& terms, std::size_t k);

}  // namespace synlearn
