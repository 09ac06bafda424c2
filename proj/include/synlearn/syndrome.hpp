#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synlearn/code.hpp"
#include "synlearn/noise.hpp"

namespace synlearn {

// Syndrome statistics for a set of tracked stabilizer elements, in the
// channel-coding setting: one error draw, one perfect readout per shot.
// Below the streaming threshold the per-shot bits are kept for debugging;
// above it only running parity counters are stored.
struct SyndromeDataset {
    std::size_t shots = 0;
    std::vector<PauliOperator> tracked;
    std::vector<std::size_t> flip_counts;           // one per tracked element
    std::vector<std::vector<bool>> bits;            // [shot][tracked], small N only

    // Empirical expectation 1 - 2 * flips / N.
    double expectation(std::size_t tracked_index) const;
    std::vector<double> expectations() const;

    std::string to_json() const;
    static SyndromeDataset from_json(const std::string& text);
    // CSV of per-shot bits; requires the bit matrix.
    std::string to_csv() const;
};

inline constexpr std::size_t kBitMatrixShotLimit = 1000000;

// Exact Lambda(M) for elements of the measured group, via the eigenvalue
// factorization; no sampling. Elements must lie in the span of measured_gens.
std::vector<double> exact_expectations(const SubsystemCode& code, const NoiseModel& model,
                                       const std::vector<PauliOperator>& stabilizer_subset);

// Monte Carlo syndrome statistics for the tracked elements, sharded over
// threads; the result does not depend on the shard count.
SyndromeDataset sample_syndromes(const SubsystemCode& code, const NoiseModel& model, std::size_t shots,
                                 const std::vector<PauliOperator>& tracked, std::uint64_t seed,
                                 int threads = 0);

}  // namespace synlearn
