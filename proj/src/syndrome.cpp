#include "synlearn/syndrome.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>
#include <thread>

namespace synlearn {

double SyndromeDataset::expectation(std::size_t tracked_index) const {
    if (shots == 0) throw std::runtime_error("empty dataset has no expectations");
    return 1.0 - 2.0 * static_cast<double>(flip_counts.at(tracked_index)) / static_cast<double>(shots);
}

std::vector<double> SyndromeDataset::expectations() const {
    std::vector<double> out(tracked.size());
    for (std::size_t i = 0; i < tracked.size(); ++i) out[i] = expectation(i);
    return out;
}

std::string SyndromeDataset::to_json() const {
    nlohmann::json j;
    j["shots"] = shots;
    j["n"] = tracked.empty() ? 0 : tracked.front().num_qubits();
    std::vector<nlohmann::json> entries;
    for (std::size_t i = 0; i < tracked.size(); ++i)
        entries.push_back({{"stabilizer", tracked[i].to_sparse_string()}, {"flips", flip_counts[i]}});
    j["tracked"] = entries;
    return j.dump(2);
}

SyndromeDataset SyndromeDataset::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SyndromeDataset ds;
    ds.shots = j.at("shots").get<std::size_t>();
    std::size_t n = j.at("n").get<std::size_t>();
    for (const auto& entry : j.at("tracked")) {
        std::string s = entry.at("stabilizer").get<std::string>();
        ds.flip_counts.push_back(entry.at("flips").get<std::size_t>());
        ds.tracked.push_back(PauliOperator::parse(s, n));
    }
    return ds;
}

std::string SyndromeDataset::to_csv() const {
    if (bits.empty() && shots > 0) throw std::runtime_error("per-shot bits were not retained");
    std::ostringstream out;
    for (std::size_t i = 0; i < tracked.size(); ++i) out << (i ? "," : "") << tracked[i].to_sparse_string();
    out << "\n";
    for (const auto& row : bits) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << (row[i] ? 1 : 0);
        out << "\n";
    }
    return out.str();
}

std::vector<double> exact_expectations(const SubsystemCode& code, const NoiseModel& model,
                                       const std::vector<PauliOperator>& stabilizer_subset) {
    if (model.num_qubits() != code.n) throw std::invalid_argument("model dimension mismatch");
    std::vector<double> out;
    out.reserve(stabilizer_subset.size());
    for (const auto& m : stabilizer_subset) {
        if (!in_pauli_span(m, code.measured_gens))
            throw std::invalid_argument("element is not in the measured subgroup");
        out.push_back(model.total_eigenvalue(m));
    }
    return out;
}

SyndromeDataset sample_syndromes(const SubsystemCode& code, const NoiseModel& model, std::size_t shots,
                                 const std::vector<PauliOperator>& tracked, std::uint64_t seed,
                                 int threads) {
    if (model.num_qubits() != code.n) throw std::invalid_argument("model dimension mismatch");
    for (const auto& m : tracked)
        if (!in_pauli_span(m, code.measured_gens))
            throw std::invalid_argument("tracked element is not in the measured subgroup");

    SyndromeDataset ds;
    ds.shots = shots;
    ds.tracked = tracked;
    ds.flip_counts.assign(tracked.size(), 0);
    const bool keep_bits = shots > 0 && shots < kBitMatrixShotLimit && tracked.size() <= 256;
    if (keep_bits) ds.bits.assign(shots, std::vector<bool>(tracked.size(), false));

    unsigned hw = std::thread::hardware_concurrency();
    std::size_t num_threads = threads > 0 ? static_cast<std::size_t>(threads) : (hw ? hw : 1);
    if (num_threads > 1 && shots < 4096) num_threads = 1;

    std::vector<std::vector<std::size_t>> partial(num_threads,
                                                  std::vector<std::size_t>(tracked.size(), 0));
    auto worker = [&](std::size_t tid) {
        auto& counts = partial[tid];
        for (std::size_t shot = tid; shot < shots; shot += num_threads) {
            // The commutator with each tracked element is computed directly
            // from the sampled error, so tracked products need no rederivation.
            PauliOperator err = model.sample_error(seed, shot);
            for (std::size_t i = 0; i < tracked.size(); ++i) {
                int flip = binary_commutator(err, tracked[i]);
                counts[i] += static_cast<std::size_t>(flip);
                if (keep_bits) ds.bits[shot][i] = flip;
            }
        }
    };
    if (num_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < num_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& counts : partial)
        for (std::size_t i = 0; i < tracked.size(); ++i) ds.flip_counts[i] += counts[i];
    return ds;
}

}  // namespace synlearn
