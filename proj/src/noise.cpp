#include "synlearn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "synlearn/rng.hpp"

#include <json.hpp>

namespace synlearn {

void LocalChannel::validate() const {
    if (support.size() == 0) throw std::invalid_argument("channel support is empty");
    if (probs.size() != pow4(support.size()))
        throw std::invalid_argument("channel probability vector has wrong length");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("channel probability is negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("channel probabilities do not sum to 1");
}

bool LocalChannel::satisfies_assumption1() const {
    if (probs.empty() || probs[0] <= 0.5) return false;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] <= 0.0) return false;
    return true;
}

std::vector<double> LocalChannel::eigenvalues() const {
    return walsh_hadamard_copy(probs);
}

NoiseModel::NoiseModel(std::size_t n, std::vector<LocalChannel> channels)
    : n_(n), channels_(std::move(channels)) {
    std::stable_sort(channels_.begin(), channels_.end(),
                     [](const LocalChannel& a, const LocalChannel& b) { return a.support < b.support; });
    qubit_channels_.resize(n_);
    std::size_t flat = 0;
    for (std::size_t id = 0; id < channels_.size(); ++id) {
        const auto& ch = channels_[id];
        for (std::size_t q : ch.support.qubits) {
            if (q >= n_) throw std::invalid_argument("channel support outside the qubit range");
            qubit_channels_[q].push_back(id);
        }
        channel_flat_offset_.push_back(flat);
        for (LocalPauliIndex r = 1; r < ch.probs.size(); ++r) {
            errors_.push_back({id, r});
            error_paulis_.push_back(embed(r, ch.support, n_));
            ++flat;
        }
        std::vector<double> cdf(ch.probs.size());
        std::partial_sum(ch.probs.begin(), ch.probs.end(), cdf.begin());
        cdf_.push_back(std::move(cdf));
        eigenvalues_.push_back(ch.eigenvalues());
    }
}

std::size_t NoiseModel::flat_index(const ErrorIndex& e) const {
    return channel_flat_offset_[e.channel_id] + e.local_rank - 1;
}

void NoiseModel::validate() const {
    for (const auto& ch : channels_) ch.validate();
}

bool NoiseModel::satisfies_assumption1() const {
    for (const auto& ch : channels_)
        if (!ch.satisfies_assumption1()) return false;
    return true;
}

double NoiseModel::total_eigenvalue(const PauliOperator& op) const {
    if (op.num_qubits() != n_) throw std::invalid_argument("operator dimension mismatch");
    // Only channels whose support meets supp(op) contribute a factor != 1.
    std::vector<std::size_t> touched;
    for (std::size_t q : op.support())
        for (std::size_t id : qubit_channels_[q]) touched.push_back(id);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    double value = 1.0;
    for (std::size_t id : touched) {
        LocalPauliIndex r = restrict_to(op, channels_[id].support);
        value *= eigenvalues_[id][r];
    }
    return value;
}

std::vector<double> NoiseModel::log_mu() const {
    std::vector<double> out;
    out.reserve(errors_.size());
    for (std::size_t id = 0; id < channels_.size(); ++id) {
        const auto& lambda = eigenvalues_[id];
        std::vector<double> log_lambda(lambda.size());
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            if (lambda[i] <= 0.0)
                throw std::domain_error("nonpositive Pauli eigenvalue; channel violates the P(I) > 1/2 assumption");
            log_lambda[i] = std::log(lambda[i]);
        }
        inverse_walsh_hadamard(log_lambda);
        for (std::size_t r = 1; r < lambda.size(); ++r) out.push_back(-2.0 * log_lambda[r]);
    }
    return out;
}

std::vector<double> NoiseModel::mu_rate_approximation() const {
    std::vector<double> lm = log_mu();
    for (auto& v : lm) v *= -0.5;
    return lm;
}

std::vector<double> NoiseModel::rates() const {
    std::vector<double> out;
    out.reserve(errors_.size());
    for (const auto& ch : channels_)
        for (LocalPauliIndex r = 1; r < ch.probs.size(); ++r) out.push_back(ch.probs[r]);
    return out;
}

NoiseModel NoiseModel::with_rates(const std::vector<double>& flat_rates) const {
    if (flat_rates.size() != errors_.size()) throw std::invalid_argument("rate vector has wrong length");
    std::vector<LocalChannel> chans = channels_;
    std::size_t flat = 0;
    for (auto& ch : chans) {
        double total = 0.0;
        for (LocalPauliIndex r = 1; r < ch.probs.size(); ++r) {
            ch.probs[r] = flat_rates[flat++];
            total += ch.probs[r];
        }
        ch.probs[0] = 1.0 - total;
    }
    return NoiseModel(n_, std::move(chans));
}

PauliOperator NoiseModel::sample_error(std::uint64_t seed, std::uint64_t shot) const {
    PauliOperator err(n_);
    for (std::size_t id = 0; id < channels_.size(); ++id) {
        double u = uniform01(seed, shot, id);
        const auto& cdf = cdf_[id];
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t r = static_cast<std::size_t>(it - cdf.begin());
        if (r >= cdf.size()) r = cdf.size() - 1;
        if (r != 0) err *= error_paulis_[channel_flat_offset_[id] + r - 1];
    }
    return err;
}

void NoiseModel::sample_local_ranks(std::uint64_t seed, std::uint64_t shot,
                                    std::vector<LocalPauliIndex>& out) const {
    out.assign(channels_.size(), 0);
    for (std::size_t id = 0; id < channels_.size(); ++id) {
        double u = uniform01(seed, shot, id);
        const auto& cdf = cdf_[id];
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t r = static_cast<std::size_t>(it - cdf.begin());
        if (r >= cdf.size()) r = cdf.size() - 1;
        out[id] = r;
    }
}

std::vector<double> NoiseModel::convolved_distribution(std::size_t max_qubits) const {
    if (n_ > max_qubits) throw std::invalid_argument("system too large for the dense convolution");
    const std::size_t size = std::size_t{1} << (2 * n_);
    std::vector<double> dist(size, 0.0);
    dist[0] = 1.0;
    std::vector<double> next(size, 0.0);
    for (std::size_t id = 0; id < channels_.size(); ++id) {
        const auto& ch = channels_[id];
        // Global index (base-4 digit string) of every local error; products of
        // Paulis are XORs of these indices.
        std::vector<std::size_t> global(ch.probs.size(), 0);
        for (LocalPauliIndex r = 1; r < ch.probs.size(); ++r) {
            const PauliOperator& p = error_paulis_[channel_flat_offset_[id] + r - 1];
            std::size_t g = 0;
            for (std::size_t q = 0; q < n_; ++q)
                g = (g << 2) | static_cast<std::size_t>(pauli_digit(p.x(q), p.z(q)));
            global[r] = g;
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t e = 0; e < size; ++e) {
            double pe = dist[e];
            if (pe == 0.0) continue;
            for (std::size_t r = 0; r < ch.probs.size(); ++r) next[e ^ global[r]] += pe * ch.probs[r];
        }
        dist.swap(next);
    }
    return dist;
}

LocalChannel depolarizing1_channel(std::size_t qubit, double rate) {
    LocalChannel ch;
    ch.support = Support{qubit};
    ch.probs = {1.0 - rate, rate / 3.0, rate / 3.0, rate / 3.0};
    return ch;
}

LocalChannel depolarizing2_channel(std::size_t q0, std::size_t q1, double rate) {
    LocalChannel ch;
    ch.support = Support{q0, q1};
    ch.probs.assign(16, rate / 15.0);
    ch.probs[0] = 1.0 - rate;
    return ch;
}

LocalChannel biased_channel(std::size_t qubit, double rate) {
    LocalChannel ch;
    ch.support = Support{qubit};
    ch.probs = {1.0 - rate, rate * 0.1, rate * 0.1, rate * 0.8};
    return ch;
}

LocalChannel single_error_channel(const Support& support, LocalPauliIndex rank, double rate) {
    if (rank == 0 || rank >= pow4(support.size()))
        throw std::invalid_argument("single-error rank out of range");
    LocalChannel ch;
    ch.support = support;
    ch.probs.assign(pow4(support.size()), 0.0);
    ch.probs[0] = 1.0 - rate;
    ch.probs[rank] = rate;
    return ch;
}

LocalChannel uniform_channel(const Support& support, double rate) {
    LocalChannel ch;
    ch.support = support;
    const std::size_t m = pow4(support.size());
    ch.probs.assign(m, rate / static_cast<double>(m - 1));
    ch.probs[0] = 1.0 - rate;
    return ch;
}

LocalChannel gaussian_channel(const Support& support, double mean, double sigma, std::uint64_t seed,
                              std::uint64_t stream) {
    LocalChannel ch;
    ch.support = support;
    const std::size_t m = pow4(support.size());
    ch.probs.assign(m, 0.0);
    double total = 0.0;
    for (std::size_t r = 1; r < m; ++r) {
        double p = mean + sigma * normal01(seed, stream, r);
        if (p < kRateClip) p = kRateClip;
        ch.probs[r] = p;
        total += p;
    }
    ch.probs[0] = 1.0 - total;
    return ch;
}

NoiseModel gaussian_single_qubit_model(std::size_t n, double mean, double sigma, std::uint64_t seed) {
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < n; ++q) chans.push_back(gaussian_channel(Support{q}, mean, sigma, seed, q));
    return NoiseModel(n, std::move(chans));
}

std::string noise_to_json(const NoiseModel& model) {
    nlohmann::json j;
    j["n"] = model.num_qubits();
    std::vector<nlohmann::json> chans;
    for (const auto& ch : model.channels())
        chans.push_back({{"support", ch.support.qubits}, {"probs", ch.probs}});
    j["channels"] = chans;
    return j.dump(2);
}

NoiseModel noise_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::size_t n = j.at("n").get<std::size_t>();
    std::vector<LocalChannel> chans;
    for (const auto& entry : j.at("channels")) {
        Support support(entry.at("support").get<std::vector<std::size_t>>());
        if (entry.contains("probs")) {
            LocalChannel ch;
            ch.support = support;
            ch.probs = entry.at("probs").get<std::vector<double>>();
            ch.validate();
            chans.push_back(std::move(ch));
            continue;
        }
        std::string preset = entry.at("preset").get<std::string>();
        double rate = entry.value("rate", 0.0);
        if (preset == "depolarizing1") {
            chans.push_back(depolarizing1_channel(support.qubits.at(0), rate));
        } else if (preset == "depolarizing2") {
            chans.push_back(depolarizing2_channel(support.qubits.at(0), support.qubits.at(1), rate));
        } else if (preset == "biased") {
            chans.push_back(biased_channel(support.qubits.at(0), rate));
        } else if (preset == "single_error") {
            chans.push_back(single_error_channel(support, entry.at("rank").get<std::size_t>(), rate));
        } else if (preset == "uniform") {
            chans.push_back(uniform_channel(support, rate));
        } else if (preset == "gaussian") {
            chans.push_back(gaussian_channel(support, entry.at("mean").get<double>(),
                                             entry.value("gaussian_sigma", 0.0),
                                             entry.value("seed", std::uint64_t{0}),
                                             entry.value("stream", std::uint64_t{0})));
        } else {
            throw std::invalid_argument("unknown channel preset: " + preset);
        }
    }
    return NoiseModel(n, std::move(chans));
}

NoiseModel gaussian_independent_model(std::size_t n, double mean, double sigma, std::uint64_t seed) {
    std::vector<LocalChannel> chans;
    for (std::size_t q = 0; q < n; ++q) {
        for (LocalPauliIndex r = 1; r <= 3; ++r) {
            double p = mean + sigma * normal01(seed, q, r);
            if (p < kRateClip) p = kRateClip;
            chans.push_back(single_error_channel(Support{q}, r, p));
        }
    }
    return NoiseModel(n, std::move(chans));
}

}  // namespace synlearn
