#include "synlearn/logical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "synlearn/rng.hpp"

namespace synlearn {

SignatureMap::SignatureMap(std::vector<PauliOperator> measured_gens,
                           std::vector<PauliOperator> measured_logicals, const NoiseModel& model)
    : gens_(std::move(measured_gens)), logicals_(std::move(measured_logicals)) {
    if (gens_.size() > 64 || logicals_.size() > 64)
        throw std::invalid_argument("signature packing supports up to 64 bits per part");
    per_error_.reserve(model.num_errors());
    for (std::size_t e = 0; e < model.num_errors(); ++e)
        per_error_.push_back(of_pauli(model.error_pauli(e)));
}

LogicalSignature SignatureMap::of_pauli(const PauliOperator& p) const {
    LogicalSignature sig;
    for (std::size_t i = 0; i < gens_.size(); ++i)
        if (binary_commutator(p, gens_[i])) sig.syndrome |= (std::uint64_t{1} << i);
    for (std::size_t i = 0; i < logicals_.size(); ++i)
        if (binary_commutator(p, logicals_[i])) sig.logical |= (std::uint64_t{1} << i);
    return sig;
}

LogicalSignature SignatureMap::of_draw(const std::vector<LocalPauliIndex>& ranks,
                                       const NoiseModel& model) const {
    LogicalSignature sig;
    std::size_t flat = 0;
    for (std::size_t id = 0; id < ranks.size(); ++id) {
        std::size_t count = model.channel(id).probs.size() - 1;
        if (ranks[id] != 0) {
            const LogicalSignature& s = per_error_[flat + ranks[id] - 1];
            sig.syndrome ^= s.syndrome;
            sig.logical ^= s.logical;
        }
        flat += count;
    }
    return sig;
}

namespace {

// Exact distribution over signatures via the dense group convolution.
std::map<LogicalSignature, double> dense_signature_distribution(const SignatureMap& sig,
                                                                const NoiseModel& model,
                                                                std::size_t dense_limit) {
    const std::size_t n = model.num_qubits();
    if (n > dense_limit) throw std::invalid_argument("system too large for the dense path");
    auto dist = model.convolved_distribution(dense_limit);
    std::map<LogicalSignature, double> out;
    Support all;
    for (std::size_t q = 0; q < n; ++q) all.qubits.push_back(q);
    // Signatures compose by XOR over base-4 digits; walk the group in Gray
    // fashion via direct evaluation (n is small here).
    for (std::size_t g = 0; g < dist.size(); ++g) {
        if (dist[g] == 0.0) continue;
        PauliOperator p(n);
        std::size_t rest = g;
        for (std::size_t q = n; q-- > 0;) {
            int digit = static_cast<int>(rest & 3);
            rest >>= 2;
            p.set_x(q, digit == 1 || digit == 2);
            p.set_z(q, digit == 2 || digit == 3);
        }
        out[sig.of_pauli(p)] += dist[g];
    }
    return out;
}

double wilson_half_width(double p_hat, double n) {
    const double z = 1.959963984540054;  // 95%
    double denom = 1.0 + z * z / n;
    double half = (z / denom) * std::sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n));
    return half;
}

// Enumerate fault sets up to `cap` firing channels; calls visit(signature,
// probability) for each, probabilities exact including the idle factors.
template <typename Visit>
double enumerate_fault_sets(const SignatureMap& sig, const NoiseModel& model, std::size_t cap,
                            Visit&& visit) {
    const std::size_t num_channels = model.channels().size();
    std::vector<double> identity_prob(num_channels);
    std::vector<std::size_t> offset(num_channels);
    double base = 1.0;
    std::size_t flat = 0;
    for (std::size_t id = 0; id < num_channels; ++id) {
        identity_prob[id] = model.channel(id).probs[0];
        offset[id] = flat;
        flat += model.channel(id).probs.size() - 1;
        base *= identity_prob[id];
    }
    if (base == 0.0) throw std::invalid_argument("weight-capped enumeration needs P(I) > 0 everywhere");
    double covered = 0.0;
    // Depth-first over channels with an error budget.
    struct Frame {
        std::size_t channel;
        std::size_t budget;
        double prob;
        LogicalSignature s;
    };
    std::vector<Frame> stack;
    stack.push_back({0, cap, base, {}});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.channel == num_channels) {
            visit(f.s, f.prob);
            covered += f.prob;
            continue;
        }
        if (f.budget == 0) {
            // Remaining channels stay silent; their identity factors are
            // already inside f.prob.
            visit(f.s, f.prob);
            covered += f.prob;
            continue;
        }
        // Channel stays silent.
        stack.push_back({f.channel + 1, f.budget, f.prob, f.s});
        // Channel fires one of its errors.
        const auto& ch = model.channel(f.channel);
        for (std::size_t r = 1; r < ch.probs.size(); ++r) {
            if (ch.probs[r] == 0.0) continue;
            Frame g = f;
            g.channel = f.channel + 1;
            g.budget = f.budget - 1;
            g.prob = f.prob / identity_prob[f.channel] * ch.probs[r];
            const LogicalSignature& es = sig.of_error(offset[f.channel] + r - 1);
            g.s.syndrome ^= es.syndrome;
            g.s.logical ^= es.logical;
            stack.push_back(g);
        }
    }
    return covered;
}

}  // namespace

LookupMleDecoder::LookupMleDecoder(const SignatureMap& sig, const NoiseModel& model,
                                   std::size_t dense_qubit_limit, std::size_t weight_cap) {
    std::map<std::uint64_t, std::map<std::uint64_t, double>> mass;
    if (model.num_qubits() <= dense_qubit_limit) {
        for (const auto& [s, p] : dense_signature_distribution(sig, model, dense_qubit_limit))
            mass[s.syndrome][s.logical] += p;
    } else {
        enumerate_fault_sets(sig, model, weight_cap, [&mass](const LogicalSignature& s, double p) {
            mass[s.syndrome][s.logical] += p;
        });
    }
    for (const auto& [syndrome, classes] : mass) {
        std::uint64_t best = 0;
        double best_mass = -1.0;
        for (const auto& [l, p] : classes) {
            if (p > best_mass) {
                best_mass = p;
                best = l;
            }
        }
        table_[syndrome] = best;
    }
}

std::uint64_t LookupMleDecoder::decode(std::uint64_t syndrome) const {
    auto it = table_.find(syndrome);
    return it == table_.end() ? 0 : it->second;
}

MinWeightDecoder::MinWeightDecoder(const SignatureMap& sig, const NoiseModel& model)
    : bits_(sig.syndrome_bits()) {
    if (bits_ > 26) throw std::invalid_argument("syndrome space too large for the dense BFS decoder");
    const std::size_t size = std::size_t{1} << bits_;
    dist_.assign(size, 0xff);
    logical_.assign(size, 0);
    dist_[0] = 0;
    std::vector<std::uint32_t> frontier = {0};
    while (!frontier.empty()) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t s : frontier) {
            std::uint8_t d = dist_[s];
            for (std::size_t e = 0; e < model.num_errors(); ++e) {
                LogicalSignature es = sig.of_error(e);
                std::uint32_t t = s ^ static_cast<std::uint32_t>(es.syndrome);
                if (dist_[t] != 0xff) continue;
                dist_[t] = static_cast<std::uint8_t>(d + 1);
                logical_[t] = static_cast<std::uint8_t>(logical_[s] ^ es.logical);
                next.push_back(t);
            }
        }
        frontier = std::move(next);
    }
}

std::uint64_t MinWeightDecoder::decode(std::uint64_t syndrome) const {
    if (syndrome >= dist_.size() || dist_[syndrome] == 0xff) return 0;
    return logical_[syndrome];
}

LogicalClassDistribution logical_class_probabilities(const SignatureMap& sig, const NoiseModel& model,
                                                     const LogicalClassOptions& options) {
    LogicalClassDistribution out;
    if (options.mc_shots == 0 && model.num_qubits() <= options.dense_qubit_limit) {
        out.method = "exhaustive";
        out.probability = dense_signature_distribution(sig, model, options.dense_qubit_limit);
        return out;
    }
    if (options.mc_shots == 0)
        throw std::invalid_argument("system too large for the exhaustive path; set mc_shots");
    out.method = "monte_carlo";
    std::map<LogicalSignature, std::size_t> counts;
    std::vector<LocalPauliIndex> ranks;
    for (std::size_t shot = 0; shot < options.mc_shots; ++shot) {
        model.sample_local_ranks(options.seed, shot, ranks);
        counts[sig.of_draw(ranks, model)] += 1;
    }
    double n = static_cast<double>(options.mc_shots);
    for (const auto& [s, c] : counts) {
        double p = static_cast<double>(c) / n;
        out.probability[s] = p;
        out.ci_half[s] = wilson_half_width(p, n);
    }
    return out;
}

FaultToleranceResult check_fault_tolerance(const SignatureMap& sig, const NoiseModel& model) {
    FaultToleranceResult result;
    std::map<std::uint64_t, std::size_t> first_with_syndrome;
    for (std::size_t e = 0; e < model.num_errors(); ++e) {
        LogicalSignature s = sig.of_error(e);
        if (s.syndrome == 0 && s.logical != 0) {
            result.tolerant = false;
            result.violating_pair = {model.error_pauli(e), PauliOperator(model.num_qubits())};
            return result;
        }
        auto [it, inserted] = first_with_syndrome.try_emplace(s.syndrome, e);
        if (!inserted) {
            LogicalSignature other = sig.of_error(it->second);
            if (other.logical != s.logical) {
                result.tolerant = false;
                result.violating_pair = {model.error_pauli(it->second), model.error_pauli(e)};
                return result;
            }
        }
    }
    return result;
}

LogicalErrorReport estimate_p_fail(const SignatureMap& sig, const NoiseModel& model,
                                   const Decoder& decoder, const PFailOptions& options) {
    const std::size_t m_l = sig.logical_bits();
    if (m_l > 20) throw std::invalid_argument("too many logical bits for a dense report");
    LogicalErrorReport report;
    report.decoder = decoder.name();
    report.identifiable = check_fault_tolerance(sig, model).tolerant;
    report.p_fail.assign(std::size_t{1} << m_l, 0.0);

    if (options.method == PFailOptions::Method::Exhaustive) {
        if (model.num_qubits() <= options.dense_qubit_limit) {
            report.method = "exhaustive";
            for (const auto& [s, p] : dense_signature_distribution(sig, model, options.dense_qubit_limit))
                report.p_fail[s.logical ^ decoder.decode(s.syndrome)] += p;
        } else {
            report.method = "weight_capped";
            double covered =
                enumerate_fault_sets(sig, model, options.weight_cap,
                                     [&](const LogicalSignature& s, double p) {
                                         report.p_fail[s.logical ^ decoder.decode(s.syndrome)] += p;
                                     });
            report.truncated_mass = std::max(0.0, 1.0 - covered);
        }
        return report;
    }

    report.method = "monte_carlo";
    const std::size_t shots = options.mc_shots;
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t num_threads = options.threads > 0 ? static_cast<std::size_t>(options.threads)
                                                  : (hw ? hw : 1);
    if (num_threads > 1 && shots < 4096) num_threads = 1;
    std::vector<std::vector<std::size_t>> partial(num_threads,
                                                  std::vector<std::size_t>(report.p_fail.size(), 0));
    auto worker = [&](std::size_t tid) {
        std::vector<LocalPauliIndex> ranks;
        auto& counts = partial[tid];
        for (std::size_t shot = tid; shot < shots; shot += num_threads) {
            model.sample_local_ranks(options.seed, shot, ranks);
            LogicalSignature s = sig.of_draw(ranks, model);
            counts[s.logical ^ decoder.decode(s.syndrome)] += 1;
        }
    };
    if (num_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < num_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    report.ci_half.assign(report.p_fail.size(), 0.0);
    for (std::size_t f = 0; f < report.p_fail.size(); ++f) {
        std::size_t c = 0;
        for (const auto& counts : partial) c += counts[f];
        report.p_fail[f] = static_cast<double>(c) / static_cast<double>(shots);
        report.ci_half[f] = wilson_half_width(report.p_fail[f], static_cast<double>(shots));
    }
    return report;
}

FidelityEstimate logical_fidelity(const std::vector<double>& p_fail,
                                  const std::vector<FidelityTerm>& terms, std::size_t k) {
    FidelityEstimate est;
    est.complete_basis = terms.size() == (std::size_t{1} << k);
    double total = 0.0;
    for (const auto& term : terms) {
        double corrected = 0.0;
        for (std::size_t f = 0; f < p_fail.size(); ++f) {
            int sign = std::popcount(term.alpha & static_cast<std::uint64_t>(f)) % 2 ? -1 : 1;
            corrected += sign * p_fail[f];
        }
        total += corrected * term.ideal * term.ideal;
    }
    est.value = total / static_cast<double>(std::size_t{1} << k);
    return est;
}

}  // namespace synlearn
