#include "synlearn/spacetime.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "synlearn/rng.hpp"

namespace synlearn {

namespace {

PauliOperator slice_of(const PauliOperator& spacetime_op, std::size_t tau, std::size_t n) {
    PauliOperator s(n);
    for (std::size_t q = 0; q < n; ++q) {
        s.set_x(q, spacetime_op.x(tau * n + q));
        s.set_z(q, spacetime_op.z(tau * n + q));
    }
    return s;
}

void set_slice(PauliOperator& spacetime_op, std::size_t tau, const PauliOperator& s, std::size_t n) {
    for (std::size_t q = 0; q < n; ++q) {
        spacetime_op.set_x(tau * n + q, s.x(q));
        spacetime_op.set_z(tau * n + q, s.z(q));
    }
}

}  // namespace

PauliOperator back_cumulant(const PauliOperator& spacetime_op, const CliffordCircuit& circuit) {
    const std::size_t n = circuit.n, T = circuit.depth();
    if (spacetime_op.num_qubits() != n * (T + 1))
        throw std::invalid_argument("spacetime operator dimension mismatch");
    PauliOperator out(n * (T + 1));
    PauliOperator acc(n);
    for (std::size_t tau = T + 1; tau-- > 0;) {
        if (tau < T) acc = propagate(acc, tau + 1, tau, circuit);
        acc *= slice_of(spacetime_op, tau, n);
        set_slice(out, tau, acc, n);
    }
    return out;
}

PauliOperator forward_cumulant(const PauliOperator& spacetime_op, const CliffordCircuit& circuit) {
    const std::size_t n = circuit.n, T = circuit.depth();
    if (spacetime_op.num_qubits() != n * (T + 1))
        throw std::invalid_argument("spacetime operator dimension mismatch");
    PauliOperator out(n * (T + 1));
    PauliOperator acc(n);
    for (std::size_t tau = 0; tau <= T; ++tau) {
        if (tau > 0) acc = propagate(acc, tau - 1, tau, circuit);
        acc *= slice_of(spacetime_op, tau, n);
        set_slice(out, tau, acc, n);
    }
    return out;
}

PauliOperator map_error(const std::vector<std::pair<std::size_t, PauliOperator>>& circuit_error,
                        const CliffordCircuit& circuit) {
    const std::size_t n = circuit.n, T = circuit.depth();
    PauliOperator out(n * (T + 1));
    for (const auto& [t, e] : circuit_error) {
        if (t < 1 || t > T + 1) throw std::out_of_range("error layer out of range");
        if (e.num_qubits() != n) throw std::invalid_argument("error slice dimension mismatch");
        PauliOperator merged = slice_of(out, t - 1, n) * e;
        set_slice(out, t - 1, merged, n);
    }
    return out;
}

std::vector<std::pair<std::size_t, PauliOperator>> split_error(const PauliOperator& spacetime_error,
                                                               const CliffordCircuit& circuit) {
    const std::size_t n = circuit.n, T = circuit.depth();
    std::vector<std::pair<std::size_t, PauliOperator>> out;
    for (std::size_t tau = 0; tau <= T; ++tau) {
        PauliOperator s = slice_of(spacetime_error, tau, n);
        if (!s.is_identity()) out.emplace_back(tau + 1, std::move(s));
    }
    return out;
}

void SpacetimeCode::check_support_bound() const {
    for (std::size_t g = 0; g < measured_gens.size(); ++g) {
        const auto& u = parity.o_perp[g];
        double min_t = 1e18, max_t = -1e18;
        for (std::size_t j = 0; j < parity.operators.size(); ++j) {
            if (!u.get(j)) continue;
            double tj = static_cast<double>(parity.operators[j].layer);
            min_t = std::min(min_t, tj);
            max_t = std::max(max_t, tj);
        }
        for (std::size_t idx = 0; idx < n_st; ++idx) {
            if (!measured_gens[g].x(idx) && !measured_gens[g].z(idx)) continue;
            double t = static_cast<double>(layer_of(idx)) + 0.5;
            if (!(min_t < t && t < max_t))
                throw std::logic_error("spacetime generator support escapes its measurement window");
        }
    }
}

SpacetimeCode build_spacetime_code(const CliffordCircuit& circuit, const ParityStructure& parity) {
    for (const auto& layer : circuit.layers)
        for (const auto& loc : layer)
            if (loc.kind == GateKind::PrepareZero)
                throw std::invalid_argument("spacetime mapping requires circuits without mid-circuit resets");
    SpacetimeCode code;
    code.circuit = circuit;
    code.circuit.complete_tableau();
    code.parity = parity;
    code.n_st = circuit.num_spacetime_qubits();
    const std::size_t n = circuit.n;
    const std::size_t s0 = parity.num_initial;

    auto embed_measurements = [&](const Gf2Vector& u) {
        PauliOperator flat(code.n_st);
        for (std::size_t j = s0; j < parity.operators.size(); ++j) {
            if (!u.get(j)) continue;
            const auto& entry = parity.operators[j];
            std::size_t tau = entry.layer - 1;
            PauliOperator merged = slice_of(flat, tau, n) * entry.op;
            set_slice(flat, tau, merged, n);
        }
        return back_cumulant(flat, code.circuit);
    };
    for (const auto& u : parity.o_perp) code.measured_gens.push_back(embed_measurements(u));
    for (const auto& ul : parity.k_logical) code.measured_logicals.push_back(embed_measurements(ul));
    return code;
}

ParityStructure localize_generator_basis(const ParityStructure& parity, LocalizeStrategy strategy,
                                         const CliffordCircuit& circuit) {
    const std::size_t slots = parity.operators.size();
    const std::size_t s0 = parity.num_initial;
    if (parity.o_perp.empty()) return parity;

    // Row space over the measurement slots; initial slots carry the fixed
    // value 0, so they ride along with any combination.
    Gf2Matrix meas_rows(slots - s0);
    for (const auto& u : parity.o_perp) {
        Gf2Vector r(slots - s0);
        for (std::size_t j = s0; j < slots; ++j)
            if (u.get(j)) r.set(j - s0, true);
        meas_rows.append_row(r);
    }

    auto assemble = [&](const std::vector<Gf2Vector>& coeff_rows) {
        ParityStructure out = parity;
        out.o_perp.clear();
        out.o_perp_offsets.clear();
        for (const auto& coeffs : coeff_rows) {
            Gf2Vector u(slots);
            int offset = 0;
            for (std::size_t i = 0; i < parity.o_perp.size(); ++i) {
                if (coeffs.get(i)) {
                    u ^= parity.o_perp[i];
                    offset ^= parity.o_perp_offsets[i];
                }
            }
            out.o_perp.push_back(std::move(u));
            out.o_perp_offsets.push_back(offset);
        }
        Gf2Matrix check(slots);
        for (const auto& u : out.o_perp) check.append_row(u);
        Gf2Matrix orig(slots);
        for (const auto& u : parity.o_perp) orig.append_row(u);
        if (!check.row_spans_equal(orig))
            throw std::logic_error("localized basis does not span the parity-check space");
        return out;
    };

    auto window = [&](const Gf2Vector& u) {
        long lo = LONG_MAX, hi = LONG_MIN;
        for (std::size_t j = s0; j < slots; ++j) {
            if (!u.get(j)) continue;
            long t = static_cast<long>(parity.operators[j].layer);
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        return hi >= lo ? hi - lo : 0;
    };

    if (strategy == LocalizeStrategy::GreedyWindow) {
        // Order checks by their latest measurement slot, then reduce each
        // against the chosen rows whenever that shrinks the temporal window;
        // keep rows that are independent over the measurement slots.
        std::vector<std::size_t> order(parity.o_perp.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return parity.o_perp[a].highest_set_bit() < parity.o_perp[b].highest_set_bit();
        });
        std::vector<Gf2Vector> chosen_rows;
        Gf2RankTracker tracker(slots - s0);
        for (std::size_t idx : order) {
            Gf2Vector row = parity.o_perp[idx];
            bool improved = true;
            while (improved) {
                improved = false;
                for (const auto& base : chosen_rows) {
                    Gf2Vector cand = row;
                    cand ^= base;
                    if (window(cand) < window(row)) {
                        row = std::move(cand);
                        improved = true;
                    }
                }
            }
            Gf2Vector meas(slots - s0);
            for (std::size_t j = s0; j < slots; ++j)
                if (row.get(j)) meas.set(j - s0, true);
            if (tracker.add(meas)) chosen_rows.push_back(std::move(row));
        }
        std::vector<Gf2Vector> coeff_rows;
        for (const auto& row : chosen_rows) {
            Gf2Vector meas(slots - s0);
            for (std::size_t j = s0; j < slots; ++j)
                if (row.get(j)) meas.set(j - s0, true);
            auto coeffs = meas_rows.express_in_rows(meas);
            if (!coeffs) throw std::logic_error("greedy row fell outside the check space");
            coeff_rows.push_back(*coeffs);
        }
        return assemble(coeff_rows);
    }

    // SurfaceRecipe: construct the recipe pairings explicitly. Group the
    // measurement slots by measured operator; repeated groups are the
    // per-round ancilla readouts of one stabilizer, single-occurrence slots
    // form the final transversal readout.
    std::map<std::string, std::vector<std::size_t>> groups;  // meas-slot indices, time order
    std::vector<std::string> group_of_slot(slots - s0);
    for (std::size_t j = s0; j < slots; ++j) {
        std::string key = parity.operators[j].op.to_sparse_string();
        groups[key].push_back(j - s0);
        group_of_slot[j - s0] = key;
    }
    std::vector<Gf2Vector> desired;
    for (std::size_t j = s0; j < slots; ++j) {
        std::string key = group_of_slot[j - s0];
        const auto& occ = groups[key];
        if (occ.size() < 2) continue;  // final readout slots handled below
        std::size_t r = static_cast<std::size_t>(
            std::find(occ.begin(), occ.end(), j - s0) - occ.begin());
        Gf2Vector want(slots - s0);
        want.set(occ[r], true);
        // Rounds 1 and 2 pair with initial stabilizer values only; later
        // rounds pair with the same ancilla two rounds earlier (no reset).
        if (r >= 2) want.set(occ[r - 2], true);
        desired.push_back(std::move(want));
    }
    // Checks involving a single-occurrence (transversal readout) slot: keep
    // the emitted pairing but verify it couples the readout with the last
    // two rounds of exactly one repeated group.
    for (const auto& u : parity.o_perp) {
        Gf2Vector meas(slots - s0);
        bool has_single = false;
        for (std::size_t j = s0; j < slots; ++j) {
            if (!u.get(j)) continue;
            meas.set(j - s0, true);
            if (groups[group_of_slot[j - s0]].size() < 2) has_single = true;
        }
        if (!has_single) continue;
        std::vector<std::string> repeated_keys;
        for (std::size_t j : meas.ones()) {
            const auto& occ = groups[group_of_slot[j]];
            if (occ.size() < 2) continue;
            repeated_keys.push_back(group_of_slot[j]);
            std::size_t last = occ.size();
            bool in_tail = (j == occ[last - 1]) || (last >= 2 && j == occ[last - 2]);
            if (!in_tail)
                throw std::invalid_argument("surface recipe inapplicable: readout check reaches old rounds");
        }
        std::sort(repeated_keys.begin(), repeated_keys.end());
        repeated_keys.erase(std::unique(repeated_keys.begin(), repeated_keys.end()),
                            repeated_keys.end());
        if (repeated_keys.size() > 1)
            throw std::invalid_argument("surface recipe inapplicable: readout check spans plaquettes");
        desired.push_back(std::move(meas));
    }
    std::vector<Gf2Vector> coeff_rows;
    for (const auto& want : desired) {
        auto coeffs = meas_rows.express_in_rows(want);
        if (!coeffs) throw std::invalid_argument("surface recipe inapplicable to this circuit");
        coeff_rows.push_back(*coeffs);
    }
    (void)circuit;
    return assemble(coeff_rows);
}

NoiseModel standard_circuit_noise(const CliffordCircuit& circuit, const StandardNoiseParams& params) {
    const std::size_t n = circuit.n, T = circuit.depth();
    std::vector<LocalChannel> channels;
    std::uint64_t stream = 0;
    for (std::size_t t = 1; t <= T; ++t) {
        double s1 = params.layer_scale_1q.empty() ? 1.0 : params.layer_scale_1q.at(t - 1);
        double s2 = params.layer_scale_2q.empty() ? 1.0 : params.layer_scale_2q.at(t - 1);
        for (const auto& loc : circuit.layers[t - 1]) {
            std::size_t tau = loc.kind == GateKind::PrepareZero ? t : t - 1;
            std::vector<std::size_t> st_qubits;
            for (std::size_t q : loc.qubits) st_qubits.push_back(tau * n + q);
            Support support(st_qubits);
            ++stream;
            if (support.size() == 1) {
                channels.push_back(gaussian_channel(support, params.mean1q * s1, params.sigma1q * s1,
                                                    params.seed, stream));
            } else if (support.size() == 2) {
                channels.push_back(gaussian_channel(support, params.mean2q * s2, params.sigma2q * s2,
                                                    params.seed, stream));
            } else {
                throw std::invalid_argument("standard noise covers 1- and 2-qubit locations only");
            }
        }
    }
    return NoiseModel(n * (T + 1), std::move(channels));
}

ChannelProvenance channel_provenance(const CliffordCircuit& circuit, const Support& support) {
    if (support.size() == 0) throw std::invalid_argument("empty channel support");
    const std::size_t n = circuit.n;
    std::size_t tau = support.qubits.front() / n;
    std::size_t layer = tau + 1;
    ChannelProvenance prov{layer, support.size(), GateKind::Idle};
    if (layer >= 1 && layer <= circuit.depth()) {
        std::size_t q0 = support.qubits.front() % n;
        for (const auto& loc : circuit.layers[layer - 1]) {
            if (std::find(loc.qubits.begin(), loc.qubits.end(), q0) != loc.qubits.end()) {
                prov.kind = loc.kind;
                break;
            }
        }
    }
    return prov;
}

double exact_detector_expectation(const SpacetimeCode& code, const NoiseModel& model,
                                  const PauliOperator& generator_product) {
    if (model.num_qubits() != code.n_st) throw std::invalid_argument("model dimension mismatch");
    return model.total_eigenvalue(generator_product);
}

std::vector<std::size_t> sample_detector_flips(const SpacetimeCode& code, const NoiseModel& model,
                                               const std::vector<Gf2Vector>& subsets,
                                               std::size_t shots, std::uint64_t seed, int threads) {
    if (model.num_qubits() != code.n_st) throw std::invalid_argument("model dimension mismatch");
    const std::size_t g = code.parity.o_perp.size();
    for (const auto& row : subsets)
        if (row.size() != g) throw std::invalid_argument("subset row has wrong length");

    unsigned hw = std::thread::hardware_concurrency();
    std::size_t num_threads = threads > 0 ? static_cast<std::size_t>(threads) : (hw ? hw : 1);
    if (num_threads > 1 && shots < 256) num_threads = 1;

    std::vector<std::vector<std::size_t>> partial(num_threads,
                                                  std::vector<std::size_t>(subsets.size(), 0));
    auto worker = [&](std::size_t tid) {
        auto& counts = partial[tid];
        std::vector<int> detector(g);
        for (std::size_t shot = tid; shot < shots; shot += num_threads) {
            PauliOperator err = model.sample_error(seed, shot);
            auto outcomes = simulate_shot(code.circuit, err, seed, shot);
            for (std::size_t i = 0; i < g; ++i) detector[i] = code.parity.detector_value(i, outcomes);
            for (std::size_t r = 0; r < subsets.size(); ++r) {
                int parity_bit = 0;
                for (std::size_t i = 0; i < g; ++i)
                    if (subsets[r].get(i)) parity_bit ^= detector[i];
                counts[r] += static_cast<std::size_t>(parity_bit);
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
    std::vector<std::size_t> total(subsets.size(), 0);
    for (const auto& counts : partial)
        for (std::size_t r = 0; r < subsets.size(); ++r) total[r] += counts[r];
    return total;
}

std::string SpacetimeCode::to_json() const {
    nlohmann::json j;
    j["n_st"] = n_st;
    std::vector<nlohmann::json> gens, logs;
    for (std::size_t i = 0; i < measured_gens.size(); ++i) {
        gens.push_back({{"u", parity.o_perp[i].ones()},
                        {"offset", parity.o_perp_offsets[i]},
                        {"pauli", measured_gens[i].to_sparse_string()}});
    }
    for (std::size_t i = 0; i < measured_logicals.size(); ++i) {
        logs.push_back({{"u_L", parity.k_logical[i].ones()},
                        {"offset", parity.k_logical_offsets[i]},
                        {"pauli", measured_logicals[i].to_sparse_string()}});
    }
    j["generators"] = gens;
    j["logicals"] = logs;
    return j.dump(2);
}

}  // namespace synlearn
