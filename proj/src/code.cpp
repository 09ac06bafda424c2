#include "synlearn/code.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace synlearn {

void SubsystemCode::validate() const {
    for (std::size_t i = 0; i < stabilizer_gens.size(); ++i)
        for (std::size_t j = i + 1; j < stabilizer_gens.size(); ++j)
            if (binary_commutator(stabilizer_gens[i], stabilizer_gens[j]))
                throw std::invalid_argument("stabilizer generators do not commute");
    if (symplectic_rank(stabilizer_gens) != stabilizer_gens.size())
        throw std::invalid_argument("stabilizer generators are dependent");
    if (!measured_gens.empty() && symplectic_rank(measured_gens) != measured_gens.size())
        throw std::invalid_argument("measured generators are dependent");
    for (const auto& m : measured_gens)
        if (!in_pauli_span(m, stabilizer_gens))
            throw std::invalid_argument("measured generator outside the stabilizer group");
    for (const auto& l : logical_x)
        for (const auto& s : stabilizer_gens)
            if (binary_commutator(l, s)) throw std::invalid_argument("logical X anticommutes with a stabilizer");
    for (const auto& l : logical_z)
        for (const auto& s : stabilizer_gens)
            if (binary_commutator(l, s)) throw std::invalid_argument("logical Z anticommutes with a stabilizer");
}

Syndrome SubsystemCode::syndrome_of(const PauliOperator& error) const {
    if (error.num_qubits() != n) throw std::invalid_argument("error dimension mismatch");
    Syndrome s;
    s.bits = Gf2Vector(measured_gens.size());
    for (std::size_t i = 0; i < measured_gens.size(); ++i)
        if (binary_commutator(error, measured_gens[i])) s.bits.set(i, true);
    return s;
}

namespace {

PauliOperator from_support(std::size_t n, const std::vector<std::size_t>& qubits, char kind) {
    PauliOperator p(n);
    for (std::size_t q : qubits) {
        p.set_x(q, kind == 'X' || kind == 'Y');
        p.set_z(q, kind == 'Z' || kind == 'Y');
    }
    return p;
}

}  // namespace

SubsystemCode repetition_code(std::size_t n) {
    if (n < 2) throw std::invalid_argument("repetition code needs n >= 2");
    SubsystemCode code;
    code.n = n;
    for (std::size_t i = 0; i + 1 < n; ++i)
        code.stabilizer_gens.push_back(from_support(n, {i, i + 1}, 'X'));
    code.measured_gens = code.stabilizer_gens;
    code.logical_x = {from_support(n, {0}, 'X')};
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    code.logical_z = {from_support(n, all, 'Z')};
    return code;
}

SubsystemCode steane_code() {
    SubsystemCode code;
    code.n = 7;
    const std::vector<std::vector<std::size_t>> rows = {{3, 4, 5, 6}, {1, 2, 5, 6}, {0, 2, 4, 6}};
    for (const auto& r : rows) code.stabilizer_gens.push_back(from_support(7, r, 'X'));
    for (const auto& r : rows) code.stabilizer_gens.push_back(from_support(7, r, 'Z'));
    code.measured_gens = code.stabilizer_gens;
    code.logical_x = {from_support(7, {0, 1, 2, 3, 4, 5, 6}, 'X')};
    code.logical_z = {from_support(7, {0, 1, 2, 3, 4, 5, 6}, 'Z')};
    return code;
}

SubsystemCode rotated_surface_code(std::size_t d) {
    if (d < 2 || d % 2 == 0) throw std::invalid_argument("rotated surface code needs odd d >= 3");
    SubsystemCode code;
    code.n = d * d;
    auto qubit = [d](std::size_t r, std::size_t c) { return r * d + c; };
    // Plaquettes live on the (d+1)x(d+1) dual grid. (r+c) even -> Z type,
    // odd -> X type; weight-2 plaquettes survive on the left/right boundary
    // for X and the top/bottom boundary for Z. Row-major data numbering makes
    // the d=3 indistinguishable classes come out as {X1,X4},{Z2,Z3},{X6,X9},{Z7,Z8}.
    for (std::size_t pr = 0; pr <= d; ++pr) {
        for (std::size_t pc = 0; pc <= d; ++pc) {
            std::vector<std::size_t> qs;
            for (int dr = -1; dr <= 0; ++dr) {
                for (int dc = -1; dc <= 0; ++dc) {
                    int r = static_cast<int>(pr) + dr, c = static_cast<int>(pc) + dc;
                    if (r >= 0 && r < static_cast<int>(d) && c >= 0 && c < static_cast<int>(d))
                        qs.push_back(qubit(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
                }
            }
            bool z_type = ((pr + pc) % 2) == 0;
            bool keep = false;
            if (qs.size() == 4)
                keep = true;
            else if (qs.size() == 2)
                keep = z_type ? (pr == 0 || pr == d) : (pc == 0 || pc == d);
            if (keep) code.stabilizer_gens.push_back(from_support(code.n, qs, z_type ? 'Z' : 'X'));
        }
    }
    code.measured_gens = code.stabilizer_gens;
    std::vector<std::size_t> top_row, left_col;
    for (std::size_t c = 0; c < d; ++c) top_row.push_back(qubit(0, c));
    for (std::size_t r = 0; r < d; ++r) left_col.push_back(qubit(r, 0));
    code.logical_x = {from_support(code.n, top_row, 'X')};
    code.logical_z = {from_support(code.n, left_col, 'Z')};
    return code;
}

SubsystemCode five_qubit_code() {
    SubsystemCode code;
    code.n = 5;
    const char* gens[4] = {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"};
    for (const char* g : gens) code.stabilizer_gens.push_back(PauliOperator::parse(g, 5));
    code.measured_gens = code.stabilizer_gens;
    code.logical_x = {PauliOperator::parse("XXXXX", 5)};
    code.logical_z = {PauliOperator::parse("ZZZZZ", 5)};
    return code;
}

SubsystemCode color_832_code() {
    SubsystemCode code;
    code.n = 8;
    code.stabilizer_gens.push_back(from_support(8, {0, 1, 2, 3, 4, 5, 6, 7}, 'X'));
    const std::vector<std::vector<std::size_t>> faces = {
        {0, 1, 2, 3}, {0, 1, 4, 5}, {0, 2, 4, 6}, {4, 5, 6, 7}};
    for (const auto& f : faces) code.stabilizer_gens.push_back(from_support(8, f, 'Z'));
    code.measured_gens = code.stabilizer_gens;
    auto [lx, lz] = find_logical_pairs(code.stabilizer_gens);
    code.logical_x = lx;
    code.logical_z = lz;
    return code;
}

SubsystemCode bivariate_bicycle_code() {
    // [[72,12,6]] bivariate bicycle code from A(x,y)=x^3+y+y^2, B(x,y)=y^3+x+x^2
    // over the group Z_6 x Z_6. Left qubits are indexed a*m+b, right qubits
    // 36 + a*m+b, with x: a -> a+1 and y: b -> b+1 (mod 6).
    const std::size_t l = 6, m = 6, half = l * m;
    auto idx = [m](std::size_t a, std::size_t b) { return a * m + b; };
    auto shift = [&](std::size_t pos, std::size_t sx, std::size_t sy) {
        std::size_t a = pos / m, b = pos % m;
        return idx((a + sx) % l, (b + sy) % m);
    };
    const std::vector<std::pair<std::size_t, std::size_t>> a_terms = {{3, 0}, {0, 1}, {0, 2}};
    const std::vector<std::pair<std::size_t, std::size_t>> b_terms = {{0, 3}, {1, 0}, {2, 0}};

    SubsystemCode code;
    code.n = 2 * half;
    std::vector<PauliOperator> x_checks, z_checks;
    for (std::size_t pos = 0; pos < half; ++pos) {
        PauliOperator xc(code.n), zc(code.n);
        for (auto [sx, sy] : a_terms) {
            xc.set_x(shift(pos, sx, sy), true);                          // A on left block
            zc.set_z(half + shift(pos, l - sx, m - sy), true);           // A^T on right block
        }
        for (auto [sx, sy] : b_terms) {
            xc.set_x(half + shift(pos, sx, sy), true);                   // B on right block
            zc.set_z(shift(pos, l - sx, m - sy), true);                  // B^T on left block
        }
        x_checks.push_back(xc);
        z_checks.push_back(zc);
    }
    // The full check lists are redundant (rank 30 each); keep an independent
    // prefix-greedy subset so the generator-independence invariant holds.
    Gf2RankTracker tracker(2 * code.n);
    for (const auto& g : x_checks)
        if (tracker.add(pauli_to_gf2(g))) code.stabilizer_gens.push_back(g);
    for (const auto& g : z_checks)
        if (tracker.add(pauli_to_gf2(g))) code.stabilizer_gens.push_back(g);
    code.measured_gens = code.stabilizer_gens;
    auto [lx, lz] = find_logical_pairs(code.stabilizer_gens);
    code.logical_x = lx;
    code.logical_z = lz;
    return code;
}

SubsystemCode named_code(const std::string& name, const std::vector<int>& params) {
    auto param_or = [&params](std::size_t i, int fallback) {
        return i < params.size() ? params[i] : fallback;
    };
    if (name == "repetition") return repetition_code(static_cast<std::size_t>(param_or(0, 3)));
    if (name == "steane") return steane_code();
    if (name == "rotated_surface") return rotated_surface_code(static_cast<std::size_t>(param_or(0, 3)));
    if (name == "five_qubit") return five_qubit_code();
    if (name == "color_832") return color_832_code();
    if (name == "bivariate_bicycle") return bivariate_bicycle_code();
    throw std::invalid_argument("unknown code name: " + name);
}

namespace {

// For transversal symplectic inner products during the search we test
// commutation against every stabilizer generator.
bool in_normalizer(const PauliOperator& e, const std::vector<PauliOperator>& gens) {
    for (const auto& g : gens)
        if (binary_commutator(e, g)) return false;
    return true;
}

Gf2Vector full_syndrome(const PauliOperator& e, const std::vector<PauliOperator>& gens) {
    Gf2Vector v(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (binary_commutator(e, gens[i])) v.set(i, true);
    return v;
}

void enumerate_weight(std::size_t n, std::size_t w, std::size_t first, PauliOperator& current,
                      const std::function<void(const PauliOperator&)>& visit) {
    if (w == 0) {
        visit(current);
        return;
    }
    for (std::size_t q = first; q + w <= n; ++q) {
        for (int d = 1; d <= 3; ++d) {
            current.set_x(q, d == 1 || d == 2);
            current.set_z(q, d == 2 || d == 3);
            enumerate_weight(n, w - 1, q + 1, current, visit);
        }
        current.set_x(q, false);
        current.set_z(q, false);
    }
}

}  // namespace

std::size_t pure_distance(const SubsystemCode& code, std::size_t max_weight) {
    if (code.n > 25) throw std::invalid_argument("pure_distance oracle capped at n <= 25");
    // Meet-in-the-middle over weight <= 4: two halves of weight <= 2 with
    // equal syndrome w.r.t. the full stabilizer set multiply to an
    // undetectable error.
    std::map<Gf2Vector, std::vector<PauliOperator>> by_syndrome;
    PauliOperator scratch(code.n);
    for (std::size_t w = 0; w <= 2; ++w) {
        enumerate_weight(code.n, w, 0, scratch, [&](const PauliOperator& p) {
            by_syndrome[full_syndrome(p, code.stabilizer_gens)].push_back(p);
        });
    }
    std::size_t best = SIZE_MAX;
    for (const auto& [syn, list] : by_syndrome) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            for (std::size_t j = i; j < list.size(); ++j) {
                PauliOperator prod = list[i] * list[j];
                if (prod.is_identity()) continue;
                best = std::min(best, prod.weight());
            }
        }
    }
    if (best != SIZE_MAX) return best;
    for (std::size_t w = 5; w <= max_weight; ++w) {
        bool found = false;
        std::size_t found_w = 0;
        enumerate_weight(code.n, w, 0, scratch, [&](const PauliOperator& p) {
            if (!found && in_normalizer(p, code.stabilizer_gens)) {
                found = true;
                found_w = p.weight();
            }
        });
        if (found) return found_w;
    }
    throw std::runtime_error("pure_distance search budget exceeded");
}

std::string code_to_json(const SubsystemCode& code) {
    nlohmann::json j;
    j["n"] = code.n;
    auto dump = [](const std::vector<PauliOperator>& ops) {
        std::vector<std::string> out;
        for (const auto& p : ops) out.push_back(p.to_string());
        return out;
    };
    j["stabilizers"] = dump(code.stabilizer_gens);
    j["measured"] = dump(code.measured_gens);
    j["logical_x"] = dump(code.logical_x);
    j["logical_z"] = dump(code.logical_z);
    if (!code.gauge_gens.empty()) j["gauge"] = dump(code.gauge_gens);
    return j.dump(2);
}

SubsystemCode code_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SubsystemCode code;
    code.n = j.at("n").get<std::size_t>();
    auto load = [&code](const nlohmann::json& arr) {
        std::vector<PauliOperator> ops;
        for (const auto& s : arr) {
            if (s.is_number_integer())
                throw std::invalid_argument("expected Pauli string");
            ops.push_back(PauliOperator::parse(s.get<std::string>(), code.n));
        }
        return ops;
    };
    code.stabilizer_gens = load(j.at("stabilizers"));
    if (j.contains("measured")) {
        // Either strings or indices into the stabilizer list.
        const auto& m = j.at("measured");
        if (!m.empty() && m.front().is_number_integer()) {
            for (const auto& idx : m) code.measured_gens.push_back(code.stabilizer_gens.at(idx.get<std::size_t>()));
        } else {
            code.measured_gens = load(m);
        }
    } else {
        code.measured_gens = code.stabilizer_gens;
    }
    if (j.contains("logical_x")) code.logical_x = load(j.at("logical_x"));
    if (j.contains("logical_z")) code.logical_z = load(j.at("logical_z"));
    if (j.contains("gauge")) code.gauge_gens = load(j.at("gauge"));
    return code;
}

}  // namespace synlearn
