#include "synlearn/circuit.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "synlearn/rng.hpp"

namespace synlearn {

const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::S: return "S";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
        case GateKind::SWAP: return "SWAP";
        case GateKind::MeasurePauli: return "M";
        case GateKind::PrepareZero: return "R";
        case GateKind::Idle: return "I";
    }
    return "?";
}

GateKind gate_from_name(const std::string& name) {
    if (name == "H") return GateKind::H;
    if (name == "S") return GateKind::S;
    if (name == "X") return GateKind::X;
    if (name == "Y") return GateKind::Y;
    if (name == "Z") return GateKind::Z;
    if (name == "CNOT" || name == "CX") return GateKind::CNOT;
    if (name == "CZ") return GateKind::CZ;
    if (name == "SWAP") return GateKind::SWAP;
    if (name == "M") return GateKind::MeasurePauli;
    if (name == "R") return GateKind::PrepareZero;
    if (name == "I") return GateKind::Idle;
    throw std::invalid_argument("unknown gate name: " + name);
}

Location Location::measure(PauliOperator p) {
    Location loc;
    loc.kind = GateKind::MeasurePauli;
    for (std::size_t q : p.support()) loc.qubits.push_back(q);
    if (loc.qubits.empty()) throw std::invalid_argument("cannot measure the identity");
    loc.pauli = std::move(p);
    return loc;
}

std::size_t CliffordCircuit::num_measurements() const {
    std::size_t m = 0;
    for (const auto& layer : layers)
        for (const auto& loc : layer)
            if (loc.kind == GateKind::MeasurePauli) ++m;
    return m;
}

void CliffordCircuit::validate() const {
    for (const auto& layer : layers) {
        std::vector<bool> used(n, false);
        for (const auto& loc : layer) {
            if ((loc.kind == GateKind::CNOT || loc.kind == GateKind::CZ || loc.kind == GateKind::SWAP) &&
                loc.qubits.size() != 2)
                throw std::invalid_argument("two-qubit gate needs two qubits");
            for (std::size_t q : loc.qubits) {
                if (q >= n) throw std::out_of_range("location qubit out of range");
                if (used[q]) throw std::invalid_argument("locations at one layer share a qubit");
                used[q] = true;
            }
        }
    }
    for (std::size_t i = 0; i < initial_stabilizers.size(); ++i)
        for (std::size_t j = i + 1; j < initial_stabilizers.size(); ++j)
            if (binary_commutator(initial_stabilizers[i], initial_stabilizers[j]))
                throw std::invalid_argument("initial stabilizers do not commute");
    if (symplectic_rank(initial_stabilizers) != initial_stabilizers.size())
        throw std::invalid_argument("initial stabilizers are dependent");
    if (!initial_destabilizers.empty()) {
        if (initial_destabilizers.size() != initial_stabilizers.size())
            throw std::invalid_argument("destabilizer count mismatch");
        for (std::size_t i = 0; i < initial_stabilizers.size(); ++i)
            for (std::size_t j = 0; j < initial_stabilizers.size(); ++j)
                if (binary_commutator(initial_destabilizers[i], initial_stabilizers[j]) !=
                    (i == j ? 1 : 0))
                    throw std::invalid_argument("destabilizer pairing broken");
    }
}

void CliffordCircuit::fill_idle() {
    for (auto& layer : layers) {
        std::vector<bool> used(n, false);
        for (const auto& loc : layer)
            for (std::size_t q : loc.qubits) used[q] = true;
        for (std::size_t q = 0; q < n; ++q)
            if (!used[q]) layer.push_back(Location::idle(q));
    }
}

void CliffordCircuit::complete_tableau() {
    if (initial_logical_x.empty() && initial_stabilizers.size() < n) {
        auto [lx, lz] = find_logical_pairs(initial_stabilizers);
        initial_logical_x = lx;
        initial_logical_z = lz;
    }
    if (initial_destabilizers.empty())
        initial_destabilizers =
            find_destabilizers(initial_stabilizers, initial_logical_x, initial_logical_z);
}

namespace {

// A Pauli with a tracked real sign; products of tableau rows always stay real.
struct PhasedRow {
    PauliOperator p;
    bool sign = false;  // true = -1 prefactor
};

// i-exponent of the product p_a * p_b.
int phase_exponent(const PauliOperator& a, const PauliOperator& b) {
    int gamma = 0;
    for (std::size_t q = 0; q < a.num_qubits(); ++q) {
        bool xa = a.x(q), za = a.z(q), xb = b.x(q), zb = b.z(q);
        if (!(xa || za) || !(xb || zb)) continue;
        if (xa == xb && za == zb) continue;
        // XY=iZ, YZ=iX, ZX=iY; reversed order picks up -i.
        int da = pauli_digit(xa, za), db = pauli_digit(xb, zb);
        bool forward = (da == 1 && db == 2) || (da == 2 && db == 3) || (da == 3 && db == 1);
        gamma += forward ? 1 : 3;
    }
    return gamma & 3;
}

void row_multiply(PhasedRow& into, const PhasedRow& factor) {
    int g = phase_exponent(into.p, factor.p);
    if (g == 2) into.sign = !into.sign;
    into.sign ^= factor.sign;
    into.p *= factor.p;
}

// Conjugation by the locations of one layer, with sign tracking. The bit maps
// are involutions for this gate set; only the S sign rule is directional.
void conjugate_through_layer(PhasedRow& r, const Layer& layer, bool backward) {
    PauliOperator& p = r.p;
    for (const auto& loc : layer) {
        switch (loc.kind) {
            case GateKind::H: {
                std::size_t q = loc.qubits[0];
                bool x = p.x(q), z = p.z(q);
                if (x && z) r.sign = !r.sign;
                p.set_x(q, z);
                p.set_z(q, x);
                break;
            }
            case GateKind::S: {
                std::size_t q = loc.qubits[0];
                bool x = p.x(q), z = p.z(q);
                if (x && (backward ? !z : z)) r.sign = !r.sign;
                p.set_z(q, z ^ x);
                break;
            }
            case GateKind::X: {
                std::size_t q = loc.qubits[0];
                if (p.z(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::Y: {
                std::size_t q = loc.qubits[0];
                if (p.x(q) ^ p.z(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::Z: {
                std::size_t q = loc.qubits[0];
                if (p.x(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::CNOT: {
                std::size_t c = loc.qubits[0], t = loc.qubits[1];
                bool xc = p.x(c), zc = p.z(c), xt = p.x(t), zt = p.z(t);
                if (xc && zt && (xt == zc)) r.sign = !r.sign;
                p.set_x(t, xt ^ xc);
                p.set_z(c, zc ^ zt);
                break;
            }
            case GateKind::CZ: {
                std::size_t c = loc.qubits[0], t = loc.qubits[1];
                bool xc = p.x(c), zc = p.z(c), xt = p.x(t), zt = p.z(t);
                if (xc && xt && (zc ^ zt)) r.sign = !r.sign;
                p.set_z(c, zc ^ xt);
                p.set_z(t, zt ^ xc);
                break;
            }
            case GateKind::SWAP: {
                std::size_t a = loc.qubits[0], b = loc.qubits[1];
                bool xa = p.x(a), za = p.z(a), xb = p.x(b), zb = p.z(b);
                p.set_x(a, xb);
                p.set_z(a, zb);
                p.set_x(b, xa);
                p.set_z(b, za);
                break;
            }
            case GateKind::MeasurePauli:
            case GateKind::PrepareZero:
            case GateKind::Idle:
                break;  // identity on propagation
        }
    }
}

PhasedRow propagate_phased(PhasedRow r, std::size_t from_tau, std::size_t to_tau,
                           const CliffordCircuit& circuit) {
    if (to_tau > from_tau) {
        for (std::size_t t = from_tau + 1; t <= to_tau; ++t)
            conjugate_through_layer(r, circuit.layers[t - 1], false);
    } else {
        for (std::size_t t = from_tau; t > to_tau; --t)
            conjugate_through_layer(r, circuit.layers[t - 1], true);
    }
    return r;
}

}  // namespace

PauliOperator propagate(const PauliOperator& op, std::size_t from_tau, std::size_t to_tau,
                        const CliffordCircuit& circuit) {
    if (from_tau > circuit.depth() || to_tau > circuit.depth())
        throw std::out_of_range("layer out of range");
    return propagate_phased({op, false}, from_tau, to_tau, circuit).p;
}

int ParityStructure::check_value(const Gf2Vector& u, const std::vector<std::uint8_t>& outcomes) const {
    int v = 0;
    for (std::size_t j = 0; j < outcomes.size(); ++j)
        if (u.get(num_initial + j)) v ^= outcomes[j] & 1;
    return v;
}

ParityStructure build_parity_structure(const CliffordCircuit& circuit) {
    CliffordCircuit work = circuit;
    work.complete_tableau();
    work.validate();

    const std::size_t s0 = work.initial_stabilizers.size();
    const std::size_t m = work.num_measurements();
    const std::size_t slots = s0 + m;

    ParityStructure out;
    out.num_initial = s0;
    for (const auto& s : work.initial_stabilizers) out.operators.push_back({s, 0});

    // Rows are back-propagated to tau = 0 and carry their sign. Row i holds
    // (P_i, sigma_i) and a provenance v_i: measuring (-1)^{sigma_i} P_i on the
    // input state gives outcome v_i . o relative to the record o.
    std::vector<PhasedRow> stab, dest, lx, lz;
    for (const auto& s : work.initial_stabilizers) stab.push_back({s, false});
    for (const auto& d : work.initial_destabilizers) dest.push_back({d, false});
    for (const auto& x : work.initial_logical_x) lx.push_back({x, false});
    for (const auto& z : work.initial_logical_z) lz.push_back({z, false});
    std::vector<Gf2Vector> vs, vx, vz;
    for (std::size_t i = 0; i < s0; ++i) {
        Gf2Vector e(slots);
        e.set(i, true);
        vs.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < lx.size(); ++i) {
        vx.emplace_back(slots);
        vz.emplace_back(slots);
    }

    std::size_t record = 0;  // measurement slot counter
    for (std::size_t t = 1; t <= work.depth(); ++t) {
        for (const auto& loc : work.layers[t - 1]) {
            const bool is_measure = loc.kind == GateKind::MeasurePauli;
            const bool is_prep = loc.kind == GateKind::PrepareZero;
            if (!is_measure && !is_prep) continue;

            PauliOperator measured =
                is_measure ? loc.pauli : PauliOperator::single(work.n, loc.qubits[0], 'Z');
            PhasedRow m_star = propagate_phased({measured, false}, t - 1, 0, work);

            std::size_t slot = 0;
            if (is_measure) {
                out.operators.push_back({measured, t});
                slot = s0 + record;
                ++record;
            }

            std::vector<int> cs(stab.size()), cd(stab.size());
            for (std::size_t i = 0; i < stab.size(); ++i) {
                cs[i] = binary_commutator(m_star.p, dest[i].p);
                cd[i] = binary_commutator(m_star.p, stab[i].p);
            }
            std::vector<int> cx(lx.size()), cz(lx.size());
            for (std::size_t i = 0; i < lx.size(); ++i) {
                cx[i] = binary_commutator(m_star.p, lz[i].p);
                cz[i] = binary_commutator(m_star.p, lx[i].p);
            }

            bool any_cd = std::find(cd.begin(), cd.end(), 1) != cd.end();
            bool any_cx = std::find(cx.begin(), cx.end(), 1) != cx.end();
            bool any_cz = std::find(cz.begin(), cz.end(), 1) != cz.end();

            if (any_cd) {
                // Anticommutes with a current stabilizer: random outcome, no check.
                std::size_t pivot = 0;
                while (cd[pivot] == 0) ++pivot;
                PhasedRow dstar = stab[pivot];
                Gf2Vector vstar = vs[pivot];
                for (std::size_t i = 0; i < stab.size(); ++i) {
                    if (i == pivot) continue;
                    if (cd[i]) {
                        row_multiply(stab[i], dstar);
                        vs[i] ^= vstar;
                    }
                    if (cs[i]) row_multiply(dest[i], dstar);
                }
                for (std::size_t j = 0; j < lx.size(); ++j) {
                    if (cz[j]) {
                        row_multiply(lx[j], dstar);
                        vx[j] ^= vstar;
                    }
                    if (cx[j]) {
                        row_multiply(lz[j], dstar);
                        vz[j] ^= vstar;
                    }
                }
                stab.erase(stab.begin() + static_cast<std::ptrdiff_t>(pivot));
                dest.erase(dest.begin() + static_cast<std::ptrdiff_t>(pivot));
                vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(pivot));
                stab.push_back(m_star);
                dest.push_back(dstar);
                Gf2Vector vnew(slots);
                if (is_measure) vnew.set(slot, true);  // preps are forced to +1
                vs.push_back(std::move(vnew));
            } else if (any_cx || any_cz) {
                // Logical measurement: the record reveals a logical value.
                if (is_measure) {
                    Gf2Vector ul(slots);
                    ul.set(slot, true);
                    // Expansion of m_star over the current rows; the residual
                    // real sign is the frame offset of this logical readout.
                    PhasedRow acc{PauliOperator(work.n), m_star.sign};
                    int gamma = 0;
                    auto absorb = [&acc, &gamma](const PhasedRow& row) {
                        gamma += phase_exponent(acc.p, row.p);
                        acc.sign ^= row.sign;
                        acc.p *= row.p;
                    };
                    for (std::size_t i = 0; i < stab.size(); ++i)
                        if (cs[i]) {
                            absorb(stab[i]);
                            ul ^= vs[i];
                        }
                    for (std::size_t j = 0; j < lx.size(); ++j) {
                        if (cx[j]) {
                            absorb(lx[j]);
                            ul ^= vx[j];
                        }
                        if (cz[j]) {
                            absorb(lz[j]);
                            ul ^= vz[j];
                        }
                    }
                    if ((gamma & 3) == 2) acc.sign = !acc.sign;
                    out.k_logical.push_back(std::move(ul));
                    out.k_logical_offsets.push_back(acc.sign ? 1 : 0);
                }
                bool use_x = any_cx;
                std::size_t pivot = 0;
                while ((use_x ? cx[pivot] : cz[pivot]) == 0) ++pivot;
                PhasedRow dstar = use_x ? lz[pivot] : lx[pivot];
                Gf2Vector vstar = use_x ? vz[pivot] : vx[pivot];
                for (std::size_t i = 0; i < stab.size(); ++i)
                    if (cs[i]) row_multiply(dest[i], dstar);
                for (std::size_t j = 0; j < lx.size(); ++j) {
                    if (j == pivot) continue;
                    if (cz[j]) {
                        row_multiply(lx[j], dstar);
                        vx[j] ^= vstar;
                    }
                    if (cx[j]) {
                        row_multiply(lz[j], dstar);
                        vz[j] ^= vstar;
                    }
                }
                lx.erase(lx.begin() + static_cast<std::ptrdiff_t>(pivot));
                lz.erase(lz.begin() + static_cast<std::ptrdiff_t>(pivot));
                vx.erase(vx.begin() + static_cast<std::ptrdiff_t>(pivot));
                vz.erase(vz.begin() + static_cast<std::ptrdiff_t>(pivot));
                stab.push_back(m_star);
                dest.push_back(dstar);
                Gf2Vector vnew(slots);
                if (is_measure) vnew.set(slot, true);
                vs.push_back(std::move(vnew));
            } else {
                // Deterministic stabilizer measurement: emits a parity check
                // whose constant value is the sign of the expansion.
                bool any_cs = std::find(cs.begin(), cs.end(), 1) != cs.end();
                if (is_measure) {
                    Gf2Vector u(slots);
                    u.set(slot, true);
                    PhasedRow acc{PauliOperator(work.n), m_star.sign};
                    int gamma = 0;
                    for (std::size_t i = 0; i < stab.size(); ++i) {
                        if (cs[i]) {
                            gamma += phase_exponent(acc.p, stab[i].p);
                            acc.sign ^= stab[i].sign;
                            acc.p *= stab[i].p;
                            u ^= vs[i];
                        }
                    }
                    if ((gamma & 3) == 2) acc.sign = !acc.sign;
                    out.o_perp.push_back(std::move(u));
                    out.o_perp_offsets.push_back(acc.sign ? 1 : 0);
                }
                if (!any_cs) continue;  // measured the identity
                std::size_t pivot = 0;
                while (cs[pivot] == 0) ++pivot;
                PhasedRow dstar = dest[pivot];
                for (std::size_t i = 0; i < stab.size(); ++i) {
                    if (i == pivot) continue;
                    if (cs[i]) row_multiply(dest[i], dstar);
                }
                stab.erase(stab.begin() + static_cast<std::ptrdiff_t>(pivot));
                dest.erase(dest.begin() + static_cast<std::ptrdiff_t>(pivot));
                vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(pivot));
                stab.push_back(m_star);
                dest.push_back(dstar);
                Gf2Vector vnew(slots);
                if (is_measure) vnew.set(slot, true);  // a re-measured stabilizer reads fresh
                vs.push_back(std::move(vnew));
            }
        }
    }
    return out;
}

namespace {

struct Tableau {
    std::size_t n = 0;
    std::vector<PhasedRow> stab, dest;

    void apply_gate(const Location& loc) {
        switch (loc.kind) {
            case GateKind::H: {
                std::size_t q = loc.qubits[0];
                for (auto rows : {&stab, &dest}) {
                    for (auto& r : *rows) {
                        bool x = r.p.x(q), z = r.p.z(q);
                        if (x && z) r.sign = !r.sign;
                        r.p.set_x(q, z);
                        r.p.set_z(q, x);
                    }
                }
                break;
            }
            case GateKind::S: {
                std::size_t q = loc.qubits[0];
                for (auto rows : {&stab, &dest}) {
                    for (auto& r : *rows) {
                        if (r.p.x(q) && r.p.z(q)) r.sign = !r.sign;
                        r.p.set_z(q, r.p.z(q) ^ r.p.x(q));
                    }
                }
                break;
            }
            case GateKind::X: {
                std::size_t q = loc.qubits[0];
                for (auto rows : {&stab, &dest})
                    for (auto& r : *rows)
                        if (r.p.z(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::Y: {
                std::size_t q = loc.qubits[0];
                for (auto rows : {&stab, &dest})
                    for (auto& r : *rows)
                        if (r.p.x(q) ^ r.p.z(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::Z: {
                std::size_t q = loc.qubits[0];
                for (auto rows : {&stab, &dest})
                    for (auto& r : *rows)
                        if (r.p.x(q)) r.sign = !r.sign;
                break;
            }
            case GateKind::CNOT: {
                std::size_t c = loc.qubits[0], t = loc.qubits[1];
                for (auto rows : {&stab, &dest}) {
                    for (auto& r : *rows) {
                        bool xc = r.p.x(c), zc = r.p.z(c), xt = r.p.x(t), zt = r.p.z(t);
                        if (xc && zt && (xt == zc)) r.sign = !r.sign;
                        r.p.set_x(t, xt ^ xc);
                        r.p.set_z(c, zc ^ zt);
                    }
                }
                break;
            }
            case GateKind::CZ: {
                std::size_t c = loc.qubits[0], t = loc.qubits[1];
                for (auto rows : {&stab, &dest}) {
                    for (auto& r : *rows) {
                        bool xc = r.p.x(c), zc = r.p.z(c), xt = r.p.x(t), zt = r.p.z(t);
                        if (xc && xt && (zc ^ zt)) r.sign = !r.sign;
                        r.p.set_z(c, zc ^ xt);
                        r.p.set_z(t, zt ^ xc);
                    }
                }
                break;
            }
            case GateKind::SWAP: {
                std::size_t a = loc.qubits[0], b = loc.qubits[1];
                for (auto rows : {&stab, &dest}) {
                    for (auto& r : *rows) {
                        bool xa = r.p.x(a), za = r.p.z(a), xb = r.p.x(b), zb = r.p.z(b);
                        r.p.set_x(a, xb);
                        r.p.set_z(a, zb);
                        r.p.set_x(b, xa);
                        r.p.set_z(b, za);
                    }
                }
                break;
            }
            default:
                break;
        }
    }

    void apply_error(const PauliOperator& e) {
        for (auto rows : {&stab, &dest})
            for (auto& r : *rows)
                if (binary_commutator(e, r.p)) r.sign = !r.sign;
    }

    // Measurement of +P; outcome bit 0 means the +1 result.
    int measure(const PauliOperator& p, bool random_bit) {
        std::size_t pivot = stab.size();
        for (std::size_t i = 0; i < stab.size(); ++i) {
            if (binary_commutator(p, stab[i].p)) {
                pivot = i;
                break;
            }
        }
        if (pivot < stab.size()) {
            int outcome = random_bit ? 1 : 0;
            PhasedRow collapsed = stab[pivot];
            for (std::size_t i = 0; i < stab.size(); ++i)
                if (i != pivot && binary_commutator(p, stab[i].p)) row_multiply(stab[i], collapsed);
            for (std::size_t i = 0; i < dest.size(); ++i)
                if (binary_commutator(p, dest[i].p)) row_multiply(dest[i], collapsed);
            dest[pivot] = collapsed;
            stab[pivot] = {p, outcome == 1};
            return outcome;
        }
        // Deterministic: expand P over the stabilizer rows via destabilizers.
        PhasedRow acc{PauliOperator(n), false};
        int gamma = 0;
        for (std::size_t i = 0; i < stab.size(); ++i) {
            if (binary_commutator(p, dest[i].p)) {
                gamma += phase_exponent(acc.p, stab[i].p);
                acc.sign ^= stab[i].sign;
                acc.p *= stab[i].p;
            }
        }
        gamma &= 3;
        if (gamma == 2) acc.sign = !acc.sign;
        if (acc.p != p) throw std::logic_error("tableau expansion failed");
        return acc.sign ? 1 : 0;
    }
};

}  // namespace

std::vector<std::uint8_t> simulate_shot(const CliffordCircuit& circuit,
                                        const PauliOperator& spacetime_error, std::uint64_t seed,
                                        std::uint64_t shot) {
    CliffordCircuit work = circuit;
    work.complete_tableau();
    const std::size_t n = work.n;
    if (spacetime_error.num_qubits() != work.num_spacetime_qubits())
        throw std::invalid_argument("spacetime error dimension mismatch");

    Tableau tab;
    tab.n = n;
    for (const auto& s : work.initial_stabilizers) tab.stab.push_back({s, false});
    for (const auto& z : work.initial_logical_z) tab.stab.push_back({z, false});
    for (const auto& d : work.initial_destabilizers) tab.dest.push_back({d, false});
    for (const auto& x : work.initial_logical_x) tab.dest.push_back({x, false});
    if (tab.stab.size() != n)
        throw std::invalid_argument("initial stabilizers plus Z logicals must fix a full state");

    std::vector<std::uint8_t> outcomes;
    std::size_t measure_index = 0;
    for (std::size_t t = 1; t <= work.depth(); ++t) {
        // Error component on qubit layer t-0.5 acts before gate layer t.
        PauliOperator slice(n);
        bool nontrivial = false;
        for (std::size_t q = 0; q < n; ++q) {
            std::size_t st = work.spacetime_index(q, t - 1);
            bool x = spacetime_error.x(st), z = spacetime_error.z(st);
            if (x || z) {
                slice.set_x(q, x);
                slice.set_z(q, z);
                nontrivial = true;
            }
        }
        if (nontrivial) tab.apply_error(slice);

        for (const auto& loc : work.layers[t - 1]) {
            if (loc.kind == GateKind::MeasurePauli) {
                bool rb = counter_hash(seed, shot, 0x6d656173ull, measure_index) & 1;
                outcomes.push_back(static_cast<std::uint8_t>(tab.measure(loc.pauli, rb)));
                ++measure_index;
            } else if (loc.kind == GateKind::PrepareZero) {
                bool rb = counter_hash(seed, shot, 0x70726570ull, (measure_index << 1) | 1) & 1;
                int o = tab.measure(PauliOperator::single(n, loc.qubits[0], 'Z'), rb);
                if (o == 1) tab.apply_gate(Location::gate1(GateKind::X, loc.qubits[0]));
            } else {
                tab.apply_gate(loc);
            }
        }
    }
    return outcomes;
}

std::vector<std::uint8_t> simulate_shot(const CliffordCircuit& circuit, std::uint64_t seed,
                                        std::uint64_t shot) {
    return simulate_shot(circuit, PauliOperator(circuit.num_spacetime_qubits()), seed, shot);
}

CliffordCircuit repetition_ec_circuit(std::size_t rounds) {
    CliffordCircuit c;
    c.n = 4;
    const std::size_t anc = 3;
    c.initial_stabilizers = {PauliOperator::parse("XXII", 4), PauliOperator::parse("IXXI", 4),
                             PauliOperator::parse("IIIX", 4)};
    c.initial_logical_x = {PauliOperator::parse("XIII", 4)};
    c.initial_logical_z = {PauliOperator::parse("ZZZI", 4)};
    for (std::size_t r = 0; r < rounds; ++r) {
        c.layers.push_back({Location::gate2(GateKind::CNOT, anc, 0)});
        c.layers.push_back({Location::gate2(GateKind::CNOT, anc, 1)});
        c.layers.push_back({Location::measure(PauliOperator::single(4, anc, 'X'))});
    }
    c.fill_idle();
    c.complete_tableau();
    return c;
}

CliffordCircuit surface_ec_circuit(std::size_t distance, std::size_t rounds) {
    if (distance < 3 || distance % 2 == 0) throw std::invalid_argument("distance must be odd and >= 3");
    const std::size_t d = distance;
    const std::size_t n_data = d * d;

    struct Plaq {
        std::size_t pr, pc;
        bool z_type;
        std::vector<std::size_t> data;
        std::size_t ancilla;
    };
    std::vector<Plaq> plaqs;
    auto data_qubit = [d](std::size_t r, std::size_t c) { return r * d + c; };
    for (std::size_t pr = 0; pr <= d; ++pr) {
        for (std::size_t pc = 0; pc <= d; ++pc) {
            std::vector<std::size_t> qs;
            for (int dr = -1; dr <= 0; ++dr)
                for (int dc = -1; dc <= 0; ++dc) {
                    int r = static_cast<int>(pr) + dr, cc = static_cast<int>(pc) + dc;
                    if (r >= 0 && r < static_cast<int>(d) && cc >= 0 && cc < static_cast<int>(d))
                        qs.push_back(
                            data_qubit(static_cast<std::size_t>(r), static_cast<std::size_t>(cc)));
                }
            bool z_type = ((pr + pc) % 2) == 0;
            bool keep =
                qs.size() == 4 || (qs.size() == 2 && (z_type ? (pr == 0 || pr == d) : (pc == 0 || pc == d)));
            if (keep) plaqs.push_back({pr, pc, z_type, qs, 0});
        }
    }
    CliffordCircuit c;
    c.n = n_data + plaqs.size();
    for (std::size_t i = 0; i < plaqs.size(); ++i) plaqs[i].ancilla = n_data + i;

    // Input: |0_L> on the data block, |0> ancillas.
    for (const auto& p : plaqs) {
        PauliOperator g(c.n);
        for (std::size_t q : p.data) {
            g.set_x(q, !p.z_type);
            g.set_z(q, p.z_type);
        }
        c.initial_stabilizers.push_back(g);
    }
    for (const auto& p : plaqs)
        c.initial_stabilizers.push_back(PauliOperator::single(c.n, p.ancilla, 'Z'));
    PauliOperator lx(c.n), lz(c.n);
    for (std::size_t cc = 0; cc < d; ++cc) lx.set_x(data_qubit(0, cc), true);
    for (std::size_t r = 0; r < d; ++r) lz.set_z(data_qubit(r, 0), true);
    c.initial_logical_x = {lx};
    c.initial_logical_z = {lz};

    // CNOT schedule: corner visit orders chosen to maximize parallelism and
    // keep the circuit fault-tolerant (zigzag for X plaquettes, mirrored for
    // Z). Offsets are (dr, dc) from the dual position to the data corner.
    const std::pair<int, int> kNE{-1, 0}, kNW{-1, -1}, kSE{0, 0}, kSW{0, -1};
    const std::vector<std::pair<int, int>> x_order = {kSE, kNE, kSW, kNW};
    const std::vector<std::pair<int, int>> z_order = {kSE, kSW, kNE, kNW};

    for (std::size_t round = 0; round < rounds; ++round) {
        Layer h1, h2, meas;
        for (const auto& p : plaqs) {
            if (!p.z_type) {
                h1.push_back(Location::gate1(GateKind::H, p.ancilla));
                h2.push_back(Location::gate1(GateKind::H, p.ancilla));
            }
            meas.push_back(Location::measure(PauliOperator::single(c.n, p.ancilla, 'Z')));
        }
        c.layers.push_back(h1);
        for (std::size_t step = 0; step < 4; ++step) {
            Layer cnots;
            for (const auto& p : plaqs) {
                auto [dr, dc] = p.z_type ? z_order[step] : x_order[step];
                int r = static_cast<int>(p.pr) + dr, cc = static_cast<int>(p.pc) + dc;
                if (r < 0 || r >= static_cast<int>(d) || cc < 0 || cc >= static_cast<int>(d)) continue;
                std::size_t q = data_qubit(static_cast<std::size_t>(r), static_cast<std::size_t>(cc));
                if (p.z_type)
                    cnots.push_back(Location::gate2(GateKind::CNOT, q, p.ancilla));
                else
                    cnots.push_back(Location::gate2(GateKind::CNOT, p.ancilla, q));
            }
            c.layers.push_back(cnots);
        }
        c.layers.push_back(h2);
        c.layers.push_back(meas);
    }
    Layer final_reads;
    for (std::size_t q = 0; q < n_data; ++q)
        final_reads.push_back(Location::measure(PauliOperator::single(c.n, q, 'Z')));
    c.layers.push_back(final_reads);
    c.fill_idle();
    c.complete_tableau();
    return c;
}

CliffordCircuit random_clifford_circuit(std::size_t n, std::size_t depth, std::uint64_t seed,
                                        double measure_prob) {
    CliffordCircuit c;
    c.n = n;
    for (std::size_t q = 0; q < n; ++q)
        c.initial_stabilizers.push_back(PauliOperator::single(n, q, 'Z'));
    CounterRng rng(seed);
    for (std::size_t t = 0; t < depth; ++t) {
        Layer layer;
        std::vector<std::size_t> perm(n);
        for (std::size_t q = 0; q < n; ++q) perm[q] = q;
        for (std::size_t q = n; q > 1; --q) std::swap(perm[q - 1], perm[rng.next_u64() % q]);
        std::size_t i = 0;
        while (i < n) {
            double roll = rng.next_uniform();
            if (roll < measure_prob) {
                layer.push_back(
                    Location::measure(PauliOperator::single(n, perm[i], rng.next_bit() ? 'Z' : 'X')));
                i += 1;
            } else if (i + 1 < n && roll < 0.6) {
                auto two = rng.next_u64() % 3;
                GateKind k = two == 0 ? GateKind::CNOT : two == 1 ? GateKind::CZ : GateKind::SWAP;
                layer.push_back(Location::gate2(k, perm[i], perm[i + 1]));
                i += 2;
            } else {
                static const GateKind kOneQubit[] = {GateKind::H, GateKind::S, GateKind::H,
                                                     GateKind::S, GateKind::X, GateKind::Y,
                                                     GateKind::Z};
                layer.push_back(Location::gate1(kOneQubit[rng.next_u64() % 7], perm[i]));
                i += 1;
            }
        }
        c.layers.push_back(layer);
    }
    c.fill_idle();
    c.complete_tableau();
    return c;
}

std::string CliffordCircuit::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    auto dump = [](const std::vector<PauliOperator>& ops) {
        std::vector<std::string> out;
        for (const auto& p : ops) out.push_back(p.to_string());
        return out;
    };
    j["initial"] = {{"stabilizers", dump(initial_stabilizers)},
                    {"destabilizers", dump(initial_destabilizers)},
                    {"logical_x", dump(initial_logical_x)},
                    {"logical_z", dump(initial_logical_z)}};
    std::vector<nlohmann::json> jlayers;
    for (const auto& layer : layers) {
        std::vector<nlohmann::json> jlocs;
        for (const auto& loc : layer) {
            nlohmann::json jl;
            jl["gate"] = gate_name(loc.kind);
            jl["qubits"] = loc.qubits;
            if (loc.kind == GateKind::MeasurePauli) jl["pauli"] = loc.pauli.to_sparse_string();
            jlocs.push_back(jl);
        }
        jlayers.push_back(jlocs);
    }
    j["layers"] = jlayers;
    return j.dump(2);
}

CliffordCircuit CliffordCircuit::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CliffordCircuit c;
    c.n = j.at("n").get<std::size_t>();
    auto load = [&c](const nlohmann::json& arr) {
        std::vector<PauliOperator> ops;
        for (const auto& s : arr) ops.push_back(PauliOperator::parse(s.get<std::string>(), c.n));
        return ops;
    };
    const auto& ini = j.at("initial");
    c.initial_stabilizers = load(ini.at("stabilizers"));
    if (ini.contains("destabilizers")) c.initial_destabilizers = load(ini.at("destabilizers"));
    if (ini.contains("logical_x")) c.initial_logical_x = load(ini.at("logical_x"));
    if (ini.contains("logical_z")) c.initial_logical_z = load(ini.at("logical_z"));
    for (const auto& jlayer : j.at("layers")) {
        Layer layer;
        for (const auto& jl : jlayer) {
            GateKind kind = gate_from_name(jl.at("gate").get<std::string>());
            Location loc;
            loc.kind = kind;
            loc.qubits = jl.at("qubits").get<std::vector<std::size_t>>();
            if (kind == GateKind::MeasurePauli)
                loc.pauli = PauliOperator::parse(jl.at("pauli").get<std::string>(), c.n);
            layer.push_back(loc);
        }
        c.layers.push_back(layer);
    }
    return c;
}

}  // namespace synlearn
