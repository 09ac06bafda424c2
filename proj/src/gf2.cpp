#include "synlearn/gf2.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace synlearn {

bool Gf2Vector::operator<(const Gf2Vector& other) const {
    // Lexicographic on bit index 0,1,2,...
    for (std::size_t i = 0; i < w_.size() && i < other.w_.size(); ++i) {
        if (w_[i] == other.w_[i]) continue;
        std::uint64_t diff = w_[i] ^ other.w_[i];
        std::uint64_t low = diff & (~diff + 1);
        return (other.w_[i] & low) != 0;
    }
    return false;
}

bool Gf2Vector::is_zero() const {
    for (auto w : w_)
        if (w) return false;
    return true;
}

std::size_t Gf2Vector::popcount() const {
    std::size_t c = 0;
    for (auto w : w_) c += std::popcount(w);
    return c;
}

int Gf2Vector::lowest_set_bit() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i]) return static_cast<int>(i * 64 + std::countr_zero(w_[i]));
    return -1;
}

int Gf2Vector::highest_set_bit() const {
    for (std::size_t i = w_.size(); i-- > 0;)
        if (w_[i]) return static_cast<int>(i * 64 + 63 - std::countl_zero(w_[i]));
    return -1;
}

int dot(const Gf2Vector& a, const Gf2Vector& b) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.w_.size(); ++i) acc ^= a.w_[i] & b.w_[i];
    return std::popcount(acc) & 1;
}

std::vector<std::size_t> Gf2Vector::ones() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) out.push_back(i);
    return out;
}

std::size_t Gf2Matrix::rank() const {
    Gf2Matrix copy(*this);
    return copy.rref().size();
}

std::vector<std::size_t> Gf2Matrix::rref() {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols_ && r < rows_.size(); ++c) {
        std::size_t pivot = r;
        while (pivot < rows_.size() && !rows_[pivot].get(c)) ++pivot;
        if (pivot == rows_.size()) continue;
        std::swap(rows_[r], rows_[pivot]);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (i != r && rows_[i].get(c)) rows_[i] ^= rows_[r];
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

bool Gf2Matrix::in_row_span(const Gf2Vector& v) const {
    Gf2Matrix copy(*this);
    auto pivots = copy.rref();
    Gf2Vector residual = v;
    for (std::size_t r = 0; r < pivots.size(); ++r)
        if (residual.get(pivots[r])) residual ^= copy.rows_[r];
    return residual.is_zero();
}

std::optional<Gf2Vector> Gf2Matrix::express_in_rows(const Gf2Vector& v) const {
    // Augment each row with an indicator of its original index, then reduce.
    const std::size_t m = rows_.size();
    Gf2Matrix aug(m, cols_ + m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < cols_; ++c) aug.set(i, c, rows_[i].get(c));
        aug.set(i, cols_ + i, true);
    }
    // Eliminate only over the first cols_ columns.
    std::size_t r = 0;
    std::vector<std::size_t> pivots;
    for (std::size_t c = 0; c < cols_ && r < m; ++c) {
        std::size_t pivot = r;
        while (pivot < m && !aug.rows_[pivot].get(c)) ++pivot;
        if (pivot == m) continue;
        std::swap(aug.rows_[r], aug.rows_[pivot]);
        for (std::size_t i = 0; i < m; ++i)
            if (i != r && aug.rows_[i].get(c)) aug.rows_[i] ^= aug.rows_[r];
        pivots.push_back(c);
        ++r;
    }
    Gf2Vector residual = v;
    Gf2Vector coeffs(m);
    for (std::size_t i = 0; i < pivots.size(); ++i) {
        if (residual.get(pivots[i])) {
            for (std::size_t c = 0; c < cols_; ++c)
                if (aug.rows_[i].get(c)) residual.flip(c);
            for (std::size_t j = 0; j < m; ++j)
                if (aug.rows_[i].get(cols_ + j)) coeffs.flip(j);
        }
    }
    if (!residual.is_zero()) return std::nullopt;
    return coeffs;
}

std::vector<Gf2Vector> Gf2Matrix::null_space() const {
    Gf2Matrix copy(*this);
    auto pivots = copy.rref();
    std::vector<bool> is_pivot(cols_, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<Gf2Vector> basis;
    for (std::size_t free_col = 0; free_col < cols_; ++free_col) {
        if (is_pivot[free_col]) continue;
        Gf2Vector v(cols_);
        v.set(free_col, true);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            if (copy.rows_[r].get(free_col)) v.set(pivots[r], true);
        basis.push_back(std::move(v));
    }
    return basis;
}

bool Gf2Matrix::row_spans_equal(const Gf2Matrix& other) const {
    if (cols_ != other.cols_) return false;
    if (rank() != other.rank()) return false;
    for (std::size_t i = 0; i < other.num_rows(); ++i)
        if (!in_row_span(other.row(i))) return false;
    return true;
}

bool Gf2RankTracker::add(Gf2Vector v) {
    for (std::size_t i = 0; i < basis_.size(); ++i)
        if (pivots_[i] >= 0 && v.get(static_cast<std::size_t>(pivots_[i]))) v ^= basis_[i];
    int pivot = v.lowest_set_bit();
    if (pivot < 0) return false;
    basis_.push_back(std::move(v));
    pivots_.push_back(pivot);
    return true;
}

bool Gf2RankTracker::contains(Gf2Vector v) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
        if (pivots_[i] >= 0 && v.get(static_cast<std::size_t>(pivots_[i]))) v ^= basis_[i];
    return v.is_zero();
}

Gf2Vector pauli_to_gf2(const PauliOperator& p) {
    const std::size_t n = p.num_qubits();
    Gf2Vector v(2 * n);
    for (std::size_t q = 0; q < n; ++q) {
        if (p.x(q)) v.set(q, true);
        if (p.z(q)) v.set(n + q, true);
    }
    return v;
}

PauliOperator gf2_to_pauli(const Gf2Vector& v, std::size_t n) {
    PauliOperator p(n);
    for (std::size_t q = 0; q < n; ++q) {
        p.set_x(q, v.get(q));
        p.set_z(q, v.get(n + q));
    }
    return p;
}

namespace {

// Symplectic partner vector: <a,b> equals dot(a, omega(b)).
Gf2Vector omega(const PauliOperator& p) {
    const std::size_t n = p.num_qubits();
    Gf2Vector v(2 * n);
    for (std::size_t q = 0; q < n; ++q) {
        if (p.z(q)) v.set(q, true);
        if (p.x(q)) v.set(n + q, true);
    }
    return v;
}

// Any solution of rows[i] . v = rhs[i].
std::optional<Gf2Vector> solve_linear(const std::vector<Gf2Vector>& rows, const Gf2Vector& rhs,
                                      std::size_t cols) {
    const std::size_t m = rows.size();
    std::vector<Gf2Vector> a(rows);
    Gf2Vector b = rhs;
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < m; ++c) {
        std::size_t pivot = r;
        while (pivot < m && !a[pivot].get(c)) ++pivot;
        if (pivot == m) continue;
        std::swap(a[r], a[pivot]);
        bool br = b.get(r), bp = b.get(pivot);
        b.set(r, bp);
        b.set(pivot, br);
        for (std::size_t i = 0; i < m; ++i) {
            if (i != r && a[i].get(c)) {
                a[i] ^= a[r];
                if (b.get(r)) b.flip(i);
            }
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    for (std::size_t i = r; i < m; ++i)
        if (b.get(i) && a[i].is_zero()) return std::nullopt;
    // Rows past rank with nonzero residual but nonzero row cannot happen after rref.
    for (std::size_t i = r; i < m; ++i)
        if (b.get(i)) return std::nullopt;
    Gf2Vector x(cols);
    for (std::size_t i = 0; i < r; ++i)
        if (b.get(i)) x.set(static_cast<std::size_t>(pivot_col[i]), true);
    return x;
}

}  // namespace

std::size_t symplectic_rank(const std::vector<PauliOperator>& paulis) {
    if (paulis.empty()) return 0;
    Gf2Matrix m(2 * paulis[0].num_qubits());
    for (const auto& p : paulis) m.append_row(pauli_to_gf2(p));
    return m.rank();
}

bool in_pauli_span(const PauliOperator& p, const std::vector<PauliOperator>& generators) {
    Gf2Matrix m(2 * p.num_qubits());
    for (const auto& g : generators) m.append_row(pauli_to_gf2(g));
    return m.in_row_span(pauli_to_gf2(p));
}

std::optional<std::vector<int>> express_in_pauli_span(const PauliOperator& p,
                                                      const std::vector<PauliOperator>& generators) {
    Gf2Matrix m(2 * p.num_qubits());
    for (const auto& g : generators) m.append_row(pauli_to_gf2(g));
    auto coeffs = m.express_in_rows(pauli_to_gf2(p));
    if (!coeffs) return std::nullopt;
    std::vector<int> out(generators.size());
    for (std::size_t i = 0; i < generators.size(); ++i) out[i] = coeffs->get(i) ? 1 : 0;
    return out;
}

std::vector<PauliOperator> find_destabilizers(const std::vector<PauliOperator>& stabilizers,
                                              const std::vector<PauliOperator>& logical_x,
                                              const std::vector<PauliOperator>& logical_z) {
    if (stabilizers.empty()) return {};
    const std::size_t n = stabilizers[0].num_qubits();
    const std::size_t s = stabilizers.size();

    std::vector<PauliOperator> found;
    for (std::size_t i = 0; i < s; ++i) {
        std::vector<Gf2Vector> rows;
        std::vector<bool> rhs_bits;
        for (std::size_t j = 0; j < s; ++j) {
            rows.push_back(omega(stabilizers[j]));
            rhs_bits.push_back(i == j);
        }
        for (const auto& l : logical_x) {
            rows.push_back(omega(l));
            rhs_bits.push_back(false);
        }
        for (const auto& l : logical_z) {
            rows.push_back(omega(l));
            rhs_bits.push_back(false);
        }
        for (const auto& d : found) {
            rows.push_back(omega(d));
            rhs_bits.push_back(false);
        }
        Gf2Vector rhs(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) rhs.set(j, rhs_bits[j]);
        auto sol = solve_linear(rows, rhs, 2 * n);
        if (!sol) throw std::invalid_argument("stabilizers do not admit destabilizers (dependent set?)");
        found.push_back(gf2_to_pauli(*sol, n));
    }
    return found;
}

std::pair<std::vector<PauliOperator>, std::vector<PauliOperator>> find_logical_pairs(
    const std::vector<PauliOperator>& stabilizers) {
    if (stabilizers.empty()) throw std::invalid_argument("need at least one stabilizer");
    const std::size_t n = stabilizers[0].num_qubits();
    const std::size_t s = stabilizers.size();

    // Normalizer: kernel of the map v -> (<v, S_j>)_j.
    Gf2Matrix constraint(2 * n);
    for (const auto& g : stabilizers) constraint.append_row(omega(g));
    auto normalizer = constraint.null_space();

    // Quotient by the stabilizer span.
    Gf2RankTracker tracker(2 * n);
    for (const auto& g : stabilizers) tracker.add(pauli_to_gf2(g));
    std::vector<PauliOperator> reps;
    for (const auto& v : normalizer)
        if (tracker.add(v)) reps.push_back(gf2_to_pauli(v, n));
    if (reps.size() != 2 * (n - s))
        throw std::invalid_argument("stabilizer set is not independent");

    // Symplectic Gram-Schmidt into hyperbolic pairs.
    std::vector<PauliOperator> xs, zs;
    std::vector<PauliOperator> pool(reps);
    while (!pool.empty()) {
        PauliOperator a = pool.front();
        pool.erase(pool.begin());
        std::size_t partner = pool.size();
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (binary_commutator(a, pool[j])) {
                partner = j;
                break;
            }
        }
        if (partner == pool.size())
            throw std::logic_error("degenerate symplectic form on the logical space");
        PauliOperator b = pool[partner];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(partner));
        for (auto& c : pool) {
            if (binary_commutator(c, b)) c *= a;
            if (binary_commutator(c, a)) c *= b;
        }
        xs.push_back(a);
        zs.push_back(b);
    }
    return {xs, zs};
}

}  // namespace synlearn
