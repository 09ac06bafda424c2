#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "synlearn/pauli.hpp"

namespace synlearn {

// Bit-packed GF(2) row vector.
class Gf2Vector {
  public:
    Gf2Vector() : n_(0) {}
    explicit Gf2Vector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    std::size_t size() const { return n_; }
    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        if (v)
            w_[i >> 6] |= (std::uint64_t{1} << (i & 63));
        else
            w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }
    void flip(std::size_t i) { w_[i >> 6] ^= (std::uint64_t{1} << (i & 63)); }

    Gf2Vector& operator^=(const Gf2Vector& other) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= other.w_[i];
        return *this;
    }
    bool operator==(const Gf2Vector& other) const { return n_ == other.n_ && w_ == other.w_; }
    bool operator<(const Gf2Vector& other) const;

    bool is_zero() const;
    std::size_t popcount() const;
    int lowest_set_bit() const;  // -1 when zero
    int highest_set_bit() const;

    // Parity of the AND of two vectors (GF(2) inner product).
    friend int dot(const Gf2Vector& a, const Gf2Vector& b);

    std::vector<std::size_t> ones() const;

  private:
    std::size_t n_;
    std::vector<std::uint64_t> w_;
};

int dot(const Gf2Vector& a, const Gf2Vector& b);

// Dense GF(2) matrix as a list of bit-packed rows. Elimination uses partial
// pivoting on column order, so results are deterministic.
class Gf2Matrix {
  public:
    Gf2Matrix() : cols_(0) {}
    explicit Gf2Matrix(std::size_t cols) : cols_(cols) {}
    Gf2Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, Gf2Vector(cols)) {}

    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_cols() const { return cols_; }

    Gf2Vector& row(std::size_t i) { return rows_[i]; }
    const Gf2Vector& row(std::size_t i) const { return rows_[i]; }

    bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool v) { rows_[r].set(c, v); }

    void append_row(Gf2Vector v) { rows_.push_back(std::move(v)); }

    std::size_t rank() const;

    // Reduced row echelon form; returns pivot columns.
    std::vector<std::size_t> rref();

    // Is v in the row span?
    bool in_row_span(const Gf2Vector& v) const;

    // Solve x * rows = v (v as a combination of the rows); returns the
    // coefficient vector when consistent.
    std::optional<Gf2Vector> express_in_rows(const Gf2Vector& v) const;

    // Basis of { x : rows * x = 0 } (kernel of the matrix as a linear map).
    std::vector<Gf2Vector> null_space() const;

    bool row_spans_equal(const Gf2Matrix& other) const;

  private:
    std::size_t cols_;
    std::vector<Gf2Vector> rows_;
};

// Incremental GF(2) row basis for rank tracking.
class Gf2RankTracker {
  public:
    explicit Gf2RankTracker(std::size_t cols) : cols_(cols) {}
    std::size_t rank() const { return basis_.size(); }
    // Adds v to the basis if independent; returns true when the rank grew.
    bool add(Gf2Vector v);
    bool contains(Gf2Vector v) const;

  private:
    std::size_t cols_;
    std::vector<Gf2Vector> basis_;  // kept in echelon form by pivot
    std::vector<int> pivots_;
};

// Symplectic GF(2) helpers on phase-free Paulis.

Gf2Vector pauli_to_gf2(const PauliOperator& p);
PauliOperator gf2_to_pauli(const Gf2Vector& v, std::size_t n);

// Rank of the span of the given Paulis in the symplectic GF(2) space.
std::size_t symplectic_rank(const std::vector<PauliOperator>& paulis);

// Is p a product of elements of the given generating set?
bool in_pauli_span(const PauliOperator& p, const std::vector<PauliOperator>& generators);

// Coefficients expressing p as a product of the generators, if possible.
std::optional<std::vector<int>> express_in_pauli_span(const PauliOperator& p,
                                                      const std::vector<PauliOperator>& generators);

// Given independent commuting stabilizers, produce destabilizers D_i with
// <D_i,S_j> = delta_ij and <D_i,D_j> = 0. When logical_x/logical_z are
// supplied the destabilizers additionally commute with them.
std::vector<PauliOperator> find_destabilizers(const std::vector<PauliOperator>& stabilizers,
                                              const std::vector<PauliOperator>& logical_x = {},
                                              const std::vector<PauliOperator>& logical_z = {});

// Complete a stabilizer group to logical X/Z pairs: returns k pairs (X_i, Z_i)
// with the canonical commutation relations against the stabilizers and each
// other. k = n - |stabilizers|.
std::pair<std::vector<PauliOperator>, std::vector<PauliOperator>> find_logical_pairs(
    const std::vector<PauliOperator>& stabilizers);

}  // namespace synlearn
