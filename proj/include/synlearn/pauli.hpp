#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace synlearn {

// Phase-free n-qubit Pauli operator in binary symplectic form.
// Qubit q carries X iff x(q) && !z(q), Z iff !x(q) && z(q), Y iff both.
// Bits are packed into 64-bit words; commutators use word-parallel popcount.
class PauliOperator {
  public:
    PauliOperator() : n_(0) {}
    explicit PauliOperator(std::size_t n) : n_(n), x_(words(n), 0), z_(words(n), 0) {}

    static PauliOperator identity(std::size_t n) { return PauliOperator(n); }

    // Single-qubit factory, e.g. single(5, 2, 'Y') == I I Y I I.
    static PauliOperator single(std::size_t n, std::size_t qubit, char kind);

    std::size_t num_qubits() const { return n_; }

    bool x(std::size_t q) const { return (x_[q >> 6] >> (q & 63)) & 1u; }
    bool z(std::size_t q) const { return (z_[q >> 6] >> (q & 63)) & 1u; }

    void set_x(std::size_t q, bool v) { set_bit(x_, q, v); }
    void set_z(std::size_t q, bool v) { set_bit(z_, q, v); }

    bool is_identity() const;
    std::size_t weight() const;

    // Symplectic product (phases discarded). Self-inverse: a*a == identity.
    PauliOperator operator*(const PauliOperator& other) const;
    PauliOperator& operator*=(const PauliOperator& other);

    bool operator==(const PauliOperator& other) const { return n_ == other.n_ && x_ == other.x_ && z_ == other.z_; }
    bool operator!=(const PauliOperator& other) const { return !(*this == other); }

    // Binary commutator <a,b>: 0 if commuting, 1 if anticommuting.
    friend int binary_commutator(const PauliOperator& a, const PauliOperator& b);

    // Qubit indices with non-identity action, ascending.
    std::vector<std::size_t> support() const;

    // Dense text form, e.g. "IXZY". parse() accepts the dense form or the
    // sparse 1-based form "X2 Z5" (requires explicit n).
    std::string to_string() const;
    std::string to_sparse_string() const;
    static PauliOperator parse(const std::string& text, std::size_t n);

    std::size_t hash() const;

    const std::vector<std::uint64_t>& x_words() const { return x_; }
    const std::vector<std::uint64_t>& z_words() const { return z_; }

  private:
    static std::size_t words(std::size_t n) { return (n + 63) / 64; }
    static void set_bit(std::vector<std::uint64_t>& w, std::size_t q, bool v) {
        if (v)
            w[q >> 6] |= (std::uint64_t{1} << (q & 63));
        else
            w[q >> 6] &= ~(std::uint64_t{1} << (q & 63));
    }

    std::size_t n_;
    std::vector<std::uint64_t> x_;
    std::vector<std::uint64_t> z_;
};

int binary_commutator(const PauliOperator& a, const PauliOperator& b);

// Scalar commutator [[a,b]]: +1 if commuting, -1 if anticommuting.
inline int scalar_commutator(const PauliOperator& a, const PauliOperator& b) {
    return binary_commutator(a, b) ? -1 : 1;
}

// Ordered set of qubit indices a local channel or local Pauli acts on.
// For spacetime use the indices encode (q,t) pairs flattened to one index space.
struct Support {
    std::vector<std::size_t> qubits;

    Support() = default;
    Support(std::initializer_list<std::size_t> qs);
    explicit Support(std::vector<std::size_t> qs);

    std::size_t size() const { return qubits.size(); }
    bool operator==(const Support& other) const { return qubits == other.qubits; }
    bool operator<(const Support& other) const { return qubits < other.qubits; }
};

// Rank of a Pauli string on a support in the tensor order (I,X,Y,Z)^{|support|},
// most-significant base-4 digit = first support qubit. Rank 0 is the identity.
using LocalPauliIndex = std::size_t;

inline constexpr std::size_t pow4(std::size_t k) { return std::size_t{1} << (2 * k); }

// Base-4 digit of one qubit under the (I,X,Y,Z) = (0,1,2,3) mapping.
inline int pauli_digit(bool x, bool z) { return x ? (z ? 2 : 1) : (z ? 3 : 0); }

// Identity everywhere outside the support.
PauliOperator embed(LocalPauliIndex local, const Support& support, std::size_t n);

// Rank of the restriction of op to the support (components outside are dropped).
LocalPauliIndex restrict_to(const PauliOperator& op, const Support& support);

// True if op acts as identity everywhere outside the support.
bool supported_on(const PauliOperator& op, const Support& support);

}  // namespace synlearn

template <>
struct std::hash<synlearn::PauliOperator> {
    std::size_t operator()(const synlearn::PauliOperator& p) const { return p.hash(); }
};
