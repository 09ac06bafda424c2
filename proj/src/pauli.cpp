#include "synlearn/pauli.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace synlearn {

PauliOperator PauliOperator::single(std::size_t n, std::size_t qubit, char kind) {
    if (qubit >= n) throw std::out_of_range("qubit index out of range");
    PauliOperator p(n);
    switch (kind) {
        case 'I': break;
        case 'X': p.set_x(qubit, true); break;
        case 'Y': p.set_x(qubit, true); p.set_z(qubit, true); break;
        case 'Z': p.set_z(qubit, true); break;
        default: throw std::invalid_argument("Pauli kind must be one of I,X,Y,Z");
    }
    return p;
}

bool PauliOperator::is_identity() const {
    for (std::size_t i = 0; i < x_.size(); ++i)
        if (x_[i] | z_[i]) return false;
    return true;
}

std::size_t PauliOperator::weight() const {
    std::size_t w = 0;
    for (std::size_t i = 0; i < x_.size(); ++i) w += std::popcount(x_[i] | z_[i]);
    return w;
}

PauliOperator PauliOperator::operator*(const PauliOperator& other) const {
    PauliOperator out(*this);
    out *= other;
    return out;
}

PauliOperator& PauliOperator::operator*=(const PauliOperator& other) {
    if (n_ != other.n_) throw std::invalid_argument("Pauli dimension mismatch");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        x_[i] ^= other.x_[i];
        z_[i] ^= other.z_[i];
    }
    return *this;
}

int binary_commutator(const PauliOperator& a, const PauliOperator& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("Pauli dimension mismatch");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.x_.size(); ++i)
        acc ^= (a.x_[i] & b.z_[i]) ^ (a.z_[i] & b.x_[i]);
    return std::popcount(acc) & 1;
}

std::vector<std::size_t> PauliOperator::support() const {
    std::vector<std::size_t> qs;
    for (std::size_t q = 0; q < n_; ++q)
        if (x(q) || z(q)) qs.push_back(q);
    return qs;
}

std::string PauliOperator::to_string() const {
    std::string s(n_, 'I');
    static const char kNames[4] = {'I', 'X', 'Y', 'Z'};
    for (std::size_t q = 0; q < n_; ++q) s[q] = kNames[pauli_digit(x(q), z(q))];
    return s;
}

std::string PauliOperator::to_sparse_string() const {
    static const char kNames[4] = {'I', 'X', 'Y', 'Z'};
    std::ostringstream out;
    bool first = true;
    for (std::size_t q = 0; q < n_; ++q) {
        int d = pauli_digit(x(q), z(q));
        if (d == 0) continue;
        if (!first) out << ' ';
        out << kNames[d] << (q + 1);
        first = false;
    }
    if (first) return "I";
    return out.str();
}

PauliOperator PauliOperator::parse(const std::string& text, std::size_t n) {
    // Sparse form contains digits; dense form is letters only.
    bool sparse = text.find_first_of("0123456789") != std::string::npos;
    PauliOperator p(n);
    if (!sparse) {
        std::string dense;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) dense.push_back(c);
        if (dense == "I" && n != 1) return p;
        if (dense.size() != n) throw std::invalid_argument("dense Pauli string has wrong length");
        for (std::size_t q = 0; q < n; ++q) {
            switch (dense[q]) {
                case 'I': break;
                case 'X': p.set_x(q, true); break;
                case 'Y': p.set_x(q, true); p.set_z(q, true); break;
                case 'Z': p.set_z(q, true); break;
                default: throw std::invalid_argument("invalid Pauli character");
            }
        }
        return p;
    }
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        char kind = token[0];
        std::size_t qubit = std::stoul(token.substr(1));
        if (qubit == 0 || qubit > n) throw std::out_of_range("sparse Pauli index out of range");
        PauliOperator factor = single(n, qubit - 1, kind);
        p *= factor;
    }
    return p;
}

std::size_t PauliOperator::hash() const {
    std::size_t h = n_ * 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::uint64_t v) {
        v *= 0xff51afd7ed558ccdull;
        v ^= v >> 33;
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto w : x_) mix(w);
    for (auto w : z_) mix(w ^ 0x5851f42d4c957f2dull);
    return h;
}

Support::Support(std::initializer_list<std::size_t> qs) : qubits(qs) {
    std::sort(qubits.begin(), qubits.end());
    if (std::adjacent_find(qubits.begin(), qubits.end()) != qubits.end())
        throw std::invalid_argument("support has duplicate indices");
}

Support::Support(std::vector<std::size_t> qs) : qubits(std::move(qs)) {
    std::sort(qubits.begin(), qubits.end());
    if (std::adjacent_find(qubits.begin(), qubits.end()) != qubits.end())
        throw std::invalid_argument("support has duplicate indices");
}

PauliOperator embed(LocalPauliIndex local, const Support& support, std::size_t n) {
    const std::size_t k = support.size();
    if (local >= pow4(k)) throw std::out_of_range("local Pauli rank out of range");
    PauliOperator p(n);
    for (std::size_t i = 0; i < k; ++i) {
        // Most-significant digit = first support qubit.
        int digit = static_cast<int>((local >> (2 * (k - 1 - i))) & 3);
        std::size_t q = support.qubits[i];
        if (q >= n) throw std::out_of_range("support index out of range");
        p.set_x(q, digit == 1 || digit == 2);
        p.set_z(q, digit == 2 || digit == 3);
    }
    return p;
}

LocalPauliIndex restrict_to(const PauliOperator& op, const Support& support) {
    const std::size_t k = support.size();
    LocalPauliIndex rank = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t q = support.qubits[i];
        rank = (rank << 2) | static_cast<LocalPauliIndex>(pauli_digit(op.x(q), op.z(q)));
    }
    return rank;
}

bool supported_on(const PauliOperator& op, const Support& support) {
    std::size_t idx = 0;
    for (std::size_t q = 0; q < op.num_qubits(); ++q) {
        while (idx < support.qubits.size() && support.qubits[idx] < q) ++idx;
        bool inside = idx < support.qubits.size() && support.qubits[idx] == q;
        if (!inside && (op.x(q) || op.z(q))) return false;
    }
    return true;
}

}  // namespace synlearn
