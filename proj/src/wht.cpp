#include "synlearn/wht.hpp"

#include <stdexcept>

namespace synlearn {

namespace {

std::size_t checked_num_qubits(std::size_t len, std::size_t k_max) {
    std::size_t k = 0, v = 1;
    while (v < len) {
        v *= 4;
        ++k;
    }
    if (v != len) throw std::invalid_argument("vector length is not a power of 4");
    if (k > k_max) throw std::invalid_argument("support too large for dense Walsh-Hadamard transform");
    return k;
}

// One radix-4 stage applied at stride `h` across the whole vector.
void radix4_stage(std::vector<double>& v, std::size_t h) {
    for (std::size_t base = 0; base < v.size(); base += 4 * h) {
        for (std::size_t i = base; i < base + h; ++i) {
            double a = v[i], b = v[i + h], c = v[i + 2 * h], d = v[i + 3 * h];
            v[i] = a + b + c + d;
            v[i + h] = a + b - c - d;
            v[i + 2 * h] = a - b + c - d;
            v[i + 3 * h] = a - b - c + d;
        }
    }
}

}  // namespace

void walsh_hadamard(std::vector<double>& v, std::size_t k_max) {
    std::size_t k = checked_num_qubits(v.size(), k_max);
    for (std::size_t s = 0; s < k; ++s) {
        std::size_t h = std::size_t{1} << (2 * s);
        radix4_stage(v, h);
    }
}

void inverse_walsh_hadamard(std::vector<double>& v, std::size_t k_max) {
    std::size_t k = checked_num_qubits(v.size(), k_max);
    walsh_hadamard(v, k_max);
    double scale = 1.0 / static_cast<double>(std::size_t{1} << (2 * k));
    for (auto& x : v) x *= scale;
}

std::vector<double> walsh_hadamard_copy(const std::vector<double>& v, std::size_t k_max) {
    std::vector<double> out(v);
    walsh_hadamard(out, k_max);
    return out;
}

std::vector<double> inverse_walsh_hadamard_copy(const std::vector<double>& v, std::size_t k_max) {
    std::vector<double> out(v);
    inverse_walsh_hadamard(out, k_max);
    return out;
}

}  // namespace synlearn
