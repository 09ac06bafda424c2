#pragma once

#include <cstddef>
#include <vector>

namespace synlearn {

// Dense Walsh-Hadamard transforms on vectors of length 4^k, following the
// recursive structure W_{4^k} = W_4 (x) W_{4^{k-1}} with
//
//        1  1  1  1
//   W4 = 1  1 -1 -1      (rows/columns in the (I,X,Y,Z) tensor order)
//        1 -1  1 -1
//        1 -1 -1  1
//
// W is symmetric and W*W = 4^k * Id, so the inverse is W / 4^k.
// Supports up to k_max qubits per transform; larger vectors are rejected.

inline constexpr std::size_t kDefaultWalshHadamardMaxQubits = 4;

// In-place butterfly, v.size() must be a power of 4 and <= 4^k_max.
void walsh_hadamard(std::vector<double>& v, std::size_t k_max = kDefaultWalshHadamardMaxQubits);
void inverse_walsh_hadamard(std::vector<double>& v, std::size_t k_max = kDefaultWalshHadamardMaxQubits);

std::vector<double> walsh_hadamard_copy(const std::vector<double>& v,
                                        std::size_t k_max = kDefaultWalshHadamardMaxQubits);
std::vector<double> inverse_walsh_hadamard_copy(const std::vector<double>& v,
                                                std::size_t k_max = kDefaultWalshHadamardMaxQubits);

}  // namespace synlearn
