#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qdet/errors.hpp"

namespace qdet::formulas {

using BigInt = boost::multiprecision::cpp_int;

/// Scalar product of two n-vectors with pairwise summation:
/// D = ceil(log2 n) + 1, P = n.
int scalar_product_height(std::int64_t n);
std::int64_t scalar_product_width(std::int64_t n);

/// Gauss-Jordan elimination with column pivoting on an n x n system.
int gauss_jordan_height(std::int64_t n);             // 3n
int gauss_jordan_guard_height(std::int64_t n);       // 3n - 1
BigInt gauss_jordan_width_lower_bound(std::int64_t n); // (3/2)(n+1)!

/// Grid Jacobi relaxation on KJ points, truncated at n0 iterations:
/// D = 5*n0 + 3 + ceil(log2 KJ).
int grid_jacobi_height(std::int64_t kj, std::int64_t n0);

/// Width of the grid Jacobi schedule:
///   P = 5*KJ + sum_{i>=0, 8*32^i <= KJ} floor(KJ / (8*32^i)).
/// Specializes to 5KJ for KJ in 1..7 and 5KJ + floor(KJ/8) for 8..255.
std::int64_t grid_jacobi_width(std::int64_t kj);

/// Same width at KJ = 2^s in closed form:
///   P = 5*2^s + 2^(2+r) * (2^(s-r) - 1) / 31,  r = s mod 5 mapped into -2..2.
std::int64_t grid_jacobi_width_pow2(int s);

/// Width increase P(KJ+1) - P(KJ) from the digit decomposition
/// KJ = a + 8*b0 + 8*32*b1 + ... with a in 0..7, b_i in 0..31.
int grid_jacobi_width_increment(std::int64_t kj);

/// The decomposition itself plus the per-digit chain contributions
/// c_{p-3} = b_{p-3}, c_{i-1} = b_{i-1} + 32*c_i, so that
/// P = 5*KJ + sum c_i. Exposed for cross-checking the width formula.
struct WidthDecomposition {
    std::int64_t kj = 0;
    int stopping_stage = 0;        // p: 2 for KJ<8, then 3 + #extra digits
    int a = 0;                     // low digit, 0..7
    std::vector<int> b;            // base-32 digits above the low octal digit
    std::vector<std::int64_t> c;   // chain contributions, c.size() == b.size()

    static WidthDecomposition decompose(std::int64_t kj);
    std::int64_t width() const;    // 5*kj + sum c
};

} // namespace qdet::formulas
