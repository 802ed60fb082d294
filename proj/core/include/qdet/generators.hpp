#pragma once

#include "qdet/flowchart.hpp"
#include "qdet/qterm.hpp"

namespace qdet::gen {

/// Scalar product of two n-vectors. The chart is parametric over the
/// dimension n (bound when the determinant is built). With doubling the
/// chart reduces the products by strided pairwise summation (log-depth
/// tree); without it the products are accumulated sequentially.
Flowchart scalar_product(bool doubling = true);

/// Matrix product C = A * B with A n-by-k and B k-by-m, emitted directly as
/// a determinant of n*m unconditional terms c(i,j) = sum_s a(i,s)*b(s,j).
/// The doubling flag bakes the reduction shape into the expressions:
/// balanced pairing tree when on, left-nested chain when off.
QDeterminant matmul(int n, int k, int m, bool doubling = true);

/// Gauss-Jordan elimination with row-wise pivot search: at step k the first
/// nonzero entry of row k among the still-unused columns becomes the pivot.
/// Parametric over n; building enumerates every pivot-column permutation,
/// yielding n conditional terms of n! guarded pairs each.
Flowchart gauss_jordan();

/// Jacobi iteration for A x = b from the starting vector x0:
///   x_i <- b_i/a_ii - sum_{j != i} (a_ij/a_ii) x_j,
/// stopping when every |x_i_new - x_i_old| < eps. Declares `iterations`;
/// building truncates the conditional-infinite terms at depth L.
Flowchart jacobi_linear();

/// Gauss-Seidel iteration: same splitting as jacobi_linear but updating x
/// in place, so each sweep uses the current-iteration values of x_1..x_{i-1}.
Flowchart gauss_seidel();

/// Jacobi relaxation of a five-point stencil on a K-by-J periodic grid,
/// emitted directly as a determinant: outputs u(k,j) with truncated terms
///   { (v^1, u^1_kj), ..., (v^L, u^L_kj) },
///   u^n_kj = (f + a*u^{n-1}_{k-1,j} + b*u^{n-1}_{k,j-1}
///               + c*u^{n-1}_{k+1,j} + d*u^{n-1}_{k,j+1}) / e,
///   v^n = AND over the grid of |u^n_kj - u^{n-1}_kj| < eps.
/// Neighbor indices wrap around (torus), so every stage of the schedule has
/// the same five-level profile at every point.
QDeterminant grid_jacobi(int K, int J, int L);

} // namespace qdet::gen
