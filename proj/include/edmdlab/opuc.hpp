// opuc.hpp
// Multiplication operators, their Cholesky factorisation in the interleaved
// basis order 0, -1, 1, -2, 2, ..., mu-orthonormal trigonometric polynomials,
// the L^2(mu)-orthogonal projection onto degree-<K polynomials, outer
// (Szego-type) factors of 1/h, and the quantitative diagnostics built on
// them (diagonal deviations, projection error ratios, triangular norms).
//
// Finite-section policy: the triangular factors and the projection inherit
// the leading-principal-block structure of the Cholesky, so identities are
// asserted on the interior 75% of indices; the outer quarter is reserved as
// a boundary margin for quantities that genuinely feel the truncation
// (inverse sections, limiting factors).

#pragma once

#include "edmdlab/circle_map.hpp"
#include "edmdlab/fourier.hpp"

#include <utility>
#include <vector>

namespace edmdlab::opuc {

using circle_map::DensitySpec;
using fourier::BeurlingWeight;
using fourier::cplx;
using fourier::FourierVector;
using fourier::WeightedMatrix;

// ---------------------------------------------------------------------------
// InterleavedOrdering: bijection between signed Fourier index and position in
// the order 0, -1, 1, -2, 2, ...; the block {-m, m} sits at 2m-1, 2m.
// ---------------------------------------------------------------------------
struct InterleavedOrdering {
  int order = 0;  // positions cover signed indices |k| <= order-1

  explicit InterleavedOrdering(int order_);
  int size() const { return 2 * order - 1; }
  int position(int k) const;
  int index(int pos) const;
};

Eigen::MatrixXcd to_interleaved(const WeightedMatrix& m,
                                const InterleavedOrdering& ord);
WeightedMatrix from_interleaved(const Eigen::MatrixXcd& a,
                                const InterleavedOrdering& ord);

// ---------------------------------------------------------------------------
// TriangularPair: V lower, U = (V^{-1})^H upper, both in interleaved
// ordering, with V V^H reproducing the source multiplication matrix and
// real positive diagonals.
// ---------------------------------------------------------------------------
struct TriangularPair {
  InterleavedOrdering ordering;
  Eigen::MatrixXcd V;
  Eigen::MatrixXcd U;

  int order() const { return ordering.order; }
  // Largest |k| treated as interior (outer 25% of indices excluded).
  int interior_order() const { return (3 * (ordering.order - 1)) / 4; }
};

// ---------------------------------------------------------------------------
// SzegoFactors: outer factors of 1/h.  theta_plus and eta_plus carry
// non-negative frequencies only; theta_minus(x) = conj(theta_plus(x)) on the
// line, so theta+ theta- = 1/h and |theta+|^2 h = 1 pointwise.
// ---------------------------------------------------------------------------
struct SzegoFactors {
  FourierVector theta_plus, theta_minus, eta_plus, eta_minus;
  double c_bar = 1.0;  // sqrt((1/2pi) int 1/h dx)
};

// Limiting triangular factors built from one-sided multiplications and the
// mode-sign projections; same shape as a TriangularPair.
struct LimitingFactors {
  InterleavedOrdering ordering;
  Eigen::MatrixXcd U_bar;  // upper in interleaved ordering
  Eigen::MatrixXcd V_bar;  // lower in interleaved ordering
};

struct DiagonalDeviations {
  std::vector<int> indices;     // interior signed indices, ascending
  std::vector<double> s;        // e_k^H Ubar^H M Ubar e_k - 1
  std::vector<double> s_prime;  // e_k^H Vbar^H M^{-1} Vbar e_k - 1
};

struct ProjectionErrorRatio {
  double lhs = 0.0;    // ||(I - P_K)||_{W^sigma -> W^tau} on the section
  double rhs = 0.0;    // tau(K)/sigma(K)
  double ratio = 0.0;  // lhs / rhs
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Hermitian Toeplitz section M_{jk} = h^(j-k) of multiplication by h.
WeightedMatrix multiplication_matrix(const DensitySpec& h, int k_big);

// Cholesky factorisation in the interleaved ordering with positive real
// diagonal; U is obtained as the adjoint of the triangular inverse.
TriangularPair cholesky_interleaved(const WeightedMatrix& m);

// p_k = U e_k, a trig polynomial of degree exactly |k|, mu-orthonormal.
FourierVector orthonormal_poly(const TriangularPair& pair, int k);

// L^2(mu)-orthogonal projection onto degree-<K trig polynomials, as a matrix
// on Fourier coefficients over the pair's full section.
WeightedMatrix projection_matrix(const TriangularPair& pair, int k);

// Outer factors of 1/h via one-sided spectra of -log h, exponentiated on the
// grid.
SzegoFactors szego_factor(const DensitySpec& h, int k_big);

LimitingFactors limiting_factors(const SzegoFactors& sz, int k_big);

DiagonalDeviations diagonal_deviations(const SzegoFactors& sz,
                                       const WeightedMatrix& m, int k_big);

// Weighted-norm comparison of I - P_K against the Dirichlet bound
// tau(K)/sigma(K); tau/sigma must be non-increasing on N and K <= k_big/4.
ProjectionErrorRatio projection_error_ratio(const DensitySpec& h,
                                            const BeurlingWeight& sigma,
                                            const BeurlingWeight& tau, int k,
                                            int k_big);

// max of the four weighted finite-section norms ||U||, ||V||, ||U^H||, ||V^H||
// in W^sigma.
double triangular_norm_diagnostic(const TriangularPair& pair,
                                  const BeurlingWeight& sigma);

// (||U Ubar^{-1} - I||, ||V Vbar^{-1} - I||) in the L^2 -> W^sigma norm,
// using Ubar^{-1} = Vbar^H and Vbar^{-1} = Ubar^H.
std::pair<double, double> tilde_residuals(const TriangularPair& pair,
                                          const LimitingFactors& lim,
                                          const BeurlingWeight& sigma);

}  // namespace edmdlab::opuc
