// circle_map.hpp
// Analytic expanding circle maps with trig-polynomial lifts, their inverse
// branches, trajectory / i.i.d. sampling, invariant densities, and
// Fourier-basis transfer operator matrices.

#pragma once

#include "edmdlab/fourier.hpp"

#include <cstdint>
#include <vector>

namespace edmdlab::circle_map {

using fourier::cplx;
using fourier::FourierVector;
using fourier::WeightedMatrix;

// ---------------------------------------------------------------------------
// ExpandingMap: lift f^(x) = w x + p(x), p a real trig polynomial.
// Construction certifies expansivity min f^'(x) = gamma > 1 on a fine grid
// (>= 2^14 points) and records the contraction rate kappa = max 1/f^'.
// Orientation-reversing maps are rejected.
// ---------------------------------------------------------------------------
class ExpandingMap {
 public:
  ExpandingMap(int degree, FourierVector perturbation);

  static ExpandingMap doubling();  // w = 2, p = 0

  int degree() const { return degree_; }
  const FourierVector& perturbation() const { return perturbation_; }
  double gamma() const { return gamma_; }  // certified min f^'
  double kappa() const { return kappa_; }  // certified max 1/f^' (< 1)

  double lift(double x) const;             // f^(x)
  double lift_derivative(double x) const;  // f^'(x)
  double evaluate(double x) const;         // f^(x) mod 2pi, in [0, 2pi)

  // All w preimages of y under f, ascending in [0, 2pi).  Newton on the
  // monotone lift with a bisection-guarded bracket; residual <= 1e-13.
  std::vector<double> inverse_branches(double y) const;

 private:
  int degree_;
  FourierVector perturbation_;
  FourierVector perturbation_deriv_;
  double gamma_ = 0.0;
  double kappa_ = 0.0;
  double p_min_ = 0.0, p_max_ = 0.0;  // range of p on the certification grid
};

// ---------------------------------------------------------------------------
// DensitySpec: probability density h with c_0 = 1 and a certified positive
// range [m_low, m_high] on a fine grid.
// ---------------------------------------------------------------------------
class DensitySpec {
 public:
  explicit DensitySpec(FourierVector coeffs);

  static DensitySpec uniform();  // h = 1

  const FourierVector& coeffs() const { return coeffs_; }
  int order() const { return coeffs_.order(); }
  bool is_uniform() const { return coeffs_.order() == 1; }
  double lower_bound() const { return m_low_; }
  double upper_bound() const { return m_high_; }

  double evaluate(double x) const { return coeffs_.evaluate(x).real(); }

 private:
  FourierVector coeffs_;
  double m_low_ = 0.0, m_high_ = 0.0;
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

// (x_{burn_in}, ..., x_{burn_in+n-1}) with x_{k+1} = f(x_k).  A seeded jitter
// <= 1e-13 is added to x0 only; deterministic given (x0, seed).
std::vector<double> trajectory(const ExpandingMap& map, double x0, long n,
                               long burn_in, std::uint64_t seed);

// n i.i.d. draws from the density h/(2pi) by numerically inverted CDF
// (analytic CDF tabulated on >= 2^12 points, monotone interpolation plus one
// Newton step).  Deterministic given seed.
std::vector<double> sample_iid(const DensitySpec& h, long n,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Transfer operator matrices
// ---------------------------------------------------------------------------

// Finite section of the mu-weighted transfer operator on Fourier modes
// |k| < K.  The Lebesgue matrix is assembled row-wise as shifted Fourier
// coefficients of e^{-ij p(y)} (grid doubling until entries are stable to
// 1e-10), then conjugated by the truncated Toeplitz multiplication by h.
WeightedMatrix transfer_matrix(const ExpandingMap& map, const DensitySpec& h,
                               int order);

// Leading eigenvector of the Lebesgue transfer matrix, normalised to c_0 = 1,
// real-symmetrized, positivity-certified.  Requires a simple leading
// eigenvalue (gap >= 1e-8) and residual ||L h - h||_2 <= 1e-8.
DensitySpec invariant_density(const ExpandingMap& map, int order);

}  // namespace edmdlab::circle_map
