// edmd.hpp
// Data-driven and continuum EDMD in the complex-exponential dictionary of
// degree < K: observable matrices, Koopman matrix assembly (least squares
// from data, quadrature in the continuum limit), eigen-decomposition with
// matched left/right vectors, and Koopman modes.

#pragma once

#include "edmdlab/circle_map.hpp"
#include "edmdlab/fourier.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edmdlab::edmd {

using circle_map::DensitySpec;
using circle_map::ExpandingMap;
using fourier::cplx;
using fourier::FourierVector;

// Canonical spectral order: descending modulus, ties by descending real part
// then descending imaginary part (quantised so conjugate pairs sort
// deterministically).
bool spectral_less(cplx a, cplx b);
void spectral_sort(std::vector<cplx>& values);

// ---------------------------------------------------------------------------
// DataMatrices: Psi0_{nk} = e_k(x_n), Psi1_{nk} = e_k(f(x_n)).  The samples
// are stored and rows are synthesised on demand, so the Gram accumulation
// stays streaming for large N.
// ---------------------------------------------------------------------------
class DataMatrices {
 public:
  DataMatrices(std::span<const double> samples, const ExpandingMap& map,
               int order);

  long n_samples() const { return static_cast<long>(x_.size()); }
  int order() const { return order_; }
  int dict_size() const { return 2 * order_ - 1; }

  Eigen::MatrixXcd psi0() const { return materialize(x_); }
  Eigen::MatrixXcd psi1() const { return materialize(fx_); }

  // gram += Psi0^H Psi0 and cross += Psi0^H Psi1, accumulated blockwise.
  void accumulate_normal_equations(Eigen::MatrixXcd& gram,
                                   Eigen::MatrixXcd& cross) const;

 private:
  Eigen::MatrixXcd materialize(const std::vector<double>& xs) const;

  std::vector<double> x_, fx_;
  int order_;
};

// ---------------------------------------------------------------------------
// KoopmanMatrix
// ---------------------------------------------------------------------------
struct KoopmanMatrix {
  enum class Provenance { data, continuum };

  Eigen::MatrixXcd entries;  // (2K-1)^2, signed Fourier layout
  int order = 0;
  Provenance provenance = Provenance::continuum;
  long n_samples = 0;        // data runs
  std::uint64_t seed = 0;    // data runs (recorded by the caller)
  double ridge = 0.0;
  std::string warning;       // conditioning note; empty when clean
};

// Least-squares Koopman matrix (Psi0^H Psi0 + ridge I)^{-1} Psi0^H Psi1 by
// Hermitian factorisation.  ridge defaults to 0; a condition estimate above
// 1e12 at zero ridge is surfaced in .warning.
KoopmanMatrix koopman_matrix_data(const DataMatrices& dm, double ridge = 0.0);

// Continuum limit G^{-1} A with G_{jk} = h^(j-k) and
// A_{jk} = (1/2pi) int e^{-ijx} e^{ikf(x)} h(x) dx (grid-doubling checked).
KoopmanMatrix koopman_matrix_continuum(const ExpandingMap& map,
                                       const DensitySpec& h, int order);

// ---------------------------------------------------------------------------
// SpectralResult: eigenvalues in canonical order with matched left/right
// eigenvector columns, unit Euclidean norm, largest-modulus entry rotated to
// the positive real axis; residuals ||A v - lambda v|| and ||w^H A - lambda w^H||.
// ---------------------------------------------------------------------------
struct SpectralResult {
  int order = 0;
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_vectors;
  Eigen::MatrixXcd left_vectors;
  Eigen::VectorXd right_residuals;
  Eigen::VectorXd left_residuals;
  double matrix_norm = 0.0;  // Frobenius norm of the decomposed matrix

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralResult eigendecompose(const Eigen::MatrixXcd& a, int order);
SpectralResult eigendecompose(const KoopmanMatrix& km);

// Eigenvalues only (canonical order); cheaper for oracle sweeps.
std::vector<cplx> eigenvalues_only(const Eigen::MatrixXcd& a);

struct ModeTriple {
  FourierVector left;   // a_j, DMD (left) mode in the Fourier dictionary
  FourierVector right;  // b_j, Koopman (right) mode
  cplx lambda;
};

// j-th triple by canonical rank.
ModeTriple modes(const SpectralResult& sr, int j);

}  // namespace edmdlab::edmd
