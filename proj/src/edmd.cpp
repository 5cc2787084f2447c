#include "edmdlab/edmd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edmdlab::edmd {

using fourier::two_pi;

bool spectral_less(cplx a, cplx b) {
  // quantised keys keep the comparison a strict weak order
  const auto q = [](double x) { return std::round(x * 1e12); };
  const auto ka = std::make_tuple(-q(std::abs(a)), -q(a.real()), -a.imag());
  const auto kb = std::make_tuple(-q(std::abs(b)), -q(b.real()), -b.imag());
  return ka < kb;
}

void spectral_sort(std::vector<cplx>& values) {
  std::stable_sort(values.begin(), values.end(), spectral_less);
}

// ---------------------------------------------------------------------------
// DataMatrices
// ---------------------------------------------------------------------------

DataMatrices::DataMatrices(std::span<const double> samples,
                           const ExpandingMap& map, int order)
    : order_(order) {
  if (order < 1) throw std::invalid_argument("DataMatrices: order must be >= 1");
  const long n = static_cast<long>(samples.size());
  if (n < 2 * order - 1)
    throw std::invalid_argument(
        "DataMatrices: need at least 2K-1 samples (rank deficiency guaranteed)");
  x_.assign(samples.begin(), samples.end());
  fx_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) fx_[i] = map.evaluate(x_[i]);
}

Eigen::MatrixXcd DataMatrices::materialize(const std::vector<double>& xs) const {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXcd m(n, dict_size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const cplx z = std::polar(1.0, xs[static_cast<std::size_t>(r)]);
    cplx zp = 1.0, zn = 1.0;
    m(r, order_ - 1) = 1.0;
    for (int k = 1; k < order_; ++k) {
      zp *= z;
      zn *= std::conj(z);
      m(r, order_ - 1 + k) = zp;
      m(r, order_ - 1 - k) = zn;
    }
  }
  return m;
}

void DataMatrices::accumulate_normal_equations(Eigen::MatrixXcd& gram,
                                               Eigen::MatrixXcd& cross) const {
  const int d = dict_size();
  gram = Eigen::MatrixXcd::Zero(d, d);
  cross = Eigen::MatrixXcd::Zero(d, d);
  constexpr long kBlock = 8192;
  const long n = n_samples();
  Eigen::MatrixXcd p0(kBlock, d), p1(kBlock, d);
  for (long start = 0; start < n; start += kBlock) {
    const long rows = std::min(kBlock, n - start);
    for (long r = 0; r < rows; ++r) {
      const std::size_t i = static_cast<std::size_t>(start + r);
      const cplx z0 = std::polar(1.0, x_[i]);
      const cplx z1 = std::polar(1.0, fx_[i]);
      cplx a0 = 1.0, b0 = 1.0, a1 = 1.0, b1 = 1.0;
      p0(r, order_ - 1) = 1.0;
      p1(r, order_ - 1) = 1.0;
      for (int k = 1; k < order_; ++k) {
        a0 *= z0; b0 *= std::conj(z0);
        a1 *= z1; b1 *= std::conj(z1);
        p0(r, order_ - 1 + k) = a0;
        p0(r, order_ - 1 - k) = b0;
        p1(r, order_ - 1 + k) = a1;
        p1(r, order_ - 1 - k) = b1;
      }
    }
    const auto blk0 = p0.topRows(rows);
    const auto blk1 = p1.topRows(rows);
    gram.noalias() += blk0.adjoint() * blk0;
    cross.noalias() += blk0.adjoint() * blk1;
  }
}

// ---------------------------------------------------------------------------
// Koopman matrices
// ---------------------------------------------------------------------------

KoopmanMatrix koopman_matrix_data(const DataMatrices& dm, double ridge) {
  if (ridge < 0.0)
    throw std::invalid_argument("koopman_matrix_data: ridge must be >= 0");
  Eigen::MatrixXcd gram, cross;
  dm.accumulate_normal_equations(gram, cross);
  const int d = dm.dict_size();

  KoopmanMatrix km;
  km.order = dm.order();
  km.provenance = KoopmanMatrix::Provenance::data;
  km.n_samples = dm.n_samples();
  km.ridge = ridge;

  Eigen::MatrixXcd reg = gram;
  if (ridge > 0.0) reg += ridge * Eigen::MatrixXcd::Identity(d, d);

  Eigen::LDLT<Eigen::MatrixXcd> ldlt(reg);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("koopman_matrix_data: Hermitian factorisation failed");
  const auto diag = ldlt.vectorD();
  const double dmax = diag.cwiseAbs().maxCoeff();
  const double dmin = diag.cwiseAbs().minCoeff();
  if (!(dmin > 0.0))
    throw std::runtime_error("koopman_matrix_data: Gram matrix numerically singular");
  if (ridge == 0.0 && dmax / dmin > 1e12) {
    km.warning = "gram condition estimate " + std::to_string(dmax / dmin) +
                 " exceeds 1e12; consider a small ridge (e.g. " +
                 std::to_string(1e-10 * dmax) + ")";
  }
  km.entries = ldlt.solve(cross);
  return km;
}

namespace {

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Stiffness A_{jk} = (1/2pi) int e^{-ijx} e^{ikf(x)} h(x) dx: column k holds
// the Fourier coefficients of h e^{ikp} shifted by k*w.
Eigen::MatrixXcd assemble_stiffness(const ExpandingMap& map,
                                    const DensitySpec& h, int order, int n) {
  const int dim = 2 * order - 1;
  const int w = map.degree();
  Eigen::MatrixXcd a(dim, dim);
  const std::vector<double> p = map.perturbation().sample_grid_real(n);
  const std::vector<double> hv = h.coeffs().sample_grid_real(n);
  std::vector<cplx> g(static_cast<std::size_t>(n));
  for (int k = -order + 1; k < order; ++k) {
    for (int l = 0; l < n; ++l)
      g[static_cast<std::size_t>(l)] =
          hv[static_cast<std::size_t>(l)] *
          std::polar(1.0, static_cast<double>(k) * p[static_cast<std::size_t>(l)]);
    fourier::fft_radix2(g, false);
    for (int j = -order + 1; j < order; ++j) {
      const int freq = j - k * w;
      const int idx = freq >= 0 ? freq : freq + n;
      a(j + order - 1, k + order - 1) = g[static_cast<std::size_t>(idx)] / double(n);
    }
  }
  return a;
}

}  // namespace

KoopmanMatrix koopman_matrix_continuum(const ExpandingMap& map,
                                       const DensitySpec& h, int order) {
  if (order < 1)
    throw std::invalid_argument("koopman_matrix_continuum: order must be >= 1");
  int n = std::max(next_pow2(4 * order * map.degree()), 1024);
  n = std::max(n, next_pow2(2 * (order * (map.degree() + 1) + 2 * h.order())));
  Eigen::MatrixXcd coarse = assemble_stiffness(map, h, order, n);
  Eigen::MatrixXcd stiff;
  bool stable = false;
  for (; n <= (1 << 20); n <<= 1) {
    Eigen::MatrixXcd fine = assemble_stiffness(map, h, order, 2 * n);
    if ((fine - coarse).cwiseAbs().maxCoeff() <= 1e-10) {
      stiff = std::move(fine);
      stable = true;
      break;
    }
    coarse = std::move(fine);
  }
  if (!stable)
    throw std::runtime_error(
        "koopman_matrix_continuum: quadrature did not stabilise to 1e-10");

  const Eigen::MatrixXcd gram = fourier::toeplitz_matrix(h.coeffs(), order).entries;
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("koopman_matrix_continuum: Gram factorisation failed");

  KoopmanMatrix km;
  km.order = order;
  km.provenance = KoopmanMatrix::Provenance::continuum;
  km.entries = ldlt.solve(stiff);
  return km;
}

// ---------------------------------------------------------------------------
// Eigen-decomposition with matched left/right vectors
// ---------------------------------------------------------------------------

namespace {

void canonical_vector(Eigen::Ref<Eigen::VectorXcd> v) {
  v.normalize();
  Eigen::Index m = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > best + 1e-14) {
      best = std::abs(v(i));
      m = i;
    }
  if (best > 0.0) v *= std::conj(v(m)) / std::abs(v(m));
}

}  // namespace

SpectralResult eigendecompose(const Eigen::MatrixXcd& a, int order) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("eigendecompose: matrix must be square");
  if (!a.allFinite())
    throw std::invalid_argument("eigendecompose: non-finite entries");
  const int n = static_cast<int>(a.rows());

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(a, true);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> adj(a.adjoint(), true);
  if (right.info() != Eigen::Success || adj.info() != Eigen::Success)
    throw std::runtime_error(
        "eigendecompose: QR iteration failed (matrix Frobenius norm " +
        std::to_string(a.norm()) + ", dimension " + std::to_string(n) + ")");

  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) {
    return spectral_less(right.eigenvalues()(i), right.eigenvalues()(j));
  });

  SpectralResult sr;
  sr.order = order;
  sr.matrix_norm = a.norm();
  sr.eigenvalues.resize(n);
  sr.right_vectors.resize(n, n);
  sr.left_vectors.resize(n, n);
  sr.right_residuals.resize(n);
  sr.left_residuals.resize(n);

  // Left eigenvalues are conjugates of the adjoint's; match greedily to the
  // sorted right set (defective clusters pair arbitrarily but residuals are
  // still reported).
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int r = 0; r < n; ++r) {
    const cplx lambda = right.eigenvalues()(perm[static_cast<std::size_t>(r)]);
    int pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(std::conj(adj.eigenvalues()(j)) - lambda);
      if (d < best) {
        best = d;
        pick = j;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;

    sr.eigenvalues(r) = lambda;
    sr.right_vectors.col(r) = right.eigenvectors().col(perm[static_cast<std::size_t>(r)]);
    sr.left_vectors.col(r) = adj.eigenvectors().col(pick);
    canonical_vector(sr.right_vectors.col(r));
    canonical_vector(sr.left_vectors.col(r));
    sr.right_residuals(r) =
        (a * sr.right_vectors.col(r) - lambda * sr.right_vectors.col(r)).norm();
    sr.left_residuals(r) =
        (a.adjoint() * sr.left_vectors.col(r) -
         std::conj(lambda) * sr.left_vectors.col(r))
            .norm();
  }
  return sr;
}

SpectralResult eigendecompose(const KoopmanMatrix& km) {
  return eigendecompose(km.entries, km.order);
}

std::vector<cplx> eigenvalues_only(const Eigen::MatrixXcd& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues_only: QR iteration failed");
  std::vector<cplx> ev(es.eigenvalues().data(),
                       es.eigenvalues().data() + es.eigenvalues().size());
  spectral_sort(ev);
  return ev;
}

ModeTriple modes(const SpectralResult& sr, int j) {
  if (j < 0 || j >= sr.size())
    throw std::out_of_range("modes: rank index outside the spectrum");
  ModeTriple mt;
  mt.lambda = sr.eigenvalues(j);
  FourierVector left(sr.order), right(sr.order);
  for (int k = -sr.order + 1; k < sr.order; ++k) {
    left.set(k, sr.left_vectors(k + sr.order - 1, j));
    right.set(k, sr.right_vectors(k + sr.order - 1, j));
  }
  mt.left = std::move(left);
  mt.right = std::move(right);
  return mt;
}

}  // namespace edmdlab::edmd
