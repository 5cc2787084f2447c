#include "edmdlab/opuc.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace edmdlab::opuc {

using fourier::two_pi;

// ---------------------------------------------------------------------------
// InterleavedOrdering
// ---------------------------------------------------------------------------

InterleavedOrdering::InterleavedOrdering(int order_) : order(order_) {
  if (order < 1)
    throw std::invalid_argument("InterleavedOrdering: order must be >= 1");
}

int InterleavedOrdering::position(int k) const {
  if (k <= -order || k >= order)
    throw std::out_of_range("InterleavedOrdering::position: index out of range");
  if (k == 0) return 0;
  return k < 0 ? -2 * k - 1 : 2 * k;
}

int InterleavedOrdering::index(int pos) const {
  if (pos < 0 || pos >= size())
    throw std::out_of_range("InterleavedOrdering::index: position out of range");
  if (pos == 0) return 0;
  return (pos % 2 == 1) ? -(pos + 1) / 2 : pos / 2;
}

Eigen::MatrixXcd to_interleaved(const WeightedMatrix& m,
                                const InterleavedOrdering& ord) {
  if (m.row_order != ord.order || m.col_order != ord.order)
    throw std::invalid_argument("to_interleaved: order mismatch");
  const int n = ord.size();
  Eigen::MatrixXcd a(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) a(p, q) = m.at(ord.index(p), ord.index(q));
  return a;
}

WeightedMatrix from_interleaved(const Eigen::MatrixXcd& a,
                                const InterleavedOrdering& ord) {
  if (a.rows() != ord.size() || a.cols() != ord.size())
    throw std::invalid_argument("from_interleaved: size mismatch");
  WeightedMatrix m(ord.order, ord.order);
  for (int p = 0; p < ord.size(); ++p)
    for (int q = 0; q < ord.size(); ++q)
      m.at(ord.index(p), ord.index(q)) = a(p, q);
  return m;
}

// ---------------------------------------------------------------------------
// multiplication_matrix / cholesky_interleaved
// ---------------------------------------------------------------------------

WeightedMatrix multiplication_matrix(const DensitySpec& h, int k_big) {
  if (k_big < 1)
    throw std::invalid_argument("multiplication_matrix: order must be >= 1");
  return fourier::toeplitz_matrix(h.coeffs(), k_big);
}

TriangularPair cholesky_interleaved(const WeightedMatrix& m) {
  if (!m.square())
    throw std::invalid_argument("cholesky_interleaved: matrix must be square");
  InterleavedOrdering ord(m.row_order);
  Eigen::MatrixXcd a = to_interleaved(m, ord);
  const int n = ord.size();
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("cholesky_interleaved: matrix not Hermitian");

  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    if (j > 0) d -= v.row(j).head(j).squaredNorm();
    if (!(d > 0.0))
      throw std::runtime_error(
          "cholesky_interleaved: matrix numerically not positive definite "
          "(pivot " + std::to_string(d) + " at position " + std::to_string(j) + ")");
    const double piv = std::sqrt(d);
    v(j, j) = piv;
    for (int i = j + 1; i < n; ++i) {
      cplx sum = a(i, j);
      if (j > 0) sum -= v.row(j).head(j).dot(v.row(i).head(j));
      v(i, j) = sum / piv;
    }
  }
  Eigen::MatrixXcd u = v.triangularView<Eigen::Lower>()
                           .solve(Eigen::MatrixXcd::Identity(n, n))
                           .adjoint();
  return TriangularPair{ord, std::move(v), std::move(u)};
}

FourierVector orthonormal_poly(const TriangularPair& pair, int k) {
  if (std::abs(k) > pair.interior_order())
    throw std::invalid_argument("orthonormal_poly: index outside interior block");
  const int n = pair.ordering.size();
  FourierVector out(pair.order());
  const int col = pair.ordering.position(k);
  for (int p = 0; p < n; ++p) out.set(pair.ordering.index(p), pair.U(p, col));
  return out;
}

WeightedMatrix projection_matrix(const TriangularPair& pair, int k) {
  if (k < 1) throw std::invalid_argument("projection_matrix: order must be >= 1");
  if (k > pair.interior_order() + 1)
    throw std::invalid_argument("projection_matrix: order exceeds interior block");
  const int m = 2 * k - 1;  // retained interleaved positions
  // P = U D_K V^H; D_K keeps positions < m, so only the leading m columns of
  // U and V enter.
  Eigen::MatrixXcd p = pair.U.leftCols(m) * pair.V.leftCols(m).adjoint();
  return from_interleaved(p, pair.ordering);
}

// ---------------------------------------------------------------------------
// szego_factor and the limiting factors
// ---------------------------------------------------------------------------

namespace {

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Zero the coefficients on the wrong side and make sure they were noise.
FourierVector one_sided(const FourierVector& v, bool nonnegative,
                        const char* what) {
  FourierVector out(v.order());
  double junk = 0.0;
  for (int k = -v.order() + 1; k < v.order(); ++k) {
    const bool keep = nonnegative ? (k >= 0) : (k <= 0);
    if (keep)
      out.set(k, v.coeff(k));
    else
      junk = std::max(junk, std::abs(v.coeff(k)));
  }
  if (junk > 1e-8)
    throw std::runtime_error(std::string("szego_factor: ") + what +
                             " spectrum not one-sided (leak " +
                             std::to_string(junk) + ")");
  return out;
}

}  // namespace

SzegoFactors szego_factor(const DensitySpec& h, int k_big) {
  if (k_big < 1) throw std::invalid_argument("szego_factor: order must be >= 1");
  const int n = std::max(next_pow2(8 * k_big), 4096);
  // Stored factor order exceeds k_big so the grid identities hold to the
  // coefficient tail, not the section size.
  const int factor_order = std::min(n / 4, std::max(2 * k_big, 128));
  const std::vector<double> hv = h.coeffs().sample_grid_real(n);
  for (double x : hv)
    if (!(x > 1e-8))
      throw std::runtime_error("szego_factor: h too close to zero (log blowup)");

  std::vector<double> logh(hv.size());
  for (std::size_t i = 0; i < hv.size(); ++i) logh[i] = std::log(hv[i]);
  const FourierVector g = fourier::dft_coeffs(std::span<const double>(logh), n / 4);

  // log theta+ keeps half the zero mode and the positive modes of -log h.
  FourierVector log_theta(n / 4);
  log_theta.set(0, -0.5 * g.coeff(0));
  for (int k = 1; k < n / 4; ++k) log_theta.set(k, -g.coeff(k));

  const std::vector<cplx> lt = log_theta.sample_grid(n);
  std::vector<cplx> theta_vals(lt.size()), eta_vals(lt.size());
  for (std::size_t i = 0; i < lt.size(); ++i) {
    theta_vals[i] = std::exp(lt[i]);
    eta_vals[i] = std::exp(-lt[i]);
  }

  SzegoFactors sz;
  sz.theta_plus = one_sided(
      fourier::dft_coeffs(std::span<const cplx>(theta_vals), factor_order), true,
      "theta+");
  sz.eta_plus = one_sided(
      fourier::dft_coeffs(std::span<const cplx>(eta_vals), factor_order), true,
      "eta+");

  FourierVector tm(factor_order), em(factor_order);
  for (int k = 0; k < factor_order; ++k) {
    tm.set(-k, std::conj(sz.theta_plus.coeff(k)));
    em.set(-k, std::conj(sz.eta_plus.coeff(k)));
  }
  sz.theta_minus = std::move(tm);
  sz.eta_minus = std::move(em);

  double acc = 0.0;
  for (double x : hv) acc += 1.0 / x;
  sz.c_bar = std::sqrt(acc / static_cast<double>(n));
  return sz;
}

LimitingFactors limiting_factors(const SzegoFactors& sz, int k_big) {
  InterleavedOrdering ord(k_big);
  const int n = ord.size();
  Eigen::MatrixXcd ubar = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd vbar = Eigen::MatrixXcd::Zero(n, n);
  for (int j = -k_big + 1; j < k_big; ++j) {
    for (int k = -k_big + 1; k < k_big; ++k) {
      const int p = ord.position(j), q = ord.position(k);
      // Ubar = cbar P0 + P+ theta-  + P- theta+   (projection acts on rows)
      if (j == 0)
        ubar(p, q) = (k == 0) ? cplx(sz.c_bar) : cplx(0.0);
      else if (j > 0)
        ubar(p, q) = sz.theta_minus.coeff(j - k);
      else
        ubar(p, q) = sz.theta_plus.coeff(j - k);
      // Vbar = cbar^{-1} P0 + eta+ P+ + eta- P-   (projection acts on columns)
      if (k == 0)
        vbar(p, q) = (j == 0) ? cplx(1.0 / sz.c_bar) : cplx(0.0);
      else if (k > 0)
        vbar(p, q) = sz.eta_plus.coeff(j - k);
      else
        vbar(p, q) = sz.eta_minus.coeff(j - k);
    }
  }
  return LimitingFactors{ord, std::move(ubar), std::move(vbar)};
}

DiagonalDeviations diagonal_deviations(const SzegoFactors& sz,
                                       const WeightedMatrix& m, int k_big) {
  if (m.row_order != k_big || m.col_order != k_big)
    throw std::invalid_argument("diagonal_deviations: order mismatch");
  const LimitingFactors lim = limiting_factors(sz, k_big);
  const Eigen::MatrixXcd mi = to_interleaved(m, lim.ordering);
  Eigen::LLT<Eigen::MatrixXcd> llt(mi);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("diagonal_deviations: section not positive definite");

  DiagonalDeviations out;
  const int interior = (3 * (k_big - 1)) / 4;
  for (int k = -interior; k <= interior; ++k) {
    const int pos = lim.ordering.position(k);
    const Eigen::VectorXcd ucol = lim.U_bar.col(pos);
    const Eigen::VectorXcd vcol = lim.V_bar.col(pos);
    const double s = (ucol.dot(mi * ucol)).real() - 1.0;
    const double sp = (vcol.dot(llt.solve(vcol))).real() - 1.0;
    out.indices.push_back(k);
    out.s.push_back(s);
    out.s_prime.push_back(sp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics built on the factorisation
// ---------------------------------------------------------------------------

ProjectionErrorRatio projection_error_ratio(const DensitySpec& h,
                                            const BeurlingWeight& sigma,
                                            const BeurlingWeight& tau, int k,
                                            int k_big) {
  if (k < 1 || 4 * k > k_big)
    throw std::invalid_argument("projection_error_ratio: require 1 <= K <= K_big/4");
  for (int j = 0; j < k_big - 1; ++j)
    if (tau(j + 1) / sigma(j + 1) > tau(j) / sigma(j) * (1.0 + 1e-12))
      throw std::invalid_argument(
          "projection_error_ratio: tau/sigma must be non-increasing on N");

  const WeightedMatrix m = multiplication_matrix(h, k_big);
  const TriangularPair pair = cholesky_interleaved(m);
  WeightedMatrix imp = projection_matrix(pair, k);
  imp.entries = Eigen::MatrixXcd::Identity(imp.rows(), imp.cols()) - imp.entries;

  ProjectionErrorRatio r;
  r.lhs = fourier::weighted_operator_norm(imp, sigma, tau);
  r.rhs = tau(k) / sigma(k);
  r.ratio = r.lhs / r.rhs;
  return r;
}

double triangular_norm_diagnostic(const TriangularPair& pair,
                                  const BeurlingWeight& sigma) {
  double worst = 0.0;
  const Eigen::MatrixXcd* factors[2] = {&pair.U, &pair.V};
  for (const auto* f : factors) {
    for (bool adjoint : {false, true}) {
      Eigen::MatrixXcd a = adjoint ? f->adjoint() : *f;
      WeightedMatrix wm = from_interleaved(a, pair.ordering);
      worst = std::max(worst, fourier::weighted_operator_norm(wm, sigma, sigma));
    }
  }
  return worst;
}

std::pair<double, double> tilde_residuals(const TriangularPair& pair,
                                          const LimitingFactors& lim,
                                          const BeurlingWeight& sigma) {
  if (lim.ordering.order != pair.order())
    throw std::invalid_argument("tilde_residuals: order mismatch");
  const int n = pair.ordering.size();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  // Ubar^{-1} = Vbar^H and Vbar^{-1} = Ubar^H.
  WeightedMatrix ru =
      from_interleaved(pair.U * lim.V_bar.adjoint() - eye, pair.ordering);
  WeightedMatrix rv =
      from_interleaved(pair.V * lim.U_bar.adjoint() - eye, pair.ordering);
  const BeurlingWeight flat = BeurlingWeight::flat();
  return {fourier::weighted_operator_norm(ru, flat, sigma),
          fourier::weighted_operator_norm(rv, flat, sigma)};
}

}  // namespace edmdlab::opuc
