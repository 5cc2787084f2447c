#include "edmdlab/circle_map.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace edmdlab::circle_map {

using fourier::two_pi;

namespace {

constexpr int kCertGridSize = 1 << 14;

double wrap_2pi(double x) {
  double m = std::fmod(x, two_pi);
  if (m < 0.0) m += two_pi;
  if (m >= two_pi) m = 0.0;
  return m;
}

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Standard 53-bit mapping; avoids the implementation-defined distributions.
double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExpandingMap
// ---------------------------------------------------------------------------

ExpandingMap::ExpandingMap(int degree, FourierVector perturbation)
    : degree_(degree),
      perturbation_(std::move(perturbation)),
      perturbation_deriv_(perturbation_.derivative()) {
  if (degree_ < 2)
    throw std::invalid_argument("ExpandingMap: degree must be >= 2");
  if (!perturbation_.is_real_symmetric(1e-10))
    throw std::invalid_argument(
        "ExpandingMap: perturbation must be a real-valued trig polynomial");

  double min_deriv = std::numeric_limits<double>::infinity();
  double pmin = std::numeric_limits<double>::infinity();
  double pmax = -pmin;
  for (int l = 0; l < kCertGridSize; ++l) {
    const double x = two_pi * l / kCertGridSize;
    min_deriv = std::min(min_deriv, lift_derivative(x));
    const double pv = perturbation_.evaluate(x).real();
    pmin = std::min(pmin, pv);
    pmax = std::max(pmax, pv);
  }
  if (!(min_deriv > 1.0))
    throw std::invalid_argument(
        "ExpandingMap: not uniformly expanding; measured min f'(x) = " +
        std::to_string(min_deriv));
  gamma_ = min_deriv;
  kappa_ = 1.0 / min_deriv;
  p_min_ = pmin;
  p_max_ = pmax;
}

ExpandingMap ExpandingMap::doubling() {
  return ExpandingMap(2, FourierVector(1));
}

double ExpandingMap::lift(double x) const {
  return degree_ * x + perturbation_.evaluate(x).real();
}

double ExpandingMap::lift_derivative(double x) const {
  return degree_ + perturbation_deriv_.evaluate(x).real();
}

double ExpandingMap::evaluate(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("ExpandingMap::evaluate: non-finite x");
  return wrap_2pi(lift(x));
}

std::vector<double> ExpandingMap::inverse_branches(double y) const {
  y = wrap_2pi(y);
  const double lift0 = perturbation_.evaluate(0.0).real();  // f^(0)
  // The w branch targets are y + 2 pi j with f^(x) = target solvable in [0, 2pi).
  const int j0 = static_cast<int>(std::ceil((lift0 - y) / two_pi - 1e-15));
  std::vector<double> roots;
  roots.reserve(degree_);
  for (int j = j0; j < j0 + degree_; ++j) {
    const double target = y + two_pi * j;
    double lo = (target - p_max_) / degree_ - 1e-9;
    double hi = (target - p_min_) / degree_ + 1e-9;
    double x = 0.5 * (lo + hi);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const double r = lift(x) - target;
      if (std::abs(r) <= 1e-13) {
        converged = true;
        break;
      }
      if (r > 0.0) hi = x; else lo = x;
      double step = r / lift_derivative(x);
      double xn = x - step;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
      x = xn;
    }
    if (!converged)
      throw std::runtime_error(
          "inverse_branches: Newton/bisection failed; map may be miscertified");
    if (x < 0.0) x += two_pi;
    if (x >= two_pi) x -= two_pi;
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// ---------------------------------------------------------------------------
// DensitySpec
// ---------------------------------------------------------------------------

DensitySpec::DensitySpec(FourierVector coeffs) : coeffs_(std::move(coeffs)) {
  if (std::abs(coeffs_.coeff(0) - 1.0) > 1e-10)
    throw std::invalid_argument("DensitySpec: c_0 must equal 1");
  if (!coeffs_.is_real_symmetric(1e-10))
    throw std::invalid_argument("DensitySpec: coefficients must be conjugate-symmetric");
  coeffs_ = coeffs_.real_symmetrized();
  coeffs_.set(0, 1.0);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int l = 0; l < kCertGridSize; ++l) {
    const double v = evaluate(two_pi * l / kCertGridSize);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo > 0.0))
    throw std::runtime_error(
        "DensitySpec: density not positive on the certification grid (min = " +
        std::to_string(lo) + ")");
  m_low_ = lo;
  m_high_ = hi;
}

DensitySpec DensitySpec::uniform() {
  return DensitySpec(FourierVector::constant(1.0));
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::vector<double> trajectory(const ExpandingMap& map, double x0, long n,
                               long burn_in, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("trajectory: n must be >= 1");
  std::mt19937_64 gen(seed);
  double x = wrap_2pi(x0 + 1e-13 * uniform01(gen));
  for (long i = 0; i < burn_in; ++i) x = map.evaluate(x);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = x;
    x = map.evaluate(x);
  }
  return out;
}

std::vector<double> sample_iid(const DensitySpec& h, long n,
                               std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_iid: n must be >= 0");
  // Analytic CDF F(x) = (x + sum_{k>=1} 2 Re[c_k (e^{ikx}-1)/(ik)]) / 2pi.
  const auto& c = h.coeffs();
  auto cdf = [&c](double x) {
    double acc = x;
    const cplx z = std::polar(1.0, x);
    cplx zp = 1.0;
    for (int k = 1; k < c.order(); ++k) {
      zp *= z;
      acc += 2.0 * ((c.coeff(k) * (zp - 1.0)) / cplx(0.0, k)).real();
    }
    return acc / two_pi;
  };

  constexpr int kTable = 1 << 12;
  std::vector<double> table(kTable + 1);
  for (int i = 0; i <= kTable; ++i) table[i] = cdf(two_pi * i / kTable);
  table.front() = 0.0;
  table.back() = 1.0;

  std::mt19937_64 gen(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double u = uniform01(gen);
    auto it = std::upper_bound(table.begin(), table.end(), u);
    int idx = static_cast<int>(std::distance(table.begin(), it));
    idx = std::clamp(idx, 1, kTable);
    const double f0 = table[idx - 1], f1 = table[idx];
    const double x0 = two_pi * (idx - 1) / kTable;
    double x = x0 + (f1 > f0 ? (u - f0) / (f1 - f0) : 0.5) * (two_pi / kTable);
    x -= (cdf(x) - u) * two_pi / h.evaluate(x);  // one Newton step
    out[static_cast<std::size_t>(i)] = wrap_2pi(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transfer operator matrices
// ---------------------------------------------------------------------------

namespace {

// Lebesgue transfer matrix at grid size n: row j holds the Fourier
// coefficients of e^{-ij p(y)} shifted by j*w, which equals
// (1/2pi) int e^{-ij f^(y)} e^{iky} dy.
Eigen::MatrixXcd assemble_lebesgue(const ExpandingMap& map, int order, int n) {
  const int dim = 2 * order - 1;
  const int w = map.degree();
  Eigen::MatrixXcd L(dim, dim);
  const std::vector<double> p = map.perturbation().sample_grid_real(n);
  std::vector<cplx> g(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / n;
  for (int j = -order + 1; j < order; ++j) {
    for (int l = 0; l < n; ++l)
      g[static_cast<std::size_t>(l)] =
          std::polar(1.0, -static_cast<double>(j) * p[static_cast<std::size_t>(l)]);
    fourier::fft_radix2(g, false);
    for (int k = -order + 1; k < order; ++k) {
      const int m = j * w - k;
      const int idx = m >= 0 ? m : m + n;
      L(j + order - 1, k + order - 1) = g[static_cast<std::size_t>(idx)] * inv_n;
    }
  }
  return L;
}

Eigen::MatrixXcd lebesgue_transfer(const ExpandingMap& map, int order) {
  int n = std::max(next_pow2(4 * order * map.degree()), 1024);
  // The needed frequencies |j*w - k| must sit under Nyquist.
  n = std::max(n, next_pow2(2 * (order * (map.degree() + 1) + 2)));
  Eigen::MatrixXcd coarse = assemble_lebesgue(map, order, n);
  for (; n <= (1 << 20); n <<= 1) {
    Eigen::MatrixXcd fine = assemble_lebesgue(map, order, 2 * n);
    const double diff = (fine - coarse).cwiseAbs().maxCoeff();
    if (diff <= 1e-10) return fine;
    coarse = std::move(fine);
  }
  throw std::runtime_error(
      "transfer_matrix: quadrature did not stabilise to 1e-10 by grid 2^21");
}

}  // namespace

WeightedMatrix transfer_matrix(const ExpandingMap& map, const DensitySpec& h,
                               int order) {
  if (order < 1) throw std::invalid_argument("transfer_matrix: order must be >= 1");
  WeightedMatrix out(order, order);
  Eigen::MatrixXcd L1 = lebesgue_transfer(map, order);
  if (h.is_uniform()) {
    out.entries = std::move(L1);
    return out;
  }
  // L_mu = H^{-1} L_1 H with H the truncated Toeplitz multiplication by h.
  Eigen::MatrixXcd H = fourier::toeplitz_matrix(h.coeffs(), order).entries;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(H);
  out.entries = lu.solve(L1 * H);
  return out;
}

DensitySpec invariant_density(const ExpandingMap& map, int order) {
  WeightedMatrix L = transfer_matrix(map, DensitySpec::uniform(), order);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L.entries, true);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("invariant_density: eigensolver failed");

  const int dim = 2 * order - 1;
  int lead = 0;
  for (int i = 1; i < dim; ++i)
    if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(lead))) lead = i;
  double second = 0.0;
  for (int i = 0; i < dim; ++i)
    if (i != lead) second = std::max(second, std::abs(es.eigenvalues()(i)));
  if (std::abs(es.eigenvalues()(lead)) - second < 1e-8)
    throw std::runtime_error(
        "invariant_density: leading eigenvalue not simple (gap < 1e-8)");

  Eigen::VectorXcd v = es.eigenvectors().col(lead);
  const cplx c0 = v(order - 1);
  if (std::abs(c0) < 1e-12)
    throw std::runtime_error("invariant_density: degenerate leading eigenvector");
  v /= c0;

  const double residual = (L.entries * v - v).norm();
  if (residual > 1e-8)
    throw std::runtime_error(
        "invariant_density: fixed-point residual " + std::to_string(residual));

  std::vector<cplx> coeffs(v.data(), v.data() + v.size());
  FourierVector hv(order, std::move(coeffs));
  return DensitySpec(hv.real_symmetrized());  // ctor certifies positivity
}

}  // namespace edmdlab::circle_map
