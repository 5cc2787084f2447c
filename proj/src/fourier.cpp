#include "edmdlab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edmdlab::fourier {

// ---------------------------------------------------------------------------
// FourierVector
// ---------------------------------------------------------------------------

FourierVector::FourierVector(int order) {
  if (order < 1) throw std::invalid_argument("FourierVector: order must be >= 1");
  order_ = order;
  coeffs_.assign(2 * order - 1, cplx{});
}

FourierVector::FourierVector(int order, std::vector<cplx> coeffs) {
  if (order < 1) throw std::invalid_argument("FourierVector: order must be >= 1");
  if (static_cast<int>(coeffs.size()) != 2 * order - 1)
    throw std::invalid_argument("FourierVector: coefficient count must be 2*order-1");
  order_ = order;
  coeffs_ = std::move(coeffs);
}

FourierVector FourierVector::basis(int k, int order) {
  FourierVector v(order);
  v.set(k, 1.0);
  return v;
}

FourierVector FourierVector::constant(cplx c) {
  FourierVector v(1);
  v.set(0, c);
  return v;
}

void FourierVector::set(int k, cplx v) {
  if (k <= -order_ || k >= order_)
    throw std::out_of_range("FourierVector::set: index outside stored range");
  coeffs_[k + order_ - 1] = v;
}

cplx FourierVector::evaluate(double x) const {
  // c_0 + sum_{k>=1} (c_k z^k + c_{-k} zbar^k), powers by recurrence.
  const cplx z = std::polar(1.0, x);
  const cplx zb = std::conj(z);
  cplx acc = coeff(0);
  cplx zp = 1.0, zbp = 1.0;
  for (int k = 1; k < order_; ++k) {
    zp *= z;
    zbp *= zb;
    acc += coeff(k) * zp + coeff(-k) * zbp;
  }
  return acc;
}

std::vector<cplx> FourierVector::sample_grid(int n) const {
  if (n < 1) throw std::invalid_argument("sample_grid: n must be >= 1");
  std::vector<cplx> out(n);
  for (int l = 0; l < n; ++l) out[l] = evaluate(two_pi * l / n);
  return out;
}

std::vector<double> FourierVector::sample_grid_real(int n) const {
  if (n < 1) throw std::invalid_argument("sample_grid: n must be >= 1");
  std::vector<double> out(n);
  for (int l = 0; l < n; ++l) out[l] = evaluate(two_pi * l / n).real();
  return out;
}

bool FourierVector::is_real_symmetric(double tol) const {
  for (int k = 0; k < order_; ++k)
    if (std::abs(coeff(-k) - std::conj(coeff(k))) > tol) return false;
  return true;
}

FourierVector FourierVector::real_symmetrized() const {
  FourierVector out(order_);
  for (int k = 0; k < order_; ++k) {
    cplx a = 0.5 * (coeff(k) + std::conj(coeff(-k)));
    out.set(k, a);
    if (k > 0) out.set(-k, std::conj(a));
  }
  return out;
}

FourierVector FourierVector::derivative() const {
  FourierVector out(order_);
  for (int k = -order_ + 1; k < order_; ++k)
    out.set(k, cplx(0.0, static_cast<double>(k)) * coeff(k));
  return out;
}

double FourierVector::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

// ---------------------------------------------------------------------------
// BeurlingWeight
// ---------------------------------------------------------------------------

BeurlingWeight BeurlingWeight::hardy(double t) {
  if (t < 0.0) throw std::invalid_argument("BeurlingWeight::hardy: t must be >= 0");
  return BeurlingWeight(
      Kind::hardy, t,
      [t](int k) { return std::sqrt(std::cosh(2.0 * k * t)); },
      "hardy(" + std::to_string(t) + ")");
}

BeurlingWeight BeurlingWeight::sobolev(double r) {
  if (r < 0.0) throw std::invalid_argument("BeurlingWeight::sobolev: r must be >= 0");
  return BeurlingWeight(
      Kind::sobolev, r,
      [r](int k) {
        return std::pow(1.0 + static_cast<double>(k) * k, 0.5 * r);
      },
      "sobolev(" + std::to_string(r) + ")");
}

BeurlingWeight BeurlingWeight::flat() {
  return BeurlingWeight(Kind::flat, 0.0, [](int) { return 1.0; }, "flat");
}

BeurlingWeight BeurlingWeight::custom(std::function<double(int)> eval,
                                      std::string label) {
  return BeurlingWeight(Kind::custom, 0.0, std::move(eval), std::move(label));
}

BeurlingWeight BeurlingWeight::reciprocal() const {
  auto base = eval_;
  return BeurlingWeight(Kind::custom, param_,
                        [base](int k) { return 1.0 / base(k); },
                        "1/" + label_);
}

// ---------------------------------------------------------------------------
// WeightedMatrix
// ---------------------------------------------------------------------------

WeightedMatrix::WeightedMatrix(int row_order_, int col_order_) {
  if (row_order_ < 1 || col_order_ < 1)
    throw std::invalid_argument("WeightedMatrix: orders must be >= 1");
  row_order = row_order_;
  col_order = col_order_;
  entries = Eigen::MatrixXcd::Zero(2 * row_order - 1, 2 * col_order - 1);
}

WeightedMatrix WeightedMatrix::identity(int order) {
  WeightedMatrix m(order, order);
  m.entries = Eigen::MatrixXcd::Identity(2 * order - 1, 2 * order - 1);
  return m;
}

FourierVector WeightedMatrix::apply(const FourierVector& v) const {
  if (v.order() != col_order)
    throw std::invalid_argument("WeightedMatrix::apply: order mismatch");
  Eigen::VectorXcd x(cols());
  for (int i = 0; i < cols(); ++i) x(i) = v.raw()[i];
  Eigen::VectorXcd y = entries * x;
  std::vector<cplx> out(y.data(), y.data() + y.size());
  return FourierVector(row_order, std::move(out));
}

// ---------------------------------------------------------------------------
// FFT and trapezoidal coefficients
// ---------------------------------------------------------------------------

void fft_radix2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cplx w = std::polar(1.0, ang * static_cast<double>(j));
        cplx u = a[i + j];
        cplx t = w * a[i + j + len / 2];
        a[i + j] = u + t;
        a[i + j + len / 2] = u - t;
      }
    }
  }
}

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

FourierVector dft_impl(std::span<const cplx> samples, int order) {
  const int n = static_cast<int>(samples.size());
  if (order < 1) throw std::invalid_argument("dft_coeffs: order must be >= 1");
  if (n < 4 * order)
    throw std::invalid_argument(
        "dft_coeffs: need n >= 4*order grid points (aliasing margin)");
  for (const auto& s : samples)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw std::invalid_argument("dft_coeffs: non-finite sample");

  FourierVector out(order);
  if (is_pow2(static_cast<std::size_t>(n))) {
    std::vector<cplx> a(samples.begin(), samples.end());
    fft_radix2(a, false);
    const double inv_n = 1.0 / n;
    for (int k = -order + 1; k < order; ++k) {
      int idx = k >= 0 ? k : k + n;
      out.set(k, a[static_cast<std::size_t>(idx)] * inv_n);
    }
    return out;
  }
  // General n: direct sums with per-point phasor recurrence.
  for (int k = -order + 1; k < order; ++k) {
    cplx acc = 0.0;
    for (int l = 0; l < n; ++l)
      acc += samples[static_cast<std::size_t>(l)] *
             std::polar(1.0, -two_pi * k * l / n);
    out.set(k, acc / static_cast<double>(n));
  }
  return out;
}

}  // namespace

FourierVector dft_coeffs(std::span<const cplx> samples, int order) {
  return dft_impl(samples, order);
}

FourierVector dft_coeffs(std::span<const double> samples, int order) {
  std::vector<cplx> c(samples.begin(), samples.end());
  return dft_impl(c, order);
}

FourierVector dirichlet_project(const FourierVector& v, int order) {
  if (order < 1) throw std::invalid_argument("dirichlet_project: order must be >= 1");
  if (order > v.order())
    throw std::invalid_argument("dirichlet_project: order exceeds vector order");
  FourierVector out(v.order());
  for (int k = -order + 1; k < order; ++k) out.set(k, v.coeff(k));
  return out;
}

double weighted_norm(const FourierVector& v, const BeurlingWeight& w) {
  double acc = 0.0;
  for (int k = -v.order() + 1; k < v.order(); ++k) {
    double wk = w(k);
    acc += wk * wk * std::norm(v.coeff(k));
  }
  return std::sqrt(acc);
}

double largest_singular_value(const Eigen::MatrixXcd& a,
                              const SingularValueOptions& opts) {
  const Eigen::Index nr = a.rows(), nc = a.cols();
  if (nr == 0 || nc == 0) return 0.0;
  if (std::min(nr, nc) <= 64) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
  }
  if (std::min(nr, nc) <= opts.full_svd_threshold) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
  }
  // Power iteration on A^H A.  Deterministic start vector.
  Eigen::VectorXcd v(nc);
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < nc; ++i) {
    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
    v(i) = cplx(1.0 + 1e-3 * static_cast<double>(s >> 40) / 16777216.0, 0.0);
  }
  v.normalize();
  double est = 0.0;
  for (long it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXcd w = a * v;
    double next = w.norm();
    if (next == 0.0) return 0.0;
    Eigen::VectorXcd u = a.adjoint() * w;
    double un = u.norm();
    if (un == 0.0) return next;
    v = u / un;
    if (std::abs(next - est) <= opts.tol * std::max(1.0, next)) return next;
    est = next;
  }
  throw std::runtime_error(
      "largest_singular_value: power iteration did not converge within " +
      std::to_string(opts.max_iterations) + " iterations");
}

FourierVector convolve(const FourierVector& a, const FourierVector& b) {
  FourierVector out(a.order() + b.order() - 1);
  for (int k = -out.order() + 1; k < out.order(); ++k) {
    cplx acc = 0.0;
    for (int j = -a.order() + 1; j < a.order(); ++j)
      acc += a.coeff(j) * b.coeff(k - j);
    out.set(k, acc);
  }
  return out;
}

WeightedMatrix toeplitz_matrix(const FourierVector& symbol, int order) {
  WeightedMatrix t(order, order);
  for (int j = -order + 1; j < order; ++j)
    for (int k = -order + 1; k < order; ++k)
      t.at(j, k) = symbol.coeff(j - k);
  return t;
}

double weighted_operator_norm(const WeightedMatrix& m,
                              const BeurlingWeight& domain,
                              const BeurlingWeight& codomain,
                              const SingularValueOptions& opts) {
  Eigen::MatrixXcd b(m.rows(), m.cols());
  for (int j = -m.row_order + 1; j < m.row_order; ++j) {
    const double cw = codomain(j);
    if (!(cw > 0.0) || !std::isfinite(cw))
      throw std::invalid_argument("weighted_operator_norm: codomain weight must be positive");
    for (int k = -m.col_order + 1; k < m.col_order; ++k) {
      const double dw = domain(k);
      if (!(dw > 0.0) || !std::isfinite(dw))
        throw std::invalid_argument("weighted_operator_norm: domain weight must be positive");
      b(j + m.row_order - 1, k + m.col_order - 1) = cw * m.at(j, k) / dw;
    }
  }
  return largest_singular_value(b, opts);
}

}  // namespace edmdlab::fourier
