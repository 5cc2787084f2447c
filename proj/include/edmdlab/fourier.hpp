// fourier.hpp
// Finite symmetric-index Fourier coefficient vectors, Beurling-weighted norms,
// the Dirichlet truncation, and weighted operator norms of finite sections.
//
// Conventions (used throughout the library):
//   * coefficients follow the 1/2pi normalisation, c_k = (1/2pi) int e^{-ikx} f(x) dx,
//     so a probability density has c_0 = 1;
//   * a vector of order K stores c_k for k = -K+1..K-1 (dimension 2K-1) in
//     signed order; there is no FFT wraparound layout in the public model.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace edmdlab::fourier {

using cplx = std::complex<double>;

inline constexpr double two_pi = 6.28318530717958647692528676655900577;

// ---------------------------------------------------------------------------
// FourierVector: trigonometric polynomial of degree < order.
// ---------------------------------------------------------------------------
class FourierVector {
 public:
  FourierVector() : order_(1), coeffs_(1, cplx{}) {}
  explicit FourierVector(int order);
  FourierVector(int order, std::vector<cplx> coeffs);

  static FourierVector basis(int k, int order);  // e_k
  static FourierVector constant(cplx c);         // order 1

  int order() const { return order_; }
  int dim() const { return 2 * order_ - 1; }

  // coeff() is total: indices outside the stored range read as zero.
  cplx coeff(int k) const {
    return (k > -order_ && k < order_) ? coeffs_[k + order_ - 1] : cplx{};
  }
  void set(int k, cplx v);
  std::span<const cplx> raw() const { return coeffs_; }

  cplx evaluate(double x) const;
  // Values at the uniform grid x_l = 2 pi l / n, l = 0..n-1.
  std::vector<cplx> sample_grid(int n) const;
  std::vector<double> sample_grid_real(int n) const;

  // c_{-k} == conj(c_k) for all k, i.e. the function is real-valued.
  bool is_real_symmetric(double tol = 1e-12) const;
  // Enforce c_{-k} = conj(c_k) by averaging (used after eigensolves).
  FourierVector real_symmetrized() const;

  FourierVector derivative() const;  // c_k -> i k c_k
  double max_abs_coeff() const;

 private:
  int order_;
  std::vector<cplx> coeffs_;  // c_k at position k + order_ - 1
};

// ---------------------------------------------------------------------------
// BeurlingWeight: even positive weight k -> sigma(k), non-decreasing on N,
// sigma(0) <= 1 for the built-in kinds.  reciprocal() gives 1/sigma for the
// dual-space norms; the reciprocal is not itself a Beurling weight.
// ---------------------------------------------------------------------------
class BeurlingWeight {
 public:
  enum class Kind { hardy, sobolev, flat, custom };

  static BeurlingWeight hardy(double t);    // sqrt(cosh 2kt)
  static BeurlingWeight sobolev(double r);  // (1 + k^2)^{r/2}
  static BeurlingWeight flat();
  static BeurlingWeight custom(std::function<double(int)> eval,
                               std::string label = "custom");

  double operator()(int k) const { return eval_(k); }
  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  const std::string& label() const { return label_; }

  BeurlingWeight reciprocal() const;

 private:
  BeurlingWeight(Kind kind, double param, std::function<double(int)> eval,
                 std::string label)
      : kind_(kind), param_(param), eval_(std::move(eval)),
        label_(std::move(label)) {}

  Kind kind_;
  double param_;
  std::function<double(int)> eval_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// WeightedMatrix: dense finite section over symmetric Fourier index ranges.
// Row index j runs over -row_order+1..row_order-1, likewise columns.
// ---------------------------------------------------------------------------
struct WeightedMatrix {
  Eigen::MatrixXcd entries;
  int row_order = 0;
  int col_order = 0;
  BeurlingWeight row_weight = BeurlingWeight::flat();
  BeurlingWeight col_weight = BeurlingWeight::flat();

  WeightedMatrix() = default;
  WeightedMatrix(int row_order_, int col_order_);
  static WeightedMatrix identity(int order);

  int rows() const { return 2 * row_order - 1; }
  int cols() const { return 2 * col_order - 1; }
  bool square() const { return row_order == col_order; }

  cplx& at(int j, int k) { return entries(j + row_order - 1, k + col_order - 1); }
  cplx at(int j, int k) const {
    return entries(j + row_order - 1, k + col_order - 1);
  }

  // v must have order == col_order; result has order row_order.
  FourierVector apply(const FourierVector& v) const;
};

// ---------------------------------------------------------------------------
// Transforms and norms
// ---------------------------------------------------------------------------

// In-place radix-2 FFT, n a power of two.  forward: sum a_l e^{-2pi i kl/n}.
void fft_radix2(std::vector<cplx>& a, bool inverse);

// Trapezoidal Fourier coefficients on the uniform grid (spectrally accurate
// for periodic integrands).  Requires n >= 4*order as an anti-aliasing margin.
FourierVector dft_coeffs(std::span<const cplx> samples, int order);
FourierVector dft_coeffs(std::span<const double> samples, int order);

// Zero all coefficients with |k| >= order; the stored shape is kept.
FourierVector dirichlet_project(const FourierVector& v, int order);

// sqrt(sum_k w(k)^2 |c_k|^2)
double weighted_norm(const FourierVector& v, const BeurlingWeight& w);

struct SingularValueOptions {
  double tol = 1e-12;
  long max_iterations = 100000;
  // Sections up to this dimension use a full decomposition instead of
  // power iteration (near-degenerate top singular pairs stall the simple
  // iteration well before the cap at these sizes).
  int full_svd_threshold = 384;
};

// Largest singular value, by power iteration on A^H A with a full SVD
// fallback for small sections.  Deterministic start vector.
double largest_singular_value(const Eigen::MatrixXcd& a,
                              const SingularValueOptions& opts = {});

// ||diag(codomain) . M . diag(domain)^{-1}||_2 on the finite section.
double weighted_operator_norm(const WeightedMatrix& m,
                              const BeurlingWeight& domain,
                              const BeurlingWeight& codomain,
                              const SingularValueOptions& opts = {});

// Finite Toeplitz section of multiplication by the given symbol,
// T_{jk} = symbol_coeff(j - k).
WeightedMatrix toeplitz_matrix(const FourierVector& symbol, int order);

// Coefficient convolution: the product of the two trig polynomials.
FourierVector convolve(const FourierVector& a, const FourierVector& b);

}  // namespace edmdlab::fourier
