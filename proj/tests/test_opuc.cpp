#include "doctest.h"

#include "edmdlab/opuc.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>

using namespace edmdlab::opuc;
using edmdlab::circle_map::DensitySpec;
using edmdlab::circle_map::invariant_density;
using edmdlab::fourier::BeurlingWeight;
using edmdlab::fourier::cplx;
using edmdlab::fourier::FourierVector;
using edmdlab::fourier::two_pi;
using edmdlab::fourier::WeightedMatrix;

namespace {

DensitySpec cos_density() {  // h = 1 + 0.5 cos x
  FourierVector hv(2);
  hv.set(0, 1.0);
  hv.set(1, 0.25);
  hv.set(-1, 0.25);
  return DensitySpec(hv);
}

DensitySpec physical_density(int order = 96) {
  static DensitySpec cached = invariant_density(oracles::quartic_map(), 96);
  if (order == 96) return cached;
  return invariant_density(oracles::quartic_map(), order);
}

double interior_max_abs(const Eigen::MatrixXcd& a, const InterleavedOrdering& ord,
                        int interior) {
  double m = 0.0;
  for (int p = 0; p < ord.size(); ++p)
    for (int q = 0; q < ord.size(); ++q)
      if (std::abs(ord.index(p)) <= interior && std::abs(ord.index(q)) <= interior)
        m = std::max(m, std::abs(a(p, q)));
  return m;
}

}  // namespace

TEST_CASE("InterleavedOrdering: bijection and block layout") {
  InterleavedOrdering ord(6);
  CHECK(ord.size() == 11);
  CHECK(ord.position(0) == 0);
  for (int m = 1; m <= 5; ++m) {
    CHECK(ord.position(-m) == 2 * m - 1);
    CHECK(ord.position(m) == 2 * m);
  }
  for (int p = 0; p < ord.size(); ++p) CHECK(ord.position(ord.index(p)) == p);
  CHECK_THROWS_AS((void)ord.position(6), std::out_of_range);
}

TEST_CASE("multiplication_matrix: uniform density gives the identity") {
  auto m = multiplication_matrix(DensitySpec::uniform(), 8);
  CHECK((m.entries - Eigen::MatrixXcd::Identity(15, 15)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("multiplication_matrix: 1 + 0.5 cos x is tridiagonal Toeplitz") {
  auto m = multiplication_matrix(cos_density(), 6);
  for (int j = -5; j <= 5; ++j)
    for (int k = -5; k <= 5; ++k) {
      const cplx v = m.at(j, k);
      if (j == k)
        CHECK(v == cplx(1.0));
      else if (std::abs(j - k) == 1)
        CHECK(v == cplx(0.25));
      else
        CHECK(v == cplx(0.0));
    }
}

TEST_CASE("multiplication_matrix: positive definite down to min h") {
  auto m = multiplication_matrix(cos_density(), 64);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries);
  CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-8);
  CHECK(es.eigenvalues().maxCoeff() <= 1.5 + 1e-8);
}

TEST_CASE("cholesky_interleaved: identity input, determinism, diagonals") {
  auto m = multiplication_matrix(DensitySpec::uniform(), 8);
  auto pair = cholesky_interleaved(m);
  CHECK((pair.V - Eigen::MatrixXcd::Identity(15, 15)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pair.U - Eigen::MatrixXcd::Identity(15, 15)).cwiseAbs().maxCoeff() == 0.0);

  auto m2 = multiplication_matrix(cos_density(), 24);
  auto p1 = cholesky_interleaved(m2);
  auto p2 = cholesky_interleaved(m2);
  CHECK((p1.V - p2.V).cwiseAbs().maxCoeff() == 0.0);  // bitwise reproducible
  CHECK((p1.U - p2.U).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < p1.ordering.size(); ++i) {
    CHECK(p1.V(i, i).imag() == 0.0);
    CHECK(p1.V(i, i).real() > 0.0);
  }
}

TEST_CASE("cholesky_interleaved: reconstruction and inverse-pair invariants") {
  for (const auto& h : {cos_density(), physical_density()}) {
    const int k_big = 64;
    auto m = multiplication_matrix(h, k_big);
    auto pair = cholesky_interleaved(m);
    const auto mi = to_interleaved(m, pair.ordering);
    const int interior = pair.interior_order();

    CHECK(interior_max_abs(pair.V * pair.V.adjoint() - mi, pair.ordering,
                           interior) <= 1e-10);
    const Eigen::MatrixXcd eye =
        Eigen::MatrixXcd::Identity(pair.ordering.size(), pair.ordering.size());
    CHECK(interior_max_abs(pair.U.adjoint() * pair.V - eye, pair.ordering,
                           interior) <= 1e-10);
  }
}

TEST_CASE("cholesky_interleaved: rejects indefinite sections") {
  WeightedMatrix bad(4, 4);
  bad.entries = -Eigen::MatrixXcd::Identity(7, 7);
  CHECK_THROWS_AS((void)cholesky_interleaved(bad), std::runtime_error);
}

TEST_CASE("orthonormal_poly: uniform density reduces to Fourier modes") {
  auto pair = cholesky_interleaved(multiplication_matrix(DensitySpec::uniform(), 8));
  for (int k : {-3, 0, 2}) {
    auto p = orthonormal_poly(pair, k);
    for (int j = -7; j <= 7; ++j)
      CHECK(p.coeff(j) == (j == k ? cplx(1.0) : cplx(0.0)));
  }
}

TEST_CASE("orthonormal_poly: Gram-Schmidt oracle and degree structure") {
  for (const auto& h : {cos_density(), physical_density()}) {
    auto pair = cholesky_interleaved(multiplication_matrix(h, 32));
    auto onb = oracles::gram_schmidt_onb(h, 8);
    for (int k = -8; k <= 8; ++k) {
      auto p = orthonormal_poly(pair, k);
      const auto& q = onb[static_cast<std::size_t>(pair.ordering.position(k))];
      for (int j = -8; j <= 8; ++j) CHECK(std::abs(p.coeff(j) - q.coeff(j)) <= 1e-8);
      // degree exactly |k|: leading coefficient nonzero, coefficients beyond
      // the interleaved position of k vanish identically
      CHECK(std::abs(p.coeff(k)) > 0.0);
      for (int j = std::abs(k) + 1; j < p.order(); ++j) {
        CHECK(p.coeff(j) == cplx(0.0));
        CHECK(p.coeff(-j) == cplx(0.0));
      }
      if (k < 0) CHECK(p.coeff(-k) == cplx(0.0));
    }
  }
}

TEST_CASE("orthonormal_poly: p_0 is the unit constant and pairs are orthonormal") {
  auto h = cos_density();
  auto pair = cholesky_interleaved(multiplication_matrix(h, 32));
  auto p0 = orthonormal_poly(pair, 0);
  CHECK(std::abs(p0.coeff(0) - 1.0) <= 1e-12);

  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 25; ++rep) {
    const int j = static_cast<int>(oracles::uniform01(gen) * 41) - 20;
    const int k = static_cast<int>(oracles::uniform01(gen) * 41) - 20;
    auto pj = orthonormal_poly(pair, j);
    auto pk = orthonormal_poly(pair, k);
    const cplx ip = oracles::mu_inner(pj, pk, h);
    const cplx expect = (j == k) ? cplx(1.0) : cplx(0.0);
    CHECK(std::abs(ip - expect) <= 1e-9);
  }
}

TEST_CASE("cholesky_interleaved agrees with the real-basis + block-LQ route") {
  for (const auto& h : {cos_density(), physical_density()}) {
    for (int k_big : {8, 16}) {
      auto m = multiplication_matrix(h, k_big);
      auto pair = cholesky_interleaved(m);
      auto v_proof = oracles::real_basis_cholesky_V(m);
      CHECK((pair.V - v_proof).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("projection_matrix: uniform density gives the Dirichlet mask") {
  auto pair = cholesky_interleaved(multiplication_matrix(DensitySpec::uniform(), 16));
  auto p = projection_matrix(pair, 6);
  for (int j = -15; j <= 15; ++j)
    for (int k = -15; k <= 15; ++k) {
      const cplx expect = (j == k && std::abs(k) < 6) ? cplx(1.0) : cplx(0.0);
      CHECK(p.at(j, k) == expect);
    }
}

TEST_CASE("projection_matrix: idempotent, mu-self-adjoint, right rank") {
  auto h = cos_density();
  const int k_big = 48, k = 8;
  auto m = multiplication_matrix(h, k_big);
  auto pair = cholesky_interleaved(m);
  auto p = projection_matrix(pair, k);

  CHECK((p.entries * p.entries - p.entries).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(p.entries.trace().real() - (2 * k - 1)) <= 1e-9);
  CHECK((m.entries * p.entries - p.entries.adjoint() * m.entries)
            .cwiseAbs()
            .maxCoeff() <= 1e-9);

  // Acts as the identity on degree-<k polynomials.
  std::mt19937_64 gen(17);
  auto low = oracles::random_trig_poly(k, gen);
  FourierVector padded(k_big);
  for (int j = -k + 1; j < k; ++j) padded.set(j, low.coeff(j));
  auto image = p.apply(padded);
  for (int j = -k_big + 1; j < k_big; ++j)
    CHECK(std::abs(image.coeff(j) - padded.coeff(j)) <= 1e-10);
}

TEST_CASE("projection_matrix: eigenaction on the orthonormal polynomials") {
  auto h = cos_density();
  auto pair = cholesky_interleaved(multiplication_matrix(h, 48));
  auto p = projection_matrix(pair, 8);
  for (int k : {-20, -8, -3, 0, 5, 7, 8, 15}) {
    auto pk = orthonormal_poly(pair, k);
    auto image = p.apply(pk);
    const double scale = (std::abs(k) < 8) ? 1.0 : 0.0;
    for (int j = -47; j <= 47; ++j)
      CHECK(std::abs(image.coeff(j) - scale * pk.coeff(j)) <= 1e-9);
  }
}

TEST_CASE("projection_matrix: least-squares oracle for e_K") {
  auto h = cos_density();
  const int k = 6, k_big = 48;
  auto pair = cholesky_interleaved(multiplication_matrix(h, k_big));
  auto p = projection_matrix(pair, k);
  auto image = p.apply(FourierVector::basis(k, k_big));

  // Normal equations under the quadrature mu-inner product.
  const int dim = 2 * k - 1;
  Eigen::MatrixXcd g(dim, dim);
  Eigen::VectorXcd b(dim);
  const auto ek = FourierVector::basis(k, k_big);
  for (int j = -k + 1; j < k; ++j) {
    for (int l = -k + 1; l < k; ++l)
      g(j + k - 1, l + k - 1) = oracles::mu_inner(FourierVector::basis(j, k),
                                                  FourierVector::basis(l, k), h);
    b(j + k - 1) = oracles::mu_inner(FourierVector::basis(j, k), ek, h);
  }
  Eigen::VectorXcd c = g.ldlt().solve(b);
  CHECK(c.norm() > 1e-3);  // genuinely nonzero fit
  for (int j = -k_big + 1; j < k_big; ++j) {
    const cplx expect =
        (std::abs(j) < k) ? c(j + k - 1) : cplx(0.0);
    CHECK(std::abs(image.coeff(j) - expect) <= 1e-8);
  }
}

TEST_CASE("szego_factor: uniform density is exactly trivial") {
  auto sz = szego_factor(DensitySpec::uniform(), 16);
  CHECK(sz.c_bar == 1.0);
  for (int k = -15; k <= 15; ++k) {
    const cplx expect = (k == 0) ? cplx(1.0) : cplx(0.0);
    CHECK(sz.theta_plus.coeff(k) == expect);
    CHECK(sz.theta_minus.coeff(k) == expect);
    CHECK(sz.eta_plus.coeff(k) == expect);
    CHECK(sz.eta_minus.coeff(k) == expect);
  }
}

TEST_CASE("szego_factor: grid identities and coefficient decay") {
  // h = exp(0.5 cos x) / I_0(0.5), via its normalised Fourier coefficients.
  const int n = 512;
  std::vector<double> s(n);
  for (int l = 0; l < n; ++l) s[l] = std::exp(0.5 * std::cos(two_pi * l / n));
  auto raw = edmdlab::fourier::dft_coeffs(std::span<const double>(s), 24);
  FourierVector hv(24);
  for (int k = -23; k <= 23; ++k) hv.set(k, raw.coeff(k) / raw.coeff(0));
  DensitySpec bessel_h(hv);

  for (const auto& h : {cos_density(), bessel_h, physical_density()}) {
    const int k_big = 48;
    auto sz = szego_factor(h, k_big);
    for (int l = 0; l < 256; ++l) {
      const double x = two_pi * l / 256;
      const cplx tp = sz.theta_plus.evaluate(x);
      const cplx tm = sz.theta_minus.evaluate(x);
      const double hx = h.evaluate(x);
      CHECK(std::abs(tp * tm - 1.0 / hx) <= 1e-10);
      CHECK(std::abs(std::norm(tp) * hx - 1.0) <= 1e-10);
      CHECK(std::abs(tm - std::conj(tp)) <= 1e-10);
      CHECK(std::abs(sz.eta_plus.evaluate(x) * tp - 1.0) <= 1e-10);
      CHECK(std::abs(sz.eta_minus.evaluate(x) * tm - 1.0) <= 1e-10);
    }
    // One-sided supports.
    for (int k = 1; k < k_big; ++k) {
      CHECK(sz.theta_plus.coeff(-k) == cplx(0.0));
      CHECK(sz.eta_plus.coeff(-k) == cplx(0.0));
      CHECK(sz.theta_minus.coeff(k) == cplx(0.0));
      CHECK(sz.eta_minus.coeff(k) == cplx(0.0));
    }
    // Weighted tail sum of Prop-style diagnostics: finite and reported.
    auto sigma = BeurlingWeight::hardy(0.1);
    double tail = 0.0;
    for (int l = 0; l < k_big; ++l)
      tail += l * sigma(l) * sigma(l) * std::norm(sz.theta_plus.coeff(l));
    CHECK(std::isfinite(tail));
    MESSAGE("weighted theta+ tail sum: ", tail);
  }

  // c_bar for h = 1 + 0.5 cos x: (1/2pi) int 1/h = 1/sqrt(1 - 0.25).
  auto sz = szego_factor(cos_density(), 48);
  CHECK(sz.c_bar == doctest::Approx(std::sqrt(1.0 / std::sqrt(0.75))).epsilon(1e-10));

  // Exponential decay of theta+ coefficients for analytic h.
  std::vector<double> ks, logs;
  auto szc = szego_factor(cos_density(), 48);
  for (int k = 1; k < 48; ++k) {
    const double a = std::abs(szc.theta_plus.coeff(k));
    if (a > 1e-13) {
      ks.push_back(k);
      logs.push_back(std::log10(a));
    }
  }
  auto fit = oracles::linear_fit(ks, logs);
  CHECK(fit.slope < -0.1);
}

TEST_CASE("szego_factor: rejects a density that is not resolved") {
  CHECK_THROWS_AS((void)szego_factor(DensitySpec::uniform(), 0),
                  std::invalid_argument);
}

TEST_CASE("limiting_factors: trivial case, inverse relation, bandedness onset") {
  auto trivial = limiting_factors(szego_factor(DensitySpec::uniform(), 12), 12);
  CHECK((trivial.U_bar - Eigen::MatrixXcd::Identity(23, 23)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((trivial.V_bar - Eigen::MatrixXcd::Identity(23, 23)).cwiseAbs().maxCoeff() ==
        0.0);

  for (const auto& h : {cos_density(), physical_density()}) {
    const int k_big = 48;
    auto sz = szego_factor(h, k_big);
    auto lim = limiting_factors(sz, k_big);
    const int n = lim.ordering.size();
    // Ubar^H Vbar = I exactly on the section (lower-triangular product).
    CHECK((lim.U_bar.adjoint() * lim.V_bar - Eigen::MatrixXcd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() <= 1e-9);

    // ||(U - Ubar) e_k|| decays as |k| grows: bandedness onset.
    auto pair = cholesky_interleaved(multiplication_matrix(h, k_big));
    const Eigen::MatrixXcd diff = pair.U - lim.U_bar;
    const double near = diff.col(lim.ordering.position(2)).norm();
    const double far = diff.col(lim.ordering.position(pair.interior_order())).norm();
    CHECK(far <= 0.5 * near);
  }
}

TEST_CASE("diagonal_deviations: trivial case is exactly zero") {
  const int k_big = 16;
  auto sz = szego_factor(DensitySpec::uniform(), k_big);
  auto m = multiplication_matrix(DensitySpec::uniform(), k_big);
  auto dev = diagonal_deviations(sz, m, k_big);
  for (std::size_t i = 0; i < dev.indices.size(); ++i) {
    CHECK(dev.s[i] == 0.0);
    CHECK(dev.s_prime[i] == 0.0);
  }
}

TEST_CASE("diagonal_deviations: s' vanishes, s decays exponentially") {
  auto h = cos_density();
  const int k_big = 32;
  auto dev = diagonal_deviations(szego_factor(h, k_big),
                                 multiplication_matrix(h, k_big), k_big);
  double max_sp = 0.0;
  for (std::size_t i = 0; i < dev.indices.size(); ++i) {
    max_sp = std::max(max_sp, std::abs(dev.s_prime[i]));
    CHECK(dev.s[i] > -1.0);
  }
  CHECK(max_sp <= 1e-9);

  std::vector<double> ks, logs;
  for (std::size_t i = 0; i < dev.indices.size(); ++i)
    if (dev.indices[i] > 0 && std::abs(dev.s[i]) > 1e-14) {
      ks.push_back(dev.indices[i]);
      logs.push_back(std::log10(std::abs(dev.s[i])));
    }
  REQUIRE(ks.size() >= 4);
  auto fit = oracles::linear_fit(ks, logs);
  CHECK(fit.slope < 0.0);

  // Partial sums converge: the last quarter contributes under 5%.
  auto sigma = BeurlingWeight::hardy(0.1);
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < dev.indices.size(); ++i) {
    const double term =
        sigma(dev.indices[i]) * sigma(dev.indices[i]) * std::abs(dev.s[i]);
    total += term;
    if (std::abs(dev.indices[i]) > 3 * dev.indices.back() / 4) tail += term;
  }
  CHECK(tail <= 0.05 * total);
}

TEST_CASE("projection_error_ratio: trivial, bounded, and uniform variants") {
  auto sigma = BeurlingWeight::hardy(0.4);
  auto tau = BeurlingWeight::hardy(0.2);

  auto trivial = projection_error_ratio(DensitySpec::uniform(), sigma, tau, 4, 32);
  CHECK(trivial.ratio == 1.0);

  auto h = cos_density();
  double worst = 0.0;
  for (int k = 4; k <= 16; k += 4) {
    auto r = projection_error_ratio(h, sigma, tau, k, 64);
    CHECK(r.ratio < 10.0);
    worst = std::max(worst, r.ratio);
  }
  MESSAGE("max ratio over K for 1 + 0.5cos at K_big = 64: ", worst);

  // sigma == tau: rhs = 1 and the section norms stay uniformly bounded.
  for (int k = 4; k <= 16; k += 4) {
    auto r = projection_error_ratio(h, sigma, sigma, k, 64);
    CHECK(r.rhs == 1.0);
    CHECK(r.lhs <= 10.0);
  }

  // tau/sigma increasing is rejected.
  CHECK_THROWS_AS(
      (void)projection_error_ratio(h, tau, sigma, 4, 64), std::invalid_argument);
  CHECK_THROWS_AS(
      (void)projection_error_ratio(h, sigma, tau, 20, 64), std::invalid_argument);
}

TEST_CASE("projection_error_ratio: no growth along the K grid") {
  auto sigma = BeurlingWeight::hardy(0.4);
  auto tau = BeurlingWeight::hardy(0.2);
  auto h = cos_density();
  std::vector<double> ratios;
  for (int k = 4; k <= 16; k += 4)
    ratios.push_back(projection_error_ratio(h, sigma, tau, k, 64).ratio);
  CHECK(ratios.back() <= ratios.front() * 1.15);
}

TEST_CASE("triangular_norm_diagnostic: trivial value, stability, envelope") {
  auto pair0 = cholesky_interleaved(multiplication_matrix(DensitySpec::uniform(), 16));
  CHECK(triangular_norm_diagnostic(pair0, BeurlingWeight::hardy(0.3)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  auto h = cos_density();
  const auto sigma = BeurlingWeight::hardy(0.3);
  std::vector<double> vals;
  for (int k_big : {32, 64, 128}) {
    auto pair = cholesky_interleaved(multiplication_matrix(h, k_big));
    vals.push_back(triangular_norm_diagnostic(pair, sigma));
  }
  for (double v : vals) {
    CHECK(v <= vals[0] * 1.10);
    CHECK(v >= vals[0] * 0.90);
  }

  // Flat weight: each factor norm is bounded by sqrt(cond(M)).
  auto m = multiplication_matrix(h, 48);
  auto pair = cholesky_interleaved(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  CHECK(triangular_norm_diagnostic(pair, BeurlingWeight::flat()) <=
        std::sqrt(cond) * (1.0 + 1e-10));
}

TEST_CASE("tilde_residuals: finite and reported for the corpus") {
  auto h = cos_density();
  const int k_big = 48;
  auto pair = cholesky_interleaved(multiplication_matrix(h, k_big));
  auto lim = limiting_factors(szego_factor(h, k_big), k_big);
  auto [ru, rv] = tilde_residuals(pair, lim, BeurlingWeight::hardy(0.2));
  CHECK(std::isfinite(ru));
  CHECK(std::isfinite(rv));
  MESSAGE("tilde residuals (L2 -> W^sigma): ", ru, " ", rv);
}
