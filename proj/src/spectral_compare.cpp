#include "edmdlab/spectral_compare.hpp"

#include "edmdlab/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace edmdlab::spectral {

using circle_map::sample_iid;
using circle_map::trajectory;
using circle_map::transfer_matrix;
using edmd::eigenvalues_only;
using edmd::KoopmanMatrix;
using edmd::SpectralResult;
using fourier::two_pi;
using fourier::WeightedMatrix;

// ---------------------------------------------------------------------------
// LineFit
// ---------------------------------------------------------------------------

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  if (x.size() != y.size() || x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.points_used = static_cast<int>(x.size());
  f.valid = true;
  return f;
}

namespace {

LineFit fit_log10_above_floor(const std::vector<double>& xs,
                              const std::vector<double>& errs, double floor) {
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < errs.size(); ++i)
    if (errs[i] > floor) {
      fx.push_back(xs[i]);
      fy.push_back(std::log10(errs[i]));
    }
  return fit_line(fx, fy);
}

}  // namespace

// ---------------------------------------------------------------------------
// Resonance sets
// ---------------------------------------------------------------------------

ResonanceSet resonances_from_values(std::vector<cplx> values,
                                    double modulus_floor,
                                    ResonanceSet::Source source, int order) {
  std::vector<cplx> kept;
  for (cplx v : values)
    if (std::abs(v) >= modulus_floor) kept.push_back(v);
  edmd::spectral_sort(kept);
  ResonanceSet rs;
  rs.values = std::move(kept);
  rs.modulus_floor = modulus_floor;
  rs.source = source;
  rs.order = order;
  return rs;
}

ResonanceSet oracle_resonances(const ExpandingMap& map, const DensitySpec& h,
                               int k_oracle, double modulus_floor) {
  if (k_oracle < 64)
    throw std::invalid_argument("oracle_resonances: k_oracle must be >= 64");
  if (modulus_floor < 1e-4)
    throw std::invalid_argument("oracle_resonances: modulus_floor must be >= 1e-4");

  const auto coarse =
      eigenvalues_only(transfer_matrix(map, h, k_oracle).entries);
  const auto fine =
      eigenvalues_only(transfer_matrix(map, h, 2 * k_oracle).entries);

  std::vector<cplx> stable;
  for (cplx v : coarse) {
    if (std::abs(v) < modulus_floor) continue;
    double best = std::numeric_limits<double>::infinity();
    cplx pick = 0.0;
    for (cplx w : fine)
      if (std::abs(w - v) < best) {
        best = std::abs(w - v);
        pick = w;
      }
    if (best <= 1e-8) stable.push_back(pick);  // keep the finer value
  }
  if (stable.empty())
    throw std::runtime_error(
        "oracle_resonances: no truncation-stable resonances found; "
        "map/density outside the supported class");
  return resonances_from_values(std::move(stable), modulus_floor,
                                ResonanceSet::Source::oracle, k_oracle);
}

MatchResult match_and_error(const ResonanceSet& estimates,
                            const ResonanceSet& reference, int top_j) {
  if (estimates.values.empty() || reference.values.empty())
    throw std::invalid_argument("match_and_error: empty resonance set");
  if (top_j < 1 ||
      top_j > static_cast<int>(std::min(estimates.values.size(),
                                        reference.values.size())))
    throw std::invalid_argument("match_and_error: top_j out of range");

  MatchResult out;
  std::vector<bool> used(estimates.values.size(), false);
  for (int j = 0; j < top_j; ++j) {
    const cplx ref = reference.values[static_cast<std::size_t>(j)];
    int pick = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < estimates.values.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(estimates.values[i] - ref);
      if (d < best - 1e-12) {
        best = d;
        pick = static_cast<int>(i);
      } else if (std::abs(d - best) <= 1e-12 && pick >= 0) {
        out.ambiguous = true;  // tie kept on the lower index
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    out.errors.push_back(best);
  }
  return out;
}

double hausdorff_distance(const ResonanceSet& a, const ResonanceSet& b) {
  if (a.modulus_floor != b.modulus_floor)
    throw std::invalid_argument("hausdorff_distance: floors differ");
  if (a.values.empty() || b.values.empty())
    throw std::invalid_argument("hausdorff_distance: empty set");
  auto directed = [](const std::vector<cplx>& xs, const std::vector<cplx>& ys) {
    double worst = 0.0;
    for (cplx x : xs) {
      double best = std::numeric_limits<double>::infinity();
      for (cplx y : ys) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a.values, b.values), directed(b.values, a.values));
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

ConvergenceCurve convergence_study_K(const ExpandingMap& map,
                                     const DensitySpec& h,
                                     const std::vector<int>& k_list,
                                     const ResonanceSet& oracle,
                                     const KStudyOptions& opts) {
  if (!std::is_sorted(k_list.begin(), k_list.end()))
    throw std::invalid_argument("convergence_study_K: k_list must be ascending");
  const int top_j =
      std::min(opts.top_j, static_cast<int>(oracle.values.size()));

  // one cell per K, results into indexed slots
  std::vector<std::vector<double>> cell(k_list.size());
  parallel_for(static_cast<int>(k_list.size()), opts.workers, [&](int i) {
    const int k = k_list[static_cast<std::size_t>(i)];
    std::vector<double> errs(static_cast<std::size_t>(top_j), 0.0);
    if (!opts.data_mode) {
      const auto km = edmd::koopman_matrix_continuum(map, h, k);
      const auto est = resonances_from_values(eigenvalues_only(km.entries), 0.0,
                                              ResonanceSet::Source::edmd, k);
      errs = match_and_error(est, oracle, top_j).errors;
    } else {
      for (int s = 0; s < opts.seeds; ++s) {
        const std::uint64_t seed = opts.seed0 + static_cast<std::uint64_t>(s);
        const auto samples =
            opts.iid_sampling
                ? sample_iid(h, opts.n_samples, seed)
                : trajectory(map, 0.5, opts.n_samples, 1000, seed);
        edmd::DataMatrices dm(samples, map, k);
        auto km = edmd::koopman_matrix_data(dm);
        km.seed = seed;
        const auto est = resonances_from_values(eigenvalues_only(km.entries),
                                                0.0, ResonanceSet::Source::edmd,
                                                k);
        const auto match = match_and_error(est, oracle, top_j);
        for (int j = 0; j < top_j; ++j)
          errs[static_cast<std::size_t>(j)] +=
              match.errors[static_cast<std::size_t>(j)] / opts.seeds;
      }
    }
    cell[static_cast<std::size_t>(i)] = std::move(errs);
  });

  ConvergenceCurve curve;
  curve.errors.assign(static_cast<std::size_t>(top_j), {});
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    curve.abscissa.push_back(static_cast<double>(k_list[i]));
    for (int j = 0; j < top_j; ++j)
      curve.errors[static_cast<std::size_t>(j)].push_back(
          cell[i][static_cast<std::size_t>(j)]);
  }
  for (int j = 0; j < top_j; ++j)
    curve.fits.push_back(
        fit_log10_above_floor(curve.abscissa,
                              curve.errors[static_cast<std::size_t>(j)],
                              kFitFloor));
  return curve;
}

ConvergenceCurve convergence_study_N(const ExpandingMap& map,
                                     const DensitySpec& h, int order,
                                     const std::vector<long>& n_list, int seeds,
                                     std::uint64_t seed0, bool iid_sampling,
                                     int workers) {
  if (!std::is_sorted(n_list.begin(), n_list.end()))
    throw std::invalid_argument("convergence_study_N: n_list must be ascending");
  if (seeds < 1)
    throw std::invalid_argument("convergence_study_N: seeds must be >= 1");

  const auto continuum = edmd::koopman_matrix_continuum(map, h, order);
  const auto ref = resonances_from_values(eigenvalues_only(continuum.entries),
                                          0.0, ResonanceSet::Source::edmd,
                                          order);

  // independent (N, seed) cells
  const int cells = static_cast<int>(n_list.size()) * seeds;
  std::vector<double> err(static_cast<std::size_t>(cells), 0.0);
  parallel_for(cells, workers, [&](int c) {
    const long n = n_list[static_cast<std::size_t>(c / seeds)];
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(c % seeds);
    const auto samples = iid_sampling ? sample_iid(h, n, seed)
                                      : trajectory(map, 0.5, n, 1000, seed);
    edmd::DataMatrices dm(samples, map, order);
    auto km = edmd::koopman_matrix_data(dm);
    km.seed = seed;
    const auto est = resonances_from_values(eigenvalues_only(km.entries), 0.0,
                                            ResonanceSet::Source::edmd, order);
    // leading nontrivial eigenvalue sits at rank 1
    err[static_cast<std::size_t>(c)] = match_and_error(est, ref, 2).errors[1];
  });

  ConvergenceCurve curve;
  curve.errors.assign(1, {});
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    double mean_err = 0.0;
    for (int s = 0; s < seeds; ++s)
      mean_err += err[i * static_cast<std::size_t>(seeds) +
                      static_cast<std::size_t>(s)] / seeds;
    curve.abscissa.push_back(static_cast<double>(n_list[i]));
    curve.errors[0].push_back(mean_err);
  }
  std::vector<double> logn;
  for (double n : curve.abscissa) logn.push_back(std::log10(n));
  curve.fits.push_back(fit_log10_above_floor(logn, curve.errors[0], kFitFloor));
  return curve;
}

// ---------------------------------------------------------------------------
// Mode convergence
// ---------------------------------------------------------------------------

namespace {

// Overlap |<a, b>| of two coefficient vectors on their common index range.
double overlap(const FourierVector& a, const FourierVector& b) {
  cplx acc = 0.0;
  const int common = std::min(a.order(), b.order());
  for (int k = -common + 1; k < common; ++k)
    acc += std::conj(a.coeff(k)) * b.coeff(k);
  return std::abs(acc);
}

// Rotate b so that <ref, b> is positive real.
FourierVector phase_align(const FourierVector& ref, const FourierVector& b) {
  cplx ip = 0.0;
  const int common = std::min(ref.order(), b.order());
  for (int k = -common + 1; k < common; ++k)
    ip += std::conj(ref.coeff(k)) * b.coeff(k);
  if (std::abs(ip) == 0.0) return b;
  const cplx phase = std::conj(ip) / std::abs(ip);
  FourierVector out(b.order());
  for (int k = -b.order() + 1; k < b.order(); ++k)
    out.set(k, phase * b.coeff(k));
  return out;
}

double weighted_diff_norm(const FourierVector& a, const FourierVector& b,
                          const BeurlingWeight& w) {
  const int order = std::max(a.order(), b.order());
  double acc = 0.0;
  for (int k = -order + 1; k < order; ++k) {
    const double wk = w(k);
    acc += wk * wk * std::norm(a.coeff(k) - b.coeff(k));
  }
  return std::sqrt(acc);
}

}  // namespace

ModeConvergence mode_convergence(const ExpandingMap& map, const DensitySpec& h,
                                 int rank, const std::vector<int>& k_list,
                                 double t, double kappa) {
  if (k_list.size() < 2)
    throw std::invalid_argument("mode_convergence: need reference plus curve points");
  if (!std::is_sorted(k_list.begin(), k_list.end()))
    throw std::invalid_argument("mode_convergence: k_list must be ascending");

  const int k_ref = k_list.back();
  const auto sr_ref =
      edmd::eigendecompose(edmd::koopman_matrix_continuum(map, h, k_ref));
  if (rank < 0 || rank >= sr_ref.size())
    throw std::invalid_argument("mode_convergence: rank outside spectrum");
  // gap check at the reference
  for (int i = 0; i < sr_ref.size(); ++i)
    if (i != rank &&
        std::abs(sr_ref.eigenvalues(i) - sr_ref.eigenvalues(rank)) < 1e-8)
      throw std::runtime_error("mode_convergence: reference eigenvalue not simple");
  const auto ref = edmd::modes(sr_ref, rank);

  ModeConvergence mc;
  const auto left_w = BeurlingWeight::hardy(kappa * t);
  const auto right_w = BeurlingWeight::hardy(t).reciprocal();
  const auto flat = BeurlingWeight::flat();

  for (std::size_t i = 0; i + 1 < k_list.size(); ++i) {
    const int k = k_list[i];
    const auto sr = edmd::eigendecompose(edmd::koopman_matrix_continuum(map, h, k));
    int pick = std::min(rank, sr.size() - 1);
    // track by right-eigenvector overlap if the modulus ranking crossed
    auto cand = edmd::modes(sr, pick);
    double best = overlap(ref.right, cand.right);
    for (int j = 0; j < sr.size(); ++j) {
      if (j == pick) continue;
      auto other = edmd::modes(sr, j);
      const double o = overlap(ref.right, other.right);
      if (o > best + 1e-9) {
        best = o;
        pick = j;
        cand = std::move(other);
        mc.tracking_warning = true;
      }
    }
    const auto left = phase_align(ref.left, cand.left);
    const auto right = phase_align(ref.right, cand.right);
    mc.k_values.push_back(static_cast<double>(k));
    mc.left_weighted.push_back(weighted_diff_norm(left, ref.left, left_w));
    mc.right_weighted.push_back(weighted_diff_norm(right, ref.right, right_w));
    mc.right_flat.push_back(weighted_diff_norm(right, ref.right, flat));
  }
  mc.left_fit = fit_log10_above_floor(mc.k_values, mc.left_weighted, kFitFloor);
  mc.right_fit = fit_log10_above_floor(mc.k_values, mc.right_weighted, kFitFloor);
  return mc;
}

// ---------------------------------------------------------------------------
// Correlation expansion
// ---------------------------------------------------------------------------

CorrelationCheck correlation_check(const ExpandingMap& map,
                                   const DensitySpec& h,
                                   const FourierVector& phi,
                                   const FourierVector& psi, int n_max, int j,
                                   int k_oracle) {
  if (n_max < 1 || n_max > 40)
    throw std::invalid_argument("correlation_check: n_max must be in 1..40");
  if (j < 1) throw std::invalid_argument("correlation_check: need J >= 1");

  const auto l1 = transfer_matrix(map, circle_map::DensitySpec::uniform(),
                                  k_oracle);
  const auto lmu = transfer_matrix(map, h, k_oracle);
  const auto sr = edmd::eigendecompose(lmu.entries, k_oracle);

  CorrelationCheck out;

  // Reduce J until the leading eigenvalues are pairwise separated.
  int terms = std::min(j, sr.size() - 1);
  for (bool shrunk = true; shrunk && terms > 1;) {
    shrunk = false;
    for (int a = 0; a < terms && !shrunk; ++a)
      for (int b = a + 1; b < terms && !shrunk; ++b)
        if (std::abs(sr.eigenvalues(a) - sr.eigenvalues(b)) < 1e-6) {
          terms = b;  // keep the separated head of the list
          shrunk = true;
          out.note = "reduced J to " + std::to_string(terms) +
                     " (non-simple leading eigenvalues)";
        }
  }
  out.terms_used = terms;
  out.lambda_next_modulus = std::abs(sr.eigenvalues(terms));

  const int dim = 2 * k_oracle - 1;
  const auto pad = [&](const FourierVector& v) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (int k = -v.order() + 1; k < v.order(); ++k)
      if (std::abs(k) < k_oracle) x(k + k_oracle - 1) += v.coeff(k);
    return x;
  };

  // Pairing coefficients against psi h dx and phi h dx.
  const FourierVector psi_h = fourier::convolve(psi, h.coeffs());
  const Eigen::VectorXcd c_phi_h = pad(fourier::convolve(phi, h.coeffs()));
  const Eigen::VectorXcd c_phi = pad(phi);

  auto pair_with_psi_h = [&](const Eigen::VectorXcd& g) {
    cplx acc = 0.0;
    for (int k = -k_oracle + 1; k < k_oracle; ++k)
      acc += g(k + k_oracle - 1) * psi_h.coeff(-k);
    return acc;
  };

  // lhs(n) = (1/2pi) int psi . L_1^n (phi h) dx, iterated for stability.
  Eigen::VectorXcd g = c_phi_h;
  for (int n = 0; n <= n_max; ++n) {
    cplx acc = 0.0;
    for (int k = -k_oracle + 1; k < k_oracle; ++k)
      acc += g(k + k_oracle - 1) * psi.coeff(-k);
    out.lags.push_back(static_cast<double>(n));
    out.lhs.push_back(acc.real());
    if (n < n_max) g = l1.entries * g;
  }

  // rhs(n) = sum_j lambda_j^n beta_j(phi) alpha_j(psi) with Pi_j = r_j l_j^H
  // normalised by l_j^H r_j.
  std::vector<cplx> lambda(static_cast<std::size_t>(terms));
  std::vector<cplx> weight(static_cast<std::size_t>(terms));
  for (int a = 0; a < terms; ++a) {
    const Eigen::VectorXcd r = sr.right_vectors.col(a);
    const Eigen::VectorXcd l = sr.left_vectors.col(a);
    const cplx pairing = l.dot(r);  // l^H r
    if (std::abs(pairing) < 1e-12)
      throw std::runtime_error("correlation_check: degenerate spectral pairing");
    lambda[static_cast<std::size_t>(a)] = sr.eigenvalues(a);
    weight[static_cast<std::size_t>(a)] =
        (l.dot(c_phi) / pairing) * pair_with_psi_h(r);
  }
  for (int n = 0; n <= n_max; ++n) {
    cplx acc = 0.0;
    for (int a = 0; a < terms; ++a)
      acc += std::pow(lambda[static_cast<std::size_t>(a)], n) *
             weight[static_cast<std::size_t>(a)];
    out.rhs.push_back(acc.real());
    out.residual.push_back(std::abs(out.lhs[static_cast<std::size_t>(n)] -
                                    acc.real()));
  }

  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    const double r = out.residual[static_cast<std::size_t>(n)];
    if (r > 1e-13) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log10(r));
    }
  }
  out.residual_fit = fit_line(xs, ys);
  return out;
}

// ---------------------------------------------------------------------------
// Operator approximation error and the duality residual
// ---------------------------------------------------------------------------

std::pair<double, double> operator_approx_error(const ExpandingMap& map,
                                                const DensitySpec& h, int order,
                                                double t, int k_big) {
  if (order < 1 || order > k_big)
    throw std::invalid_argument("operator_approx_error: need 1 <= K <= k_big");

  const Eigen::MatrixXcd lmu = transfer_matrix(map, h, k_big).entries;
  const Eigen::MatrixXcd m = opuc::multiplication_matrix(h, k_big).entries;
  // Koopman section by duality: K = M^{-1} L_mu^H M.
  const Eigen::MatrixXcd koop =
      Eigen::PartialPivLU<Eigen::MatrixXcd>(m).solve(lmu.adjoint() * m);

  const int dim = 2 * k_big - 1;
  Eigen::MatrixXcd proj;
  if (order >= k_big) {
    proj = Eigen::MatrixXcd::Identity(dim, dim);
  } else {
    const auto pair = opuc::cholesky_interleaved(opuc::multiplication_matrix(h, k_big));
    proj = opuc::projection_matrix(pair, order).entries;
  }

  WeightedMatrix right(k_big, k_big), left(k_big, k_big);
  right.entries = proj * koop - koop;
  left.entries = koop * proj - koop;
  const auto dual_t = BeurlingWeight::hardy(t).reciprocal();
  const auto dual_kt = BeurlingWeight::hardy(map.kappa() * t).reciprocal();
  return {fourier::weighted_operator_norm(right, dual_t, dual_t),
          fourier::weighted_operator_norm(left, dual_kt, dual_kt)};
}

double duality_residual(const ExpandingMap& map, const DensitySpec& h,
                        int order, int k_section) {
  if (k_section < 2 * order)
    throw std::invalid_argument("duality_residual: k_section must be >= 2*order");
  const Eigen::MatrixXcd lmu = transfer_matrix(map, h, k_section).entries;
  const Eigen::MatrixXcd koop =
      edmd::koopman_matrix_continuum(map, h, k_section).entries;
  const auto pair =
      opuc::cholesky_interleaved(opuc::multiplication_matrix(h, k_section));

  auto wrap = [&](const Eigen::MatrixXcd& a) {
    WeightedMatrix w(k_section, k_section);
    w.entries = a;
    return opuc::to_interleaved(w, pair.ordering);
  };
  const Eigen::MatrixXcd u_inv = pair.V.adjoint();  // exact triangular inverse
  const Eigen::MatrixXcd koop_p = u_inv * wrap(koop) * pair.U;
  const Eigen::MatrixXcd lmu_p = u_inv * wrap(lmu) * pair.U;
  const Eigen::MatrixXcd diff = koop_p.adjoint() - lmu_p;

  double worst = 0.0;
  for (int p = 0; p < pair.ordering.size(); ++p)
    for (int q = 0; q < pair.ordering.size(); ++q)
      if (std::abs(pair.ordering.index(p)) < order &&
          std::abs(pair.ordering.index(q)) < order)
        worst = std::max(worst, std::abs(diff(p, q)));
  return worst;
}

}  // namespace edmdlab::spectral
