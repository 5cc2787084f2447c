// spectral_compare.hpp
// Reference resonances from large transfer-operator sections, eigenvalue
// matching and error curves, Hausdorff distances, mode-convergence norms in
// weighted spaces, the lag-correlation expansion check, and operator
// approximation errors.  This module turns the convergence statements into
// measured curves with log-linear fits.

#pragma once

#include "edmdlab/circle_map.hpp"
#include "edmdlab/edmd.hpp"
#include "edmdlab/fourier.hpp"
#include "edmdlab/opuc.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edmdlab::spectral {

using circle_map::DensitySpec;
using circle_map::ExpandingMap;
using fourier::BeurlingWeight;
using fourier::cplx;
using fourier::FourierVector;

// ---------------------------------------------------------------------------
// ResonanceSet
// ---------------------------------------------------------------------------
struct ResonanceSet {
  enum class Source { oracle, edmd };

  std::vector<cplx> values;  // canonical order, all above modulus_floor
  double modulus_floor = 1e-3;
  Source source = Source::oracle;
  int order = 0;          // truncation that produced the set
  long n_samples = 0;     // data provenance, when applicable
};

// Eigenvalues of the mu-weighted transfer section at k_oracle, keeping the
// values above the floor that move by <= 1e-8 under truncation doubling.
ResonanceSet oracle_resonances(const ExpandingMap& map, const DensitySpec& h,
                               int k_oracle, double modulus_floor);

ResonanceSet resonances_from_values(std::vector<cplx> values,
                                    double modulus_floor,
                                    ResonanceSet::Source source, int order);

struct MatchResult {
  std::vector<double> errors;  // |lambda_est - lambda_ref| per reference rank
  bool ambiguous = false;      // an equidistant tie was broken by index
};

// Greedy nearest-neighbour matching without replacement, processed in
// descending reference modulus.
MatchResult match_and_error(const ResonanceSet& estimates,
                            const ResonanceSet& reference, int top_j);

// Max of the two directed sup-inf distances on the floored sets.
double hausdorff_distance(const ResonanceSet& a, const ResonanceSet& b);

// ---------------------------------------------------------------------------
// Convergence curves
// ---------------------------------------------------------------------------
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points_used = 0;
  bool valid = false;  // false when fewer than two usable points
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceCurve {
  std::vector<double> abscissa;            // K or N values
  std::vector<std::vector<double>> errors; // errors[j][i], per tracked rank
  std::vector<LineFit> fits;               // log10-error fit per tracked rank
  std::vector<std::string> notes;
};

// Error floor below which points are excluded from fits (1e2 x machine eps).
inline constexpr double kFitFloor = 100.0 * 2.220446049250313e-16;

struct KStudyOptions {
  bool data_mode = false;
  long n_samples = 0;           // data mode
  int seeds = 1;                // data mode: errors averaged over seeds
  std::uint64_t seed0 = 1;      // first seed
  bool iid_sampling = true;     // false: trajectory sampling
  int top_j = 5;                // tracked ranks 0..top_j-1
  int workers = 1;              // independent K cells run concurrently
};

// Per-eigenvalue error curves |lambda_{j,K} - lambda_j| against the oracle.
ConvergenceCurve convergence_study_K(const ExpandingMap& map,
                                     const DensitySpec& h,
                                     const std::vector<int>& k_list,
                                     const ResonanceSet& oracle,
                                     const KStudyOptions& opts = {});

// Mean (over seeds) data-EDMD eigenvalue error against the continuum matrix
// at fixed K, as N grows; fit is log10(err) vs log10(N).
ConvergenceCurve convergence_study_N(const ExpandingMap& map,
                                     const DensitySpec& h, int order,
                                     const std::vector<long>& n_list, int seeds,
                                     std::uint64_t seed0,
                                     bool iid_sampling = true, int workers = 1);

// ---------------------------------------------------------------------------
// Mode convergence (left modes in hardy(kappa t), right modes in the
// reciprocal hardy(t) norm, plus the flat-norm curve for the right modes).
// The largest K in k_list serves as the self-convergence reference; curves
// run over the remaining entries.
// ---------------------------------------------------------------------------
struct ModeConvergence {
  std::vector<double> k_values;
  std::vector<double> left_weighted;   // ||a_{j,K} - a_ref|| in hardy(kappa t)
  std::vector<double> right_weighted;  // ||b_{j,K} - b_ref|| in 1/hardy(t)
  std::vector<double> right_flat;      // ||b_{j,K} - b_ref|| flat
  LineFit left_fit, right_fit;         // log10 fits of the weighted curves
  bool tracking_warning = false;       // an eigenvalue crossing was tracked
};

ModeConvergence mode_convergence(const ExpandingMap& map, const DensitySpec& h,
                                 int rank, const std::vector<int>& k_list,
                                 double t, double kappa);

// ---------------------------------------------------------------------------
// Correlation expansion check
// ---------------------------------------------------------------------------
struct CorrelationCheck {
  std::vector<double> lags;      // n = 0..n_max
  std::vector<double> lhs;       // quadrature-route lag correlations
  std::vector<double> rhs;       // J-term spectral reconstruction
  std::vector<double> residual;  // |lhs - rhs|
  LineFit residual_fit;          // log10 residual vs n (n >= 1, above floor)
  double lambda_next_modulus = 0.0;  // |lambda_J|, the first omitted mode
  int terms_used = 0;                // J after any reduction
  std::string note;
};

// lhs by iterating the Lebesgue transfer matrix on phi*h; rhs from the
// leading J spectral triples of the mu-weighted transfer matrix with
// bi-orthogonal pairing normalisation.
CorrelationCheck correlation_check(const ExpandingMap& map,
                                   const DensitySpec& h,
                                   const FourierVector& phi,
                                   const FourierVector& psi, int n_max, int j,
                                   int k_oracle);

// ---------------------------------------------------------------------------
// Operator approximation error:
// (||P_K K - K|| in H^2_{-t}, ||K P_K - K|| in H^2_{-kappa t}) on sections of
// size k_big, with the Koopman section assembled by duality from the
// transfer matrix and P_K from the opuc factorisation.
// ---------------------------------------------------------------------------
std::pair<double, double> operator_approx_error(const ExpandingMap& map,
                                                const DensitySpec& h, int order,
                                                double t, int k_big);

// Interior-block residual of the duality identity: the continuum Koopman
// matrix conjugated to the orthonormal-polynomial basis equals the conjugate
// transpose of the transfer matrix there.  Matrices are assembled at section
// order k_section (>= 2*order) and compared entrywise on |j|,|k| < order.
double duality_residual(const ExpandingMap& map, const DensitySpec& h,
                        int order, int k_section);

}  // namespace edmdlab::spectral
