#include "edmdlab/runner.hpp"

#include "edmdlab/csv.hpp"
#include "edmdlab/edmd.hpp"
#include "edmdlab/opuc.hpp"
#include "edmdlab/parallel.hpp"
#include "edmdlab/spectral_compare.hpp"
#include "edmdlab/svg.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace edmdlab::cli {

namespace fs = std::filesystem;

using circle_map::DensitySpec;
using circle_map::ExpandingMap;
using fourier::cplx;
using fourier::FourierVector;
using fourier::two_pi;

namespace {

ResultsManifest start_manifest(const RunContext& ctx, const std::string& command) {
  ResultsManifest m;
  m.command = command;
  m.config_hash = ctx.config.hash_hex();
  m.created = utc_timestamp();
  m.seed0 = ctx.config.seed0;
  m.seeds = ctx.config.seeds;
  return m;
}

void finish_manifest(const RunContext& ctx, ResultsManifest& m) {
  const fs::path path = fs::path(ctx.out_dir) / (m.command + "_manifest.txt");
  m.write_file(path.string());
}

std::string emit_csv(const RunContext& ctx, ResultsManifest& m,
                     const std::string& name, const CsvWriter& csv) {
  const fs::path path = fs::path(ctx.out_dir) / name;
  csv.write_file(path.string());
  m.artifacts.push_back(name);
  return path.string();
}

void emit_svg(const RunContext& ctx, ResultsManifest& m, const std::string& name,
              const SvgChart& chart) {
  const fs::path path = fs::path(ctx.out_dir) / name;
  chart.write_file(path.string());
  m.artifacts.push_back(name);
}

void ensure_out_dir(const RunContext& ctx) {
  fs::create_directories(ctx.out_dir);
}

void note_fit(ResultsManifest& m, const std::string& prefix,
              const spectral::LineFit& fit) {
  if (!fit.valid) {
    m.note(prefix + "_fit", "skipped (fewer than two points above floor)");
    return;
  }
  m.note(prefix + "_slope", fit.slope);
  m.note(prefix + "_intercept", fit.intercept);
  m.note(prefix + "_r2", fit.r2);
}

void add_fit_row(CsvWriter& csv, const std::string& name,
                 const spectral::LineFit& fit) {
  csv.add_row({name, fit.valid ? csv_format(fit.slope) : "",
               fit.valid ? csv_format(fit.intercept) : "",
               fit.valid ? csv_format(fit.r2) : "",
               std::to_string(fit.points_used)});
}

}  // namespace

std::string resolve_out_dir(const std::string& cli_arg,
                            const ExperimentConfig& config) {
  if (!cli_arg.empty()) return cli_arg;
  if (const char* env = std::getenv("EDMDLAB_OUT"); env && *env) return env;
  return config.out_dir;
}

// ---------------------------------------------------------------------------
// resonances
// ---------------------------------------------------------------------------

ResultsManifest cmd_resonances(const RunContext& ctx) {
  ensure_out_dir(ctx);
  auto m = start_manifest(ctx, "resonances");
  const auto map = ctx.config.make_map();
  const auto h = ctx.config.make_density(map);
  const auto rs = spectral::oracle_resonances(map, h, ctx.config.k_oracle,
                                              ctx.config.modulus_floor);

  CsvWriter csv({"rank", "re_lambda", "im_lambda", "modulus"});
  for (std::size_t i = 0; i < rs.values.size(); ++i)
    csv.add_row({static_cast<double>(i), rs.values[i].real(),
                 rs.values[i].imag(), std::abs(rs.values[i])});
  emit_csv(ctx, m, "resonances.csv", csv);

  SvgChart chart("Transfer-operator resonances", "Re", "Im");
  SvgSeries circle;
  for (int i = 0; i <= 128; ++i) {
    circle.x.push_back(std::cos(two_pi * i / 128));
    circle.y.push_back(std::sin(two_pi * i / 128));
  }
  circle.label = "unit circle";
  chart.add_series(circle);
  SvgSeries pts;
  pts.markers_only = true;
  pts.label = "resonances";
  for (cplx v : rs.values) {
    pts.x.push_back(v.real());
    pts.y.push_back(v.imag());
  }
  chart.add_series(pts);
  emit_svg(ctx, m, "resonances.svg", chart);

  m.note("k_oracle", static_cast<double>(ctx.config.k_oracle));
  m.note("resonances_found", static_cast<double>(rs.values.size()));
  finish_manifest(ctx, m);
  return m;
}

// ---------------------------------------------------------------------------
// fig1: eigenvalue error vs dictionary size
// ---------------------------------------------------------------------------

ResultsManifest cmd_fig1(const RunContext& ctx) {
  ensure_out_dir(ctx);
  auto m = start_manifest(ctx, "fig1");
  const auto map = ctx.config.make_map();
  const auto h = ctx.config.make_density(map);
  const auto oracle = spectral::oracle_resonances(map, h, ctx.config.k_oracle,
                                                  ctx.config.modulus_floor);

  spectral::KStudyOptions opts;
  opts.top_j = std::min<int>(5, static_cast<int>(oracle.values.size()));
  opts.workers = ctx.workers;
  const auto curve =
      spectral::convergence_study_K(map, h, ctx.config.k_list, oracle, opts);

  std::vector<std::string> header = {"k"};
  for (int j = 0; j < opts.top_j; ++j) header.push_back("err_" + std::to_string(j));
  CsvWriter csv(header);
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
    std::vector<double> row = {curve.abscissa[i]};
    for (int j = 0; j < opts.top_j; ++j)
      row.push_back(curve.errors[static_cast<std::size_t>(j)][i]);
    csv.add_row(row);
  }
  emit_csv(ctx, m, "fig1_errors.csv", csv);

  CsvWriter fits({"curve", "fit_slope", "fit_intercept", "fit_r2", "points_used"});
  for (int j = 0; j < opts.top_j; ++j)
    add_fit_row(fits, "err_" + std::to_string(j),
                curve.fits[static_cast<std::size_t>(j)]);
  emit_csv(ctx, m, "fig1_fits.csv", fits);

  SvgChart chart("Eigenvalue error vs dictionary size", "K", "|error|");
  chart.set_log_y(true);
  for (int j = 0; j < opts.top_j; ++j) {
    SvgSeries s;
    s.x = curve.abscissa;
    s.y = curve.errors[static_cast<std::size_t>(j)];
    s.label = "j = " + std::to_string(j);
    chart.add_series(s);
  }
  emit_svg(ctx, m, "fig1_errors.svg", chart);

  for (int j = 0; j < opts.top_j; ++j)
    note_fit(m, "err_" + std::to_string(j),
             curve.fits[static_cast<std::size_t>(j)]);
  finish_manifest(ctx, m);
  return m;
}

// ---------------------------------------------------------------------------
// fig2: mode magnitude curves and weighted mode convergence
// ---------------------------------------------------------------------------

ResultsManifest cmd_fig2(const RunContext& ctx) {
  ensure_out_dir(ctx);
  auto m = start_manifest(ctx, "fig2");
  const auto map = ctx.config.make_map();
  const auto h = ctx.config.make_density(map);
  const int rank = ctx.config.mode_rank;
  const auto& k_list = ctx.config.k_list;

  // per-K mode triples (independent cells)
  std::vector<edmd::ModeTriple> triples(k_list.size());
  parallel_for(static_cast<int>(k_list.size()), ctx.workers, [&](int i) {
    const auto sr = edmd::eigendecompose(
        edmd::koopman_matrix_continuum(map, h, k_list[static_cast<std::size_t>(i)]));
    triples[static_cast<std::size_t>(i)] =
        edmd::modes(sr, std::min(rank, sr.size() - 1));
  });

  const int grid = 512;
  std::vector<std::string> header = {"x"};
  for (int k : k_list) header.push_back("k" + std::to_string(k));
  CsvWriter left_csv(header), right_csv(header);
  for (int g = 0; g < grid; ++g) {
    const double x = two_pi * g / grid;
    std::vector<double> lrow = {x}, rrow = {x};
    for (const auto& t : triples) {
      lrow.push_back(std::abs(t.left.evaluate(x)));
      rrow.push_back(std::abs(t.right.evaluate(x)));
    }
    left_csv.add_row(lrow);
    right_csv.add_row(rrow);
  }
  emit_csv(ctx, m, "fig2_left_modes.csv", left_csv);
  emit_csv(ctx, m, "fig2_right_modes.csv", right_csv);

  for (bool left : {true, false}) {
    SvgChart chart(left ? "Left mode magnitude |a(x)|" : "Right mode magnitude |b(x)|",
                   "x", left ? "|a(x)|" : "|b(x)|");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      SvgSeries s;
      for (int g = 0; g < grid; ++g) {
        const double x = two_pi * g / grid;
        s.x.push_back(x);
        s.y.push_back(std::abs(left ? triples[i].left.evaluate(x)
                                    : triples[i].right.evaluate(x)));
      }
      s.label = "K = " + std::to_string(k_list[i]);
      chart.add_series(s);
    }
    emit_svg(ctx, m, left ? "fig2_left_modes.svg" : "fig2_right_modes.svg", chart);
  }

  // reference-K mode coefficient table
  {
    const auto& ref = triples.back();
    CsvWriter coeffs({"k", "re_a", "im_a", "re_b", "im_b"});
    for (int k = -ref.left.order() + 1; k < ref.left.order(); ++k)
      coeffs.add_row({static_cast<double>(k), ref.left.coeff(k).real(),
                      ref.left.coeff(k).imag(), ref.right.coeff(k).real(),
                      ref.right.coeff(k).imag()});
    emit_csv(ctx, m, "fig2_mode_coeffs.csv", coeffs);
  }

  if (k_list.size() >= 2) {
    const double t = ctx.config.t;
    const double kappa = ctx.config.resolve_kappa(map);
    spectral::ModeConvergence mc;
    try {
      mc = spectral::mode_convergence(map, h, rank, k_list, t, kappa);
    } catch (const std::runtime_error& e) {
      // e.g. a non-simple reference eigenvalue; the magnitude curves above
      // are still valid output
      m.note("mode_convergence", std::string("skipped: ") + e.what());
      finish_manifest(ctx, m);
      return m;
    }
    CsvWriter conv({"k", "left_weighted", "right_weighted", "right_flat"});
    for (std::size_t i = 0; i < mc.k_values.size(); ++i)
      conv.add_row({mc.k_values[i], mc.left_weighted[i], mc.right_weighted[i],
                    mc.right_flat[i]});
    emit_csv(ctx, m, "fig2_mode_convergence.csv", conv);

    SvgChart chart("Mode convergence to the reference (largest K)", "K",
                   "error norm");
    chart.set_log_y(true);
    SvgSeries a, b, c;
    a.x = b.x = c.x = mc.k_values;
    a.y = mc.left_weighted;
    a.label = "left, hardy(kappa t)";
    b.y = mc.right_weighted;
    b.label = "right, 1/hardy(t)";
    c.y = mc.right_flat;
    c.label = "right, flat";
    chart.add_series(a);
    chart.add_series(b);
    chart.add_series(c);
    emit_svg(ctx, m, "fig2_mode_convergence.svg", chart);

    note_fit(m, "left_mode", mc.left_fit);
    note_fit(m, "right_mode", mc.right_fit);
    if (mc.tracking_warning)
      m.note("tracking", "eigenvalue crossing resolved by eigenvector overlap");
  } else {
    m.note("mode_convergence", "skipped (single K in k_list)");
  }
  finish_manifest(ctx, m);
  return m;
}

// ---------------------------------------------------------------------------
// fig3: data-EDMD spectra vs N with the continuum spectrum overlay
// ---------------------------------------------------------------------------

ResultsManifest cmd_fig3(const RunContext& ctx) {
  ensure_out_dir(ctx);
  auto m = start_manifest(ctx, "fig3");
  const int k = ctx.config.fig3_k;
  for (long n : ctx.config.n_list)
    if (n < 2L * k - 1)
      throw config_error("n_list entry " + std::to_string(n) +
                             " is below the dictionary size 2K-1 = " +
                             std::to_string(2 * k - 1) +
                             " (rank deficiency guaranteed)",
                         0, "n_list");

  const auto map = ctx.config.make_map();
  const auto h = ctx.config.make_density(map);
  const auto continuum = edmd::eigendecompose(
      edmd::koopman_matrix_continuum(map, h, k));

  CsvWriter cont_csv({"rank", "re_lambda", "im_lambda", "residual"});
  for (int r = 0; r < continuum.size(); ++r)
    cont_csv.add_row({static_cast<double>(r), continuum.eigenvalues(r).real(),
                      continuum.eigenvalues(r).imag(),
                      continuum.right_residuals(r)});
  emit_csv(ctx, m, "fig3_continuum.csv", cont_csv);

  // (N, seed) cells
  const auto& n_list = ctx.config.n_list;
  const int seeds = ctx.config.seeds;
  const int cells = static_cast<int>(n_list.size()) * seeds;
  std::vector<std::vector<cplx>> spectra(static_cast<std::size_t>(cells));
  parallel_for(cells, ctx.workers, [&](int c) {
    const long n = n_list[static_cast<std::size_t>(c / seeds)];
    const std::uint64_t seed = ctx.config.seed0 + static_cast<std::uint64_t>(c % seeds);
    const auto samples = circle_map::sample_iid(h, n, seed);
    edmd::DataMatrices dm(samples, map, k);
    spectra[static_cast<std::size_t>(c)] =
        edmd::eigenvalues_only(edmd::koopman_matrix_data(dm).entries);
  });

  CsvWriter data_csv({"n", "seed", "rank", "re_lambda", "im_lambda"});
  for (int c = 0; c < cells; ++c) {
    const long n = n_list[static_cast<std::size_t>(c / seeds)];
    const auto seed = static_cast<double>(c % seeds);
    const auto& ev = spectra[static_cast<std::size_t>(c)];
    for (std::size_t r = 0; r < ev.size(); ++r)
      data_csv.add_row({static_cast<double>(n), seed, static_cast<double>(r),
                        ev[r].real(), ev[r].imag()});
  }
  emit_csv(ctx, m, "fig3_eigenvalues.csv", data_csv);

  // mean error of the leading nontrivial eigenvalue vs the continuum
  const auto ref = spectral::resonances_from_values(
      std::vector<cplx>(continuum.eigenvalues.data(),
                        continuum.eigenvalues.data() + continuum.size()),
      0.0, spectral::ResonanceSet::Source::edmd, k);
  std::vector<double> means, logn, logerr;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    double mean = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const auto est = spectral::resonances_from_values(
          spectra[i * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)],
          0.0, spectral::ResonanceSet::Source::edmd, k);
      mean += spectral::match_and_error(est, ref, 2).errors[1] / seeds;
    }
    means.push_back(mean);
    logn.push_back(std::log10(static_cast<double>(n_list[i])));
    logerr.push_back(std::log10(mean));
  }
  const auto fit = spectral::fit_line(logn, logerr);
  CsvWriter err_csv({"n", "mean_err_1", "fit_slope", "fit_r2"});
  for (std::size_t i = 0; i < n_list.size(); ++i)
    err_csv.add_row({static_cast<double>(n_list[i]), means[i], fit.slope, fit.r2});
  emit_csv(ctx, m, "fig3_errors.csv", err_csv);
  note_fit(m, "err_vs_n_loglog", fit);

  // scatter overlay: data spectra per N, continuum in pale markers on top
  SvgChart chart("Data-EDMD spectrum vs N (K = " + std::to_string(k) + ")",
                 "Re", "Im");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    SvgSeries s;
    s.markers_only = true;
    s.label = "N = " + std::to_string(n_list[i]);
    for (int sd = 0; sd < seeds; ++sd)
      for (cplx v :
           spectra[i * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(sd)]) {
        s.x.push_back(v.real());
        s.y.push_back(v.imag());
      }
    chart.add_series(s);
  }
  SvgSeries pale;
  pale.markers_only = true;
  pale.label = "continuum";
  for (int r = 0; r < continuum.size(); ++r) {
    pale.x.push_back(continuum.eigenvalues(r).real());
    pale.y.push_back(continuum.eigenvalues(r).imag());
  }
  chart.add_series(pale);
  emit_svg(ctx, m, "fig3_eigenvalues.svg", chart);

  SvgChart errchart("Leading nontrivial eigenvalue error vs N", "N", "mean error");
  errchart.set_log_x(true);
  errchart.set_log_y(true);
  SvgSeries es;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    es.x.push_back(static_cast<double>(n_list[i]));
    es.y.push_back(std::pow(10.0, logerr[i]));
  }
  es.label = "mean over seeds";
  errchart.add_series(es);
  emit_svg(ctx, m, "fig3_errors.svg", errchart);

  finish_manifest(ctx, m);
  return m;
}

// ---------------------------------------------------------------------------
// opuc-diagnostics
// ---------------------------------------------------------------------------

ResultsManifest cmd_opuc_diagnostics(const RunContext& ctx) {
  ensure_out_dir(ctx);
  auto m = start_manifest(ctx, "opuc-diagnostics");
  const auto map = ctx.config.make_map();
  const auto h = ctx.config.make_density(map);

  // regularity diagnostic ||sigma F[(log h)']||_{l^2} with sigma = hardy(t),
  // summed over the resolved modes (the weight would amplify quadrature
  // noise beyond that)
  {
    const int n = 4096;
    const auto hv = h.coeffs().sample_grid_real(n);
    std::vector<double> logh(hv.size());
    for (std::size_t i = 0; i < hv.size(); ++i) logh[i] = std::log(hv[i]);
    const auto g = fourier::dft_coeffs(std::span<const double>(logh), 64);
    m.note("log_density_deriv_weighted_l2",
           fourier::weighted_norm(g.derivative(),
                                  fourier::BeurlingWeight::hardy(ctx.config.t)));
  }

  // diagonal deviations and theta coefficients at K_big = 64
  {
    const int k_big = 64;
    const auto sz = opuc::szego_factor(h, k_big);
    const auto dev = opuc::diagonal_deviations(
        sz, opuc::multiplication_matrix(h, k_big), k_big);
    CsvWriter csv({"k", "s_k", "s_prime_k", "theta_coeff_abs"});
    double max_sp = 0.0;
    for (std::size_t i = 0; i < dev.indices.size(); ++i) {
      const int k = dev.indices[i];
      csv.add_row({static_cast<double>(k), dev.s[i], dev.s_prime[i],
                   std::abs(sz.theta_plus.coeff(std::abs(k)))});
      max_sp = std::max(max_sp, std::abs(dev.s_prime[i]));
    }
    emit_csv(ctx, m, "opuc_deviations.csv", csv);
    m.note("max_abs_s_prime", max_sp);

    // theta+ coefficient decay fit (log10 over the resolved range)
    std::vector<double> ks, logs;
    for (int k = 1; k < k_big; ++k) {
      const double a = std::abs(sz.theta_plus.coeff(k));
      if (a > 1e-13) {
        ks.push_back(static_cast<double>(k));
        logs.push_back(std::log10(a));
      }
    }
    note_fit(m, "theta_decay", spectral::fit_line(ks, logs));
  }

  // projection error ratios over K at K_big = 128
  {
    const auto sigma = fourier::BeurlingWeight::hardy(2.0 * ctx.config.t);
    const auto tau = fourier::BeurlingWeight::hardy(ctx.config.t);
    const int k_big = 128;
    std::vector<int> ks;
    for (int k = 4; k <= k_big / 4 && k <= 24; k += 4) ks.push_back(k);
    std::vector<opuc::ProjectionErrorRatio> rows(ks.size());
    parallel_for(static_cast<int>(ks.size()), ctx.workers, [&](int i) {
      rows[static_cast<std::size_t>(i)] = opuc::projection_error_ratio(
          h, sigma, tau, ks[static_cast<std::size_t>(i)], k_big);
    });
    CsvWriter csv({"k", "lhs", "rhs", "ratio"});
    double worst = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      csv.add_row({static_cast<double>(ks[i]), rows[i].lhs, rows[i].rhs,
                   rows[i].ratio});
      worst = std::max(worst, rows[i].ratio);
    }
    emit_csv(ctx, m, "opuc_ratio.csv", csv);
    m.note("max_projection_ratio", worst);

    SvgChart chart("Projection error against the Dirichlet bound", "K", "value");
    chart.set_log_y(true);
    SvgSeries l, r;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      l.x.push_back(ks[i]);
      l.y.push_back(rows[i].lhs);
      r.x.push_back(ks[i]);
      r.y.push_back(rows[i].rhs);
    }
    l.label = "||I - P_K||";
    r.label = "tau(K)/sigma(K)";
    chart.add_series(l);
    chart.add_series(r);
    emit_svg(ctx, m, "opuc_ratio.svg", chart);
  }

  // triangular norm trend across section sizes
  {
    const auto sigma = fourier::BeurlingWeight::hardy(ctx.config.t);
    CsvWriter csv({"k_big", "max_triangular_norm", "tilde_u", "tilde_v"});
    for (int k_big : {32, 64, 128}) {
      const auto pair =
          opuc::cholesky_interleaved(opuc::multiplication_matrix(h, k_big));
      const double norm = opuc::triangular_norm_diagnostic(pair, sigma);
      const auto lim = opuc::limiting_factors(opuc::szego_factor(h, k_big), k_big);
      const auto [ru, rv] = opuc::tilde_residuals(pair, lim, sigma);
      csv.add_row({static_cast<double>(k_big), norm, ru, rv});
    }
    emit_csv(ctx, m, "opuc_triangular.csv", csv);
  }

  finish_manifest(ctx, m);
  return m;
}

}  // namespace edmdlab::cli
