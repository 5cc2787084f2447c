#include "edmdlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace edmdlab::cli {

using circle_map::DensitySpec;
using circle_map::ExpandingMap;
using fourier::cplx;
using fourier::FourierVector;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, int line, const std::string& field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw config_error("not a number: '" + s + "'", line, field);
  }
  if (pos != s.size())
    throw config_error("trailing characters in number: '" + s + "'", line, field);
  return v;
}

std::vector<double> parse_list(const std::string& s, int line,
                               const std::string& field) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_number(tok, line, field));
  return out;
}

long parse_integer(const std::string& s, int line, const std::string& field) {
  const double v = parse_number(s, line, field);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v)
    throw config_error("expected an integer, got '" + s + "'", line, field);
  return n;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_number(v[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.sin_coeffs = {0, 0, 0, 0, 0, -0.4};
  c.cos_coeffs = {0, 0, 0.08};
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c = defaults();
  // Lists replace the defaults wholesale when their key appears.
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("malformed section header", line_no, line);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "map" && section != "density" && section != "experiment" &&
          section != "oracle" && section != "weights" && section != "output")
        throw config_error("unknown section '" + section + "'", line_no, section);
      // A [map] or [density] section describes its object as a whole: the
      // default coefficient lists do not leak into a partially given one.
      if (section == "map") {
        c.sin_coeffs.clear();
        c.cos_coeffs.clear();
      } else if (section == "density") {
        c.density_cos.clear();
        c.density_sin.clear();
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value'", line_no, line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw config_error("key outside any [section]", line_no, key);

    auto unknown = [&]() -> config_error {
      return config_error("unknown key '" + key + "' in [" + section + "]",
                          line_no, key);
    };

    if (section == "map") {
      if (key == "degree")
        c.degree = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "sin")
        c.sin_coeffs = parse_list(value, line_no, key);
      else if (key == "cos")
        c.cos_coeffs = parse_list(value, line_no, key);
      else
        throw unknown();
    } else if (section == "density") {
      if (key == "kind") {
        if (value == "physical")
          c.density_kind = DensityKind::physical;
        else if (value == "uniform")
          c.density_kind = DensityKind::uniform;
        else if (value == "explicit")
          c.density_kind = DensityKind::explicit_coeffs;
        else
          throw config_error("kind must be physical|uniform|explicit", line_no,
                             key);
      } else if (key == "cos")
        c.density_cos = parse_list(value, line_no, key);
      else if (key == "sin")
        c.density_sin = parse_list(value, line_no, key);
      else
        throw unknown();
    } else if (section == "experiment") {
      if (key == "k_list") {
        c.k_list.clear();
        for (double v : parse_list(value, line_no, key))
          c.k_list.push_back(static_cast<int>(v));
      } else if (key == "n_list") {
        c.n_list.clear();
        for (double v : parse_list(value, line_no, key))
          c.n_list.push_back(static_cast<long>(v));
      } else if (key == "seeds")
        c.seeds = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "seed0")
        c.seed0 = static_cast<std::uint64_t>(parse_integer(value, line_no, key));
      else if (key == "mode_rank")
        c.mode_rank = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "corr_terms")
        c.corr_terms = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "corr_lags")
        c.corr_lags = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "fig3_k")
        c.fig3_k = static_cast<int>(parse_integer(value, line_no, key));
      else
        throw unknown();
    } else if (section == "oracle") {
      if (key == "k_oracle")
        c.k_oracle = static_cast<int>(parse_integer(value, line_no, key));
      else if (key == "modulus_floor")
        c.modulus_floor = parse_number(value, line_no, key);
      else
        throw unknown();
    } else if (section == "weights") {
      if (key == "t")
        c.t = parse_number(value, line_no, key);
      else if (key == "kappa") {
        if (value == "auto")
          c.kappa_override.reset();
        else
          c.kappa_override = parse_number(value, line_no, key);
      } else
        throw unknown();
    } else if (section == "output") {
      if (key == "dir")
        c.out_dir = value;
      else if (key == "workers")
        c.workers = static_cast<int>(parse_integer(value, line_no, key));
      else
        throw unknown();
    }
  }

  if (c.degree < 2) throw config_error("map degree must be >= 2", 0, "degree");
  if (c.k_list.empty()) throw config_error("k_list must be non-empty", 0, "k_list");
  if (!std::is_sorted(c.k_list.begin(), c.k_list.end()))
    throw config_error("k_list must be ascending", 0, "k_list");
  if (!std::is_sorted(c.n_list.begin(), c.n_list.end()))
    throw config_error("n_list must be ascending", 0, "n_list");
  if (c.seeds < 1) throw config_error("seeds must be >= 1", 0, "seeds");
  if (c.workers < 1) throw config_error("workers must be >= 1", 0, "workers");
  if (c.t <= 0.0) throw config_error("t must be positive", 0, "t");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[map]\n";
  out << "degree = " << degree << "\n";
  out << "sin = " << format_list(sin_coeffs) << "\n";
  out << "cos = " << format_list(cos_coeffs) << "\n";
  out << "\n[density]\n";
  out << "kind = "
      << (density_kind == DensityKind::physical
              ? "physical"
              : density_kind == DensityKind::uniform ? "uniform" : "explicit")
      << "\n";
  out << "cos = " << format_list(density_cos) << "\n";
  out << "sin = " << format_list(density_sin) << "\n";
  out << "\n[experiment]\n";
  out << "k_list =";
  for (int k : k_list) out << ' ' << k;
  out << "\nn_list =";
  for (long n : n_list) out << ' ' << n;
  out << "\nseeds = " << seeds << "\n";
  out << "seed0 = " << seed0 << "\n";
  out << "mode_rank = " << mode_rank << "\n";
  out << "corr_terms = " << corr_terms << "\n";
  out << "corr_lags = " << corr_lags << "\n";
  out << "fig3_k = " << fig3_k << "\n";
  out << "\n[oracle]\n";
  out << "k_oracle = " << k_oracle << "\n";
  out << "modulus_floor = " << format_number(modulus_floor) << "\n";
  out << "\n[weights]\n";
  out << "t = " << format_number(t) << "\n";
  out << "kappa = "
      << (kappa_override ? format_number(*kappa_override) : std::string("auto"))
      << "\n";
  out << "\n[output]\n";
  out << "dir = " << out_dir << "\n";
  out << "workers = " << workers << "\n";
  return out.str();
}

std::string ExperimentConfig::hash_hex() const {
  const std::string s = serialize();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExpandingMap ExperimentConfig::make_map() const {
  const int max_harm = static_cast<int>(std::max(sin_coeffs.size(),
                                                 cos_coeffs.size()));
  FourierVector p(std::max(max_harm + 1, 1));
  for (int m = 1; m <= max_harm; ++m) {
    const double a =
        m <= static_cast<int>(sin_coeffs.size()) ? sin_coeffs[m - 1] : 0.0;
    const double b =
        m <= static_cast<int>(cos_coeffs.size()) ? cos_coeffs[m - 1] : 0.0;
    p.set(m, cplx(0.5 * b, -0.5 * a));
    p.set(-m, cplx(0.5 * b, 0.5 * a));
  }
  try {
    return ExpandingMap(degree, p);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what(), 0, "map");  // carries the measured min f'
  }
}

DensitySpec ExperimentConfig::make_density(const ExpandingMap& map,
                                           int physical_order) const {
  switch (density_kind) {
    case DensityKind::uniform:
      return DensitySpec::uniform();
    case DensityKind::physical:
      return circle_map::invariant_density(map, physical_order);
    case DensityKind::explicit_coeffs: {
      const int max_harm = static_cast<int>(
          std::max(density_cos.size(), density_sin.size()));
      FourierVector h(std::max(max_harm + 1, 1));
      h.set(0, 1.0);
      for (int m = 1; m <= max_harm; ++m) {
        const double a =
            m <= static_cast<int>(density_sin.size()) ? density_sin[m - 1] : 0.0;
        const double b =
            m <= static_cast<int>(density_cos.size()) ? density_cos[m - 1] : 0.0;
        h.set(m, cplx(0.5 * b, -0.5 * a));
        h.set(-m, cplx(0.5 * b, 0.5 * a));
      }
      try {
        return DensitySpec(h);
      } catch (const std::exception& e) {
        throw config_error(e.what(), 0, "density");
      }
    }
  }
  throw config_error("unreachable density kind");
}

double ExperimentConfig::resolve_kappa(const ExpandingMap& map) const {
  return kappa_override ? *kappa_override : map.kappa();
}

}  // namespace edmdlab::cli
