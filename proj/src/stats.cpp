#include "evoter/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "evoter/errors.hpp"

namespace evoter {

namespace {

std::size_t first_kept(std::size_t rows, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw InvalidInput("burn-in must lie in [0, 1)");
  return static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(rows)));
}

double rms_of(std::span<const Point> pts, auto&& f) {
  double s = 0.0;
  for (const Point& p : pts) {
    const double r = p.y - f(p.x);
    s += r * r;
  }
  return pts.empty() ? 0.0 : std::sqrt(s / static_cast<double>(pts.size()));
}

}  // namespace

std::vector<Point> arch_points(const Trajectory& t, ArchScale scale, double burn_in) {
  if (t.n == 0 || t.mean_degree <= 0.0) throw InvalidInput("trajectory lacks n or L");
  const double n = static_cast<double>(t.n);
  const double denom = (scale == ArchScale::kEdgeFraction ? 0.5 : 1.0) * n * t.mean_degree;
  std::vector<Point> out;
  for (std::size_t i = first_kept(t.rows.size(), burn_in); i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    out.push_back({static_cast<double>(r.n1) / n, static_cast<double>(r.n10) / denom});
  }
  return out;
}

std::vector<Point> cubic_points(const Trajectory& t, double burn_in) {
  if (t.n == 0 || t.mean_degree <= 0.0) throw InvalidInput("trajectory lacks n or L");
  if (!t.has_triples()) throw InvalidInput("trajectory has no triple counts");
  const double n = static_cast<double>(t.n);
  const double denom = n * t.mean_degree * t.mean_degree;
  std::vector<Point> out;
  for (std::size_t i = first_kept(t.rows.size(), burn_in); i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    out.push_back({static_cast<double>(r.n1) / n, static_cast<double>(r.triples->n100()) / denom});
  }
  return out;
}

ArchFit fit_arch(std::span<const Point> points) {
  if (points.size() < 3) throw FitError("arch fit needs at least 3 points");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = points[static_cast<std::size_t>(i)].x;
    X(i, 0) = x * (1.0 - x);
    X(i, 1) = -1.0;
    y(i) = points[static_cast<std::size_t>(i)].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < 2) throw FitError("arch fit: degenerate design (x(1-x) constant)");
  const Eigen::Vector2d beta = qr.solve(y);

  ArchFit fit;
  fit.A = beta(0);
  fit.B = beta(1);
  fit.points = points.size();
  fit.rms = rms_of(points, fit);
  if (fit.A != 0.0) {
    const double disc = 0.25 - fit.B / fit.A;
    if (disc >= 0.0 && disc <= 0.25) {
      const double h = std::sqrt(disc);
      fit.roots = std::make_pair(0.5 - h, 0.5 + h);
    }
  }
  return fit;
}

std::vector<double> real_polynomial_roots(std::span<const double> coef) {
  std::size_t deg = coef.size();
  double scale = 0.0;
  for (double c : coef) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};
  while (deg > 0 && std::abs(coef[deg - 1]) <= 1e-14 * scale) --deg;
  if (deg <= 1) return {};
  const auto d = static_cast<Eigen::Index>(deg - 1);
  const double lead = coef[deg - 1];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) companion(i, d - 1) = -coef[static_cast<std::size_t>(i)] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z))) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

CubicFit fit_cubic(std::span<const Point> points) {
  if (points.size() < 4) throw FitError("cubic fit needs at least 4 points");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(m, 4);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = points[static_cast<std::size_t>(i)].x;
    X(i, 0) = 1.0;
    X(i, 1) = x;
    X(i, 2) = x * x;
    X(i, 3) = x * x * x;
    y(i) = points[static_cast<std::size_t>(i)].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < 4) throw FitError("cubic fit: degenerate design (fewer than 4 distinct x)");
  const Eigen::Vector4d beta = qr.solve(y);

  CubicFit fit;
  for (int k = 0; k < 4; ++k) fit.coef[static_cast<std::size_t>(k)] = beta(k);
  double ymax = 0.0;
  for (const Point& p : points) ymax = std::max(ymax, std::abs(p.y));
  // all-zero data: the zero polynomial has no isolated roots
  const double cmax = std::max({std::abs(beta(0)), std::abs(beta(1)), std::abs(beta(2)),
                                std::abs(beta(3))});
  if (cmax > 1e-12 * std::max(1.0, ymax)) {
    for (double r : real_polynomial_roots(fit.coef)) {
      if (r >= 0.0 && r <= 1.0) fit.roots.push_back(r);
    }
  } else {
    fit.coef.fill(0.0);
  }
  fit.points = points.size();
  fit.rms = rms_of(points, fit);
  return fit;
}

NuCEstimate arch_endpoints_to_nu_c(
    double p, const std::map<double, std::optional<std::pair<double, double>>>& arch_by_nu) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p must lie in [0, 1]");
  // distance of p from the nearer end, compared with the lower endpoint
  const double q = std::min(p, 1.0 - p);
  const std::pair<double, double>* prev_arch = nullptr;
  double prev_nu = 0.0;
  for (const auto& [nu, arch] : arch_by_nu) {
    if (arch && arch->first < p && p < arch->second) {
      if (!prev_arch) return {nu, false};
      const double a0 = std::min(prev_arch->first, 1.0 - prev_arch->second);
      const double a1 = std::min(arch->first, 1.0 - arch->second);
      if (a0 == a1) return {nu, false};
      const double s = std::clamp((a0 - q) / (a0 - a1), 0.0, 1.0);
      return {prev_nu + s * (nu - prev_nu), false};
    }
    prev_arch = arch ? &*arch : nullptr;
    prev_nu = nu;
  }
  return {std::nullopt, true};
}

RunClass classify_run(const RunResult& result, std::size_t n, double L,
                      const ClassifyConfig& config) {
  const double nl = static_cast<double>(n) * L;
  if (result.absorbed) {
    return static_cast<double>(result.updates) <= config.c_rapid * nl * std::log(nl)
               ? RunClass::kRapid
               : RunClass::kIndeterminate;
  }
  return static_cast<double>(result.updates) >= config.c_prolonged * nl ? RunClass::kProlonged
                                                                        : RunClass::kIndeterminate;
}

std::string to_string(RunClass c) {
  switch (c) {
    case RunClass::kRapid: return "rapid";
    case RunClass::kProlonged: return "prolonged";
    case RunClass::kIndeterminate: return "indeterminate";
  }
  return "?";
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  const bool triples = t.has_triples();
  out << "updates,time,N1,N10,N11,N00,Dmax";
  if (triples) out << ",N100,N101,N110,N010";
  out << '\n';
  char buf[32];
  for (const auto& r : t.rows) {
    auto res = std::to_chars(buf, buf + sizeof buf, r.time);
    out << r.updates << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
        << ',' << r.n1 << ',' << r.n10 << ',' << r.n11 << ',' << r.n00 << ',' << r.dmax;
    if (triples) {
      const auto& c = *r.triples;
      out << ',' << c.n100() << ',' << c.n101() << ',' << c.n110() << ',' << c.n010();
    }
    out << '\n';
  }
}

namespace {

template <class T>
T parse_field(std::string_view s, std::size_t line) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidInput("csv line " + std::to_string(line) + ": bad field '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& in, std::size_t n, double mean_degree) {
  static const std::string kBase = "updates,time,N1,N10,N11,N00,Dmax";
  std::string header;
  if (!std::getline(in, header)) throw InvalidInput("csv: missing header");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  bool triples = false;
  if (header == kBase + ",N100,N101,N110,N010") {
    triples = true;
  } else if (header != kBase) {
    throw InvalidInput("csv: unexpected header '" + header + "'");
  }
  Trajectory t;
  t.n = n;
  t.mean_degree = mean_degree;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != (triples ? 11u : 7u)) {
      throw InvalidInput("csv line " + std::to_string(lineno) + ": wrong field count");
    }
    TrajectoryRow r;
    r.updates = parse_field<std::uint64_t>(f[0], lineno);
    r.time = parse_field<double>(f[1], lineno);
    r.n1 = parse_field<std::int64_t>(f[2], lineno);
    r.n10 = parse_field<std::int64_t>(f[3], lineno);
    r.n11 = parse_field<std::int64_t>(f[4], lineno);
    r.n00 = parse_field<std::int64_t>(f[5], lineno);
    r.dmax = parse_field<std::uint64_t>(f[6], lineno);
    if (triples) {
      TripleCounts c;
      c.at(1, 0, 0) = parse_field<std::int64_t>(f[7], lineno);
      c.at(1, 0, 1) = parse_field<std::int64_t>(f[8], lineno);
      c.at(1, 1, 0) = parse_field<std::int64_t>(f[9], lineno);
      c.at(0, 1, 0) = parse_field<std::int64_t>(f[10], lineno);
      // path reversal fills the mirrored entries
      c.at(0, 0, 1) = c.at(1, 0, 0);
      c.at(0, 1, 1) = c.at(1, 1, 0);
      r.triples = c;
    }
    if (!t.rows.empty() && r.updates <= t.rows.back().updates) {
      throw InvalidInput("csv line " + std::to_string(lineno) + ": updates not increasing");
    }
    t.rows.push_back(r);
  }
  return t;
}

}  // namespace evoter
