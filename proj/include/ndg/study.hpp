#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ndg/assembly.hpp"
#include "ndg/mesh.hpp"
#include "ndg/norms.hpp"
#include "ndg/problems.hpp"
#include "ndg/solver.hpp"

namespace ndg {

/// One refinement level of a solve.
struct LevelResult {
  int n = 0;
  bool ok = false;
  std::string failure;
  ErrorReport errors;
  double residual = 0.0;
  double seconds = 0.0;
};

/// Assemble, solve and measure errors for `problem` on the uniform n x n mesh.
/// Throws on assembly/solve failures.
inline LevelResult run_level(const ProblemSpec& problem, const SolveConfig& cfg, int n,
                             const SolverOptions& opts = {}, double p = 2.0) {
  const auto start = std::chrono::steady_clock::now();
  const Mesh mesh = build_uniform_mesh(problem.domain, n);
  const SparseSystem sys = assemble_nondiv(mesh, problem.A, problem.f, problem.g, cfg);
  const SolveReport rep = solve(sys, opts);
  LevelResult r;
  r.n = n;
  r.errors = compute_errors(rep.x, problem, mesh, cfg, p);
  r.residual = rep.relative_residual;
  r.ok = true;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Runs every level in order; a failing level is recorded and the sweep continues.
inline std::vector<LevelResult> run_convergence(const ProblemSpec& problem, const SolveConfig& cfg,
                                                const std::vector<int>& levels,
                                                const SolverOptions& opts = {}, double p = 2.0) {
  std::vector<LevelResult> out;
  out.reserve(levels.size());
  for (int n : levels) {
    try {
      out.push_back(run_level(problem, cfg, n, opts, p));
    } catch (const std::exception& ex) {
      LevelResult r;
      r.n = n;
      r.failure = ex.what();
      out.push_back(r);
    }
  }
  return out;
}

enum class Measure { lp, grad, hess, w1h, w2h };

inline double measure(const ErrorReport& e, Measure m) {
  switch (m) {
    case Measure::lp: return e.lp;
    case Measure::grad: return e.grad_lp;
    case Measure::hess: return e.hess_lp;
    case Measure::w1h: return e.w1h;
    case Measure::w2h: return e.w2h;
  }
  return 0.0;
}

/// Rate between level i-1 and i for each level; undefined across failed levels.
inline std::vector<std::optional<double>> level_rates(const std::vector<LevelResult>& rows,
                                                      Measure m) {
  std::vector<std::optional<double>> rates(rows.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i].ok || !rows[i - 1].ok) continue;
    const auto r = eoc({measure(rows[i - 1].errors, m), measure(rows[i].errors, m)},
                       {rows[i - 1].errors.h, rows[i].errors.h});
    rates[i] = r[1];
  }
  return rates;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string format_rate(const std::optional<double>& r) {
  return r ? format_number(*r) : std::string("NA");
}

inline const char* csv_header() {
  return "problem,k,epsilon,gamma,n,h,ndof,L2,L2_rate,H1semi,H1_rate,H2semi,H2_rate,W1h,W2h,"
         "residual,seconds";
}

/// CSV rows (with header) for a sweep. `timing = false` writes 0 seconds so
/// that output is byte-identical across runs.
inline void write_csv(std::ostream& os, const std::string& problem, const SolveConfig& cfg,
                      const std::vector<LevelResult>& rows, bool timing = true,
                      bool header = true) {
  if (header) os << csv_header() << '\n';
  const auto l2 = level_rates(rows, Measure::lp);
  const auto h1 = level_rates(rows, Measure::grad);
  const auto h2 = level_rates(rows, Measure::hess);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << problem << ',' << cfg.k << ',' << cfg.epsilon << ',' << format_number(cfg.gamma) << ','
       << r.n << ',';
    if (!r.ok) {
      os << "FAIL,FAIL,FAIL,NA,FAIL,NA,FAIL,NA,FAIL,FAIL,FAIL,FAIL\n";
      continue;
    }
    const auto& e = r.errors;
    os << format_number(e.h) << ',' << e.ndof << ',' << format_number(e.lp) << ','
       << format_rate(l2[i]) << ',' << format_number(e.grad_lp) << ',' << format_rate(h1[i]) << ','
       << format_number(e.hess_lp) << ',' << format_rate(h2[i]) << ',' << format_number(e.w1h)
       << ',' << format_number(e.w2h) << ',' << format_number(r.residual) << ','
       << format_number(timing ? r.seconds : 0.0) << '\n';
  }
}

/// Static log-log chart of L2 / H1 / H2 errors against h with a reference
/// slope triangle per series.
inline void write_svg(std::ostream& os, const std::string& title,
                      const std::vector<LevelResult>& rows) {
  struct Series {
    const char* name;
    Measure m;
    const char* color;
  };
  const Series series[] = {{"L2", Measure::lp, "#1f77b4"},
                           {"H1 semi", Measure::grad, "#d62728"},
                           {"H2 semi", Measure::hess, "#2ca02c"}};
  double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    hmin = std::min(hmin, r.errors.h);
    hmax = std::max(hmax, r.errors.h);
    for (const auto& s : series) {
      const double v = measure(r.errors, s.m);
      if (v > 0.0) {
        emin = std::min(emin, v);
        emax = std::max(emax, v);
      }
    }
  }
  const double width = 640, height = 480, margin = 60;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";
  if (!(hmax > 0.0) || !(emax > 0.0)) {
    os << "</svg>\n";
    return;
  }
  if (hmax == hmin) hmax = hmin * 2.0;
  if (emax == emin) emax = emin * 10.0;
  const double lh0 = std::log10(hmin) - 0.1, lh1 = std::log10(hmax) + 0.1;
  const double le0 = std::log10(emin) - 0.3, le1 = std::log10(emax) + 0.3;
  auto px = [&](double h) { return margin + (std::log10(h) - lh0) / (lh1 - lh0) * (width - 2 * margin); };
  auto py = [&](double e) {
    return height - margin - (std::log10(e) - le0) / (le1 - le0) * (height - 2 * margin);
  };
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
     << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\" font-size=\"13\">h (log)</text>\n";
  os << "<text x=\"18\" y=\"" << height / 2 << "\" transform=\"rotate(-90 18 " << height / 2
     << ")\" text-anchor=\"middle\" font-size=\"13\">error (log)</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    std::vector<std::pair<double, double>> xy;
    for (const auto& r : rows) {
      const double v = r.ok ? measure(r.errors, s.m) : 0.0;
      if (v > 0.0) xy.emplace_back(r.errors.h, v);
    }
    if (xy.size() < 2) continue;
    for (const auto& [h, v] : xy) pts << px(h) << ',' << py(v) << ' ';
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\""
       << pts.str() << "\"/>\n";
    for (const auto& [h, v] : xy) {
      os << "<circle cx=\"" << px(h) << "\" cy=\"" << py(v) << "\" r=\"3\" fill=\"" << s.color
         << "\"/>\n";
    }
    // Slope triangle over the two finest levels, drawn below the series.
    const auto& [h1, e1] = xy[xy.size() - 1];
    const auto& [h0, e0] = xy[xy.size() - 2];
    const double slope = std::log(e0 / e1) / std::log(h0 / h1);
    const double shift = 0.6;
    const double x0 = px(h1), x1 = px(h0);
    const double y0 = py(e1 * shift), y1 = py(e0 * shift);
    os << "<polygon fill=\"none\" stroke=\"" << s.color << "\" stroke-dasharray=\"4,3\" points=\""
       << x0 << ',' << y0 << ' ' << x1 << ',' << y0 << ' ' << x1 << ',' << y1 << "\"/>\n";
    os << "<text x=\"" << x1 + 4 << "\" y=\"" << (y0 + y1) / 2 << "\" font-size=\"11\" fill=\""
       << s.color << "\">" << format_number(std::round(slope * 100.0) / 100.0) << "</text>\n";
    os << "<text x=\"" << margin + 10 << "\" y=\"" << margin + 18 + 16 * legend
       << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
    ++legend;
  }
  os << "</svg>\n";
}

}  // namespace ndg
