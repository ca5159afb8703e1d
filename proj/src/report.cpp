#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "conelab/csv.hpp"
#include "conelab/error.hpp"
#include "conelab/experiments.hpp"

namespace conelab {

const std::string_view kSurvivedFooter =
    "Note: Survived means the computed solution stayed below U_max up to t_end on the "
    "truncated grid. It is numerical evidence of global existence, not a proof.\n";

namespace {

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

std::string opt_bool(const std::optional<bool>& v) {
  if (!v) return {};
  return *v ? "true" : "false";
}

std::string svg_num(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(4);
  s << v;
  return s.str();
}

const char* outcome_color(const std::string& outcome) {
  if (outcome == "BlewUp") return "#d62728";
  if (outcome == "Survived") return "#1f77b4";
  return "#7f7f7f";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  write_csv_row(out, {"n", "theta0", "omega1", "p", "forcing_kind", "forcing_value",
                      "regime_predicted", "outcome", "T_est", "T_est_halfwidth", "T_bound_thm",
                      "G0", "largeness_holds", "clip_count"});
  for (const SweepRow& r : result.rows) {
    write_csv_row(out, std::vector<std::string>{
                           std::to_string(r.n), format_real(r.theta0), format_real(r.omega1),
                           format_real(r.p), r.forcing_kind, format_real(r.forcing_value),
                           std::string(to_string(r.regime)), r.outcome, opt_real(r.T_est),
                           opt_real(r.T_est_halfwidth), opt_real(r.T_bound), format_real(r.G0),
                           opt_bool(r.largeness_holds), std::to_string(r.clip_count)});
  }
}

void write_phase_svg(std::ostream& out, const SweepResult& result) {
  constexpr double width = 640.0, height = 480.0;
  constexpr double left = 70.0, right = 20.0, top = 40.0, bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double p_lo = 1.0, p_hi = 2.0, f_lo = 0.0, f_hi = 1.0;
  bool exponential = true;
  int n = 2;
  if (!result.rows.empty()) {
    p_lo = f_lo = HUGE_VAL;
    p_hi = f_hi = -HUGE_VAL;
    for (const SweepRow& r : result.rows) {
      p_lo = std::min(p_lo, r.p);
      p_hi = std::max(p_hi, r.p);
      f_lo = std::min(f_lo, r.forcing_value);
      f_hi = std::max(f_hi, r.forcing_value);
    }
    exponential = result.rows.front().forcing_kind == "exp";
    n = result.rows.front().n;
  }
  if (exponential) {
    // keep the threshold visible across the p range
    f_lo = std::min(f_lo, 0.0);
    f_hi = std::max(f_hi, (p_hi - 1.0) * lambda1(n));
  }
  const auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0.0 ? 0.08 * span : 0.5;
    lo -= margin;
    hi += margin;
  };
  pad(p_lo, p_hi);
  pad(f_lo, f_hi);
  const auto X = [&](double p) { return left + (p - p_lo) / (p_hi - p_lo) * plot_w; };
  const auto Y = [&](double f) { return top + (f_hi - f) / (f_hi - f_lo) * plot_h; };

  const std::string flabel = exponential ? "mu" : "q";
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(width) << "\" height=\""
      << svg_num(height) << "\" viewBox=\"0 0 " << svg_num(width) << ' ' << svg_num(height)
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << svg_num(width) << "\" height=\"" << svg_num(height)
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << svg_num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">Observed outcomes, n = " << n
      << "</text>\n";
  out << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\""
      << svg_num(plot_w) << "\" height=\"" << svg_num(plot_h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double p = p_lo + (p_hi - p_lo) * t / 4.0;
    const double f = f_lo + (f_hi - f_lo) * t / 4.0;
    out << "<text x=\"" << svg_num(X(p)) << "\" y=\"" << svg_num(top + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(p) << "</text>\n";
    out << "<text x=\"" << svg_num(left - 6) << "\" y=\"" << svg_num(Y(f) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(f) << "</text>\n";
  }
  out << "<text x=\"" << svg_num(left + plot_w / 2) << "\" y=\"" << svg_num(height - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">p</text>\n";
  out << "<text x=\"18\" y=\"" << svg_num(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << svg_num(top + plot_h / 2) << ")\">" << flabel
      << "</text>\n";

  if (exponential) {
    const double l1 = lambda1(n);
    out << "<line id=\"threshold\" x1=\"" << svg_num(X(p_lo)) << "\" y1=\""
        << svg_num(Y((p_lo - 1.0) * l1)) << "\" x2=\"" << svg_num(X(p_hi)) << "\" y2=\""
        << svg_num(Y((p_hi - 1.0) * l1))
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << svg_num(X(p_hi) - 4) << "\" y=\""
        << svg_num(Y((p_hi - 1.0) * l1) - 6)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << "mu = (p-1) lambda1</text>\n";
  }

  // one marker per (p, value); rows at other theta0 overlap on purpose
  for (const SweepRow& r : result.rows) {
    out << "<circle cx=\"" << svg_num(X(r.p)) << "\" cy=\"" << svg_num(Y(r.forcing_value))
        << "\" r=\"6\" fill=\"" << outcome_color(r.outcome) << "\" fill-opacity=\"0.8\">"
        << "<title>p=" << format_real(r.p) << " " << flabel << "=" << format_real(r.forcing_value)
        << " " << r.outcome << "</title></circle>\n";
  }

  const char* labels[] = {"BlewUp", "Survived", "Inconclusive"};
  for (int k = 0; k < 3; ++k) {
    const double y = top + 14 + 16 * k;
    out << "<circle cx=\"" << svg_num(left + 12) << "\" cy=\"" << svg_num(y)
        << "\" r=\"5\" fill=\"" << outcome_color(labels[k]) << "\"/>\n";
    out << "<text x=\"" << svg_num(left + 22) << "\" y=\"" << svg_num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << labels[k] << "</text>\n";
  }
  out << "</svg>\n";
}

void write_sweep_report(std::ostream& out, const SweepResult& result) {
  std::map<std::string, std::size_t> counts;
  std::size_t agree = 0, always = 0, respected = 0, bounded = 0;
  for (const SweepRow& r : result.rows) {
    ++counts[r.outcome];
    if (r.regime == RegimeTag::BlowUpAlways) {
      ++always;
      if (r.outcome == "BlewUp") ++agree;
    }
    if (r.outcome == "BlewUp" && r.T_bound && r.T_est) {
      ++bounded;
      if (*r.T_est <= *r.T_bound * 1.05) ++respected;
    }
  }
  out << "conelab sweep report\n\n";
  out << "points: " << result.rows.size() << '\n';
  for (const auto& [name, c] : counts) out << "  " << name << ": " << c << '\n';
  out << "unconditional blow-up points that blew up: " << agree << " of " << always << '\n';
  out << "blow-up times within 1.05 x bound: " << respected << " of " << bounded << "\n\n";
  for (const SweepRow& r : result.rows) {
    out << "p=" << format_real(r.p) << ' ' << (r.forcing_kind == "exp" ? "mu=" : "q=")
        << format_real(r.forcing_value) << "  predicted " << to_string(r.regime) << "  observed "
        << r.outcome;
    if (r.T_est) out << "  T_est=" << format_real(*r.T_est);
    if (r.T_bound) out << "  bound(" << r.which_theorem << ")=" << format_real(*r.T_bound);
    if (!r.reason.empty()) out << "  reason: " << r.reason;
    out << '\n';
  }
  out << '\n' << kSurvivedFooter;
}

void emit_report(const SweepResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  const auto open = [](const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
    return f;
  };
  {
    auto f = open(dir / "sweep.csv");
    write_sweep_csv(f, result);
  }
  {
    auto f = open(dir / "phase.svg");
    write_phase_svg(f, result);
  }
  {
    auto f = open(dir / "report.txt");
    write_sweep_report(f, result);
  }
}

}  // namespace conelab
