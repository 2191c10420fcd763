#include "gaussify/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gaussify/error.hpp"

namespace gfy {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> header_lines(const ProtocolConfig& c) {
  std::vector<std::string> h;
  if (c.initial_state) h.push_back("# initial_state = explicit");
  else h.push_back("# epsilon = " + format_number(c.epsilon));
  h.push_back("# steps = " + std::to_string(c.steps));
  h.push_back("# truncation = " + std::to_string(c.truncation));
  h.push_back("# max_truncation = " + std::to_string(c.max_truncation));
  h.push_back("# detector = " + c.detector.to_string());
  h.push_back(std::string("# single_mode = ") + (c.single_mode ? "true" : "false"));
  h.push_back("# leak_threshold = " + format_number(c.leak_threshold));
  h.push_back(std::string("# leak_policy = ") + (c.leak_policy == LeakPolicy::Fail ? "fail" : "record"));
  h.push_back("# convention.beamsplitter = a+ -> (a+ + b+)/sqrt2, b+ -> (-a+ + b+)/sqrt2; first output measured, second kept");
  h.push_back("# convention.log_base = 2");
  h.push_back("# convention.detector_policy = one detector per party, each with the stated efficiency");
  h.push_back("# convention.quadratures = x = (a + a+)/sqrt2, p = (a - a+)/(i sqrt2)");
  return h;
}

namespace {

void write_header(std::ostream& out, const ProtocolConfig& c) {
  for (const auto& line : header_lines(c)) out << line << '\n';
}

}  // namespace

void write_trace_csv(std::ostream& out, const DistillationTrace& trace) {
  write_header(out, trace.config);
  out << "step,p_success,p_cumulative,log_negativity,purity,gaussianity,leak,truncation\n";
  for (const auto& r : trace.records)
    out << r.step << ',' << format_number(r.p_success) << ',' << format_number(r.p_cumulative) << ','
        << format_number(r.log_negativity) << ',' << format_number(r.purity) << ',' << format_number(r.gaussianity)
        << ',' << format_number(r.leak) << ',' << r.truncation << '\n';
}

void write_sweep_csv(std::ostream& out, const ProtocolConfig& base, double initial, const std::vector<SweepRow>& rows) {
  write_header(out, base);
  out << "# initial_log_negativity = " << format_number(initial) << '\n';
  out << "eta,steps,log_negativity,p_cumulative,initial\n";
  for (const auto& r : rows)
    out << format_number(r.eta) << ',' << r.steps << ',' << format_number(r.log_negativity) << ','
        << format_number(r.p_cumulative) << ',' << format_number(initial) << '\n';
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid, const ProtocolConfig& config, int step) {
  write_header(out, config);
  const GridSpec& g = grid.spec;
  out << "# wigner_step = " << step << '\n';
  out << "# grid = " << format_number(g.xmin) << ':' << format_number(g.xmax) << ':' << format_number(g.pmin) << ':'
      << format_number(g.pmax) << ':' << g.points << '\n';
  out << "x,p,W\n";
  for (int i = 0; i < g.points; ++i)
    for (int j = 0; j < g.points; ++j)
      out << format_number(g.x(i)) << ',' << format_number(g.p(j)) << ',' << format_number(grid.values(i, j)) << '\n';
}

WignerGrid read_wigner_csv(std::istream& in) {
  std::string line;
  std::optional<GridSpec> spec;
  bool columns = false;
  while (std::getline(in, line)) {
    if (line.rfind("# grid = ", 0) == 0) spec = GridSpec::parse(line.substr(9));
    if (line == "x,p,W") {
      columns = true;
      break;
    }
  }
  if (!spec || !columns) throw Error("Wigner CSV lacks a grid header");
  WignerGrid grid{*spec, RealMatrix::Zero(spec->points, spec->points)};
  for (int i = 0; i < spec->points; ++i)
    for (int j = 0; j < spec->points; ++j) {
      if (!std::getline(in, line)) throw Error("Wigner CSV is truncated");
      const auto last = line.rfind(',');
      if (last == std::string::npos) throw Error("malformed Wigner CSV row");
      grid.values(i, j) = std::stod(line.substr(last + 1));
    }
  return grid;
}

}  // namespace gfy
