#pragma once

// CSV output with '#' header comments recording the resolved configuration.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gaussify/measures.hpp"
#include "gaussify/protocol.hpp"

namespace gfy {

/// 12 significant digits; "nan" for NaN.
std::string format_number(double v);

/// "# key = value" lines for the config and the fixed conventions.
std::vector<std::string> header_lines(const ProtocolConfig& config);

void write_trace_csv(std::ostream& out, const DistillationTrace& trace);

struct SweepRow {
  double eta = 1.0;
  int steps = 1;
  double log_negativity = 0.0;
  double p_cumulative = 1.0;
};

/// One row per (eta, steps) plus the initial-state reference in the header and the `initial` column.
void write_sweep_csv(std::ostream& out, const ProtocolConfig& base, double initial, const std::vector<SweepRow>& rows);

void write_wigner_csv(std::ostream& out, const WignerGrid& grid, const ProtocolConfig& config, int step);

/// Reads a grid written by write_wigner_csv.
WignerGrid read_wigner_csv(std::istream& in);

}  // namespace gfy
