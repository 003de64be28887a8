#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "solvlab/analysis.hpp"
#include "solvlab/grid.hpp"
#include "solvlab/pbsolver.hpp"

namespace solvlab {

/// 1-based line and column of a byte offset in text.
void line_column(const std::string& text, std::size_t offset, int& line, int& column);

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double v);

// Structured-grid text format:
//   # structured-grid v1
//   dims NX NY NZ
//   origin X Y Z
//   spacing H
//   one value per line, x fastest
void write_structured_grid(std::ostream& os, const ScalarField& field);
void write_structured_grid(const std::string& path, const ScalarField& field);
void write_structured_grid(const std::string& path, const PhaseField& field);
/// Throws ParseError (with the offending line) on malformed input.
ScalarField read_structured_grid(std::istream& is);
ScalarField read_structured_grid(const std::string& path);

/// RFC 4180 field quoting: fields with a comma, quote, CR or LF are quoted
/// and embedded quotes doubled.
std::string csv_field(const std::string& s);

class CsvWriter {
public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

private:
  std::ostream& os_;
};

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// Phi tables persist as JSON: {"entries": [{"direction": [...], "estimate": x, "radii": [...], "residual": y}]}.
void write_phi_table(const std::string& path, const PhiTable& table);
PhiTable read_phi_table(const std::string& path);

}  // namespace solvlab
