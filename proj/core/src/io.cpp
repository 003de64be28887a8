#include "solvlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "solvlab/error.hpp"

namespace solvlab {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

std::string read_all(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_header(std::ostream& os, const Grid3D& g) {
  os << "# structured-grid v1\n";
  os << "dims " << g.nx() << ' ' << g.ny() << ' ' << g.nz() << '\n';
  os << "origin " << format_double(g.origin()[0]) << ' ' << format_double(g.origin()[1]) << ' '
     << format_double(g.origin()[2]) << '\n';
  os << "spacing " << format_double(g.spacing()) << '\n';
}

}  // namespace

void line_column(const std::string& text, std::size_t offset, int& line, int& column) {
  line = 1;
  column = 1;
  const std::size_t end = std::min(offset, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_structured_grid(std::ostream& os, const ScalarField& field) {
  write_header(os, field.grid);
  for (double v : field.values) os << format_double(v) << '\n';
}

void write_structured_grid(const std::string& path, const ScalarField& field) {
  auto os = open_out(path);
  write_structured_grid(os, field);
}

void write_structured_grid(const std::string& path, const PhaseField& field) {
  auto os = open_out(path);
  write_header(os, field.grid);
  for (std::uint8_t v : field.values) os << static_cast<int>(v) << '\n';
}

ScalarField read_structured_grid(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw ParseError(std::string("structured grid: missing ") + what, lineno + 1, 1);
    ++lineno;
  };
  next("header");
  if (line.rfind("# structured-grid v1", 0) != 0) throw ParseError("structured grid: bad header", lineno, 1);
  std::array<int, 3> dims{};
  Vec3 origin{};
  double h = 0.0;
  next("dims");
  {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> dims[0] >> dims[1] >> dims[2]) || key != "dims") {
      throw ParseError("structured grid: expected 'dims NX NY NZ'", lineno, 1);
    }
  }
  next("origin");
  {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> origin[0] >> origin[1] >> origin[2]) || key != "origin") {
      throw ParseError("structured grid: expected 'origin X Y Z'", lineno, 1);
    }
  }
  next("spacing");
  {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> h) || key != "spacing") throw ParseError("structured grid: expected 'spacing H'", lineno, 1);
  }
  Grid3D g;
  try {
    g = Grid3D(origin, h, dims);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("structured grid: ") + e.what(), lineno, 1);
  }
  ScalarField f(g);
  for (std::size_t c = 0; c < f.size(); ++c) {
    next("value");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ParseError("structured grid: not a number", lineno, 1);
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw ParseError("structured grid: trailing characters", lineno, static_cast<int>(used) + 1);
    }
    f.values[c] = v;
  }
  return f;
}

ScalarField read_structured_grid(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_structured_grid(is);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << csv_field(fields[i]);
  }
  os_ << "\r\n";
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  auto os = open_out(path);
  CsvWriter w(os);
  w.row({"iteration", "residual", "energy"});
  for (const auto& t : trace) w.row({std::to_string(t.iteration), format_double(t.residual), format_double(t.energy)});
}

void write_phi_table(const std::string& path, const PhiTable& table) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : table.entries) {
    j["entries"].push_back({{"direction", e.direction}, {"estimate", e.estimate}, {"radii", e.radii}, {"residual", e.residual}});
  }
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

PhiTable read_phi_table(const std::string& path) {
  const std::string text = read_all(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 0, col = 0;
    line_column(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
    throw ParseError(path + ": " + e.what(), line, col);
  }
  PhiTable table;
  try {
    for (const auto& e : j.at("entries")) {
      PhiEntry entry;
      entry.direction = e.at("direction").get<std::vector<double>>();
      entry.estimate = e.at("estimate").get<double>();
      if (e.contains("radii")) entry.radii = e.at("radii").get<std::vector<double>>();
      if (e.contains("residual")) entry.residual = e.at("residual").get<double>();
      table.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what(), 1, 1);
  }
  return table;
}

}  // namespace solvlab
