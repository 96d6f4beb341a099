#include "ck/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ck {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char ch : field) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

// 17 significant digits so a written double parses back bit-identical.
std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_number(const std::string& field) {
  if (field.empty()) return kNaN;
  return std::stod(field);
}

}  // namespace

void write_reports(const std::vector<EstimateReport>& reports,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot open '" + path + "'");
  out << "estimand,method,estimate,se,ci_low,ci_high,se_method,ci_method,"
         "truth,n_used,error,diagnostics\n";
  for (const auto& report : reports) {
    std::string diagnostics;
    for (const auto& [key, value] : report.diagnostics) {
      if (!diagnostics.empty()) diagnostics += ';';
      diagnostics += key + "=" + format_number(value);
    }
    out << csv_quote(to_string(report.spec)) << ',' << csv_quote(report.method)
        << ',' << format_number(report.estimate) << ','
        << format_number(report.se) << ',' << format_number(report.ci_low)
        << ',' << format_number(report.ci_high) << ',' << report.se_method
        << ',' << report.ci_method << ',' << format_number(report.truth) << ','
        << report.n_used << ',' << csv_quote(report.error) << ','
        << csv_quote(diagnostics) << '\n';
  }
  if (!out) fail(errc::io_failure, "write failed: " + path);
}

std::vector<EstimateReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_input, path + " is empty");

  std::vector<EstimateReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = csv_split(line);
    if (fields.size() != 12) {
      fail(errc::io_failure, path + ":" + std::to_string(line_no) +
                                 ": expected 12 fields, found " +
                                 std::to_string(fields.size()));
    }
    EstimateReport report;
    try {
      report.spec = parse_estimand(fields[0]);
      report.method = fields[1];
      report.estimate = parse_number(fields[2]);
      report.se = parse_number(fields[3]);
      report.ci_low = parse_number(fields[4]);
      report.ci_high = parse_number(fields[5]);
      report.se_method = fields[6];
      report.ci_method = fields[7];
      report.truth = parse_number(fields[8]);
      report.n_used = static_cast<Eigen::Index>(std::stoll(fields[9]));
      report.error = fields[10];
      if (!fields[11].empty()) {
        std::stringstream diagstream(fields[11]);
        std::string item;
        while (std::getline(diagstream, item, ';')) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) continue;
          report.diag(item.substr(0, eq), parse_number(item.substr(eq + 1)));
        }
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& ex) {
      fail(errc::io_failure, path + ":" + std::to_string(line_no) + ": " +
                                 ex.what());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string render_report(const std::vector<EstimateReport>& reports) {
  if (reports.empty()) fail(errc::empty_input, "no result rows to render");

  const std::vector<std::string> headers = {"estimand", "method",   "estimate",
                                            "se",       "ci95",     "truth",
                                            "flag",     "error"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(headers);

  auto num = [](double v) -> std::string {
    if (std::isnan(v)) return "-";
    char buffer[48];
    std::snprintf(buffer, sizeof buffer, "%.6g", v);
    return buffer;
  };

  for (const auto& report : reports) {
    std::string ci = "-";
    if (!std::isnan(report.ci_low) && !std::isnan(report.ci_high)) {
      ci = "[" + num(report.ci_low) + ", " + num(report.ci_high) + "]";
    }
    std::string flag = "-";
    if (!std::isnan(report.truth) && !std::isnan(report.estimate) &&
        !std::isnan(report.se) && report.se > 0.0) {
      flag = std::fabs(report.estimate - report.truth) > 3.0 * report.se
                 ? "*"
                 : "";
    }
    cells.push_back({to_string(report.spec), report.method,
                     num(report.estimate), num(report.se), ci,
                     num(report.truth), flag, report.error});
  }

  std::vector<std::size_t> widths(headers.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }

  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out << std::left << std::setw(static_cast<int>(widths[c]) + 2)
          << cells[r][c];
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < widths.size(); ++c) {
        out << std::string(widths[c], '-') << "  ";
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace ck
