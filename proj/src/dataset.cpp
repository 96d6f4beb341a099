#include "ck/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ck {

void Dataset::add(const std::string& name, Eigen::VectorXd values) {
  if (!columns.empty() && values.size() != n_rows()) {
    fail(errc::dimension_mismatch,
         "column '" + name + "' has " + std::to_string(values.size()) +
             " rows, dataset has " + std::to_string(n_rows()));
  }
  if (has(name)) {
    fail(errc::invalid_config, "duplicate column '" + name + "'");
  }
  index[name] = columns.size();
  names.push_back(name);
  columns.push_back(std::move(values));
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_input, path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) names.push_back(name);
  }
  if (names.empty()) fail(errc::empty_input, path + " has no columns");

  std::vector<std::vector<double>> values(names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* cursor = line.c_str();
    for (std::size_t c = 0; c < names.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cursor, &end);
      if (end == cursor) {
        fail(errc::io_failure, path + ":" + std::to_string(line_no) +
                                   ": bad numeric field in column '" +
                                   names[c] + "'");
      }
      values[c].push_back(v);
      cursor = end;
      if (*cursor == ',') {
        ++cursor;
      } else if (*cursor != '\0') {
        fail(errc::io_failure, path + ":" + std::to_string(line_no) +
                                   ": unexpected character after column '" +
                                   names[c] + "'");
      } else if (c + 1 < names.size()) {
        fail(errc::io_failure, path + ":" + std::to_string(line_no) +
                                   ": expected " + std::to_string(names.size()) +
                                   " fields, found " + std::to_string(c + 1));
      }
    }
  }
  if (values.front().empty()) {
    fail(errc::empty_input, path + " has a header but no rows");
  }

  Dataset dataset;
  for (std::size_t c = 0; c < names.size(); ++c) {
    Eigen::VectorXd column(static_cast<Eigen::Index>(values[c].size()));
    for (std::size_t i = 0; i < values[c].size(); ++i) {
      column(static_cast<Eigen::Index>(i)) = values[c][i];
    }
    dataset.add(names[c], std::move(column));
  }
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  if (dataset.columns.empty()) fail(errc::empty_input, "dataset has no columns");
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) fail(errc::io_failure, "cannot open '" + path + "'");
  std::string header;
  for (std::size_t c = 0; c < dataset.names.size(); ++c) {
    if (c) header += ',';
    header += dataset.names[c];
  }
  header += '\n';
  std::fputs(header.c_str(), out);
  char field[64];
  for (Eigen::Index i = 0; i < dataset.n_rows(); ++i) {
    std::string row;
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
      if (c) row += ',';
      std::snprintf(field, sizeof field, "%.12g", dataset.columns[c](i));
      row += field;
    }
    row += '\n';
    std::fputs(row.c_str(), out);
  }
  const bool failed = std::ferror(out) != 0;
  std::fclose(out);
  if (failed) fail(errc::io_failure, "write failed: " + path);
}

Dataset to_dataset(const std::vector<IndividualRecord>& records,
                   bool include_potentials) {
  if (records.empty()) fail(errc::empty_input, "no records");
  const auto n = static_cast<Eigen::Index>(records.size());
  std::vector<std::string> names = kObservedColumns;
  if (include_potentials) {
    names.insert(names.end(), kPotentialColumns.begin(),
                 kPotentialColumns.end());
  }

  Dataset dataset;
  for (const auto& name : names) {
    Eigen::VectorXd column(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const IndividualRecord& r = records[static_cast<std::size_t>(i)];
      const CovariateProfile& x = r.covariates;
      const ExposurePath& e = r.exposures;
      const PotentialOutcomeSet& po = r.potentials;
      double v = 0.0;
      if (name == "id") v = static_cast<double>(r.id);
      else if (name == "age") v = x.maternal_age;
      else if (name == "urban") v = x.urban;
      else if (name == "east") v = x.east;
      else if (name == "edu") v = x.education;
      else if (name == "allergy") v = x.allergy;
      else if (name == "smoke") v = x.smoke;
      else if (name == "female") v = x.female;
      else if (name == "bweight") v = x.birth_weight;
      else if (name == "caesar") v = x.caesarean;
      else if (name == "a1") v = e.a1_offered;
      else if (name == "a2") v = e.a2_followed;
      else if (name == "a3") v = e.a3_started_bf;
      else if (name == "a4") v = e.a4_full3months;
      else if (name == "bfdur") v = e.bf_duration;
      else if (name == "y") v = r.y_observed;
      else if (name == "y_a1_0") v = po.y_a1_0;
      else if (name == "y_a1_1") v = po.y_a1_1;
      else if (name == "y_a2_0") v = po.y_a2_0;
      else if (name == "y_a2_1") v = po.y_a2_1;
      else if (name == "y_a3_0") v = po.y_a1_0_a3_0;
      else if (name == "y_a1_0_a3_1") v = po.y_a1_0_a3_1;
      else if (name == "y_a1_1_a3_1") v = po.y_a1_1_a3_1;
      else if (name == "y_a2_1_a3_1") v = po.y_a2_1_a3_1;
      else if (name == "y_a4_1") v = po.y_a4_1;
      else if (name == "a2_offer") v = po.a2_under_offer;
      else if (name == "u") v = r.u_hidden;
      column(i) = v;
    }
    dataset.add(name, std::move(column));
  }
  return dataset;
}

}  // namespace ck
