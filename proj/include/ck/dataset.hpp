#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "ck/error.hpp"
#include "ck/sim.hpp"

// Column-oriented view of an analysis dataset, keyed by the CSV column names
// the generator writes.  Estimation code never touches IndividualRecord
// directly; it reads named columns so that externally supplied CSV files and
// in-memory simulations go through the same path.

namespace ck {

struct Dataset {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> columns;
  std::unordered_map<std::string, std::size_t> index;

  Eigen::Index n_rows() const {
    return columns.empty() ? 0 : columns.front().size();
  }

  bool has(const std::string& name) const { return index.count(name) > 0; }

  const Eigen::VectorXd& col(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) {
      fail(errc::missing_column, "dataset has no column '" + name + "'");
    }
    return columns[it->second];
  }

  void add(const std::string& name, Eigen::VectorXd values);
};

Dataset read_dataset(const std::string& path);

void write_dataset(const Dataset& dataset, const std::string& path);

// Converts generated records into the same column layout as the CSV export.
Dataset to_dataset(const std::vector<IndividualRecord>& records,
                   bool include_potentials);

}  // namespace ck
