#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace krlab {

/// One checked inequality. Exact checks decide the exit status; fitted
/// checks (sweep uniformity, asymptotic rates) are reported alongside.
struct Verdict {
  std::string inequality;
  /// Human-readable threshold, e.g. "<= 0.02".
  std::string tolerance;
  double measured = 0.0;
  /// Distance to the threshold, positive when the check passes.
  double margin = 0.0;
  bool pass = false;
  bool exact = true;
};

/// Rows of numbers under fixed column names; written as <name>.csv.
struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws when the row width differs from the column count.
  void add(std::vector<double> row);
};

class ExperimentRecord {
 public:
  explicit ExperimentRecord(std::string experiment);

  const std::string& experiment() const noexcept { return experiment_; }
  nlohmann::ordered_json& parameters() noexcept { return parameters_; }
  nlohmann::ordered_json& provenance() noexcept { return provenance_; }
  const nlohmann::ordered_json& parameters() const noexcept { return parameters_; }

  SweepTable& sweep(const std::string& name, std::vector<std::string> columns);
  const std::map<std::string, SweepTable>& sweeps() const noexcept { return sweeps_; }

  /// pass = measured <= limit.
  void check_at_most(std::string inequality, double measured, double limit, bool exact = true);
  /// pass = measured >= limit.
  void check_at_least(std::string inequality, double measured, double limit, bool exact = true);
  void add(Verdict v);
  const std::vector<Verdict>& verdicts() const noexcept { return verdicts_; }

  /// All exact checks pass.
  bool passed() const;
  bool all_passed() const;

  /// Fixed-format table, one inequality per line.
  std::string verdict_text() const;
  nlohmann::ordered_json to_json() const;
  /// record.json, one CSV per sweep and verdict.txt.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string experiment_;
  nlohmann::ordered_json parameters_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json provenance_ = nlohmann::ordered_json::object();
  std::map<std::string, SweepTable> sweeps_;
  std::vector<Verdict> verdicts_;
};

/// Shortest round-trip decimal form, "inf", "-inf" or "nan".
std::string format_number(double v);

}  // namespace krlab
