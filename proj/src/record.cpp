#include "krlab/record.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace krlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string short_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::ordered_json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

void SweepTable::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::logic_error("sweep row width does not match its columns");
  rows.push_back(std::move(row));
}

ExperimentRecord::ExperimentRecord(std::string experiment) : experiment_(std::move(experiment)) {}

SweepTable& ExperimentRecord::sweep(const std::string& name, std::vector<std::string> columns) {
  auto [it, inserted] = sweeps_.try_emplace(name);
  if (inserted) {
    it->second.columns = std::move(columns);
  } else if (it->second.columns != columns) {
    throw std::logic_error("sweep '" + name + "' reopened with different columns");
  }
  return it->second;
}

void ExperimentRecord::check_at_most(std::string inequality, double measured, double limit, bool exact) {
  add(Verdict{std::move(inequality), "<= " + short_number(limit), measured, limit - measured, measured <= limit, exact});
}

void ExperimentRecord::check_at_least(std::string inequality, double measured, double limit, bool exact) {
  add(Verdict{std::move(inequality), ">= " + short_number(limit), measured, measured - limit, measured >= limit, exact});
}

void ExperimentRecord::add(Verdict v) {
  if (std::isnan(v.measured)) v.pass = false;
  verdicts_.push_back(std::move(v));
}

bool ExperimentRecord::passed() const {
  for (const auto& v : verdicts_)
    if (v.exact && !v.pass) return false;
  return true;
}

bool ExperimentRecord::all_passed() const {
  for (const auto& v : verdicts_)
    if (!v.pass) return false;
  return true;
}

std::string ExperimentRecord::verdict_text() const {
  std::size_t width = 10;
  for (const auto& v : verdicts_) width = std::max(width, v.inequality.size());
  std::ostringstream out;
  out << "experiment: " << experiment_ << '\n';
  for (const auto& v : verdicts_) {
    out << (v.pass ? "PASS" : "FAIL") << "  " << (v.exact ? "exact " : "fitted") << "  " << v.inequality
        << std::string(width - v.inequality.size(), ' ') << "  measured=" << short_number(v.measured)
        << "  tol " << v.tolerance << "  margin=" << short_number(v.margin) << '\n';
  }
  out << "status: " << (passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

nlohmann::ordered_json ExperimentRecord::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_;
  j["parameters"] = parameters_;
  j["provenance"] = provenance_;
  auto& checks = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts_) {
    checks.push_back({{"inequality", v.inequality},
                      {"tolerance", v.tolerance},
                      {"measured", number_json(v.measured)},
                      {"margin", number_json(v.margin)},
                      {"pass", v.pass},
                      {"exact", v.exact}});
  }
  auto& tables = j["sweeps"] = nlohmann::ordered_json::object();
  for (const auto& [name, table] : sweeps_) {
    auto& rows = tables[name] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json r;
      for (std::size_t c = 0; c < table.columns.size(); ++c) r[table.columns[c]] = number_json(row[c]);
      rows.push_back(std::move(r));
    }
  }
  j["passed"] = passed();
  return j;
}

void ExperimentRecord::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("record.json");
    out << to_json().dump(2) << '\n';
  }
  for (const auto& [name, table] : sweeps_) {
    auto out = open(name + ".csv");
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
      out << '\n';
    }
  }
  auto out = open("verdict.txt");
  out << verdict_text();
}

}  // namespace krlab
