#include "ctax/milp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ctax/errors.hpp"

namespace ctax::milp {

double Row::lower() const {
  switch (sense) {
    case Sense::less_equal:
      return -kInf;
    case Sense::equal:
    case Sense::greater_equal:
      return rhs;
    case Sense::ranged:
      return range_lower;
  }
  return -kInf;
}

double Row::upper() const {
  switch (sense) {
    case Sense::greater_equal:
      return kInf;
    case Sense::less_equal:
    case Sense::equal:
    case Sense::ranged:
      return rhs;
  }
  return kInf;
}

int MilpProblem::add_column(std::string label, double lower, double upper,
                            double cost, bool binary) {
  const int j = num_vars();
  if (!label.empty()) {
    if (!col_index_.emplace(label, j).second) {
      throw Error("duplicate column label '" + label + "'");
    }
  }
  objective_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  binary_.push_back(binary);
  col_labels_.push_back(std::move(label));
  return j;
}

int MilpProblem::add_row(std::string label, std::vector<Term> terms,
                         Sense sense, double rhs) {
  const int r = num_rows();
  if (!label.empty()) {
    if (!row_index_.emplace(label, r).second) {
      throw Error("duplicate row label '" + label + "'");
    }
  }
  Row row;
  row.label = std::move(label);
  row.terms = std::move(terms);
  row.sense = sense;
  row.rhs = rhs;
  rows_.push_back(std::move(row));
  return r;
}

int MilpProblem::add_ranged_row(std::string label, std::vector<Term> terms,
                                double lower, double upper) {
  const int r = add_row(std::move(label), std::move(terms), Sense::ranged,
                        upper);
  rows_[r].range_lower = lower;
  return r;
}

std::optional<int> MilpProblem::find_column(const std::string& label) const {
  auto it = col_index_.find(label);
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> MilpProblem::find_row(const std::string& label) const {
  auto it = row_index_.find(label);
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

void MilpProblem::set_bounds(int col, double lower, double upper) {
  lower_.at(col) = lower;
  upper_.at(col) = upper;
}

void MilpProblem::set_cost(int col, double cost) { objective_.at(col) = cost; }

void MilpProblem::set_binary(int col, bool binary) { binary_.at(col) = binary; }

int MilpProblem::num_binaries() const {
  return static_cast<int>(std::count(binary_.begin(), binary_.end(), true));
}

std::vector<std::string> MilpProblem::check() const {
  std::vector<std::string> issues;
  const int n = num_vars();
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) ||
        std::isnan(objective_[j])) {
      issues.push_back("column " + col_labels_[j] + ": NaN data");
    }
    if (lower_[j] > upper_[j]) {
      issues.push_back("column " + col_labels_[j] + ": lower > upper");
    }
    if (binary_[j] && (lower_[j] < 0.0 || upper_[j] > 1.0)) {
      issues.push_back("column " + col_labels_[j] +
                       ": binary bounds outside [0,1]");
    }
  }
  for (const auto& row : rows_) {
    if (row.lower() > row.upper()) {
      issues.push_back("row " + row.label + ": lower side above upper side");
    }
    for (const auto& t : row.terms) {
      if (t.col < 0 || t.col >= n) {
        issues.push_back("row " + row.label + ": column index out of range");
        break;
      }
      if (!std::isfinite(t.coef)) {
        issues.push_back("row " + row.label + ": non-finite coefficient");
        break;
      }
    }
  }
  return issues;
}

double MilpProblem::evaluate(const std::vector<double>& x) const {
  double obj = objective_offset;
  for (int j = 0; j < num_vars(); ++j) obj += objective_[j] * x[j];
  return obj;
}

double MilpProblem::row_activity(int r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : rows_[r].terms) a += t.coef * x[t.col];
  return a;
}

double MilpProblem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (int r = 0; r < num_rows(); ++r) {
    const double a = row_activity(r, x);
    worst = std::max(worst, rows_[r].lower() - a);
    worst = std::max(worst, a - rows_[r].upper());
  }
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::gap_limit:
      return "gap_limit";
    case SolveStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

std::vector<std::string> SolverConfig::check() const {
  std::vector<std::string> issues;
  if (!(relative_mip_gap >= 0.0)) issues.emplace_back("relative_mip_gap < 0");
  if (!(feasibility_tolerance > 0.0)) {
    issues.emplace_back("feasibility_tolerance must be > 0");
  }
  if (max_nodes < 1) issues.emplace_back("max_nodes must be >= 1");
  if (!(max_seconds > 0.0)) issues.emplace_back("max_seconds must be > 0");
  return issues;
}

namespace {

void write_bound(std::ostream& os, double v) {
  if (v == kInf) {
    os << "+inf";
  } else if (v == -kInf) {
    os << "-inf";
  } else {
    os << v;
  }
}

void write_terms(std::ostream& os, const MilpProblem& p,
                 const std::vector<Term>& terms) {
  if (terms.empty()) {
    os << "0";
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    if (!first) os << (t.coef < 0 ? " - " : " + ");
    else if (t.coef < 0) os << "-";
    os << std::abs(t.coef) << " " << p.column_label(t.col);
    first = false;
  }
}

}  // namespace

void write_lp_listing(const MilpProblem& p, std::ostream& os) {
  os << "minimize\n  obj: ";
  std::vector<Term> obj;
  for (int j = 0; j < p.num_vars(); ++j) {
    if (p.objective()[j] != 0.0) obj.push_back({j, p.objective()[j]});
  }
  write_terms(os, p, obj);
  if (p.objective_offset != 0.0) os << " + " << p.objective_offset;
  os << "\nsubject to\n";
  for (const auto& row : p.rows()) {
    os << "  " << row.label << ": ";
    if (row.sense == Sense::ranged) {
      os << row.range_lower << " <= ";
    }
    write_terms(os, p, row.terms);
    switch (row.sense) {
      case Sense::less_equal:
      case Sense::ranged:
        os << " <= ";
        break;
      case Sense::equal:
        os << " = ";
        break;
      case Sense::greater_equal:
        os << " >= ";
        break;
    }
    os << row.rhs << "\n";
  }
  os << "bounds\n";
  for (int j = 0; j < p.num_vars(); ++j) {
    os << "  ";
    write_bound(os, p.lower()[j]);
    os << " <= " << p.column_label(j) << " <= ";
    write_bound(os, p.upper()[j]);
    if (p.binary_mask()[j]) os << "  binary";
    os << "\n";
  }
  os << "end\n";
}

}  // namespace ctax::milp
