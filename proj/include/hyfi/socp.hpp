#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hyfi/common.hpp"

namespace hyfi {

/// Sparse affine form sum_i coef_i * x[idx_i] + constant.
struct LinearExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinearExpr() = default;
  explicit LinearExpr(double c) : constant(c) {}

  LinearExpr& add(int index, double coef) {
    if (coef != 0.0) terms.emplace_back(index, coef);
    return *this;
  }
  LinearExpr& add(const LinearExpr& other, double scale = 1.0);
  LinearExpr& operator+=(double c) {
    constant += c;
    return *this;
  }
  double eval(const Eigen::VectorXd& x) const;
  /// Merges duplicate indices and drops zeros.
  void compress();
};

/// ||args||_2 <= bound.
struct ConeConstraint {
  std::vector<LinearExpr> args;
  LinearExpr bound;
};

/// Canonical SOCP: maximize objective . x subject to
///   linear: expr(x) <= 0, equalities: expr(x) == 0, cones, optional bounds.
struct ConvexProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<LinearExpr> linear;
  std::vector<LinearExpr> equalities;
  std::vector<ConeConstraint> cones;
  Eigen::VectorXd lower;  // empty, or size num_vars with -inf for free entries
  Eigen::VectorXd upper;

  explicit ConvexProgram(int n = 0) : num_vars(n), objective(Eigen::VectorXd::Zero(n)) {}

  int add_variable() {
    objective.conservativeResize(num_vars + 1);
    objective(num_vars) = 0.0;
    if (lower.size()) {
      lower.conservativeResize(num_vars + 1);
      upper.conservativeResize(num_vars + 1);
      lower(num_vars) = -std::numeric_limits<double>::infinity();
      upper(num_vars) = std::numeric_limits<double>::infinity();
    }
    return num_vars++;
  }
  /// a . x <= b
  void add_less_equal(LinearExpr lhs, double rhs = 0.0) {
    lhs.constant -= rhs;
    linear.push_back(std::move(lhs));
  }
  void add_greater_equal(const LinearExpr& lhs, double rhs = 0.0) {
    LinearExpr neg;
    neg.add(lhs, -1.0);
    neg.constant += rhs;
    linear.push_back(std::move(neg));
  }
  void add_cone(ConeConstraint c) { cones.push_back(std::move(c)); }

  /// Throws hyfi::Error on inconsistent dimensions or an empty constraint set.
  void validate() const;
  std::size_t num_constraints() const {
    return linear.size() + equalities.size() + cones.size();
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalError };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iter = 200;
  bool verbose = false;  // per-iteration log on stderr
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalError;
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

/// Primal-dual interior-point solve (homogeneous self-dual embedding).
/// Deterministic for fixed inputs.
SolveResult solve(const ConvexProgram& program, const SolveOptions& options = {});

/// Largest constraint violation of x (linear, equality, cone, bounds), absolute.
double max_violation(const ConvexProgram& program, const Eigen::VectorXd& x);

/// Plain-text dump of the program (see README for the format).
void write_program(std::ostream& out, const ConvexProgram& program);

}  // namespace hyfi
