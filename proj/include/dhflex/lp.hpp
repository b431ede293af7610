#pragma once

#include <limits>
#include <vector>

namespace dhflex::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { eq, le, ge };

struct Term {
  int var;
  double coef;
};

// min c'x subject to row constraints and variable bounds.
class Model {
 public:
  int add_variable(double lower, double upper, double cost);
  int add_row(const std::vector<Term>& terms, Sense sense, double rhs);

  int variables() const { return static_cast<int>(cost_.size()); }
  int rows() const { return static_cast<int>(rhs_.size()); }

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<std::vector<Term>>& row_terms() const { return terms_; }
  const std::vector<Sense>& senses() const { return senses_; }
  const std::vector<double>& rhs() const { return rhs_; }

 private:
  std::vector<double> cost_, lower_, upper_;
  std::vector<std::vector<Term>> terms_;
  std::vector<Sense> senses_;
  std::vector<double> rhs_;
};

enum class Status { optimal, iteration_limit, numerical_failure };

struct Result {
  Status status = Status::numerical_failure;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative
  double gap = 0.0;              // relative
};

struct Options {
  int max_iterations = 200;
  double tolerance = 1e-9;
  // A run that stalls is still reported optimal if its best iterate reaches this.
  double accept_tolerance = 1e-6;
};

// Primal-dual interior point (Mehrotra predictor-corrector) on the standard
// form min c'x, Ax = b, x >= 0 built from the model; normal equations are
// factorised with a sparse LDL' decomposition.
Result solve(const Model& model, Options options = {});

}  // namespace dhflex::lp
