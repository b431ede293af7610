#include "dhflex/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dhflex/errors.hpp"

namespace dhflex::lp {

int Model::add_variable(double lower, double upper, double cost) {
  if (!(lower <= upper)) throw ContractViolation("variable lower bound above upper bound");
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return variables() - 1;
}

int Model::add_row(const std::vector<Term>& terms, Sense sense, double rhs) {
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= variables()) throw ContractViolation("row refers to unknown variable");
  }
  terms_.push_back(terms);
  senses_.push_back(sense);
  rhs_.push_back(rhs);
  return rows() - 1;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Standard-form image of a model: original x_j = offset_j + sum of sign * column.
struct StandardForm {
  SpMat a;
  Vec b;
  Vec c;
  double c0 = 0.0;
  struct Map {
    double offset = 0.0;
    int plus = -1;
    int minus = -1;  // for x = offset - col or free splits
    double sign_plus = 1.0;
  };
  std::vector<Map> maps;
};

StandardForm standardize(const Model& m) {
  StandardForm sf;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> b, c;
  int cols = 0;
  const int n = m.variables();
  sf.maps.resize(n);
  struct UpperRow {
    int col;
    double bound;
  };
  std::vector<UpperRow> upper_rows;
  for (int j = 0; j < n; ++j) {
    const double lo = m.lower()[j], hi = m.upper()[j];
    auto& map = sf.maps[j];
    if (std::isfinite(lo)) {
      map.offset = lo;
      map.plus = cols++;
      c.push_back(m.cost()[j]);
      if (std::isfinite(hi)) upper_rows.push_back({map.plus, hi - lo});
    } else if (std::isfinite(hi)) {
      map.offset = hi;
      map.plus = cols++;
      map.sign_plus = -1.0;
      c.push_back(-m.cost()[j]);
    } else {
      map.plus = cols++;
      map.minus = cols++;
      c.push_back(m.cost()[j]);
      c.push_back(-m.cost()[j]);
    }
    sf.c0 += m.cost()[j] * map.offset;
  }
  int row = 0;
  for (int i = 0; i < m.rows(); ++i) {
    double rhs = m.rhs()[i];
    for (const Term& t : m.row_terms()[i]) {
      const auto& map = sf.maps[t.var];
      rhs -= t.coef * map.offset;
      trips.emplace_back(row, map.plus, t.coef * map.sign_plus);
      if (map.minus >= 0) trips.emplace_back(row, map.minus, -t.coef);
    }
    if (m.senses()[i] != Sense::eq) {
      trips.emplace_back(row, cols++, m.senses()[i] == Sense::le ? 1.0 : -1.0);
      c.push_back(0.0);
    }
    b.push_back(rhs);
    ++row;
  }
  for (const UpperRow& u : upper_rows) {
    trips.emplace_back(row, u.col, 1.0);
    trips.emplace_back(row, cols++, 1.0);
    c.push_back(0.0);
    b.push_back(u.bound);
    ++row;
  }
  sf.a.resize(row, cols);
  sf.a.setFromTriplets(trips.begin(), trips.end());
  sf.b = Eigen::Map<Vec>(b.data(), row);
  sf.c = Eigen::Map<Vec>(c.data(), cols);
  return sf;
}

double max_step(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

class NormalEquations {
 public:
  explicit NormalEquations(const SpMat& a) : a_(a), at_(a.transpose()) {}

  bool factor(const Vec& d) {
    SpMat ad = a_ * d.asDiagonal();
    SpMat m = ad * at_;
    double diag_max = 0.0;
    for (int i = 0; i < m.rows(); ++i) diag_max = std::max(diag_max, m.coeff(i, i));
    const double reg = 1e-14 * std::max(diag_max, 1.0);
    for (int i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += reg;
    d_ = d;
    if (!analyzed_) {
      ldlt_.analyzePattern(m);
      analyzed_ = true;
    }
    ldlt_.factorize(m);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves (A D A') v = r with a few rounds of iterative refinement against the
  // unregularised product, which keeps the residuals small when D is badly scaled.
  Vec solve(const Vec& r) const {
    Vec v = ldlt_.solve(r);
    if (d_.size() == 0) return v;
    for (int k = 0; k < 3; ++k) {
      const Vec res = r - a_ * d_.cwiseProduct(at_ * v);
      v += ldlt_.solve(res);
    }
    return v;
  }

 private:
  const SpMat& a_;
  SpMat at_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Vec d_;
  bool analyzed_ = false;
};

}  // namespace

Result solve(const Model& model, Options options) {
  const StandardForm sf = standardize(model);
  const SpMat& a = sf.a;
  const Vec& b = sf.b;
  const Vec& c = sf.c;
  const int n = static_cast<int>(a.cols());
  const int m = static_cast<int>(a.rows());

  Result res;
  Vec x, y, s;
  if (m == 0) {
    // Only nonnegativity: optimum at zero unless unbounded.
    x = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (c(j) < 0.0) {
        res.status = Status::numerical_failure;
        return res;
      }
    }
    y = Vec::Zero(0);
  } else {
    NormalEquations ne(a);
    // Mehrotra starting point.
    if (!ne.factor(Vec::Ones(n))) return res;
    x = a.transpose() * ne.solve(b);
    y = ne.solve(a * c);
    s = c - a.transpose() * y;
    double dx = std::max(-1.5 * x.minCoeff(), 0.0);
    double ds = std::max(-1.5 * s.minCoeff(), 0.0);
    x.array() += dx;
    s.array() += ds;
    const double xs = x.dot(s);
    dx = 0.5 * xs / std::max(s.sum(), 1e-300);
    ds = 0.5 * xs / std::max(x.sum(), 1e-300);
    x.array() += dx + 1e-8;
    s.array() += ds + 1e-8;

    const double bnorm = 1.0 + b.norm();
    const double cnorm = 1.0 + c.norm();
    res.status = Status::iteration_limit;
    // Best iterate seen, by the largest of the three relative measures.
    Vec best_x = x;
    double best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options.max_iterations; ++it) {
      const Vec rp = b - a * x;
      const Vec rd = c - a.transpose() * y - s;
      const double pobj = c.dot(x), dobj = b.dot(y);
      res.primal_residual = rp.norm() / bnorm;
      res.dual_residual = rd.norm() / cnorm;
      res.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
      res.iterations = it;
      const double err = std::max({res.primal_residual, res.dual_residual, res.gap});
      // Near the end rounding in A x leaks into b'y; complementarity then measures
      // optimality better than the raw objective gap.
      const double comp = x.dot(s) / (1.0 + std::abs(pobj));
      const double loose = std::max({res.primal_residual, res.dual_residual, std::min(res.gap, comp)});
      if (loose < best_err) {
        best_err = loose;
        best_x = x;
      }
      if (err < options.tolerance) {
        res.status = Status::optimal;
        break;
      }
      // Complementarity exhausted: further steps only amplify rounding.
      if (x.dot(s) / n < 1e-18 * (1.0 + std::abs(pobj))) break;
      const Vec d = x.cwiseQuotient(s);
      if (!ne.factor(d)) {
        res.status = Status::numerical_failure;
        break;
      }
      auto direction = [&](const Vec& rc, Vec& dxv, Vec& dyv, Vec& dsv) {
        const Vec rhs = rp - a * (rc.cwiseQuotient(s) - d.cwiseProduct(rd));
        dyv = ne.solve(rhs);
        dsv = rd - a.transpose() * dyv;
        dxv = rc.cwiseQuotient(s) - d.cwiseProduct(dsv);
      };
      const double mu = x.dot(s) / n;
      Vec dxa, dya, dsa;
      direction(-x.cwiseProduct(s), dxa, dya, dsa);
      const double ap = max_step(x, dxa), ad = max_step(s, dsa);
      const double mu_aff = (x + ap * dxa).dot(s + ad * dsa) / n;
      const double sigma = std::pow(mu_aff / mu, 3.0);
      const Vec rc = Vec::Constant(n, sigma * mu) - x.cwiseProduct(s) - dxa.cwiseProduct(dsa);
      Vec dxv, dyv, dsv;
      direction(rc, dxv, dyv, dsv);
      const double eta = std::max(0.9, 1.0 - 10.0 * mu / (1.0 + std::abs(pobj)));
      const double step_p = std::min(1.0, std::min(0.99999, eta) * max_step(x, dxv));
      const double step_d = std::min(1.0, std::min(0.99999, eta) * max_step(s, dsv));
      x += step_p * dxv;
      y += step_d * dyv;
      s += step_d * dsv;
      if (!x.allFinite() || !s.allFinite()) {
        res.status = Status::numerical_failure;
        break;
      }
    }
    if (res.status != Status::optimal) {
      x = best_x;
      if (best_err < options.accept_tolerance) res.status = Status::optimal;
    }
  }

  res.x.assign(model.variables(), 0.0);
  for (int j = 0; j < model.variables(); ++j) {
    const auto& map = sf.maps[j];
    double v = map.offset + map.sign_plus * x(map.plus);
    if (map.minus >= 0) v -= x(map.minus);
    res.x[j] = std::clamp(v, model.lower()[j], model.upper()[j]);
  }
  res.objective = 0.0;
  for (int j = 0; j < model.variables(); ++j) res.objective += model.cost()[j] * res.x[j];
  if (m == 0) res.status = Status::optimal;
  return res;
}

}  // namespace dhflex::lp
