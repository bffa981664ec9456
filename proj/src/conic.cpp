#include "dpps/conic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace dpps {

int ConicProgram::add_variable(const std::string& name, double lo, double hi) {
  if (index_.count(name)) throw std::invalid_argument("duplicate variable name: " + name);
  if (lo > hi) throw std::invalid_argument("empty bound interval for " + name);
  const int v = static_cast<int>(names_.size());
  names_.push_back(name);
  index_.emplace(name, v);
  lb_.push_back(lo);
  ub_.push_back(hi);
  obj_lin_.push_back(0.0);
  obj_quad_.push_back(0.0);
  return v;
}

int ConicProgram::variable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown variable: " + name);
  return it->second;
}

int ConicProgram::find_variable(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

void ConicProgram::set_bounds(int v, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("empty bound interval for " + names_[v]);
  lb_[static_cast<size_t>(v)] = lo;
  ub_[static_cast<size_t>(v)] = hi;
}

void ConicProgram::add_objective_linear(int v, double coeff) {
  obj_lin_[static_cast<size_t>(v)] += coeff;
}

void ConicProgram::add_objective_quadratic(int v, double coeff) {
  if (coeff < 0) throw std::invalid_argument("negative quadratic coefficient (nonconvex)");
  obj_quad_[static_cast<size_t>(v)] += coeff;
}

void ConicProgram::add_linear(LinearConstraint c) {
  for (const auto& t : c.expr.terms)
    if (t.var < 0 || t.var >= num_variables())
      throw std::out_of_range("constraint references variable out of range");
  linear_.push_back(std::move(c));
}

void ConicProgram::add_equality(LinearExpr expr, double value) {
  add_linear(LinearConstraint{std::move(expr), value, value});
}

void ConicProgram::add_soc(SocConstraint c) {
  for (const auto& e : c.norm_args)
    for (const auto& t : e.terms)
      if (t.var < 0 || t.var >= num_variables())
        throw std::out_of_range("cone references variable out of range");
  socs_.push_back(std::move(c));
}

double ConicProgram::eval(const LinearExpr& e, const Eigen::VectorXd& x) const {
  double v = e.offset;
  for (const auto& t : e.terms) v += t.coeff * x[t.var];
  return v;
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const {
  double v = obj_constant_;
  for (int i = 0; i < num_variables(); ++i)
    v += obj_lin_[static_cast<size_t>(i)] * x[i] + obj_quad_[static_cast<size_t>(i)] * x[i] * x[i];
  return v;
}

double ConicProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (int i = 0; i < num_variables(); ++i) {
    worst = std::max(worst, lb_[static_cast<size_t>(i)] - x[i]);
    worst = std::max(worst, x[i] - ub_[static_cast<size_t>(i)]);
  }
  for (const auto& c : linear_) {
    const double v = eval(c.expr, x);
    if (std::isfinite(c.lo)) worst = std::max(worst, c.lo - v);
    if (std::isfinite(c.hi)) worst = std::max(worst, v - c.hi);
  }
  for (const auto& c : socs_) {
    double nrm = 0.0;
    for (const auto& e : c.norm_args) {
      const double v = eval(e, x);
      nrm += v * v;
    }
    worst = std::max(worst, std::sqrt(nrm) - eval(c.rhs, x));
  }
  return worst;
}

std::string ConicProgram::dump_json() const {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (int i = 0; i < num_variables(); ++i) {
    nlohmann::json v;
    v["name"] = names_[static_cast<size_t>(i)];
    if (std::isfinite(lb_[static_cast<size_t>(i)])) v["lb"] = lb_[static_cast<size_t>(i)];
    if (std::isfinite(ub_[static_cast<size_t>(i)])) v["ub"] = ub_[static_cast<size_t>(i)];
    if (obj_lin_[static_cast<size_t>(i)] != 0.0) v["obj_lin"] = obj_lin_[static_cast<size_t>(i)];
    if (obj_quad_[static_cast<size_t>(i)] != 0.0) v["obj_quad"] = obj_quad_[static_cast<size_t>(i)];
    j["variables"].push_back(v);
  }
  j["objective_constant"] = obj_constant_;
  auto expr_json = [&](const LinearExpr& e) {
    nlohmann::json out;
    out["offset"] = e.offset;
    out["terms"] = nlohmann::json::array();
    for (const auto& t : e.terms)
      out["terms"].push_back({{"var", names_[static_cast<size_t>(t.var)]}, {"coeff", t.coeff}});
    return out;
  };
  j["linear"] = nlohmann::json::array();
  for (const auto& c : linear_) {
    nlohmann::json row;
    row["expr"] = expr_json(c.expr);
    if (std::isfinite(c.lo)) row["lo"] = c.lo;
    if (std::isfinite(c.hi)) row["hi"] = c.hi;
    j["linear"].push_back(row);
  }
  j["soc"] = nlohmann::json::array();
  for (const auto& c : socs_) {
    nlohmann::json cone;
    cone["rhs"] = expr_json(c.rhs);
    cone["norm_args"] = nlohmann::json::array();
    for (const auto& e : c.norm_args) cone["norm_args"].push_back(expr_json(e));
    j["soc"].push_back(cone);
  }
  return j.dump(2);
}

ConeData lower(const ConicProgram& prog, const std::vector<std::pair<int, double>>* extra_linear) {
  ConeData d;
  d.n = prog.num_variables();
  d.P_diag.resize(d.n);
  d.q.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    d.P_diag[i] = 2.0 * prog.objective_quadratic()[static_cast<size_t>(i)];
    d.q[i] = prog.objective_linear()[static_cast<size_t>(i)];
  }
  if (extra_linear)
    for (const auto& [v, c] : *extra_linear) d.q[v] += c;

  std::vector<Eigen::Triplet<double>> at, gt;
  std::vector<double> bvals, hvals;
  int arow = 0, grow = 0;

  auto push_row = [&](const LinearExpr& e, double scale, double rhs,
                      std::vector<Eigen::Triplet<double>>& trips, int row) {
    for (const auto& t : e.terms) trips.emplace_back(row, t.var, scale * t.coeff);
    (void)rhs;
  };

  for (const auto& c : prog.linear_constraints()) {
    if (c.lo == c.hi) {
      push_row(c.expr, 1.0, 0.0, at, arow);
      bvals.push_back(c.lo - c.expr.offset);
      ++arow;
    }
  }
  // LP rows of G: expr <= hi as (expr - hi) + s = 0 ... standard Gx + s = h
  for (const auto& c : prog.linear_constraints()) {
    if (c.lo == c.hi) continue;
    if (std::isfinite(c.hi)) {
      push_row(c.expr, 1.0, 0.0, gt, grow);
      hvals.push_back(c.hi - c.expr.offset);
      ++grow;
    }
    if (std::isfinite(c.lo)) {
      push_row(c.expr, -1.0, 0.0, gt, grow);
      hvals.push_back(c.expr.offset - c.lo);
      ++grow;
    }
  }
  for (int v = 0; v < d.n; ++v) {
    if (std::isfinite(prog.upper_bound(v))) {
      gt.emplace_back(grow, v, 1.0);
      hvals.push_back(prog.upper_bound(v));
      ++grow;
    }
    if (std::isfinite(prog.lower_bound(v))) {
      gt.emplace_back(grow, v, -1.0);
      hvals.push_back(-prog.lower_bound(v));
      ++grow;
    }
  }
  d.l = grow;
  for (const auto& c : prog.soc_constraints()) {
    d.soc_dims.push_back(static_cast<int>(c.norm_args.size()) + 1);
    // s0 = rhs - 0, so G row = -rhs.terms, h = rhs.offset
    for (const auto& t : c.rhs.terms) gt.emplace_back(grow, t.var, -t.coeff);
    hvals.push_back(c.rhs.offset);
    ++grow;
    for (const auto& e : c.norm_args) {
      for (const auto& t : e.terms) gt.emplace_back(grow, t.var, -t.coeff);
      hvals.push_back(e.offset);
      ++grow;
    }
  }

  d.A.resize(arow, d.n);
  d.A.setFromTriplets(at.begin(), at.end());
  d.b = Eigen::Map<Eigen::VectorXd>(bvals.data(), arow);
  d.G.resize(grow, d.n);
  d.G.setFromTriplets(gt.begin(), gt.end());
  d.h = Eigen::Map<Eigen::VectorXd>(hvals.data(), grow);
  return d;
}

}  // namespace dpps
