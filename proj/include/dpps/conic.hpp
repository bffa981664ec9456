#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace dpps {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearTerm {
  int var;
  double coeff;
};

struct LinearExpr {
  std::vector<LinearTerm> terms;
  double offset = 0.0;
};

/// Ranged linear constraint: lo <= expr <= hi (equality when lo == hi).
struct LinearConstraint {
  LinearExpr expr;
  double lo = -kInf;
  double hi = kInf;
};

/// Second-order cone membership in standard form: ||norm_args|| <= rhs.
struct SocConstraint {
  std::vector<LinearExpr> norm_args;
  LinearExpr rhs;
};

/// Solver-agnostic conic program: box-bounded variables, convex quadratic
/// objective (linear + diagonal quadratic), linear and SOC constraints.
class ConicProgram {
 public:
  int add_variable(const std::string& name, double lo = -kInf, double hi = kInf);
  int variable(const std::string& name) const;        // throws if unknown
  int find_variable(const std::string& name) const;   // -1 if unknown
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& name(int v) const { return names_[static_cast<size_t>(v)]; }
  const std::vector<std::string>& names() const { return names_; }

  void set_bounds(int v, double lo, double hi);
  double lower_bound(int v) const { return lb_[static_cast<size_t>(v)]; }
  double upper_bound(int v) const { return ub_[static_cast<size_t>(v)]; }

  void add_objective_linear(int v, double coeff);
  void add_objective_quadratic(int v, double coeff);  // coeff * x_v^2, coeff >= 0
  void add_objective_constant(double c) { obj_constant_ += c; }
  double objective_constant() const { return obj_constant_; }
  const std::vector<double>& objective_linear() const { return obj_lin_; }
  const std::vector<double>& objective_quadratic() const { return obj_quad_; }

  void add_linear(LinearConstraint c);
  void add_equality(LinearExpr expr, double value);
  void add_soc(SocConstraint c);
  const std::vector<LinearConstraint>& linear_constraints() const { return linear_; }
  const std::vector<SocConstraint>& soc_constraints() const { return socs_; }

  double eval(const LinearExpr& e, const Eigen::VectorXd& x) const;
  double objective_value(const Eigen::VectorXd& x) const;
  /// Largest violation over boxes, linear rows and cones at the point x.
  double max_violation(const Eigen::VectorXd& x) const;

  /// Structured-text dump for external cross-validation.
  std::string dump_json() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> lb_, ub_;
  std::vector<double> obj_lin_, obj_quad_;
  double obj_constant_ = 0.0;
  std::vector<LinearConstraint> linear_;
  std::vector<SocConstraint> socs_;
};

/// Standard-form data consumed by the interior-point engine:
///   min 0.5 x'Px + q'x  s.t.  Ax = b,  Gx + s = h,  s in K,
/// where K = R+^l x SOC(m_1) x ... x SOC(m_N) and P is diagonal PSD.
struct ConeData {
  int n = 0;
  Eigen::VectorXd P_diag;
  Eigen::VectorXd q;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  int l = 0;
  std::vector<int> soc_dims;
};

/// Lowers a ConicProgram to standard form. `extra_linear` adds runtime
/// objective terms (the multiplier overlay) without touching the program.
ConeData lower(const ConicProgram& prog,
               const std::vector<std::pair<int, double>>* extra_linear = nullptr);

}  // namespace dpps
