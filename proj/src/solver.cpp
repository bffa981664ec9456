#include "dpps/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

namespace dpps {

namespace {

struct ConeLayout {
  int l = 0;
  std::vector<int> dims;
  std::vector<int> offsets;
  int m = 0;
  int degree() const { return l + static_cast<int>(dims.size()); }
};

ConeLayout make_layout(const ConeData& d) {
  ConeLayout lay;
  lay.l = d.l;
  lay.dims = d.soc_dims;
  int off = d.l;
  for (int dim : lay.dims) {
    lay.offsets.push_back(off);
    off += dim;
  }
  lay.m = off;
  return lay;
}

// Nesterov-Todd scaling per cone. For the LP block W^2 = diag(s/z); for a
// second-order cone W = eta * [[w0, w1'],[w1, I + w1 w1'/(1+w0)]] with
// w'Jw = 1, J = diag(1, -I).
struct Scaling {
  Eigen::VectorXd lp_d;  // s_i / z_i
  std::vector<double> eta;
  std::vector<Eigen::VectorXd> wbar;
  Eigen::VectorXd lambda;  // scaled point, lambda = W z = W^{-1} s
};

double jnorm_sq(const Eigen::VectorXd& v, int off, int dim) {
  double head = v[off];
  double tail = v.segment(off + 1, dim - 1).squaredNorm();
  return head * head - tail;
}

bool compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z, const ConeLayout& lay,
                     Scaling& W) {
  W.lp_d.resize(lay.l);
  for (int i = 0; i < lay.l; ++i) {
    if (s[i] <= 0 || z[i] <= 0) return false;
    W.lp_d[i] = s[i] / z[i];
  }
  W.lambda.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) W.lambda[i] = std::sqrt(s[i] * z[i]);
  W.eta.assign(lay.dims.size(), 0.0);
  W.wbar.assign(lay.dims.size(), {});
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const double a2 = jnorm_sq(s, off, dim), c2 = jnorm_sq(z, off, dim);
    if (a2 <= 0 || c2 <= 0 || s[off] <= 0 || z[off] <= 0) return false;
    const double a = std::sqrt(a2), c = std::sqrt(c2);
    Eigen::VectorXd sbar = s.segment(off, dim) / a;
    Eigen::VectorXd zbar = z.segment(off, dim) / c;
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Eigen::VectorXd w = zbar;
    w.segment(1, dim - 1) *= -1.0;  // J * zbar
    w += sbar;
    w /= 2.0 * gamma;
    W.eta[k] = std::sqrt(a / c);
    W.wbar[k] = w;
    // lambda_k = W z
    const double w0 = w[0];
    auto w1 = w.segment(1, dim - 1);
    auto z0 = z[off];
    auto z1 = z.segment(off + 1, dim - 1);
    const double t = w1.dot(z1);
    W.lambda[off] = W.eta[k] * (w0 * z0 + t);
    W.lambda.segment(off + 1, dim - 1) =
        W.eta[k] * (z0 * w1 + z1 + (t / (1.0 + w0)) * w1);
  }
  return true;
}

// y = W u
void w_apply(const Scaling& W, const ConeLayout& lay, const Eigen::VectorXd& u,
             Eigen::VectorXd& y) {
  y.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) y[i] = std::sqrt(W.lp_d[i]) * u[i];
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const auto& w = W.wbar[k];
    const double w0 = w[0];
    auto w1 = w.segment(1, dim - 1);
    const double u0 = u[off];
    auto u1 = u.segment(off + 1, dim - 1);
    const double t = w1.dot(u1);
    y[off] = W.eta[k] * (w0 * u0 + t);
    y.segment(off + 1, dim - 1) = W.eta[k] * (u0 * w1 + u1 + (t / (1.0 + w0)) * w1);
  }
}

// y = W^{-1} u ; uses V^{-1} = J V J
void w_inv_apply(const Scaling& W, const ConeLayout& lay, const Eigen::VectorXd& u,
                 Eigen::VectorXd& y) {
  y.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) y[i] = u[i] / std::sqrt(W.lp_d[i]);
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const auto& w = W.wbar[k];
    const double w0 = w[0];
    auto w1 = w.segment(1, dim - 1);
    const double u0 = u[off];
    auto u1 = u.segment(off + 1, dim - 1);
    const double t = -w1.dot(u1);
    y[off] = (w0 * u0 + t) / W.eta[k];
    y.segment(off + 1, dim - 1) = (-(u0 + t / (1.0 + w0)) * w1 + u1) / W.eta[k];
  }
}

// y = W^2 u = eta^2 (2 w (w'u) - J u) on SOC blocks, diag on LP
void w_sq_apply(const Scaling& W, const ConeLayout& lay, const Eigen::VectorXd& u,
                Eigen::VectorXd& y) {
  y.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) y[i] = W.lp_d[i] * u[i];
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const auto& w = W.wbar[k];
    const double e2 = W.eta[k] * W.eta[k];
    const double dot = w.dot(u.segment(off, dim));
    y[off] = e2 * (2.0 * w[0] * dot - u[off]);
    y.segment(off + 1, dim - 1) =
        e2 * (2.0 * dot * w.segment(1, dim - 1) + u.segment(off + 1, dim - 1));
  }
}

void jordan_mul(const ConeLayout& lay, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                Eigen::VectorXd& y) {
  y.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) y[i] = u[i] * v[i];
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    y[off] = u.segment(off, dim).dot(v.segment(off, dim));
    y.segment(off + 1, dim - 1) =
        u[off] * v.segment(off + 1, dim - 1) + v[off] * u.segment(off + 1, dim - 1);
  }
}

// solve lambda o y = u
bool jordan_div(const ConeLayout& lay, const Eigen::VectorXd& lambda, const Eigen::VectorXd& u,
                Eigen::VectorXd& y) {
  y.resize(lay.m);
  for (int i = 0; i < lay.l; ++i) {
    if (lambda[i] == 0) return false;
    y[i] = u[i] / lambda[i];
  }
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const double l0 = lambda[off];
    auto l1 = lambda.segment(off + 1, dim - 1);
    const double rho = l0 * l0 - l1.squaredNorm();
    if (rho == 0 || l0 == 0) return false;
    const double y0 = (l0 * u[off] - l1.dot(u.segment(off + 1, dim - 1))) / rho;
    y[off] = y0;
    y.segment(off + 1, dim - 1) = (u.segment(off + 1, dim - 1) - y0 * l1) / l0;
  }
  return true;
}

Eigen::VectorXd cone_e(const ConeLayout& lay) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(lay.m);
  for (int i = 0; i < lay.l; ++i) e[i] = 1.0;
  for (size_t k = 0; k < lay.dims.size(); ++k) e[lay.offsets[k]] = 1.0;
  return e;
}

// largest t >= 0 with v + t dv in the cone; +inf when the ray stays interior
double step_to_boundary(const ConeLayout& lay, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& dv) {
  double t = kInf;
  for (int i = 0; i < lay.l; ++i)
    if (dv[i] < 0) t = std::min(t, -v[i] / dv[i]);
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    const double v0 = v[off], d0 = dv[off];
    auto v1 = v.segment(off + 1, dim - 1);
    auto d1 = dv.segment(off + 1, dim - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = 2.0 * (v0 * d0 - v1.dot(d1));
    const double c = v0 * v0 - v1.squaredNorm();
    // roots of a t^2 + b t + c = 0; c > 0 in the interior
    double root = kInf;
    if (std::abs(a) < 1e-300) {
      if (b < 0) root = -c / b;
    } else {
      const double disc = b * b - 4 * a * c;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
        double r1 = q / a, r2 = (q == 0) ? kInf : c / q;
        if (r1 > r2) std::swap(r1, r2);
        if (r1 > 0)
          root = r1;
        else if (r2 > 0)
          root = r2;
      }
    }
    // the head may cross zero before the quadratic does
    if (d0 < 0) root = std::min(root, -v0 / d0);
    t = std::min(t, root);
  }
  return t;
}

// shift a point into the cone interior: v += (1 + margin_deficit) * e
void interior_shift(const ConeLayout& lay, Eigen::VectorXd& v) {
  double amin = kInf;
  for (int i = 0; i < lay.l; ++i) amin = std::min(amin, v[i]);
  for (size_t k = 0; k < lay.dims.size(); ++k) {
    const int off = lay.offsets[k], dim = lay.dims[k];
    amin = std::min(amin, v[off] - v.segment(off + 1, dim - 1).norm());
  }
  if (lay.m == 0) return;
  if (amin <= 0) {
    const double shift = 1.0 - amin;
    for (int i = 0; i < lay.l; ++i) v[i] += shift;
    for (size_t k = 0; k < lay.dims.size(); ++k) v[lay.offsets[k]] += shift;
  }
}

class ConeQp {
 public:
  ConeQp(const ConeData& d, const SolverConfig& cfg)
      : d_(d), cfg_(cfg), lay_(make_layout(d)), n_(d.n), p_(static_cast<int>(d.A.rows())) {}

  SolveResult run();

 private:
  static constexpr double kReg = 1e-9;
  static constexpr int kRefineSteps = 2;

  void assemble(const Scaling* W, double reg);
  bool factorize();
  // residual-free application of the unregularized KKT operator
  void apply(const Scaling* W, const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  void kkt_solve(const Scaling* W, const Eigen::VectorXd& rhs, Eigen::VectorXd& sol) const;

  const ConeData& d_;
  SolverConfig cfg_;
  ConeLayout lay_;
  int n_, p_;
  Eigen::SparseMatrix<double> K_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool use_lu_ = false;
  bool analyzed_ = false;
};

void ConeQp::assemble(const Scaling* W, double reg) {
  const int N = n_ + p_ + lay_.m;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(d_.A.nonZeros() + d_.G.nonZeros()) * 2 + N + 16 * lay_.dims.size());
  for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, d_.P_diag[i] + reg);
  for (int k = 0; k < d_.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d_.A, k); it; ++it) {
      trips.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
    }
  for (int i = 0; i < p_; ++i) trips.emplace_back(n_ + i, n_ + i, -reg);
  const int zoff = n_ + p_;
  for (int k = 0; k < d_.G.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d_.G, k); it; ++it) {
      trips.emplace_back(zoff + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()), zoff + static_cast<int>(it.row()), it.value());
    }
  if (W) {
    for (int i = 0; i < lay_.l; ++i) trips.emplace_back(zoff + i, zoff + i, -W->lp_d[i] - reg);
    for (size_t k = 0; k < lay_.dims.size(); ++k) {
      const int off = lay_.offsets[k], dim = lay_.dims[k];
      const auto& w = W->wbar[k];
      const double e2 = W->eta[k] * W->eta[k];
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
          double v = 2.0 * w[r] * w[c];
          if (r == c) v += (r == 0 ? -1.0 : 1.0);
          v *= e2;
          trips.emplace_back(zoff + off + r, zoff + off + c, -v - (r == c ? reg : 0.0));
        }
    }
  } else {
    for (int i = 0; i < lay_.m; ++i) trips.emplace_back(zoff + i, zoff + i, -1.0 - reg);
  }
  K_.resize(N, N);
  K_.setFromTriplets(trips.begin(), trips.end());
}

bool ConeQp::factorize() {
  use_lu_ = false;
  if (!analyzed_) {
    ldlt_.analyzePattern(K_);
    analyzed_ = true;
  }
  ldlt_.factorize(K_);
  if (ldlt_.info() == Eigen::Success) return true;
  lu_.compute(K_);
  use_lu_ = true;
  return lu_.info() == Eigen::Success;
}

void ConeQp::apply(const Scaling* W, const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  const int zoff = n_ + p_;
  auto x = in.segment(0, n_);
  auto y = in.segment(n_, p_);
  auto z = in.segment(zoff, lay_.m);
  out.resize(in.size());
  out.segment(0, n_) = d_.P_diag.cwiseProduct(x) + d_.A.transpose() * y + d_.G.transpose() * z;
  out.segment(n_, p_) = d_.A * x;
  Eigen::VectorXd wz;
  if (W)
    w_sq_apply(*W, lay_, z, wz);
  else
    wz = z;
  out.segment(zoff, lay_.m) = d_.G * x - wz;
}

void ConeQp::kkt_solve(const Scaling* W, const Eigen::VectorXd& rhs, Eigen::VectorXd& sol) const {
  sol = use_lu_ ? lu_.solve(rhs) : ldlt_.solve(rhs);
  Eigen::VectorXd r, c;
  for (int it = 0; it < kRefineSteps; ++it) {
    apply(W, sol, r);
    r = rhs - r;
    c = use_lu_ ? lu_.solve(r) : ldlt_.solve(r);
    sol += c;
  }
}

SolveResult ConeQp::run() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  const int N = n_ + p_ + lay_.m;
  const double resx0 = std::max(1.0, d_.q.norm());
  const double resy0 = std::max(1.0, d_.b.norm());
  const double resz0 = std::max(1.0, d_.h.norm());

  Eigen::VectorXd x, y, s, z;

  // no inequalities: one regularized KKT solve closes the problem
  if (lay_.m == 0) {
    assemble(nullptr, kReg);
    if (!factorize()) {
      res.message = "initial factorization failed";
      return res;
    }
    Eigen::VectorXd rhs(N), sol(N);
    rhs << -d_.q, d_.b;
    kkt_solve(nullptr, rhs, sol);
    res.x = sol.segment(0, n_);
    res.objective = 0.5 * res.x.dot(d_.P_diag.cwiseProduct(res.x)) + d_.q.dot(res.x);
    res.status = SolveStatus::optimal;
    res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

  assemble(nullptr, kReg);
  if (!factorize()) {
    res.message = "initial factorization failed (rank deficiency in [P;A;G] or A)";
    return res;
  }
  {
    Eigen::VectorXd rhs(N), sol(N);
    rhs << -d_.q, d_.b, d_.h;
    kkt_solve(nullptr, rhs, sol);
    x = sol.segment(0, n_);
    y = sol.segment(n_, p_);
    z = sol.segment(n_ + p_, lay_.m);
    s = -z;
    interior_shift(lay_, s);
    interior_shift(lay_, z);
  }

  const Eigen::VectorXd e = cone_e(lay_);
  const double deg = std::max(1, lay_.degree());
  Scaling W;
  Eigen::VectorXd rx(n_), ry(p_), rz(lay_.m);
  Eigen::VectorXd rhs(N), sol(N);
  Eigen::VectorXd dx(n_), dy(p_), dz(lay_.m), ds(lay_.m);
  Eigen::VectorXd lmbdasq, dsv, g, wg, tmp1, tmp2, corr;
  int tiny_steps = 0;
  double pres = kInf, dres = kInf, gap = kInf, pcost = 0, dcost = 0;

  for (int iter = 0; iter <= cfg_.max_iters; ++iter) {
    rx = d_.P_diag.cwiseProduct(x) + d_.q + d_.A.transpose() * y + d_.G.transpose() * z;
    ry = d_.A * x - d_.b;
    rz = d_.G * x + s - d_.h;
    gap = s.dot(z);
    pcost = 0.5 * x.dot(d_.P_diag.cwiseProduct(x)) + d_.q.dot(x);
    dcost = pcost + y.dot(ry) + z.dot(rz) - gap;
    pres = std::max(ry.norm() / resy0, rz.norm() / resz0);
    dres = rx.norm() / resx0;
    double relgap = kInf;
    if (pcost < 0)
      relgap = gap / -pcost;
    else if (dcost > 0)
      relgap = gap / dcost;

    if (cfg_.verbosity > 0)
      std::fprintf(stderr, "it %3d  pcost % .6e  gap %.2e  pres %.2e  dres %.2e\n", iter, pcost,
                   gap, pres, dres);

    if (pres <= cfg_.feas_tol && dres <= cfg_.feas_tol &&
        (gap <= 1e-3 * cfg_.opt_tol * std::max(1.0, std::abs(pcost)) || relgap <= cfg_.opt_tol)) {
      res.status = SolveStatus::optimal;
      res.iterations = iter;
      break;
    }
    if (iter == cfg_.max_iters || !std::isfinite(gap) || !std::isfinite(pres)) {
      res.iterations = iter;
      const bool diverged = !std::isfinite(gap) || z.lpNorm<Eigen::Infinity>() > 1e9 ||
                            std::abs(dcost) > 1e12;
      res.status = (pres > 1e3 * cfg_.feas_tol && diverged) ? SolveStatus::infeasible
                                                            : SolveStatus::numerical_failure;
      res.message = diverged ? "iterates diverged (problem likely infeasible or unbounded)"
                             : "maximum iterations reached";
      break;
    }

    if (!compute_scaling(s, z, lay_, W)) {
      res.status = SolveStatus::numerical_failure;
      res.message = "iterate left the cone interior";
      res.iterations = iter;
      break;
    }
    jordan_mul(lay_, W.lambda, W.lambda, lmbdasq);

    double reg = kReg;
    assemble(&W, reg);
    while (!factorize() && reg < 1e-3) {
      reg *= 100;
      assemble(&W, reg);
    }

    const double mu = gap / deg;
    double sigma = 0.0, gap_aff = gap;
    // two passes: affine predictor, then combined corrector
    for (int pass = 0; pass < 2; ++pass) {
      if (pass == 0) {
        dsv = -lmbdasq;
      } else {
        dsv = -lmbdasq - corr + sigma * mu * e;
      }
      if (!jordan_div(lay_, W.lambda, dsv, g)) {
        res.status = SolveStatus::numerical_failure;
        res.message = "degenerate scaling point";
        res.iterations = iter;
        break;
      }
      w_apply(W, lay_, g, wg);
      rhs.segment(0, n_) = -rx;
      rhs.segment(n_, p_) = -ry;
      rhs.segment(n_ + p_, lay_.m) = -rz - wg;
      kkt_solve(&W, rhs, sol);
      dx = sol.segment(0, n_);
      dy = sol.segment(n_, p_);
      dz = sol.segment(n_ + p_, lay_.m);
      ds = -rz - d_.G * dx;

      if (pass == 0) {
        const double t = std::min(step_to_boundary(lay_, s, ds), step_to_boundary(lay_, z, dz));
        const double alpha = std::min(1.0, t);
        gap_aff = (s + alpha * ds).dot(z + alpha * dz);
        sigma = std::pow(std::clamp(gap_aff / gap, 0.0, 1.0), 3.0);
        // Mehrotra correction computed in the scaled frame
        w_inv_apply(W, lay_, ds, tmp1);
        w_apply(W, lay_, dz, tmp2);
        jordan_mul(lay_, tmp1, tmp2, corr);
      }
    }
    if (res.status == SolveStatus::numerical_failure && !res.message.empty()) break;

    const double t = std::min(step_to_boundary(lay_, s, ds), step_to_boundary(lay_, z, dz));
    const double alpha = std::min(1.0, 0.99 * t);
    if (alpha < 1e-9) {
      if (++tiny_steps >= 3) {
        res.status = SolveStatus::numerical_failure;
        res.message = "step size collapsed";
        res.iterations = iter;
        break;
      }
    } else {
      tiny_steps = 0;
    }
    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
  }

  res.x = x;
  res.objective = pcost;
  if (res.status != SolveStatus::optimal && res.message.empty())
    res.message = "terminated without convergence";
  res.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

SolveResult solve_cone_qp(const ConeData& data, const SolverConfig& cfg) {
  ConeQp qp(data, cfg);
  return qp.run();
}

SolveResult solve(const ConicProgram& prog, const std::vector<std::pair<int, double>>* extra_linear,
                  const SolverConfig& cfg) {
  const ConeData data = lower(prog, extra_linear);
  SolveResult res = solve_cone_qp(data, cfg);
  if (res.x.size() == prog.num_variables()) {
    res.objective = prog.objective_value(res.x);
    if (extra_linear)
      for (const auto& [v, c] : *extra_linear) res.objective += c * res.x[v];
  }
  return res;
}

std::unordered_map<std::string, double> named_values(const ConicProgram& prog,
                                                     const Eigen::VectorXd& x) {
  std::unordered_map<std::string, double> out;
  out.reserve(static_cast<size_t>(prog.num_variables()));
  for (int i = 0; i < prog.num_variables(); ++i) out.emplace(prog.name(i), x[i]);
  return out;
}

}  // namespace dpps
