#include "dpps/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace dpps {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct PairVars {
  int wrr = -1, wii = -1;
  int wri_ab = -1, wri_ba = -1;  // vR_a vI_b and vR_b vI_a, a < b
};

// Assembles the SOC OPF constraint block for a set of buses/lines/generators.
// Variable creation order is deterministic: u's, then per-line flow and pair
// variables, then generator variables.
class SocBuilder {
 public:
  SocBuilder(ConicProgram& prog, const NetworkData& net, std::string prefix)
      : prog_(prog), net_(net), prefix_(std::move(prefix)), u_var_(net.buses.size(), -1) {}

  void add_bus_voltage(int bus) {
    const auto& b = net_.buses[static_cast<size_t>(bus)];
    u_var_[static_cast<size_t>(bus)] =
        prog_.add_variable(name("u[" + std::to_string(bus) + "]"), b.v_min * b.v_min,
                           b.v_max * b.v_max);
  }

  void add_line_variables(int l) {
    const auto& br = net_.branches[static_cast<size_t>(l)];
    const std::string ls = std::to_string(l);
    LineVars lv;
    lv.pf = prog_.add_variable(name("pf[" + ls + "]"));
    lv.qf = prog_.add_variable(name("qf[" + ls + "]"));
    lv.pt = prog_.add_variable(name("pt[" + ls + "]"));
    lv.qt = prog_.add_variable(name("qt[" + ls + "]"));
    line_vars_[l] = lv;
    const auto key = pair_key(br);
    if (!pairs_.count(key)) {
      const auto [a, b] = key;
      // products of voltage magnitudes bound every w entry; these boxes keep
      // the split between the redundant w copies bounded
      const double cap =
          net_.buses[static_cast<size_t>(a)].v_max * net_.buses[static_cast<size_t>(b)].v_max;
      const std::string ps = std::to_string(a) + ":" + std::to_string(b);
      const std::string sp = std::to_string(b) + ":" + std::to_string(a);
      PairVars pv;
      pv.wrr = prog_.add_variable(name("wrr[" + ps + "]"), -cap, cap);
      pv.wii = prog_.add_variable(name("wii[" + ps + "]"), -cap, cap);
      pv.wri_ab = prog_.add_variable(name("wri[" + ps + "]"), -cap, cap);
      pv.wri_ba = prog_.add_variable(name("wri[" + sp + "]"), -cap, cap);
      pairs_[key] = pv;
      pair_order_.push_back(key);
    }
  }

  void add_generator(int g) {
    const auto& gen = net_.generators[static_cast<size_t>(g)];
    const std::string gs = std::to_string(g);
    const int pg = prog_.add_variable(name("pg[" + gs + "]"), gen.p_min, gen.p_max);
    const int qg = prog_.add_variable(name("qg[" + gs + "]"), gen.q_min, gen.q_max);
    pg_var_[g] = pg;
    qg_var_[g] = qg;
    const double base = net_.base_mva;
    prog_.add_objective_linear(pg, gen.c1 * base);
    prog_.add_objective_quadratic(pg, gen.c2 * base * base);
    prog_.add_objective_constant(gen.c0);
  }

  void add_line_constraints(int l) {
    const auto& br = net_.branches[static_cast<size_t>(l)];
    const auto& lv = line_vars_.at(l);
    const auto key = pair_key(br);
    const auto& pv = pairs_.at(key);
    const bool fwd = br.from_bus == key.first;
    const int uf = u_var_[static_cast<size_t>(br.from_bus)];
    const int ut = u_var_[static_cast<size_t>(br.to_bus)];
    const double dsign = fwd ? 1.0 : -1.0;  // line D = Im(V_f conj(V_t)) vs pair orientation

    auto c_terms = [&](double k) {
      return std::vector<LinearTerm>{{pv.wrr, k}, {pv.wii, k}};
    };
    auto d_terms = [&](double k) {
      return std::vector<LinearTerm>{{pv.wri_ba, k * dsign}, {pv.wri_ab, -k * dsign}};
    };
    auto flow_row = [&](int flow, double gu, int uvar, double gc, double gd) {
      LinearExpr e;
      e.terms.push_back({flow, 1.0});
      if (gu != 0.0) e.terms.push_back({uvar, -gu});
      for (auto t : c_terms(-gc)) e.terms.push_back(t);
      for (auto t : d_terms(-gd)) e.terms.push_back(t);
      prog_.add_equality(std::move(e), 0.0);
    };
    flow_row(lv.pf, br.g_ff(), uf, br.g_ft(), br.b_ft());
    flow_row(lv.qf, -br.b_ff(), uf, -br.b_ft(), br.g_ft());
    flow_row(lv.pt, br.g_tt(), ut, br.g_tf(), -br.b_tf());
    flow_row(lv.qt, -br.b_tt(), ut, -br.b_tf(), -br.g_tf());

    if (br.s_max > 0) {
      for (auto [p, q] : {std::pair{lv.pf, lv.qf}, std::pair{lv.pt, lv.qt}}) {
        SocConstraint c;
        c.norm_args.push_back(LinearExpr{{{p, 1.0}}, 0.0});
        c.norm_args.push_back(LinearExpr{{{q, 1.0}}, 0.0});
        c.rhs = LinearExpr{{}, br.s_max};
        prog_.add_soc(std::move(c));
      }
    }
    // angle rows, dropped when the bound is at or beyond 90 degrees
    if (br.angle_min > -kHalfPi * (1.0 - 1e-9)) {
      LinearExpr e;
      for (auto t : d_terms(1.0)) e.terms.push_back(t);
      for (auto t : c_terms(-std::tan(br.angle_min))) e.terms.push_back(t);
      prog_.add_linear({std::move(e), 0.0, kInf});
    }
    if (br.angle_max < kHalfPi * (1.0 - 1e-9)) {
      LinearExpr e;
      for (auto t : d_terms(1.0)) e.terms.push_back(t);
      for (auto t : c_terms(-std::tan(br.angle_max))) e.terms.push_back(t);
      prog_.add_linear({std::move(e), -kInf, 0.0});
    }
  }

  void add_pair_cones() {
    for (const auto& key : pair_order_) {
      const auto& pv = pairs_.at(key);
      const int ua = u_var_[static_cast<size_t>(key.first)];
      const int ub = u_var_[static_cast<size_t>(key.second)];
      SocConstraint c;
      c.norm_args.push_back(LinearExpr{{{pv.wrr, 1.0}, {pv.wii, 1.0}}, 0.0});
      c.norm_args.push_back(LinearExpr{{{pv.wri_ba, 1.0}, {pv.wri_ab, -1.0}}, 0.0});
      c.norm_args.push_back(LinearExpr{{{ua, 0.5}, {ub, -0.5}}, 0.0});
      c.rhs = LinearExpr{{{ua, 0.5}, {ub, 0.5}}, 0.0};
      prog_.add_soc(std::move(c));
    }
  }

  // active balance: sum of incident flows + gs*u - sum pg = -pd (or -D)
  void add_balance(int bus, double p_demand, int demand_var) {
    const auto& b = net_.buses[static_cast<size_t>(bus)];
    LinearExpr p, q;
    for (int l : net_.lines_from[static_cast<size_t>(bus)])
      if (line_vars_.count(l)) {
        p.terms.push_back({line_vars_.at(l).pf, 1.0});
        q.terms.push_back({line_vars_.at(l).qf, 1.0});
      }
    for (int l : net_.lines_to[static_cast<size_t>(bus)])
      if (line_vars_.count(l)) {
        p.terms.push_back({line_vars_.at(l).pt, 1.0});
        q.terms.push_back({line_vars_.at(l).qt, 1.0});
      }
    for (int g : net_.gens_at[static_cast<size_t>(bus)]) {
      p.terms.push_back({pg_var_.at(g), -1.0});
      q.terms.push_back({qg_var_.at(g), -1.0});
    }
    const int u = u_var_[static_cast<size_t>(bus)];
    if (b.g_shunt != 0.0) p.terms.push_back({u, b.g_shunt});
    if (b.b_shunt != 0.0) q.terms.push_back({u, -b.b_shunt});
    if (demand_var >= 0)
      p.terms.push_back({demand_var, 1.0});
    else
      p.offset = p_demand;
    prog_.add_equality(std::move(p), 0.0);
    q.offset = b.q_demand;
    prog_.add_equality(std::move(q), 0.0);
  }

  int quantity_var(int line, Quantity q) const {
    const auto& br = net_.branches[static_cast<size_t>(line)];
    const auto& lv = line_vars_.at(line);
    const auto key = pair_key(br);
    const auto& pv = pairs_.at(key);
    const bool fwd = br.from_bus == key.first;
    switch (q) {
      case Quantity::PF: return lv.pf;
      case Quantity::QF: return lv.qf;
      case Quantity::PT: return lv.pt;
      case Quantity::QT: return lv.qt;
      case Quantity::WRR: return pv.wrr;
      case Quantity::WII: return pv.wii;
      case Quantity::WRI_FT: return fwd ? pv.wri_ab : pv.wri_ba;
      case Quantity::WRI_TF: return fwd ? pv.wri_ba : pv.wri_ab;
    }
    return -1;
  }

 private:
  struct LineVars {
    int pf = -1, qf = -1, pt = -1, qt = -1;
  };

  static std::pair<int, int> pair_key(const BranchRecord& br) {
    return {std::min(br.from_bus, br.to_bus), std::max(br.from_bus, br.to_bus)};
  }

  std::string name(const std::string& base) const { return prefix_ + base; }

  ConicProgram& prog_;
  const NetworkData& net_;
  std::string prefix_;
  std::vector<int> u_var_;
  std::map<int, LineVars> line_vars_;
  std::map<std::pair<int, int>, PairVars> pairs_;
  std::vector<std::pair<int, int>> pair_order_;
  std::map<int, int> pg_var_, qg_var_;
};

}  // namespace

ConicProgram build_centralized_soc(const NetworkData& net) {
  ConicProgram prog;
  SocBuilder b(prog, net, "");
  for (size_t i = 0; i < net.buses.size(); ++i) b.add_bus_voltage(static_cast<int>(i));
  for (size_t l = 0; l < net.branches.size(); ++l) b.add_line_variables(static_cast<int>(l));
  for (size_t g = 0; g < net.generators.size(); ++g) b.add_generator(static_cast<int>(g));
  for (size_t l = 0; l < net.branches.size(); ++l) b.add_line_constraints(static_cast<int>(l));
  b.add_pair_cones();
  for (size_t i = 0; i < net.buses.size(); ++i)
    b.add_balance(static_cast<int>(i), net.buses[i].p_demand, -1);
  return prog;
}

ZoneBlock append_zone_block(ConicProgram& prog, const std::string& prefix, const NetworkData& net,
                            const ZonePartition& part, int z,
                            const std::vector<double>* demand_override, int unknown_demand_bus,
                            int demand_var) {
  if (z < 0 || z >= part.num_zones) throw ValidationError("unknown zone " + std::to_string(z));
  const auto& buses = part.zones[static_cast<size_t>(z)];
  if (demand_override && demand_override->size() != buses.size())
    throw ValidationError("demand override must be indexed by the zone's buses");

  const int first_var = prog.num_variables();
  SocBuilder b(prog, net, prefix);
  for (int i : part.extended_nodes[static_cast<size_t>(z)]) b.add_bus_voltage(i);
  for (int l : part.line_sets[static_cast<size_t>(z)]) b.add_line_variables(l);
  for (int i : buses)
    for (int g : net.gens_at[static_cast<size_t>(i)]) b.add_generator(g);
  for (int l : part.line_sets[static_cast<size_t>(z)]) b.add_line_constraints(l);
  b.add_pair_cones();
  for (size_t j = 0; j < buses.size(); ++j) {
    const int i = buses[j];
    const double pd = demand_override ? (*demand_override)[j] : net.buses[static_cast<size_t>(i)].p_demand;
    b.add_balance(i, pd, i == unknown_demand_bus ? demand_var : -1);
  }

  ZoneBlock block;
  std::set<int> boundary;
  for (int ci : part.zone_view[static_cast<size_t>(z)]) {
    const auto& c = part.consensus[static_cast<size_t>(ci)];
    const int v = b.quantity_var(c.line, c.quantity);
    block.y_vars.push_back(v);
    boundary.insert(v);
  }
  for (int v = first_var; v < prog.num_variables(); ++v)
    if (!boundary.count(v)) block.x_vars.push_back(v);
  return block;
}

ZoneProgram build_zone_subproblem(const NetworkData& net, const ZonePartition& part, int z,
                                  const std::vector<double>* demand_override) {
  ZoneProgram zp;
  zp.zone = z;
  ZoneBlock block = append_zone_block(zp.prog, "", net, part, z, demand_override);
  zp.y_vars = std::move(block.y_vars);
  zp.x_vars = std::move(block.x_vars);
  for (int v : zp.x_vars) zp.x_names.push_back(zp.prog.name(v));
  return zp;
}

std::vector<BoundPair> boundary_bounds(const NetworkData& net, const ZonePartition& part) {
  std::vector<BoundPair> out;
  out.reserve(part.consensus.size());
  for (const auto& c : part.consensus) {
    const auto& br = net.branches[static_cast<size_t>(c.line)];
    const double vf = net.buses[static_cast<size_t>(br.from_bus)].v_max;
    const double vt = net.buses[static_cast<size_t>(br.to_bus)].v_max;
    const double vv = vf * vt;
    BoundPair bp;
    switch (c.quantity) {
      case Quantity::PF:
      case Quantity::QF:
      case Quantity::PT:
      case Quantity::QT: {
        double cap;
        if (br.s_max > 0) {
          cap = br.s_max;
        } else {
          // |c|, |D| <= vf*vt and u <= v^2 bound each flow through its defining row
          const bool from_side = c.quantity == Quantity::PF || c.quantity == Quantity::QF;
          const bool active = c.quantity == Quantity::PF || c.quantity == Quantity::PT;
          const double gu = from_side ? (active ? br.g_ff() : br.b_ff())
                                      : (active ? br.g_tt() : br.b_tt());
          const double gc = from_side ? br.g_ft() : br.g_tf();
          const double bc = from_side ? br.b_ft() : br.b_tf();
          const double vown = from_side ? vf : vt;
          cap = std::abs(gu) * vown * vown + (std::abs(gc) + std::abs(bc)) * vv;
        }
        bp = {-cap, cap};
        break;
      }
      default:
        bp = {-vv, vv};
    }
    out.push_back(bp);
  }
  return out;
}

double g_upper_bound(const NetworkData& net, const ZonePartition& part,
                     const Eigen::VectorXd& xi_upper) {
  const auto bounds = boundary_bounds(net, part);
  double total = 0.0;
  for (int z = 0; z < part.num_zones; ++z) {
    const auto& view = part.zone_view[static_cast<size_t>(z)];
    for (size_t j = 0; j < view.size(); ++j) {
      const auto& bp = bounds[static_cast<size_t>(view[j])];
      const double ymax = std::max(std::abs(bp.lo), std::abs(bp.hi));
      const double xu = xi_upper[part.dual_offsets[static_cast<size_t>(z)] + static_cast<int>(j)];
      total += ymax * ymax + xu * xu + 2.0 * xu * ymax;
    }
  }
  return total;
}

Eigen::VectorXd restrict_by_name(const ConicProgram& from, const Eigen::VectorXd& from_x,
                                 const ConicProgram& to) {
  Eigen::VectorXd out(to.num_variables());
  for (int v = 0; v < to.num_variables(); ++v) out[v] = from_x[from.variable(to.name(v))];
  return out;
}

}  // namespace dpps
