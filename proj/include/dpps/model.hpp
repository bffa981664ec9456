#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpps/conic.hpp"
#include "dpps/network.hpp"
#include "dpps/partition.hpp"

namespace dpps {

/// Centralized SOC relaxation of the OPF over the whole network.
ConicProgram build_centralized_soc(const NetworkData& net);

/// One zone's feasible block inside a larger program: indices of the boundary
/// variables (ordered like the zone's consensus view) and of the remaining
/// block variables in creation order.
struct ZoneBlock {
  std::vector<int> y_vars;
  std::vector<int> x_vars;
};

/// Appends a zone's constraints and variables to `prog`, names prefixed.
/// `demand_override` (parallel to part.zones[z]) replaces active demands;
/// `unknown_demand_bus` (internal id, or -1) makes that bus's active balance
/// use the shared program variable `demand_var` instead of data.
ZoneBlock append_zone_block(ConicProgram& prog, const std::string& prefix, const NetworkData& net,
                            const ZonePartition& part, int z,
                            const std::vector<double>* demand_override = nullptr,
                            int unknown_demand_bus = -1, int demand_var = -1);

/// Zone subproblem: the zone block as a standalone program. The multiplier
/// objective is supplied at solve time as a linear overlay on y_vars.
struct ZoneProgram {
  ConicProgram prog;
  int zone = -1;
  std::vector<int> y_vars;
  std::vector<int> x_vars;
  std::vector<std::string> x_names;  // base names of x_vars
};

ZoneProgram build_zone_subproblem(const NetworkData& net, const ZonePartition& part, int z,
                                  const std::vector<double>* demand_override = nullptr);

struct BoundPair {
  double lo = 0.0, hi = 0.0;
};

/// Valid bounds [y^L_i, y^U_i] per consensus index: thermal limits for flow
/// quantities (a derived admittance-and-voltage cap when the line is
/// unlimited) and voltage-magnitude products for the w quantities.
std::vector<BoundPair> boundary_bounds(const NetworkData& net, const ZonePartition& part);

/// Diagnostic upper bound on ||y~||^2 given per-copy noise magnitudes
/// (stacked by dual position): sum of (max(|yL|,|yU|) + xi_upper)^2 terms.
double g_upper_bound(const NetworkData& net, const ZonePartition& part,
                     const Eigen::VectorXd& xi_upper);

/// Copies values between programs by variable name; variables of `to` missing
/// in `from` raise. Used to restrict a centralized solution to a zone block.
Eigen::VectorXd restrict_by_name(const ConicProgram& from, const Eigen::VectorXd& from_x,
                                 const ConicProgram& to);

}  // namespace dpps
