#pragma once

#include <vector>

#include "nlspec/graph.hpp"

namespace nlspec::detail {

// Supplies are node-wise net inflows  (div phi)_i = supply_i  for edge flows phi.
// Dirichlet nodes act as one node with free balance; without them the supplies
// must sum to zero (within tol * sum|supply|).

/// Is there a flow with |phi_e| <= radius * w_e meeting the supplies?
bool capacity_flow_feasible(const WeightedGraph& g, std::vector<double> supply, double radius, double tol);

/// Minimal sum_e |phi_e| / w_e over flows meeting the supplies (infinity when
/// the zero-sum condition fails).
double transport_cost(const WeightedGraph& g, std::vector<double> supply, double tol);

}  // namespace nlspec::detail
