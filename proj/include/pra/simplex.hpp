#pragma once

#include <vector>

namespace pra {

struct LpResult {
    bool optimal = false;
    bool infeasible = false;
    double objective = 0.0;
    std::vector<double> x;
    int iterations = 0;
};

// Minimizes cost . x subject to A x >= rhs, x >= 0, by two-phase dense
// primal simplex. Row counts up to a few hundred and column counts up to
// a few tens of thousands are practical.
LpResult solve_lp_min(const std::vector<std::vector<double>>& a, const std::vector<double>& rhs,
                      const std::vector<double>& cost, int max_iterations = 200000);

} // namespace pra
