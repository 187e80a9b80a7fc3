#pragma once

#include <optional>
#include <vector>

#include "pra/criteria.hpp"
#include "pra/engine.hpp"

namespace pra {

// Column-sparse assignment-packing system: rows sum a_{k,i,j} [X_i = j]
// against fractional RHS c_k, with a fractional solution z.
struct PackingSystem {
    std::vector<int> domain_sizes;
    std::vector<std::vector<std::pair<Element, double>>> rows; // a entries per constraint
    std::vector<double> c;
    std::vector<std::vector<double>> z;
    std::optional<std::vector<double>> b; // integral RHS override

    int num_vars() const { return int(domain_sizes.size()); }
    int num_constraints() const { return int(rows.size()); }

    double column_l1() const; // D
    int column_l0() const;    // D'
    double row_value(int k, const std::vector<int>& assignment) const;
    double row_fractional(int k) const; // sum a z

    std::vector<Diagnostic> validate() const;
};

// Engine instance for the system: one label per constraint, width-d
// hitting sets with t = b_k, lambda = (1+eps) z.
Instance make_packing_instance(const PackingSystem& sys, const std::vector<double>& b, double eps);

struct RoundResult {
    std::vector<int> assignment;
    RunStatus status = RunStatus::Solved;
    long long resamples = 0;
    std::vector<double> b;
    double eps = 0.0;
};

// Rounds the fractional solution to an integral assignment meeting every
// b_k. eps <= 0 selects the default 1/(D+1).
RoundResult round_packing(const PackingSystem& sys, double eps, uint64_t seed);

struct DiscrepancyResult {
    std::vector<int> signs; // +1 / -1 per column
    double max_abs = 0.0;
    double retained_bound = 0.0; // max over retained rows of 2 b_k - |Y_k|
    double dropped_bound = 0.0;  // 100 sqrt(R ln(D+1))
    std::vector<char> retained;  // per row
    RunStatus status = RunStatus::Solved;
    long long resamples = 0;
};

// Plus/minus-one coloring with |Y_k . v| = O(sqrt(R log(D+1))).
DiscrepancyResult discrepancy_vector(const std::vector<std::vector<double>>& y, uint64_t seed);

struct MultidimResult {
    bool z_feasible = true;
    std::string z_violation;
    std::vector<int> assignment; // job -> machine
    RunStatus status = RunStatus::Solved;
    long long resamples = 0;
    double b = 0.0;                                // common RHS of the scaled system
    std::vector<std::vector<double>> loads;        // [machine][dimension]
    bool within_bound = true;                      // loads <= b * T per dimension
};

// n jobs x m machines x D dimensions; assignment with per-machine load at
// most b * T_l in every dimension l. A fractional z may be supplied; the
// default is uniform over the unfiltered machines of each job.
MultidimResult multidim_schedule(const std::vector<std::vector<std::vector<double>>>& loads,
                                 const std::vector<double>& targets,
                                 const std::optional<std::vector<std::vector<double>>>& z,
                                 uint64_t seed);

struct HardInstance {
    PackingSystem sys;
    std::vector<std::vector<int>> pi; // permutation per variable
    int m = 0;
};

// n = floor(R m) variables over [m]; a_{k,i,j} = [pi_i(k) = j]; z = 1/m.
// Every constraint depends on every variable and D' = 1.
HardInstance mt_hard_instance(int m, double R, uint64_t seed);

struct CompareReport {
    int trials = 0;
    int pra_successes = 0;
    int mt_successes = 0;
    double pra_mean_resamples = 0.0;
    double mt_mean_resamples = 0.0;
    double pra_b = 0.0;
    double mt_threshold = 0.0;
};

// Runs PRA (width sets, b from the packing RHS formula) and MT
// (full-dependency resampling, rows thresholded at rprime) on fresh hard
// instances, `trials` each under a shared resampling budget.
CompareReport compare_mt_pra(int m, double R, double rprime, long long budget, int trials,
                             uint64_t seed);

} // namespace pra
