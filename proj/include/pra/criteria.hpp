#pragma once

#include <map>
#include <string>
#include <vector>

#include "pra/core.hpp"
#include "pra/hitting_set.hpp"

namespace pra {

// Charges of one label's hitting set against lambda.
struct LabelCharges {
    double G = 0.0;                        // G(Q_k, lambda)
    std::vector<double> Gi;                // per variable
    std::vector<std::vector<double>> Gij;  // per element
    double S = 0.0;                        // S_k(lambda)
    bool exact = true;                     // false when G/S are upper bounds
};

struct ChargeReport {
    std::vector<LabelCharges> labels;
    std::vector<std::vector<double>> lambda; // echo of the lambda entries
    std::vector<double> lambda_i;
    std::vector<std::vector<double>> Hij; // sum_k Gij / (1 - S_k)
    std::vector<double> Hi;
    std::vector<double> slack; // lambda_i - H_i

    bool all_S_below_one() const;
};

// Exact (enumerated or symmetric-polynomial) charges; labels whose hitting
// set supports neither enumeration nor closed forms raise
// UnsupportedQueryError. S_k enumeration is capped at `s_support_limit`
// supported sets, beyond which S falls back to the G upper bound.
ChargeReport charges(const Instance& inst, size_t s_support_limit = 10000);

enum class CriterionVariant { A, B, C };

struct CriterionResult {
    bool precondition_ok = true;
    bool satisfied = false;
    std::vector<double> slack; // lambda_i - rhs_i per variable
    std::string reason;
};

// The lambda-form convergence criteria. Variant A uses S_k, B uses G in
// its place, C requires null bowtie relations.
CriterionResult check_lambda_criterion(const Instance& inst, CriterionVariant variant);
CriterionResult check_lambda_criterion(const Instance& inst, CriterionVariant variant,
                                       const ChargeReport& report);

// Symmetric criterion e * P * D <= 1.
bool check_symmetric(double p, long long d);

// Weighting function mu(Y, k), finitely supported.
struct WeightingFunction {
    std::map<std::pair<ElementSet, int>, double> values;

    double at(const ElementSet& y, int k) const;
    double set_sum(const ElementSet& y) const; // mu(Y) = sum_k mu(Y,k)
};

// Brute-force check of the general criterion: mu(Y,k) >= p^Y Q_k(Y) times
// the neighbor-set sum, for every supported pair. Support must stay small
// (default limit 20).
bool check_main_a(const Instance& inst, const WeightingFunction& mu, size_t support_limit = 20);

// Chernoff upper-tail separation function; 1 for t < mu.
double ch(double mu, double t);

// mu^d / (d! C(t,d)) evaluated in log space; d = 0 gives 1.
double width_bound(double mu, double t, int d);
int default_width(double mu, double t); // ceil(t - mu)

// Exponent coefficient r(y) with Ch(mu, (1+l)mu) <= exp(-mu r l^2) for
// 0 <= l <= y.
double chern_sq_r(double y);

struct CspConditionReport {
    bool ok = true;
    std::vector<bool> c1_ok, c2_ok;
    std::vector<double> ch_value;
};

// The piecewise RHS vector b for packing constraints, given fractional
// values c, column norm D and epsilon.
std::vector<double> csp_rhs(const std::vector<double>& c, double D, double eps);

// Independent numeric re-check of conditions (C1) and (C2) for each k.
CspConditionReport csp_check_conditions(const std::vector<double>& c, const std::vector<double>& b,
                                        double D, double eps);

// lambda^E: upper bound on the probability that E is ever true.
double event_prob_upper(const AtomicEvent& e, const LambdaVector& lam);

// Output-probability bound p^E sum over strict neighbor-sets of E of
// prod mu(Y). The tight sum enumerates neighbor-sets for supports of at
// most `tight_limit` sets; larger supports fall back to the product form
// p^E prod_{Y ~ E} (1 + mu(Y)).
double event_prob_bound_mu(const AtomicEvent& e, const Instance& inst,
                           const WeightingFunction& mu, size_t tight_limit = 15);

struct SingletonBounds {
    bool ok = true;
    double upper = 1.0;
    double lower = 0.0;
    std::string reason;
};

// Output-distribution bounds for P(X_i in J).
SingletonBounds singleton_bounds(int var, const std::vector<int>& values,
                                 const ChargeReport& report);

} // namespace pra
