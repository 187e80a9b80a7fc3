#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "pra/core.hpp"
#include "pra/rng.hpp"

namespace pra {

// Fractional hitting set: weights on element subsets such that every atomic
// event it serves has total subset weight >= 1. Implementations must give
// weight 0 to sets holding two values of one variable.
class HittingSet {
public:
    virtual ~HittingSet() = default;

    virtual double weight(const ElementSet& y) const = 0;

    // Draws Y subset of B with probability weight(Y) / total_weight(B).
    // The default enumerates subsets of B (|B| <= 20).
    virtual ElementSet sample(const AtomicEvent& b, Rng& rng) const;

    // Sum of weight over all subsets of B. Default enumerates (|B| <= 25).
    virtual double total_weight(const AtomicEvent& b) const;

    // True when the structure guarantees no two supported sets are
    // variable-disjoint inside one event (null bowtie).
    virtual bool bowtie_null() const { return false; }

    // Visits every supported set with its weight; returns false when the
    // support is not enumerable.
    virtual bool enumerate_support(const std::function<void(const ElementSet&, double)>& fn) const {
        (void)fn;
        return false;
    }
};

// weight(Y) = 1 iff Y is one of the enumerated events.
class TrivialHittingSet final : public HittingSet {
public:
    explicit TrivialHittingSet(std::vector<AtomicEvent> events);

    double weight(const ElementSet& y) const override;
    ElementSet sample(const AtomicEvent& b, Rng& rng) const override; // returns B
    double total_weight(const AtomicEvent& b) const override;
    bool bowtie_null() const override { return bowtie_null_; }
    bool enumerate_support(const std::function<void(const ElementSet&, double)>& fn) const override;

private:
    std::vector<ElementSet> sets_; // sorted
    bool bowtie_null_ = false;
};

// Symmetric width-d hitting set for sum-threshold events: weight(Y) =
// a^Y / C(t,d) on size-d variable-distinct subsets of the ground set.
class WidthHittingSet final : public HittingSet {
public:
    // Coefficients are given per element; elements absent from the list
    // have coefficient 0.
    WidthHittingSet(std::vector<std::pair<Element, double>> coeffs, double threshold, int width);

    double weight(const ElementSet& y) const override;
    ElementSet sample(const AtomicEvent& b, Rng& rng) const override; // incremental DP sampler
    double total_weight(const AtomicEvent& b) const override;         // via elementary symmetric sums
    bool enumerate_support(const std::function<void(const ElementSet&, double)>& fn) const override;

    double threshold() const { return t_; }
    int width() const { return d_; }
    double ln_choose_t_d() const { return ln_ctd_; }
    double coeff(const Element& e) const;
    const std::vector<std::pair<Element, double>>& coeffs() const { return coeffs_; }

    // Mean mu = sum a_x lambda_x and per-variable mu_i over the ground set.
    double mu(const LambdaVector& lam) const;
    std::vector<std::pair<int, double>> mu_by_var(const LambdaVector& lam) const;

private:
    std::vector<std::pair<Element, double>> coeffs_; // sorted by element
    double t_;
    int d_;
    double ln_ctd_;
};

// Explicit table of supported sets and weights.
class TabularHittingSet final : public HittingSet {
public:
    explicit TabularHittingSet(std::vector<std::pair<ElementSet, double>> entries,
                               bool bowtie_null_hint = false);

    double weight(const ElementSet& y) const override;
    bool bowtie_null() const override { return bowtie_null_; }
    bool enumerate_support(const std::function<void(const ElementSet&, double)>& fn) const override;

private:
    std::map<ElementSet, double> table_;
    bool bowtie_null_;
};

// Coverage check by brute-force subset enumeration: returns the coverage
// sum and whether it reaches 1 (within 1e-9). |B| <= 25.
std::pair<bool, double> verify_hitting_set(const HittingSet& q, const AtomicEvent& b);

// Exact elementary symmetric polynomial e_k(a) by the standard recurrence
// with compensated accumulation.
double elementary_symmetric(std::span<const double> a, int k);

// All of e_0..e_kmax at once.
std::vector<double> elementary_symmetric_all(std::span<const double> a, int kmax);

// Checks C(sum a, k) <= e_k(a) <= (sum a)^k / k!. The lower bound needs
// a_x in [0,1].
std::pair<bool, bool> symmetric_bound_check(std::span<const double> a, int k);

// R(W) = sum of weights of Y with W subset Y subset B, |Y| = d, computed in
// O(d |B|) arithmetic.
double subset_sum_R(const ElementSet& w, const AtomicEvent& b, const WidthHittingSet& q);

} // namespace pra
