#include "pra/hitting_set.hpp"

#include <algorithm>
#include <cmath>

#include "pra/mathutil.hpp"

namespace pra {

namespace {

// Enumerates all subsets of b.elems (guarded), calling fn(set).
template <typename Fn>
void for_each_subset(const AtomicEvent& b, size_t limit, Fn&& fn) {
    const size_t n = b.elems.size();
    if (n > limit)
        throw ArgumentError("event too large for brute-force subset enumeration (" +
                            std::to_string(n) + " > " + std::to_string(limit) + " elements)");
    ElementSet y;
    y.reserve(n);
    const uint64_t total = uint64_t(1) << n;
    for (uint64_t mask = 0; mask < total; ++mask) {
        y.clear();
        for (size_t i = 0; i < n; ++i)
            if (mask & (uint64_t(1) << i)) y.push_back(b.elems[i]);
        fn(y);
    }
}

} // namespace

ElementSet HittingSet::sample(const AtomicEvent& b, Rng& rng) const {
    std::vector<ElementSet> sets;
    std::vector<double> weights;
    for_each_subset(b, 20, [&](const ElementSet& y) {
        double w = weight(y);
        if (w > 0.0) {
            sets.push_back(y);
            weights.push_back(w);
        }
    });
    if (sets.empty())
        throw CriterionError("no supported subset of a violated event (unhittable event)");
    return sets[rng.discrete(weights)];
}

double HittingSet::total_weight(const AtomicEvent& b) const {
    Kahan sum;
    for_each_subset(b, 25, [&](const ElementSet& y) { sum.add(weight(y)); });
    return sum.value();
}

TrivialHittingSet::TrivialHittingSet(std::vector<AtomicEvent> events) {
    sets_.reserve(events.size());
    for (auto& e : events) sets_.push_back(e.elems);
    std::sort(sets_.begin(), sets_.end());
    sets_.erase(std::unique(sets_.begin(), sets_.end()), sets_.end());

    // Uniform event size rules out one event containing two disjoint ones.
    bool uniform = true;
    for (size_t i = 1; i < sets_.size(); ++i)
        if (sets_[i].size() != sets_[0].size()) uniform = false;
    if (uniform && (sets_.empty() || !sets_[0].empty())) {
        bowtie_null_ = true;
    } else if (sets_.size() <= 200) {
        bowtie_null_ = true;
        for (size_t a = 0; a < sets_.size() && bowtie_null_; ++a)
            for (size_t b = a + 1; b < sets_.size() && bowtie_null_; ++b) {
                if (shares_variable(sets_[a], sets_[b])) continue;
                for (const auto& big : sets_)
                    if (contains_subset(big, sets_[a]) && contains_subset(big, sets_[b])) {
                        bowtie_null_ = false;
                        break;
                    }
            }
    }
}

double TrivialHittingSet::weight(const ElementSet& y) const {
    return std::binary_search(sets_.begin(), sets_.end(), y) ? 1.0 : 0.0;
}

ElementSet TrivialHittingSet::sample(const AtomicEvent& b, Rng&) const {
    if (weight(b.elems) == 0.0)
        throw CriterionError("trivial hitting set asked to resample a non-member event");
    return b.elems;
}

double TrivialHittingSet::total_weight(const AtomicEvent& b) const {
    if (b.elems.size() <= 25) return HittingSet::total_weight(b);
    double sum = 0.0;
    for (const auto& s : sets_)
        if (contains_subset(b.elems, s)) sum += 1.0;
    return sum;
}

bool TrivialHittingSet::enumerate_support(
    const std::function<void(const ElementSet&, double)>& fn) const {
    for (const auto& s : sets_) fn(s, 1.0);
    return true;
}

WidthHittingSet::WidthHittingSet(std::vector<std::pair<Element, double>> coeffs, double threshold,
                                 int width)
    : coeffs_(std::move(coeffs)), t_(threshold), d_(width) {
    std::sort(coeffs_.begin(), coeffs_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (d_ < 1) throw ArgumentError("width hitting set: width must be positive");
    if (!(t_ > 0.0)) throw ArgumentError("width hitting set: threshold must be positive");
    if (double(d_) > t_)
        throw ArgumentError("width hitting set: width exceeds threshold");
    for (auto& [e, a] : coeffs_)
        if (a < 0.0 || a > 1.0)
            throw ArgumentError("width hitting set: coefficients must lie in [0,1]");
    ln_ctd_ = ln_gen_binomial(t_, d_);
}

double WidthHittingSet::coeff(const Element& e) const {
    auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), e,
                               [](const auto& p, const Element& x) { return p.first < x; });
    if (it == coeffs_.end() || it->first != e) return 0.0;
    return it->second;
}

double WidthHittingSet::weight(const ElementSet& y) const {
    if (int(y.size()) != d_) return 0.0;
    double prod = 1.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (i > 0 && y[i].var == y[i - 1].var) return 0.0;
        prod *= coeff(y[i]);
        if (prod == 0.0) return 0.0;
    }
    return prod * std::exp(-ln_ctd_);
}

double WidthHittingSet::total_weight(const AtomicEvent& b) const {
    std::vector<double> a;
    a.reserve(b.elems.size());
    for (const Element& e : b.elems) a.push_back(coeff(e));
    return elementary_symmetric(a, d_) * std::exp(-ln_ctd_);
}

double WidthHittingSet::mu(const LambdaVector& lam) const {
    Kahan sum;
    for (const auto& [e, a] : coeffs_) sum.add(a * lam.at(e.var, e.value));
    return sum.value();
}

std::vector<std::pair<int, double>> WidthHittingSet::mu_by_var(const LambdaVector& lam) const {
    std::vector<std::pair<int, double>> out;
    for (const auto& [e, a] : coeffs_) {
        if (out.empty() || out.back().first != e.var) out.push_back({e.var, 0.0});
        out.back().second += a * lam.at(e.var, e.value);
    }
    return out;
}

ElementSet WidthHittingSet::sample(const AtomicEvent& b, Rng& rng) const {
    const size_t n = b.elems.size();
    std::vector<double> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = coeff(b.elems[i]);

    // The width set puts mass only on variable-distinct sets; a violated
    // event is variable-distinct already, so plain subsets suffice.
    std::vector<char> taken(n, 0);
    ElementSet y;
    y.reserve(size_t(d_));

    std::vector<double> q(n);
    std::vector<double> rest;
    rest.reserve(n);
    for (int step = 1; step <= d_; ++step) {
        const int m = d_ - step; // size still to pick after this step
        // e_0..e_m of the remaining pool, then leave-one-out per candidate.
        rest.clear();
        for (size_t i = 0; i < n; ++i)
            if (!taken[i]) rest.push_back(a[i]);
        std::vector<double> e = elementary_symmetric_all(rest, m);

        double qtotal = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (taken[i]) {
                q[i] = 0.0;
                continue;
            }
            // e_k(rest \ {a_i}) by the subtraction recurrence.
            double ek_without = e[0]; // e_0 = 1
            for (int k = 1; k <= m; ++k) ek_without = e[k] - a[i] * ek_without;
            q[i] = a[i] * std::max(ek_without, 0.0);
            qtotal += q[i];
        }
        if (!(qtotal > 0.0))
            throw CriterionError("no supported subset of a violated event (unhittable event)");
        size_t pick = rng.discrete(q);
        taken[pick] = 1;
        y.push_back(b.elems[pick]);
    }
    return make_element_set(std::move(y));
}

bool WidthHittingSet::enumerate_support(
    const std::function<void(const ElementSet&, double)>& fn) const {
    const size_t n = coeffs_.size();
    if (n > 24) return false;
    std::vector<size_t> idx(size_t(d_), 0);
    ElementSet y(size_t(d_), Element{});
    // All size-d index combinations of the ground set.
    std::function<void(size_t, int)> rec = [&](size_t start, int depth) {
        if (depth == d_) {
            for (int i = 0; i < d_; ++i) y[size_t(i)] = coeffs_[idx[size_t(i)]].first;
            double w = weight(y);
            if (w > 0.0) fn(y, w);
            return;
        }
        for (size_t i = start; i + size_t(d_ - depth) <= n; ++i) {
            idx[size_t(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    if (d_ <= int(n)) rec(0, 0);
    return true;
}

TabularHittingSet::TabularHittingSet(std::vector<std::pair<ElementSet, double>> entries,
                                     bool bowtie_null_hint)
    : bowtie_null_(bowtie_null_hint) {
    for (auto& [s, w] : entries) {
        if (w < 0.0 || w > 1.0)
            throw ArgumentError("tabular hitting set: weights must lie in [0,1]");
        if (w > 0.0) table_[make_element_set(std::move(s))] += w;
    }
}

double TabularHittingSet::weight(const ElementSet& y) const {
    auto it = table_.find(y);
    return it == table_.end() ? 0.0 : it->second;
}

bool TabularHittingSet::enumerate_support(
    const std::function<void(const ElementSet&, double)>& fn) const {
    for (const auto& [s, w] : table_) fn(s, w);
    return true;
}

std::pair<bool, double> verify_hitting_set(const HittingSet& q, const AtomicEvent& b) {
    Kahan sum;
    for_each_subset(b, 25, [&](const ElementSet& y) { sum.add(q.weight(y)); });
    double coverage = sum.value();
    return {coverage >= 1.0 - 1e-9, coverage};
}

std::vector<double> elementary_symmetric_all(std::span<const double> a, int kmax) {
    if (kmax < 0) throw ArgumentError("elementary_symmetric: k must be nonnegative");
    std::vector<double> e(size_t(kmax) + 1, 0.0);
    std::vector<double> comp(size_t(kmax) + 1, 0.0);
    e[0] = 1.0;
    for (double x : a) {
        int top = kmax;
        for (int k = top; k >= 1; --k) {
            // e[k] += x * e[k-1], compensated.
            double add = x * e[size_t(k) - 1];
            double t = e[size_t(k)] + add;
            if (std::abs(e[size_t(k)]) >= std::abs(add))
                comp[size_t(k)] += (e[size_t(k)] - t) + add;
            else
                comp[size_t(k)] += (add - t) + e[size_t(k)];
            e[size_t(k)] = t;
        }
    }
    for (int k = 0; k <= kmax; ++k) e[size_t(k)] += comp[size_t(k)];
    return e;
}

double elementary_symmetric(std::span<const double> a, int k) {
    if (k < 0) throw ArgumentError("elementary_symmetric: k must be nonnegative");
    if (k > int(a.size())) return 0.0;
    return elementary_symmetric_all(a, k)[size_t(k)];
}

std::pair<bool, bool> symmetric_bound_check(std::span<const double> a, int k) {
    double sum = 0.0;
    bool unit_range = true;
    for (double x : a) {
        sum += x;
        if (x < 0.0 || x > 1.0) unit_range = false;
    }
    double ek = elementary_symmetric(a, k);
    const double tol = 1e-9 * std::max(1.0, std::abs(ek));

    bool lower_ok = true;
    if (unit_range) {
        double lower = (sum > double(k) - 1.0) ? gen_binomial(sum, k) : 0.0;
        lower_ok = ek >= lower - tol;
    }
    double upper = std::exp(double(k) * std::log(std::max(sum, 1e-300)) - std::lgamma(double(k) + 1.0));
    if (k == 0) upper = 1.0;
    bool upper_ok = ek <= upper + tol;
    return {lower_ok, upper_ok};
}

double subset_sum_R(const ElementSet& w, const AtomicEvent& b, const WidthHittingSet& q) {
    if (!contains_subset(b.elems, w))
        throw ArgumentError("subset_sum_R: W must be a subset of B");
    if (int(w.size()) > q.width())
        throw ArgumentError("subset_sum_R: |W| exceeds the width");

    double aw = 1.0;
    for (const Element& e : w) aw *= q.coeff(e);
    if (aw == 0.0) return 0.0;

    std::vector<double> rest;
    rest.reserve(b.elems.size());
    for (const Element& e : b.elems)
        if (!std::binary_search(w.begin(), w.end(), e)) rest.push_back(q.coeff(e));

    const int m = q.width() - int(w.size());
    return aw * elementary_symmetric(rest, m) * std::exp(-q.ln_choose_t_d());
}

} // namespace pra
