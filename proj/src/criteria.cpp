#include "pra/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "pra/mathutil.hpp"

namespace pra {

namespace {

struct SupportEntry {
    ElementSet set;
    double q;
};

// e_{d-1} over the values excluding index `skip`, from the full table,
// via the subtraction recurrence.
double e_without(const std::vector<double>& e, double x, int m) {
    double v = e[0];
    for (int k = 1; k <= m; ++k) v = e[size_t(k)] - x * v;
    return std::max(v, 0.0);
}

LabelCharges width_charges(const WidthHittingSet& q, const Instance& inst) {
    const auto& lam = *inst.lambda;
    LabelCharges out;
    out.Gi.assign(size_t(inst.num_vars()), 0.0);
    out.Gij.resize(size_t(inst.num_vars()));
    for (int i = 0; i < inst.num_vars(); ++i)
        out.Gij[size_t(i)].assign(size_t(inst.domain_sizes[size_t(i)]), 0.0);

    // Variable-distinct supported sets make G an elementary symmetric
    // polynomial in the per-variable masses mu_i.
    auto by_var = q.mu_by_var(lam);
    std::vector<double> mus;
    mus.reserve(by_var.size());
    for (auto& [var, m] : by_var) mus.push_back(m);

    const int d = q.width();
    const double scale = std::exp(-q.ln_choose_t_d());
    std::vector<double> e = elementary_symmetric_all(mus, d);
    out.G = e[size_t(d)] * scale;

    // G_i = mu_i * e_{d-1}(others); G_ij proportional to a_ij lambda_ij.
    std::vector<double> ewo(by_var.size());
    for (size_t u = 0; u < by_var.size(); ++u)
        ewo[u] = e_without(e, mus[u], d - 1) * scale;
    size_t u = 0;
    for (const auto& [elem, a] : q.coeffs()) {
        while (by_var[u].first != elem.var) ++u;
        double gij = a * lam.at(elem.var, elem.value) * ewo[u];
        out.Gij[size_t(elem.var)][size_t(elem.value)] += gij;
        out.Gi[size_t(elem.var)] += gij;
    }
    return out;
}

LabelCharges enumerated_charges(const HittingSet& q, const Instance& inst, int label,
                                size_t s_support_limit) {
    const auto& lam = *inst.lambda;
    LabelCharges out;
    out.Gi.assign(size_t(inst.num_vars()), 0.0);
    out.Gij.resize(size_t(inst.num_vars()));
    for (int i = 0; i < inst.num_vars(); ++i)
        out.Gij[size_t(i)].assign(size_t(inst.domain_sizes[size_t(i)]), 0.0);

    std::vector<SupportEntry> support;
    Kahan g;
    bool ok = q.enumerate_support([&](const ElementSet& y, double w) {
        double term = w * lam.power(y);
        g.add(term);
        for (const Element& e : y) {
            out.Gij[size_t(e.var)][size_t(e.value)] += term;
            out.Gi[size_t(e.var)] += term;
        }
        support.push_back({y, w});
    });
    if (!ok)
        throw UnsupportedQueryError(
            "label " + std::to_string(label) +
            ": hitting set supports neither enumeration nor closed-form charges");
    out.G = g.value();

    if (q.bowtie_null()) {
        out.S = 0.0;
    } else if (support.size() <= s_support_limit) {
        double best = 0.0;
        for (const auto& a : support) {
            Kahan row;
            for (const auto& b : support) {
                if (shares_variable(a.set, b.set)) continue;
                if (inst.family.pair_in_event(label, a.set, b.set))
                    row.add(b.q * lam.power(b.set));
            }
            best = std::max(best, row.value());
        }
        out.S = best;
    } else {
        out.S = out.G; // S_k <= G always
        out.exact = false;
    }
    return out;
}

} // namespace

bool ChargeReport::all_S_below_one() const {
    for (const auto& l : labels)
        if (!(l.S < 1.0)) return false;
    return true;
}

ChargeReport charges(const Instance& inst, size_t s_support_limit) {
    if (!inst.lambda) throw ArgumentError("charges: instance has no lambda vector");
    const auto& lam = *inst.lambda;

    ChargeReport report;
    report.lambda.resize(size_t(inst.num_vars()));
    report.lambda_i.resize(size_t(inst.num_vars()));
    for (int i = 0; i < inst.num_vars(); ++i) {
        report.lambda[size_t(i)] = lam.row(i);
        report.lambda_i[size_t(i)] = lam.var_total(i);
    }

    for (int k = 0; k < inst.family.label_count(); ++k) {
        const HittingSet& q = inst.hitting_set(k);
        LabelCharges lc;
        if (const auto* wq = dynamic_cast<const WidthHittingSet*>(&q)) {
            lc = width_charges(*wq, inst);
            if (wq->bowtie_null()) {
                lc.S = 0.0;
            } else {
                // Exact S needs the atomic enumeration; fall back to G.
                bool have_enum = inst.family.enumerated(k) != nullptr;
                size_t ground = wq->coeffs().size();
                if (have_enum && ground <= 24) {
                    lc = enumerated_charges(q, inst, k, s_support_limit);
                } else {
                    lc.S = lc.G;
                    lc.exact = false;
                }
            }
        } else {
            lc = enumerated_charges(q, inst, k, s_support_limit);
        }
        report.labels.push_back(std::move(lc));
    }

    report.Hij.resize(size_t(inst.num_vars()));
    report.Hi.assign(size_t(inst.num_vars()), 0.0);
    report.slack.assign(size_t(inst.num_vars()), 0.0);
    for (int i = 0; i < inst.num_vars(); ++i) {
        report.Hij[size_t(i)].assign(size_t(inst.domain_sizes[size_t(i)]), 0.0);
        for (const auto& lc : report.labels) {
            if (lc.S >= 1.0) continue; // slack undefined; criterion checks catch this
            for (int j = 0; j < inst.domain_sizes[size_t(i)]; ++j)
                report.Hij[size_t(i)][size_t(j)] += lc.Gij[size_t(i)][size_t(j)] / (1.0 - lc.S);
        }
        for (double h : report.Hij[size_t(i)]) report.Hi[size_t(i)] += h;
        report.slack[size_t(i)] = report.lambda_i[size_t(i)] - report.Hi[size_t(i)];
    }
    return report;
}

CriterionResult check_lambda_criterion(const Instance& inst, CriterionVariant variant) {
    return check_lambda_criterion(inst, variant, charges(inst));
}

CriterionResult check_lambda_criterion(const Instance& inst, CriterionVariant variant,
                                       const ChargeReport& report) {
    CriterionResult res;
    const int n = inst.num_vars();

    if (variant == CriterionVariant::A) {
        for (const auto& lc : report.labels)
            if (!(lc.S < 1.0)) {
                res.precondition_ok = false;
                res.reason = "some S_k >= 1";
                return res;
            }
    } else if (variant == CriterionVariant::B) {
        for (const auto& lc : report.labels)
            if (!(lc.G < 1.0)) {
                res.precondition_ok = false;
                res.reason = "some G(Q_k, lambda) >= 1";
                return res;
            }
    } else {
        for (size_t k = 0; k < report.labels.size(); ++k) {
            bool structurally_null = inst.hitting_set(int(k)).bowtie_null();
            bool computed_null = report.labels[k].exact && report.labels[k].S == 0.0;
            if (!structurally_null && !computed_null) {
                res.precondition_ok = false;
                res.reason = "bowtie relations not known to be null for label " + std::to_string(k);
                return res;
            }
        }
    }

    res.slack.resize(size_t(n));
    res.satisfied = true;
    for (int i = 0; i < n; ++i) {
        double rhs = 1.0;
        for (const auto& lc : report.labels) {
            double gi = lc.Gi[size_t(i)];
            switch (variant) {
                case CriterionVariant::A: rhs += gi / (1.0 - lc.S); break;
                case CriterionVariant::B: rhs += gi / (1.0 - lc.G); break;
                case CriterionVariant::C: rhs += gi; break;
            }
        }
        double li = report.lambda_i[size_t(i)];
        res.slack[size_t(i)] = li - rhs;
        // Non-strict inequality; ties count as satisfied.
        if (li < rhs - kRelTolerance * std::max(1.0, std::abs(rhs))) res.satisfied = false;
    }
    return res;
}

bool check_symmetric(double p, long long d) {
    if (p < 0.0 || p > 1.0) throw ArgumentError("check_symmetric: P must lie in [0,1]");
    if (d < 1) throw ArgumentError("check_symmetric: D must be >= 1");
    double v = std::exp(1.0) * p * double(d);
    return v <= 1.0 + kRelTolerance;
}

double WeightingFunction::at(const ElementSet& y, int k) const {
    auto it = values.find({y, k});
    return it == values.end() ? 0.0 : it->second;
}

double WeightingFunction::set_sum(const ElementSet& y) const {
    double s = 0.0;
    for (const auto& [key, v] : values)
        if (key.first == y) s += v;
    return s;
}

bool check_main_a(const Instance& inst, const WeightingFunction& mu, size_t support_limit) {
    std::vector<SupportedPair> support;
    for (int k = 0; k < inst.family.label_count(); ++k) {
        bool ok = inst.hitting_set(k).enumerate_support(
            [&](const ElementSet& y, double) { support.push_back({y, k}); });
        if (!ok) throw UnsupportedQueryError("check_main_a: support not enumerable");
    }
    if (support.size() > support_limit)
        throw ArgumentError("check_main_a: support too large (" + std::to_string(support.size()) +
                            " pairs)");

    for (const auto& target : support) {
        const ElementSet& y = target.set;
        const int k = target.label;
        double qy = inst.hitting_set(k).weight(y);
        double py = inst.probabilities.power(y);

        // Candidate members: pairs related to (y, k).
        std::vector<SupportedPair> cand;
        for (const auto& other : support) {
            Relation r = relate(other.set, y, k, inst.family);
            if (r == Relation::Sim || (r == Relation::Bowtie && other.label == k))
                cand.push_back(other);
        }
        if (cand.size() > 24)
            throw ArgumentError("check_main_a: too many neighbor candidates");

        Kahan total;
        const uint64_t subsets = uint64_t(1) << cand.size();
        std::vector<SupportedPair> t;
        for (uint64_t mask = 0; mask < subsets; ++mask) {
            t.clear();
            for (size_t i = 0; i < cand.size(); ++i)
                if (mask & (uint64_t(1) << i)) t.push_back(cand[i]);
            if (!is_neighbor_set(t, y, k, inst.family)) continue;
            double prod = 1.0;
            for (const auto& m : t) prod *= mu.at(m.set, m.label);
            total.add(prod);
        }
        double rhs = py * qy * total.value();
        double lhs = mu.at(y, k);
        if (lhs < rhs - kRelTolerance * std::max(1.0, rhs)) return false;
    }
    return true;
}

double ch(double mu, double t) {
    if (!(mu > 0.0)) throw ArgumentError("ch: mu must be positive");
    if (t < mu) return 1.0;
    if (t == mu) return 1.0;
    return std::exp((t - mu) + t * std::log(mu / t));
}

double width_bound(double mu, double t, int d) {
    if (!(mu > 0.0) || mu > t) throw ArgumentError("width_bound: requires 0 < mu <= t");
    if (d < 0 || double(d) > t) throw ArgumentError("width_bound: requires 0 <= d <= t");
    if (d == 0) return 1.0;
    return std::exp(double(d) * std::log(mu) - std::lgamma(double(d) + 1.0) - ln_gen_binomial(t, d));
}

int default_width(double mu, double t) { return int(std::ceil(t - mu)); }

double chern_sq_r(double y) {
    if (!(y > 0.0)) throw ArgumentError("chern_sq_r: y must be positive");
    return ((1.0 + y) * std::log1p(y) - y) / (y * y);
}

std::vector<double> csp_rhs(const std::vector<double>& c, double D, double eps) {
    if (!(D >= 1.0)) throw ArgumentError("csp_rhs: D must be >= 1");
    if (!(eps > 0.0) || eps > 1.0 / (D + 1.0))
        throw ArgumentError("csp_rhs: requires 0 < eps <= 1/(D+1)");
    const double delta = std::log(1.0 / eps);
    std::vector<double> b(c.size());
    for (size_t k = 0; k < c.size(); ++k) {
        double ck = c[k];
        if (!(ck >= 1.0)) throw ArgumentError("csp_rhs: every c_k must be >= 1");
        if (ck <= delta) {
            b[k] = 100.0 * delta / (1.0 + std::log(delta / ck));
        } else if (ck < 1.0 / (eps * eps)) {
            b[k] = ck * (1.0 + eps) + 10.0 * std::sqrt(ck * std::log((D + 1.0) / (ck * eps * eps)));
        } else {
            b[k] = ck * (1.0 + eps) + 10.0 * std::sqrt(ck * std::log(D + 1.0));
        }
    }
    return b;
}

CspConditionReport csp_check_conditions(const std::vector<double>& c, const std::vector<double>& b,
                                        double D, double eps) {
    if (b.size() != c.size()) throw ArgumentError("csp_check_conditions: size mismatch");
    CspConditionReport rep;
    rep.c1_ok.resize(c.size());
    rep.c2_ok.resize(c.size());
    rep.ch_value.resize(c.size());
    for (size_t k = 0; k < c.size(); ++k) {
        double mu = c[k] * (1.0 + eps);
        double chv = ch(mu, b[k]);
        rep.ch_value[k] = chv;
        double lhs1 = ((b[k] + 1.0) / mu - 1.0) * chv;
        rep.c1_ok[k] = lhs1 <= eps / (4.0 * D) + 1e-15;
        rep.c2_ok[k] = chv <= 0.5 + 1e-15;
        if (!rep.c1_ok[k] || !rep.c2_ok[k]) rep.ok = false;
    }
    return rep;
}

double event_prob_upper(const AtomicEvent& e, const LambdaVector& lam) { return lam.power(e.elems); }

double event_prob_bound_mu(const AtomicEvent& e, const Instance& inst,
                           const WeightingFunction& mu, size_t tight_limit) {
    // Distinct supported sets SIM-related to E, with their summed mu(Y).
    std::map<ElementSet, double> related;
    for (int k = 0; k < inst.family.label_count(); ++k) {
        bool ok = inst.hitting_set(k).enumerate_support([&](const ElementSet& y, double) {
            if (shares_variable(y, e.elems)) related.emplace(y, -1.0);
        });
        if (!ok) throw UnsupportedQueryError("event_prob_bound_mu: support not enumerable");
    }
    for (auto& [y, v] : related) v = mu.set_sum(y);

    const double pe = inst.probabilities.power(e.elems);
    if (related.size() > tight_limit) {
        double prod = 1.0;
        for (const auto& [y, v] : related) prod *= 1.0 + v;
        return pe * prod;
    }

    std::vector<const ElementSet*> sets;
    std::vector<double> mus;
    for (const auto& [y, v] : related) {
        sets.push_back(&y);
        mus.push_back(v);
    }
    // Sum over subsets whose members are pairwise variable-disjoint.
    Kahan total;
    const uint64_t count = uint64_t(1) << sets.size();
    for (uint64_t mask = 0; mask < count; ++mask) {
        bool strict = true;
        double prod = 1.0;
        for (size_t a = 0; a < sets.size() && strict; ++a) {
            if (!(mask & (uint64_t(1) << a))) continue;
            prod *= mus[a];
            for (size_t b = a + 1; b < sets.size(); ++b)
                if ((mask & (uint64_t(1) << b)) && shares_variable(*sets[a], *sets[b])) {
                    strict = false;
                    break;
                }
        }
        if (strict) total.add(prod);
    }
    return pe * total.value();
}

SingletonBounds singleton_bounds(int var, const std::vector<int>& values,
                                 const ChargeReport& report) {
    SingletonBounds out;
    const auto& lam_row = report.lambda[size_t(var)];
    const auto& h_row = report.Hij[size_t(var)];
    double lam_j = 0.0, h_j = 0.0;
    for (int j : values) {
        lam_j += lam_row[size_t(j)];
        h_j += h_row[size_t(j)];
    }
    const double li = report.lambda_i[size_t(var)];
    const double hi = report.Hi[size_t(var)];

    double den_up = li - hi + h_j;
    double den_lo = li - h_j;
    if (!(den_up > 0.0) || !(den_lo > 0.0)) {
        out.ok = false;
        out.reason = "nonpositive denominator (criterion slack missing)";
        return out;
    }
    out.upper = lam_j / den_up;
    out.lower = (lam_j - h_j) / den_lo;
    return out;
}

} // namespace pra
