#include "pra/packing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pra/mathutil.hpp"
#include "pra/parallel.hpp"

namespace pra {

double PackingSystem::column_l1() const {
    std::map<Element, double> col;
    for (const auto& row : rows)
        for (const auto& [e, a] : row) col[e] += a;
    double best = 0.0;
    for (auto& [e, s] : col) best = std::max(best, s);
    return std::max(best, 1.0); // D >= 1 by convention
}

int PackingSystem::column_l0() const {
    std::map<Element, int> col;
    for (const auto& row : rows)
        for (const auto& [e, a] : row)
            if (a > 0.0) col[e] += 1;
    int best = 0;
    for (auto& [e, s] : col) best = std::max(best, s);
    return best;
}

double PackingSystem::row_value(int k, const std::vector<int>& assignment) const {
    double sum = 0.0;
    for (const auto& [e, a] : rows[size_t(k)])
        if (assignment[size_t(e.var)] == e.value) sum += a;
    return sum;
}

double PackingSystem::row_fractional(int k) const {
    double sum = 0.0;
    for (const auto& [e, a] : rows[size_t(k)]) sum += a * z[size_t(e.var)][size_t(e.value)];
    return sum;
}

std::vector<Diagnostic> PackingSystem::validate() const {
    std::vector<Diagnostic> out;
    if (int(z.size()) != num_vars())
        out.push_back({"z-shape", "fractional solution does not match variable count"});
    for (int i = 0; i < num_vars() && i < int(z.size()); ++i) {
        if (int(z[size_t(i)].size()) != domain_sizes[size_t(i)]) {
            out.push_back({"z-shape", "z row " + std::to_string(i) + " mismatched"});
            continue;
        }
        double sum = 0.0;
        for (double v : z[size_t(i)]) {
            if (v < 0.0 || v > 1.0) out.push_back({"z-range", "z entry out of [0,1]"});
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-7)
            out.push_back({"z-assignment", "z of variable " + std::to_string(i) +
                                               " sums to " + std::to_string(sum)});
    }
    for (int k = 0; k < num_constraints(); ++k) {
        for (const auto& [e, a] : rows[size_t(k)]) {
            if (a < 0.0 || a > 1.0)
                out.push_back({"coefficient-range", "a entry of row " + std::to_string(k) +
                                                        " outside [0,1]"});
            if (e.var < 0 || e.var >= num_vars() || e.value < 0 ||
                e.value >= domain_sizes[size_t(e.var)])
                out.push_back({"element-range", "row " + std::to_string(k) +
                                                    " references an unknown element"});
        }
        if (k < int(c.size()) && !z.empty() && row_fractional(k) > c[size_t(k)] + 1e-9)
            out.push_back({"fractional-violation",
                           "z violates fractional constraint " + std::to_string(k)});
    }
    if (int(c.size()) != num_constraints())
        out.push_back({"c-shape", "fractional RHS does not match constraint count"});
    return out;
}

namespace {

// Separation oracle for one packing row: streams the current sum and
// reports the set of true contributing elements when it reaches b_k.
class RowOracle final : public LabelOracle {
public:
    RowOracle(const PackingSystem& sys, int k, double threshold)
        : sys_(sys), k_(k), threshold_(threshold) {}

    std::optional<AtomicEvent> find_violated(const std::vector<int>& assignment) const override {
        double sum = 0.0;
        for (const auto& [e, a] : sys_.rows[size_t(k_)])
            if (a > 0.0 && assignment[size_t(e.var)] == e.value) sum += a;
        if (sum <= threshold_ + 1e-12) return std::nullopt;
        ElementSet b;
        for (const auto& [e, a] : sys_.rows[size_t(k_)])
            if (a > 0.0 && assignment[size_t(e.var)] == e.value) b.push_back(e);
        return AtomicEvent(make_element_set(std::move(b)));
    }

    std::vector<int> dependency_vars() const override {
        std::vector<int> vars;
        for (const auto& [e, a] : sys_.rows[size_t(k_)])
            if (a > 0.0) vars.push_back(e.var);
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        return vars;
    }

private:
    const PackingSystem& sys_;
    int k_;
    double threshold_;
};

} // namespace

Instance make_packing_instance(const PackingSystem& sys, const std::vector<double>& b,
                               double eps) {
    if (int(b.size()) != sys.num_constraints())
        throw ArgumentError("make_packing_instance: b size mismatch");

    Instance inst;
    inst.domain_sizes = sys.domain_sizes;
    std::vector<std::vector<double>> lam(size_t(sys.num_vars()), std::vector<double>{});
    for (int i = 0; i < sys.num_vars(); ++i) {
        lam[size_t(i)].resize(size_t(sys.domain_sizes[size_t(i)]));
        for (int j = 0; j < sys.domain_sizes[size_t(i)]; ++j)
            lam[size_t(i)][size_t(j)] = (1.0 + eps) * sys.z[size_t(i)][size_t(j)];
    }
    inst.lambda = LambdaVector(std::move(lam));
    inst.probabilities = inst.lambda->derive_probabilities();

    BadEventFamily fam;
    for (int k = 0; k < sys.num_constraints(); ++k) {
        fam.add_label(std::make_unique<RowOracle>(sys, k, b[size_t(k)]));
        double mu = (1.0 + eps) * sys.c[size_t(k)];
        int d = std::max(1, int(std::ceil(b[size_t(k)] - mu)));
        if (double(d) > b[size_t(k)]) d = std::max(1, int(std::floor(b[size_t(k)])));
        std::vector<std::pair<Element, double>> coeffs;
        for (const auto& [e, a] : sys.rows[size_t(k)])
            if (a > 0.0) coeffs.push_back({e, a});
        inst.hitting.push_back(std::make_shared<WidthHittingSet>(std::move(coeffs),
                                                                 b[size_t(k)], d));
    }
    inst.family = std::move(fam);
    return inst;
}

RoundResult round_packing(const PackingSystem& sys, double eps, uint64_t seed) {
    auto diags = sys.validate();
    if (!diags.empty()) throw InputError("round_packing: " + diags.front().message);

    const double d_col = sys.column_l1();
    if (eps <= 0.0) eps = 1.0 / (d_col + 1.0);

    RoundResult out;
    out.eps = eps;
    out.b = sys.b ? *sys.b : csp_rhs(sys.c, d_col, eps);
    auto check = csp_check_conditions(sys.c, out.b, d_col, eps);
    if (!check.ok) {
        std::string detail;
        for (size_t k = 0; k < sys.c.size(); ++k)
            if (!check.c1_ok[k] || !check.c2_ok[k]) {
                detail = "constraint " + std::to_string(k) + " fails " +
                         (check.c1_ok[k] ? "(C2)" : "(C1)");
                break;
            }
        throw CriterionError("round_packing: " + detail);
    }

    Instance inst = make_packing_instance(sys, out.b, eps);
    EngineConfig cfg;
    cfg.seed = seed;
    RunResult res = run(inst, cfg);
    out.assignment = res.assignment;
    out.status = res.status;
    out.resamples = res.resample_count;
    return out;
}

DiscrepancyResult discrepancy_vector(const std::vector<std::vector<double>>& y, uint64_t seed) {
    const int rows = int(y.size());
    if (rows == 0) throw InputError("discrepancy: empty matrix");
    const int n = int(y[0].size());
    for (const auto& r : y) {
        if (int(r.size()) != n) throw InputError("discrepancy: ragged matrix");
        for (double v : r)
            if (std::abs(v) > 1.0 + 1e-12)
                throw InputError("discrepancy: entries must lie in [-1,1]");
    }

    double R = 1.0, D = 1.0;
    std::vector<double> row_norm(size_t(rows), 0.0);
    for (int k = 0; k < rows; ++k)
        for (double v : y[size_t(k)]) row_norm[size_t(k)] += std::abs(v);
    for (double rn : row_norm) R = std::max(R, rn);
    for (int i = 0; i < n; ++i) {
        double cn = 0.0;
        for (int k = 0; k < rows; ++k) cn += std::abs(y[size_t(k)][size_t(i)]);
        D = std::max(D, cn);
    }

    const double dd = std::log(D + 1.0);
    const double drop_cut = 100.0 * std::sqrt(R * dd);

    DiscrepancyResult out;
    out.retained.assign(size_t(rows), 0);
    out.dropped_bound = drop_cut;

    // Variables take value 0 (-1) or 1 (+1); per retained row, two
    // constraints bound the agreeing and the disagreeing mass, giving
    // |Y_k . v| <= 2 b_k - |Y_k|.
    PackingSystem sys;
    sys.domain_sizes.assign(size_t(n), 2);
    sys.z.assign(size_t(n), {0.5, 0.5});
    std::vector<int> row_of(size_t(rows), -1);
    for (int k = 0; k < rows; ++k) {
        if (row_norm[size_t(k)] <= drop_cut) continue;
        row_of[size_t(k)] = sys.num_constraints();
        std::vector<std::pair<Element, double>> agree, disagree;
        for (int i = 0; i < n; ++i) {
            double v = y[size_t(k)][size_t(i)];
            if (v == 0.0) continue;
            int sign_value = v > 0.0 ? 1 : 0;
            agree.push_back({Element{i, sign_value}, std::abs(v)});
            disagree.push_back({Element{i, 1 - sign_value}, std::abs(v)});
        }
        sys.rows.push_back(std::move(agree));
        sys.rows.push_back(std::move(disagree));
        sys.c.push_back(row_norm[size_t(k)] / 2.0);
        sys.c.push_back(row_norm[size_t(k)] / 2.0);
        out.retained[size_t(k)] = 1;
    }

    std::vector<int> assignment(size_t(n), 0);
    if (sys.num_constraints() > 0) {
        RoundResult rr = round_packing(sys, -1.0, seed);
        assignment = rr.assignment;
        out.status = rr.status;
        out.resamples = rr.resamples;
        for (int k = 0; k < rows; ++k)
            if (out.retained[size_t(k)]) {
                double bk = rr.b[size_t(row_of[size_t(k)])];
                out.retained_bound =
                    std::max(out.retained_bound, 2.0 * bk - row_norm[size_t(k)]);
            }
    } else {
        // Everything dropped: any coloring obeys the trivial bound.
        Rng rng(seed);
        for (int i = 0; i < n; ++i) assignment[size_t(i)] = int(rng.uniform_int(2));
    }

    out.signs.resize(size_t(n));
    for (int i = 0; i < n; ++i) out.signs[size_t(i)] = assignment[size_t(i)] == 1 ? 1 : -1;
    for (int k = 0; k < rows; ++k) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += y[size_t(k)][size_t(i)] * out.signs[size_t(i)];
        out.max_abs = std::max(out.max_abs, std::abs(dot));
    }
    return out;
}

MultidimResult multidim_schedule(const std::vector<std::vector<std::vector<double>>>& loads,
                                 const std::vector<double>& targets,
                                 const std::optional<std::vector<std::vector<double>>>& z_in,
                                 uint64_t seed) {
    const int n = int(loads.size());
    if (n == 0) throw InputError("multidim: no jobs");
    const int m = int(loads[0].size());
    const int dims = int(targets.size());
    for (const auto& job : loads) {
        if (int(job.size()) != m) throw InputError("multidim: ragged load tensor");
        for (const auto& cell : job)
            if (int(cell.size()) != dims) throw InputError("multidim: ragged load tensor");
    }
    for (double t : targets)
        if (!(t > 0.0)) throw InputError("multidim: targets must be positive");

    // Filter: an assignment exceeding some target dimension is forced out.
    auto filtered = [&](int i, int j) {
        for (int l = 0; l < dims; ++l)
            if (loads[size_t(i)][size_t(j)][size_t(l)] > targets[size_t(l)]) return true;
        return false;
    };

    MultidimResult out;
    std::vector<std::vector<double>> z;
    if (z_in) {
        z = *z_in;
    } else {
        z.assign(size_t(n), std::vector<double>(size_t(m), 0.0));
        for (int i = 0; i < n; ++i) {
            int open = 0;
            for (int j = 0; j < m; ++j)
                if (!filtered(i, j)) ++open;
            if (open == 0)
                throw InputError("multidim: job " + std::to_string(i) +
                                 " exceeds a target on every machine");
            for (int j = 0; j < m; ++j)
                if (!filtered(i, j)) z[size_t(i)][size_t(j)] = 1.0 / double(open);
        }
    }

    PackingSystem sys;
    sys.domain_sizes.assign(size_t(n), m);
    sys.z = z;
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < dims; ++l) {
            std::vector<std::pair<Element, double>> row;
            for (int i = 0; i < n; ++i) {
                double a = loads[size_t(i)][size_t(j)][size_t(l)] / targets[size_t(l)];
                if (a > 0.0 && z[size_t(i)][size_t(j)] > 0.0) {
                    if (a > 1.0 + 1e-12) a = 1.0; // filtered pairs have z = 0 anyway
                    row.push_back({Element{i, j}, a});
                }
            }
            sys.rows.push_back(std::move(row));
            sys.c.push_back(1.0);
        }

    // Report an infeasible z instead of running.
    for (int k = 0; k < sys.num_constraints(); ++k)
        if (sys.row_fractional(k) > 1.0 + 1e-9) {
            out.z_feasible = false;
            out.z_violation = "scaled constraint " + std::to_string(k) + " has fractional load " +
                              std::to_string(sys.row_fractional(k));
            return out;
        }
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (double v : z[size_t(i)]) sum += v;
        if (std::abs(sum - 1.0) > 1e-7) {
            out.z_feasible = false;
            out.z_violation = "z of job " + std::to_string(i) + " sums to " + std::to_string(sum);
            return out;
        }
        for (int j = 0; j < m; ++j)
            if (filtered(i, j) && z[size_t(i)][size_t(j)] > 0.0) {
                out.z_feasible = false;
                out.z_violation = "z assigns mass to filtered pair (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")";
                return out;
            }
    }

    RoundResult rr = round_packing(sys, -1.0, seed);
    out.assignment = rr.assignment;
    out.status = rr.status;
    out.resamples = rr.resamples;
    out.b = rr.b.empty() ? 0.0 : rr.b[0];

    out.loads.assign(size_t(m), std::vector<double>(size_t(dims), 0.0));
    for (int i = 0; i < n; ++i) {
        int j = out.assignment[size_t(i)];
        for (int l = 0; l < dims; ++l)
            out.loads[size_t(j)][size_t(l)] += loads[size_t(i)][size_t(j)][size_t(l)];
    }
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < dims; ++l) {
            double bk = rr.b[size_t(j * dims + l)];
            if (out.loads[size_t(j)][size_t(l)] > bk * targets[size_t(l)] + 1e-9)
                out.within_bound = false;
        }
    return out;
}

HardInstance mt_hard_instance(int m, double R, uint64_t seed) {
    if (m < 2) throw ArgumentError("mt_hard_instance: m must be >= 2");
    if (R < 1.0) throw ArgumentError("mt_hard_instance: R must be >= 1");
    const int n = int(std::floor(R * double(m)));

    HardInstance out;
    out.m = m;
    Rng rng(seed);
    out.pi.assign(size_t(n), {});
    out.sys.domain_sizes.assign(size_t(n), m);
    out.sys.z.assign(size_t(n), std::vector<double>(size_t(m), 1.0 / double(m)));
    out.sys.rows.assign(size_t(m), {});
    out.sys.c.assign(size_t(m), R);

    for (int i = 0; i < n; ++i) {
        std::vector<int> perm(size_t(m), 0);
        for (int k = 0; k < m; ++k) perm[size_t(k)] = k;
        for (int k = m - 1; k > 0; --k)
            std::swap(perm[size_t(k)], perm[size_t(rng.uniform_int(uint64_t(k) + 1))]);
        out.pi[size_t(i)] = perm;
        for (int k = 0; k < m; ++k)
            out.sys.rows[size_t(k)].push_back({Element{i, perm[size_t(k)]}, 1.0});
    }
    return out;
}

CompareReport compare_mt_pra(int m, double R, double rprime, long long budget, int trials,
                             uint64_t seed) {
    if (rprime < R) throw ArgumentError("compare_mt_pra: requires R' >= R");
    CompareReport rep;
    rep.trials = trials;
    rep.mt_threshold = rprime;

    struct TrialOutcome {
        bool pra_ok = false, mt_ok = false;
        long long pra_steps = 0, mt_steps = 0;
        double pra_b = 0.0;
    };
    std::vector<TrialOutcome> outcomes =
        parallel_map<TrialOutcome>(size_t(trials), [&](size_t trial) {
            TrialOutcome o;
            HardInstance hard = mt_hard_instance(m, R, derive_seed(seed, trial * 2));

            // PRA side: width sets against the derived b.
            {
                PackingSystem sys = hard.sys;
                double d_col = sys.column_l1();
                double eps = 1.0 / (d_col + 1.0);
                std::vector<double> b = csp_rhs(sys.c, d_col, eps);
                o.pra_b = b[0];
                Instance inst = make_packing_instance(sys, b, eps);
                EngineConfig cfg;
                cfg.seed = derive_seed(seed, trial * 2 + 1);
                cfg.max_resamplings = budget;
                RunResult res = run(inst, cfg);
                o.pra_ok = res.status == RunStatus::Solved;
                o.pra_steps = res.resample_count;
            }
            // MT side: full resampling against threshold R'.
            {
                PackingSystem sys = hard.sys;
                std::vector<double> b(size_t(m), rprime);
                Instance inst = make_packing_instance(sys, b, 1.0 / (sys.column_l1() + 1.0));
                EngineConfig cfg;
                cfg.seed = derive_seed(seed, trial * 2 + 1);
                cfg.max_resamplings = budget;
                cfg.resample_scope = ResampleScope::FullDependency;
                RunResult res = run(inst, cfg);
                o.mt_ok = res.status == RunStatus::Solved;
                o.mt_steps = res.resample_count;
            }
            return o;
        });

    for (const auto& o : outcomes) {
        rep.pra_successes += o.pra_ok ? 1 : 0;
        rep.mt_successes += o.mt_ok ? 1 : 0;
        rep.pra_mean_resamples += double(o.pra_steps);
        rep.mt_mean_resamples += double(o.mt_steps);
        rep.pra_b = o.pra_b;
    }
    rep.pra_mean_resamples /= std::max(1, trials);
    rep.mt_mean_resamples /= std::max(1, trials);
    return rep;
}

} // namespace pra
