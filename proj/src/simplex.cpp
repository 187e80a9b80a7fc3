#include "pra/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "pra/common.hpp"

namespace pra {

namespace {

constexpr double kPivotEps = 1e-9;

// Tableau rows: m constraint rows + objective row. Columns: n structural,
// m surplus, m artificial, rhs.
struct Tableau {
    int m, n;
    int cols;
    std::vector<double> t; // (m+1) x cols
    std::vector<int> basis;

    double& at(int r, int c) { return t[size_t(r) * size_t(cols) + size_t(c)]; }
    double get(int r, int c) const { return t[size_t(r) * size_t(cols) + size_t(c)]; }

    void pivot(int pr, int pc) {
        double pv = at(pr, pc);
        double inv = 1.0 / pv;
        for (int c = 0; c < cols; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (int r = 0; r <= m; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (int c = 0; c < cols; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis[size_t(pr)] = pc;
    }

    // Dantzig rule with a Bland fallback once stalling is detected.
    int entering(bool bland) const {
        if (bland) {
            for (int c = 0; c < cols - 1; ++c)
                if (get(m, c) < -kPivotEps) return c;
            return -1;
        }
        int best = -1;
        double bestv = -kPivotEps;
        for (int c = 0; c < cols - 1; ++c) {
            double v = get(m, c);
            if (v < bestv) {
                bestv = v;
                best = c;
            }
        }
        return best;
    }

    int leaving(int pc) const {
        int best = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < m; ++r) {
            double a = get(r, pc);
            if (a <= kPivotEps) continue;
            double ratio = get(r, cols - 1) / a;
            if (best < 0 || ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && basis[size_t(r)] < basis[size_t(best)])) {
                best = r;
                best_ratio = ratio;
            }
        }
        return best;
    }
};

} // namespace

LpResult solve_lp_min(const std::vector<std::vector<double>>& a, const std::vector<double>& rhs,
                      const std::vector<double>& cost, int max_iterations) {
    const int m = int(a.size());
    const int n = int(cost.size());
    LpResult out;
    if (m == 0) {
        out.optimal = true;
        out.x.assign(size_t(n), 0.0);
        return out;
    }

    Tableau tb;
    tb.m = m;
    tb.n = n;
    tb.cols = n + 2 * m + 1;
    tb.t.assign(size_t(m + 1) * size_t(tb.cols), 0.0);
    tb.basis.resize(size_t(m));

    // Rows are normalized so rhs >= 0 (they already are for covering LPs,
    // but keep it general).
    for (int r = 0; r < m; ++r) {
        double sign = rhs[size_t(r)] < 0.0 ? -1.0 : 1.0;
        for (int c = 0; c < n; ++c) tb.at(r, c) = sign * a[size_t(r)][size_t(c)];
        tb.at(r, n + r) = -sign;           // surplus for >=
        tb.at(r, n + m + r) = 1.0;         // artificial
        tb.at(r, tb.cols - 1) = sign * rhs[size_t(r)];
        tb.basis[size_t(r)] = n + m + r;
    }

    // Phase 1: minimize the artificial sum.
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < tb.cols; ++c)
            if (c < n + m || c == tb.cols - 1) tb.at(m, c) -= tb.at(r, c);

    int iter = 0;
    int stall = 0;
    double last_obj = 0.0;
    auto run_phase = [&](bool phase1) -> bool {
        while (true) {
            if (++iter > max_iterations) return false;
            bool bland = stall > 2 * (m + 50);
            int pc = tb.entering(bland);
            if (pc < 0) return true;
            int pr = tb.leaving(pc);
            if (pr < 0) return !phase1 ? false : true; // unbounded
            tb.pivot(pr, pc);
            double obj = tb.get(m, tb.cols - 1);
            if (std::abs(obj - last_obj) < 1e-13) ++stall;
            else stall = 0;
            last_obj = obj;
        }
    };

    if (!run_phase(true)) return out; // iteration cap
    if (tb.get(m, tb.cols - 1) < -1e-7) {
        out.infeasible = true;
        out.iterations = iter;
        return out;
    }

    // Drive any artificial variables out of the basis where possible.
    for (int r = 0; r < m; ++r) {
        if (tb.basis[size_t(r)] < n + m) continue;
        for (int c = 0; c < n + m; ++c)
            if (std::abs(tb.get(r, c)) > kPivotEps) {
                tb.pivot(r, c);
                break;
            }
    }

    // Phase 2 objective: rebuild the cost row over the current basis.
    for (int c = 0; c < tb.cols; ++c) tb.at(m, c) = 0.0;
    for (int c = 0; c < n; ++c) tb.at(m, c) = cost[size_t(c)];
    // Artificials are fixed out of play.
    for (int c = n + m; c < tb.cols - 1; ++c) tb.at(m, c) = 1e30;
    for (int r = 0; r < m; ++r) {
        int bc = tb.basis[size_t(r)];
        double f = tb.get(m, bc);
        if (f == 0.0) continue;
        for (int c = 0; c < tb.cols; ++c) tb.at(m, c) -= f * tb.at(r, c);
    }

    stall = 0;
    last_obj = tb.get(m, tb.cols - 1);
    if (!run_phase(false)) {
        // Either unbounded (impossible for covering problems with
        // nonnegative costs) or out of iterations.
        out.iterations = iter;
        return out;
    }

    out.optimal = true;
    out.iterations = iter;
    out.x.assign(size_t(n), 0.0);
    for (int r = 0; r < m; ++r)
        if (tb.basis[size_t(r)] < n) out.x[size_t(tb.basis[size_t(r)])] = tb.get(r, tb.cols - 1);
    out.objective = 0.0;
    for (int c = 0; c < n; ++c) out.objective += cost[size_t(c)] * out.x[size_t(c)];
    return out;
}

} // namespace pra
