#include "pra/routing.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <fstream>
#include <sstream>

#include "pra/mathutil.hpp"
#include "pra/simplex.hpp"

namespace pra {

// ----------------------------------------------------------------------
// Instance statistics

std::vector<Diagnostic> RoutingInstance::validate() const {
    std::vector<Diagnostic> out;
    for (size_t e = 0; e < edges.size(); ++e) {
        auto [u, v] = edges[e];
        if (u < 0 || u >= num_vertices || v < 0 || v >= num_vertices || u == v)
            out.push_back({"edge-range", "edge " + std::to_string(e) + " malformed"});
    }
    if (!out.empty()) return out;
    for (size_t p = 0; p < packet_paths.size(); ++p) {
        const auto& path = packet_paths[p];
        if (path.empty()) {
            out.push_back({"empty-path", "packet " + std::to_string(p) + " has no edges"});
            continue;
        }
        std::vector<int> visited;
        int prev = -1;
        for (size_t idx = 0; idx < path.size(); ++idx) {
            int e = path[idx];
            if (e < 0 || e >= int(edges.size())) {
                out.push_back({"path-edge", "packet " + std::to_string(p) + " uses unknown edge"});
                break;
            }
            auto [u, v] = edges[size_t(e)];
            if (idx == 0) {
                if (path.size() > 1) {
                    auto [x, y] = edges[size_t(path[1])];
                    if (u == x || u == y) std::swap(u, v); // orient the first edge
                }
                visited.push_back(u);
                visited.push_back(v);
                prev = v;
            } else {
                if (v == prev) std::swap(u, v);
                if (u != prev) {
                    out.push_back({"path-connectivity",
                                   "packet " + std::to_string(p) + " breaks at edge index " +
                                       std::to_string(idx)});
                    break;
                }
                if (std::find(visited.begin(), visited.end(), v) != visited.end()) {
                    out.push_back({"path-simple", "packet " + std::to_string(p) +
                                                      " revisits vertex " + std::to_string(v)});
                    break;
                }
                visited.push_back(v);
                prev = v;
            }
        }
    }
    return out;
}

std::pair<long long, long long> congestion_dilation(const RoutingInstance& inst) {
    auto diags = inst.validate();
    if (!diags.empty()) throw InputError("routing instance: " + diags.front().message);
    std::vector<long long> per_edge(inst.edges.size(), 0);
    long long dilation = 0;
    for (const auto& path : inst.packet_paths) {
        dilation = std::max(dilation, (long long)path.size());
        for (int e : path) per_edge[size_t(e)]++;
    }
    long long congestion = 0;
    for (long long c : per_edge) congestion = std::max(congestion, c);
    return {std::max(congestion, 1LL), std::max(dilation, 1LL)};
}

InfeasibleSchedule initial_schedule(const RoutingInstance& inst) {
    InfeasibleSchedule sched;
    sched.packets.resize(inst.packet_paths.size());
    for (size_t p = 0; p < inst.packet_paths.size(); ++p) {
        long long t = 1;
        for (int e : inst.packet_paths[p]) sched.packets[p].push_back({e, t++});
        sched.length = std::max(sched.length, t - 1);
    }
    return sched;
}

long long interval_congestion(const InfeasibleSchedule& sched, long long window,
                              const RoutingInstance& inst) {
    if (window < 1) throw ArgumentError("interval_congestion: window must be >= 1");
    std::vector<std::vector<long long>> counts(inst.edges.size());
    for (auto& c : counts) c.assign(size_t(sched.length) + 2, 0);
    for (const auto& packet : sched.packets)
        for (const auto& tr : packet) counts[size_t(tr.edge)][size_t(tr.time)]++;
    long long best = 0;
    for (const auto& c : counts) {
        long long sum = 0;
        for (long long t = 1; t < (long long)c.size(); ++t) {
            sum += c[size_t(t)];
            if (t > window) sum -= c[size_t(t - window)];
            best = std::max(best, sum);
        }
    }
    return best;
}

bool delays_only(const InfeasibleSchedule& before, const InfeasibleSchedule& after) {
    if (before.packets.size() != after.packets.size()) return false;
    for (size_t p = 0; p < before.packets.size(); ++p) {
        if (before.packets[p].size() != after.packets[p].size()) return false;
        long long prev = 0;
        for (size_t i = 0; i < before.packets[p].size(); ++i) {
            if (before.packets[p][i].edge != after.packets[p][i].edge) return false;
            if (after.packets[p][i].time < before.packets[p][i].time) return false;
            if (after.packets[p][i].time <= prev) return false;
            prev = after.packets[p][i].time;
        }
    }
    return true;
}

// ----------------------------------------------------------------------
// Stage criteria

bool binomial_stage_ok(long long c_in, long long i, long long iprime, long long m,
                       long long c_out) {
    if (iprime < 1 || iprime >= i || m < 1) return false;
    double p = double(iprime) / double(i - iprime);
    double tail = binomial_upper_tail(c_in, std::min(p, 1.0), c_out);
    double dep = double(c_in) * double(m) * double(i) * double(i) + 1.0;
    return std::exp(1.0) * tail * dep < 1.0;
}

double width_stage_p(long long c_in, long long iprime, double alpha, int d, long long c_out) {
    if (d < 1 || d > c_out) return 2.0; // outside the admissible range
    double mu = double(c_in) * double(iprime) * alpha;
    if (mu <= 0.0) return 0.0;
    double lnp = double(d) * std::log(mu) - std::lgamma(double(d) + 1.0) -
                 ln_gen_binomial(double(c_out) + 1.0, d);
    return std::exp(lnp);
}

bool width_stage_ok(long long c_in, long long i, long long iprime, long long m, long long c_out,
                    int d, double alpha) {
    if (iprime < 1 || iprime >= i || m < 1 || alpha <= 0.0) return false;
    double p = width_stage_p(c_in, iprime, alpha, d, c_out);
    if (!(p < 1.0)) return false;
    double lhs = double(i - iprime) * alpha -
                 double(m) * double(i) * double(i) * double(d) * p / (double(c_in) * (1.0 - p));
    return lhs >= 1.0 - kRelTolerance;
}

// ----------------------------------------------------------------------
// Frame decomposition and oracles

namespace {

struct FrameJob {
    long long start = 1;
    long long f_used = 0;
    struct Var {
        int packet;
        std::vector<std::pair<int, long long>> transits; // (local edge, local time)
    };
    std::vector<Var> vars;
    std::vector<int> edge_ids;
    std::vector<std::vector<std::pair<int, long long>>> edge_transits; // (var, local time)
};

std::vector<FrameJob> split_frames(const InfeasibleSchedule& sched, long long frame_len) {
    long long num = std::max((sched.length + frame_len - 1) / frame_len, 1LL);
    std::vector<FrameJob> jobs{size_t(num)};
    for (size_t g = 0; g < jobs.size(); ++g) {
        jobs[g].start = (long long)g * frame_len + 1;
        jobs[g].f_used = std::min(frame_len, sched.length - (long long)g * frame_len);
    }
    std::vector<std::map<int, int>> edge_local(jobs.size());
    std::vector<std::map<int, int>> var_of_packet(jobs.size());
    for (size_t p = 0; p < sched.packets.size(); ++p) {
        for (const auto& tr : sched.packets[p]) {
            size_t g = size_t((tr.time - 1) / frame_len);
            FrameJob& job = jobs[g];
            auto [vit, vnew] = var_of_packet[g].try_emplace(int(p), int(job.vars.size()));
            if (vnew) job.vars.push_back({int(p), {}});
            auto [eit, enew] = edge_local[g].try_emplace(tr.edge, int(job.edge_ids.size()));
            if (enew) {
                job.edge_ids.push_back(tr.edge);
                job.edge_transits.emplace_back();
            }
            long long local = tr.time - job.start + 1;
            job.vars[size_t(vit->second)].transits.push_back({eit->second, local});
            job.edge_transits[size_t(eit->second)].push_back({vit->second, local});
        }
    }
    return jobs;
}

// Incremental violation tracking shared by the interval and 4-frame
// oracles. Windows are identified by (local edge, start); the violated
// set stays ordered so the scan order is deterministic.
class FrameBackendBase : public FamilyBackend {
public:
    FrameBackendBase(const FrameJob& job, long long span, int dmax)
        : job_(job), span_(span), dmax_(dmax) {
        counts_.assign(job_.edge_ids.size(), {});
        for (auto& c : counts_) c.assign(size_t(span_) + 1, 0);
    }

    int label_count() const override { return int(job_.edge_ids.size()) * window_count(); }

    std::optional<std::pair<AtomicEvent, int>> find_violated(
        const std::vector<int>& assignment) const override {
        sync(assignment);
        if (violated_.empty()) return std::nullopt;
        auto [e, start] = *violated_.begin();
        return std::make_pair(build_event(e, start), encode(e, start));
    }

    std::optional<AtomicEvent> find_violated_in_label(const std::vector<int>& assignment,
                                                      int k) const override {
        sync(assignment);
        auto [e, start] = decode(k);
        if (!window_bad(e, start)) return std::nullopt;
        return build_event(e, start);
    }

    std::pair<int, long long> decode(int k) const {
        int w = window_count();
        return {k / w, first_start() + (long long)(k % w) * start_step()};
    }

protected:
    virtual int window_count() const = 0;
    virtual long long window_span() const = 0;
    virtual long long first_start() const = 0;
    virtual long long start_step() const = 0;
    virtual bool window_bad(int e, long long start) const = 0;

    int encode(int e, long long start) const {
        return e * window_count() + int((start - first_start()) / start_step());
    }

    long long count_at(int e, long long t) const {
        if (t < 1 || t > span_) return 0;
        return counts_[size_t(e)][size_t(t)];
    }

    AtomicEvent build_event(int e, long long start) const {
        ElementSet b;
        long long lo = std::max<long long>(start, 1);
        long long hi = std::min<long long>(start + window_span() - 1, span_);
        for (const auto& [var, s] : job_.edge_transits[size_t(e)]) {
            long long t = s + cur_delay_[size_t(var)];
            if (t >= lo && t <= hi) b.push_back({var, cur_delay_[size_t(var)]});
        }
        return AtomicEvent(make_element_set(std::move(b)));
    }

    void sync(const std::vector<int>& assignment) const {
        if (cur_delay_.empty()) {
            cur_delay_ = assignment;
            for (size_t v = 0; v < job_.vars.size(); ++v)
                for (const auto& [e, s] : job_.vars[v].transits)
                    counts_[size_t(e)][size_t(s + assignment[v])]++;
            for (int e = 0; e < int(job_.edge_ids.size()); ++e) rescan_edge(e);
            return;
        }
        std::vector<std::pair<int, long long>> touched;
        for (size_t v = 0; v < assignment.size(); ++v) {
            if (assignment[v] == cur_delay_[v]) continue;
            for (const auto& [e, s] : job_.vars[v].transits) {
                counts_[size_t(e)][size_t(s + cur_delay_[v])]--;
                counts_[size_t(e)][size_t(s + assignment[v])]++;
                touched.push_back({e, s + cur_delay_[v]});
                touched.push_back({e, s + assignment[v]});
            }
            cur_delay_[size_t(v)] = assignment[v];
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        size_t idx = 0;
        while (idx < touched.size()) {
            size_t end = idx;
            int e = touched[idx].first;
            while (end < touched.size() && touched[end].first == e) ++end;
            long long changes = (long long)(end - idx);
            // Local window refresh costs ~ span_of_window^2 per change;
            // fall back to one sliding rescan when cheaper.
            if (changes * window_span() * window_span() > span_ + 4 * window_span()) {
                rescan_edge(e);
            } else {
                for (size_t u = idx; u < end; ++u) refresh_windows_at(e, touched[u].second);
            }
            idx = end;
        }
    }

    void rescan_edge(int e) const {
        auto lo = violated_.lower_bound({e, LLONG_MIN});
        auto hi = violated_.lower_bound({e + 1, LLONG_MIN});
        violated_.erase(lo, hi);
        for (long long start = first_start(); start <= last_start(); start += start_step())
            if (window_bad(e, start)) violated_.insert({e, start});
    }

    void refresh_windows_at(int e, long long t) const {
        // Only windows covering time t can change.
        long long lo = t - window_span() + 1;
        long long start = first_start();
        if (lo > start) {
            long long steps = (lo - first_start() + start_step() - 1) / start_step();
            start = first_start() + steps * start_step();
        }
        for (; start <= std::min(t, last_start()); start += start_step()) {
            auto key = std::make_pair(e, start);
            if (window_bad(e, start))
                violated_.insert(key);
            else
                violated_.erase(key);
        }
    }

    long long last_start() const {
        return first_start() + (long long)(window_count() - 1) * start_step();
    }

    const FrameJob& job_;
    long long span_;
    int dmax_;
    mutable std::vector<int> cur_delay_;
    mutable std::vector<std::vector<long long>> counts_;
    mutable std::set<std::pair<int, long long>> violated_;
};

class IntervalBackend final : public FrameBackendBase {
public:
    IntervalBackend(const FrameJob& job, long long span, int dmax, long long iprime,
                    long long c_out)
        : FrameBackendBase(job, span, dmax), iprime_(iprime), c_out_(c_out) {}

    std::vector<int> dependency_vars(int k) const override {
        auto [e, start] = decode(k);
        std::vector<int> vars;
        for (const auto& [var, s] : job_.edge_transits[size_t(e)])
            if (s + dmax_ >= start && s <= start + iprime_ - 1) vars.push_back(var);
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        return vars;
    }

protected:
    int window_count() const override { return int(span_ - iprime_ + 1); }
    long long window_span() const override { return iprime_; }
    long long first_start() const override { return 1; }
    long long start_step() const override { return 1; }

    bool window_bad(int e, long long start) const override {
        long long sum = 0;
        for (long long t = start; t < start + iprime_; ++t) sum += count_at(e, t);
        return sum > c_out_;
    }

private:
    long long iprime_;
    long long c_out_;
};

class FourFrameBackend final : public FrameBackendBase {
public:
    FourFrameBackend(const FrameJob& job, long long span, int dmax, long long t_cap,
                     long long t_prime)
        : FrameBackendBase(job, span, dmax), t_cap_(t_cap), t_prime_(t_prime) {}

    // Position (0..3) a packet-delay pair takes inside the window, or -1.
    int type_of(int var, int delay, int e, long long start) const {
        for (const auto& [v, s] : job_.edge_transits[size_t(e)]) {
            if (v != var) continue;
            long long pos = s + delay - start;
            if (pos >= 0 && pos <= 3) return int(pos);
        }
        return -1;
    }

protected:
    // Odd starts from -1 (start boundary) to span-1 (end boundary); the
    // out-of-range positions count as zero congestion.
    int window_count() const override { return int((span_ - 1 + 1) / 2) + 1; }
    long long window_span() const override { return 4; }
    long long first_start() const override { return -1; }
    long long start_step() const override { return 2; }

    bool window_bad(int e, long long start) const override {
        Overflow plus = overflow_of(count_at(e, start), count_at(e, start + 1), t_cap_);
        Overflow minus = overflow_of(count_at(e, start + 2), count_at(e, start + 3), t_cap_);
        return plus.of_plus + minus.of_minus > t_prime_;
    }

private:
    long long t_cap_;
    long long t_prime_;
};

std::vector<TimedTransit> sorted_by_time(std::vector<TimedTransit> v) {
    std::sort(v.begin(), v.end(),
              [](const TimedTransit& a, const TimedTransit& b) { return a.time < b.time; });
    return v;
}

} // namespace

InfeasibleSchedule refine_interval(const InfeasibleSchedule& sched, const IntervalParams& p,
                                   uint64_t seed) {
    if (p.i == p.iprime) {
        if (p.c_out >= p.c_in) return sched; // degenerate identity refinement
        throw CriterionError("refine_interval: i' = i requires C_out >= C_in");
    }
    if (p.iprime < 1 || p.iprime > p.i || p.m < 1)
        throw ArgumentError("refine_interval: bad interval parameters");
    if (p.width_mode) {
        if (!width_stage_ok(p.c_in, p.i, p.iprime, p.m, p.c_out, p.d, p.alpha))
            throw CriterionError(
                "refine_interval: width criterion fails (p=" +
                std::to_string(width_stage_p(p.c_in, p.iprime, p.alpha, p.d, p.c_out)) + ")");
    } else {
        if (!binomial_stage_ok(p.c_in, p.i, p.iprime, p.m, p.c_out))
            throw CriterionError("refine_interval: binomial LLL criterion fails");
    }

    const long long frame_len = p.m * p.i;
    const int dmax = int(p.width_mode ? p.i - p.iprime - 1 : p.i - p.iprime);
    std::vector<FrameJob> jobs = split_frames(sched, frame_len);

    InfeasibleSchedule out;
    out.packets.resize(sched.packets.size());
    long long offset = 0;
    for (const FrameJob& job : jobs) {
        long long span = job.f_used + dmax;
        std::vector<int> delays(job.vars.size(), 0);
        if (!job.vars.empty()) {
            Instance inst;
            inst.domain_sizes.assign(job.vars.size(), dmax + 1);
            std::vector<std::vector<double>> probs(
                job.vars.size(), std::vector<double>(size_t(dmax) + 1, 1.0 / double(dmax + 1)));
            inst.probabilities = ProbabilityModel(std::move(probs));
            inst.family.set_backend(
                std::make_unique<IntervalBackend>(job, span, dmax, p.iprime, p.c_out));

            std::shared_ptr<const HittingSet> width_set;
            if (p.width_mode) {
                std::vector<std::vector<double>> lam(
                    job.vars.size(), std::vector<double>(size_t(dmax) + 1, p.alpha));
                inst.lambda = LambdaVector(std::move(lam));
                std::vector<std::pair<Element, double>> coeffs;
                for (int v = 0; v < int(job.vars.size()); ++v)
                    for (int t = 0; t <= dmax; ++t) coeffs.push_back({Element{v, t}, 1.0});
                width_set = std::make_shared<WidthHittingSet>(std::move(coeffs),
                                                              double(p.c_out) + 1.0, p.d);
                inst.hitting_for_label = [width_set](int) -> const HittingSet& {
                    return *width_set;
                };
            }

            EngineConfig cfg;
            cfg.seed = derive_seed(seed, uint64_t(job.start));
            cfg.resample_scope =
                p.width_mode ? ResampleScope::HittingSet : ResampleScope::FullDependency;
            cfg.max_resamplings = 10000 + 200 * (long long)job.vars.size();
            RunResult res = run(inst, cfg);
            if (res.status != RunStatus::Solved)
                throw CriterionError("refine_interval: frame refinement hit the resampling cap");
            delays = res.assignment;
        }
        for (size_t v = 0; v < job.vars.size(); ++v) {
            int packet = job.vars[v].packet;
            for (const auto& [e, s] : job.vars[v].transits)
                out.packets[size_t(packet)].push_back(
                    {job.edge_ids[size_t(e)], offset + s + delays[v]});
        }
        offset += span + p.iprime; // idle gap between frames
    }
    out.length = 0;
    for (auto& transits : out.packets) {
        transits = sorted_by_time(std::move(transits));
        if (!transits.empty()) out.length = std::max(out.length, transits.back().time);
    }
    return out;
}

// ----------------------------------------------------------------------
// Overflow machinery

Overflow overflow_of(long long a, long long b, long long t_cap) {
    if (a < 0 || b < 0 || t_cap < 0) throw ArgumentError("overflow_of: negative input");
    Overflow o;
    while (a + b > t_cap) {
        if (a == 0) {
            --b;
            ++o.of_plus;
        } else if (b == 0) {
            --a;
            ++o.of_minus;
        } else if ((a + b) % 2 != 0) {
            --a;
            ++o.of_minus;
        } else {
            --b;
            ++o.of_plus;
        }
    }
    o.a_final = a;
    o.b_final = b;
    return o;
}

FourCondReport check_4conditions(const InfeasibleSchedule& sched, long long t_cap,
                                 long long t_prime, const RoutingInstance& inst) {
    long long len = sched.length % 2 == 0 ? sched.length : sched.length + 1;
    std::vector<std::vector<long long>> counts(inst.edges.size());
    for (auto& c : counts) c.assign(size_t(len) + 4, 0);
    for (const auto& packet : sched.packets)
        for (const auto& tr : packet) counts[size_t(tr.edge)][size_t(tr.time)]++;

    FourCondReport rep;
    auto at = [&](int e, long long t) -> long long {
        if (t < 1 || t > len) return 0;
        return counts[size_t(e)][size_t(t)];
    };
    for (int e = 0; e < int(inst.edges.size()); ++e)
        for (long long t = -1; t <= len - 1; t += 2) {
            Overflow plus = overflow_of(at(e, t), at(e, t + 1), t_cap);
            Overflow minus = overflow_of(at(e, t + 2), at(e, t + 3), t_cap);
            long long v = plus.of_plus + minus.of_minus;
            if (v > t_prime) {
                rep.ok = false;
                rep.violations.push_back({e, t, v});
            }
        }
    return rep;
}

double OverflowTable::weight(int y0, int y1, int y2, int y3) const {
    auto it = weights.find({y0, y1, y2, y3});
    return it == weights.end() ? 0.0 : it->second;
}

namespace {

bool tuple_bad(const std::array<int, 4>& k, long long t_cap, long long t_prime) {
    Overflow plus = overflow_of(k[0], k[1], t_cap);
    Overflow minus = overflow_of(k[2], k[3], t_cap);
    return plus.of_plus + minus.of_minus > t_prime;
}

} // namespace

std::vector<std::array<int, 4>> minimal_bad_tuples(long long t_cap, long long t_prime,
                                                   long long component_cap) {
    long long box = std::min<long long>(2 * t_cap + 2 * t_prime + 6, component_cap);
    while (true) {
        std::vector<std::array<int, 4>> minimal;
        bool boundary_minimal = false;
        std::array<int, 4> k{};
        for (k[0] = 0; k[0] <= box; ++k[0])
            for (k[1] = 0; k[1] <= box; ++k[1])
                for (k[2] = 0; k[2] <= box; ++k[2])
                    for (k[3] = 0; k[3] <= box; ++k[3]) {
                        if (!tuple_bad(k, t_cap, t_prime)) continue;
                        bool minimal_here = true;
                        for (size_t j = 0; j < 4 && minimal_here; ++j) {
                            if (k[j] == 0) continue;
                            auto down = k;
                            down[j]--;
                            if (tuple_bad(down, t_cap, t_prime)) minimal_here = false;
                        }
                        if (!minimal_here) continue;
                        minimal.push_back(k);
                        for (size_t j = 0; j < 4; ++j)
                            if (k[j] == box && box < component_cap) boundary_minimal = true;
                    }
        if (!boundary_minimal) return minimal;
        box = std::min(box * 2, component_cap);
    }
}

double table_coverage(const OverflowTable& table, const std::array<int, 4>& k) {
    Kahan sum;
    for (const auto& [y, w] : table.weights) {
        bool dominated = true;
        for (size_t j = 0; j < 4; ++j)
            if (y[j] > k[j]) dominated = false;
        if (!dominated) continue;
        double coef = 1.0;
        for (size_t j = 0; j < 4; ++j) coef *= std::exp(lchoose(double(k[j]), double(y[j])));
        sum.add(coef * w);
    }
    return sum.value();
}

bool recheck_table_coverage(const OverflowTable& table) {
    for (const auto& k : table.minimal_bad)
        if (table_coverage(table, k) < 1.0 - 1e-9) return false;
    return true;
}

std::array<double, 5> table_phis(const OverflowTable& table, long long c, double alpha) {
    std::array<double, 5> out{0, 0, 0, 0, 0};
    double ln_alpha = std::log(alpha);
    for (const auto& [y, w] : table.weights) {
        if (w <= 0.0) continue;
        int total = y[0] + y[1] + y[2] + y[3];
        double base = std::log(w) + double(total) * ln_alpha;
        bool fits = true;
        double all = base;
        for (size_t j = 0; j < 4; ++j) {
            if (y[j] > c) {
                fits = false;
                break;
            }
            all += lchoose(double(c), double(y[j]));
        }
        if (!fits) continue;
        out[4] += std::exp(all);
        for (size_t j = 0; j < 4; ++j) {
            if (y[j] == 0) continue;
            // One type-j slot is pinned: C(c-1, y_j - 1) replaces C(c, y_j).
            double lnv = base;
            for (size_t l = 0; l < 4; ++l)
                lnv += (l == j) ? lchoose(double(c - 1), double(y[l] - 1))
                                : lchoose(double(c), double(y[l]));
            out[j] += std::exp(lnv);
        }
    }
    return out;
}

OverflowTable build_overflow_hitting_set(long long t_cap, long long t_prime, long long c,
                                         double alpha, double target) {
    if (t_cap < 0 || t_prime < 0) throw ArgumentError("overflow table: negative parameters");
    if (!(alpha > 0.0)) throw ArgumentError("overflow table: alpha must be positive");
    if (!(target > 0.0)) target = 1e-6;

    OverflowTable table;
    table.T = t_cap;
    table.Tprime = t_prime;
    table.minimal_bad = minimal_bad_tuples(t_cap, t_prime, c);
    if (table.minimal_bad.empty()) {
        table.achieved_ratio = 0.0;
        return table; // no bad tuples at all
    }

    std::set<std::array<int, 4>> columns_set;
    for (const auto& k : table.minimal_bad) {
        std::array<int, 4> y{};
        for (y[0] = 0; y[0] <= k[0]; ++y[0])
            for (y[1] = 0; y[1] <= k[1]; ++y[1])
                for (y[2] = 0; y[2] <= k[2]; ++y[2])
                    for (y[3] = 0; y[3] <= k[3]; ++y[3]) {
                        if (y[0] + y[1] + y[2] + y[3] == 0) continue;
                        columns_set.insert(y);
                    }
    }
    std::vector<std::array<int, 4>> columns(columns_set.begin(), columns_set.end());
    const int n = int(columns.size());
    const int m = int(table.minimal_bad.size());

    // Coverage rows, scaled so each row's largest coefficient is 1.
    std::vector<std::vector<double>> a(size_t(m), std::vector<double>(size_t(n), 0.0));
    std::vector<double> rhs(size_t(m), 1.0);
    for (int r = 0; r < m; ++r) {
        const auto& k = table.minimal_bad[size_t(r)];
        double row_max = 0.0;
        for (int cidx = 0; cidx < n; ++cidx) {
            const auto& y = columns[size_t(cidx)];
            bool dominated = true;
            double lncoef = 0.0;
            for (size_t j = 0; j < 4; ++j) {
                if (y[j] > k[j]) {
                    dominated = false;
                    break;
                }
                lncoef += lchoose(double(k[j]), double(y[j]));
            }
            if (!dominated) continue;
            double coef = std::exp(lncoef);
            a[size_t(r)][size_t(cidx)] = coef;
            row_max = std::max(row_max, coef);
        }
        for (double& v : a[size_t(r)]) v /= row_max;
        rhs[size_t(r)] = 1.0 / row_max;
    }

    auto solve_at_target = [&](double t) {
        OverflowTable tb = table;
        std::vector<double> cost(size_t(n), 0.0);
        for (int cidx = 0; cidx < n; ++cidx) {
            OverflowTable unit;
            unit.T = t_cap;
            unit.Tprime = t_prime;
            unit.weights[columns[size_t(cidx)]] = 1.0;
            auto phis = table_phis(unit, c, alpha);
            cost[size_t(cidx)] = phis[0] + phis[1] + phis[2] + phis[3] + t * phis[4];
        }
        LpResult lp = solve_lp_min(a, rhs, cost);
        if (lp.infeasible || !lp.optimal)
            throw CriterionError("overflow table: covering LP did not solve");
        for (int cidx = 0; cidx < n; ++cidx) {
            double v = std::min(std::max(lp.x[size_t(cidx)], 0.0), 1.0);
            if (v > 1e-15) tb.weights[columns[size_t(cidx)]] = v;
        }
        // Numerical repair: lift the diagonal weight of any row whose
        // coverage rounded below one.
        for (const auto& k : tb.minimal_bad) {
            double cov = table_coverage(tb, k);
            if (cov < 1.0 - 1e-9)
                tb.weights[k] = std::min(1.0, tb.weights[k] + (1.0 - cov));
        }
        auto phis = table_phis(tb, c, alpha);
        for (size_t j = 0; j < 5; ++j) tb.phi[j] = phis[j];
        double denom = 1.0 - phis[4];
        tb.achieved_ratio = denom > 0.0 ? (phis[0] + phis[1] + phis[2] + phis[3]) / denom
                                        : std::numeric_limits<double>::infinity();
        return tb;
    };

    OverflowTable best = solve_at_target(target);
    for (int round = 0; round < 2; ++round) {
        if (!(best.achieved_ratio > 0.0) || std::isinf(best.achieved_ratio)) break;
        OverflowTable next = solve_at_target(best.achieved_ratio);
        if (next.achieved_ratio < best.achieved_ratio)
            best = std::move(next);
        else
            break;
    }
    if (!recheck_table_coverage(best))
        throw CriterionError("overflow table: coverage recheck failed");
    return best;
}

void save_overflow_table(const OverflowTable& table, std::ostream& out) {
    for (const auto& [y, w] : table.weights) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g\n", y[0], y[1], y[2], y[3], w);
        out << buf;
    }
}

OverflowTable load_overflow_table(std::istream& in, long long t_cap, long long t_prime) {
    OverflowTable table;
    table.T = t_cap;
    table.Tprime = t_prime;
    table.minimal_bad = minimal_bad_tuples(t_cap, t_prime, 1000);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::array<int, 4> y{};
        double w = 0.0;
        if (!(ls >> y[0] >> y[1] >> y[2] >> y[3] >> w))
            throw InputError("overflow table: malformed record: " + line);
        if (w < 0.0 || w > 1.0) throw InputError("overflow table: weight out of [0,1]");
        if (w > 0.0) table.weights[y] += w;
    }
    if (!recheck_table_coverage(table))
        throw InputError("overflow table: loaded table fails coverage");
    return table;
}

// ----------------------------------------------------------------------
// 4-frame refinement

namespace {

// Table-driven hitting set over typed packet-delay elements. The label
// context (edge, window) is bound before each use; runs are sequential.
class OverflowHittingSet final : public HittingSet {
public:
    OverflowHittingSet(const OverflowTable& table, const FourFrameBackend& backend)
        : table_(table), backend_(backend) {}

    void bind(int edge, long long start) const {
        edge_ = edge;
        start_ = start;
    }

    double weight(const ElementSet& y) const override {
        std::array<int, 4> counts{};
        for (size_t i = 0; i < y.size(); ++i) {
            if (i > 0 && y[i].var == y[i - 1].var) return 0.0;
            int type = backend_.type_of(y[i].var, y[i].value, edge_, start_);
            if (type < 0) return 0.0;
            counts[size_t(type)]++;
        }
        return table_.weight(counts[0], counts[1], counts[2], counts[3]);
    }

    ElementSet sample(const AtomicEvent& b, Rng& rng) const override {
        std::array<std::vector<Element>, 4> groups;
        for (const Element& e : b.elems) {
            int type = backend_.type_of(e.var, e.value, edge_, start_);
            if (type >= 0) groups[size_t(type)].push_back(e);
        }
        std::array<int, 4> g{};
        for (size_t j = 0; j < 4; ++j) g[j] = int(groups[j].size());

        std::vector<const std::array<int, 4>*> keys;
        std::vector<double> mass;
        for (const auto& [y, w] : table_.weights) {
            bool fits = true;
            double lncoef = 0.0;
            for (size_t j = 0; j < 4; ++j) {
                if (y[j] > g[j]) {
                    fits = false;
                    break;
                }
                lncoef += lchoose(double(g[j]), double(y[j]));
            }
            if (!fits) continue;
            keys.push_back(&y);
            mass.push_back(w * std::exp(lncoef));
        }
        if (keys.empty())
            throw CriterionError("no supported subset of a violated event (unhittable event)");
        const auto& y = *keys[rng.discrete(mass)];

        ElementSet out;
        for (size_t j = 0; j < 4; ++j) {
            auto& grp = groups[j];
            for (int pick = 0; pick < y[j]; ++pick) {
                size_t idx = size_t(pick) + size_t(rng.uniform_int(grp.size() - size_t(pick)));
                std::swap(grp[size_t(pick)], grp[idx]);
                out.push_back(grp[size_t(pick)]);
            }
        }
        return make_element_set(std::move(out));
    }

private:
    const OverflowTable& table_;
    const FourFrameBackend& backend_;
    mutable int edge_ = 0;
    mutable long long start_ = 0;
};

} // namespace

InfeasibleSchedule refine_4cond(const InfeasibleSchedule& sched, const FourFrameParams& p,
                                const OverflowTable& table, uint64_t seed) {
    if (p.i < 6 || p.i % 2 != 0)
        throw ArgumentError("refine_4cond: i must be even and at least 6");
    auto phis = table_phis(table, p.c_in, p.alpha);
    double denom = 1.0 - phis[4];
    if (!(denom > 0.0)) throw CriterionError("refine_4cond: phi reaches 1");
    double ratio = (phis[0] + phis[1] + phis[2] + phis[3]) / denom;
    double lhs =
        double(p.i - 4) * p.alpha - double(p.m) * double(p.i) * double(p.i) / 2.0 * ratio;
    if (lhs < 1.0 - kRelTolerance)
        throw CriterionError("refine_4cond: delay criterion fails (lhs=" + std::to_string(lhs) +
                             ")");

    const long long frame_len = p.m * p.i;
    const int dmax = int(p.i - 4); // delays {0..i-4}
    std::vector<FrameJob> jobs = split_frames(sched, frame_len);

    InfeasibleSchedule out;
    out.packets.resize(sched.packets.size());
    long long offset = 0;
    for (const FrameJob& job : jobs) {
        long long span = job.f_used + dmax;
        if (span % 2 != 0) span += 1;
        std::vector<int> delays(job.vars.size(), 0);
        if (!job.vars.empty()) {
            Instance inst;
            inst.domain_sizes.assign(job.vars.size(), dmax + 1);
            std::vector<std::vector<double>> probs(
                job.vars.size(), std::vector<double>(size_t(dmax) + 1, 1.0 / double(dmax + 1)));
            inst.probabilities = ProbabilityModel(std::move(probs));
            std::vector<std::vector<double>> lam(
                job.vars.size(), std::vector<double>(size_t(dmax) + 1, p.alpha));
            inst.lambda = LambdaVector(std::move(lam));

            auto backend = std::make_unique<FourFrameBackend>(job, span, dmax, p.T, p.Tprime);
            const FourFrameBackend* backend_ptr = backend.get();
            inst.family.set_backend(std::move(backend));

            auto hs = std::make_shared<OverflowHittingSet>(table, *backend_ptr);
            inst.hitting_for_label = [hs, backend_ptr](int k) -> const HittingSet& {
                auto [e, start] = backend_ptr->decode(k);
                hs->bind(e, start);
                return *hs;
            };

            EngineConfig cfg;
            cfg.seed = derive_seed(seed, uint64_t(job.start));
            cfg.max_resamplings = 10000 + 200 * (long long)job.vars.size();
            RunResult res = run(inst, cfg);
            if (res.status != RunStatus::Solved)
                throw CriterionError("refine_4cond: frame refinement hit the resampling cap");
            delays = res.assignment;
        }
        for (size_t v = 0; v < job.vars.size(); ++v) {
            int packet = job.vars[v].packet;
            for (const auto& [e, s] : job.vars[v].transits)
                out.packets[size_t(packet)].push_back(
                    {job.edge_ids[size_t(e)], offset + s + delays[v]});
        }
        offset += span + 4; // even gap keeps global windows aligned
    }
    out.length = 0;
    for (auto& transits : out.packets) {
        transits = sorted_by_time(std::move(transits));
        if (!transits.empty()) out.length = std::max(out.length, transits.back().time);
    }
    if (out.length % 2 != 0) out.length += 1;
    return out;
}

// ----------------------------------------------------------------------
// Depth-2 sub-scheduling and final assembly

namespace {

struct D2Item {
    int packet = 0;
    int e1 = -1;
    int e2 = -1; // -1 for single-transit items
};

struct D2Result {
    // Slot per transit, 1-based within the segment; t2 = 0 for singles.
    std::vector<std::array<long long, 2>> times;
    long long makespan = 0;
    bool hit_target = true;
};

// Greedy slot assignment with a one-level relocation exchange, retried
// over a few seeded orders. Falls back to list scheduling (<= 2C).
D2Result schedule_d2(const std::vector<D2Item>& items, Rng& rng) {
    std::map<int, long long> cong;
    bool any_double = false;
    for (const auto& it : items) {
        cong[it.e1]++;
        if (it.e2 >= 0) {
            cong[it.e2]++;
            any_double = true;
        }
    }
    long long c = 0;
    for (auto& [e, k] : cong) c = std::max(c, k);
    const long long target = c + (any_double ? 1 : 0);

    D2Result res;
    res.times.assign(items.size(), {0, 0});
    if (items.empty()) return res;

    auto attempt = [&](const std::vector<size_t>& order,
                       std::vector<std::array<long long, 2>>& times) -> bool {
        std::map<int, std::vector<char>> slots; // slots[e][t], 1..target
        for (auto& [e, k] : cong) slots[e].assign(size_t(target) + 1, 0);
        auto free_before = [&](int e, long long limit) -> long long {
            for (long long t = 1; t < limit; ++t)
                if (!slots[e][size_t(t)]) return t;
            return 0;
        };
        std::vector<size_t> placed;
        for (size_t oi : order) {
            const D2Item& it = items[oi];
            if (it.e2 < 0) continue; // doubles first
            long long t1 = 0, t2 = 0;
            for (long long cand = 2; cand <= target; ++cand) {
                if (slots[it.e2][size_t(cand)]) continue;
                long long f = free_before(it.e1, cand);
                if (f > 0) {
                    t1 = f;
                    t2 = cand;
                    break;
                }
            }
            if (t1 == 0) {
                // Relocate one blocking occupant of e1 if that opens a pair.
                for (long long cand = 2; cand <= target && t1 == 0; ++cand) {
                    if (slots[it.e2][size_t(cand)]) continue;
                    for (size_t pj : placed) {
                        const D2Item& q = items[pj];
                        auto& qt = times[pj];
                        // A transit of q on e1 below cand frees a slot if
                        // it can move elsewhere on e1.
                        for (int leg = 0; leg < 2; ++leg) {
                            int qe = leg == 0 ? q.e1 : q.e2;
                            if (qe != it.e1 || qt[size_t(leg)] == 0 ||
                                qt[size_t(leg)] >= cand)
                                continue;
                            long long lo = leg == 1 ? qt[0] + 1 : 1;
                            long long hi = (leg == 0 && q.e2 >= 0) ? qt[1] - 1 : target;
                            for (long long alt = lo; alt <= hi; ++alt) {
                                if (slots[qe][size_t(alt)] || alt == qt[size_t(leg)]) continue;
                                slots[qe][size_t(qt[size_t(leg)])] = 0;
                                slots[qe][size_t(alt)] = 1;
                                long long f = free_before(it.e1, cand);
                                if (f > 0) {
                                    qt[size_t(leg)] = alt;
                                    t1 = f;
                                    t2 = cand;
                                } else {
                                    slots[qe][size_t(alt)] = 0;
                                    slots[qe][size_t(qt[size_t(leg)])] = 1;
                                }
                                break;
                            }
                            if (t1 > 0) break;
                        }
                        if (t1 > 0) break;
                    }
                }
            }
            if (t1 == 0) return false;
            slots[it.e1][size_t(t1)] = 1;
            slots[it.e2][size_t(t2)] = 1;
            times[oi] = {t1, t2};
            placed.push_back(oi);
        }
        for (size_t oi : order) {
            const D2Item& it = items[oi];
            if (it.e2 >= 0) continue;
            long long t1 = free_before(it.e1, target + 1);
            if (t1 == 0) return false; // cannot happen by counting
            slots[it.e1][size_t(t1)] = 1;
            times[oi] = {t1, 0};
        }
        return true;
    };

    std::vector<size_t> order(items.size());
    for (size_t i = 0; i < items.size(); ++i) order[i] = i;
    for (int tries = 0; tries < 8; ++tries) {
        std::vector<std::array<long long, 2>> times(items.size(), {0, 0});
        if (attempt(order, times)) {
            res.times = std::move(times);
            for (const auto& t : res.times)
                res.makespan = std::max({res.makespan, t[0], t[1]});
            return res;
        }
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[size_t(rng.uniform_int(i))]);
    }

    // List-scheduling fallback: per step, every edge carries its lowest
    // ready transit. Completes within 2C.
    res.hit_target = false;
    std::vector<int> stage(items.size(), 0);
    long long done = 0, total = 0;
    for (const auto& it : items) total += it.e2 >= 0 ? 2 : 1;
    long long t = 0;
    while (done < total) {
        ++t;
        std::map<int, int> chosen; // edge -> item index
        for (size_t i = 0; i < items.size(); ++i) {
            int e = stage[i] == 0 ? items[i].e1 : (items[i].e2);
            if (stage[i] >= (items[i].e2 >= 0 ? 2 : 1)) continue;
            if (stage[i] == 1 && res.times[i][0] >= t) continue; // second leg waits
            auto it = chosen.find(e);
            if (it == chosen.end()) chosen[e] = int(i);
        }
        for (auto& [e, i] : chosen) {
            res.times[size_t(i)][size_t(stage[size_t(i)])] = t;
            stage[size_t(i)]++;
            ++done;
        }
    }
    res.makespan = t;
    return res;
}

} // namespace

FeasibleSchedule assemble_final(const InfeasibleSchedule& sched, long long t_cap,
                                long long t_prime, const RoutingInstance& inst) {
    FourCondReport cond = check_4conditions(sched, t_cap, t_prime, inst);
    if (!cond.ok)
        throw CriterionError("assemble_final: input violates the 4-conditions (" +
                             std::to_string(cond.violations.size()) + " windows)");

    const long long len = sched.length % 2 == 0 ? sched.length : sched.length + 1;
    const long long half = len / 2;

    // Transit bookkeeping: segment assignment per transit. Segments:
    // overflow j sits between 2-frames j and j+1; frame j covers times
    // (2j-1, 2j) for j = 1..half; overflows run 0..half.
    struct Placed {
        int seg_kind; // 0 = frame, 1 = overflow
        long long seg_idx;
    };
    std::vector<std::vector<Placed>> place(sched.packets.size());
    std::vector<std::vector<std::vector<std::pair<int, int>>>> at(inst.edges.size());
    for (auto& per_edge : at) per_edge.assign(size_t(len) + 2, {});
    for (size_t p = 0; p < sched.packets.size(); ++p) {
        place[p].resize(sched.packets[p].size());
        for (size_t i = 0; i < sched.packets[p].size(); ++i) {
            const auto& tr = sched.packets[p][i];
            place[p][i] = {0, (tr.time + 1) / 2};
            at[size_t(tr.edge)][size_t(tr.time)].push_back({int(p), int(i)});
        }
    }

    // Overflow shifting, mirroring overflow_of exactly but moving real
    // packets: earlier shifts pull first-slot transits, later shifts pull
    // second-slot transits.
    for (size_t e = 0; e < inst.edges.size(); ++e) {
        for (long long t = 1; t < len; t += 2) {
            auto& first_list = at[e][size_t(t)];
            auto& second_list = at[e][size_t(t + 1)];
            long long a = (long long)first_list.size();
            long long b = (long long)second_list.size();
            long long frame = (t + 1) / 2;
            while (a + b > t_cap) {
                bool earlier;
                if (a == 0) earlier = false;
                else if (b == 0) earlier = true;
                else earlier = ((a + b) % 2 != 0);
                if (earlier) {
                    auto [p, i] = first_list.back();
                    first_list.pop_back();
                    place[size_t(p)][size_t(i)] = {1, frame - 1};
                    --a;
                } else {
                    auto [p, i] = second_list.back();
                    second_list.pop_back();
                    place[size_t(p)][size_t(i)] = {1, frame};
                    --b;
                }
            }
        }
    }

    // Collect per-segment items (<= 2 ordered transits per packet).
    auto seg_order = [](const Placed& pl) -> long long {
        return pl.seg_kind == 0 ? 2 * pl.seg_idx - 1 : 2 * pl.seg_idx;
    };
    const long long num_segments = 2 * half + 1; // order index 0..2*half
    struct SegItems {
        std::vector<D2Item> items;
        std::vector<std::vector<std::pair<size_t, size_t>>> refs; // per item: (packet, transit)
    };
    std::vector<SegItems> segs{size_t(num_segments)};
    for (size_t p = 0; p < sched.packets.size(); ++p) {
        long long prev_order = -1;
        for (size_t i = 0; i < sched.packets[p].size(); ++i) {
            long long ord = seg_order(place[p][i]);
            if (ord < prev_order)
                throw CriterionError("assemble_final: shifting broke segment order");
            SegItems& seg = segs[size_t(ord)];
            int edge = sched.packets[p][i].edge;
            if (ord == prev_order) {
                D2Item& it = seg.items.back();
                if (it.packet == int(p) && it.e2 < 0) {
                    it.e2 = edge;
                    seg.refs.back().push_back({p, i});
                } else {
                    throw CriterionError("assemble_final: more than two transits per segment");
                }
            } else {
                seg.items.push_back({int(p), edge, -1});
                seg.refs.push_back({{p, i}});
            }
            prev_order = ord;
        }
    }

    FeasibleSchedule fs;
    fs.packets.resize(sched.packets.size());
    Rng rng(0x4f6c6f8aULL);
    long long cursor = 0;
    for (long long ord = 0; ord < num_segments; ++ord) {
        SegItems& seg = segs[size_t(ord)];
        if (seg.items.empty()) continue;
        D2Result sub = schedule_d2(seg.items, rng);
        if (!sub.hit_target) fs.fallback_used = true;
        for (size_t i = 0; i < seg.items.size(); ++i) {
            for (size_t leg = 0; leg < seg.refs[i].size(); ++leg) {
                auto [p, ti] = seg.refs[i][leg];
                fs.packets[p].push_back(
                    {sched.packets[p][ti].edge, cursor + sub.times[i][leg]});
            }
        }
        cursor += sub.makespan;
    }
    for (auto& transits : fs.packets) {
        transits = sorted_by_time(std::move(transits));
        if (!transits.empty()) fs.makespan = std::max(fs.makespan, transits.back().time);
    }
    return fs;
}

FeasibleSchedule expand_two_frames(const InfeasibleSchedule& sched, const RoutingInstance&) {
    const long long len = sched.length % 2 == 0 ? sched.length : sched.length + 1;
    const long long half = len / 2;

    std::vector<std::vector<D2Item>> items{size_t(half)};
    std::vector<std::vector<std::vector<std::pair<size_t, size_t>>>> refs{size_t(half)};
    std::vector<std::map<int, size_t>> packet_item{size_t(half)};
    for (size_t p = 0; p < sched.packets.size(); ++p) {
        for (size_t i = 0; i < sched.packets[p].size(); ++i) {
            const auto& tr = sched.packets[p][i];
            size_t frame = size_t((tr.time - 1) / 2);
            auto [it, fresh] = packet_item[frame].try_emplace(int(p), items[frame].size());
            if (fresh) {
                items[frame].push_back({int(p), tr.edge, -1});
                refs[frame].push_back({{p, i}});
            } else {
                items[frame][it->second].e2 = tr.edge;
                refs[frame][it->second].push_back({p, i});
            }
        }
    }

    FeasibleSchedule fs;
    fs.packets.resize(sched.packets.size());
    Rng rng(0x2f7a11ceULL);
    long long cursor = 0;
    for (size_t frame = 0; frame < size_t(half); ++frame) {
        if (items[frame].empty()) continue;
        D2Result sub = schedule_d2(items[frame], rng);
        if (!sub.hit_target) fs.fallback_used = true;
        for (size_t i = 0; i < items[frame].size(); ++i)
            for (size_t leg = 0; leg < refs[frame][i].size(); ++leg) {
                auto [p, ti] = refs[frame][i][leg];
                fs.packets[p].push_back(
                    {sched.packets[p][ti].edge, cursor + sub.times[i][leg]});
            }
        cursor += sub.makespan;
    }
    for (auto& transits : fs.packets) {
        transits = sorted_by_time(std::move(transits));
        if (!transits.empty()) fs.makespan = std::max(fs.makespan, transits.back().time);
    }
    return fs;
}

std::pair<bool, std::vector<std::string>> validate_schedule(const FeasibleSchedule& fs,
                                                            const RoutingInstance& inst) {
    std::vector<std::string> problems;
    if (fs.packets.size() != inst.packet_paths.size()) {
        problems.push_back("packet count mismatch");
        return {false, problems};
    }
    std::set<std::pair<int, long long>> occupied;
    for (size_t p = 0; p < fs.packets.size(); ++p) {
        const auto& transits = fs.packets[p];
        const auto& path = inst.packet_paths[p];
        if (transits.size() != path.size()) {
            problems.push_back("packet " + std::to_string(p) + " misses path edges");
            continue;
        }
        long long prev = 0;
        for (size_t i = 0; i < transits.size(); ++i) {
            if (transits[i].edge != path[i])
                problems.push_back("packet " + std::to_string(p) + " out of path order");
            if (transits[i].time <= prev)
                problems.push_back("packet " + std::to_string(p) + " times not increasing");
            prev = transits[i].time;
            if (!occupied.insert({transits[i].edge, transits[i].time}).second)
                problems.push_back("edge " + std::to_string(transits[i].edge) +
                                   " carries two packets at time " +
                                   std::to_string(transits[i].time));
        }
    }
    return {problems.empty(), problems};
}

// ----------------------------------------------------------------------
// End-to-end pipeline

namespace {

long long binomial_search_cout(long long c, long long i, long long iprime, long long m) {
    long long lo = std::max<long long>(1, (c * iprime) / std::max<long long>(i - iprime, 1));
    long long hi = c;
    if (!binomial_stage_ok(c, i, iprime, m, hi)) return c; // degenerate, always true at C
    while (lo < hi) {
        long long mid = lo + (hi - lo) / 2;
        if (binomial_stage_ok(c, i, iprime, m, mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return hi;
}

struct WidthChoice {
    long long c_out = 0;
    int d = 0;
    double alpha = 0.0;
};

// Best alpha for fixed (C', d) by ternary search on the slack.
double width_best_alpha(long long c, long long i, long long iprime, long long m, long long c_out,
                        int d) {
    auto slack = [&](double alpha) {
        double p = width_stage_p(c, iprime, alpha, d, c_out);
        if (!(p < 1.0)) return -1e18;
        return double(i - iprime) * alpha -
               double(m) * double(i) * double(i) * double(d) * p / (double(c) * (1.0 - p));
    };
    double lo = 1e-9, hi = 1.0;
    // Shrink hi until p < 0.5 to stay in the sane region.
    while (hi > lo && !(width_stage_p(c, iprime, hi, d, c_out) < 0.5)) hi *= 0.5;
    for (int it = 0; it < 80; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (slack(m1) < slack(m2))
            lo = m1;
        else
            hi = m2;
    }
    return 0.5 * (lo + hi);
}

std::optional<WidthChoice> width_search(long long c, long long i, long long iprime, long long m) {
    auto feasible = [&](long long c_out) -> std::optional<WidthChoice> {
        for (int d = 1; d <= int(std::min<long long>(c_out, 48)); ++d) {
            double alpha = width_best_alpha(c, i, iprime, m, c_out, d);
            if (width_stage_ok(c, i, iprime, m, c_out, d, alpha))
                return WidthChoice{c_out, d, alpha};
        }
        return std::nullopt;
    };
    long long lo = std::max<long long>(1, (c * iprime) / std::max<long long>(i - iprime, 1));
    long long hi = c;
    if (!feasible(hi)) return std::nullopt;
    while (lo < hi) {
        long long mid = lo + (hi - lo) / 2;
        if (feasible(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return feasible(hi);
}

// Cache of overflow tables by (T, T'). A table built at one (C, alpha)
// stays valid for any other evaluation point; only its optimality is tied
// to the build parameters, so the first-seen C is good enough here.
const OverflowTable& cached_overflow_table(long long T, long long Tprime, long long c,
                                           double alpha) {
    static std::map<std::pair<long long, long long>, OverflowTable> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(T, Tprime);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, build_overflow_hitting_set(T, Tprime, c, alpha, 1e-5)).first;
    return it->second;
}

} // namespace

EndToEndReport end_to_end(const RoutingInstance& inst, RouteStrategy strategy,
                          const std::optional<std::vector<LadderStage>>& ladder, uint64_t seed) {
    EndToEndReport rep;
    auto [c0, d0] = congestion_dilation(inst);
    rep.congestion = c0;
    rep.dilation = d0;

    InfeasibleSchedule cur = initial_schedule(inst);
    long long i_cur = std::max<long long>(cur.length, 2);
    long long c_cur = c0;
    uint64_t stage_idx = 0;

    auto apply_interval_stage = [&](const LadderStage& st) {
        IntervalParams p;
        p.i = st.i;
        p.iprime = st.iprime;
        p.m = st.m;
        p.c_in = c_cur;
        p.c_out = st.cprime;
        p.width_mode = st.mode == "width";
        p.d = st.d;
        p.alpha = st.alpha;
        cur = refine_interval(cur, p, derive_seed(seed, ++stage_idx));
        StageReport sr;
        sr.stage = st;
        sr.length_after = cur.length;
        sr.recounted_congestion = interval_congestion(cur, st.iprime, inst);
        rep.stages.push_back(sr);
        i_cur = st.iprime;
        c_cur = st.cprime;
    };

    if (ladder) {
        for (const auto& st : *ladder) {
            if (st.mode == "4frame") {
                OverflowTable loaded;
                if (!st.table_file.empty()) {
                    std::ifstream in(st.table_file);
                    if (!in) throw InputError("cannot open " + st.table_file);
                    loaded = load_overflow_table(in, st.T, st.Tprime);
                }
                const OverflowTable& table =
                    !st.table_file.empty()
                        ? loaded
                        : cached_overflow_table(st.T, st.Tprime, c_cur, st.alpha);
                FourFrameParams p;
                p.i = st.i;
                p.m = st.m;
                p.c_in = c_cur;
                p.T = st.T;
                p.Tprime = st.Tprime;
                p.alpha = st.alpha;
                cur = refine_4cond(cur, p, table, derive_seed(seed, ++stage_idx));
                StageReport sr;
                sr.stage = st;
                sr.length_after = cur.length;
                rep.stages.push_back(sr);
                rep.fourframe_engaged = true;
                rep.schedule = assemble_final(cur, st.T, st.Tprime, inst);
                rep.ratio = double(rep.schedule.makespan) / double(c0 + d0);
                return rep;
            }
            apply_interval_stage(st);
        }
        rep.schedule = expand_two_frames(cur, inst);
        rep.ratio = double(rep.schedule.makespan) / double(c0 + d0);
        return rep;
    }

    // Default desk-scale ladder: one stage down to 64-intervals, then
    // either a 4-frame finish or a final stage to 2-intervals.
    const long long m = 8;
    if (i_cur > 96) {
        LadderStage st;
        st.i = i_cur;
        st.iprime = 64;
        st.m = m;
        if (strategy == RouteStrategy::LllBasic) {
            st.mode = "binomial";
            st.cprime = binomial_search_cout(c_cur, st.i, st.iprime, m);
        } else {
            auto w = width_search(c_cur, st.i, st.iprime, m);
            if (w) {
                st.mode = "width";
                st.cprime = w->c_out;
                st.d = w->d;
                st.alpha = w->alpha;
            } else {
                st.mode = "binomial";
                st.cprime = binomial_search_cout(c_cur, st.i, st.iprime, m);
            }
        }
        apply_interval_stage(st);
    }

    if (strategy == RouteStrategy::Pra4Frame && i_cur >= 8 && i_cur % 2 == 0) {
        // Larger T tables get expensive to build; 4 and 5 cover the desk
        // scale where the 4-frame criterion is attainable at all.
        for (long long T = 4; T <= 5 && !rep.fourframe_engaged; ++T) {
            long long Tprime = T - 1;
            double alpha_build = 1.3 / double(std::max<long long>(c_cur, 1));
            const OverflowTable& table =
                cached_overflow_table(T, Tprime, c_cur, alpha_build);
            // Feasibility sweep over alpha for this table.
            double lo = 1.0 / double(i_cur - 4);
            for (double alpha = lo; alpha <= 8.0 * lo; alpha += lo / 4.0) {
                auto phis = table_phis(table, c_cur, alpha);
                double denom = 1.0 - phis[4];
                if (!(denom > 0.0)) continue;
                double ratio = (phis[0] + phis[1] + phis[2] + phis[3]) / denom;
                double lhs = double(i_cur - 4) * alpha -
                             double(m) * double(i_cur) * double(i_cur) / 2.0 * ratio;
                if (lhs < 1.0) continue;
                FourFrameParams p;
                p.i = i_cur;
                p.m = m;
                p.c_in = c_cur;
                p.T = T;
                p.Tprime = Tprime;
                p.alpha = alpha;
                cur = refine_4cond(cur, p, table, derive_seed(seed, ++stage_idx));
                LadderStage st;
                st.mode = "4frame";
                st.i = i_cur;
                st.m = m;
                st.T = T;
                st.Tprime = Tprime;
                st.alpha = alpha;
                StageReport sr;
                sr.stage = st;
                sr.length_after = cur.length;
                rep.stages.push_back(sr);
                rep.fourframe_engaged = true;
                rep.schedule = assemble_final(cur, T, Tprime, inst);
                rep.ratio = double(rep.schedule.makespan) / double(c0 + d0);
                return rep;
            }
        }
    }

    if (i_cur > 2) {
        LadderStage st;
        st.i = i_cur;
        st.iprime = 2;
        st.m = m;
        if (strategy == RouteStrategy::LllBasic) {
            st.mode = "binomial";
            st.cprime = binomial_search_cout(c_cur, st.i, st.iprime, m);
        } else {
            auto w = width_search(c_cur, st.i, st.iprime, m);
            if (w) {
                st.mode = "width";
                st.cprime = w->c_out;
                st.d = w->d;
                st.alpha = w->alpha;
            } else {
                st.mode = "binomial";
                st.cprime = binomial_search_cout(c_cur, st.i, st.iprime, m);
            }
        }
        apply_interval_stage(st);
    }

    rep.schedule = expand_two_frames(cur, inst);
    rep.ratio = double(rep.schedule.makespan) / double(c0 + d0);
    return rep;
}

} // namespace pra
