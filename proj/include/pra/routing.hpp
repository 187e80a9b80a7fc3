#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pra/engine.hpp"

namespace pra {

// Packets with fixed simple paths over an undirected graph.
struct RoutingInstance {
    int num_vertices = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> packet_paths; // edge indices, in order

    std::vector<Diagnostic> validate() const;
};

// (congestion, dilation): max packets through one edge, max path length.
std::pair<long long, long long> congestion_dilation(const RoutingInstance& inst);

struct TimedTransit {
    int edge = 0;
    long long time = 0;
};

// Relaxed schedule: any number of packets may share an edge per step.
// Each packet's transits follow its path order with increasing times.
struct InfeasibleSchedule {
    long long length = 0;
    std::vector<std::vector<TimedTransit>> packets;
};

// All packets start at time 1 and never wait.
InfeasibleSchedule initial_schedule(const RoutingInstance& inst);

// Max congestion over all edges and windows of the given length.
long long interval_congestion(const InfeasibleSchedule& sched, long long window,
                              const RoutingInstance& inst);

// Path order preserved and only delays introduced relative to `before`.
bool delays_only(const InfeasibleSchedule& before, const InfeasibleSchedule& after);

// Stage criteria ------------------------------------------------------

// e P(Binomial(C, i'/(i-i')) > C') (C m i^2 + 1) < 1.
bool binomial_stage_ok(long long c_in, long long i, long long iprime, long long m,
                       long long c_out);

// p = (C i' a)^d / (d! C(C'+1, d)).
double width_stage_p(long long c_in, long long iprime, double alpha, int d, long long c_out);

// p < 1 and (i - i') a - m i^2 d p / (C (1 - p)) >= 1.
bool width_stage_ok(long long c_in, long long i, long long iprime, long long m, long long c_out,
                    int d, double alpha);

struct IntervalParams {
    long long i = 0;
    long long iprime = 0;
    long long m = 0;
    long long c_in = 0;
    long long c_out = 0;
    bool width_mode = false;
    int d = 0;          // width mode
    double alpha = 0.0; // width mode
};

// One frame-by-frame refinement pass: output schedule has every
// iprime-interval congestion at most c_out and length <= L(1+1/m) + i.
InfeasibleSchedule refine_interval(const InfeasibleSchedule& sched, const IntervalParams& params,
                                   uint64_t seed);

// Overflow machinery ---------------------------------------------------

struct Overflow {
    long long of_minus = 0;
    long long of_plus = 0;
    long long a_final = 0;
    long long b_final = 0;
};

// Balancing loop: shifts transits out of a 2-frame with congestions
// (a, b) until a + b <= T, preferring the earlier slot on odd totals.
Overflow overflow_of(long long a, long long b, long long t_cap);

struct FourCondViolation {
    int edge = 0;
    long long t = 0; // window start; 0 marks boundary conditions
    long long value = 0;
};

struct FourCondReport {
    bool ok = true;
    std::vector<FourCondViolation> violations;
};

// OF+(c_t, c_{t+1}) + OF-(c_{t+2}, c_{t+3}) <= T' on every edge and odd t,
// plus the two boundary conditions.
FourCondReport check_4conditions(const InfeasibleSchedule& sched, long long t_cap,
                                 long long t_prime, const RoutingInstance& inst);

// Symmetric hitting-set table b(y0,y1,y2,y3) for the overflow events.
struct OverflowTable {
    long long T = 0, Tprime = 0;
    std::map<std::array<int, 4>, double> weights;
    std::vector<std::array<int, 4>> minimal_bad;
    // Values at the (C, alpha) the table was built/evaluated for.
    double phi[5] = {0, 0, 0, 0, 0}; // phi0..phi3, phi
    double achieved_ratio = 0.0;     // (phi0+..+phi3) / (1 - phi)

    double weight(int y0, int y1, int y2, int y3) const;
};

// Componentwise-minimal tuples violating the overflow condition; bounded
// by cap per component.
std::vector<std::array<int, 4>> minimal_bad_tuples(long long t_cap, long long t_prime,
                                                   long long component_cap);

// Coverage sum of the table against one tuple.
double table_coverage(const OverflowTable& table, const std::array<int, 4>& k);

// Exact coverage recheck over all minimal bad tuples.
bool recheck_table_coverage(const OverflowTable& table);

// phi0..phi3 and phi for per-type count C and weight alpha.
std::array<double, 5> table_phis(const OverflowTable& table, long long c, double alpha);

// Builds the table by solving the covering LP minimizing
// phi0+phi1+phi2+phi3 + target * phi, then re-targets at the achieved
// ratio. C bounds the per-type counts the phis are evaluated at.
OverflowTable build_overflow_hitting_set(long long t_cap, long long t_prime, long long c,
                                         double alpha, double target);

void save_overflow_table(const OverflowTable& table, std::ostream& out);
OverflowTable load_overflow_table(std::istream& in, long long t_cap, long long t_prime);

struct FourFrameParams {
    long long i = 0;
    long long m = 0;
    long long c_in = 0; // i-interval congestion bound of the input
    long long T = 0;
    long long Tprime = 0;
    double alpha = 0.0;
};

// Delay refinement whose output satisfies the 4-conditions for (T, T').
InfeasibleSchedule refine_4cond(const InfeasibleSchedule& sched, const FourFrameParams& params,
                                const OverflowTable& table, uint64_t seed);

// Final assembly --------------------------------------------------------

struct FeasibleSchedule {
    std::vector<std::vector<TimedTransit>> packets;
    long long makespan = 0;
    bool fallback_used = false; // some 2-frame missed the cong+1 target
};

// Requires check_4conditions(sched, T, T'); executes the overflow shifts
// and schedules 2-frames and overflow periods with the depth-2 scheduler.
FeasibleSchedule assemble_final(const InfeasibleSchedule& sched, long long t_cap,
                                long long t_prime, const RoutingInstance& inst);

// Expands each 2-frame of the schedule into congestion+1 feasible steps.
FeasibleSchedule expand_two_frames(const InfeasibleSchedule& sched, const RoutingInstance& inst);

// Unit capacity per edge-step, full paths in order.
std::pair<bool, std::vector<std::string>> validate_schedule(const FeasibleSchedule& fs,
                                                            const RoutingInstance& inst);

// End-to-end pipeline ----------------------------------------------------

enum class RouteStrategy { LllBasic, PraWidth, Pra4Frame };

struct LadderStage {
    std::string mode; // "binomial" | "width" | "4frame"
    long long i = 0, iprime = 0, m = 0, cprime = 0;
    int d = 0;
    double alpha = 0.0;
    long long T = 0, Tprime = 0;
    std::string table_file; // 4frame: load the hitting-set table instead of building it
};

struct StageReport {
    LadderStage stage;
    long long resamples = 0;
    long long length_after = 0;
    long long recounted_congestion = 0;
};

struct EndToEndReport {
    long long congestion = 0, dilation = 0;
    std::vector<StageReport> stages;
    FeasibleSchedule schedule;
    double ratio = 0.0; // makespan / (C + D)
    bool fourframe_engaged = false;
};

EndToEndReport end_to_end(const RoutingInstance& inst, RouteStrategy strategy,
                          const std::optional<std::vector<LadderStage>>& ladder, uint64_t seed);

} // namespace pra
