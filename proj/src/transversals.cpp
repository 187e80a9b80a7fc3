#include "pra/transversals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pra/mathutil.hpp"
#include "pra/parallel.hpp"

namespace pra {

BlockGraph::BlockGraph(int num_vertices, std::vector<std::pair<int, int>> edges,
                       std::vector<std::vector<int>> blocks, std::vector<double> weights)
    : n_(num_vertices), edges_(std::move(edges)), blocks_(std::move(blocks)),
      weights_(std::move(weights)) {
    block_of_.assign(size_t(n_), -1);
    index_in_block_.assign(size_t(n_), -1);
    for (size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].empty()) throw InputError("block graph: empty block");
        for (size_t j = 0; j < blocks_[b].size(); ++j) {
            int v = blocks_[b][j];
            if (v < 0 || v >= n_) throw InputError("block graph: vertex out of range");
            if (block_of_[size_t(v)] != -1) throw InputError("block graph: vertex in two blocks");
            block_of_[size_t(v)] = int(b);
            index_in_block_[size_t(v)] = int(j);
        }
    }
    for (int v = 0; v < n_; ++v)
        if (block_of_[size_t(v)] == -1)
            throw InputError("block graph: vertex " + std::to_string(v) + " not in any block");
    if (!weights_.empty() && int(weights_.size()) != n_)
        throw InputError("block graph: weight list does not match vertex count");
    for (double w : weights_)
        if (w < 0.0) throw InputError("block graph: negative weight");

    adj_.assign(size_t(n_), {});
    for (auto& [u, v] : edges_) {
        if (u < 0 || u >= n_ || v < 0 || v >= n_ || u == v)
            throw InputError("block graph: bad edge");
        adj_[size_t(u)].push_back(v);
        adj_[size_t(v)].push_back(u);
    }
    for (auto& a : adj_) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    b_ = n_;
    for (const auto& blk : blocks_) b_ = std::min(b_, int(blk.size()));
    delta_ = 0;
    for (const auto& a : adj_) delta_ = std::max(delta_, int(a.size()));
    avg_d_ = 0.0;
    for (const auto& blk : blocks_) {
        double sum = 0.0;
        for (int v : blk) sum += double(adj_[size_t(v)].size());
        avg_d_ = std::max(avg_d_, sum / double(blk.size()));
    }
}

bool BlockGraph::adjacent(int u, int v) const {
    const auto& a = adj_[size_t(u)];
    return std::binary_search(a.begin(), a.end(), v);
}

double BlockGraph::total_weight() const {
    double sum = 0.0;
    for (int v = 0; v < n_; ++v) sum += weight(v);
    return sum;
}

bool edge_inside(const BlockGraph& g, const std::vector<int>& verts) {
    std::vector<char> in(size_t(g.num_vertices()), 0);
    for (int v : verts) in[size_t(v)] = 1;
    for (int v : verts)
        for (int u : g.neighbors(v))
            if (in[size_t(u)]) return true;
    return false;
}

int max_induced_component(const BlockGraph& g, const std::vector<int>& verts) {
    std::vector<char> in(size_t(g.num_vertices()), 0);
    for (int v : verts) in[size_t(v)] = 1;
    std::vector<char> seen(size_t(g.num_vertices()), 0);
    int best = 0;
    for (int s : verts) {
        if (seen[size_t(s)]) continue;
        int size = 0;
        std::vector<int> stack = {s};
        seen[size_t(s)] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++size;
            for (int u : g.neighbors(v))
                if (in[size_t(u)] && !seen[size_t(u)]) {
                    seen[size_t(u)] = 1;
                    stack.push_back(u);
                }
        }
        best = std::max(best, size);
    }
    return best;
}

bool triangle_inside(const BlockGraph& g, const std::vector<int>& verts) {
    std::vector<char> in(size_t(g.num_vertices()), 0);
    for (int v : verts) in[size_t(v)] = 1;
    for (int v : verts)
        for (int u : g.neighbors(v)) {
            if (!in[size_t(u)] || u <= v) continue;
            for (int w : g.neighbors(u))
                if (w > u && in[size_t(w)] && g.adjacent(v, w)) return true;
        }
    return false;
}

int max_induced_degree(const BlockGraph& g, const std::vector<int>& verts) {
    std::vector<char> in(size_t(g.num_vertices()), 0);
    for (int v : verts) in[size_t(v)] = 1;
    int best = 0;
    for (int v : verts) {
        int deg = 0;
        for (int u : g.neighbors(v))
            if (in[size_t(u)]) ++deg;
        best = std::max(best, deg);
    }
    return best;
}

namespace {

Element vertex_element(const BlockGraph& g, int v) {
    return Element{g.block_of(v), g.index_in_block(v)};
}

std::vector<int> assignment_vertices(const BlockGraph& g, const std::vector<int>& assignment) {
    std::vector<int> verts(assignment.size());
    for (size_t i = 0; i < assignment.size(); ++i)
        verts[i] = g.vertex(int(i), assignment[i]);
    return verts;
}

// Scans for the forbidden substructure of mode r among the chosen
// vertices, in deterministic index order.
class OmitOracle final : public LabelOracle {
public:
    OmitOracle(const BlockGraph& g, int r) : g_(g), r_(r) {}

    std::optional<AtomicEvent> find_violated(const std::vector<int>& assignment) const override {
        std::vector<int> verts = assignment_vertices(g_, assignment);
        std::vector<char> in(size_t(g_.num_vertices()), 0);
        for (int v : verts) in[size_t(v)] = 1;

        if (r_ == 1) {
            for (const auto& [u, v] : g_.edges())
                if (in[size_t(u)] && in[size_t(v)] && g_.block_of(u) != g_.block_of(v))
                    return AtomicEvent({vertex_element(g_, u), vertex_element(g_, v)});
            return std::nullopt;
        }
        if (r_ == 2) {
            // Any induced component of size > 2 contains a 2-edge path.
            for (int v : verts) {
                int first = -1;
                for (int u : g_.neighbors(v)) {
                    if (!in[size_t(u)]) continue;
                    if (first < 0) {
                        first = u;
                    } else {
                        return AtomicEvent({vertex_element(g_, v), vertex_element(g_, first),
                                            vertex_element(g_, u)});
                    }
                }
            }
            return std::nullopt;
        }
        // r == 3: triangles.
        for (int v : verts)
            for (int u : g_.neighbors(v)) {
                if (!in[size_t(u)] || u <= v) continue;
                for (int w : g_.neighbors(u))
                    if (w > u && in[size_t(w)] && g_.adjacent(v, w))
                        return AtomicEvent({vertex_element(g_, v), vertex_element(g_, u),
                                            vertex_element(g_, w)});
            }
        return std::nullopt;
    }

private:
    const BlockGraph& g_;
    int r_;
};

// A chosen vertex with >= s chosen neighbors; reports the center plus its
// s lowest-indexed chosen neighbors.
class StarOracle final : public LabelOracle {
public:
    StarOracle(const BlockGraph& g, int s) : g_(g), s_(s) {}

    std::optional<AtomicEvent> find_violated(const std::vector<int>& assignment) const override {
        std::vector<int> verts = assignment_vertices(g_, assignment);
        std::vector<char> in(size_t(g_.num_vertices()), 0);
        for (int v : verts) in[size_t(v)] = 1;
        for (int v : verts) {
            ElementSet star = {vertex_element(g_, v)};
            int count = 0;
            for (int u : g_.neighbors(v)) {
                if (!in[size_t(u)]) continue;
                star.push_back(vertex_element(g_, u));
                if (++count == s_) return AtomicEvent(std::move(star));
            }
        }
        return std::nullopt;
    }

private:
    const BlockGraph& g_;
    int s_;
};

// Weight C(s,r)^-1 on (r+1)-sets holding a vertex adjacent to all others.
// The sub-stars covering a reported s-star share its central vertex.
class StarHittingSet final : public HittingSet {
public:
    StarHittingSet(const BlockGraph& g, int s, int r)
        : g_(g), r_(r), inv_(1.0 / gen_binomial(double(s), r)) {}

    double weight(const ElementSet& y) const override {
        if (int(y.size()) != r_ + 1) return 0.0;
        std::vector<int> verts;
        verts.reserve(y.size());
        for (size_t i = 0; i < y.size(); ++i) {
            if (i > 0 && y[i].var == y[i - 1].var) return 0.0;
            verts.push_back(g_.vertex(y[i].var, y[i].value));
        }
        for (int c : verts) {
            bool center = true;
            for (int u : verts)
                if (u != c && !g_.adjacent(c, u)) {
                    center = false;
                    break;
                }
            if (center) return inv_;
        }
        return 0.0;
    }

    bool bowtie_null() const override { return true; }

private:
    const BlockGraph& g_;
    int r_;
    double inv_;
};

TransversalResult run_transversal(const BlockGraph& g, const Instance& inst, uint64_t seed) {
    EngineConfig cfg;
    cfg.seed = seed;
    RunResult res = run(inst, cfg);
    TransversalResult out;
    out.vertices = assignment_vertices(g, res.assignment);
    out.status = res.status;
    out.resamples = res.resample_count;
    return out;
}

} // namespace

Instance make_edge_instance(const BlockGraph& g, LambdaVector lam, double edge_weight, int r_mode) {
    Instance inst;
    inst.domain_sizes.resize(size_t(g.num_blocks()));
    for (int i = 0; i < g.num_blocks(); ++i)
        inst.domain_sizes[size_t(i)] = int(g.blocks()[size_t(i)].size());
    inst.lambda = std::move(lam);
    inst.probabilities = inst.lambda->derive_probabilities();

    BadEventFamily fam;
    fam.add_label(std::make_unique<OmitOracle>(g, r_mode));
    inst.family = std::move(fam);

    std::vector<std::pair<ElementSet, double>> entries;
    if (edge_weight > 0.0)
        for (const auto& [u, v] : g.edges()) {
            if (g.block_of(u) == g.block_of(v)) continue; // never chosen together
            entries.push_back(
                {make_element_set({vertex_element(g, u), vertex_element(g, v)}), edge_weight});
        }
    // Any two edges of a 2-path or triangle share a vertex: null bowtie.
    inst.hitting.push_back(std::make_shared<TabularHittingSet>(std::move(entries), true));
    return inst;
}

TransversalResult transversal_omit(const BlockGraph& g, int r, uint64_t seed) {
    if (r < 1 || r > 3) throw ArgumentError("transversal_omit: r must be 1, 2 or 3");
    const double b = double(g.min_block_size());
    const double d = g.max_block_avg_degree();
    if (b * double(r) < 4.0 * d - kRelTolerance)
        throw CriterionError("transversal_omit: requires b >= 4d/r (b=" + std::to_string(b) +
                             ", d=" + std::to_string(d) + ", r=" + std::to_string(r) + ")");

    // Midpoint of the feasible interval of b a - b d a^2 / r >= 1;
    // edgeless graphs take any alpha with b alpha >= 1.
    double alpha = d > 0.0 ? double(r) / (2.0 * d) : 2.0 / b;

    std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
    for (int i = 0; i < g.num_blocks(); ++i)
        lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), alpha);
    Instance inst = make_edge_instance(g, LambdaVector(std::move(lam)), 1.0 / double(r), r);
    return run_transversal(g, inst, seed);
}

bool star_criterion_holds(const BlockGraph& g, int s) {
    if (s > g.max_degree()) return true; // every transversal qualifies
    if (s < 2) return false;
    const double b = double(g.min_block_size());
    const double delta = double(g.max_degree());
    const int r = int(std::ceil(std::sqrt(double(s) * std::log(double(s)))));
    if (r >= s) return false;
    double lhs =
        b * double(r) * double(s - r) / (delta * std::pow(1.0 + r, 1.0 + 2.0 / double(r)));
    return lhs >= 1.0 - kRelTolerance;
}

TransversalResult star_free_transversal(const BlockGraph& g, int s, uint64_t seed) {
    if (s < 2) throw ArgumentError("star_free_transversal: s must be >= 2");

    Instance inst;
    inst.domain_sizes.resize(size_t(g.num_blocks()));
    for (int i = 0; i < g.num_blocks(); ++i)
        inst.domain_sizes[size_t(i)] = int(g.blocks()[size_t(i)].size());

    if (s > g.max_degree()) {
        // No vertex has s neighbors at all; a plain uniform pick works.
        std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
        for (int i = 0; i < g.num_blocks(); ++i)
            lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), 1.0);
        inst.lambda = LambdaVector(std::move(lam));
        inst.probabilities = inst.lambda->derive_probabilities();
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
        inst.family = std::move(fam);
        inst.hitting.push_back(std::make_shared<TrivialHittingSet>(std::vector<AtomicEvent>{}));
        return run_transversal(g, inst, seed);
    }

    if (!star_criterion_holds(g, s))
        throw CriterionError("star_free_transversal: block size too small for s=" +
                             std::to_string(s));

    const double delta = double(g.max_degree());
    const int r = int(std::ceil(std::sqrt(double(s) * std::log(double(s)))));
    const double alpha = double(s - r) / (delta * std::pow(1.0 + r, 2.0 / double(r)));

    std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
    for (int i = 0; i < g.num_blocks(); ++i)
        lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), alpha);
    inst.lambda = LambdaVector(std::move(lam));
    inst.probabilities = inst.lambda->derive_probabilities();
    BadEventFamily fam;
    fam.add_label(std::make_unique<StarOracle>(g, s));
    inst.family = std::move(fam);
    inst.hitting.push_back(std::make_shared<StarHittingSet>(g, s, r));
    return run_transversal(g, inst, seed);
}

double weighted_guarantee(const BlockGraph& g, WeightDirection dir) {
    const double b = double(g.min_block_size());
    const double delta = double(g.max_degree());
    if (dir == WeightDirection::High) {
        if (delta == 0.0) return 1.0 / b;
        return std::min(1.0 / b, 4.0 / (27.0 * delta - 2.0));
    }
    return 1.0 / b; // valid for b >= 8 delta
}

WeightedTransversal weighted_transversal(const BlockGraph& g, WeightDirection dir, uint64_t seed) {
    const double b = double(g.min_block_size());
    const double delta = double(g.max_degree());
    if (b < 4.0 * delta || (delta == 0.0 && b < 1.0))
        throw CriterionError("weighted_transversal: requires b >= 4*max_degree");

    std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
    for (int i = 0; i < g.num_blocks(); ++i) {
        const auto& blk = g.blocks()[size_t(i)];
        lam[size_t(i)].assign(blk.size(), 0.0);
        std::vector<int> order(blk.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            double wx = g.weight(blk[size_t(x)]), wy = g.weight(blk[size_t(y)]);
            if (wx != wy) return dir == WeightDirection::High ? wx > wy : wx < wy;
            return blk[size_t(x)] < blk[size_t(y)];
        });
        if (delta == 0.0) {
            // Edgeless: take the extreme vertex outright.
            lam[size_t(i)][size_t(order[0])] = 2.0;
            continue;
        }
        size_t r;
        double alpha;
        if (dir == WeightDirection::High) {
            if (b < 4.5 * delta) {
                alpha = (b - std::sqrt(b) * std::sqrt(b - 4.0 * delta)) / (2.0 * b * delta);
                r = blk.size(); // untruncated
            } else {
                alpha = 1.0 / (3.0 * delta);
                r = size_t(std::floor(4.5 * delta));
            }
        } else {
            alpha = 1.0 / (2.0 * delta);
            r = size_t(4.0 * delta);
        }
        r = std::min(r, blk.size());
        for (size_t u = 0; u < r; ++u) lam[size_t(i)][size_t(order[u])] = alpha;
    }

    Instance inst = make_edge_instance(g, LambdaVector(std::move(lam)), 1.0, 1);
    WeightedTransversal out;
    out.result = run_transversal(g, inst, seed);
    for (int v : out.result.vertices) out.weight += g.weight(v);
    return out;
}

DistributionStats transversal_distribution_stats(const BlockGraph& g, const LambdaVector& lam,
                                                 long long trials, uint64_t seed) {
    Instance inst = make_edge_instance(g, lam, 1.0, 1);
    ChargeReport report = charges(inst);

    std::vector<std::vector<int>> picks =
        parallel_map<std::vector<int>>(size_t(trials), [&](size_t trial) {
            EngineConfig cfg;
            cfg.seed = derive_seed(seed, trial);
            RunResult res = run(inst, cfg);
            return assignment_vertices(g, res.assignment);
        });
    std::vector<long long> counts(size_t(g.num_vertices()), 0);
    for (const auto& verts : picks)
        for (int v : verts) counts[size_t(v)]++;

    DistributionStats stats;
    stats.trials = trials;
    stats.freq.resize(size_t(g.num_vertices()));
    stats.upper.resize(size_t(g.num_vertices()));
    stats.lower.resize(size_t(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v) {
        stats.freq[size_t(v)] = double(counts[size_t(v)]) / double(trials);
        auto sb = singleton_bounds(g.block_of(v), {g.index_in_block(v)}, report);
        double up = sb.ok ? std::min(sb.upper, 1.0) : 1.0;
        double lo = sb.ok ? std::max(sb.lower, 0.0) : 0.0;
        stats.upper[size_t(v)] = up;
        stats.lower[size_t(v)] = lo;
        double s_up = std::sqrt(std::max(up * (1 - up), 1e-12) / double(trials));
        double s_lo = std::sqrt(std::max(lo * (1 - lo), 1e-12) / double(trials));
        if (stats.freq[size_t(v)] > up + 3.0 * s_up || stats.freq[size_t(v)] < lo - 3.0 * s_lo)
            stats.pass = false;
    }
    return stats;
}

} // namespace pra
