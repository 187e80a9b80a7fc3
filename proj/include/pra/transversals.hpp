#pragma once

#include <optional>
#include <vector>

#include "pra/criteria.hpp"
#include "pra/engine.hpp"

namespace pra {

// Vertex-partitioned graph. Vertices are 0..num_vertices-1; every vertex
// belongs to exactly one block.
class BlockGraph {
public:
    BlockGraph(int num_vertices, std::vector<std::pair<int, int>> edges,
               std::vector<std::vector<int>> blocks, std::vector<double> weights = {});

    int num_vertices() const { return n_; }
    int num_blocks() const { return int(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[size_t(v)]; }
    bool adjacent(int u, int v) const;
    int block_of(int v) const { return block_of_[size_t(v)]; }
    int index_in_block(int v) const { return index_in_block_[size_t(v)]; }
    int vertex(int block, int index) const { return blocks_[size_t(block)][size_t(index)]; }
    bool weighted() const { return !weights_.empty(); }
    double weight(int v) const { return weights_.empty() ? 1.0 : weights_[size_t(v)]; }
    double total_weight() const;

    int min_block_size() const { return b_; }
    int max_degree() const { return delta_; }
    // Maximum over blocks of the average degree of the block's vertices.
    double max_block_avg_degree() const { return avg_d_; }

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> blocks_;
    std::vector<double> weights_;
    std::vector<int> block_of_, index_in_block_;
    std::vector<std::vector<int>> adj_;
    int b_ = 0, delta_ = 0;
    double avg_d_ = 0.0;
};

struct TransversalResult {
    std::vector<int> vertices; // one per block
    RunStatus status = RunStatus::Solved;
    long long resamples = 0;
};

// Structural post-checks on a transversal.
bool edge_inside(const BlockGraph& g, const std::vector<int>& verts);
int max_induced_component(const BlockGraph& g, const std::vector<int>& verts);
bool triangle_inside(const BlockGraph& g, const std::vector<int>& verts);
int max_induced_degree(const BlockGraph& g, const std::vector<int>& verts);

// Edge-event instance with one label, edge weights 1/r, and the given
// per-element lambda. Shared by the transversal operations and tests.
Instance make_edge_instance(const BlockGraph& g, LambdaVector lam, double edge_weight, int r_mode);

// r = 1: independent transversal (b >= 4d); r = 2: no induced component
// of size > 2 (b >= 2d); r = 3: no triangle (b >= 4d/3).
TransversalResult transversal_omit(const BlockGraph& g, int r, uint64_t seed);

// Transversal in which every vertex has induced degree < s.
TransversalResult star_free_transversal(const BlockGraph& g, int s, uint64_t seed);

// Evaluates the explicit feasibility inequality for the star construction;
// exposed so callers can size instances.
bool star_criterion_holds(const BlockGraph& g, int s);

enum class WeightDirection { High, Low };

struct WeightedTransversal {
    TransversalResult result;
    double weight = 0.0;
};

// Independent transversal with a one-sided expected-weight guarantee.
WeightedTransversal weighted_transversal(const BlockGraph& g, WeightDirection dir, uint64_t seed);

// The expectation guarantee the construction promises for this graph
// (per-total-weight): High -> lower bound, Low -> upper bound.
double weighted_guarantee(const BlockGraph& g, WeightDirection dir);

struct DistributionStats {
    std::vector<double> freq;  // per vertex
    std::vector<double> upper; // envelope per vertex
    std::vector<double> lower;
    bool pass = true;
    long long trials = 0;
};

// Runs the PRA `trials` times on the edge instance with the given lambda
// and compares per-vertex selection frequencies against the
// distribution envelopes at 3 sigma.
DistributionStats transversal_distribution_stats(const BlockGraph& g, const LambdaVector& lam,
                                                 long long trials, uint64_t seed);

} // namespace pra
