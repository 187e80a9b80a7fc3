#pragma once

#include <string>
#include <vector>

#include "pra/engine.hpp"

namespace pra {

struct WitnessNode {
    ElementSet y;
    int label = 0;
    int parent = -1;
    std::vector<int> children;
    bool bowtie_child = false; // attached to its parent through the bowtie rule
    int depth = 0;             // root has depth 0
};

// Rooted labeled tree reconstructing the causal history of one resampling.
struct WitnessTree {
    std::vector<WitnessNode> nodes; // nodes[0] is the root when nonempty

    bool empty() const { return nodes.empty(); }
    size_t size() const { return nodes.size(); }

    // Structural identity: labels with children as multisets. Attachment
    // tie-breaks do not affect it.
    std::string canonical() const;
};

// Builds the witness tree for time t (1-indexed) from an execution log.
// The backward pass attaches each earlier entry at the greatest-depth
// eligible node; ties break toward the earliest-inserted node.
WitnessTree build_witness_tree(const ExecutionLog& log, size_t t, const BadEventFamily& fam);

// Product over nodes of p^Y Q_k(Y).
double tree_weight(const WitnessTree& tau, const Instance& inst);

// No two equal-depth nodes have SIM-related labels.
bool check_depth_independence(const WitnessTree& tau);

struct WtlResult {
    double empirical_freq = 0.0;
    double bound = 0.0; // w(tau)
    bool pass = false;
    long long appearances = 0;
    long long trials = 0;
};

// Monte Carlo check of the witness-tree probability bound: runs the engine
// `trials` times, counts runs in which some time t has witness tree equal
// to tau. Cap-exceeded runs count as appearances.
WtlResult verify_wtl(const Instance& inst, const WitnessTree& tau, long long trials, uint64_t seed);

} // namespace pra
