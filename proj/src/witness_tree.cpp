#include "pra/witness_tree.hpp"

#include <algorithm>
#include <cmath>

#include "pra/parallel.hpp"

namespace pra {

namespace {

std::string canonical_rec(const WitnessTree& tau, int v) {
    const WitnessNode& node = tau.nodes[size_t(v)];
    std::string s = "(";
    s += std::to_string(node.label);
    s += ":";
    for (const Element& e : node.y) {
        s += std::to_string(e.var);
        s += ",";
        s += std::to_string(e.value);
        s += ";";
    }
    std::vector<std::string> kids;
    kids.reserve(node.children.size());
    for (int c : node.children) kids.push_back(canonical_rec(tau, c));
    std::sort(kids.begin(), kids.end());
    for (auto& k : kids) s += k;
    s += ")";
    return s;
}

} // namespace

std::string WitnessTree::canonical() const {
    if (nodes.empty()) return "()";
    return canonical_rec(*this, 0);
}

WitnessTree build_witness_tree(const ExecutionLog& log, size_t t, const BadEventFamily& fam) {
    if (t < 1 || t > log.length())
        throw ArgumentError("build_witness_tree: t out of range");

    WitnessTree tau;
    const LogEntry& root = log.entries[t - 1];
    tau.nodes.push_back(WitnessNode{root.y, root.label, -1, {}, false, 0});

    // Saturation: a node with a bowtie-child may not take another one.
    std::vector<char> saturated(1, 0);

    for (size_t j = t - 1; j >= 1; --j) {
        const LogEntry& entry = log.entries[j - 1]; // entries are 0-based, j is 1-based
        const ElementSet& yj = entry.y;
        const int kj = entry.label;

        int best = -1;
        bool best_bowtie = false;
        for (size_t v = 0; v < tau.nodes.size(); ++v) {
            const WitnessNode& node = tau.nodes[v];
            bool eligible = false;
            bool via_bowtie = false;
            if (shares_variable(node.y, yj)) {
                eligible = true;
            } else if (node.label == kj && !saturated[v] &&
                       fam.pair_in_event(kj, yj, node.y)) {
                eligible = true;
                via_bowtie = true;
            }
            if (!eligible) continue;
            // Greatest depth wins; ties go to the earliest-inserted node.
            if (best < 0 || tau.nodes[size_t(v)].depth > tau.nodes[size_t(best)].depth) {
                best = int(v);
                best_bowtie = via_bowtie;
            }
        }
        if (best < 0) continue;

        WitnessNode child;
        child.y = yj;
        child.label = kj;
        child.parent = best;
        child.bowtie_child = best_bowtie;
        child.depth = tau.nodes[size_t(best)].depth + 1;
        tau.nodes.push_back(std::move(child));
        tau.nodes[size_t(best)].children.push_back(int(tau.nodes.size()) - 1);
        saturated.push_back(0);
        if (best_bowtie) saturated[size_t(best)] = 1;
    }
    return tau;
}

double tree_weight(const WitnessTree& tau, const Instance& inst) {
    double w = 1.0;
    for (const WitnessNode& node : tau.nodes) {
        double q = inst.hitting_set(node.label).weight(node.y);
        w *= inst.probabilities.power(node.y) * q;
    }
    return w;
}

bool check_depth_independence(const WitnessTree& tau) {
    for (size_t a = 0; a < tau.nodes.size(); ++a)
        for (size_t b = a + 1; b < tau.nodes.size(); ++b) {
            if (tau.nodes[a].depth != tau.nodes[b].depth) continue;
            if (shares_variable(tau.nodes[a].y, tau.nodes[b].y)) return false;
        }
    return true;
}

WtlResult verify_wtl(const Instance& inst, const WitnessTree& tau, long long trials,
                     uint64_t seed) {
    const std::string target = tau.canonical();

    std::vector<long long> hits = parallel_map<long long>(size_t(trials), [&](size_t trial) {
        EngineConfig cfg;
        cfg.seed = derive_seed(seed, trial);
        RunResult res = run(inst, cfg);
        if (res.status == RunStatus::CapExceeded) return 1LL; // conservative
        for (size_t t = 1; t <= res.log.length(); ++t) {
            WitnessTree built = build_witness_tree(res.log, t, inst.family);
            if (built.size() == tau.size() && built.canonical() == target) return 1LL;
        }
        return 0LL;
    });

    WtlResult out;
    out.trials = trials;
    for (long long h : hits) out.appearances += h;
    out.empirical_freq = double(out.appearances) / double(trials);
    out.bound = tree_weight(tau, inst);
    double sigma = std::sqrt(std::max(out.bound * (1.0 - out.bound), 1e-12) / double(trials));
    out.pass = out.empirical_freq <= out.bound + 3.0 * sigma;
    return out;
}

} // namespace pra
