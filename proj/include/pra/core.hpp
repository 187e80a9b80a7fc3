#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pra/common.hpp"

namespace pra {

// An element is a (variable, value) pair.
struct Element {
    int var = 0;
    int value = 0;

    friend auto operator<=>(const Element&, const Element&) = default;
};

// Element sets are kept sorted by (var, value) and duplicate-free.
using ElementSet = std::vector<Element>;

ElementSet make_element_set(std::vector<Element> elems);
bool is_canonical(const ElementSet& s);
bool contains_subset(const ElementSet& big, const ElementSet& small);

// True iff the two sets overlap in a variable.
bool shares_variable(const ElementSet& a, const ElementSet& b);
bool involves_variable(const ElementSet& s, int var);

// A conjunction of element assignments; at most one value per variable.
struct AtomicEvent {
    ElementSet elems;

    AtomicEvent() = default;
    explicit AtomicEvent(ElementSet e) : elems(make_element_set(std::move(e))) {}

    bool has_variable_clash() const;
    bool true_under(const std::vector<int>& assignment) const;
};

// Per-element sampling probabilities; rows must sum to 1.
class ProbabilityModel {
public:
    ProbabilityModel() = default;
    explicit ProbabilityModel(std::vector<std::vector<double>> p) : p_(std::move(p)) {}

    int num_vars() const { return int(p_.size()); }
    int domain_size(int i) const { return int(p_[i].size()); }
    double prob(int i, int j) const { return p_[i][j]; }
    const std::vector<double>& row(int i) const { return p_[i]; }

    // Product of p over the set's elements (empty set -> 1).
    double power(const ElementSet& y) const;

    // Divides each row by its sum when within tol of 1; reports rows that
    // are further off instead of touching them.
    std::vector<int> renormalize(double tol = kProbTolerance);

private:
    std::vector<std::vector<double>> p_;
};

// Non-negative per-element weights lambda with per-variable sums.
class LambdaVector {
public:
    LambdaVector() = default;
    explicit LambdaVector(std::vector<std::vector<double>> lam) : lam_(std::move(lam)) {}

    int num_vars() const { return int(lam_.size()); }
    int domain_size(int i) const { return int(lam_[i].size()); }
    double at(int i, int j) const { return lam_[i][j]; }
    double& at(int i, int j) { return lam_[i][j]; }
    const std::vector<double>& row(int i) const { return lam_[i]; }

    double var_total(int i) const;
    double total() const;
    double power(const ElementSet& y) const;

    // p_{i,j} = lambda_{i,j} / lambda_i.
    ProbabilityModel derive_probabilities() const;

private:
    std::vector<std::vector<double>> lam_;
};

// Oracle for one label's set of atomic bad events. Implementations may be
// backed by an explicit enumeration or by application-specific search.
class LabelOracle {
public:
    virtual ~LabelOracle() = default;

    // Reports a currently-true atomic event, or nothing. Deterministic scan
    // order is required of implementations (reproducibility).
    virtual std::optional<AtomicEvent> find_violated(const std::vector<int>& assignment) const = 0;

    // Explicit enumeration when available.
    virtual const std::vector<AtomicEvent>* enumerated() const { return nullptr; }

    // True iff some event of this label contains both sets. The default
    // scans the enumeration and throws UnsupportedQueryError without one.
    virtual bool pair_in_event(const ElementSet& y, const ElementSet& yp) const;

    // Declared dependency set for full-resampling mode. Defaults to the
    // union of variables over the enumeration.
    virtual std::vector<int> dependency_vars() const;
};

// Enumerated label: a plain list of atomic events scanned in order.
class EnumeratedLabel final : public LabelOracle {
public:
    explicit EnumeratedLabel(std::vector<AtomicEvent> events);

    std::optional<AtomicEvent> find_violated(const std::vector<int>& assignment) const override;
    const std::vector<AtomicEvent>* enumerated() const override { return &events_; }

private:
    std::vector<AtomicEvent> events_;
};

// Whole-family oracle for applications whose label space is too large to
// hold one object per label (e.g. one label per edge-interval pair).
class FamilyBackend {
public:
    virtual ~FamilyBackend() = default;
    virtual int label_count() const = 0;
    virtual std::optional<std::pair<AtomicEvent, int>> find_violated(
        const std::vector<int>& assignment) const = 0;
    virtual std::optional<AtomicEvent> find_violated_in_label(const std::vector<int>& assignment,
                                                              int k) const = 0;
    virtual const std::vector<AtomicEvent>* enumerated(int) const { return nullptr; }
    virtual bool pair_in_event(int k, const ElementSet& y, const ElementSet& yp) const;
    virtual std::vector<int> dependency_vars(int k) const;
};

class BadEventFamily {
public:
    BadEventFamily() = default;

    void add_label(std::unique_ptr<LabelOracle> oracle) { labels_.push_back(std::move(oracle)); }
    void set_backend(std::unique_ptr<FamilyBackend> backend) { backend_ = std::move(backend); }

    int label_count() const;
    // First violated (event, label) in label order, or nothing.
    std::optional<std::pair<AtomicEvent, int>> find_violated(const std::vector<int>& assignment) const;
    std::optional<AtomicEvent> find_violated_in_label(const std::vector<int>& assignment, int k) const;
    const std::vector<AtomicEvent>* enumerated(int k) const;
    bool pair_in_event(int k, const ElementSet& y, const ElementSet& yp) const;
    std::vector<int> dependency_vars(int k) const;

private:
    std::vector<std::unique_ptr<LabelOracle>> labels_;
    std::unique_ptr<FamilyBackend> backend_;
};

enum class Relation { None, Sim, Bowtie };

// SIM iff the sets share a variable; else BOWTIE iff some event of label k
// contains both; else NONE. SIM and BOWTIE are exclusive by construction.
Relation relate(const ElementSet& y, const ElementSet& yp, int k, const BadEventFamily& fam);

// A neighbor-set member: a candidate (Z, l) pair.
struct SupportedPair {
    ElementSet set;
    int label = 0;
};

// Checks the three neighbor-set conditions for T against (y, k).
bool is_neighbor_set(const std::vector<SupportedPair>& t, const ElementSet& y, int k,
                     const BadEventFamily& fam);

// Strict neighbor-set: every member SIM-related to e, members pairwise
// SIM-independent.
bool is_strict_neighbor_set(const std::vector<ElementSet>& t, const ElementSet& e);

class HittingSet; // hitting_set.hpp

// A full problem instance: variables, probabilities (or lambda), the
// bad-event family and one hitting set per label. Immutable once built.
struct Instance {
    std::vector<int> domain_sizes;
    ProbabilityModel probabilities;
    std::optional<LambdaVector> lambda;
    BadEventFamily family;
    std::vector<std::shared_ptr<const HittingSet>> hitting; // per label
    // Overrides the vector when the label space is huge (one structural
    // hitting set serving every label).
    std::function<const HittingSet&(int)> hitting_for_label;

    int num_vars() const { return int(domain_sizes.size()); }
    const HittingSet& hitting_set(int k) const;
};

struct Diagnostic {
    std::string code;
    std::string message;
};

// Lists violations of the model invariants; empty iff well-formed.
std::vector<Diagnostic> validate_instance(const Instance& inst);

} // namespace pra
