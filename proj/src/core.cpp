#include "pra/core.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "pra/hitting_set.hpp"

namespace pra {

LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* v = std::getenv("PRA_LOG_LEVEL");
        if (!v) return LogLevel::Quiet;
        std::string s(v);
        if (s == "trace") return LogLevel::Trace;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Quiet;
    }();
    return lvl;
}

void log_info(const std::string& msg) {
    if (log_level() != LogLevel::Quiet) std::fprintf(stderr, "[pra] %s\n", msg.c_str());
}

ElementSet make_element_set(std::vector<Element> elems) {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    return elems;
}

bool is_canonical(const ElementSet& s) {
    return std::is_sorted(s.begin(), s.end()) &&
           std::adjacent_find(s.begin(), s.end()) == s.end();
}

bool contains_subset(const ElementSet& big, const ElementSet& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool shares_variable(const ElementSet& a, const ElementSet& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].var == b[j].var) return true;
        if (a[i].var < b[j].var) ++i;
        else ++j;
    }
    return false;
}

bool involves_variable(const ElementSet& s, int var) {
    auto it = std::lower_bound(s.begin(), s.end(), Element{var, INT32_MIN});
    return it != s.end() && it->var == var;
}

bool AtomicEvent::has_variable_clash() const {
    for (size_t i = 1; i < elems.size(); ++i)
        if (elems[i].var == elems[i - 1].var) return true;
    return false;
}

bool AtomicEvent::true_under(const std::vector<int>& assignment) const {
    for (const Element& e : elems)
        if (assignment[e.var] != e.value) return false;
    return true;
}

double ProbabilityModel::power(const ElementSet& y) const {
    double prod = 1.0;
    for (const Element& e : y) prod *= p_[e.var][e.value];
    return prod;
}

std::vector<int> ProbabilityModel::renormalize(double tol) {
    std::vector<int> bad;
    for (size_t i = 0; i < p_.size(); ++i) {
        double sum = 0.0;
        for (double v : p_[i]) sum += v;
        if (std::abs(sum - 1.0) > tol || sum <= 0.0) {
            bad.push_back(int(i));
            continue;
        }
        for (double& v : p_[i]) v /= sum;
    }
    return bad;
}

double LambdaVector::var_total(int i) const {
    double sum = 0.0;
    for (double v : lam_[i]) sum += v;
    return sum;
}

double LambdaVector::total() const {
    double sum = 0.0;
    for (int i = 0; i < num_vars(); ++i) sum += var_total(i);
    return sum;
}

double LambdaVector::power(const ElementSet& y) const {
    double prod = 1.0;
    for (const Element& e : y) prod *= lam_[e.var][e.value];
    return prod;
}

ProbabilityModel LambdaVector::derive_probabilities() const {
    std::vector<std::vector<double>> p(lam_.size());
    for (size_t i = 0; i < lam_.size(); ++i) {
        double li = var_total(int(i));
        if (!(li > 0.0))
            throw InputError("lambda: variable " + std::to_string(i) + " has zero total weight");
        p[i].resize(lam_[i].size());
        for (size_t j = 0; j < lam_[i].size(); ++j) p[i][j] = lam_[i][j] / li;
    }
    return ProbabilityModel(std::move(p));
}

bool LabelOracle::pair_in_event(const ElementSet& y, const ElementSet& yp) const {
    const auto* events = enumerated();
    if (!events)
        throw UnsupportedQueryError("containment query on a family without enumeration");
    for (const AtomicEvent& b : *events)
        if (contains_subset(b.elems, y) && contains_subset(b.elems, yp)) return true;
    return false;
}

std::vector<int> LabelOracle::dependency_vars() const {
    const auto* events = enumerated();
    if (!events)
        throw UnsupportedQueryError("dependency query on a family without enumeration");
    std::vector<int> vars;
    for (const AtomicEvent& b : *events)
        for (const Element& e : b.elems) vars.push_back(e.var);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

EnumeratedLabel::EnumeratedLabel(std::vector<AtomicEvent> events) : events_(std::move(events)) {}

std::optional<AtomicEvent> EnumeratedLabel::find_violated(const std::vector<int>& assignment) const {
    // Ties among true events go to the lowest variable index, then to
    // enumeration order; the rule is arbitrary but must be fixed.
    const AtomicEvent* best = nullptr;
    for (const AtomicEvent& b : events_) {
        if (!b.true_under(assignment)) continue;
        if (!best || (!b.elems.empty() && !best->elems.empty() &&
                      b.elems.front().var < best->elems.front().var))
            best = &b;
    }
    if (!best) return std::nullopt;
    return *best;
}

bool FamilyBackend::pair_in_event(int k, const ElementSet& y, const ElementSet& yp) const {
    const auto* events = enumerated(k);
    if (!events)
        throw UnsupportedQueryError("containment query on a family without enumeration");
    for (const AtomicEvent& b : *events)
        if (contains_subset(b.elems, y) && contains_subset(b.elems, yp)) return true;
    return false;
}

std::vector<int> FamilyBackend::dependency_vars(int k) const {
    const auto* events = enumerated(k);
    if (!events)
        throw UnsupportedQueryError("dependency query on a family without enumeration");
    std::vector<int> vars;
    for (const AtomicEvent& b : *events)
        for (const Element& e : b.elems) vars.push_back(e.var);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

int BadEventFamily::label_count() const {
    return backend_ ? backend_->label_count() : int(labels_.size());
}

std::optional<std::pair<AtomicEvent, int>> BadEventFamily::find_violated(
    const std::vector<int>& assignment) const {
    if (backend_) return backend_->find_violated(assignment);
    for (size_t k = 0; k < labels_.size(); ++k)
        if (auto b = labels_[k]->find_violated(assignment)) return std::make_pair(*b, int(k));
    return std::nullopt;
}

std::optional<AtomicEvent> BadEventFamily::find_violated_in_label(
    const std::vector<int>& assignment, int k) const {
    if (backend_) return backend_->find_violated_in_label(assignment, k);
    return labels_[size_t(k)]->find_violated(assignment);
}

const std::vector<AtomicEvent>* BadEventFamily::enumerated(int k) const {
    if (backend_) return backend_->enumerated(k);
    return labels_[size_t(k)]->enumerated();
}

bool BadEventFamily::pair_in_event(int k, const ElementSet& y, const ElementSet& yp) const {
    if (backend_) return backend_->pair_in_event(k, y, yp);
    return labels_[size_t(k)]->pair_in_event(y, yp);
}

std::vector<int> BadEventFamily::dependency_vars(int k) const {
    if (backend_) return backend_->dependency_vars(k);
    return labels_[size_t(k)]->dependency_vars();
}

const HittingSet& Instance::hitting_set(int k) const {
    if (hitting_for_label) return hitting_for_label(k);
    if (size_t(k) >= hitting.size() || !hitting[size_t(k)])
        throw InputError("label " + std::to_string(k) + " has no hitting set");
    return *hitting[size_t(k)];
}

Relation relate(const ElementSet& y, const ElementSet& yp, int k, const BadEventFamily& fam) {
    if (y.empty() || yp.empty()) throw ArgumentError("relate: element sets must be nonempty");
    if (shares_variable(y, yp)) return Relation::Sim;
    if (fam.pair_in_event(k, y, yp)) return Relation::Bowtie;
    return Relation::None;
}

bool is_neighbor_set(const std::vector<SupportedPair>& t, const ElementSet& y, int k,
                     const BadEventFamily& fam) {
    int bowtie_count = 0;
    for (size_t a = 0; a < t.size(); ++a) {
        Relation r = relate(t[a].set, y, k, fam);
        if (r == Relation::None) return false;
        if (r == Relation::Bowtie) {
            // Only same-label pairs count toward the single allowed bowtie.
            if (t[a].label != k) return false;
            if (++bowtie_count > 1) return false;
        }
        for (size_t b = a + 1; b < t.size(); ++b)
            if (shares_variable(t[a].set, t[b].set)) return false;
    }
    return true;
}

bool is_strict_neighbor_set(const std::vector<ElementSet>& t, const ElementSet& e) {
    for (size_t a = 0; a < t.size(); ++a) {
        if (!shares_variable(t[a], e)) return false;
        for (size_t b = a + 1; b < t.size(); ++b)
            if (shares_variable(t[a], t[b])) return false;
    }
    return true;
}

std::vector<Diagnostic> validate_instance(const Instance& inst) {
    std::vector<Diagnostic> out;
    const int n = inst.num_vars();

    if (inst.probabilities.num_vars() != n)
        out.push_back({"probability-shape", "probability rows do not match variable count"});

    for (int i = 0; i < std::min(n, inst.probabilities.num_vars()); ++i) {
        if (inst.probabilities.domain_size(i) != inst.domain_sizes[i]) {
            out.push_back({"probability-shape",
                           "probability row " + std::to_string(i) + " does not match domain size"});
            continue;
        }
        double sum = 0.0;
        for (int j = 0; j < inst.domain_sizes[i]; ++j) {
            double p = inst.probabilities.prob(i, j);
            if (p < 0.0 || p > 1.0)
                out.push_back({"probability-range",
                               "p[" + std::to_string(i) + "][" + std::to_string(j) + "] out of [0,1]"});
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            out.push_back({"probability-normalization",
                           "probabilities of variable " + std::to_string(i) + " sum to " +
                               std::to_string(sum)});
    }

    if (inst.lambda) {
        if (inst.lambda->num_vars() != n)
            out.push_back({"lambda-shape", "lambda rows do not match variable count"});
        for (int i = 0; i < std::min(n, inst.lambda->num_vars()); ++i)
            for (int j = 0; j < inst.lambda->domain_size(i); ++j)
                if (inst.lambda->at(i, j) < 0.0)
                    out.push_back({"lambda-range",
                                   "lambda[" + std::to_string(i) + "][" + std::to_string(j) +
                                       "] is negative"});
    }

    auto check_event = [&](const AtomicEvent& b, int k) {
        if (b.has_variable_clash())
            out.push_back({"impossible-event",
                           "label " + std::to_string(k) + " has an event with two values of one variable"});
        for (const Element& e : b.elems) {
            if (e.var < 0 || e.var >= n || e.value < 0 || e.value >= inst.domain_sizes[e.var]) {
                out.push_back({"element-range",
                               "label " + std::to_string(k) + " references element (" +
                                   std::to_string(e.var) + "," + std::to_string(e.value) +
                                   ") outside the declared domains"});
                return;
            }
        }
    };
    for (int k = 0; k < inst.family.label_count(); ++k)
        if (const auto* events = inst.family.enumerated(k))
            for (const AtomicEvent& b : *events) check_event(b, k);

    if (!inst.hitting.empty() && int(inst.hitting.size()) != inst.family.label_count())
        out.push_back({"hitting-shape", "hitting sets do not match label count"});

    return out;
}

} // namespace pra
