#include "pra/engine.hpp"

#include <cmath>

namespace pra {

namespace {

long long default_cap(const Instance& inst) {
    if (inst.lambda) {
        double tot = inst.lambda->total();
        return 100 * (long long)std::ceil(std::max(tot, 1.0));
    }
    return 1000000;
}

} // namespace

ResamplingTable make_resampling_table(const Instance& inst, const EngineConfig& cfg, int horizon) {
    if (horizon < 1) throw ArgumentError("make_resampling_table: horizon must be >= 1");
    ResamplingTable table;
    table.columns.resize(size_t(inst.num_vars()));
    for (int i = 0; i < inst.num_vars(); ++i) {
        Rng stream(derive_seed(cfg.seed, uint64_t(i)));
        auto& col = table.columns[size_t(i)];
        col.reserve(size_t(horizon));
        const auto& row = inst.probabilities.row(i);
        for (int t = 0; t < horizon; ++t) col.push_back(int(stream.discrete(row)));
    }
    return table;
}

Engine::Engine(const Instance& inst, EngineConfig cfg)
    : inst_(inst), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cap_ = cfg_.max_resamplings >= 0 ? cfg_.max_resamplings : default_cap(inst_);
    if (cfg_.table_mode) {
        var_streams_.reserve(size_t(inst_.num_vars()));
        for (int i = 0; i < inst_.num_vars(); ++i)
            var_streams_.emplace_back(derive_seed(cfg_.seed, uint64_t(i)));
    }
    assignment_.assign(size_t(inst_.num_vars()), 0);
}

int Engine::draw_value(int var) {
    const auto& row = inst_.probabilities.row(var);
    if (cfg_.table_mode) return int(var_streams_[size_t(var)].discrete(row));
    return int(rng_.discrete(row));
}

void Engine::init() {
    for (int i = 0; i < inst_.num_vars(); ++i) assignment_[size_t(i)] = draw_value(i);
    resamples_ = 0;
    log_.entries.clear();
    initialized_ = true;
    if (cfg_.on_state) cfg_.on_state(assignment_);
}

std::optional<std::pair<AtomicEvent, int>> Engine::select_violated() {
    switch (cfg_.selection_rule) {
        case SelectionRule::FirstReported:
        case SelectionRule::LowestLabel:
            // Labels are scanned in order either way; each oracle reports
            // its deterministic first event.
            return inst_.family.find_violated(assignment_);
        case SelectionRule::RandomAmongReported: {
            std::vector<std::pair<AtomicEvent, int>> found;
            for (int k = 0; k < inst_.family.label_count(); ++k)
                if (auto b = inst_.family.find_violated_in_label(assignment_, k))
                    found.push_back({*b, k});
            if (found.empty()) return std::nullopt;
            return found[size_t(rng_.uniform_int(found.size()))];
        }
    }
    return std::nullopt;
}

StepRecord Engine::step() {
    if (!initialized_) init();
    auto violated = select_violated();
    if (!violated) return StepRecord{};

    const auto& [b, k] = *violated;
    ElementSet y;
    if (cfg_.resample_scope == ResampleScope::FullDependency) {
        // MT behaviour: redraw the label's declared dependency variables.
        // The logged set carries the pre-resample values of those variables.
        for (int var : inst_.family.dependency_vars(k))
            y.push_back(Element{var, assignment_[size_t(var)]});
        y = make_element_set(std::move(y));
    } else {
        y = inst_.hitting_set(k).sample(b, rng_);
    }

    for (const Element& e : y) assignment_[size_t(e.var)] = draw_value(e.var);

    LogEntry entry;
    entry.y = y;
    entry.label = k;
    if (cfg_.record_violated) entry.violated = b;
    log_.entries.push_back(std::move(entry));
    ++resamples_;
    if (cfg_.on_state) cfg_.on_state(assignment_);

    StepRecord rec;
    rec.done = false;
    rec.violated = b;
    rec.label = k;
    rec.resampled = y;
    return rec;
}

RunResult Engine::run() {
    init();
    RunStatus status = RunStatus::Solved;
    while (true) {
        if (resamples_ >= cap_) {
            if (select_violated()) status = RunStatus::CapExceeded;
            break;
        }
        StepRecord rec = step();
        if (rec.done) break;
    }
    RunResult result;
    result.assignment = assignment_;
    result.resample_count = resamples_;
    result.status = status;
    result.log = std::move(log_);
    return result;
}

RunResult run(const Instance& inst, const EngineConfig& cfg) { return Engine(inst, cfg).run(); }

} // namespace pra
