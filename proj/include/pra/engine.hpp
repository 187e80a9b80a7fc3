#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pra/core.hpp"
#include "pra/hitting_set.hpp"
#include "pra/rng.hpp"

namespace pra {

enum class SelectionRule { FirstReported, LowestLabel, RandomAmongReported };
enum class ResampleScope { HittingSet, FullDependency };

struct EngineConfig {
    uint64_t seed = 0;
    // < 0 selects the default cap: 100 * ceil(sum lambda_i), or 1e6
    // when no lambda is present.
    long long max_resamplings = -1;
    SelectionRule selection_rule = SelectionRule::LowestLabel;
    ResampleScope resample_scope = ResampleScope::HittingSet;
    bool table_mode = false;
    bool record_violated = false; // keep B_t in the log entries
    // Observer called after the initial sample and after every resample.
    std::function<void(const std::vector<int>&)> on_state;
};

struct LogEntry {
    ElementSet y;
    int label = 0;
    std::optional<AtomicEvent> violated;
};

// The execution log (Y_1, k_1), ..., (Y_T, k_T); entries are 1-indexed in
// the operations that take a time t.
struct ExecutionLog {
    std::vector<LogEntry> entries;
    size_t length() const { return entries.size(); }
};

enum class RunStatus { Solved, CapExceeded };

struct RunResult {
    std::vector<int> assignment;
    long long resample_count = 0;
    RunStatus status = RunStatus::Solved;
    ExecutionLog log;
};

// Pre-drawn independent value streams, one per variable.
struct ResamplingTable {
    std::vector<std::vector<int>> columns; // [var][draw index]
};

// Infinite per-variable value streams; the table is a materialized prefix
// and table-mode runs consume the identical streams.
ResamplingTable make_resampling_table(const Instance& inst, const EngineConfig& cfg, int horizon);

struct StepRecord {
    bool done = true;
    AtomicEvent violated;
    int label = 0;
    ElementSet resampled;
};

class Engine {
public:
    Engine(const Instance& inst, EngineConfig cfg);

    // Draws the initial assignment.
    void init();

    // One oracle query plus (if violated) one resample.
    StepRecord step();

    // init + loop until solved or the cap is hit.
    RunResult run();

    const std::vector<int>& assignment() const { return assignment_; }
    long long resample_count() const { return resamples_; }
    const ExecutionLog& log() const { return log_; }
    long long cap() const { return cap_; }

private:
    int draw_value(int var);
    std::optional<std::pair<AtomicEvent, int>> select_violated();

    const Instance& inst_;
    EngineConfig cfg_;
    Rng rng_;
    std::vector<Rng> var_streams_; // table mode
    std::vector<int> assignment_;
    long long resamples_ = 0;
    long long cap_ = 0;
    ExecutionLog log_;
    bool initialized_ = false;
};

RunResult run(const Instance& inst, const EngineConfig& cfg);

} // namespace pra
