// Command-line front end: instance parsing, subcommand dispatch, reports.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pra/io.hpp"

using namespace pra;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriterion = 2;
constexpr int kExitCap = 3;
constexpr int kExitInput = 4;

// Family stub for log-only witness construction: no events are
// enumerable, so only SIM attachments are possible.
class NullBowtieBackend final : public FamilyBackend {
public:
    explicit NullBowtieBackend(int labels) : labels_(labels) {}
    int label_count() const override { return labels_; }
    std::optional<std::pair<AtomicEvent, int>> find_violated(const std::vector<int>&) const override {
        return std::nullopt;
    }
    std::optional<AtomicEvent> find_violated_in_label(const std::vector<int>&, int) const override {
        return std::nullopt;
    }
    bool pair_in_event(int, const ElementSet&, const ElementSet&) const override { return false; }

private:
    int labels_;
};

int status_exit(RunStatus status) {
    return status == RunStatus::Solved ? kExitOk : kExitCap;
}

void print_report(const Json& report, const std::string& format) {
    std::cout << render_report(report, format);
}

struct Timing {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    ~Timing() {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        log_info("wall time: " + std::to_string(ms) + " ms");
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial-resampling solver and applications"};
    app.require_subcommand(1);
    app.fallthrough(); // --seed / --format may follow the subcommand

    std::string format = "text";
    app.add_option("--format", format, "Report format (text or json)")
        ->check(CLI::IsMember({"text", "json"}));
    uint64_t seed = 1;
    app.add_option("--seed", seed, "Master seed; trial seeds derive from it");

    // --- solve ---------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "Run the resampling loop on an instance");
    std::string solve_instance, solve_log;
    long long solve_cap = -1;
    solve_cmd->add_option("--instance", solve_instance, "Instance JSON file")->required();
    solve_cmd->add_option("--max-resamplings", solve_cap, "Resampling cap (default derived)");
    solve_cmd->add_option("--log", solve_log, "Write the execution log (JSONL)");

    // --- check ---------------------------------------------------------
    auto* check_cmd = app.add_subcommand("check", "Evaluate the lambda convergence criterion");
    std::string check_instance, check_variant = "a";
    check_cmd->add_option("--instance", check_instance, "Instance JSON file")->required();
    check_cmd->add_option("--variant", check_variant, "Criterion variant (a, b or c)")
        ->check(CLI::IsMember({"a", "b", "c"}));

    // --- chernoff ------------------------------------------------------
    auto* chern_cmd = app.add_subcommand("chernoff", "Tail separation function and width bound");
    double chern_mu = 0.0, chern_t = 0.0;
    int chern_d = -1;
    chern_cmd->add_option("--mu", chern_mu, "Mean")->required();
    chern_cmd->add_option("--t", chern_t, "Threshold")->required();
    chern_cmd->add_option("--d", chern_d, "Width (default ceil(t - mu))");

    // --- witness -------------------------------------------------------
    auto* wit_cmd = app.add_subcommand("witness", "Build the witness tree for a log time");
    std::string wit_log, wit_instance;
    long long wit_t = 1;
    wit_cmd->add_option("--log", wit_log, "Execution log (JSONL)");
    wit_cmd->add_option("--t", wit_t, "1-based log time");
    wit_cmd->add_option("--instance", wit_instance,
                        "Instance file (enables bowtie attachments)");
    auto* wit_verify = wit_cmd->add_subcommand("verify", "Monte Carlo witness-tree bound check");
    std::string wv_instance, wv_tree;
    long long wv_trials = 10000;
    wit_verify->add_option("--instance", wv_instance, "Instance JSON file")->required();
    wit_verify->add_option("--tree", wv_tree, "Witness tree JSON file")->required();
    wit_verify->add_option("--trials", wv_trials, "Number of runs");

    // --- transversal ---------------------------------------------------
    auto* trans_cmd = app.add_subcommand("transversal", "Block-graph transversal applications");
    std::string trans_graph, trans_mode = "indep";
    long long trans_trials = 1;
    trans_cmd->add_option("--graph", trans_graph, "Block graph JSON file")->required();
    trans_cmd->add_option("--mode", trans_mode,
                          "indep | comp2 | nok3 | star:<s> | weight-high | weight-low");
    trans_cmd->add_option("--trials", trans_trials, "Repetitions (best weight reported)");

    // --- pack ----------------------------------------------------------
    auto* pack_cmd = app.add_subcommand("pack", "Round a column-sparse packing system");
    std::string pack_instance;
    double pack_eps = -1.0;
    pack_cmd->add_option("--instance", pack_instance, "Packing JSON file")->required();
    pack_cmd->add_option("--eps", pack_eps, "Epsilon (default 1/(D+1))");

    // --- discrepancy ---------------------------------------------------
    auto* disc_cmd = app.add_subcommand("discrepancy", "Plus/minus-one coloring of a matrix");
    std::string disc_matrix;
    disc_cmd->add_option("--matrix", disc_matrix, "CSV or JSON matrix file")->required();

    // --- multidim ------------------------------------------------------
    auto* multi_cmd = app.add_subcommand("multidim", "Multi-dimensional scheduling");
    std::string multi_instance;
    multi_cmd->add_option("--instance", multi_instance, "Loads/targets JSON file")->required();

    // --- compare-mt ----------------------------------------------------
    auto* cmp_cmd = app.add_subcommand("compare-mt", "Full vs partial resampling comparison");
    int cmp_m = 40, cmp_trials = 20;
    double cmp_r = 2.0, cmp_rprime = 6.0;
    long long cmp_budget = 100000;
    cmp_cmd->add_option("--m", cmp_m, "Constraint count");
    cmp_cmd->add_option("--r", cmp_r, "Fractional RHS R");
    cmp_cmd->add_option("--rprime", cmp_rprime, "Full-resampling threshold R'");
    cmp_cmd->add_option("--budget", cmp_budget, "Resampling budget per run");
    cmp_cmd->add_option("--trials", cmp_trials, "Trials per side");

    // --- route ---------------------------------------------------------
    auto* route_cmd = app.add_subcommand("route", "Packet routing pipeline");
    std::string route_instance, route_strategy = "pra-width", route_ladder, route_out;
    route_cmd->add_option("--instance", route_instance, "Routing JSON file")->required();
    route_cmd->add_option("--strategy", route_strategy, "lll-basic | pra-width | pra-4frame")
        ->check(CLI::IsMember({"lll-basic", "pra-width", "pra-4frame"}));
    route_cmd->add_option("--ladder", route_ladder, "Ladder JSON file (default auto)");
    route_cmd->add_option("--schedule-out", route_out, "Write the feasible schedule (JSONL)");

    CLI11_PARSE(app, argc, argv);
    Timing timing;

    try {
        if (*solve_cmd) {
            Instance inst = parse_generic_instance(load_json_file(solve_instance));
            EngineConfig cfg;
            cfg.seed = seed;
            cfg.max_resamplings = solve_cap;
            RunResult res = run(inst, cfg);
            if (!solve_log.empty()) {
                std::ofstream out(solve_log);
                if (!out) throw InputError("cannot write " + solve_log);
                write_log_jsonl(res.log, out);
            }
            Json rep = make_report("solve", seed);
            rep["status"] = res.status == RunStatus::Solved ? "solved" : "cap-exceeded";
            rep["resamplings"] = res.resample_count;
            rep["assignment"] = res.assignment;
            print_report(rep, format);
            return status_exit(res.status);
        }

        if (*check_cmd) {
            Instance inst = parse_generic_instance(load_json_file(check_instance));
            CriterionVariant variant = check_variant == "a"   ? CriterionVariant::A
                                       : check_variant == "b" ? CriterionVariant::B
                                                              : CriterionVariant::C;
            ChargeReport charges_rep = charges(inst);
            CriterionResult res = check_lambda_criterion(inst, variant, charges_rep);
            Json rep = make_report("check", seed);
            rep["variant"] = check_variant;
            rep["precondition_ok"] = res.precondition_ok;
            rep["satisfied"] = res.satisfied;
            rep["criterion_slack"] = res.slack;
            if (!res.reason.empty()) rep["reason"] = res.reason;
            rep["charges"] = emit_charge_report(charges_rep);
            print_report(rep, format);
            return res.precondition_ok && res.satisfied ? kExitOk : kExitCriterion;
        }

        if (*chern_cmd) {
            int d = chern_d >= 0 ? chern_d : default_width(chern_mu, chern_t);
            Json rep = make_report("chernoff", seed);
            rep["mu"] = chern_mu;
            rep["t"] = chern_t;
            rep["ch"] = ch(chern_mu, chern_t);
            rep["default_width"] = default_width(chern_mu, chern_t);
            rep["d"] = d;
            rep["width_bound"] = width_bound(chern_mu, chern_t, d);
            print_report(rep, format);
            return kExitOk;
        }

        if (*wit_cmd && !*wit_verify) {
            if (wit_log.empty()) throw InputError("witness: --log is required");
            std::ifstream in(wit_log);
            if (!in) throw InputError("cannot open " + wit_log);
            ExecutionLog log = read_log_jsonl(in);
            int max_label = 0;
            for (const auto& e : log.entries) max_label = std::max(max_label, e.label);

            Instance inst;
            WitnessTree tau;
            if (!wit_instance.empty()) {
                inst = parse_generic_instance(load_json_file(wit_instance));
                tau = build_witness_tree(log, size_t(wit_t), inst.family);
            } else {
                BadEventFamily fam;
                fam.set_backend(std::make_unique<NullBowtieBackend>(max_label + 1));
                tau = build_witness_tree(log, size_t(wit_t), fam);
            }
            Json rep = make_report("witness", seed);
            rep["t"] = wit_t;
            rep["nodes"] = tau.size();
            rep["tree"] = emit_witness_tree(tau);
            if (!wit_instance.empty()) rep["weight"] = tree_weight(tau, inst);
            if (format == "text") {
                std::cout << format_witness_tree(tau);
                if (!wit_instance.empty())
                    std::cout << "weight: " << tree_weight(tau, inst) << '\n';
            } else {
                print_report(rep, format);
            }
            return kExitOk;
        }

        if (*wit_verify) {
            Instance inst = parse_generic_instance(load_json_file(wv_instance));
            WitnessTree tau = parse_witness_tree(load_json_file(wv_tree));
            WtlResult res = verify_wtl(inst, tau, wv_trials, seed);
            Json rep = make_report("witness-verify", seed);
            rep["trials"] = res.trials;
            rep["appearances"] = res.appearances;
            rep["empirical_freq"] = res.empirical_freq;
            rep["weight_bound"] = res.bound;
            rep["pass"] = res.pass;
            print_report(rep, format);
            return res.pass ? kExitOk : kExitCriterion;
        }

        if (*trans_cmd) {
            BlockGraph g = parse_block_graph(load_json_file(trans_graph));
            Json rep = make_report("transversal", seed);
            rep["mode"] = trans_mode;
            auto run_mode = [&](uint64_t s) -> std::pair<TransversalResult, double> {
                if (trans_mode == "indep") return {transversal_omit(g, 1, s), 0.0};
                if (trans_mode == "comp2") return {transversal_omit(g, 2, s), 0.0};
                if (trans_mode == "nok3") return {transversal_omit(g, 3, s), 0.0};
                if (trans_mode.rfind("star:", 0) == 0) {
                    int s_param = std::stoi(trans_mode.substr(5));
                    return {star_free_transversal(g, s_param, s), 0.0};
                }
                if (trans_mode == "weight-high") {
                    WeightedTransversal wt = weighted_transversal(g, WeightDirection::High, s);
                    return {wt.result, wt.weight};
                }
                if (trans_mode == "weight-low") {
                    WeightedTransversal wt = weighted_transversal(g, WeightDirection::Low, s);
                    return {wt.result, wt.weight};
                }
                throw InputError("unknown transversal mode: " + trans_mode);
            };
            TransversalResult best;
            double best_weight = 0.0;
            long long solved = 0, total_resamples = 0;
            for (long long trial = 0; trial < trans_trials; ++trial) {
                auto [res, weight] = run_mode(derive_seed(seed, uint64_t(trial)));
                total_resamples += res.resamples;
                if (res.status == RunStatus::Solved) ++solved;
                bool better = trial == 0;
                if (trans_mode == "weight-high") better = better || weight > best_weight;
                if (trans_mode == "weight-low") better = better || weight < best_weight;
                if (better) {
                    best = res;
                    best_weight = weight;
                }
            }
            rep["trials"] = trans_trials;
            rep["solved"] = solved;
            rep["mean_resamplings"] = double(total_resamples) / double(trans_trials);
            rep["status"] = best.status == RunStatus::Solved ? "solved" : "cap-exceeded";
            rep["vertices"] = best.vertices;
            if (trans_mode.rfind("weight", 0) == 0) rep["weight"] = best_weight;
            print_report(rep, format);
            return status_exit(best.status);
        }

        if (*pack_cmd) {
            PackingSystem sys = parse_packing_system(load_json_file(pack_instance));
            RoundResult res = round_packing(sys, pack_eps, seed);
            Json rep = make_report("pack", seed);
            rep["status"] = res.status == RunStatus::Solved ? "solved" : "cap-exceeded";
            rep["resamplings"] = res.resamples;
            rep["eps"] = res.eps;
            rep["b"] = res.b;
            rep["assignment"] = res.assignment;
            print_report(rep, format);
            return status_exit(res.status);
        }

        if (*disc_cmd) {
            auto matrix = load_matrix_file(disc_matrix);
            DiscrepancyResult res = discrepancy_vector(matrix, seed);
            Json rep = make_report("discrepancy", seed);
            rep["status"] = res.status == RunStatus::Solved ? "solved" : "cap-exceeded";
            rep["resamplings"] = res.resamples;
            rep["max_discrepancy"] = res.max_abs;
            rep["retained_bound"] = res.retained_bound;
            rep["dropped_bound"] = res.dropped_bound;
            rep["signs"] = res.signs;
            print_report(rep, format);
            return status_exit(res.status);
        }

        if (*multi_cmd) {
            Json j = load_json_file(multi_instance);
            std::vector<std::vector<std::vector<double>>> loads;
            for (const auto& job : j.at("loads")) {
                std::vector<std::vector<double>> row;
                for (const auto& machine : job) row.push_back(machine.get<std::vector<double>>());
                loads.push_back(std::move(row));
            }
            std::vector<double> targets = j.at("targets").get<std::vector<double>>();
            std::optional<std::vector<std::vector<double>>> z;
            if (j.contains("z")) {
                std::vector<std::vector<double>> zz;
                for (const auto& row : j.at("z")) zz.push_back(row.get<std::vector<double>>());
                z = std::move(zz);
            }
            MultidimResult res = multidim_schedule(loads, targets, z, seed);
            Json rep = make_report("multidim", seed);
            rep["z_feasible"] = res.z_feasible;
            if (!res.z_feasible) {
                rep["z_violation"] = res.z_violation;
                print_report(rep, format);
                return kExitInput;
            }
            rep["status"] = res.status == RunStatus::Solved ? "solved" : "cap-exceeded";
            rep["resamplings"] = res.resamples;
            rep["b"] = res.b;
            rep["within_bound"] = res.within_bound;
            rep["assignment"] = res.assignment;
            rep["loads"] = res.loads;
            print_report(rep, format);
            return status_exit(res.status);
        }

        if (*cmp_cmd) {
            CompareReport res = compare_mt_pra(cmp_m, cmp_r, cmp_rprime, cmp_budget, cmp_trials,
                                               seed);
            Json rep = make_report("compare-mt", seed);
            rep["trials"] = res.trials;
            rep["pra_successes"] = res.pra_successes;
            rep["mt_successes"] = res.mt_successes;
            rep["pra_success_rate"] = double(res.pra_successes) / double(res.trials);
            rep["mt_success_rate"] = double(res.mt_successes) / double(res.trials);
            rep["pra_mean_resamplings"] = res.pra_mean_resamples;
            rep["mt_mean_resamplings"] = res.mt_mean_resamples;
            rep["pra_b"] = res.pra_b;
            rep["mt_threshold"] = res.mt_threshold;
            print_report(rep, format);
            return kExitOk;
        }

        if (*route_cmd) {
            RoutingInstance inst = parse_routing_instance(load_json_file(route_instance));
            RouteStrategy strategy = route_strategy == "lll-basic" ? RouteStrategy::LllBasic
                                     : route_strategy == "pra-width"
                                         ? RouteStrategy::PraWidth
                                         : RouteStrategy::Pra4Frame;
            std::optional<std::vector<LadderStage>> ladder;
            if (!route_ladder.empty()) ladder = parse_ladder(load_json_file(route_ladder));
            EndToEndReport res = end_to_end(inst, strategy, ladder, seed);
            auto [ok, problems] = validate_schedule(res.schedule, inst);
            if (!route_out.empty()) {
                std::ofstream out(route_out);
                if (!out) throw InputError("cannot write " + route_out);
                for (size_t p = 0; p < res.schedule.packets.size(); ++p)
                    for (const auto& tr : res.schedule.packets[p]) {
                        Json rec;
                        rec["packet"] = p;
                        rec["time"] = tr.time;
                        rec["edge"] = tr.edge;
                        out << rec.dump() << '\n';
                    }
            }
            Json rep = make_report("route", seed);
            rep["strategy"] = route_strategy;
            rep["congestion"] = res.congestion;
            rep["dilation"] = res.dilation;
            rep["makespan"] = res.schedule.makespan;
            rep["makespan_over_c_plus_d"] = res.ratio;
            rep["fourframe_engaged"] = res.fourframe_engaged;
            rep["fallback_2frame"] = res.schedule.fallback_used;
            rep["valid"] = ok;
            Json stages = Json::array();
            for (const auto& sr : res.stages) {
                Json s;
                s["mode"] = sr.stage.mode;
                s["i"] = sr.stage.i;
                s["iprime"] = sr.stage.iprime;
                s["m"] = sr.stage.m;
                s["cprime"] = sr.stage.cprime;
                s["d"] = sr.stage.d;
                s["alpha"] = sr.stage.alpha;
                s["T"] = sr.stage.T;
                s["Tprime"] = sr.stage.Tprime;
                s["length_after"] = sr.length_after;
                s["recounted_congestion"] = sr.recounted_congestion;
                stages.push_back(std::move(s));
            }
            rep["stages"] = std::move(stages);
            print_report(rep, format);
            if (!ok) return kExitCriterion;
            return kExitOk;
        }
    } catch (const CriterionError& e) {
        std::cerr << "criterion unsatisfied: " << e.what() << '\n';
        return kExitCriterion;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return kExitInput;
    } catch (const UnsupportedQueryError& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}
