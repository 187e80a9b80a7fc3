#pragma once

#include <string>

#include <json.hpp>

#include "pra/criteria.hpp"
#include "pra/engine.hpp"
#include "pra/packing.hpp"
#include "pra/routing.hpp"
#include "pra/transversals.hpp"
#include "pra/witness_tree.hpp"

namespace pra {

using Json = nlohmann::ordered_json;

// Reads and parses a JSON file; parse failures surface as InputError with
// line context.
Json load_json_file(const std::string& path);

// Generic instance files:
// {"variables":[{"domain_size":k},...], "probabilities":[[..],..],
//  "lambda":[[..],..]?, "bad_events":{"labels":[{"events":[[[i,j],..],..],
//  "hitting":{"kind":"trivial"|"width"|"table", ...}},...]}}
Instance parse_generic_instance(const Json& j);
Json emit_generic_instance(const Instance& inst);

// {"blocks":[[v,..],..], "edges":[[u,v],..], "weights":[..]?}
BlockGraph parse_block_graph(const Json& j);

// {"rows":K, "entries":[[k,i,j,a],..], "c":[..], "z":[[..],..], "b":[..]?}
PackingSystem parse_packing_system(const Json& j);

// {"vertices":V, "edges":[[u,v],..], "packets":[{"path":[e,..]},..]}
RoutingInstance parse_routing_instance(const Json& j);

// JSON 2D array, or CSV when the path does not end in .json.
std::vector<std::vector<double>> load_matrix_file(const std::string& path);

std::vector<LadderStage> parse_ladder(const Json& j);

// Execution logs as line-delimited records {"t":..,"k":..,"y":[[i,j],..]}.
void write_log_jsonl(const ExecutionLog& log, std::ostream& out);
ExecutionLog read_log_jsonl(std::istream& in);

// Witness trees as nested {"y":[[i,j],..], "k":.., "children":[..]}.
Json emit_witness_tree(const WitnessTree& tau);
WitnessTree parse_witness_tree(const Json& j);
std::string format_witness_tree(const WitnessTree& tau); // indented text

Json emit_charge_report(const ChargeReport& report);

// Uniform run reports. Field order is fixed; serialization is
// byte-reproducible for a given seed and inputs.
Json make_report(const std::string& subcommand, uint64_t seed);
std::string render_report(const Json& report, const std::string& format);

} // namespace pra
