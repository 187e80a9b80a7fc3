#include "pra/io.hpp"

#include <fstream>
#include <sstream>

namespace pra {

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

namespace {

ElementSet parse_element_set(const Json& j) {
    ElementSet out;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw InputError("element must be a [variable, value] pair");
        out.push_back({pair[0].get<int>(), pair[1].get<int>()});
    }
    return make_element_set(std::move(out));
}

Json emit_element_set(const ElementSet& s) {
    Json out = Json::array();
    for (const Element& e : s) out.push_back({e.var, e.value});
    return out;
}

std::shared_ptr<const HittingSet> parse_hitting(const Json& j,
                                                const std::vector<AtomicEvent>& events) {
    std::string kind = j.value("kind", "trivial");
    if (kind == "trivial") return std::make_shared<TrivialHittingSet>(events);
    if (kind == "width") {
        std::vector<std::pair<Element, double>> coeffs;
        for (const auto& entry : j.at("coeffs")) {
            if (!entry.is_array() || entry.size() != 3)
                throw InputError("width coeffs entries must be [variable, value, a]");
            coeffs.push_back({{entry[0].get<int>(), entry[1].get<int>()}, entry[2].get<double>()});
        }
        return std::make_shared<WidthHittingSet>(std::move(coeffs), j.at("threshold").get<double>(),
                                                 j.at("width").get<int>());
    }
    if (kind == "table") {
        std::vector<std::pair<ElementSet, double>> entries;
        for (const auto& entry : j.at("entries")) {
            if (!entry.is_array() || entry.size() != 2)
                throw InputError("table entries must be [element-set, weight]");
            entries.push_back({parse_element_set(entry[0]), entry[1].get<double>()});
        }
        return std::make_shared<TabularHittingSet>(std::move(entries),
                                                   j.value("bowtie_null", false));
    }
    throw InputError("unknown hitting-set kind: " + kind);
}

} // namespace

Instance parse_generic_instance(const Json& j) {
    Instance inst;
    for (const auto& v : j.at("variables")) inst.domain_sizes.push_back(v.at("domain_size").get<int>());

    if (j.contains("lambda")) {
        std::vector<std::vector<double>> lam;
        for (const auto& row : j.at("lambda")) lam.push_back(row.get<std::vector<double>>());
        inst.lambda = LambdaVector(std::move(lam));
    }
    if (j.contains("probabilities")) {
        std::vector<std::vector<double>> p;
        for (const auto& row : j.at("probabilities")) p.push_back(row.get<std::vector<double>>());
        ProbabilityModel model(std::move(p));
        auto bad = model.renormalize();
        if (!bad.empty())
            throw InputError("probabilities of variable " + std::to_string(bad.front()) +
                             " are not normalizable");
        inst.probabilities = std::move(model);
    } else if (inst.lambda) {
        inst.probabilities = inst.lambda->derive_probabilities();
    } else {
        throw InputError("instance needs probabilities or lambda");
    }

    const Json& be = j.at("bad_events");
    for (const auto& label : be.at("labels")) {
        std::vector<AtomicEvent> events;
        for (const auto& ev : label.at("events")) events.push_back(AtomicEvent(parse_element_set(ev)));
        inst.hitting.push_back(parse_hitting(label.value("hitting", Json::object()), events));
        inst.family.add_label(std::make_unique<EnumeratedLabel>(std::move(events)));
    }
    auto diags = validate_instance(inst);
    if (!diags.empty()) throw InputError("instance invalid: " + diags.front().message);
    return inst;
}

Json emit_generic_instance(const Instance& inst) {
    Json j;
    j["variables"] = Json::array();
    for (int ds : inst.domain_sizes) j["variables"].push_back({{"domain_size", ds}});
    j["probabilities"] = Json::array();
    for (int i = 0; i < inst.num_vars(); ++i) j["probabilities"].push_back(inst.probabilities.row(i));
    if (inst.lambda) {
        j["lambda"] = Json::array();
        for (int i = 0; i < inst.num_vars(); ++i) j["lambda"].push_back(inst.lambda->row(i));
    }
    Json labels = Json::array();
    for (int k = 0; k < inst.family.label_count(); ++k) {
        Json label;
        const auto* events = inst.family.enumerated(k);
        if (!events) throw InputError("only enumerated families can be emitted");
        Json evs = Json::array();
        for (const auto& ev : *events) evs.push_back(emit_element_set(ev.elems));
        label["events"] = std::move(evs);
        Json hit;
        const HittingSet& q = inst.hitting_set(k);
        if (const auto* wq = dynamic_cast<const WidthHittingSet*>(&q)) {
            hit["kind"] = "width";
            Json coeffs = Json::array();
            for (const auto& [e, a] : wq->coeffs()) coeffs.push_back({Json(e.var), Json(e.value), Json(a)});
            hit["coeffs"] = std::move(coeffs);
            hit["threshold"] = wq->threshold();
            hit["width"] = wq->width();
        } else if (dynamic_cast<const TrivialHittingSet*>(&q)) {
            hit["kind"] = "trivial";
        } else {
            hit["kind"] = "table";
            Json entries = Json::array();
            q.enumerate_support([&](const ElementSet& y, double w) {
                entries.push_back({emit_element_set(y), Json(w)});
            });
            hit["entries"] = std::move(entries);
            hit["bowtie_null"] = q.bowtie_null();
        }
        label["hitting"] = std::move(hit);
        labels.push_back(std::move(label));
    }
    j["bad_events"] = Json{{"labels", std::move(labels)}};
    return j;
}

BlockGraph parse_block_graph(const Json& j) {
    std::vector<std::vector<int>> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back(b.get<std::vector<int>>());
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw InputError("edges must be [u,v] pairs");
        edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    std::vector<double> weights;
    if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    int n = 0;
    for (const auto& b : blocks)
        for (int v : b) n = std::max(n, v + 1);
    return BlockGraph(n, std::move(edges), std::move(blocks), std::move(weights));
}

PackingSystem parse_packing_system(const Json& j) {
    PackingSystem sys;
    int rows = j.at("rows").get<int>();
    sys.rows.resize(size_t(rows));
    for (const auto& row : j.at("z")) sys.z.push_back(row.get<std::vector<double>>());
    sys.domain_sizes.resize(sys.z.size());
    for (size_t i = 0; i < sys.z.size(); ++i) sys.domain_sizes[i] = int(sys.z[i].size());
    for (const auto& entry : j.at("entries")) {
        if (!entry.is_array() || entry.size() != 4)
            throw InputError("entries must be [k,i,j,a] quadruples");
        int k = entry[0].get<int>();
        if (k < 0 || k >= rows) throw InputError("entry row out of range");
        sys.rows[size_t(k)].push_back(
            {{entry[1].get<int>(), entry[2].get<int>()}, entry[3].get<double>()});
    }
    sys.c = j.at("c").get<std::vector<double>>();
    if (j.contains("b")) sys.b = j.at("b").get<std::vector<double>>();
    return sys;
}

RoutingInstance parse_routing_instance(const Json& j) {
    RoutingInstance inst;
    inst.num_vertices = j.at("vertices").get<int>();
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw InputError("edges must be [u,v] pairs");
        inst.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    for (const auto& p : j.at("packets")) inst.packet_paths.push_back(p.at("path").get<std::vector<int>>());
    auto diags = inst.validate();
    if (!diags.empty()) throw InputError("routing instance: " + diags.front().message);
    return inst;
}

std::vector<std::vector<double>> load_matrix_file(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        Json j = load_json_file(path);
        std::vector<std::vector<double>> m;
        for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
        return m;
    }
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::vector<double>> m;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                throw InputError(path + ":" + std::to_string(lineno) + ": bad number '" + cell +
                                 "'");
            }
        }
        m.push_back(std::move(row));
    }
    return m;
}

std::vector<LadderStage> parse_ladder(const Json& j) {
    std::vector<LadderStage> stages;
    for (const auto& s : j) {
        LadderStage st;
        st.mode = s.at("mode").get<std::string>();
        if (st.mode != "binomial" && st.mode != "width" && st.mode != "4frame")
            throw InputError("ladder stage mode must be binomial, width or 4frame");
        st.i = s.value("i", 0LL);
        st.iprime = s.value("iprime", 0LL);
        st.m = s.value("m", 8LL);
        st.cprime = s.value("cprime", 0LL);
        st.d = s.value("d", 0);
        st.alpha = s.value("alpha", 0.0);
        st.T = s.value("T", 0LL);
        st.Tprime = s.value("Tprime", 0LL);
        st.table_file = s.value("table", std::string());
        stages.push_back(std::move(st));
    }
    return stages;
}

void write_log_jsonl(const ExecutionLog& log, std::ostream& out) {
    for (size_t t = 0; t < log.entries.size(); ++t) {
        Json rec;
        rec["t"] = t + 1;
        rec["k"] = log.entries[t].label;
        rec["y"] = emit_element_set(log.entries[t].y);
        out << rec.dump() << '\n';
    }
}

ExecutionLog read_log_jsonl(std::istream& in) {
    ExecutionLog log;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Json rec;
        try {
            rec = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError("log line " + std::to_string(lineno) + ": " + e.what());
        }
        LogEntry entry;
        entry.label = rec.at("k").get<int>();
        entry.y = parse_element_set(rec.at("y"));
        log.entries.push_back(std::move(entry));
    }
    return log;
}

namespace {

Json emit_tree_node(const WitnessTree& tau, int v) {
    const WitnessNode& node = tau.nodes[size_t(v)];
    Json j;
    j["y"] = emit_element_set(node.y);
    j["k"] = node.label;
    if (node.bowtie_child) j["bowtie"] = true;
    Json children = Json::array();
    for (int c : node.children) children.push_back(emit_tree_node(tau, c));
    j["children"] = std::move(children);
    return j;
}

int parse_tree_node(const Json& j, WitnessTree& tau, int parent, int depth) {
    WitnessNode node;
    node.y = parse_element_set(j.at("y"));
    node.label = j.at("k").get<int>();
    node.bowtie_child = j.value("bowtie", false);
    node.parent = parent;
    node.depth = depth;
    int idx = int(tau.nodes.size());
    tau.nodes.push_back(std::move(node));
    if (j.contains("children"))
        for (const auto& child : j.at("children")) {
            int c = parse_tree_node(child, tau, idx, depth + 1);
            tau.nodes[size_t(idx)].children.push_back(c);
        }
    return idx;
}

void format_tree_node(const WitnessTree& tau, int v, int indent, std::ostream& out) {
    const WitnessNode& node = tau.nodes[size_t(v)];
    for (int i = 0; i < indent; ++i) out << "  ";
    out << "(";
    for (size_t i = 0; i < node.y.size(); ++i) {
        if (i) out << " ";
        out << node.y[i].var << "=" << node.y[i].value;
    }
    out << ") k=" << node.label;
    if (node.bowtie_child) out << " [bowtie]";
    out << '\n';
    for (int c : node.children) format_tree_node(tau, c, indent + 1, out);
}

} // namespace

Json emit_witness_tree(const WitnessTree& tau) {
    if (tau.empty()) return Json(nullptr);
    return emit_tree_node(tau, 0);
}

WitnessTree parse_witness_tree(const Json& j) {
    WitnessTree tau;
    if (!j.is_null()) parse_tree_node(j, tau, -1, 0);
    return tau;
}

std::string format_witness_tree(const WitnessTree& tau) {
    std::ostringstream out;
    if (tau.empty()) {
        out << "(empty)\n";
    } else {
        format_tree_node(tau, 0, 0, out);
    }
    return out.str();
}

Json emit_charge_report(const ChargeReport& report) {
    Json j;
    Json labels = Json::array();
    for (const auto& lc : report.labels) {
        Json l;
        l["G"] = lc.G;
        l["S"] = lc.S;
        l["exact"] = lc.exact;
        l["Gi"] = lc.Gi;
        l["Gij"] = lc.Gij;
        labels.push_back(std::move(l));
    }
    j["labels"] = std::move(labels);
    j["lambda_i"] = report.lambda_i;
    j["Hi"] = report.Hi;
    j["Hij"] = report.Hij;
    j["slack"] = report.slack;
    return j;
}

Json make_report(const std::string& subcommand, uint64_t seed) {
    Json j;
    j["schema_version"] = 1;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    return j;
}

std::string render_report(const Json& report, const std::string& format) {
    if (format == "json") return report.dump(2) + "\n";
    // Flat text rendering with stable ordering.
    std::ostringstream out;
    std::function<void(const std::string&, const Json&)> walk =
        [&](const std::string& prefix, const Json& v) {
            if (v.is_object()) {
                for (auto it = v.begin(); it != v.end(); ++it)
                    walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
            } else if (v.is_array() && v.size() > 16) {
                out << prefix << ": [" << v.size() << " entries]\n";
            } else {
                out << prefix << ": " << v.dump() << '\n';
            }
        };
    walk("", report);
    return out.str();
}

} // namespace pra
