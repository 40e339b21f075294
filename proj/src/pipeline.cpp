#include "cobs/pipeline.hpp"
#include "cobs/parallel.hpp"
#include "cobs/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace cobs {

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << content;
}

nlohmann::json pairs_to_json(const HypothesisList& pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [i, j] : pairs) arr.push_back({i, j});
    return arr;
}

HypothesisList pairs_from_json(const nlohmann::json& arr) {
    HypothesisList out;
    for (const auto& e : arr) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return out;
}

} // namespace

StatKind stat_from_string(const std::string& s) {
    if (s == "normalized") return StatKind::Normalized;
    if (s == "maxabs") return StatKind::MaxAbsDiff;
    throw InvalidInput("unknown statistic kind: " + s);
}

Engine engine_from_string(const std::string& s) {
    if (s == "naive") return Engine::Naive;
    if (s == "accelerated") return Engine::Accelerated;
    throw InvalidInput("unknown engine: " + s);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["matrix_file"] = cfg.matrix_file;
    j["manifest_file"] = cfg.manifest_file;
    j["out_dir"] = cfg.out_dir;
    j["min_samples"] = cfg.min_samples;
    j["alpha"] = cfg.alpha;
    j["gamma"] = cfg.gamma;
    j["trials"] = cfg.trials;
    j["divisions"] = cfg.divisions;
    j["epsilon"] = cfg.epsilon;
    j["stat"] = cfg.stat;
    j["engine"] = cfg.engine;
    j["core"] = cfg.core;
    j["postprocess"] = cfg.postprocess;
    j["seed"] = cfg.seed;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.matrix_file = j.value("matrix_file", cfg.matrix_file);
    cfg.manifest_file = j.value("manifest_file", cfg.manifest_file);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.min_samples = j.value("min_samples", cfg.min_samples);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.divisions = j.value("divisions", cfg.divisions);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.stat = j.value("stat", cfg.stat);
    cfg.engine = j.value("engine", cfg.engine);
    cfg.core = j.value("core", cfg.core);
    cfg.postprocess = j.value("postprocess", cfg.postprocess);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

std::string config_hash(const RunConfig& cfg) {
    // Thread count is an execution detail; it must not change the hash.
    const std::string canon = config_to_json(cfg).dump();
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

nlohmann::json stepdown_to_json(const StepdownResult& res, int r) {
    nlohmann::json j;
    j["r"] = r;
    j["alpha"] = res.alpha;
    j["trials"] = res.trials;
    j["steps"] = res.steps;
    j["initial"] = pairs_to_json(res.initial);
    j["accepted"] = pairs_to_json(res.accepted);
    nlohmann::json rej = nlohmann::json::array();
    for (const auto& [pair, step] : res.rejected)
        rej.push_back({pair.first, pair.second, step});
    j["rejected"] = rej;
    j["statistics"] = res.statistics;
    j["quantile_trace"] = res.quantile_trace;
    return j;
}

nlohmann::json graph_to_json(const HypothesisGraph& g) {
    nlohmann::json j;
    j["r"] = g.r();
    j["edges"] = pairs_to_json(g.edges());
    return j;
}

HypothesisGraph graph_from_json(const nlohmann::json& j) {
    return HypothesisGraph(j.at("r").get<int>(), pairs_from_json(j.at("edges")));
}

std::pair<HypothesisList, int> accepted_from_stepdown_json(const nlohmann::json& j) {
    return {pairs_from_json(j.at("accepted")), j.at("r").get<int>()};
}

std::string qq_csv(const std::vector<double>& pvalues) {
    std::ostringstream os;
    os.precision(17);
    os << "uniform_quantile,pvalue\n";
    if (pvalues.empty()) return os.str();
    const auto pts = qq_points(pvalues);
    for (const auto& [u, p] : pts) os << u << ',' << p << '\n';
    return os.str();
}

PipelineReport run_pipeline(const RunConfig& cfg) {
    set_threads(cfg.threads);
    const PartitionedDataset ds =
        load_dataset(cfg.matrix_file, cfg.manifest_file, cfg.min_samples);

    StepdownOptions sd;
    sd.alpha = cfg.alpha;
    sd.trials = cfg.trials;
    sd.kind = stat_from_string(cfg.stat);
    sd.epsilon = cfg.epsilon;
    sd.seed = cfg.seed;
    sd.engine = engine_from_string(cfg.engine);
    sd.record_trial_maxima = false;
    const StepdownResult res = stepdown(ds, sd);

    const HypothesisGraph graph = build_graph(res.accepted, ds.r());
    QuasiCliqueParams qc;
    qc.gamma = cfg.gamma;
    if (!cfg.core.empty()) qc.core = cfg.core;
    qc.postprocess = cfg.postprocess;
    const std::vector<int> selected = largest_quasi_clique(graph, qc);

    DiagnosticParams dp;
    dp.divisions = cfg.divisions;
    dp.trials = cfg.trials;
    dp.seed = mix_seed(cfg.seed, 0xD1A60ull);
    dp.kind = sd.kind;
    dp.epsilon = cfg.epsilon;
    const std::set<int> sel_set(selected.begin(), selected.end());
    std::vector<double> diag_pvalues;
    if (sel_set.size() >= 2)
        diag_pvalues = homogeneity_diagnostic(ds, sel_set, dp).pvalues;

    std::filesystem::create_directories(cfg.out_dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(cfg.out_dir) / name).string();
    };

    PipelineReport rep;
    rep.config_hash = config_hash(cfg);
    rep.selected = selected;
    rep.stepdown_json = path("stepdown.json");
    rep.graph_json = path("graph.json");
    rep.selection_json = path("selection.json");
    rep.diagnostic_csv = path("diagnostic.csv");
    rep.report_json = path("report.json");

    write_file(rep.stepdown_json, stepdown_to_json(res, ds.r()).dump(2) + "\n");
    write_file(rep.graph_json, graph_to_json(graph).dump(2) + "\n");

    nlohmann::json sel;
    sel["gamma"] = cfg.gamma;
    sel["postprocess"] = cfg.postprocess;
    sel["core"] = cfg.core;
    sel["selected"] = selected;
    sel["size"] = selected.size();
    write_file(rep.selection_json, sel.dump(2) + "\n");

    write_file(rep.diagnostic_csv, qq_csv(diag_pvalues));

    nlohmann::json report;
    report["config"] = config_to_json(cfg);
    report["config_hash"] = rep.config_hash;
    report["r"] = ds.r();
    report["d"] = ds.d;
    report["accepted_count"] = res.accepted.size();
    report["rejected_count"] = res.rejected.size();
    report["steps"] = res.steps;
    report["selected"] = selected;
    report["diagnostic_divisions"] = diag_pvalues.size();
    report["artifacts"] = {
        {"stepdown", "stepdown.json"},
        {"graph", "graph.json"},
        {"selection", "selection.json"},
        {"diagnostic", "diagnostic.csv"},
    };
    write_file(rep.report_json, report.dump(2) + "\n");
    return rep;
}

} // namespace cobs
