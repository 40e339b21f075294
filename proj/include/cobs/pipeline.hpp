#pragma once

#include "cobs/diagnostic.hpp"
#include "cobs/eval.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cobs {

/// Flat parameter document for the end-to-end run; every default traces to a
/// documented choice (alpha 0.1, gamma 0.95, B 200, T 250, eps 0, min 5).
struct RunConfig {
    std::string matrix_file;
    std::string manifest_file;
    std::string out_dir = ".";
    int min_samples = 5;
    double alpha = 0.1;
    double gamma = 0.95;
    int trials = 200;     // bootstrap trials B
    int divisions = 250;  // diagnostic divisions T
    double epsilon = 0.0;
    std::string stat = "normalized"; // normalized | maxabs
    std::string engine = "naive";    // naive | accelerated
    std::vector<int> core;           // optional quasi-clique seed vertices
    bool postprocess = false;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct PipelineReport {
    std::vector<int> selected;
    std::string stepdown_json;
    std::string graph_json;
    std::string selection_json;
    std::string diagnostic_csv;
    std::string report_json;
    std::string config_hash;
};

StatKind stat_from_string(const std::string& s);
Engine engine_from_string(const std::string& s);

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
std::string config_hash(const RunConfig& cfg);

nlohmann::json stepdown_to_json(const StepdownResult& res, int r);
nlohmann::json graph_to_json(const HypothesisGraph& g);
HypothesisGraph graph_from_json(const nlohmann::json& j);

/// Accepted pairs + partition count, as consumed by the selection stage.
std::pair<HypothesisList, int> accepted_from_stepdown_json(const nlohmann::json& j);

std::string qq_csv(const std::vector<double>& pvalues);

/// load -> center -> stepdown -> graph -> quasi-clique -> diagnostic;
/// artifacts are written under cfg.out_dir and byte-stable for a fixed
/// (config, seed) at any thread count.
PipelineReport run_pipeline(const RunConfig& cfg);

} // namespace cobs
