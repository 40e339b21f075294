#include "cobs/parallel.hpp"
#include "cobs/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw cobs::IoError("cannot write " + path);
    os << content;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cobs::IoError("cannot open " + path);
    return json::parse(in);
}

cobs::MarginalFamily marginals_from_flags(const std::string& name,
                                          const std::string& sample_file) {
    if (name == "empirical") {
        if (sample_file.empty())
            throw cobs::InvalidInput("--marginal-file required with --marginals empirical");
        return cobs::MarginalFamily::empirical(sample_file);
    }
    return cobs::MarginalFamily::from_string(name);
}

std::vector<int> parse_id_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

int run_simulate(const cobs::SimSpec& spec, const std::string& prefix) {
    auto [ds, truth] = cobs::sample_dataset(spec);
    cobs::save_dataset(ds, prefix + "_matrix.csv", prefix + "_manifest.csv");
    json t;
    t["indicator"] = truth.indicator;
    t["target_set"] = std::vector<int>(truth.target_set.begin(), truth.target_set.end());
    json gw = json::array();
    for (const auto& [w, g] : truth.gamma_w) gw.push_back({{"window", w}, {"weight", g}});
    t["gamma_w"] = gw;
    write_file(prefix + "_truth.json", t.dump(2) + "\n");
    std::cout << "wrote " << prefix << "_matrix.csv, " << prefix << "_manifest.csv, "
              << prefix << "_truth.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariance-based partition selection toolkit"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "Worker thread cap (results are identical at any value)");

    // simulate
    cobs::SimSpec spec;
    std::string marginal_name = "identity", marginal_file, out_prefix = "sim";
    auto* sim = app.add_subcommand("simulate", "Draw a synthetic three-group dataset");
    sim->add_option("--r1", spec.r1);
    sim->add_option("--r2", spec.r2);
    sim->add_option("--r3", spec.r3);
    sim->add_option("--n", spec.n);
    sim->add_option("--d", spec.d);
    sim->add_option("--beta", spec.beta);
    sim->add_option("--marginals", marginal_name, "identity|bimodal|heavytail|empirical");
    sim->add_option("--marginal-file", marginal_file, "sample file for --marginals empirical");
    sim->add_option("--seed", spec.seed);
    sim->add_option("--out-prefix", out_prefix);

    // test-pair
    std::string matrix_file, manifest_file;
    int pair_i = 0, pair_j = 1, trials = 200, min_samples = 5;
    std::string stat = "normalized";
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    auto* tp = app.add_subcommand("test-pair", "Bootstrap covariance-equality p-value for one pair");
    tp->add_option("--matrix", matrix_file)->required();
    tp->add_option("--manifest", manifest_file)->required();
    tp->add_option("--i", pair_i);
    tp->add_option("--j", pair_j);
    tp->add_option("--trials", trials);
    tp->add_option("--stat", stat, "normalized|maxabs");
    tp->add_option("--epsilon", epsilon);
    tp->add_option("--seed", seed);
    tp->add_option("--min-samples", min_samples);

    // stepdown
    double alpha = 0.1;
    std::string engine = "naive", out_file = "result.json";
    auto* sd = app.add_subcommand("stepdown", "Simultaneous pairwise tests with FWER control");
    sd->add_option("--matrix", matrix_file)->required();
    sd->add_option("--manifest", manifest_file)->required();
    sd->add_option("--alpha", alpha);
    sd->add_option("--trials", trials);
    sd->add_option("--stat", stat, "normalized|maxabs");
    sd->add_option("--engine", engine, "naive|accelerated");
    sd->add_option("--epsilon", epsilon);
    sd->add_option("--seed", seed);
    sd->add_option("--min-samples", min_samples);
    sd->add_option("--out", out_file);

    // select
    double gamma = 0.95;
    std::string method = "cobs", in_file, core_list;
    bool postprocess = false;
    auto* sel = app.add_subcommand("select", "Largest quasi-clique on an accepted-pair graph");
    sel->add_option("--in", in_file, "stepdown result JSON")->required();
    sel->add_option("--gamma", gamma);
    sel->add_option("--method", method, "cobs|spectral|localsearch|densesplit");
    sel->add_option("--core", core_list, "comma-separated seed vertices");
    sel->add_flag("--postprocess", postprocess);
    sel->add_option("--out", out_file);

    // diagnose
    std::string partitions = "all";
    int divisions = 250;
    auto* dg = app.add_subcommand("diagnose", "Random-bipartition homogeneity QQ diagnostic");
    dg->add_option("--matrix", matrix_file)->required();
    dg->add_option("--manifest", manifest_file)->required();
    dg->add_option("--partitions", partitions, "all or comma-separated ids");
    dg->add_option("--divisions", divisions);
    dg->add_option("--trials", trials);
    dg->add_option("--stat", stat, "normalized|maxabs");
    dg->add_option("--epsilon", epsilon);
    dg->add_option("--seed", seed);
    dg->add_option("--min-samples", min_samples);
    dg->add_option("--out", out_file);

    // evaluate roc|compare
    auto* ev = app.add_subcommand("evaluate", "Synthetic-study evaluation harness");
    ev->require_subcommand(1);
    std::string betas = "0,0.3,0.6,1", alphas = "0.01,0.05,0.1,0.2,0.35,0.5,0.75,0.95";
    int replicates = 10;
    long long reference_mc_n = 20000;
    auto add_sim_flags = [&](CLI::App* c) {
        c->add_option("--r1", spec.r1);
        c->add_option("--r2", spec.r2);
        c->add_option("--r3", spec.r3);
        c->add_option("--n", spec.n);
        c->add_option("--d", spec.d);
        c->add_option("--marginals", marginal_name, "identity|bimodal|heavytail|empirical");
        c->add_option("--marginal-file", marginal_file);
        c->add_option("--replicates", replicates);
        c->add_option("--trials", trials);
        c->add_option("--gamma", gamma);
        c->add_option("--seed", seed);
        c->add_option("--out", out_file);
    };
    auto* roc = ev->add_subcommand("roc", "TPR/FPR grid over (beta, alpha)");
    roc->add_option("--betas", betas);
    roc->add_option("--alphas", alphas);
    add_sim_flags(roc);
    auto* cmp = ev->add_subcommand("compare", "Pooled-covariance spectral error of four selection rules");
    cmp->add_option("--beta", spec.beta);
    cmp->add_option("--alpha", alpha);
    cmp->add_option("--reference-mc-n", reference_mc_n);
    add_sim_flags(cmp);

    // pipeline
    cobs::RunConfig cfg;
    auto* pl = app.add_subcommand("pipeline", "load -> stepdown -> selection -> diagnostic");
    pl->set_config("--config", "", "INI config file; flags override");
    pl->add_option("--matrix", cfg.matrix_file)->required();
    pl->add_option("--manifest", cfg.manifest_file)->required();
    pl->add_option("--out-dir", cfg.out_dir);
    pl->add_option("--min-samples", cfg.min_samples);
    pl->add_option("--alpha", cfg.alpha);
    pl->add_option("--gamma", cfg.gamma);
    pl->add_option("--trials", cfg.trials);
    pl->add_option("--divisions", cfg.divisions);
    pl->add_option("--epsilon", cfg.epsilon);
    pl->add_option("--stat", cfg.stat, "normalized|maxabs");
    pl->add_option("--engine", cfg.engine, "naive|accelerated");
    pl->add_option("--core", core_list, "comma-separated seed vertices");
    pl->add_flag("--postprocess", cfg.postprocess);
    pl->add_option("--seed", cfg.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cobs::set_threads(threads);

        if (*sim) {
            spec.marginals = marginals_from_flags(marginal_name, marginal_file);
            return run_simulate(spec, out_prefix);
        }
        if (*tp) {
            const auto ds = cobs::load_dataset(matrix_file, manifest_file, min_samples);
            if (pair_i < 0 || pair_j < 0 || pair_i >= ds.r() || pair_j >= ds.r() ||
                pair_i == pair_j)
                throw cobs::InvalidInput("test-pair: invalid partition indices");
            const auto cds = cobs::center_dataset(ds);
            const double p = cobs::pair_pvalue(cds.partitions[pair_i], cds.partitions[pair_j],
                                               trials, cobs::stat_from_string(stat), epsilon,
                                               seed);
            json out{{"i", pair_i}, {"j", pair_j}, {"trials", trials},
                     {"stat", stat}, {"epsilon", epsilon}, {"pvalue", p}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (*sd) {
            const auto ds = cobs::load_dataset(matrix_file, manifest_file, min_samples);
            cobs::StepdownOptions opt;
            opt.alpha = alpha;
            opt.trials = trials;
            opt.kind = cobs::stat_from_string(stat);
            opt.epsilon = epsilon;
            opt.seed = seed;
            opt.engine = cobs::engine_from_string(engine);
            opt.record_trial_maxima = false;
            const auto res = cobs::stepdown(ds, opt);
            write_file(out_file, cobs::stepdown_to_json(res, ds.r()).dump(2) + "\n");
            std::cout << "accepted " << res.accepted.size() << " of " << res.initial.size()
                      << " pairs in " << res.steps << " steps -> " << out_file << "\n";
            return 0;
        }
        if (*sel) {
            const auto [accepted, r] = cobs::accepted_from_stepdown_json(read_json(in_file));
            const auto graph = cobs::build_graph(accepted, r);
            std::vector<int> chosen;
            if (method == "cobs") {
                cobs::QuasiCliqueParams qc;
                qc.gamma = gamma;
                if (!core_list.empty()) qc.core = parse_id_list(core_list);
                qc.postprocess = postprocess;
                chosen = cobs::largest_quasi_clique(graph, qc);
            } else {
                chosen = cobs::rival_select(graph, gamma, cobs::rival_from_string(method));
            }
            json out{{"gamma", gamma}, {"method", method}, {"selected", chosen},
                     {"size", chosen.size()}};
            const std::string text = out.dump(2) + "\n";
            if (sel->count("--out")) write_file(out_file, text);
            std::cout << text;
            return 0;
        }
        if (*dg) {
            const auto ds = cobs::load_dataset(matrix_file, manifest_file, min_samples);
            std::set<int> ids;
            if (partitions == "all") {
                for (int p = 0; p < ds.r(); ++p) ids.insert(p);
            } else {
                for (int p : parse_id_list(partitions)) ids.insert(p);
            }
            cobs::DiagnosticParams dp;
            dp.divisions = divisions;
            dp.trials = trials;
            dp.seed = seed;
            dp.kind = cobs::stat_from_string(stat);
            dp.epsilon = epsilon;
            const auto res = cobs::homogeneity_diagnostic(ds, ids, dp);
            const std::string csv = [&] {
                std::ostringstream os;
                os.precision(17);
                os << "uniform,empirical\n";
                for (const auto& [u, p] : cobs::qq_points(res.pvalues))
                    os << u << ',' << p << '\n';
                return os.str();
            }();
            if (dg->count("--out")) write_file(out_file, csv);
            else std::cout << csv;
            return 0;
        }
        if (*roc) {
            spec.marginals = marginals_from_flags(marginal_name, marginal_file);
            cobs::SweepOptions opt;
            {
                std::stringstream ss(betas);
                std::string tok;
                opt.betas.clear();
                while (std::getline(ss, tok, ',')) opt.betas.push_back(std::stod(tok));
            }
            {
                std::stringstream ss(alphas);
                std::string tok;
                opt.alphas.clear();
                while (std::getline(ss, tok, ',')) opt.alphas.push_back(std::stod(tok));
            }
            opt.replicates = replicates;
            opt.trials = trials;
            opt.gamma = gamma;
            opt.seed = seed;
            const auto sweep = cobs::roc_sweep(spec, opt);
            const std::string csv = cobs::sweep_to_csv(sweep);
            if (roc->count("--out")) write_file(out_file, csv);
            else std::cout << csv;
            return 0;
        }
        if (*cmp) {
            spec.marginals = marginals_from_flags(marginal_name, marginal_file);
            cobs::MethodComparisonOptions opt;
            opt.alpha = alpha;
            opt.gamma = gamma;
            opt.trials = trials;
            opt.replicates = replicates;
            opt.reference_mc_n = reference_mc_n;
            opt.seed = seed;
            const auto res = cobs::method_comparison(spec, opt);
            std::ostringstream os;
            os.precision(10);
            os << "method,mean_spectral_error\n"
               << "cobs," << res.cobs << "\nall," << res.all << "\nbase," << res.base
               << "\noracle," << res.oracle << "\n";
            if (cmp->count("--out")) write_file(out_file, os.str());
            else std::cout << os.str();
            return 0;
        }
        if (*pl) {
            cfg.threads = threads;
            if (!core_list.empty()) cfg.core = parse_id_list(core_list);
            const auto rep = cobs::run_pipeline(cfg);
            json out{{"selected", rep.selected}, {"config_hash", rep.config_hash},
                     {"report", rep.report_json}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const cobs::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cobs::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
