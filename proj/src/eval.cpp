#include "cobs/eval.hpp"
#include "cobs/rng.hpp"

#include <cmath>
#include <sstream>

namespace cobs {

namespace {

double choose2(double k) { return k * (k - 1.0) / 2.0; }

} // namespace

RateReport hypothesis_rates(const HypothesisList& accepted, int r1, int r) {
    if (r1 > r) throw InvalidInput("hypothesis_rates: r1 > r");
    if (r1 < 2) throw InvalidInput("hypothesis_rates: r1 must be >= 2");
    int tp = 0, fp = 0;
    for (const auto& [i, j] : accepted) {
        // 0-based indices; group 1 is partitions 0..r1-1.
        if (i < r1 && j < r1) ++tp;
        else ++fp;
    }
    RateReport rep;
    rep.level = RateLevel::Hypothesis;
    rep.tpr = tp / choose2(r1);
    const double fp_denom = choose2(r) - choose2(r1);
    rep.fpr = fp_denom > 0.0 ? fp / fp_denom : 0.0;
    return rep;
}

RateReport partition_rates(const std::vector<int>& selected, int r1, int r2, int r3) {
    RateReport rep;
    rep.level = RateLevel::Partition;
    int tp = 0, fp = 0;
    for (int p : selected) (p < r1 ? tp : fp)++;
    rep.tpr = r1 > 0 ? static_cast<double>(tp) / r1 : 0.0;
    rep.fpr = (r2 + r3) > 0 ? static_cast<double>(fp) / (r2 + r3) : 0.0;
    return rep;
}

double spectral_error(const Matrix& estimate, const Matrix& reference) {
    if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
        throw InvalidInput("spectral_error: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(estimate - reference,
                                              Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix pooled_covariance(const PartitionedDataset& ds, const std::vector<int>& selected) {
    if (selected.empty()) throw InvalidInput("pooled_covariance: empty selection");
    Eigen::Index total = 0;
    for (int p : selected) total += ds.partitions[p].n();
    Matrix acc = Matrix::Zero(ds.d, ds.d);
    for (int p : selected) {
        const Partition c = center_partition(ds.partitions[p]);
        acc.noalias() += c.data.transpose() * c.data;
    }
    return acc / static_cast<double>(total);
}

MethodComparison method_comparison(const SimSpec& spec, const MethodComparisonOptions& opt) {
    if (opt.replicates < 1) throw InvalidInput("method_comparison: replicates >= 1");
    const Matrix reference = reference_covariance(
        ProxyConstruction::Sigma1, spec.d, spec.beta, spec.marginals, opt.reference_mc_n);

    MethodComparison out;
    out.replicates = opt.replicates;
    for (int rep = 0; rep < opt.replicates; ++rep) {
        SimSpec s = spec;
        s.seed = mix_seed(opt.seed, 0xC0400ull + static_cast<std::uint64_t>(rep));
        auto [ds, truth] = sample_dataset(s);

        StepdownOptions sd;
        sd.alpha = opt.alpha;
        sd.trials = opt.trials;
        sd.seed = mix_seed(s.seed, 0x51EBull);
        sd.record_trial_maxima = false;
        const StepdownResult res = stepdown(ds, sd);
        const HypothesisGraph graph = build_graph(res.accepted, ds.r());
        const std::vector<int> cobs_sel =
            largest_quasi_clique(graph, QuasiCliqueParams{opt.gamma, std::nullopt, false});

        std::vector<int> all_sel(ds.r());
        for (int p = 0; p < ds.r(); ++p) all_sel[p] = p;
        // Base: 3 group-1 partitions plus the first partition of each other group.
        std::vector<int> base_sel{0, 1, 2};
        if (spec.r2 > 0) base_sel.push_back(spec.r1);
        if (spec.r3 > 0) base_sel.push_back(spec.r1 + spec.r2);
        std::vector<int> oracle_sel(truth.target_set.begin(), truth.target_set.end());

        out.cobs += spectral_error(pooled_covariance(ds, cobs_sel), reference);
        out.all += spectral_error(pooled_covariance(ds, all_sel), reference);
        out.base += spectral_error(pooled_covariance(ds, base_sel), reference);
        out.oracle += spectral_error(pooled_covariance(ds, oracle_sel), reference);
    }
    out.cobs /= opt.replicates;
    out.all /= opt.replicates;
    out.base /= opt.replicates;
    out.oracle /= opt.replicates;
    return out;
}

SweepResult roc_sweep(const SimSpec& spec_template, const SweepOptions& opt) {
    if (opt.betas.empty() || opt.alphas.empty())
        throw InvalidInput("roc_sweep: empty grid");
    SweepResult out;
    out.replicates = opt.replicates;
    out.seed = opt.seed;
    const int r = spec_template.r1 + spec_template.r2 + spec_template.r3;

    for (double beta : opt.betas) {
        // Accumulators per alpha over replicates.
        std::vector<SweepCell> cells(opt.alphas.size());
        for (std::size_t a = 0; a < opt.alphas.size(); ++a) {
            cells[a].beta = beta;
            cells[a].alpha = opt.alphas[a];
        }
        for (int rep = 0; rep < opt.replicates; ++rep) {
            SimSpec s = spec_template;
            s.beta = beta;
            s.seed = mix_seed(opt.seed, mix_seed(static_cast<std::uint64_t>(beta * 1e6),
                                                 static_cast<std::uint64_t>(rep)));
            auto [ds, truth] = sample_dataset(s);
            (void)truth;

            // Bonferroni p-values do not depend on alpha; run the pair tests
            // once and sweep the acceptance cutoff.
            std::vector<double> pvalues;
            HypothesisList pairs;
            if (opt.run_bonferroni) {
                const PartitionedDataset cds = center_dataset(ds);
                for (int i = 0; i < r; ++i)
                    for (int j = i + 1; j < r; ++j) pairs.emplace_back(i, j);
                // Unfloored p-values: with m hypotheses and B trials the
                // corrected cutoff alpha/m sits below 1/B, so a floored
                // p-value could never clear it and the baseline would be
                // stuck accepting everything.
                pvalues.resize(pairs.size());
                for (std::size_t k = 0; k < pairs.size(); ++k)
                    pvalues[k] = pair_pvalue_raw(cds.partitions[pairs[k].first],
                                                 cds.partitions[pairs[k].second],
                                                 opt.trials, StatKind::Normalized, 0.0,
                                                 mix_seed(s.seed, 0xB0FEull * (k + 1)));
            }

            for (std::size_t a = 0; a < opt.alphas.size(); ++a) {
                StepdownOptions sd;
                sd.alpha = opt.alphas[a];
                sd.trials = opt.trials;
                sd.seed = mix_seed(s.seed, 0x51EBull);
                sd.record_trial_maxima = false;
                const StepdownResult res = stepdown(ds, sd);
                const RateReport hyp = hypothesis_rates(res.accepted, s.r1, r);
                cells[a].stepdown_hypothesis.tpr += hyp.tpr;
                cells[a].stepdown_hypothesis.fpr += hyp.fpr;

                if (opt.run_bonferroni) {
                    const double cutoff = opt.alphas[a] / static_cast<double>(pairs.size());
                    HypothesisList accepted;
                    for (std::size_t k = 0; k < pairs.size(); ++k)
                        if (pvalues[k] >= cutoff) accepted.push_back(pairs[k]);
                    const RateReport bon = hypothesis_rates(accepted, s.r1, r);
                    cells[a].bonferroni_hypothesis.tpr += bon.tpr;
                    cells[a].bonferroni_hypothesis.fpr += bon.fpr;
                }
                if (opt.run_selection) {
                    const HypothesisGraph graph = build_graph(res.accepted, r);
                    const std::vector<int> sel = largest_quasi_clique(
                        graph, QuasiCliqueParams{opt.gamma, std::nullopt, false});
                    const RateReport part = partition_rates(sel, s.r1, s.r2, s.r3);
                    cells[a].partition.tpr += part.tpr;
                    cells[a].partition.fpr += part.fpr;
                }
            }
        }
        for (auto& c : cells) {
            c.stepdown_hypothesis.tpr /= opt.replicates;
            c.stepdown_hypothesis.fpr /= opt.replicates;
            c.bonferroni_hypothesis.tpr /= opt.replicates;
            c.bonferroni_hypothesis.fpr /= opt.replicates;
            c.partition.tpr /= opt.replicates;
            c.partition.fpr /= opt.replicates;
            c.partition.level = RateLevel::Partition;
            out.grid.push_back(c);
        }
    }
    return out;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::ostringstream os;
    os.precision(10);
    os << "beta,alpha,stepdown_tpr,stepdown_fpr,bonferroni_tpr,bonferroni_fpr,"
          "partition_tpr,partition_fpr\n";
    for (const auto& c : sweep.grid) {
        os << c.beta << ',' << c.alpha << ',' << c.stepdown_hypothesis.tpr << ','
           << c.stepdown_hypothesis.fpr << ',' << c.bonferroni_hypothesis.tpr << ','
           << c.bonferroni_hypothesis.fpr << ',' << c.partition.tpr << ','
           << c.partition.fpr << '\n';
    }
    return os.str();
}

} // namespace cobs
