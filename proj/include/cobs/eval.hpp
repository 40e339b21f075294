#pragma once

#include "cobs/quasiclique.hpp"
#include "cobs/simgen.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace cobs {

enum class RateLevel { Hypothesis, Partition };

struct RateReport {
    double tpr = 0.0;
    double fpr = 0.0;
    RateLevel level = RateLevel::Hypothesis;
};

/// Rates over accepted hypotheses with the first r1 partitions as the target
/// group. Empty denominators yield 0 by convention.
RateReport hypothesis_rates(const HypothesisList& accepted, int r1, int r);

/// Rates over selected partitions.
RateReport partition_rates(const std::vector<int>& selected, int r1, int r2, int r3);

/// Largest singular value of (estimate - reference).
double spectral_error(const Matrix& estimate, const Matrix& reference);

/// Pool the selected partitions' centered samples and form X'X / N.
Matrix pooled_covariance(const PartitionedDataset& ds, const std::vector<int>& selected);

struct MethodComparison {
    double cobs = 0.0;
    double all = 0.0;
    double base = 0.0;
    double oracle = 0.0;
    int replicates = 0;
};

struct MethodComparisonOptions {
    double alpha = 0.1;
    double gamma = 0.95;
    int trials = 200;       // bootstrap trials inside stepdown
    int replicates = 10;
    long long reference_mc_n = 20000;
    std::uint64_t seed = 0;
};

/// Mean spectral error of the pooled covariance for four selection rules:
/// COBS (stepdown + quasi-clique), All, Base (3 group-1 partitions plus one
/// from each other group), Oracle (exactly the group-1 partitions). Errors
/// are against the Monte Carlo reference of the group-1 distribution.
MethodComparison method_comparison(const SimSpec& spec, const MethodComparisonOptions& opt);

struct SweepCell {
    double beta = 0.0;
    double alpha = 0.0;
    RateReport stepdown_hypothesis;
    RateReport bonferroni_hypothesis;
    RateReport partition; // quasi-clique selection on the stepdown graph
};

struct SweepResult {
    std::vector<SweepCell> grid; // means over replicates
    int replicates = 0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    std::vector<double> betas{0.0, 0.3, 0.6, 1.0};
    std::vector<double> alphas{0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 0.95};
    int replicates = 10;
    int trials = 200;
    double gamma = 0.95;
    bool run_bonferroni = true;
    bool run_selection = true;
    std::uint64_t seed = 0;
};

/// (beta, alpha) grid of mean rates; the SimSpec provides r1/r2/r3, n, d and
/// the marginal family, its beta and seed are overridden per cell/replicate.
SweepResult roc_sweep(const SimSpec& spec_template, const SweepOptions& opt);

std::string sweep_to_csv(const SweepResult& sweep);

} // namespace cobs
