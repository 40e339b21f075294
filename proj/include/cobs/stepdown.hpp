#pragma once

#include "cobs/covtest.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cobs {

using HypothesisList = std::vector<std::pair<int, int>>; // (i, j), i < j

enum class Engine { Naive, Accelerated };

struct AcceleratedTrace {
    long long computed_count = 0; // pair statistics evaluated explicitly
    long long skipped_count = 0;  // pairs pruned by the shortest-path bound
};

struct StepdownOptions {
    double alpha = 0.1;
    int trials = 200;
    StatKind kind = StatKind::Normalized;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    Engine engine = Engine::Naive;
    int block_width = 512;          // column block for the bootstrap matrices
    bool record_trial_maxima = true;
};

struct StepdownResult {
    HypothesisList initial;
    HypothesisList accepted;
    std::vector<std::pair<std::pair<int, int>, int>> rejected; // (pair, step)
    std::vector<double> statistics;          // aligned with `initial`
    double alpha = 0.0;
    int trials = 0;
    int steps = 0;
    std::vector<double> quantile_trace;      // per-step (1-alpha) bootstrap quantile
    std::vector<std::vector<double>> trial_maxima; // per step, per trial (optional)
    AcceleratedTrace trace;                  // totals over all steps/trials
};

/// Simultaneous test of all r-choose-2 covariance equalities with FWER
/// control. Each outer step draws fresh multipliers per trial from the
/// (seed, step, trial) stream and removes every pair whose statistic reaches
/// the (1-alpha) quantile of the trial maxima; stops when a step removes
/// nothing. The accelerated engine requires the MaxAbsDiff statistic and
/// produces bit-identical results to the naive engine.
StepdownResult stepdown(const PartitionedDataset& ds, const StepdownOptions& opt);

/// Baseline: independent pair p-values, accept when p >= alpha / #pairs.
HypothesisList bonferroni(const PartitionedDataset& ds, double alpha, int trials,
                          StatKind kind, double epsilon, std::uint64_t seed);

/// One bootstrap covariance matrix per partition, indexed by global sample
/// position, so every pair containing a partition reuses its matrix.
std::vector<Matrix> per_partition_bootstrap_cache(
    const std::vector<Partition>& centered,
    const std::vector<PartitionStats>& stats,
    std::span<const double> g);

/// Exact max of the MaxAbsDiff bootstrap statistics over `remaining`, pruning
/// pairs whose triangle-inequality shortest-path bound cannot exceed the
/// running max. Disconnected pair graphs are handled per component.
std::pair<double, AcceleratedTrace> trial_max_accelerated(
    const std::vector<Partition>& centered,
    const std::vector<PartitionStats>& stats,
    const HypothesisList& remaining,
    std::span<const double> g);

} // namespace cobs
