#pragma once

#include "cobs/covtest.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace cobs {

struct DiagnosticParams {
    int divisions = 250; // T
    int trials = 200;    // B, bootstrap trials per division
    std::uint64_t seed = 0;
    StatKind kind = StatKind::Normalized;
    double epsilon = 0.0;
};

struct DiagnosticResult {
    std::vector<double> pvalues;                 // one per division, in [1/B, 1]
    std::vector<std::vector<int>> divisions;     // group-1 partition ids per trial
    DiagnosticParams params;
};

/// Random-bipartition homogeneity diagnostic: each division assigns every
/// selected partition to a group by fair coin (redrawn until both groups are
/// non-empty), centers partitions individually, pools each group, and runs
/// the bootstrap covariance test between the pools.
DiagnosticResult homogeneity_diagnostic(const PartitionedDataset& ds,
                                        const std::set<int>& selected,
                                        const DiagnosticParams& params);

/// QQ points against the uniform: k-th point is ((k-0.5)/T, k-th order stat).
std::vector<std::pair<double, double>> qq_points(const std::vector<double>& pvalues);

} // namespace cobs
