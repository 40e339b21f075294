#pragma once

#include "cobs/core.hpp"

#include <cstdint>
#include <span>
#include <utility>

namespace cobs {

enum class StatKind {
    Normalized,  // squared difference over pooled variance-of-covariance
    MaxAbsDiff,  // plain max absolute difference; satisfies the triangle inequality
};

struct TestStatistic {
    double value = 0.0;
    std::pair<int, int> argmax_index{0, 0};
    double epsilon = 0.0;
};

/// Pairwise statistic between two partitions' cached stats. With epsilon > 0
/// the value is the empirical (1-epsilon) quantile of the d^2 cell statistics
/// (order statistic at index ceil((1-eps)*d^2)); epsilon = 0 is the exact max.
TestStatistic test_statistic(const PartitionStats& a, const PartitionStats& b,
                             StatKind kind, double epsilon = 0.0);

/// sigma^(b) = sum_m g_m (X_mi X_mj - sigma_ij) / n, assembled as
/// X' diag(g) X / n - mean(g) * sigma. Shared by the pair test and stepdown.
Matrix bootstrap_sigma(const Matrix& centered_data, const Matrix& sigma_hat,
                       std::span<const double> g);

/// Bootstrap statistic for one multiplier draw. The denominators are the same
/// s_hat terms as the test statistic and the max is always taken over all
/// cells (the epsilon trimming applies to the test statistic only).
double bootstrap_statistic(const Partition& a, const PartitionStats& sa,
                           const Partition& b, const PartitionStats& sb,
                           std::span<const double> g, StatKind kind);

/// Max statistic between two precomputed bootstrap covariance matrices.
double bootstrap_pair_value(const Matrix& boot_a, const Matrix& boot_b,
                            const PartitionStats& sa, const PartitionStats& sb,
                            StatKind kind);

/// Two-sample bootstrap p-value, p = #{b : |T^(b)| >= |T|} / B. Trial b draws
/// its multipliers from the (seed, b) stream, so the result is reproducible
/// at any parallelism level and never exactly 0.
double pair_pvalue(const Partition& a, const Partition& b, int trials,
                   StatKind kind, double epsilon, std::uint64_t seed);

/// Same proportion without the 1/B floor (exactly 0 when the observed
/// statistic exceeds every draw). Used for baseline sweeps where a floored
/// p-value can never clear a multiplicity-corrected cutoff.
double pair_pvalue_raw(const Partition& a, const Partition& b, int trials,
                       StatKind kind, double epsilon, std::uint64_t seed);

} // namespace cobs
