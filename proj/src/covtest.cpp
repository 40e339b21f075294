#include "cobs/covtest.hpp"
#include "cobs/parallel.hpp"
#include "cobs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cobs {

TestStatistic test_statistic(const PartitionStats& a, const PartitionStats& b,
                             StatKind kind, double epsilon) {
    if (a.sigma_hat.rows() != b.sigma_hat.rows())
        throw InvalidInput("test_statistic: dimension mismatch");
    if (epsilon < 0.0 || epsilon >= 0.5)
        throw InvalidInput("test_statistic: epsilon must lie in [0, 0.5)");
    const Eigen::Index d = a.sigma_hat.rows();
    const double n1 = static_cast<double>(a.n);
    const double n2 = static_cast<double>(b.n);

    TestStatistic out;
    out.epsilon = epsilon;
    double best = -1.0;
    std::vector<double> cells;
    if (epsilon > 0.0) cells.reserve(static_cast<std::size_t>(d) * d);

    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double diff = a.sigma_hat(i, j) - b.sigma_hat(i, j);
            double t;
            if (kind == StatKind::Normalized) {
                const double denom = a.s_hat(i, j) / n1 + b.s_hat(i, j) / n2;
                if (denom == 0.0)
                    throw DegenerateVarianceError(static_cast<int>(i), static_cast<int>(j));
                t = diff * diff / denom;
            } else {
                t = std::abs(diff);
            }
            if (t > best) {
                best = t;
                out.argmax_index = {static_cast<int>(i), static_cast<int>(j)};
            }
            if (epsilon > 0.0) cells.push_back(t);
        }
    }

    if (epsilon == 0.0) {
        out.value = best;
    } else {
        // Order statistic at 1-based index ceil((1-eps) * d^2).
        const std::size_t total = cells.size();
        std::size_t idx = static_cast<std::size_t>(
            std::ceil((1.0 - epsilon) * static_cast<double>(total)));
        if (idx < 1) idx = 1;
        if (idx > total) idx = total;
        std::nth_element(cells.begin(), cells.begin() + (idx - 1), cells.end());
        out.value = cells[idx - 1];
    }
    return out;
}

Matrix bootstrap_sigma(const Matrix& centered_data, const Matrix& sigma_hat,
                       std::span<const double> g) {
    const Eigen::Index n = centered_data.rows();
    if (static_cast<Eigen::Index>(g.size()) != n)
        throw InvalidInput("bootstrap_sigma: multiplier length mismatch");
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), n);
    const double nd = static_cast<double>(n);
    Matrix weighted = gv.asDiagonal() * centered_data;
    Matrix out = (centered_data.transpose() * weighted) / nd;
    out.noalias() -= (gv.sum() / nd) * sigma_hat;
    return out;
}

double bootstrap_pair_value(const Matrix& boot_a, const Matrix& boot_b,
                            const PartitionStats& sa, const PartitionStats& sb,
                            StatKind kind) {
    if (kind == StatKind::MaxAbsDiff)
        return (boot_a - boot_b).cwiseAbs().maxCoeff();
    const double n1 = static_cast<double>(sa.n);
    const double n2 = static_cast<double>(sb.n);
    const Eigen::Index d = boot_a.rows();
    double best = -1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double denom = sa.s_hat(i, j) / n1 + sb.s_hat(i, j) / n2;
            if (denom == 0.0)
                throw DegenerateVarianceError(static_cast<int>(i), static_cast<int>(j));
            const double diff = boot_a(i, j) - boot_b(i, j);
            const double t = diff * diff / denom;
            if (t > best) best = t;
        }
    }
    return best;
}

double bootstrap_statistic(const Partition& a, const PartitionStats& sa,
                           const Partition& b, const PartitionStats& sb,
                           std::span<const double> g, StatKind kind) {
    if (!a.centered || !b.centered)
        throw InvalidInput("bootstrap_statistic: partitions must be centered");
    if (static_cast<Eigen::Index>(g.size()) != a.n() + b.n())
        throw InvalidInput("bootstrap_statistic: multiplier length must be n1+n2");
    const Matrix boot_a = bootstrap_sigma(a.data, sa.sigma_hat, g.subspan(0, a.n()));
    const Matrix boot_b = bootstrap_sigma(b.data, sb.sigma_hat, g.subspan(a.n(), b.n()));
    return bootstrap_pair_value(boot_a, boot_b, sa, sb, kind);
}

double pair_pvalue_raw(const Partition& a, const Partition& b, int trials,
                       StatKind kind, double epsilon, std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("pair_pvalue: trials must be >= 1");
    const Partition ca = a.centered ? a : center_partition(a);
    const Partition cb = b.centered ? b : center_partition(b);
    const PartitionStats sa = partition_stats(ca);
    const PartitionStats sb = partition_stats(cb);
    const double t_obs = test_statistic(sa, sb, kind, epsilon).value;

    const std::size_t total = static_cast<std::size_t>(ca.n() + cb.n());
    std::vector<double> boot(static_cast<std::size_t>(trials));
    std::exception_ptr err;
    parallel_for(trials, [&](std::int64_t trial) {
        try {
            Rng rng(seed, {static_cast<std::uint64_t>(trial)});
            std::vector<double> g(total);
            for (auto& x : g) x = rng.next_gaussian();
            boot[static_cast<std::size_t>(trial)] =
                bootstrap_statistic(ca, sa, cb, sb, g, kind);
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);

    int count = 0;
    for (double tb : boot)
        if (std::abs(tb) >= std::abs(t_obs)) ++count;
    return static_cast<double>(count) / static_cast<double>(trials);
}

double pair_pvalue(const Partition& a, const Partition& b, int trials,
                   StatKind kind, double epsilon, std::uint64_t seed) {
    // Reported p-values live in [1/B, 1]; an observed statistic beyond every
    // bootstrap draw is still resolved only to the bootstrap resolution.
    const double raw = pair_pvalue_raw(a, b, trials, kind, epsilon, seed);
    return std::max(1.0 / static_cast<double>(trials), raw);
}

} // namespace cobs
