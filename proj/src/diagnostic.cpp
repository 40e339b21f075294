#include "cobs/diagnostic.hpp"
#include "cobs/parallel.hpp"
#include "cobs/rng.hpp"

#include <algorithm>

namespace cobs {

namespace {

Partition pool_group(const PartitionedDataset& ds, const std::vector<int>& ids) {
    Eigen::Index n = 0;
    for (int p : ids) n += ds.partitions[p].n();
    Partition pooled;
    pooled.id = 0;
    pooled.data.resize(n, ds.d);
    Eigen::Index row = 0;
    for (int p : ids) {
        const Partition centered = center_partition(ds.partitions[p]);
        pooled.data.middleRows(row, centered.n()) = centered.data;
        row += centered.n();
    }
    // The pool of per-partition-centered blocks is itself column-centered.
    pooled.centered = true;
    return pooled;
}

} // namespace

DiagnosticResult homogeneity_diagnostic(const PartitionedDataset& ds,
                                        const std::set<int>& selected,
                                        const DiagnosticParams& params) {
    if (selected.size() < 2)
        throw InvalidInput("homogeneity diagnostic needs at least 2 selected partitions");
    for (int p : selected)
        if (p < 0 || p >= ds.r())
            throw InvalidInput("selected partition " + std::to_string(p) + " out of range");
    const std::vector<int> ids(selected.begin(), selected.end());

    DiagnosticResult res;
    res.params = params;
    res.pvalues.resize(static_cast<std::size_t>(params.divisions));
    res.divisions.resize(static_cast<std::size_t>(params.divisions));

    std::exception_ptr err;
    parallel_for(params.divisions, [&](std::int64_t t) {
        try {
            Rng rng(params.seed, {0xD1A6ull, static_cast<std::uint64_t>(t)});
            std::vector<int> group1, group2;
            do {
                group1.clear();
                group2.clear();
                for (int p : ids) (rng.next_bool() ? group1 : group2).push_back(p);
            } while (group1.empty() || group2.empty());

            const Partition a = pool_group(ds, group1);
            const Partition b = pool_group(ds, group2);
            res.pvalues[static_cast<std::size_t>(t)] =
                pair_pvalue(a, b, params.trials, params.kind, params.epsilon,
                            mix_seed(params.seed, 0xD1A7ull + static_cast<std::uint64_t>(t)));
            res.divisions[static_cast<std::size_t>(t)] = std::move(group1);
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return res;
}

std::vector<std::pair<double, double>> qq_points(const std::vector<double>& pvalues) {
    if (pvalues.empty()) throw InvalidInput("qq_points: empty p-value list");
    std::vector<double> sorted = pvalues;
    std::sort(sorted.begin(), sorted.end());
    const double t = static_cast<double>(sorted.size());
    std::vector<std::pair<double, double>> out;
    out.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k)
        out.emplace_back((static_cast<double>(k) + 0.5) / t, sorted[k]);
    return out;
}

} // namespace cobs
