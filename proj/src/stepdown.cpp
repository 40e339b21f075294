#include "cobs/stepdown.hpp"
#include "cobs/parallel.hpp"
#include "cobs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>

namespace cobs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::Index> sample_offsets(const std::vector<Partition>& parts) {
    std::vector<Eigen::Index> off(parts.size() + 1, 0);
    for (std::size_t p = 0; p < parts.size(); ++p) off[p + 1] = off[p] + parts[p].n();
    return off;
}

/// Quantile convention: 1-based order statistic ceil((1-alpha)*B) of the
/// ascending sorted values. An index of 0 (alpha = 1) maps to -infinity.
double step_quantile(std::vector<double> values, double alpha) {
    const auto b = static_cast<double>(values.size());
    const auto idx = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * b));
    if (idx <= 0) return -kInf;
    std::sort(values.begin(), values.end());
    return values[static_cast<std::size_t>(std::min<std::int64_t>(idx, values.size())) - 1];
}

double maxabs_pair(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

struct NaiveTrialContext {
    const std::vector<Partition>* parts;
    const std::vector<PartitionStats>* stats;
    const std::vector<Eigen::Index>* offsets;
    StatKind kind;
    int block_width;
};

double trial_max_naive(const NaiveTrialContext& ctx, const HypothesisList& remaining,
                       std::span<const double> g) {
    const auto& parts = *ctx.parts;
    const auto& stats = *ctx.stats;
    const auto& off = *ctx.offsets;
    const Eigen::Index d = parts.front().d();

    std::vector<char> used(parts.size(), 0);
    for (const auto& [i, j] : remaining) used[i] = used[j] = 1;

    if (ctx.block_width >= d) {
        std::vector<std::optional<Matrix>> boot(parts.size());
        for (std::size_t p = 0; p < parts.size(); ++p)
            if (used[p])
                boot[p] = bootstrap_sigma(parts[p].data, stats[p].sigma_hat,
                                          g.subspan(off[p], parts[p].n()));
        double best = -kInf;
        for (const auto& [i, j] : remaining)
            best = std::max(best, bootstrap_pair_value(*boot[i], *boot[j],
                                                       stats[i], stats[j], ctx.kind));
        return best;
    }

    // Column-blocked evaluation: each partition's bootstrap matrix is
    // materialized one (I, J) block at a time so large d fits in memory.
    // All matrices involved are symmetric, so upper block pairs suffice.
    const Eigen::Index bw = ctx.block_width;
    const Eigen::Index nblocks = (d + bw - 1) / bw;
    std::vector<double> gsum(parts.size(), 0.0);
    for (std::size_t p = 0; p < parts.size(); ++p)
        if (used[p])
            gsum[p] = Eigen::Map<const Eigen::VectorXd>(g.data() + off[p], parts[p].n()).sum();

    double best = -kInf;
    std::vector<Matrix> slab(parts.size());
    for (Eigen::Index bi = 0; bi < nblocks; ++bi) {
        const Eigen::Index i0 = bi * bw, iw = std::min(bw, d - i0);
        for (Eigen::Index bj = bi; bj < nblocks; ++bj) {
            const Eigen::Index j0 = bj * bw, jw = std::min(bw, d - j0);
            for (std::size_t p = 0; p < parts.size(); ++p) {
                if (!used[p]) continue;
                const Matrix& X = parts[p].data;
                Eigen::Map<const Eigen::VectorXd> gv(g.data() + off[p], X.rows());
                const double n = static_cast<double>(X.rows());
                slab[p] = (X.middleCols(i0, iw).transpose() *
                           (gv.asDiagonal() * X.middleCols(j0, jw))) / n;
                slab[p].noalias() -=
                    (gsum[p] / n) * stats[p].sigma_hat.block(i0, j0, iw, jw);
            }
            for (const auto& [a, b] : remaining) {
                if (ctx.kind == StatKind::MaxAbsDiff) {
                    best = std::max(best, maxabs_pair(slab[a], slab[b]));
                } else {
                    const double n1 = static_cast<double>(stats[a].n);
                    const double n2 = static_cast<double>(stats[b].n);
                    const Matrix diff = slab[a] - slab[b];
                    for (Eigen::Index ii = 0; ii < iw; ++ii) {
                        for (Eigen::Index jj = 0; jj < jw; ++jj) {
                            const double denom =
                                stats[a].s_hat(i0 + ii, j0 + jj) / n1 +
                                stats[b].s_hat(i0 + ii, j0 + jj) / n2;
                            if (denom == 0.0)
                                throw DegenerateVarianceError(static_cast<int>(i0 + ii),
                                                              static_cast<int>(j0 + jj));
                            const double t = diff(ii, jj) * diff(ii, jj) / denom;
                            if (t > best) best = t;
                        }
                    }
                }
            }
        }
    }
    return best;
}

} // namespace

std::vector<Matrix> per_partition_bootstrap_cache(
    const std::vector<Partition>& centered,
    const std::vector<PartitionStats>& stats,
    std::span<const double> g) {
    const auto off = sample_offsets(centered);
    std::vector<Matrix> out(centered.size());
    for (std::size_t p = 0; p < centered.size(); ++p)
        out[p] = bootstrap_sigma(centered[p].data, stats[p].sigma_hat,
                                 g.subspan(off[p], centered[p].n()));
    return out;
}

std::pair<double, AcceleratedTrace> trial_max_accelerated(
    const std::vector<Partition>& centered,
    const std::vector<PartitionStats>& stats,
    const HypothesisList& remaining,
    std::span<const double> g) {
    const auto off = sample_offsets(centered);
    const int r = static_cast<int>(centered.size());
    AcceleratedTrace trace;
    if (remaining.empty()) return {-kInf, trace};

    std::vector<std::vector<int>> adj(r);
    for (const auto& [i, j] : remaining) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());

    std::vector<std::optional<Matrix>> boot(r);
    auto get_boot = [&](int p) -> const Matrix& {
        if (!boot[p])
            boot[p] = bootstrap_sigma(centered[p].data, stats[p].sigma_hat,
                                      g.subspan(off[p], centered[p].n()));
        return *boot[p];
    };
    auto compute_stat = [&](int i, int j) { return maxabs_pair(get_boot(i), get_boot(j)); };

    // Edge weights; infinity marks statistics not yet computed.
    Matrix weight = Matrix::Constant(r, r, kInf);
    auto set_weight = [&](int i, int j, double w) { weight(i, j) = weight(j, i) = w; };

    std::vector<int> component(r, -1);
    double overall = -kInf;
    for (int start = 0; start < r; ++start) {
        if (component[start] != -1 || adj[start].empty()) continue;

        // Collect this component of the remaining-pair graph.
        std::vector<int> verts;
        std::queue<int> bfs;
        bfs.push(start);
        component[start] = start;
        while (!bfs.empty()) {
            const int v = bfs.front();
            bfs.pop();
            verts.push_back(v);
            for (int w : adj[v])
                if (component[w] == -1) {
                    component[w] = start;
                    bfs.push(w);
                }
        }
        std::sort(verts.begin(), verts.end());

        // Spanning tree: BFS from the vertex with the most samples (a star
        // tree when the component is complete), neighbors in ascending order.
        int root = verts.front();
        for (int v : verts)
            if (centered[v].n() > centered[root].n()) root = v;
        std::vector<char> seen(r, 0);
        std::vector<std::pair<int, int>> tree_edges;
        std::queue<int> q;
        q.push(root);
        seen[root] = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : adj[v]) {
                if (seen[w]) continue;
                seen[w] = 1;
                tree_edges.emplace_back(std::min(v, w), std::max(v, w));
                q.push(w);
            }
        }

        double z = -kInf;
        for (const auto& [i, j] : tree_edges) {
            const double s = compute_stat(i, j);
            set_weight(i, j, s);
            z = std::max(z, s);
            ++trace.computed_count;
        }

        // Off-tree pairs in ascending (i, j) order; Dijkstra gives the
        // triangle-inequality upper bound through computed edges.
        std::vector<char> in_tree_lookup(r * r, 0);
        for (const auto& [i, j] : tree_edges) in_tree_lookup[i * r + j] = 1;
        for (const auto& [i, j] : remaining) {
            if (component[i] != start) continue;
            if (in_tree_lookup[i * r + j]) continue;
            // Dijkstra from i restricted to this component.
            std::vector<double> dist(r, kInf);
            std::vector<char> done(r, 0);
            dist[i] = 0.0;
            for (;;) {
                int u = -1;
                double du = kInf;
                for (int v : verts)
                    if (!done[v] && dist[v] < du) {
                        du = dist[v];
                        u = v;
                    }
                if (u == -1 || u == j) break;
                done[u] = 1;
                for (int v : verts)
                    if (!done[v] && weight(u, v) < kInf)
                        dist[v] = std::min(dist[v], du + weight(u, v));
            }
            if (dist[j] > z) {
                const double s = compute_stat(i, j);
                set_weight(i, j, s);
                z = std::max(z, s);
                ++trace.computed_count;
            } else {
                ++trace.skipped_count;
            }
        }
        overall = std::max(overall, z);
    }
    return {overall, trace};
}

StepdownResult stepdown(const PartitionedDataset& ds, const StepdownOptions& opt) {
    if (ds.r() < 2) throw InvalidInput("stepdown requires at least 2 partitions");
    if (opt.alpha <= 0.0 || opt.alpha > 1.0)
        throw InvalidInput("stepdown: alpha must lie in (0, 1]");
    if (opt.engine == Engine::Accelerated && opt.kind != StatKind::MaxAbsDiff)
        throw InvalidInput("accelerated engine requires the MaxAbsDiff statistic");
    if (opt.engine == Engine::Accelerated && opt.epsilon > 0.0)
        throw InvalidInput("accelerated engine does not support epsilon > 0");

    const PartitionedDataset cds = center_dataset(ds);
    const auto& parts = cds.partitions;
    std::vector<PartitionStats> stats(parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) stats[p] = partition_stats(parts[p]);
    const auto off = sample_offsets(parts);
    const Eigen::Index total = off.back();

    StepdownResult res;
    res.alpha = opt.alpha;
    res.trials = opt.trials;
    for (int i = 0; i < cds.r(); ++i)
        for (int j = i + 1; j < cds.r(); ++j) res.initial.emplace_back(i, j);
    res.statistics.reserve(res.initial.size());
    for (const auto& [i, j] : res.initial)
        res.statistics.push_back(
            test_statistic(stats[i], stats[j], opt.kind, opt.epsilon).value);

    NaiveTrialContext ctx{&parts, &stats, &off, opt.kind, opt.block_width};
    HypothesisList remaining = res.initial;
    std::vector<double> remaining_stats = res.statistics;

    for (int step = 1;; ++step) {
        std::vector<double> maxima(static_cast<std::size_t>(opt.trials));
        std::vector<AcceleratedTrace> traces(static_cast<std::size_t>(opt.trials));
        std::exception_ptr err;
        parallel_for(opt.trials, [&](std::int64_t b) {
            try {
                Rng rng(opt.seed, {0x53445354ull, static_cast<std::uint64_t>(step),
                                   static_cast<std::uint64_t>(b)});
                std::vector<double> g(static_cast<std::size_t>(total));
                for (auto& x : g) x = rng.next_gaussian();
                if (opt.engine == Engine::Naive) {
                    maxima[static_cast<std::size_t>(b)] = trial_max_naive(ctx, remaining, g);
                } else {
                    auto [m, tr] = trial_max_accelerated(parts, stats, remaining, g);
                    maxima[static_cast<std::size_t>(b)] = m;
                    traces[static_cast<std::size_t>(b)] = tr;
                }
            } catch (...) {
                if (!err) err = std::current_exception();
            }
        });
        if (err) std::rethrow_exception(err);
        for (const auto& tr : traces) {
            res.trace.computed_count += tr.computed_count;
            res.trace.skipped_count += tr.skipped_count;
        }

        const double q = step_quantile(maxima, opt.alpha);
        res.quantile_trace.push_back(q);
        if (opt.record_trial_maxima) res.trial_maxima.push_back(std::move(maxima));
        res.steps = step;

        HypothesisList kept;
        std::vector<double> kept_stats;
        bool removed_any = false;
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            if (remaining_stats[k] >= q) {
                res.rejected.emplace_back(remaining[k], step);
                removed_any = true;
            } else {
                kept.push_back(remaining[k]);
                kept_stats.push_back(remaining_stats[k]);
            }
        }
        remaining = std::move(kept);
        remaining_stats = std::move(kept_stats);
        if (!removed_any || remaining.empty()) break;
    }
    res.accepted = std::move(remaining);
    return res;
}

HypothesisList bonferroni(const PartitionedDataset& ds, double alpha, int trials,
                          StatKind kind, double epsilon, std::uint64_t seed) {
    if (ds.r() < 2) throw InvalidInput("bonferroni requires at least 2 partitions");
    const PartitionedDataset cds = center_dataset(ds);
    HypothesisList pairs;
    for (int i = 0; i < cds.r(); ++i)
        for (int j = i + 1; j < cds.r(); ++j) pairs.emplace_back(i, j);
    const double cutoff = alpha / static_cast<double>(pairs.size());
    HypothesisList accepted;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [i, j] = pairs[k];
        const double p = pair_pvalue(cds.partitions[i], cds.partitions[j], trials,
                                     kind, epsilon,
                                     mix_seed(seed, 0xB0FEull * (k + 1)));
        if (p >= cutoff) accepted.push_back(pairs[k]);
    }
    return accepted;
}

} // namespace cobs
