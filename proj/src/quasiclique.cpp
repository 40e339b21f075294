#include "cobs/quasiclique.hpp"
#include "cobs/rng.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace cobs {

HypothesisGraph::HypothesisGraph(int r, const HypothesisList& edges)
    : r_(r), adj_(static_cast<std::size_t>(r) * r, 0), nbrs_(r) {
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= r || j >= r)
            throw InvalidInput("graph edge (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") out of range for r=" +
                               std::to_string(r));
        if (i == j) throw InvalidInput("self-loop at vertex " + std::to_string(i));
        if (adj_[i * r_ + j]) continue;
        adj_[i * r_ + j] = adj_[j * r_ + i] = 1;
        nbrs_[i].push_back(j);
        nbrs_[j].push_back(i);
        ++edge_count_;
    }
    for (auto& v : nbrs_) std::sort(v.begin(), v.end());
}

int HypothesisGraph::internal_edges(const std::vector<int>& members) const {
    int count = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            if (has_edge(members[a], members[b])) ++count;
    return count;
}

HypothesisGraph HypothesisGraph::induced(const std::vector<int>& members) const {
    std::unordered_map<int, int> relabel;
    for (std::size_t k = 0; k < members.size(); ++k)
        relabel[members[k]] = static_cast<int>(k);
    HypothesisList edges;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
            if (has_edge(members[a], members[b]))
                edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    return HypothesisGraph(static_cast<int>(members.size()), edges);
}

HypothesisList HypothesisGraph::edges() const {
    HypothesisList out;
    for (int i = 0; i < r_; ++i)
        for (int j : nbrs_[i])
            if (j > i) out.emplace_back(i, j);
    return out;
}

bool HypothesisGraph::subgraph_of(const HypothesisGraph& other) const {
    if (r_ > other.r()) return false;
    for (int i = 0; i < r_; ++i)
        for (int j : nbrs_[i])
            if (j > i && !other.has_edge(i, j)) return false;
    return true;
}

HypothesisGraph build_graph(const HypothesisList& accepted, int r) {
    return HypothesisGraph(r, accepted);
}

bool is_quasi_clique(const HypothesisGraph& g, const std::vector<int>& members,
                     double gamma) {
    const auto k = static_cast<double>(members.size());
    if (members.size() <= 1) return true;
    return static_cast<double>(g.internal_edges(members)) >= gamma * k * (k - 1.0) / 2.0;
}

namespace {

void bron_kerbosch(const HypothesisGraph& g, std::vector<int>& current,
                   std::vector<int> candidates, std::vector<int> excluded,
                   std::vector<std::vector<int>>& out) {
    if (candidates.empty() && excluded.empty()) {
        out.push_back(current);
        return;
    }
    // Pivot: the candidate/excluded vertex with the most candidate neighbors.
    int pivot = -1, best = -1;
    for (const auto* pool : {&candidates, &excluded}) {
        for (int u : *pool) {
            int cnt = 0;
            for (int v : candidates)
                if (g.has_edge(u, v)) ++cnt;
            if (cnt > best) {
                best = cnt;
                pivot = u;
            }
        }
    }
    std::vector<int> branch;
    for (int v : candidates)
        if (!g.has_edge(pivot, v)) branch.push_back(v);
    for (int v : branch) {
        std::vector<int> next_cand, next_excl;
        for (int u : candidates)
            if (g.has_edge(v, u)) next_cand.push_back(u);
        for (int u : excluded)
            if (g.has_edge(v, u)) next_excl.push_back(u);
        current.push_back(v);
        bron_kerbosch(g, current, std::move(next_cand), std::move(next_excl), out);
        current.pop_back();
        candidates.erase(std::find(candidates.begin(), candidates.end(), v));
        excluded.push_back(v);
    }
}

std::string set_key(const std::vector<int>& sorted_members) {
    std::string key;
    for (int v : sorted_members) {
        key += std::to_string(v);
        key += ',';
    }
    return key;
}

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// True when `a` should be preferred over `b` as the returned set: larger
/// first, then lexicographically smaller member list.
bool better_set(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
}

std::vector<int> clique_merge_search(const HypothesisGraph& g, double gamma,
                                     const std::vector<int>* core_result) {
    struct Entry {
        std::vector<int> members;
        std::vector<std::size_t> children; // indices into the queue
    };
    std::vector<Entry> queue;
    std::unordered_set<std::string> present;
    std::unordered_map<std::string, bool> verdict; // union-is-quasi-clique memo

    auto check = [&](const std::vector<int>& members) {
        const std::string key = set_key(members);
        auto it = verdict.find(key);
        if (it != verdict.end()) return it->second;
        const bool ok = is_quasi_clique(g, members, gamma);
        verdict.emplace(key, ok);
        return ok;
    };

    std::deque<std::pair<std::size_t, std::size_t>> pending;
    // Empty children means "child set equal to itself" (seed sets).
    auto push_entry = [&](std::vector<int> members, std::vector<std::size_t> children) {
        const std::string key = set_key(members);
        if (!present.insert(key).second) return;
        const std::size_t idx = queue.size();
        if (children.empty()) children.push_back(idx);
        queue.push_back(Entry{std::move(members), std::move(children)});
        for (std::size_t i = 0; i < idx; ++i) pending.emplace_back(i, idx);
    };

    for (auto& clique : maximal_cliques(g)) {
        verdict.emplace(set_key(clique), true); // cliques are quasi-cliques
        push_entry(std::move(clique), {});
    }

    if (core_result) {
        // Every seed must absorb the core result or leave the queue.
        std::vector<Entry> seeds = std::move(queue);
        queue.clear();
        present.clear();
        pending.clear();
        for (auto& e : seeds) {
            std::vector<int> merged = sorted_union(e.members, *core_result);
            if (!check(merged)) continue;
            push_entry(std::move(merged), {});
        }
        if (queue.empty()) push_entry(*core_result, {});
    }

    while (!pending.empty()) {
        const auto [ia, ib] = pending.front();
        pending.pop_front();
        const Entry& a = queue[ia];
        const Entry& b = queue[ib];
        // Children screen: some child-of-a union child-of-b must be a known
        // quasi-clique before the full union is checked.
        bool screen = false;
        for (std::size_t ca : a.children) {
            for (std::size_t cb : b.children) {
                if (check(sorted_union(queue[ca].members, queue[cb].members))) {
                    screen = true;
                    break;
                }
            }
            if (screen) break;
        }
        if (!screen) continue;
        std::vector<int> merged = sorted_union(a.members, b.members);
        if (!check(merged)) continue;
        push_entry(std::move(merged), {ia, ib});
    }

    std::vector<int> best;
    for (const auto& e : queue)
        if (best.empty() || better_set(e.members, best)) best = e.members;
    return best;
}

} // namespace

std::vector<std::vector<int>> maximal_cliques(const HypothesisGraph& g) {
    std::vector<int> all(g.r());
    for (int i = 0; i < g.r(); ++i) all[i] = i;
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    bron_kerbosch(g, current, all, {}, out);
    for (auto& c : out) std::sort(c.begin(), c.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> largest_quasi_clique(const HypothesisGraph& g,
                                      const QuasiCliqueParams& params) {
    if (params.gamma < 0.0 || params.gamma > 1.0)
        throw InvalidInput("gamma must lie in [0, 1]");
    if (g.r() == 0) return {};

    std::optional<std::vector<int>> core_result;
    if (params.core && !params.core->empty()) {
        std::vector<int> core = *params.core;
        std::sort(core.begin(), core.end());
        core.erase(std::unique(core.begin(), core.end()), core.end());
        for (int v : core)
            if (v < 0 || v >= g.r())
                throw InvalidInput("core vertex " + std::to_string(v) + " out of range");
        const std::vector<int> local =
            clique_merge_search(g.induced(core), params.gamma, nullptr);
        std::vector<int> mapped;
        mapped.reserve(local.size());
        for (int v : local) mapped.push_back(core[v]);
        std::sort(mapped.begin(), mapped.end());
        core_result = std::move(mapped);
    }

    std::vector<int> result =
        clique_merge_search(g, params.gamma, core_result ? &*core_result : nullptr);

    if (params.postprocess && result.size() > 1) {
        // Single pass: drop members adjacent to fewer than half the others.
        const double half = static_cast<double>(result.size() - 1) / 2.0;
        std::vector<int> kept;
        for (int v : result) {
            int deg = 0;
            for (int u : result)
                if (u != v && g.has_edge(u, v)) ++deg;
            if (static_cast<double>(deg) >= half) kept.push_back(v);
        }
        if (!kept.empty()) result = std::move(kept);
    }
    return result;
}

RivalMethod rival_from_string(const std::string& name) {
    if (name == "spectral") return RivalMethod::Spectral;
    if (name == "localsearch") return RivalMethod::LocalSearch;
    if (name == "densesplit") return RivalMethod::DenseSplit;
    throw InvalidInput("unknown rival method: " + name);
}

namespace {

std::vector<int> kmeans_labels(const Matrix& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    // Distinct random rows as initial centers.
    std::vector<int> centers_idx;
    while (static_cast<int>(centers_idx.size()) < k) {
        const int c = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (std::find(centers_idx.begin(), centers_idx.end(), c) == centers_idx.end())
            centers_idx.push_back(c);
    }
    Matrix centers(k, points.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = points.row(centers_idx[c]);

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (points.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
                if (d2 < bd) {
                    bd = d2;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int c = 0; c < k; ++c) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
            int cnt = 0;
            for (int i = 0; i < n; ++i)
                if (labels[i] == c) {
                    mean += points.row(i);
                    ++cnt;
                }
            if (cnt > 0) centers.row(c) = mean / cnt;
        }
    }
    return labels;
}

double kmeans_cost(const Matrix& points, const std::vector<int>& labels, int k) {
    Matrix centers = Matrix::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < points.rows(); ++i) {
        centers.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c)
        if (counts[c]) centers.row(c) /= counts[c];
    double cost = 0.0;
    for (int i = 0; i < points.rows(); ++i)
        cost += (points.row(i) - centers.row(labels[i])).squaredNorm();
    return cost;
}

std::vector<int> spectral_select(const HypothesisGraph& g, double gamma) {
    const int r = g.r();
    Matrix adj = Matrix::Zero(r, r);
    for (int i = 0; i < r; ++i)
        for (int j : g.neighbors(i)) adj(i, j) = 1.0;
    // The whole graph qualifying makes clustering pointless (and K-means can
    // only split it).
    std::vector<int> all(r);
    for (int v = 0; v < r; ++v) all[v] = v;
    if (is_quasi_clique(g, all, gamma)) return all;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(adj);

    std::vector<int> best;
    for (int k = 2; k <= std::min(5, r); ++k) {
        // Top-k adjacency eigenvectors (largest eigenvalues).
        Matrix points = eig.eigenvectors().rightCols(k);
        std::vector<int> labels;
        double best_cost = 0.0;
        for (int restart = 0; restart < 10; ++restart) {
            Rng rng(0x5BECull, {static_cast<std::uint64_t>(k),
                                static_cast<std::uint64_t>(restart)});
            auto cand = kmeans_labels(points, k, rng);
            const double cost = kmeans_cost(points, cand, k);
            if (labels.empty() || cost < best_cost) {
                best_cost = cost;
                labels = std::move(cand);
            }
        }
        for (int c = 0; c < k; ++c) {
            std::vector<int> cluster;
            for (int i = 0; i < r; ++i)
                if (labels[i] == c) cluster.push_back(i);
            if (!cluster.empty() && is_quasi_clique(g, cluster, gamma) &&
                (best.empty() || better_set(cluster, best)))
                best = std::move(cluster);
        }
    }
    if (best.empty()) best = {0}; // best-effort singleton
    return best;
}

std::vector<int> local_search_select(const HypothesisGraph& g, double gamma) {
    const int r = g.r();
    // Seed: vertex maximizing triangles / degree.
    int seed = 0;
    double best_ratio = -1.0;
    for (int v = 0; v < r; ++v) {
        const auto& nb = g.neighbors(v);
        int tri = 0;
        for (std::size_t a = 0; a < nb.size(); ++a)
            for (std::size_t b = a + 1; b < nb.size(); ++b)
                if (g.has_edge(nb[a], nb[b])) ++tri;
        const double ratio =
            nb.empty() ? 0.0 : static_cast<double>(tri) / static_cast<double>(nb.size());
        if (ratio > best_ratio) {
            best_ratio = ratio;
            seed = v;
        }
    }
    std::vector<char> in_set(r, 0);
    in_set[seed] = 1;
    for (int u : g.neighbors(seed)) in_set[u] = 1;
    auto size_of = [&] {
        int s = 0;
        for (char c : in_set) s += c;
        return s;
    };
    auto deg_inside = [&](int v) {
        int d = 0;
        for (int u : g.neighbors(v)) d += in_set[u];
        return d;
    };

    for (int pass = 0; pass < 50; ++pass) {
        bool moved = false;
        // Myopic adds: gain = deg_S(u) - gamma * |S|.
        for (;;) {
            const int k = size_of();
            int pick = -1;
            double best_gain = 0.0;
            for (int u = 0; u < r; ++u) {
                if (in_set[u]) continue;
                const int du = deg_inside(u);
                if (du == 0) continue; // only neighbors of S
                const double gain = du - gamma * k;
                if (gain > best_gain) {
                    best_gain = gain;
                    pick = u;
                }
            }
            if (pick < 0) break;
            in_set[pick] = 1;
            moved = true;
        }
        // One removal attempt: gain = gamma * (|S|-1) - deg_S(v).
        {
            const int k = size_of();
            int pick = -1;
            double best_gain = 0.0;
            for (int v = 0; v < r; ++v) {
                if (!in_set[v] || k <= 1) continue;
                const double gain = gamma * (k - 1) - deg_inside(v);
                if (gain > best_gain) {
                    best_gain = gain;
                    pick = v;
                }
            }
            if (pick >= 0) {
                in_set[pick] = 0;
                moved = true;
            }
        }
        if (!moved) break;
    }
    std::vector<int> out;
    for (int v = 0; v < r; ++v)
        if (in_set[v]) out.push_back(v);
    return out;
}

std::vector<int> dense_split_select(const HypothesisGraph& g, double gamma) {
    const int r = g.r();
    // Normalized shared-neighbor similarity (stand-in weight matrix).
    Matrix weight = Matrix::Zero(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = i + 1; j < r; ++j) {
            int shared = 0;
            for (int u : g.neighbors(i)) shared += g.has_edge(u, j) ? 1 : 0;
            const double num = shared + (g.has_edge(i, j) ? 1.0 : 0.0);
            const double den = std::sqrt((g.neighbors(i).size() + 1.0) *
                                         (g.neighbors(j).size() + 1.0));
            weight(i, j) = weight(j, i) = num / den;
        }
    }

    auto density_ok = [&](const std::vector<int>& s) {
        return is_quasi_clique(g, s, gamma);
    };

    std::vector<int> best;
    std::deque<std::vector<int>> frontier; // breadth-first over the split tree
    std::vector<int> root(r);
    for (int i = 0; i < r; ++i) root[i] = i;
    frontier.push_back(root);
    while (!frontier.empty()) {
        std::vector<int> node = std::move(frontier.front());
        frontier.pop_front();
        if (density_ok(node) && (best.empty() || better_set(node, best))) best = node;
        if (node.size() <= 1) continue;

        // Fiedler-style bisection of the node's weight submatrix.
        const int m = static_cast<int>(node.size());
        Matrix w(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) w(a, b) = weight(node[a], node[b]);
        Matrix lap = Matrix(w.rowwise().sum().asDiagonal()) - w;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
        const Eigen::VectorXd fiedler = eig.eigenvectors().col(std::min(1, m - 1));
        std::vector<int> left, right;
        for (int a = 0; a < m; ++a)
            (fiedler(a) < 0 ? left : right).push_back(node[a]);
        if (left.empty() || right.empty()) {
            // Degenerate vector: split at the median coordinate instead.
            std::vector<int> order(m);
            for (int a = 0; a < m; ++a) order[a] = a;
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                return fiedler(x) != fiedler(y) ? fiedler(x) < fiedler(y)
                                                : node[x] < node[y];
            });
            left.clear();
            right.clear();
            for (int a = 0; a < m; ++a)
                (a < m / 2 ? left : right).push_back(node[order[a]]);
            std::sort(left.begin(), left.end());
            std::sort(right.begin(), right.end());
        }
        frontier.push_back(std::move(left));
        frontier.push_back(std::move(right));
    }
    if (best.empty()) best = {0};
    return best;
}

} // namespace

std::vector<int> rival_select(const HypothesisGraph& g, double gamma, RivalMethod method) {
    if (gamma < 0.0 || gamma > 1.0) throw InvalidInput("gamma must lie in [0, 1]");
    switch (method) {
        case RivalMethod::Spectral: return spectral_select(g, gamma);
        case RivalMethod::LocalSearch: return local_search_select(g, gamma);
        case RivalMethod::DenseSplit: return dense_split_select(g, gamma);
    }
    throw InvalidInput("unreachable rival method");
}

std::vector<bool> monotonicity_audit(
    const std::function<std::vector<int>(const HypothesisGraph&)>& selector,
    const std::vector<HypothesisGraph>& nested_graphs) {
    for (std::size_t k = 0; k + 1 < nested_graphs.size(); ++k)
        if (!nested_graphs[k].subgraph_of(nested_graphs[k + 1]))
            throw InvalidInput("graph sequence is not nested at step " + std::to_string(k));
    std::vector<bool> flags;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < nested_graphs.size(); ++k) {
        const std::size_t size = selector(nested_graphs[k]).size();
        if (k > 0) flags.push_back(prev <= size);
        prev = size;
    }
    return flags;
}

} // namespace cobs
