#pragma once

#include "cobs/stepdown.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cobs {

/// Undirected graph on partition indices; an edge per accepted hypothesis.
class HypothesisGraph {
public:
    HypothesisGraph() = default;
    HypothesisGraph(int r, const HypothesisList& edges);

    int r() const { return r_; }
    bool has_edge(int i, int j) const { return adj_[i * r_ + j] != 0; }
    const std::vector<int>& neighbors(int v) const { return nbrs_[v]; }
    int edge_count() const { return edge_count_; }

    /// Edge count inside a sorted vertex set.
    int internal_edges(const std::vector<int>& members) const;

    /// Induced subgraph; vertices are re-labelled 0..|members|-1 in order.
    HypothesisGraph induced(const std::vector<int>& members) const;

    HypothesisList edges() const;

    /// True when every edge of this graph is present in `other`.
    bool subgraph_of(const HypothesisGraph& other) const;

private:
    int r_ = 0;
    int edge_count_ = 0;
    std::vector<char> adj_;
    std::vector<std::vector<int>> nbrs_;
};

HypothesisGraph build_graph(const HypothesisList& accepted, int r);

/// k-vertex sets need at least gamma * k * (k-1) / 2 internal edges;
/// singletons qualify for any gamma.
bool is_quasi_clique(const HypothesisGraph& g, const std::vector<int>& members,
                     double gamma);

/// Bron-Kerbosch with pivoting; complete and duplicate-free, members sorted.
std::vector<std::vector<int>> maximal_cliques(const HypothesisGraph& g);

struct QuasiCliqueParams {
    double gamma = 0.95;
    std::optional<std::vector<int>> core; // seed the search around these vertices
    bool postprocess = false;             // drop members adjacent to < half the rest
};

/// Monotone clique-merging search: the queue starts from all maximal cliques,
/// pair unions are screened through memoized child-union verdicts, and the
/// largest surviving set is returned (ties: lexicographically smallest).
std::vector<int> largest_quasi_clique(const HypothesisGraph& g,
                                      const QuasiCliqueParams& params);

enum class RivalMethod { Spectral, LocalSearch, DenseSplit };
RivalMethod rival_from_string(const std::string& name);

/// Rival selectors used by the monotonicity study; none of them is required
/// to return a valid quasi-clique (LocalSearch in particular optimizes the
/// density surplus objective and returns its final set as-is).
std::vector<int> rival_select(const HypothesisGraph& g, double gamma, RivalMethod method);

/// For a nested sequence G_1 <= G_2 <= ..., flags |A(G_k)| <= |A(G_{k+1})|.
std::vector<bool> monotonicity_audit(
    const std::function<std::vector<int>(const HypothesisGraph&)>& selector,
    const std::vector<HypothesisGraph>& nested_graphs);

} // namespace cobs
