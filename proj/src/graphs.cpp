#include "scifactor/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "scifactor/error.hpp"

namespace scifactor {

DirectedGraph DirectedGraph::from_edges(
    std::vector<std::string> node_ids,
    std::span<const std::tuple<std::uint32_t, std::uint32_t, double>> edges) {
  const auto n = node_ids.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return node_ids[a] < node_ids[b]; });
  std::vector<std::uint32_t> rank(n);
  DirectedGraph g;
  g.ids_.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    rank[order[r]] = r;
    g.ids_.push_back(std::move(node_ids[order[r]]));
  }
  for (std::size_t r = 1; r < n; ++r) {
    if (g.ids_[r] == g.ids_[r - 1]) throw DomainError("duplicate graph node id '" + g.ids_[r] + "'");
  }
  g.adjacency_.resize(n);
  for (const auto& [s, t, w] : edges) {
    if (s >= n || t >= n) throw DomainError("edge endpoint out of range");
    if (!std::isfinite(w) || w < 0.0) throw DomainError("edge weights must be finite and >= 0");
    g.adjacency_[rank[s]].push_back({rank[t], w});
  }
  for (auto& list : g.adjacency_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Edge& a, const Edge& b) { return a.target < b.target; });
    std::vector<Edge> merged;
    for (const auto& e : list) {
      if (!merged.empty() && merged.back().target == e.target) {
        merged.back().weight += e.weight;
      } else {
        merged.push_back(e);
      }
    }
    list = std::move(merged);
  }
  return g;
}

std::size_t DirectedGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total;
}

std::optional<std::uint32_t> DirectedGraph::find(std::string_view id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - ids_.begin());
}

double DirectedGraph::out_weight(std::uint32_t node) const {
  double total = 0.0;
  for (const auto& e : adjacency_.at(node)) total += e.weight;
  return total;
}

double DirectedGraph::weight(std::uint32_t source, std::uint32_t target) const {
  const auto& list = adjacency_.at(source);
  const auto it = std::lower_bound(list.begin(), list.end(), target,
                                   [](const Edge& e, std::uint32_t t) { return e.target < t; });
  return it != list.end() && it->target == target ? it->weight : 0.0;
}

double DirectedGraph::weight(std::string_view source, std::string_view target) const {
  const auto s = find(source);
  const auto t = find(target);
  return s && t ? weight(*s, *t) : 0.0;
}

// Builders map corpus indices to dense node ranks; corpus index order is
// already id order, so the node ranks below are sorted too.

DirectedGraph build_citation_graph(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  const auto papers = snap.papers();
  std::vector<std::string> ids;
  ids.reserve(papers.size());
  std::vector<std::uint32_t> node(corpus.paper_count(), 0);
  for (std::uint32_t i = 0; i < papers.size(); ++i) {
    node[papers[i]] = i;
    ids.push_back(corpus.paper(papers[i]).id);
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(snap.citation_edge_count());
  for (const PaperIndex p : papers) {
    for (const PaperIndex r : snap.references(p)) edges.emplace_back(node[p], node[r], 1.0);
  }
  return DirectedGraph::from_edges(std::move(ids), edges);
}

DirectedGraph build_coauthor_graph(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  const auto authors = snap.authors();
  std::vector<std::string> ids;
  ids.reserve(authors.size());
  std::vector<std::uint32_t> node(corpus.author_count(), 0);
  for (std::uint32_t i = 0; i < authors.size(); ++i) {
    node[authors[i]] = i;
    ids.push_back(corpus.author_id(authors[i]));
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (const PaperIndex p : snap.papers()) {
    const auto as = corpus.paper_authors(p);
    for (std::size_t i = 0; i < as.size(); ++i) {
      for (std::size_t j = i + 1; j < as.size(); ++j) {
        edges.emplace_back(node[as[i]], node[as[j]], 1.0);
        edges.emplace_back(node[as[j]], node[as[i]], 1.0);
      }
    }
  }
  return DirectedGraph::from_edges(std::move(ids), edges);
}

DirectedGraph build_venue_graph(const CorpusSnapshot& snap) {
  const auto& corpus = snap.corpus();
  const auto venues = snap.venues();
  std::vector<std::string> ids;
  std::vector<std::uint32_t> node(corpus.venue_count(), 0);
  for (std::uint32_t i = 0; i < venues.size(); ++i) {
    node[venues[i]] = i;
    ids.push_back(corpus.venue_id(venues[i]));
  }
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(snap.citation_edge_count());
  for (const PaperIndex p : snap.papers()) {
    const auto from = node[corpus.paper_venue(p)];
    for (const PaperIndex r : snap.references(p)) {
      edges.emplace_back(from, node[corpus.paper_venue(r)], 1.0);
    }
  }
  return DirectedGraph::from_edges(std::move(ids), edges);
}

void PageRankParams::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("pagerank damping must be in (0, 1)");
  if (!(tolerance > 0.0)) throw ConfigError("pagerank tolerance must be positive");
  if (max_iterations <= 0) throw ConfigError("pagerank max_iterations must be positive");
}

double PageRankResult::score(const DirectedGraph& graph, std::string_view id) const {
  const auto node = graph.find(id);
  if (!node) throw NotFoundError("no graph node '" + std::string(id) + "'");
  return scores.at(*node);
}

PageRankResult pagerank(const DirectedGraph& graph, const PageRankParams& params) {
  params.validate();
  PageRankResult result;
  const auto n = graph.node_count();
  if (n == 0) {
    result.converged = true;
    return result;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> out_weight(n);
  for (std::uint32_t u = 0; u < n; ++u) out_weight[u] = graph.out_weight(u);

  std::vector<double> rank(n, inv_n);
  std::vector<double> next(n);
  for (result.iterations = 0; result.iterations < params.max_iterations;) {
    double dangling = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
      if (out_weight[u] <= 0.0) dangling += rank[u];
    }
    const double base = (1.0 - params.damping) * inv_n + params.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::uint32_t u = 0; u < n; ++u) {
      if (out_weight[u] <= 0.0) continue;
      const double share = params.damping * rank[u] / out_weight[u];
      for (const auto& e : graph.out_edges(u)) next[e.target] += share * e.weight;
    }
    double change = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) change += std::abs(next[u] - rank[u]);
    rank.swap(next);
    ++result.iterations;
    if (change < params.tolerance) {
      result.converged = true;
      break;
    }
  }
  // Remove accumulated rounding drift so the scores sum to 1.
  const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
  for (auto& r : rank) r /= total;
  result.scores = std::move(rank);
  return result;
}

void write_edge_list(std::ostream& out, const DirectedGraph& graph) {
  out << "source,target,weight\n";
  for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
    for (const auto& e : graph.out_edges(u)) {
      out << graph.node_id(u) << ',' << graph.node_id(e.target) << ',' << format_real(e.weight, 17)
          << '\n';
    }
  }
}

}  // namespace scifactor
