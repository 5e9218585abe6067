#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "scifactor/corpus.hpp"

namespace scifactor {

struct Edge {
  std::uint32_t target;
  double weight;
};

// Weighted directed graph over opaque string node ids. Nodes are stored in
// sorted id order; each adjacency list is sorted by target with no duplicate
// (source, target) pairs.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  // Duplicate (source, target) pairs are merged by summing weights. Edge
  // endpoints must be indices into `node_ids` (which need not be sorted).
  // Throws DomainError on negative or non-finite weights.
  static DirectedGraph from_edges(std::vector<std::string> node_ids,
                                  std::span<const std::tuple<std::uint32_t, std::uint32_t, double>> edges);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const;
  const std::string& node_id(std::uint32_t node) const { return ids_.at(node); }
  std::optional<std::uint32_t> find(std::string_view id) const;
  std::span<const Edge> out_edges(std::uint32_t node) const { return adjacency_.at(node); }
  double out_weight(std::uint32_t node) const;
  // 0 when the edge is absent.
  double weight(std::uint32_t source, std::uint32_t target) const;
  double weight(std::string_view source, std::string_view target) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::vector<Edge>> adjacency_;
};

// citing -> cited, weight 1, over all snapshot papers.
DirectedGraph build_citation_graph(const CorpusSnapshot& snap);
// Symmetric; every unordered coauthor pair on a paper adds 1 in both directions.
DirectedGraph build_coauthor_graph(const CorpusSnapshot& snap);
// v1 -> v2 weighted by the number of citations from v1 papers to v2 papers,
// self-loops included.
DirectedGraph build_venue_graph(const CorpusSnapshot& snap);

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-10;  // L1 change between iterations
  int max_iterations = 200;

  void validate() const;
};

struct PageRankResult {
  std::vector<double> scores;  // indexed like the graph's nodes
  int iterations = 0;
  bool converged = false;  // false when max_iterations stopped the iteration

  double score(const DirectedGraph& graph, std::string_view id) const;
};

// Weighted power iteration with uniform teleport; dangling mass (nodes with no
// outgoing weight) is spread uniformly. Scores sum to 1.
PageRankResult pagerank(const DirectedGraph& graph, const PageRankParams& params = {});

// Debug dump: header "source,target,weight".
void write_edge_list(std::ostream& out, const DirectedGraph& graph);

}  // namespace scifactor
