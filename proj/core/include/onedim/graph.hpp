#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace onedim {

// Finite simple graph with string-labeled vertices. Loops and duplicate
// edges are rejected at construction.
class SimplicialGraph {
 public:
  SimplicialGraph() = default;
  SimplicialGraph(std::vector<std::string> vertices,
                  std::vector<std::pair<std::string, std::string>> edges);

  std::size_t order() const { return vertices_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }
  std::size_t index_of(const std::string& v) const;
  bool adjacent(std::size_t i, std::size_t j) const { return adj_[i][j] != 0; }
  bool adjacent(const std::string& a, const std::string& b) const;

 private:
  std::vector<std::string> vertices_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::vector<std::vector<char>> adj_;
};

// Ordered vertices (v1,v2,v3,v4) whose induced edges are exactly
// {v1v2, v2v3, v3v4}: an induced path on four vertices.
struct P4Witness {
  std::array<std::string, 4> path;
};

// Re-checks the defining property of a witness against a graph.
bool p4_witness_valid(const SimplicialGraph& g, const P4Witness& w);

// First induced path on four vertices in deterministic scan order, if any.
std::optional<P4Witness> find_induced_p4(const SimplicialGraph& g);

// Cograph decomposition tree. Canonical form: no union child of a union
// node, no join child of a join node; leaves carry vertex labels.
struct Cotree {
  enum class Kind { leaf, unite, join };
  Kind kind = Kind::leaf;
  std::string vertex;            // leaf only
  std::vector<Cotree> children;  // unite/join only
};

bool cotree_canonical(const Cotree& t);

// Either a full decomposition (graph is a cograph) or an induced-P4
// obstruction witness; exactly one member is set.
struct CographDecomposition {
  std::optional<Cotree> cotree;
  std::optional<P4Witness> p4;
  bool is_cograph() const { return cotree.has_value(); }
};

// Recursive peel: single vertices are leaves, disconnected graphs split as
// unions, co-disconnected graphs as joins; when both the graph and its
// complement are connected the stalled subgraph is scanned for an induced P4.
CographDecomposition build_cotree(const SimplicialGraph& g);

// Structural inverse of build_cotree.
SimplicialGraph cotree_to_graph(const Cotree& t);

// Graph on `labels` whose edges are exactly the listed commuting pairs.
SimplicialGraph commutation_graph(
    const std::vector<std::string>& labels,
    const std::vector<std::pair<std::string, std::string>>& commuting_pairs);

// JSON wire formats:
//   graph  {"vertices":["a","b"],"edges":[["a","b"]]}
//   cotree {"kind":"join","children":[...]} / {"kind":"leaf","vertex":"a"}
nlohmann::json graph_to_json(const SimplicialGraph& g);
SimplicialGraph graph_from_json(const nlohmann::json& j);
nlohmann::json cotree_to_json(const Cotree& t);
Cotree cotree_from_json(const nlohmann::json& j);

}  // namespace onedim
