#include "onedim/graph.hpp"

#include <algorithm>
#include <array>

#include "onedim/errors.hpp"

namespace onedim {

SimplicialGraph::SimplicialGraph(
    std::vector<std::string> vertices,
    std::vector<std::pair<std::string, std::string>> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (vertices_[i] == vertices_[j])
        throw DomainError("duplicate vertex label: " + vertices_[i]);
  adj_.assign(n, std::vector<char>(n, 0));
  for (const auto& [a, b] : edges_) {
    std::size_t i = index_of(a), j = index_of(b);
    if (i == j) throw DomainError("loop edge at vertex: " + a);
    if (adj_[i][j]) throw DomainError("duplicate edge: " + a + "-" + b);
    adj_[i][j] = adj_[j][i] = 1;
  }
}

std::size_t SimplicialGraph::index_of(const std::string& v) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] == v) return i;
  throw DomainError("unknown vertex label: " + v);
}

bool SimplicialGraph::adjacent(const std::string& a, const std::string& b) const {
  return adjacent(index_of(a), index_of(b));
}

bool p4_witness_valid(const SimplicialGraph& g, const P4Witness& w) {
  std::array<std::size_t, 4> id{};
  for (int i = 0; i < 4; ++i) id[i] = g.index_of(w.path[i]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      bool want = (j == i + 1);
      if (g.adjacent(id[i], id[j]) != want) return false;
    }
  return true;
}

namespace {

// Checks whether four vertex indices induce a path; fills the path order.
bool induced_p4_on(const SimplicialGraph& g, const std::array<std::size_t, 4>& v,
                   std::array<std::size_t, 4>& path) {
  int deg[4] = {0, 0, 0, 0};
  int edge_count = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (g.adjacent(v[i], v[j])) {
        ++edge_count;
        ++deg[i];
        ++deg[j];
      }
  if (edge_count != 3) return false;
  int ones = 0, twos = 0;
  for (int d : deg) {
    if (d == 1) ++ones;
    if (d == 2) ++twos;
  }
  if (ones != 2 || twos != 2) return false;
  int e1 = -1;
  for (int i = 0; i < 4; ++i)
    if (deg[i] == 1) {
      e1 = i;
      break;
    }
  int p[4] = {e1, -1, -1, -1};
  bool used[4] = {false, false, false, false};
  used[e1] = true;
  for (int step = 1; step < 4; ++step) {
    for (int j = 0; j < 4; ++j)
      if (!used[j] && g.adjacent(v[p[step - 1]], v[j])) {
        p[step] = j;
        used[j] = true;
        break;
      }
    if (p[step] < 0) return false;
  }
  for (int i = 0; i < 4; ++i) path[i] = v[p[i]];
  return true;
}

}  // namespace

std::optional<P4Witness> find_induced_p4(const SimplicialGraph& g) {
  std::size_t n = g.order();
  std::array<std::size_t, 4> path{};
  for (std::size_t a = 0; a + 3 < n; ++a)
    for (std::size_t b = a + 1; b + 2 < n; ++b)
      for (std::size_t c = b + 1; c + 1 < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d)
          if (induced_p4_on(g, {a, b, c, d}, path)) {
            P4Witness w;
            for (int i = 0; i < 4; ++i) w.path[i] = g.vertices()[path[i]];
            return w;
          }
  return std::nullopt;
}

namespace {

// Connected components of the subgraph induced on `sub`; `complement`
// flips adjacency.
std::vector<std::vector<std::size_t>> components_of(
    const SimplicialGraph& g, const std::vector<std::size_t>& sub, bool complement) {
  std::vector<std::vector<std::size_t>> comps;
  std::vector<char> seen(sub.size(), 0);
  for (std::size_t s = 0; s < sub.size(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp, stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      comp.push_back(sub[i]);
      for (std::size_t j = 0; j < sub.size(); ++j) {
        if (seen[j] || j == i) continue;
        bool adj = g.adjacent(sub[i], sub[j]);
        if (complement) adj = !adj;
        if (adj) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

std::optional<P4Witness> find_p4_in(const SimplicialGraph& g,
                                    const std::vector<std::size_t>& sub) {
  std::array<std::size_t, 4> path{};
  for (std::size_t a = 0; a + 3 < sub.size(); ++a)
    for (std::size_t b = a + 1; b + 2 < sub.size(); ++b)
      for (std::size_t c = b + 1; c + 1 < sub.size(); ++c)
        for (std::size_t d = c + 1; d < sub.size(); ++d)
          if (induced_p4_on(g, {sub[a], sub[b], sub[c], sub[d]}, path)) {
            P4Witness w;
            for (int i = 0; i < 4; ++i) w.path[i] = g.vertices()[path[i]];
            return w;
          }
  return std::nullopt;
}

// Recursive peel; returns nullopt and fills `p4` when the peel stalls.
std::optional<Cotree> peel(const SimplicialGraph& g,
                           const std::vector<std::size_t>& sub,
                           std::optional<P4Witness>& p4) {
  if (sub.size() == 1) {
    Cotree leaf;
    leaf.kind = Cotree::Kind::leaf;
    leaf.vertex = g.vertices()[sub[0]];
    return leaf;
  }
  auto comps = components_of(g, sub, false);
  if (comps.size() > 1) {
    Cotree t;
    t.kind = Cotree::Kind::unite;
    for (const auto& c : comps) {
      auto child = peel(g, c, p4);
      if (!child) return std::nullopt;
      t.children.push_back(std::move(*child));
    }
    return t;
  }
  auto cocomps = components_of(g, sub, true);
  if (cocomps.size() > 1) {
    Cotree t;
    t.kind = Cotree::Kind::join;
    for (const auto& c : cocomps) {
      auto child = peel(g, c, p4);
      if (!child) return std::nullopt;
      t.children.push_back(std::move(*child));
    }
    return t;
  }
  // connected with connected complement: an induced P4 must exist here
  p4 = find_p4_in(g, sub);
  if (!p4) throw NumericError("cograph peel stalled without an induced P4");
  return std::nullopt;
}

}  // namespace

CographDecomposition build_cotree(const SimplicialGraph& g) {
  CographDecomposition out;
  if (g.order() == 0) throw DomainError("empty graph has no decomposition");
  std::vector<std::size_t> all(g.order());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::optional<P4Witness> p4;
  auto t = peel(g, all, p4);
  if (t)
    out.cotree = std::move(*t);
  else
    out.p4 = std::move(p4);
  return out;
}

bool cotree_canonical(const Cotree& t) {
  if (t.kind == Cotree::Kind::leaf) return t.children.empty() && !t.vertex.empty();
  if (t.children.size() < 2) return false;
  for (const auto& c : t.children) {
    if (c.kind == t.kind) return false;
    if (!cotree_canonical(c)) return false;
  }
  return true;
}

namespace {
void collect_leaves(const Cotree& t, std::vector<std::string>& out) {
  if (t.kind == Cotree::Kind::leaf) {
    out.push_back(t.vertex);
    return;
  }
  for (const auto& c : t.children) collect_leaves(c, out);
}
}  // namespace

SimplicialGraph cotree_to_graph(const Cotree& t) {
  std::vector<std::string> verts;
  collect_leaves(t, verts);
  std::vector<std::pair<std::string, std::string>> edges;
  // join nodes connect every pair of leaves drawn from distinct children
  auto add_cross = [&](auto&& self, const Cotree& node) -> void {
    if (node.kind == Cotree::Kind::leaf) return;
    if (node.kind == Cotree::Kind::join) {
      std::vector<std::vector<std::string>> groups;
      for (const auto& c : node.children) {
        groups.emplace_back();
        collect_leaves(c, groups.back());
      }
      for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
          for (const auto& u : groups[i])
            for (const auto& v : groups[j]) edges.emplace_back(u, v);
    }
    for (const auto& c : node.children) self(self, c);
  };
  add_cross(add_cross, t);
  return SimplicialGraph(std::move(verts), std::move(edges));
}

SimplicialGraph commutation_graph(
    const std::vector<std::string>& labels,
    const std::vector<std::pair<std::string, std::string>>& commuting_pairs) {
  return SimplicialGraph(labels, commuting_pairs);
}

nlohmann::json graph_to_json(const SimplicialGraph& g) {
  nlohmann::json j;
  j["vertices"] = g.vertices();
  auto edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  return j;
}

SimplicialGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
    throw DomainError("graph json needs 'vertices' and 'edges'");
  std::vector<std::string> verts = j.at("vertices").get<std::vector<std::string>>();
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw DomainError("graph edge must be a two-element array");
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return SimplicialGraph(std::move(verts), std::move(edges));
}

nlohmann::json cotree_to_json(const Cotree& t) {
  nlohmann::json j;
  switch (t.kind) {
    case Cotree::Kind::leaf:
      j["kind"] = "leaf";
      j["vertex"] = t.vertex;
      return j;
    case Cotree::Kind::unite:
      j["kind"] = "union";
      break;
    case Cotree::Kind::join:
      j["kind"] = "join";
      break;
  }
  auto arr = nlohmann::json::array();
  for (const auto& c : t.children) arr.push_back(cotree_to_json(c));
  j["children"] = arr;
  return j;
}

Cotree cotree_from_json(const nlohmann::json& j) {
  Cotree t;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    t.kind = Cotree::Kind::leaf;
    t.vertex = j.at("vertex").get<std::string>();
    return t;
  }
  t.kind = kind == "union" ? Cotree::Kind::unite
           : kind == "join" ? Cotree::Kind::join
                            : throw DomainError("unknown cotree kind: " + kind);
  for (const auto& c : j.at("children")) t.children.push_back(cotree_from_json(c));
  return t;
}

}  // namespace onedim
