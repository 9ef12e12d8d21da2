#include "flowforge/ir.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <tuple>
#include <unordered_set>

namespace flowforge {

std::string_view to_string(ParamType t) noexcept {
  switch (t) {
  case ParamType::String: return "string";
  case ParamType::Number: return "number";
  case ParamType::Boolean: return "boolean";
  case ParamType::Json: return "json";
  case ParamType::Binary: return "binary";
  case ParamType::Any: return "any";
  }
  return "any";
}

std::string_view to_string(NodeRole r) noexcept {
  switch (r) {
  case NodeRole::Trigger: return "trigger";
  case NodeRole::Function: return "function";
  case NodeRole::Connector: return "connector";
  case NodeRole::Terminator: return "terminator";
  }
  return "function";
}

std::optional<ParamType> parse_param_type(std::string_view s) noexcept {
  for (auto t : {ParamType::String, ParamType::Number, ParamType::Boolean,
                 ParamType::Json, ParamType::Binary, ParamType::Any}) {
    if (to_string(t) == s)
      return t;
  }
  return std::nullopt;
}

std::optional<NodeRole> parse_node_role(std::string_view s) noexcept {
  for (auto r : {NodeRole::Trigger, NodeRole::Function, NodeRole::Connector,
                 NodeRole::Terminator}) {
    if (to_string(r) == s)
      return r;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) noexcept {
  switch (k) {
  case ViolationKind::DanglingEdge: return "DanglingEdge";
  case ViolationKind::DuplicateNodeId: return "DuplicateNodeId";
  case ViolationKind::DuplicateEdge: return "DuplicateEdge";
  case ViolationKind::EmptyNodeId: return "EmptyNodeId";
  case ViolationKind::EmptyParamName: return "EmptyParamName";
  case ViolationKind::DuplicateParamName: return "DuplicateParamName";
  }
  return "Unknown";
}

const NodeSpec *WorkflowGraph::find(std::string_view id) const noexcept {
  for (const auto &n : nodes) {
    if (n.node_id == id)
      return &n;
  }
  return nullptr;
}

namespace {

std::string render_edge(const EdgeSpec &e) {
  return e.source + ":" + std::to_string(e.source_port) + "->" + e.target + ":" +
         std::to_string(e.target_port);
}

void check_params(const NodeSpec &n, const std::vector<ParamSpec> &params,
                  std::string_view side, ValidationReport &report) {
  std::set<std::string> seen;
  for (const auto &p : params) {
    if (p.name.empty()) {
      report.violations.push_back(
          {ViolationKind::EmptyParamName, n.node_id, std::string(side)});
    } else if (!seen.insert(p.name).second) {
      report.violations.push_back({ViolationKind::DuplicateParamName, n.node_id,
                                   std::string(side) + " " + p.name});
    }
  }
}

// Index-based adjacency over a graph with unique node ids.
struct Indexed {
  std::unordered_map<NodeId, std::size_t> index;
  std::vector<std::vector<std::size_t>> succ;

  explicit Indexed(const WorkflowGraph &g) : succ(g.nodes.size()) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      index.emplace(g.nodes[i].node_id, i);
    for (const auto &e : g.edges) {
      auto s = index.find(e.source);
      auto t = index.find(e.target);
      if (s != index.end() && t != index.end())
        succ[s->second].push_back(t->second);
    }
  }
};

} // namespace

ValidationReport validate_graph(const WorkflowGraph &g) {
  ValidationReport report;
  std::unordered_set<NodeId> ids;
  for (const auto &n : g.nodes) {
    if (n.node_id.empty())
      report.violations.push_back({ViolationKind::EmptyNodeId, "", n.name});
    else if (!ids.insert(n.node_id).second)
      report.violations.push_back({ViolationKind::DuplicateNodeId, n.node_id, ""});
    check_params(n, n.inputs, "input", report);
    check_params(n, n.outputs, "output", report);
  }
  std::set<EdgeSpec> seen_edges;
  for (const auto &e : g.edges) {
    if (!ids.contains(e.source))
      report.violations.push_back(
          {ViolationKind::DanglingEdge, e.source, "source of " + render_edge(e)});
    if (!ids.contains(e.target))
      report.violations.push_back(
          {ViolationKind::DanglingEdge, e.target, "target of " + render_edge(e)});
    if (!seen_edges.insert(e).second)
      report.violations.push_back({ViolationKind::DuplicateEdge, render_edge(e), ""});
  }
  return report;
}

std::vector<std::size_t> Condensation::out_degrees() const {
  std::vector<std::size_t> deg(members.size(), 0);
  for (const auto &[s, t] : edges)
    ++deg[s];
  return deg;
}

std::vector<std::size_t> Condensation::in_degrees() const {
  std::vector<std::size_t> deg(members.size(), 0);
  for (const auto &[s, t] : edges)
    ++deg[t];
  return deg;
}

Condensation condensed_dag(const WorkflowGraph &g) {
  const Indexed ix(g);
  const std::size_t n = g.nodes.size();
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);

  std::vector<std::size_t> order(n, unvisited), low(n, 0), comp(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs; // reverse topological order
  std::size_t counter = 0;

  // Iterative Tarjan: frames hold (node, next successor position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != unvisited)
      continue;
    frames.emplace_back(root, 0);
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto &[v, pos] = frames.back();
      if (pos < ix.succ[v].size()) {
        const std::size_t w = ix.succ[v][pos++];
        if (order[w] == unvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], order[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == order[done]) {
        std::vector<std::size_t> scc;
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          scc.push_back(w);
        } while (w != done);
        sccs.push_back(std::move(scc));
      }
    }
  }

  std::reverse(sccs.begin(), sccs.end());
  Condensation c;
  c.members.resize(sccs.size());
  for (std::size_t k = 0; k < sccs.size(); ++k) {
    auto &scc = sccs[k];
    std::sort(scc.begin(), scc.end());
    for (std::size_t v : scc) {
      comp[v] = k;
      c.members[k].push_back(g.nodes[v].node_id);
      c.component_of.emplace(g.nodes[v].node_id, k);
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> dag_edges;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : ix.succ[v]) {
      if (comp[v] != comp[w])
        dag_edges.emplace(comp[v], comp[w]);
    }
  }
  c.edges.assign(dag_edges.begin(), dag_edges.end());
  return c;
}

std::map<NodeId, std::size_t> longest_path_layers(const WorkflowGraph &g) {
  const Condensation c = condensed_dag(g);
  std::vector<std::size_t> layer(c.size(), 0);
  // Supernode numbering is topological, and edges are sorted by source, so
  // a single pass relaxes every edge after its source is final.
  for (const auto &[s, t] : c.edges)
    layer[t] = std::max(layer[t], layer[s] + 1);
  std::map<NodeId, std::size_t> out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (const auto &id : c.members[k])
      out.emplace(id, layer[k]);
  }
  return out;
}

std::vector<NodeId> reachable_from(const WorkflowGraph &g, const NodeId &from) {
  const Indexed ix(g);
  auto it = ix.index.find(from);
  if (it == ix.index.end())
    return {};
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<std::size_t> queue{it->second};
  seen[it->second] = true;
  std::vector<NodeId> out;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    out.push_back(g.nodes[v].node_id);
    for (std::size_t w : ix.succ[v]) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Isomorphism modulo layout
// ---------------------------------------------------------------------------

namespace {

using PortEdge = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;

struct IsoView {
  std::vector<std::string> signature;
  // adjacency: (neighbor, source_port, target_port)
  std::vector<std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>> out, in;
  std::set<PortEdge> edges;
};

std::string param_key(std::vector<ParamSpec> params) {
  std::sort(params.begin(), params.end());
  std::string key;
  for (const auto &p : params) {
    key += p.name;
    key += '\x1e';
    key += to_string(p.ptype);
    key += p.required ? "!" : "?";
    key += '\x1f';
  }
  return key;
}

std::optional<IsoView> make_view(const WorkflowGraph &g) {
  IsoView v;
  std::unordered_map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto &n = g.nodes[i];
    if (!index.emplace(n.node_id, i).second)
      return std::nullopt;
    v.signature.push_back(n.ntype + '\x1d' + std::string(to_string(n.role)) + '\x1d' +
                          param_key(n.inputs) + '\x1d' + param_key(n.outputs));
  }
  v.out.resize(g.nodes.size());
  v.in.resize(g.nodes.size());
  for (const auto &e : g.edges) {
    auto s = index.find(e.source);
    auto t = index.find(e.target);
    if (s == index.end() || t == index.end())
      return std::nullopt;
    if (!v.edges.emplace(s->second, e.source_port, t->second, e.target_port).second)
      return std::nullopt;
    v.out[s->second].emplace_back(t->second, e.source_port, e.target_port);
    v.in[t->second].emplace_back(s->second, e.source_port, e.target_port);
  }
  return v;
}

using Colors = std::vector<std::size_t>;

// One round of colour refinement over both graphs with a shared palette, so
// equal colours mean equal refined neighbourhoods across the pair.
void refine(const IsoView &a, const IsoView &b, Colors &ca, Colors &cb) {
  using Key = std::pair<std::size_t, std::vector<std::tuple<int, std::size_t, std::size_t, std::size_t>>>;
  std::map<Key, std::size_t> palette;
  auto recolor = [&palette](const IsoView &v, const Colors &c) {
    Colors next(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      Key key{c[i], {}};
      for (const auto &[w, sp, tp] : v.out[i])
        key.second.emplace_back(0, sp, tp, c[w]);
      for (const auto &[w, sp, tp] : v.in[i])
        key.second.emplace_back(1, sp, tp, c[w]);
      std::sort(key.second.begin(), key.second.end());
      next[i] = palette.try_emplace(std::move(key), palette.size()).first->second;
    }
    return next;
  };
  Colors na = recolor(a, ca);
  Colors nb = recolor(b, cb);
  ca = std::move(na);
  cb = std::move(nb);
}

std::map<std::size_t, std::size_t> histogram(const Colors &c) {
  std::map<std::size_t, std::size_t> h;
  for (auto x : c)
    ++h[x];
  return h;
}

} // namespace

bool graphs_isomorphic_modulo_layout(const WorkflowGraph &ga, const WorkflowGraph &gb) {
  if (ga.nodes.size() != gb.nodes.size() || ga.edges.size() != gb.edges.size())
    return false;
  auto va = make_view(ga);
  auto vb = make_view(gb);
  if (!va || !vb)
    return false;
  const IsoView &a = *va;
  const IsoView &b = *vb;
  const std::size_t n = a.signature.size();

  Colors ca(n), cb(n);
  {
    std::map<std::string, std::size_t> palette;
    for (std::size_t i = 0; i < n; ++i)
      ca[i] = palette.try_emplace(a.signature[i], palette.size()).first->second;
    for (std::size_t i = 0; i < n; ++i)
      cb[i] = palette.try_emplace(b.signature[i], palette.size()).first->second;
  }
  std::size_t classes = 0;
  for (std::size_t round = 0; round <= n; ++round) {
    if (histogram(ca) != histogram(cb))
      return false;
    const std::size_t now = histogram(ca).size();
    if (round > 0 && now == classes)
      break;
    classes = now;
    refine(a, b, ca, cb);
  }

  // Backtracking over colour classes, smallest classes first.
  const auto hist = histogram(ca);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return hist.at(ca[x]) < hist.at(ca[y]);
  });

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> fwd(n, none), bwd(n, none);

  auto consistent = [&](std::size_t u, std::size_t v) {
    std::size_t count_a = 0, count_b = 0;
    for (const auto &[w, sp, tp] : a.out[u]) {
      const std::size_t mw = (w == u) ? v : fwd[w];
      if (mw == none)
        continue;
      if (!b.edges.contains({v, sp, mw, tp}))
        return false;
      ++count_a;
    }
    for (const auto &[w, sp, tp] : a.in[u]) {
      if (w == u)
        continue;
      const std::size_t mw = fwd[w];
      if (mw == none)
        continue;
      if (!b.edges.contains({mw, sp, v, tp}))
        return false;
      ++count_a;
    }
    for (const auto &[w, sp, tp] : b.out[v]) {
      if (w == v || bwd[w] != none)
        ++count_b;
    }
    for (const auto &[w, sp, tp] : b.in[v]) {
      if (w != v && bwd[w] != none)
        ++count_b;
    }
    return count_a == count_b;
  };

  std::function<bool(std::size_t)> extend = [&](std::size_t depth) -> bool {
    if (depth == n)
      return true;
    const std::size_t u = order[depth];
    for (std::size_t v = 0; v < n; ++v) {
      if (bwd[v] != none || cb[v] != ca[u] || !consistent(u, v))
        continue;
      fwd[u] = v;
      bwd[v] = u;
      if (extend(depth + 1))
        return true;
      fwd[u] = none;
      bwd[v] = none;
    }
    return false;
  };
  return extend(0);
}

} // namespace flowforge
