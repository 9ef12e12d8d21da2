#include "flowforge/extraction.hpp"

#include "flowforge/error.hpp"
#include "flowforge/hash.hpp"
#include "flowforge/json_io.hpp"
#include "flowforge/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace flowforge {

using nlohmann::json;

namespace {

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent_[std::max(a, b)] = std::min(a, b);
  }

private:
  std::vector<std::size_t> parent_;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void push_unique_by_name(std::vector<ParamSpec> &into, const ParamSpec &p) {
  const std::string key = lower(p.name);
  for (const auto &q : into) {
    if (lower(q.name) == key)
      return;
  }
  into.push_back(p);
}

// Terminal (or initial) members per supernode of the segment condensation.
std::vector<NodeId> extremal_members(const SegmentGraph &g, bool sinks) {
  const WorkflowGraph wg = as_workflow(g);
  const Condensation c = condensed_dag(wg);
  const auto degree = sinks ? c.out_degrees() : c.in_degrees();
  std::unordered_map<NodeId, std::size_t> internal_degree;
  for (const auto &e : g.internal_edges)
    ++internal_degree[sinks ? e.source : e.target];

  std::unordered_set<NodeId> picked;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (degree[k] != 0)
      continue;
    bool any = false;
    for (const auto &id : c.members[k]) {
      if (!internal_degree.contains(id)) {
        picked.insert(id);
        any = true;
      }
    }
    if (!any)
      picked.insert(c.members[k].front());
  }
  std::vector<NodeId> out;
  for (const auto &n : g.nodes) {
    if (picked.contains(n.node_id))
      out.push_back(n.node_id);
  }
  return out;
}

} // namespace

WorkflowGraph as_workflow(const SegmentGraph &g) {
  WorkflowGraph wg;
  wg.workflow_id = g.segment_id;
  wg.nodes = g.nodes;
  wg.edges = g.internal_edges;
  return wg;
}

std::vector<NodeId> segment_sinks(const SegmentGraph &g) { return extremal_members(g, true); }

std::vector<NodeId> segment_sources(const SegmentGraph &g) {
  return extremal_members(g, false);
}

std::vector<const NodeSpec *> topological_members(const SegmentGraph &g) {
  const auto layers = longest_path_layers(as_workflow(g));
  std::vector<std::pair<std::size_t, std::size_t>> keyed; // (layer, position)
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    keyed.emplace_back(layers.at(g.nodes[i].node_id), i);
  std::sort(keyed.begin(), keyed.end());
  std::vector<const NodeSpec *> out;
  for (const auto &[layer, i] : keyed)
    out.push_back(&g.nodes[i]);
  return out;
}

std::string segment_content_id(const SegmentGraph &g) {
  std::unordered_map<NodeId, const NodeSpec *> by_id;
  std::vector<std::string> ntypes;
  for (const auto &n : g.nodes) {
    by_id.emplace(n.node_id, &n);
    ntypes.push_back(n.ntype);
  }
  std::sort(ntypes.begin(), ntypes.end());

  std::vector<std::tuple<std::string, std::size_t, std::string, std::size_t>> edges;
  for (const auto &e : g.internal_edges) {
    auto s = by_id.find(e.source);
    auto t = by_id.find(e.target);
    edges.emplace_back(s == by_id.end() ? "?" : s->second->ntype, e.source_port,
                       t == by_id.end() ? "?" : t->second->ntype, e.target_port);
  }
  std::sort(edges.begin(), edges.end());

  auto names = [](const std::vector<ParamSpec> &params) {
    std::vector<std::string> out;
    for (const auto &p : params)
      out.push_back(p.name);
    std::sort(out.begin(), out.end());
    return out;
  };

  json canonical = json::array();
  canonical.push_back(ntypes);
  json edge_list = json::array();
  for (const auto &[st, sp, tt, tp] : edges)
    edge_list.push_back(json::array({st, sp, tt, tp}));
  canonical.push_back(std::move(edge_list));
  canonical.push_back(names(g.boundary_inputs));
  canonical.push_back(names(g.boundary_outputs));
  return content_id(canonical.dump());
}

SegmentGraph make_segment_graph(std::vector<NodeSpec> nodes, std::vector<EdgeSpec> internal_edges) {
  SegmentGraph g;
  g.nodes = std::move(nodes);
  g.internal_edges = std::move(internal_edges);

  std::unordered_map<NodeId, const NodeSpec *> by_id;
  for (const auto &n : g.nodes)
    by_id.emplace(n.node_id, &n);
  std::unordered_map<NodeId, std::vector<const NodeSpec *>> preds;
  for (const auto &e : g.internal_edges) {
    if (auto s = by_id.find(e.source); s != by_id.end())
      preds[e.target].push_back(s->second);
  }

  for (const auto &n : g.nodes) {
    for (const auto &in : n.inputs) {
      if (!in.required)
        continue;
      bool satisfied = false;
      for (const NodeSpec *p : preds[n.node_id]) {
        for (const auto &out : p->outputs)
          satisfied = satisfied || compatible(out.ptype, in.ptype);
      }
      if (!satisfied)
        push_unique_by_name(g.boundary_inputs, in);
    }
  }
  for (const auto &sink : segment_sinks(g)) {
    for (const auto &out : by_id.at(sink)->outputs)
      push_unique_by_name(g.boundary_outputs, out);
  }
  g.segment_id = segment_content_id(g);
  return g;
}

void validate_segment(const Segment &s) {
  const SegmentGraph &g = s.graph;
  if (g.nodes.empty())
    throw Error(ErrorCode::InvalidSegment, "segment has no nodes");
  if (const auto report = validate_graph(as_workflow(g)); !report.ok()) {
    const auto &v = report.violations.front();
    throw Error(ErrorCode::InvalidSegment,
                std::string(to_string(v.kind)) + " " + v.subject + " " + v.detail);
  }
  std::unordered_map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    index.emplace(g.nodes[i].node_id, i);
  DisjointSets sets(g.nodes.size());
  for (const auto &e : g.internal_edges)
    sets.unite(index.at(e.source), index.at(e.target));
  for (std::size_t i = 1; i < g.nodes.size(); ++i) {
    if (sets.find(i) != sets.find(0))
      throw Error(ErrorCode::InvalidSegment, "segment subgraph is not weakly connected");
  }
  if (g.segment_id != segment_content_id(g))
    throw Error(ErrorCode::InvalidSegment, "segment_id does not match segment content");
  if (s.description.segment_id != g.segment_id)
    throw Error(ErrorCode::InvalidSegment, "description and graph carry different ids");
}

bool is_reusable(const Segment &s) noexcept {
  return std::any_of(s.graph.nodes.begin(), s.graph.nodes.end(),
                     [](const NodeSpec &n) { return n.role != NodeRole::Trigger; });
}

// ---------------------------------------------------------------------------
// Structural decomposition
// ---------------------------------------------------------------------------

Decomposition decompose_structural(const WorkflowGraph &g) {
  if (const auto report = validate_graph(g); !report.ok()) {
    const auto &v = report.violations.front();
    throw Error(ErrorCode::InvalidGraph, std::string(to_string(v.kind)) + " " + v.subject);
  }
  const Condensation c = condensed_dag(g);
  const auto out_deg = c.out_degrees();
  const auto in_deg = c.in_degrees();
  const auto layers = longest_path_layers(g);

  std::unordered_map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    index.emplace(g.nodes[i].node_id, i);

  auto is_cut = [&](const EdgeSpec &e) {
    if (g.nodes[index.at(e.source)].role == NodeRole::Trigger)
      return true;
    const std::size_t cs = c.component_of.at(e.source);
    const std::size_t ct = c.component_of.at(e.target);
    return cs != ct && (out_deg[cs] > 1 || in_deg[ct] > 1);
  };

  DisjointSets sets(g.nodes.size());
  std::vector<bool> cut(g.edges.size(), false);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    cut[i] = is_cut(g.edges[i]);
    if (!cut[i])
      sets.unite(index.at(g.edges[i].source), index.at(g.edges[i].target));
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    groups[sets.find(i)].push_back(i);

  struct Group {
    std::size_t min_layer;
    NodeId min_id;
    std::vector<std::size_t> members;
  };
  std::vector<Group> ordered;
  for (auto &[root, members] : groups) {
    Group grp{static_cast<std::size_t>(-1), g.nodes[members.front()].node_id, members};
    for (std::size_t m : members) {
      grp.min_layer = std::min(grp.min_layer, layers.at(g.nodes[m].node_id));
      grp.min_id = std::min(grp.min_id, g.nodes[m].node_id);
    }
    ordered.push_back(std::move(grp));
  }
  std::sort(ordered.begin(), ordered.end(), [](const Group &a, const Group &b) {
    return std::tie(a.min_layer, a.min_id) < std::tie(b.min_layer, b.min_id);
  });

  Decomposition d;
  d.workflow_id = g.workflow_id;
  std::vector<std::size_t> group_of(g.nodes.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    for (std::size_t m : ordered[k].members)
      group_of[m] = k;
  }
  std::vector<std::vector<EdgeSpec>> internal(ordered.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (cut[i])
      d.boundary_edges.push_back(g.edges[i]);
    else
      internal[group_of[index.at(g.edges[i].source)]].push_back(g.edges[i]);
  }
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    std::vector<NodeSpec> nodes;
    for (std::size_t m : ordered[k].members) {
      nodes.push_back(g.nodes[m]);
      d.assignment.emplace(g.nodes[m].node_id, k);
    }
    Segment s;
    s.graph = make_segment_graph(std::move(nodes), std::move(internal[k]));
    s.description.segment_id = s.graph.segment_id;
    s.description.source_workflow = {g.workflow_id, g.name, g.description};
    d.segments.push_back(std::move(s));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

Segment StubAnnotator::annotate(const Segment &segment) {
  Segment out = segment;
  std::string name, description = "Performs: ";
  bool first = true;
  for (const NodeSpec *n : topological_members(segment.graph)) {
    if (!first) {
      name += ", ";
      description += ", ";
    }
    name += n->ntype;
    description += n->name;
    first = false;
  }
  out.description.segment_name = std::move(name);
  out.description.segment_description = std::move(description);
  return out;
}

namespace {

bool same_topology(const SegmentGraph &a, const SegmentGraph &b) {
  if (a.segment_id != b.segment_id || a.nodes.size() != b.nodes.size() ||
      a.internal_edges != b.internal_edges)
    return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].node_id != b.nodes[i].node_id || a.nodes[i].ntype != b.nodes[i].ntype)
      return false;
  }
  return true;
}

} // namespace

Decomposition annotate(Decomposition d, SemanticAnnotator &annotator, std::size_t max_inflight) {
  std::vector<Segment> results(d.segments.size());
  for_each_bounded(d.segments.size(), max_inflight, [&](std::size_t i) {
    Segment annotated;
    try {
      annotated = annotator.annotate(d.segments[i]);
    } catch (const Error &) {
      throw;
    } catch (const std::exception &e) {
      throw Error(ErrorCode::AnnotatorUnavailable, e.what());
    }
    if (!same_topology(annotated.graph, d.segments[i].graph) ||
        annotated.description.segment_id != d.segments[i].description.segment_id)
      throw Error(ErrorCode::AnnotatorViolation,
                  "annotator changed the topology or id of segment " +
                      d.segments[i].graph.segment_id);
    results[i] = std::move(annotated);
  });
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    d.segments[i].description.segment_name = results[i].description.segment_name;
    d.segments[i].description.segment_description = results[i].description.segment_description;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

WorkflowGraph stitch(const Decomposition &d) {
  WorkflowGraph g;
  g.workflow_id = d.workflow_id;
  for (const auto &s : d.segments) {
    g.nodes.insert(g.nodes.end(), s.graph.nodes.begin(), s.graph.nodes.end());
    g.edges.insert(g.edges.end(), s.graph.internal_edges.begin(), s.graph.internal_edges.end());
  }
  g.edges.insert(g.edges.end(), d.boundary_edges.begin(), d.boundary_edges.end());
  return g;
}

ExtractionReport validate_decomposition(const WorkflowGraph &g, const Decomposition &d) {
  ExtractionReport r;
  std::unordered_set<NodeId> covered;
  std::set<NodeId> misallocated;
  std::unordered_map<NodeId, std::size_t> seen_in;
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    for (const auto &n : d.segments[i].graph.nodes) {
      covered.insert(n.node_id);
      auto a = d.assignment.find(n.node_id);
      if (a == d.assignment.end() || a->second != i)
        misallocated.insert(n.node_id);
      if (auto [it, fresh] = seen_in.emplace(n.node_id, i); !fresh && it->second != i)
        misallocated.insert(n.node_id);
    }
  }
  std::size_t hit = 0;
  for (const auto &n : g.nodes) {
    if (covered.contains(n.node_id))
      ++hit;
    else
      r.omitted.push_back(n.node_id);
  }
  r.node_coverage = g.nodes.empty() ? 1.0 : static_cast<double>(hit) / g.nodes.size();

  std::set<EdgeSpec> accounted(d.boundary_edges.begin(), d.boundary_edges.end());
  for (const auto &s : d.segments)
    accounted.insert(s.graph.internal_edges.begin(), s.graph.internal_edges.end());
  std::size_t valid = 0;
  for (const auto &e : g.edges)
    valid += accounted.contains(e) ? 1 : 0;
  r.edge_validity = g.edges.empty() ? 1.0 : static_cast<double>(valid) / g.edges.size();

  r.reconstructible = graphs_isomorphic_modulo_layout(g, stitch(d));
  r.misallocated.assign(misallocated.begin(), misallocated.end());
  return r;
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

void to_json(json &j, const SegmentGraph &g) {
  j = json{{"nodes", g.nodes},
           {"edges", g.internal_edges},
           {"boundary_inputs", g.boundary_inputs},
           {"boundary_outputs", g.boundary_outputs}};
}

void from_json(const json &j, SegmentGraph &g) {
  g.nodes = j.value("nodes", std::vector<NodeSpec>{});
  g.internal_edges = j.value("edges", std::vector<EdgeSpec>{});
  g.boundary_inputs = j.value("boundary_inputs", std::vector<ParamSpec>{});
  g.boundary_outputs = j.value("boundary_outputs", std::vector<ParamSpec>{});
}

void to_json(json &j, const Segment &s) {
  j = json{{"segment_id", s.graph.segment_id},
           {"name", s.description.segment_name},
           {"description", s.description.segment_description},
           {"source_workflow",
            {{"id", s.description.source_workflow.id},
             {"name", s.description.source_workflow.name},
             {"description", s.description.source_workflow.description}}},
           {"graph", s.graph},
           {"synthetic", s.synthetic}};
}

void from_json(const json &j, Segment &s) {
  s.graph = j.at("graph").get<SegmentGraph>();
  s.graph.segment_id = j.value("segment_id", "");
  s.description.segment_id = s.graph.segment_id;
  s.description.segment_name = j.value("name", "");
  s.description.segment_description = j.value("description", "");
  if (auto it = j.find("source_workflow"); it != j.end() && it->is_object()) {
    s.description.source_workflow.id = it->value("id", "");
    s.description.source_workflow.name = it->value("name", "");
    s.description.source_workflow.description = it->value("description", "");
  }
  s.synthetic = j.value("synthetic", false);
}

void to_json(json &j, const Decomposition &d) {
  j = json{{"workflow_id", d.workflow_id},
           {"segments", d.segments},
           {"boundary_edges", d.boundary_edges},
           {"assignment", d.assignment}};
}

void from_json(const json &j, Decomposition &d) {
  d.workflow_id = j.value("workflow_id", "");
  d.segments = j.value("segments", std::vector<Segment>{});
  d.boundary_edges = j.value("boundary_edges", std::vector<EdgeSpec>{});
  d.assignment = j.value("assignment", std::map<NodeId, std::size_t>{});
}

void to_json(json &j, const ExtractionReport &r) {
  j = json{{"node_coverage", r.node_coverage},
           {"edge_validity", r.edge_validity},
           {"reconstructible", r.reconstructible},
           {"misallocated", r.misallocated},
           {"omitted", r.omitted}};
}

} // namespace flowforge
