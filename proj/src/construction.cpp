#include "flowforge/construction.hpp"

#include "flowforge/error.hpp"
#include "flowforge/json_io.hpp"
#include "flowforge/parallel.hpp"
#include "flowforge/platform.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace flowforge {

using nlohmann::json;

std::string_view to_string(Route r) noexcept {
  return r == Route::Retrieved ? "retrieved" : "generated";
}

// ---------------------------------------------------------------------------
// Unit resolution
// ---------------------------------------------------------------------------

Segment StubGenerator::generate(const FunctionalUnit &unit) {
  NodeSpec node;
  node.node_id = "placeholder";
  node.name = unit.title.empty() ? "Generated step" : unit.title;
  node.ntype = std::string(kPlaceholderType);
  node.role = NodeRole::Function;
  auto io = infer_node_io(node.ntype, false);
  node.inputs = std::move(io.inputs);
  node.outputs = std::move(io.outputs);
  node.raw_config = {{"typeVersion", 1},
                     {"parameters", {{"requirement", unit.description}}}};

  Segment s;
  s.graph = make_segment_graph({std::move(node)}, {});
  s.description.segment_id = s.graph.segment_id;
  s.description.segment_name = unit.title;
  s.description.segment_description = unit.description;
  s.synthetic = true;
  return s;
}

UnitResolution generate_unit(const FunctionalUnit &unit, SegmentGenerator &gen) {
  Segment s;
  try {
    s = gen.generate(unit);
  } catch (const Error &) {
    throw;
  } catch (const std::exception &e) {
    throw Error(ErrorCode::GeneratorUnavailable, e.what());
  }
  s.synthetic = true;
  validate_segment(s);
  return UnitResolution{unit.unit_id, Route::Generated, std::move(s), std::nullopt};
}

UnitResolution resolve_unit(const FunctionalUnit &unit, const Repository &repo,
                            const RetrievalConfig &cfg, SegmentGenerator &gen) {
  const auto candidates = repo.retrieve(unit.description, cfg);
  if (candidates.empty())
    return generate_unit(unit, gen);
  const CandidateMatch &best = candidates.front();
  return UnitResolution{unit.unit_id, Route::Retrieved, repo.fetch_segment(best.segment_id),
                        best.score};
}

// ---------------------------------------------------------------------------
// Compatibility
// ---------------------------------------------------------------------------

namespace {

bool same_name(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

} // namespace

CompatReport check_compatibility(const SegmentGraph &upstream, const SegmentGraph &downstream) {
  CompatReport r;
  for (const auto &in : downstream.boundary_inputs) {
    if (!in.required)
      continue;
    const ParamSpec *named = nullptr;
    for (const auto &out : upstream.boundary_outputs) {
      if (same_name(out.name, in.name) && compatible(out.ptype, in.ptype)) {
        named = &out;
        break;
      }
    }
    if (named) {
      r.satisfied.push_back({*named, in, true});
      continue;
    }
    const ParamSpec *typed = nullptr;
    std::size_t candidates = 0;
    for (const auto &out : upstream.boundary_outputs) {
      if (compatible(out.ptype, in.ptype)) {
        typed = &out;
        ++candidates;
      }
    }
    if (candidates == 1) {
      r.satisfied.push_back({*typed, in, false});
      r.needs_connector = true;
    } else {
      r.unsatisfied.push_back(in);
      r.needs_connector = true;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

std::string unique_name(std::string base, std::unordered_set<std::string> &taken,
                        std::string_view suffix) {
  if (taken.insert(base).second)
    return base;
  std::string candidate = base + " (" + std::string(suffix) + ")";
  for (int n = 2; !taken.insert(candidate).second; ++n)
    candidate = base + " (" + std::string(suffix) + " " + std::to_string(n) + ")";
  return candidate;
}

json binding_table(const CompatReport &r) {
  json bindings = json::array();
  for (const auto &b : r.satisfied)
    bindings.push_back({{"from", b.output.name},
                        {"to", b.input.name},
                        {"ptype", to_string(b.input.ptype)},
                        {"rule", b.by_name ? "name" : "type"}});
  json unsatisfied = json::array();
  for (const auto &p : r.unsatisfied)
    unsatisfied.push_back({{"name", p.name}, {"ptype", to_string(p.ptype)}});
  return {{"bindings", std::move(bindings)}, {"unsatisfied", std::move(unsatisfied)}};
}

} // namespace

Assembly assemble(const TaskPlan &plan, const std::vector<UnitResolution> &resolutions) {
  std::unordered_map<std::size_t, const UnitResolution *> by_unit;
  for (const auto &r : resolutions) {
    if (!by_unit.emplace(r.unit_id, &r).second)
      throw Error(ErrorCode::AssemblyFailure,
                  "two resolutions for unit " + std::to_string(r.unit_id));
  }
  for (const auto &u : plan.units) {
    if (!by_unit.contains(u.unit_id))
      throw Error(ErrorCode::AssemblyFailure, "unit " + std::to_string(u.unit_id) +
                                                  " has no resolution");
    const auto &g = by_unit.at(u.unit_id)->segment.graph;
    if (g.nodes.empty() || !validate_graph(as_workflow(g)).ok())
      throw Error(ErrorCode::AssemblyFailure, "segment for unit " + std::to_string(u.unit_id) +
                                                  " is internally invalid");
  }

  Assembly out;
  WorkflowGraph &g = out.graph;
  g.name = unit_title(plan.requirement_text);
  if (g.name.empty())
    g.name = "Constructed workflow";
  g.description = plan.requirement_text;

  auto mint = [](const NodeId &id, std::size_t unit) {
    return id + "@u" + std::to_string(unit);
  };
  std::unordered_set<std::string> names;
  for (const auto &u : plan.units) {
    const SegmentGraph &seg = by_unit.at(u.unit_id)->segment.graph;
    for (NodeSpec n : seg.nodes) {
      n.node_id = mint(n.node_id, u.unit_id);
      n.name = unique_name(n.name, names, "unit " + std::to_string(u.unit_id));
      g.nodes.push_back(std::move(n));
    }
    for (EdgeSpec e : seg.internal_edges) {
      e.source = mint(e.source, u.unit_id);
      e.target = mint(e.target, u.unit_id);
      g.edges.push_back(std::move(e));
    }
  }

  for (const auto &v : plan.units) {
    const SegmentGraph &down = by_unit.at(v.unit_id)->segment.graph;
    std::vector<NodeId> sources;
    for (const auto &id : segment_sources(down))
      sources.push_back(mint(id, v.unit_id));
    for (std::size_t u_id : v.depends_on) {
      auto up_it = by_unit.find(u_id);
      if (up_it == by_unit.end())
        throw Error(ErrorCode::AssemblyFailure, "unit " + std::to_string(v.unit_id) +
                                                    " depends on unknown unit " +
                                                    std::to_string(u_id));
      const SegmentGraph &up = up_it->second->segment.graph;
      std::vector<NodeId> sinks;
      for (const auto &id : segment_sinks(up))
        sinks.push_back(mint(id, u_id));

      const CompatReport compat = check_compatibility(up, down);
      if (!compat.needs_connector) {
        for (const auto &s : sinks)
          for (const auto &t : sources)
            g.edges.push_back({s, 0, t, 0});
        continue;
      }
      NodeSpec c;
      c.node_id = "connector@u" + std::to_string(u_id) + "-u" + std::to_string(v.unit_id);
      c.name = unique_name("Map unit " + std::to_string(u_id) + " to unit " +
                               std::to_string(v.unit_id),
                           names, "connector");
      c.ntype = std::string(kConnectorType);
      c.role = NodeRole::Connector;
      auto io = infer_node_io(c.ntype, false);
      c.inputs = std::move(io.inputs);
      c.outputs = std::move(io.outputs);
      c.raw_config = {{"typeVersion", 1}, {"parameters", binding_table(compat)}};
      for (const auto &s : sinks)
        g.edges.push_back({s, 0, c.node_id, 0});
      for (const auto &t : sources)
        g.edges.push_back({c.node_id, 0, t, 0});
      g.nodes.push_back(std::move(c));
      ++out.connectors_inserted;
    }
  }

  if (const auto report = validate_graph(g); !report.ok())
    throw Error(ErrorCode::AssemblyFailure,
                std::string(to_string(report.violations[0].kind)) + " " +
                    report.violations[0].subject);
  g.workflow_id = workflow_content_id(g);
  return out;
}

// ---------------------------------------------------------------------------
// Platform adaptation
// ---------------------------------------------------------------------------

Positions layered_positions(const WorkflowGraph &g) {
  const auto layers = longest_path_layers(g);
  std::map<std::size_t, std::vector<NodeId>> by_layer;
  for (const auto &[id, layer] : layers)
    by_layer[layer].push_back(id); // map iteration keeps ids sorted
  Positions pos;
  for (const auto &[layer, ids] : by_layer) {
    for (std::size_t rank = 0; rank < ids.size(); ++rank)
      pos[ids[rank]] = {kLayerSpacingX * static_cast<double>(layer),
                        kRowSpacingY * static_cast<double>(rank)};
  }
  return pos;
}

AdaptedWorkflow adapt_platform(const WorkflowGraph &g, std::string_view platform) {
  const PlatformAdapter &adapter = adapter_for(platform);
  if (const auto report = validate_graph(g); !report.ok())
    throw Error(ErrorCode::InvalidGraph, std::string(to_string(report.violations[0].kind)) +
                                             " " + report.violations[0].subject);

  // Entry points: every source supernode without a trigger. Inside an entry
  // cycle the first member stands in for the whole cycle.
  const Condensation c = condensed_dag(g);
  const auto in_deg = c.in_degrees();
  std::unordered_map<NodeId, std::size_t> node_in;
  for (const auto &e : g.edges)
    ++node_in[e.target];
  std::vector<NodeId> entries;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (in_deg[k] != 0)
      continue;
    const bool triggered = std::any_of(c.members[k].begin(), c.members[k].end(),
                                       [&](const NodeId &id) {
                                         return g.find(id)->role == NodeRole::Trigger;
                                       });
    if (triggered)
      continue;
    bool any = false;
    for (const auto &id : c.members[k]) {
      if (!node_in.contains(id)) {
        entries.push_back(id);
        any = true;
      }
    }
    if (!any)
      entries.push_back(c.members[k].front());
  }

  AdaptedWorkflow out;
  out.graph = g;
  std::unordered_set<std::string> ids, names;
  for (const auto &n : g.nodes) {
    ids.insert(n.node_id);
    names.insert(n.name);
  }
  auto add_unique = [&](NodeSpec n) {
    const std::string base_id = n.node_id;
    for (int k = 2; ids.contains(n.node_id); ++k)
      n.node_id = base_id + "-" + std::to_string(k);
    ids.insert(n.node_id);
    n.name = unique_name(n.name, names, "platform");
    out.graph.nodes.push_back(n);
    return n.node_id;
  };

  if (!entries.empty()) {
    const NodeId start = add_unique(adapter.start_node());
    for (const auto &id : entries)
      out.graph.edges.push_back({start, 0, id, 0});
  }
  if (auto end = adapter.terminator_node()) {
    const auto out_deg = c.out_degrees();
    std::vector<NodeId> exits;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (out_deg[k] == 0)
        exits.push_back(c.members[k].front());
    }
    const NodeId terminal = add_unique(*end);
    for (const auto &id : exits)
      out.graph.edges.push_back({id, 0, terminal, 0});
  }

  out.positions = layered_positions(out.graph);
  out.document = adapter.emit(out.graph, out.positions);
  return out;
}

// ---------------------------------------------------------------------------
// End to end
// ---------------------------------------------------------------------------

ConstructionResult construct(std::string_view requirement, const Repository &repo,
                             const ConstructOptions &options, RequirementAnalyzer &analyzer,
                             SegmentGenerator &gen) {
  ConstructionResult result;
  result.plan = analyze_requirement(requirement, repo, options.retrieval, analyzer);

  const auto &units = result.plan.units;
  result.resolutions.resize(units.size());
  for_each_bounded(units.size(), options.max_inflight, [&](std::size_t i) {
    result.resolutions[i] = options.force_generative
                                ? generate_unit(units[i], gen)
                                : resolve_unit(units[i], repo, options.retrieval, gen);
  });

  Assembly assembly = assemble(result.plan, result.resolutions);
  result.connectors_inserted = assembly.connectors_inserted;
  AdaptedWorkflow adapted = adapt_platform(assembly.graph, options.platform);
  adapted.graph.workflow_id = workflow_content_id(adapted.graph);
  result.graph = std::move(adapted.graph);
  result.deploy_doc = std::move(adapted.document);
  return result;
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

void to_json(json &j, const FunctionalUnit &u) {
  j = json{{"unit_id", u.unit_id},
           {"title", u.title},
           {"description", u.description},
           {"depends_on", u.depends_on}};
}

void to_json(json &j, const TaskPlan &p) {
  j = json{{"requirement_text", p.requirement_text},
           {"units", p.units},
           {"context_workflow_ids", p.context_workflow_ids}};
}

void to_json(json &j, const UnitResolution &r) {
  j = json{{"unit_id", r.unit_id},
           {"route", to_string(r.route)},
           {"segment", r.segment},
           {"score", r.score ? json(*r.score) : json(nullptr)}};
}

void to_json(json &j, const ConstructionResult &r) {
  j = json{{"plan", r.plan},
           {"resolutions", r.resolutions},
           {"graph", r.graph},
           {"connectors_inserted", r.connectors_inserted},
           {"deploy_doc", json::parse(r.deploy_doc.bytes)},
           {"deploy_doc_text", r.deploy_doc.bytes},
           {"deploy_filename", r.deploy_doc.filename}};
}

} // namespace flowforge
