#include "flowforge/ingest.hpp"

#include <algorithm>

namespace flowforge {

IngestOutcome ingest_graph(Repository &repo, const WorkflowGraph &g, SemanticAnnotator &annotator,
                           std::size_t max_inflight, bool extract) {
  IngestOutcome out;
  out.workflow_id = g.workflow_id;
  if (auto existing = repo.find_workflow(g.workflow_id)) {
    out.already_present = true;
    out.segment_ids = existing->segment_ids;
    return out;
  }
  if (extract) {
    const Decomposition d = annotate(decompose_structural(g), annotator, max_inflight);
    for (const auto &s : d.segments) {
      if (!is_reusable(s))
        continue;
      const std::string id = repo.store_segment(s);
      if (std::find(out.segment_ids.begin(), out.segment_ids.end(), id) == out.segment_ids.end())
        out.segment_ids.push_back(id);
    }
  }
  out.already_present = repo.store_workflow(g, out.segment_ids).already_present;
  return out;
}

IngestOutcome ingest_document(Repository &repo, const SourceDocument &doc,
                              SemanticAnnotator &annotator, std::size_t max_inflight,
                              bool extract) {
  ParseResult parsed = parse_n8n(doc);
  IngestOutcome out = ingest_graph(repo, parsed.graph, annotator, max_inflight, extract);
  out.warnings = std::move(parsed.warnings);
  return out;
}

} // namespace flowforge
