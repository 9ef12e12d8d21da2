#pragma once

#include "flowforge/extraction.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/repository.hpp"

#include <string>
#include <vector>

namespace flowforge {

struct IngestOutcome {
  std::string workflow_id;
  bool already_present{false};
  std::vector<std::string> segment_ids; // reusable segments written to the store
  std::vector<std::string> warnings;
};

// Stores the normalized workflow and, when `extract` is set, decomposes,
// annotates and stores its reusable segments. Re-ingesting a known workflow
// writes nothing and reports already_present.
IngestOutcome ingest_graph(Repository &repo, const WorkflowGraph &g, SemanticAnnotator &annotator,
                           std::size_t max_inflight = 4, bool extract = true);

IngestOutcome ingest_document(Repository &repo, const SourceDocument &doc,
                              SemanticAnnotator &annotator, std::size_t max_inflight = 4,
                              bool extract = true);

} // namespace flowforge
