#pragma once

// The dual-knowledge workflow repository: a graph store for segment
// topology keyed by segment id, and an exact vector index over function
// descriptions. Complete workflows live in a second namespace used as
// context for requirement analysis.
//
// On-disk layout under the data directory:
//   workflows/<id>.json        normalized workflow graph + its segment ids
//   segments/<id>.json         segment file format
//   index/ids.txt              newline-delimited segment ids
//   index/vectors.bin          little-endian float32, kEmbeddingDims per id
//   index/workflow_ids.txt     same pair for the workflow namespace
//   index/workflow_vectors.bin
//
// Thread-safety: any number of concurrent readers; writers are serialized
// and a write becomes visible to readers all at once.

#include "flowforge/embedding.hpp"
#include "flowforge/extraction.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

struct RetrievalConfig {
  std::size_t k{10};
  double theta{0.6}; // applied strictly: score > theta

  // Throws InvalidArgument unless k >= 1 and 0 <= theta <= 1.
  void validate() const;
};

struct CandidateMatch {
  std::string segment_id;
  double score{0};
};

struct WorkflowMatch {
  std::string workflow_id;
  double score{0};
};

struct RepositoryStats {
  std::size_t workflow_count{0};
  std::size_t segment_count{0};
  std::size_t synthetic_count{0};

  friend bool operator==(const RepositoryStats &, const RepositoryStats &) = default;
};

struct WorkflowRecord {
  WorkflowGraph graph;
  std::vector<std::string> segment_ids;
};

struct StoreOutcome {
  std::string id;
  bool already_present{false};
};

// Text indexed for a segment: name + " " + description.
[[nodiscard]] std::string index_text(const FunctionDescription &d);

// Descending score, ties by ascending id.
[[nodiscard]] bool ranks_before(double score_a, std::string_view id_a, double score_b,
                                std::string_view id_b) noexcept;

class Repository {
public:
  // In-memory only; nothing touches the filesystem.
  explicit Repository(EmbeddingProviderPtr provider);
  // Opens (creating if needed) the on-disk store under data_dir.
  Repository(std::filesystem::path data_dir, EmbeddingProviderPtr provider);

  Repository(const Repository &) = delete;
  Repository &operator=(const Repository &) = delete;

  // Content-addressed and idempotent: re-storing an id replaces its record
  // (graph and description) without creating a duplicate.
  std::string store_segment(const Segment &s);
  // Returns false when the id was not present.
  bool delete_segment(const std::string &segment_id);

  [[nodiscard]] SegmentGraph fetch_graph(const std::string &segment_id) const;
  [[nodiscard]] Segment fetch_segment(const std::string &segment_id) const;
  [[nodiscard]] std::vector<Segment> list_segments() const;

  [[nodiscard]] std::vector<CandidateMatch> retrieve(std::string_view query,
                                                     const RetrievalConfig &cfg) const;
  [[nodiscard]] std::vector<CandidateMatch> retrieve(const EmbeddingVector &query,
                                                     const RetrievalConfig &cfg) const;

  StoreOutcome store_workflow(const WorkflowGraph &g, std::vector<std::string> segment_ids);
  [[nodiscard]] std::optional<WorkflowRecord> find_workflow(const std::string &id) const;
  [[nodiscard]] WorkflowRecord fetch_workflow(const std::string &id) const;
  [[nodiscard]] std::vector<WorkflowRecord> list_workflows() const;
  // Same ranking as retrieve, no threshold.
  [[nodiscard]] std::vector<WorkflowMatch> retrieve_workflows(std::string_view query,
                                                              std::size_t k) const;

  [[nodiscard]] RepositoryStats stats() const;
  // Snapshot of (segment id, indexed vector), ascending by id.
  [[nodiscard]] std::vector<std::pair<std::string, EmbeddingVector>> segment_vectors() const;

  [[nodiscard]] EmbeddingProvider &provider() const noexcept { return *provider_; }
  [[nodiscard]] const std::optional<std::filesystem::path> &data_dir() const noexcept {
    return dir_;
  }

private:
  struct SegmentEntry {
    Segment segment;
    EmbeddingVector vector;
  };
  struct WorkflowEntry {
    WorkflowRecord record;
    EmbeddingVector vector;
  };

  void load();
  void persist_segment_index() const;
  void persist_workflow_index() const;

  std::optional<std::filesystem::path> dir_;
  EmbeddingProviderPtr provider_;
  mutable std::shared_mutex mu_;
  std::map<std::string, SegmentEntry> segments_;
  std::map<std::string, WorkflowEntry> workflows_;
};

} // namespace flowforge
