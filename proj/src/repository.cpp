#include "flowforge/repository.hpp"

#include "flowforge/error.hpp"
#include "flowforge/json_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace flowforge {

namespace fs = std::filesystem;
using nlohmann::json;

void RetrievalConfig::validate() const {
  if (k < 1)
    throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (!(theta >= 0.0 && theta <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, 1]");
}

std::string index_text(const FunctionDescription &d) {
  return d.segment_name + " " + d.segment_description;
}

bool ranks_before(double score_a, std::string_view id_a, double score_b,
                  std::string_view id_b) noexcept {
  if (score_a != score_b)
    return score_a > score_b;
  return id_a < id_b;
}

namespace {

void write_atomic(const fs::path &path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw Error(ErrorCode::StorageFailure, "rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void remove_file(const fs::path &path) {
  std::error_code ec;
  fs::remove(path, ec);
  if (ec)
    throw Error(ErrorCode::StorageFailure, "remove " + path.string() + ": " + ec.message());
}

std::string encode_vectors(const std::vector<const EmbeddingVector *> &vectors) {
  std::string bytes;
  bytes.reserve(vectors.size() * kEmbeddingDims * 4);
  for (const auto *v : vectors) {
    for (double x : v->values) {
      const float f = static_cast<float>(x);
      std::uint32_t bits = 0;
      std::memcpy(&bits, &f, sizeof bits);
      for (int b = 0; b < 4; ++b)
        bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
  }
  return bytes;
}

// id -> vector, read back from an ids manifest + packed float file.
std::unordered_map<std::string, EmbeddingVector> decode_vectors(const fs::path &ids_path,
                                                                const fs::path &vec_path) {
  std::unordered_map<std::string, EmbeddingVector> out;
  if (!fs::exists(ids_path) || !fs::exists(vec_path))
    return out;
  std::vector<std::string> ids;
  std::istringstream lines(read_file(ids_path));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty())
      ids.push_back(line);
  }
  const std::string bytes = read_file(vec_path);
  if (bytes.size() != ids.size() * kEmbeddingDims * 4)
    throw Error(ErrorCode::StorageFailure, vec_path.string() + " does not match its manifest");
  for (std::size_t r = 0; r < ids.size(); ++r) {
    EmbeddingVector v;
    for (std::size_t d = 0; d < kEmbeddingDims; ++d) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(
                    static_cast<unsigned char>(bytes[(r * kEmbeddingDims + d) * 4 + b]))
                << (8 * b);
      float f = 0;
      std::memcpy(&f, &bits, sizeof f);
      v.values[d] = f;
    }
    out.emplace(ids[r], v);
  }
  return out;
}

template <typename Map>
void write_index(const fs::path &ids_path, const fs::path &vec_path, const Map &entries) {
  std::string manifest;
  std::vector<const EmbeddingVector *> vectors;
  for (const auto &[id, entry] : entries) {
    manifest += id;
    manifest += '\n';
    vectors.push_back(&entry.vector);
  }
  write_atomic(vec_path, encode_vectors(vectors));
  write_atomic(ids_path, manifest);
}

json workflow_file(const WorkflowRecord &r) {
  json j = r.graph;
  j["segment_ids"] = r.segment_ids;
  return j;
}

} // namespace

Repository::Repository(EmbeddingProviderPtr provider) : provider_(std::move(provider)) {
  if (!provider_)
    throw Error(ErrorCode::InvalidArgument, "repository requires an embedding provider");
}

Repository::Repository(fs::path data_dir, EmbeddingProviderPtr provider)
    : dir_(std::move(data_dir)), provider_(std::move(provider)) {
  if (!provider_)
    throw Error(ErrorCode::InvalidArgument, "repository requires an embedding provider");
  std::error_code ec;
  for (const char *sub : {"workflows", "segments", "index"}) {
    fs::create_directories(*dir_ / sub, ec);
    if (ec)
      throw Error(ErrorCode::StorageFailure, "cannot create " + (*dir_ / sub).string());
  }
  load();
}

void Repository::load() {
  const fs::path root = *dir_;
  const bool rebuild = provider_->deterministic();
  std::unordered_map<std::string, EmbeddingVector> seg_vectors, wf_vectors;
  if (!rebuild) {
    seg_vectors = decode_vectors(root / "index" / "ids.txt", root / "index" / "vectors.bin");
    wf_vectors = decode_vectors(root / "index" / "workflow_ids.txt",
                                root / "index" / "workflow_vectors.bin");
  }

  auto json_files = [](const fs::path &dir) {
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
  };

  try {
    for (const auto &path : json_files(root / "segments")) {
      Segment s = json::parse(read_file(path)).get<Segment>();
      if (s.graph.segment_id != path.stem().string())
        throw Error(ErrorCode::StorageFailure, path.string() + " holds a different segment id");
      auto it = seg_vectors.find(s.graph.segment_id);
      EmbeddingVector v = it != seg_vectors.end() ? it->second
                                                  : embed(index_text(s.description), *provider_);
      std::string id = s.graph.segment_id;
      segments_.emplace(std::move(id), SegmentEntry{std::move(s), v});
    }
    for (const auto &path : json_files(root / "workflows")) {
      const json j = json::parse(read_file(path));
      WorkflowRecord r{j.get<WorkflowGraph>(),
                       j.value("segment_ids", std::vector<std::string>{})};
      auto it = wf_vectors.find(r.graph.workflow_id);
      EmbeddingVector v =
          it != wf_vectors.end() ? it->second : embed(r.graph.description, *provider_);
      std::string id = r.graph.workflow_id;
      workflows_.emplace(std::move(id), WorkflowEntry{std::move(r), v});
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::StorageFailure, std::string("corrupt repository file: ") + e.what());
  }
}

void Repository::persist_segment_index() const {
  if (dir_)
    write_index(*dir_ / "index" / "ids.txt", *dir_ / "index" / "vectors.bin", segments_);
}

void Repository::persist_workflow_index() const {
  if (dir_)
    write_index(*dir_ / "index" / "workflow_ids.txt", *dir_ / "index" / "workflow_vectors.bin",
                workflows_);
}

std::string Repository::store_segment(const Segment &s) {
  validate_segment(s);
  // Embedding may call out to a remote provider; keep it outside the lock.
  EmbeddingVector v = embed(index_text(s.description), *provider_);
  const std::string id = s.graph.segment_id;
  std::unique_lock lock(mu_);
  if (dir_)
    write_atomic(*dir_ / "segments" / (id + ".json"), json(s).dump(2) + "\n");
  segments_.insert_or_assign(id, SegmentEntry{s, v});
  persist_segment_index();
  return id;
}

bool Repository::delete_segment(const std::string &segment_id) {
  std::unique_lock lock(mu_);
  auto it = segments_.find(segment_id);
  if (it == segments_.end())
    return false;
  if (dir_)
    remove_file(*dir_ / "segments" / (segment_id + ".json"));
  segments_.erase(it);
  persist_segment_index();
  return true;
}

SegmentGraph Repository::fetch_graph(const std::string &segment_id) const {
  return fetch_segment(segment_id).graph;
}

Segment Repository::fetch_segment(const std::string &segment_id) const {
  std::shared_lock lock(mu_);
  auto it = segments_.find(segment_id);
  if (it == segments_.end())
    throw Error(ErrorCode::NotFound, "segment '" + segment_id + "'");
  return it->second.segment;
}

std::vector<Segment> Repository::list_segments() const {
  std::shared_lock lock(mu_);
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (const auto &[id, entry] : segments_)
    out.push_back(entry.segment);
  return out;
}

std::vector<CandidateMatch> Repository::retrieve(std::string_view query,
                                                 const RetrievalConfig &cfg) const {
  return retrieve(embed(query, *provider_), cfg);
}

std::vector<CandidateMatch> Repository::retrieve(const EmbeddingVector &query,
                                                 const RetrievalConfig &cfg) const {
  cfg.validate();
  std::vector<CandidateMatch> hits;
  {
    std::shared_lock lock(mu_);
    for (const auto &[id, entry] : segments_) {
      const double score = dot(query, entry.vector);
      if (score > cfg.theta)
        hits.push_back({id, score});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const CandidateMatch &a, const CandidateMatch &b) {
    return ranks_before(a.score, a.segment_id, b.score, b.segment_id);
  });
  if (hits.size() > cfg.k)
    hits.resize(cfg.k);
  return hits;
}

StoreOutcome Repository::store_workflow(const WorkflowGraph &g,
                                        std::vector<std::string> segment_ids) {
  EmbeddingVector v = embed(g.description, *provider_);
  std::unique_lock lock(mu_);
  if (workflows_.contains(g.workflow_id))
    return {g.workflow_id, true};
  WorkflowRecord r{g, std::move(segment_ids)};
  if (dir_)
    write_atomic(*dir_ / "workflows" / (g.workflow_id + ".json"),
                 workflow_file(r).dump(2) + "\n");
  workflows_.emplace(g.workflow_id, WorkflowEntry{std::move(r), v});
  persist_workflow_index();
  return {g.workflow_id, false};
}

std::optional<WorkflowRecord> Repository::find_workflow(const std::string &id) const {
  std::shared_lock lock(mu_);
  auto it = workflows_.find(id);
  if (it == workflows_.end())
    return std::nullopt;
  return it->second.record;
}

WorkflowRecord Repository::fetch_workflow(const std::string &id) const {
  auto r = find_workflow(id);
  if (!r)
    throw Error(ErrorCode::NotFound, "workflow '" + id + "'");
  return std::move(*r);
}

std::vector<WorkflowRecord> Repository::list_workflows() const {
  std::shared_lock lock(mu_);
  std::vector<WorkflowRecord> out;
  for (const auto &[id, entry] : workflows_)
    out.push_back(entry.record);
  return out;
}

std::vector<WorkflowMatch> Repository::retrieve_workflows(std::string_view query,
                                                          std::size_t k) const {
  if (k < 1)
    throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  const EmbeddingVector q = embed(query, *provider_);
  std::vector<WorkflowMatch> hits;
  {
    std::shared_lock lock(mu_);
    for (const auto &[id, entry] : workflows_)
      hits.push_back({id, dot(q, entry.vector)});
  }
  std::sort(hits.begin(), hits.end(), [](const WorkflowMatch &a, const WorkflowMatch &b) {
    return ranks_before(a.score, a.workflow_id, b.score, b.workflow_id);
  });
  if (hits.size() > k)
    hits.resize(k);
  return hits;
}

RepositoryStats Repository::stats() const {
  std::shared_lock lock(mu_);
  RepositoryStats s;
  s.workflow_count = workflows_.size();
  s.segment_count = segments_.size();
  for (const auto &[id, entry] : segments_)
    s.synthetic_count += entry.segment.synthetic ? 1 : 0;
  return s;
}

std::vector<std::pair<std::string, EmbeddingVector>> Repository::segment_vectors() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<std::string, EmbeddingVector>> out;
  for (const auto &[id, entry] : segments_)
    out.emplace_back(id, entry.vector);
  return out;
}

} // namespace flowforge
