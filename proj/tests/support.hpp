#pragma once

#include "flowforge/error.hpp"
#include "flowforge/ir.hpp"
#include "flowforge/n8n.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using flowforge::EdgeSpec;
using flowforge::NodeRole;
using flowforge::NodeSpec;
using flowforge::WorkflowGraph;

inline std::filesystem::path corpus_dir() { return FLOWFORGE_CORPUS_DIR; }

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(corpus_dir())) {
    const auto ext = e.path().extension();
    if (ext == ".json" || ext == ".yaml" || ext == ".yml")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline std::vector<WorkflowGraph> corpus_graphs() {
  std::vector<WorkflowGraph> out;
  for (const auto &f : corpus_files())
    out.push_back(flowforge::parse_n8n(flowforge::SourceDocument::from_file(f)).graph);
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("flowforge-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

inline flowforge::ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const flowforge::Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return flowforge::ErrorCode::InvalidArgument;
}

inline NodeSpec node(const std::string &id, const std::string &ntype,
                     NodeRole role = NodeRole::Function) {
  NodeSpec n;
  n.node_id = id;
  n.name = id;
  n.ntype = ntype;
  n.role = role;
  auto io = flowforge::infer_node_io(ntype, role == NodeRole::Trigger);
  n.inputs = io.inputs;
  n.outputs = io.outputs;
  n.raw_config = {{"typeVersion", 1}, {"parameters", nlohmann::json::object()}};
  return n;
}

inline EdgeSpec edge(const std::string &a, const std::string &b, std::size_t sp = 0,
                     std::size_t tp = 0) {
  return EdgeSpec{a, sp, b, tp};
}

inline WorkflowGraph graph(std::vector<NodeSpec> nodes, std::vector<EdgeSpec> edges) {
  WorkflowGraph g;
  g.workflow_id = "test";
  g.name = "test";
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  return g;
}

inline const std::vector<std::string> &sample_types() {
  static const std::vector<std::string> types{
      "n8n-nodes-base.httpRequest", "n8n-nodes-base.code",     "n8n-nodes-base.set",
      "n8n-nodes-base.slack",       "n8n-nodes-base.readPDF",  "n8n-nodes-base.googleSheets",
      "n8n-nodes-base.openAi",      "n8n-nodes-base.merge",    "n8n-nodes-base.if",
      "n8n-nodes-base.noOp",        "custom.unknownThing",     "n8n-nodes-base.postgres"};
  return types;
}

// Random DAG: edges only from lower to higher index, optional trigger at 0,
// random ports within a small range.
inline WorkflowGraph random_dag(std::mt19937 &rng, std::size_t n, double density = 0.25,
                                bool with_trigger = true) {
  std::uniform_int_distribution<std::size_t> pick_type(0, sample_types().size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> port(0, 1);
  std::vector<NodeSpec> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    const bool trig = with_trigger && i == 0;
    nodes.push_back(node("n" + std::to_string(i),
                         trig ? "n8n-nodes-base.manualTrigger" : sample_types()[pick_type(rng)],
                         trig ? NodeRole::Trigger : NodeRole::Function));
  }
  std::vector<EdgeSpec> edges;
  for (std::size_t j = 1; j < n; ++j) {
    // Keep the graph mostly connected: one guaranteed predecessor.
    std::uniform_int_distribution<std::size_t> pred(0, j - 1);
    edges.push_back(edge(nodes[pred(rng)].node_id, nodes[j].node_id, port(rng), port(rng)));
    for (std::size_t i = 0; i < j; ++i) {
      if (coin(rng) < density / static_cast<double>(j)) {
        EdgeSpec e = edge(nodes[i].node_id, nodes[j].node_id, port(rng), port(rng));
        if (std::find(edges.begin(), edges.end(), e) == edges.end())
          edges.push_back(e);
      }
    }
  }
  return graph(std::move(nodes), std::move(edges));
}

} // namespace testing_support
