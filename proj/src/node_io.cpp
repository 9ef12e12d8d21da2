#include "flowforge/n8n.hpp"

#include <algorithm>
#include <cctype>

namespace flowforge {

namespace {

struct IoRule {
  std::string_view prefix;
  NodeIo io;
};

ParamSpec p(std::string name, ParamType t, bool required = false) {
  return ParamSpec{std::move(name), t, required};
}

const std::vector<IoRule> &io_rules() {
  using T = ParamType;
  static const std::vector<IoRule> rules = {
      // triggers
      {"n8n-nodes-base.manualTrigger", {{}, {p("main", T::Json)}}},
      {"n8n-nodes-base.start", {{}, {p("main", T::Json)}}},
      {"n8n-nodes-base.webhook", {{}, {p("body", T::Json), p("headers", T::Json), p("query", T::Json)}}},
      {"n8n-nodes-base.scheduleTrigger", {{}, {p("timestamp", T::String)}}},
      {"n8n-nodes-base.formTrigger", {{}, {p("formData", T::Json)}}},
      {"@n8n/n8n-nodes-langchain.chatTrigger", {{}, {p("chatInput", T::String), p("sessionId", T::String)}}},
      // transport and data shaping
      {"n8n-nodes-base.httpRequest", {{p("data", T::Json)}, {p("response", T::Json)}}},
      {"n8n-nodes-base.code", {{p("data", T::Json)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.function", {{p("data", T::Json)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.set", {{p("data", T::Json)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.if", {{p("data", T::Json, true)}, {p("matched", T::Json), p("unmatched", T::Json)}}},
      {"n8n-nodes-base.switch", {{p("data", T::Json, true)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.merge", {{p("input1", T::Json, true), p("input2", T::Json, true)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.splitInBatches", {{p("items", T::Json, true)}, {p("batch", T::Json), p("done", T::Json)}}},
      {"n8n-nodes-base.wait", {{p("data", T::Json)}, {p("data", T::Json)}}},
      {"n8n-nodes-base.noOp", {{p("main", T::Any)}, {p("main", T::Any)}}},
      // documents
      {"n8n-nodes-base.readPDF", {{p("file", T::Binary, true)}, {p("text", T::String)}}},
      {"n8n-nodes-base.extractFromFile", {{p("file", T::Binary, true)}, {p("text", T::String)}}},
      {"n8n-nodes-base.spreadsheetFile", {{p("file", T::Binary, true)}, {p("rows", T::Json)}}},
      {"n8n-nodes-base.html", {{p("html", T::String, true)}, {p("text", T::String)}}},
      {"n8n-nodes-base.markdown", {{p("text", T::String, true)}, {p("text", T::String)}}},
      // storage
      {"n8n-nodes-base.googleSheets", {{p("rows", T::Json)}, {p("rows", T::Json)}}},
      {"n8n-nodes-base.postgres", {{p("query", T::String)}, {p("rows", T::Json)}}},
      // messaging
      {"n8n-nodes-base.slack", {{p("text", T::String, true)}, {p("message", T::Json)}}},
      {"n8n-nodes-base.telegram", {{p("text", T::String, true)}, {p("message", T::Json)}}},
      {"n8n-nodes-base.emailSend", {{p("text", T::String, true)}, {p("message", T::Json)}}},
      {"n8n-nodes-base.gmail", {{p("text", T::String, true)}, {p("message", T::Json)}}},
      {"n8n-nodes-base.respondToWebhook", {{p("data", T::Json, true)}, {}}},
      // models
      {"n8n-nodes-base.openAi", {{p("prompt", T::String, true)}, {p("text", T::String)}}},
      {"@n8n/n8n-nodes-langchain.agent", {{p("chatInput", T::String, true)}, {p("output", T::String)}}},
      {"@n8n/n8n-nodes-langchain.openAi", {{p("prompt", T::String, true)}, {p("text", T::String)}}},
      // engine-owned
      {kConnectorType, {{p("main", T::Any)}, {p("main", T::Any)}}},
      {kPlaceholderType, {{p("main", T::Any)}, {p("main", T::Any)}}},
  };
  return rules;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

bool is_trigger_type(std::string_view ntype) {
  // Entry-point types whose names lack "trigger".
  static constexpr std::string_view kEntryTypes[] = {
      "n8n-nodes-base.start", "n8n-nodes-base.webhook", "n8n-nodes-base.cron",
      "n8n-nodes-base.interval"};
  return lower(ntype).find("trigger") != std::string::npos ||
         std::find(std::begin(kEntryTypes), std::end(kEntryTypes), ntype) != std::end(kEntryTypes);
}

NodeIo infer_node_io(std::string_view ntype, bool trigger) {
  const IoRule *best = nullptr;
  for (const auto &rule : io_rules()) {
    if (ntype.starts_with(rule.prefix) &&
        (best == nullptr || rule.prefix.size() > best->prefix.size()))
      best = &rule;
  }
  NodeIo io = best ? best->io
                   : NodeIo{{p("main", ParamType::Any)}, {p("main", ParamType::Any)}};
  if (trigger)
    io.inputs.clear();
  return io;
}

NodeIo infer_node_io(const nlohmann::json &n8n_node) {
  const std::string ntype = n8n_node.value("type", "");
  return infer_node_io(ntype, is_trigger_type(ntype));
}

} // namespace flowforge
