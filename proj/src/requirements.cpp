#include "flowforge/requirements.hpp"

#include "flowforge/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace flowforge {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b]))
    ++b;
  while (e > b && is_space(s[e - 1]))
    --e;
  return std::string(s.substr(b, e - b));
}

bool at_line_start(std::string_view t, std::size_t i) {
  while (i > 0) {
    const char c = t[i - 1];
    if (c == '\n')
      return true;
    if (!is_space(c))
      return false;
    --i;
  }
  return true;
}

bool boundary_after(std::string_view t, std::size_t j) { return j >= t.size() || is_space(t[j]); }

// Length of a unit marker starting at i, or 0. Markers: bullet lines
// ("- ", "* ", "+ ", "• "), "Step N", "Step N:", "step:", "N." and "N)".
std::size_t marker_length(std::string_view t, std::size_t i) {
  if (i > 0 && !is_space(t[i - 1]))
    return 0;
  if (at_line_start(t, i)) {
    if ((t[i] == '-' || t[i] == '*' || t[i] == '+') && boundary_after(t, i + 1))
      return 1;
    if (t.substr(i, 3) == "\xE2\x80\xA2" && boundary_after(t, i + 3))
      return 3;
  }
  if (t.size() - i >= 4) {
    std::string word(t.substr(i, 4));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (word == "step") {
      std::size_t j = i + 4;
      while (j < t.size() && t[j] == ' ')
        ++j;
      if (j < t.size() && is_digit(t[j])) {
        while (j < t.size() && is_digit(t[j]))
          ++j;
        if (j < t.size() && (t[j] == ':' || t[j] == '.' || t[j] == ')' || t[j] == '-'))
          ++j;
        if (boundary_after(t, j))
          return j - i;
      } else if (j < t.size() && t[j] == ':') {
        return j + 1 - i;
      }
    }
  }
  if (is_digit(t[i])) {
    std::size_t j = i;
    while (j < t.size() && is_digit(t[j]))
      ++j;
    if (j < t.size() && (t[j] == '.' || t[j] == ')') && boundary_after(t, j + 1))
      return j + 1 - i;
  }
  return 0;
}

std::vector<std::string> split_at(std::string_view t, const std::vector<std::size_t> &cuts) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string piece = trim(t.substr(start, end - start));
    if (!piece.empty())
      pieces.push_back(std::move(piece));
    start = end;
  };
  for (std::size_t c : cuts)
    emit(c);
  emit(t.size());
  return pieces;
}

} // namespace

std::vector<std::string> split_requirement(std::string_view text) {
  std::vector<std::size_t> markers;
  for (std::size_t i = 0; i < text.size();) {
    if (const std::size_t len = marker_length(text, i); len > 0) {
      if (i > 0)
        markers.push_back(i);
      i += len;
    } else {
      ++i;
    }
  }
  // A marker at offset 0 still counts as structure even though it cuts
  // nothing off.
  const bool structured = !markers.empty() || (!text.empty() && marker_length(text, 0) > 0);
  if (structured)
    return split_at(text, markers);

  std::vector<std::size_t> sentences;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '.' && text[i] != '!' && text[i] != '?')
      continue;
    std::size_t j = i;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?'))
      ++j;
    if (boundary_after(text, j) && j < text.size())
      sentences.push_back(j);
    i = j - 1;
  }
  return split_at(text, sentences);
}

std::string unit_title(std::string_view description) {
  std::istringstream words{std::string(description)};
  std::string word, title;
  for (int n = 0; n < 6 && words >> word; ++n) {
    if (!title.empty())
      title += ' ';
    title += word;
  }
  return title;
}

std::vector<UnitDraft> StubAnalyzer::analyze(std::string_view requirement,
                                             const std::vector<ContextWorkflow> &) {
  std::vector<UnitDraft> drafts;
  for (auto &piece : split_requirement(requirement)) {
    UnitDraft d;
    d.title = unit_title(piece);
    d.description = std::move(piece);
    drafts.push_back(std::move(d));
  }
  return drafts;
}

TaskPlan analyze_requirement(std::string_view text, const Repository &repo,
                             const RetrievalConfig &cfg, RequirementAnalyzer &analyzer) {
  if (trim(text).empty())
    throw Error(ErrorCode::EmptyRequirement, "requirement is empty");
  cfg.validate();

  TaskPlan plan;
  plan.requirement_text = std::string(text);
  std::vector<ContextWorkflow> context;
  for (const auto &match : repo.retrieve_workflows(text, cfg.k)) {
    plan.context_workflow_ids.push_back(match.workflow_id);
    const auto record = repo.find_workflow(match.workflow_id);
    if (!record)
      continue;
    ContextWorkflow c{record->graph.name, record->graph.description, {}};
    for (const auto &sid : record->segment_ids) {
      try {
        c.segment_titles.push_back(repo.fetch_segment(sid).description.segment_name);
      } catch (const Error &) {
        // segment removed since ingest
      }
    }
    context.push_back(std::move(c));
  }

  const std::vector<UnitDraft> drafts = analyzer.analyze(text, context);
  if (drafts.empty())
    throw Error(ErrorCode::AnalyzerViolation, "analyzer produced no units");
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const std::size_t id = i + 1;
    FunctionalUnit u;
    u.unit_id = id;
    u.description = drafts[i].description;
    if (trim(u.description).empty())
      throw Error(ErrorCode::AnalyzerViolation,
                  "unit " + std::to_string(id) + " has an empty description");
    u.title = trim(drafts[i].title).empty() ? unit_title(u.description) : drafts[i].title;
    if (drafts[i].depends_on) {
      std::set<std::size_t> deps;
      for (std::size_t d : *drafts[i].depends_on) {
        if (d < 1 || d >= id)
          throw Error(ErrorCode::AnalyzerViolation,
                      "unit " + std::to_string(id) + " depends on unit " + std::to_string(d) +
                          ", which is not an earlier unit");
        deps.insert(d);
      }
      u.depends_on.assign(deps.begin(), deps.end());
    } else if (id > 1) {
      u.depends_on = {id - 1};
    }
    plan.units.push_back(std::move(u));
  }
  return plan;
}

} // namespace flowforge
