#include "flowforge/cli.hpp"

#include "flowforge/construction.hpp"
#include "flowforge/error.hpp"
#include "flowforge/eval.hpp"
#include "flowforge/ingest.hpp"
#include "flowforge/json_io.hpp"
#include "flowforge/n8n.hpp"
#include "flowforge/service.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>

namespace flowforge {

using json = nlohmann::json;

namespace {

struct GlobalFlags {
  std::string config_file;
  std::string data_dir;
  std::string listen_addr;
  std::string llm_endpoint;
  std::string llm_api_key;
  std::string embed_provider;
  std::size_t max_inflight{0};
};

void write_file(const std::string &path, const std::string &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << bytes))
    throw Error(ErrorCode::StorageFailure, "cannot write " + path);
}

std::string score_text(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << s;
  return os.str();
}

} // namespace

int run_cli(int argc, const char *const *argv, const CliContext &ctx) {
  CLI::App app{"Workflow segment extraction, retrieval and construction engine", "flowforge"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "flowforge 0.1.0");

  GlobalFlags g;
  app.add_option("--config", g.config_file, "JSON config file");
  app.add_option("--data-dir", g.data_dir, "Repository directory");
  app.add_option("--listen", g.listen_addr, "host:port for serve");
  app.add_option("--llm-endpoint", g.llm_endpoint, "Model endpoint URL");
  app.add_option("--llm-api-key", g.llm_api_key, "Model endpoint key");
  app.add_option("--embed-provider", g.embed_provider, "deterministic or remote")
      ->check(CLI::IsMember({"deterministic", "remote"}));
  app.add_option("--max-inflight", g.max_inflight, "Concurrent model calls")
      ->check(CLI::PositiveNumber);

  auto *ingest = app.add_subcommand("ingest", "Store workflow documents and their segments");
  std::vector<std::string> files;
  bool no_extract = false;
  ingest->add_option("files", files, "n8n documents (.json, .yml, .yaml)")->required();
  ingest->add_flag("--no-extract", no_extract, "Store workflows without extracting segments");

  auto *decompose = app.add_subcommand("decompose", "Show the segments of a stored workflow");
  std::string workflow_id;
  decompose->add_option("workflow_id", workflow_id)->required();

  auto *segments = app.add_subcommand("segments", "Inspect stored segments");
  segments->require_subcommand(1);
  auto *seg_list = segments->add_subcommand("list", "List segments");
  auto *seg_show = segments->add_subcommand("show", "Print one segment");
  std::string segment_id;
  seg_show->add_option("segment_id", segment_id)->required();

  std::optional<std::size_t> k;
  std::optional<double> theta;
  auto *query = app.add_subcommand("query", "Rank stored segments against a text");
  std::string query_text;
  query->add_option("text", query_text)->required();
  query->add_option("--k", k, "Maximum matches")->check(CLI::PositiveNumber);
  query->add_option("--theta", theta, "Score threshold")->check(CLI::Range(0.0, 1.0));

  auto *construct_cmd = app.add_subcommand("construct", "Build a workflow from a requirement");
  std::string requirement, out_file;
  construct_cmd->add_option("requirement", requirement)->required();
  construct_cmd->add_option("--out", out_file, "Write the deployable document here");
  construct_cmd->add_option("--k", k, "Maximum matches")->check(CLI::PositiveNumber);
  construct_cmd->add_option("--theta", theta, "Score threshold")->check(CLI::Range(0.0, 1.0));

  auto *export_cmd = app.add_subcommand("export", "Emit a stored workflow for a platform");
  std::string platform = "n8n";
  export_cmd->add_option("workflow_id", workflow_id)->required();
  export_cmd->add_option("--platform", platform, "Target platform")->required();
  export_cmd->add_option("--out", out_file, "Write the document here");

  auto *eval = app.add_subcommand("eval", "Run the evaluation harness over a corpus");
  std::string corpus_dir, report_file;
  bool isolated = false;
  eval->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  eval->add_option("--report", report_file, "Write the JSON report here");
  eval->add_flag("--isolated", isolated, "Seed a separate repository per workflow");

  auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, ctx.out, ctx.err);
    return kExitOk;
  } catch (const CLI::CallForVersion &e) {
    app.exit(e, ctx.out, ctx.err);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    app.exit(e, ctx.out, ctx.err);
    return kExitUsage;
  }

  try {
    ServiceConfig cfg = load_config(
        g.config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(g.config_file),
        ctx.env ? ctx.env : process_env());
    if (!g.data_dir.empty())
      cfg.data_dir = g.data_dir;
    if (!g.listen_addr.empty())
      cfg.listen_addr = g.listen_addr;
    if (!g.llm_endpoint.empty())
      cfg.llm_endpoint = g.llm_endpoint;
    if (!g.llm_api_key.empty())
      cfg.llm_api_key = g.llm_api_key;
    if (!g.embed_provider.empty())
      cfg.embed_provider = g.embed_provider == "remote" ? EmbedProviderKind::Remote
                                                        : EmbedProviderKind::Deterministic;
    if (g.max_inflight > 0)
      cfg.max_inflight_llm = g.max_inflight;
    if (k)
      cfg.retrieval.k = *k;
    if (theta)
      cfg.retrieval.theta = *theta;
    cfg.validate();

    if (*eval) {
      const auto corpus = load_corpus(corpus_dir);
      EvalOptions opts;
      opts.isolated_seeding = isolated;
      opts.max_inflight = cfg.max_inflight_llm;
      opts.retrieval = cfg.retrieval;
      const EvalReport x = eval_extraction(corpus);
      const EvalReport ra = eval_construction(corpus, Strategy::RetrievalAugmented, opts);
      const EvalReport zs = eval_construction(corpus, Strategy::ZeroShotGenerative, opts);
      ctx.out << render_table(x, ra) << '\n';
      for (const EvalReport *r : {&ra, &zs})
        ctx.out << to_string(*r->strategy) << ": mean node_type_f1 "
                << score_text(r->mean_node_type_f1()) << ", mean edge_f1 "
                << score_text(r->mean_edge_f1()) << ", exact_match " << r->exact_match_count()
                << "/" << r->construction.size() << '\n';
      ctx.out << "extraction: mean node_coverage " << score_text(x.mean_node_coverage())
              << ", reconstructible " << x.reconstructible_count() << "/" << x.extraction.size()
              << '\n';
      if (!report_file.empty()) {
        const json report{{"extraction", x},
                          {"construction", {{"retrieval_augmented", ra},
                                            {"zero_shot_generative", zs}}}};
        write_file(report_file, report.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (*serve_cmd) {
      serve(
          cfg,
          [&](std::uint16_t port) {
            ctx.out << "listening on " << cfg.listen().host << ":" << port << std::endl;
          },
          [&] { return ctx.stop && ctx.stop->load(); });
      return kExitOk;
    }

    Engine engine = make_engine(cfg);
    Repository &repo = *engine.repository;

    if (*ingest) {
      for (const auto &f : files) {
        const IngestOutcome o = ingest_document(repo, SourceDocument::from_file(f),
                                                *engine.annotator, cfg.max_inflight_llm,
                                                !no_extract);
        for (const auto &w : o.warnings)
          ctx.err << f << ": warning: " << w << '\n';
        ctx.out << o.workflow_id << ' ' << (o.already_present ? "already_present" : "created")
                << ' ' << o.segment_ids.size() << " segments " << f << '\n';
      }
    } else if (*decompose) {
      const WorkflowRecord r = repo.fetch_workflow(workflow_id);
      const Decomposition d =
          annotate(decompose_structural(r.graph), *engine.annotator, cfg.max_inflight_llm);
      ctx.out << json{{"decomposition", d}, {"report", validate_decomposition(r.graph, d)}}.dump(2)
              << '\n';
    } else if (*seg_list) {
      for (const auto &s : repo.list_segments())
        ctx.out << s.graph.segment_id << ' ' << s.description.segment_name << '\n';
    } else if (*seg_show) {
      ctx.out << json(repo.fetch_segment(segment_id)).dump(2) << '\n';
    } else if (*query) {
      for (const auto &m : repo.retrieve(query_text, cfg.retrieval))
        ctx.out << score_text(m.score) << ' ' << m.segment_id << ' '
                << repo.fetch_segment(m.segment_id).description.segment_name << '\n';
    } else if (*construct_cmd) {
      const ConstructionResult r = construct(requirement, repo, engine.construct_options(),
                                             *engine.analyzer, *engine.generator);
      if (out_file.empty()) {
        ctx.out << r.deploy_doc.bytes;
      } else {
        write_file(out_file, r.deploy_doc.bytes);
        for (const auto &u : r.resolutions) {
          ctx.out << "unit " << u.unit_id << ' ' << to_string(u.route) << ' ';
          ctx.out << (u.score ? score_text(*u.score) : std::string("-")) << ' '
                  << u.segment.graph.segment_id << '\n';
        }
        ctx.out << "wrote " << out_file << '\n';
      }
    } else if (*export_cmd) {
      const WorkflowRecord r = repo.fetch_workflow(workflow_id);
      const AdaptedWorkflow a = adapt_platform(r.graph, platform);
      if (out_file.empty())
        ctx.out << a.document.bytes;
      else
        write_file(out_file, a.document.bytes);
    }
    return kExitOk;
  } catch (const Error &e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception &e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
}

} // namespace flowforge
