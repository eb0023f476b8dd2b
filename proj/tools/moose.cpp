// moose: run the benchmark compositions over a dataset, or serve the HTTP API.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "moose/api/server.hpp"
#include "moose/api/store.hpp"
#include "moose/eval/pipeline.hpp"
#include "moose/eval/report.hpp"
#include "moose/explore/corpus_io.hpp"

namespace fs = std::filesystem;
using namespace moose;

namespace {

struct EvalArgs {
  std::string dataset;
  std::string corpus;
  std::string pipeline = "all";
  std::string backend = "live";
  std::string out = "moose-eval";
  unsigned workers = 1;
  std::int64_t seed = 0;
  std::size_t beam = 3;
  std::size_t explore_rounds = 2;
  std::size_t patience = 2;
  std::size_t proposals = 2;
  std::string oracle = "deterministic";
};

// A scripted backend file is replayed from the start for every run, so runs stay independent.
llm::BackendFactory backend_factory(const std::string& spec) {
  if (spec == "live") {
    auto cfg = llm::OpenAiBackend::config_from_env();
    if (!cfg) throw Error(Errc::InvalidConfig, "live backend needs MOOSE_API_KEY and MOOSE_MODEL");
    if (cfg->base_url.empty()) cfg->base_url = "https://api.openai.com/v1";
    return [c = *cfg] { return std::make_shared<llm::OpenAiBackend>(c); };
  }
  if (spec.rfind("scripted:", 0) == 0) {
    auto entries = llm::ScriptedBackend::load(spec.substr(9));
    return [entries] { return std::make_shared<llm::ScriptedBackend>(entries); };
  }
  throw Error(Errc::InvalidConfig, "--backend must be live or scripted:<path>");
}

int run_eval(const EvalArgs& a) {
  const auto entries = eval::load_dataset(a.dataset);
  const auto corpus = explore::load_corpus(a.corpus);
  std::vector<eval::PipelineSpec> specs;
  if (a.pipeline == "all") {
    for (const auto& row : eval::benchmark_pipelines()) specs.push_back(row.spec);
  } else {
    specs.push_back(eval::find_pipeline(a.pipeline).spec);
  }
  const auto factory = backend_factory(a.backend);
  const bool logical_time = a.backend != "live";

  eval::PipelineConfigs configs;
  configs.explore.beam_width = a.beam;
  configs.explore.max_rounds = a.explore_rounds;
  configs.refine.patience = a.patience;
  configs.refine.proposals_per_step = a.proposals;
  configs.explore.validate();
  configs.refine.validate();
  if (a.oracle == "llm")
    configs.oracle_mode = eval::OracleMode::Llm;
  else if (a.oracle != "deterministic")
    throw Error(Errc::InvalidConfig, "--oracle must be deterministic or llm");

  struct Job {
    const eval::PipelineSpec* spec;
    const eval::GroundTruthEntry* entry;
  };
  std::vector<Job> jobs;
  for (const auto& s : specs)
    for (const auto& e : entries) jobs.push_back({&s, &e});

  fs::create_directories(fs::path(a.out) / "sessions");
  std::vector<eval::RunReport> reports(jobs.size());
  std::vector<std::string> leak_failures;
  std::mutex leak_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      std::shared_ptr<Clock> clock;
      if (logical_time)
        clock = std::make_shared<LogicalClock>(1'700'000'000'000 + a.seed * 1'000'000);
      else
        clock = std::make_shared<SystemClock>();
      IdGenerator ids(clock);
      llm::LlmGateway gateway(factory());
      auto result = eval::run_pipeline(*job.spec, *job.entry, corpus, configs, gateway, ids);
      for (const auto& fb : result.feedback)
        if (auto leak = eval::leak_check(fb, *job.entry); !leak.pass) {
          std::lock_guard lock(leak_mu);
          leak_failures.push_back(job.spec->name + "/" + job.entry->id + ": '" + leak.span + "'");
        }
      if (result.session)
        api::write_atomic(fs::path(a.out) / "sessions" / (job.spec->name + "__" + job.entry->id + ".json"),
                          protocol::export_bytes(*result.session));
      reports[i] = std::move(result.report);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::max(1u, a.workers); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string lines;
  std::size_t incomplete = 0;
  for (const auto& r : reports) {
    lines += Json(r).dump() + "\n";
    if (!r.complete) {
      ++incomplete;
      std::cerr << "incomplete: " << r.pipeline << "/" << r.entry_id << ": " << r.error << "\n";
    }
  }
  api::write_atomic(fs::path(a.out) / "reports.jsonl", lines);
  const auto rows = eval::aggregate(reports);
  const auto table = eval::render_table(rows);
  api::write_atomic(fs::path(a.out) / "summary.txt", table);
  api::write_atomic(fs::path(a.out) / "summary.json", eval::summary_json(rows).dump(2) + "\n");
  std::cout << table;

  for (const auto& f : leak_failures) std::cerr << "feedback disclosed ground truth: " << f << "\n";
  return incomplete == 0 && leak_failures.empty() ? 0 : 1;
}

int run_serve(const std::string& data_dir, const std::string& listen, const std::string& static_dir) {
  auto opts = api::ServiceOptions::from_env();
  if (!data_dir.empty()) opts.data_dir = data_dir;
  if (!static_dir.empty()) opts.static_dir = static_dir;
  if (!listen.empty()) ::setenv("MOOSE_LISTEN_ADDR", listen.c_str(), 1);
  const auto [host, port] = api::listen_addr_from_env();
  api::Service service(std::move(opts));
  std::cerr << "listening on " << host << ":" << port << "\n";
  return service.listen(host, port) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moose: interactive hypothesis discovery"};
  app.require_subcommand(1);

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Run pipeline compositions against a ground-truth dataset");
  eval_cmd->add_option("--dataset", ea.dataset, "Line-delimited ground-truth entries")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", ea.corpus, "Line-delimited inspiration corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pipeline", ea.pipeline, "Pipeline name, or 'all'");
  eval_cmd->add_option("--backend", ea.backend, "live | scripted:<path>");
  eval_cmd->add_option("--out", ea.out, "Output directory");
  eval_cmd->add_option("--workers", ea.workers, "Entries run in parallel")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ea.seed, "Logical-clock seed for scripted runs");
  eval_cmd->add_option("--beam", ea.beam, "Inspirations per exploration round");
  eval_cmd->add_option("--explore-rounds", ea.explore_rounds, "Exploration rounds per MC block");
  eval_cmd->add_option("--patience", ea.patience, "Non-improving refinement steps before a level converges");
  eval_cmd->add_option("--proposals", ea.proposals, "Refinement proposals per step");
  eval_cmd->add_option("--oracle", ea.oracle, "Oracle ranking mode: deterministic | llm");

  std::string data_dir, listen, static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API (MOOSE_LISTEN_ADDR, MOOSE_DATA_DIR)");
  serve_cmd->add_option("--data-dir", data_dir, "Overrides MOOSE_DATA_DIR");
  serve_cmd->add_option("--listen", listen, "host:port, overrides MOOSE_LISTEN_ADDR");
  serve_cmd->add_option("--static", static_dir, "Directory served at /");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*eval_cmd) return run_eval(ea);
    return run_serve(data_dir, listen, static_dir);
  } catch (const Error& e) {
    std::cerr << "moose: " << e.what() << "\n";
    return 2;
  }
}
