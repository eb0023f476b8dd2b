#include "moose/api/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "moose/api/event_bus.hpp"
#include "moose/api/store.hpp"
#include "moose/explore/corpus_io.hpp"
#include "moose/protocol/session.hpp"

namespace moose::api {

namespace {

constexpr const char* kJson = "application/json";

int status_for(Errc code) {
  switch (code) {
    case Errc::NotFound:
    case Errc::UnknownNode: return 404;
    case Errc::SessionBusy: return 409;
    case Errc::BackendUnavailable:
    case Errc::ScriptExhausted: return 503;
    case Errc::CorruptSession:
    case Errc::Io: return 500;
    default: return 400;
  }
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, const Error& e) {
  Json body{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const explore::CorpusParseError*>(&e)) body["line"] = pe->line();
  reply(res, status_for(e.code()), body);
}

Json parse_body(const httplib::Request& req) {
  try {
    auto j = Json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "request body must be a JSON object");
    return j;
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("request body is not JSON: ") + e.what());
  }
}

std::optional<std::string> optional_text(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  if (!body.at(key).is_string()) throw Error(Errc::InvalidConfig, std::string(key) + " must be a string");
  return body.at(key).get<std::string>();
}

struct Live {
  std::mutex mu;
  protocol::SessionState state;
  std::shared_ptr<const InspirationCorpus> corpus;
  std::shared_ptr<llm::LlmGateway> gateway;  // null when no backend is configured
  bool busy = false;
  std::map<std::pair<std::size_t, std::string>, std::string> ranking_cache;
};

Json summary(const protocol::SessionState& s) {
  const auto& events = s.events();
  return Json{{"session_id", s.id()},
              {"question", s.base_context().question},
              {"node_count", s.tree().size()},
              {"active", s.tree().active()},
              {"stage_of_active", s.stage_of_active()},
              {"created", events.empty() ? 0 : events.front().timestamp},
              {"updated", events.empty() ? 0 : events.back().timestamp}};
}

Json tree_document(const protocol::SessionState& s) {
  Json doc = export_tree(s.tree());
  Json edges = Json::array();
  for (const auto& [id, node] : s.tree().nodes()) {
    if (!node.parent) continue;
    Json e{{"from", *node.parent}, {"to", id}};
    if (node.inspiration_used) e["inspiration"] = *node.inspiration_used;
    edges.push_back(std::move(e));
  }
  Json stages = Json::object();
  for (const auto& [id, node] : s.tree().nodes()) stages[id.value] = s.effective_stage(id);
  doc["session_id"] = s.id();
  doc["edges"] = std::move(edges);
  doc["effective_stage"] = std::move(stages);
  doc["stage_of_active"] = s.stage_of_active();
  return doc;
}

Json ranked_json(const protocol::RankedEntry& r) {
  Json j{{"node", r.node}};
  if (r.scores) {
    j["scores"] = *r.scores;
    j["average"] = r.scores->average;
  } else {
    j["scores"] = nullptr;
    j["average"] = nullptr;
    j["error"] = r.error;
  }
  return j;
}

}  // namespace

ServiceOptions ServiceOptions::from_env() {
  ServiceOptions o;
  if (const char* dir = std::getenv("MOOSE_DATA_DIR"); dir && *dir) o.data_dir = dir;
  return o;
}

std::pair<std::string, int> listen_addr_from_env() {
  std::string addr = "127.0.0.1:8080";
  if (const char* v = std::getenv("MOOSE_LISTEN_ADDR"); v && *v) addr = v;
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidConfig, "MOOSE_LISTEN_ADDR must be host:port");
  try {
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::InvalidConfig, "bad port in MOOSE_LISTEN_ADDR: " + addr);
  }
}

struct Service::Impl {
  ServiceOptions opts;
  Store store;
  IdGenerator ids;
  EventBus bus;
  httplib::Server http;
  std::thread server_thread;

  std::mutex mu;  // sessions, jobs
  std::map<SessionId, std::shared_ptr<Live>> sessions;
  std::vector<std::thread> jobs;
  std::size_t running = 0;
  std::condition_variable idle_cv;
  std::uint64_t job_seq = 0;

  explicit Impl(ServiceOptions o) : opts(std::move(o)), store(opts.data_dir), ids(opts.clock) {
    http.new_task_queue = [] { return new httplib::ThreadPool(32); };
    routes();
    if (opts.static_dir) http.set_mount_point("/", opts.static_dir->string());
  }

  // --- backends -------------------------------------------------------------------------------

  std::shared_ptr<llm::LlmGateway> make_gateway(std::shared_ptr<llm::Backend> backend) const {
    if (!backend) return nullptr;
    return std::make_shared<llm::LlmGateway>(std::move(backend), llm::TemplateSet::builtin(), opts.gateway);
  }

  std::shared_ptr<llm::Backend> default_backend() const {
    if (opts.default_backend) return opts.default_backend();
    if (auto cfg = llm::OpenAiBackend::config_from_env()) return std::make_shared<llm::OpenAiBackend>(*cfg);
    return nullptr;
  }

  // {"backend": "scripted", "script": [{template, text}...] | "jsonl"} or
  // {"backend": "live", "api_key", "base_url"?, "model"}.
  std::shared_ptr<llm::Backend> backend_from(const Json& cfg) const {
    if (!cfg.is_object()) throw Error(Errc::InvalidConfig, "llm_config must be an object");
    const auto kind = cfg.value("backend", std::string("live"));
    if (kind == "scripted") {
      const auto& script = cfg.at("script");
      std::string jsonl;
      if (script.is_string()) {
        jsonl = script.get<std::string>();
      } else {
        for (const auto& e : script) jsonl += e.dump() + "\n";
      }
      return std::make_shared<llm::ScriptedBackend>(llm::ScriptedBackend::parse(jsonl));
    }
    if (kind == "live") {
      llm::OpenAiBackend::Config c;
      if (auto env = llm::OpenAiBackend::config_from_env()) c = *env;
      if (c.base_url.empty()) c.base_url = "https://api.openai.com/v1";
      c.api_key = cfg.value("api_key", c.api_key);
      c.base_url = cfg.value("base_url", c.base_url);
      c.model = cfg.value("model", c.model);
      if (c.api_key.empty() || c.model.empty())
        throw Error(Errc::InvalidConfig, "live llm_config needs api_key and model");
      return std::make_shared<llm::OpenAiBackend>(c);
    }
    throw Error(Errc::InvalidConfig, "unknown backend '" + kind + "'");
  }

  // --- sessions -------------------------------------------------------------------------------

  std::shared_ptr<Live> get(const std::string& raw) {
    const SessionId id(raw);
    std::lock_guard lock(mu);
    if (auto it = sessions.find(id); it != sessions.end()) return it->second;
    auto live = std::make_shared<Live>();
    live->state = store.load(id);
    live->corpus = std::make_shared<const InspirationCorpus>(store.corpus(live->state.corpus_ref()));
    live->gateway = make_gateway(default_backend());
    for (const auto& e : live->state.events()) ids.observe(e.id.value);
    for (const auto& [nid, node] : live->state.tree().nodes()) ids.observe(nid.value);
    ids.observe(id.value);
    sessions.emplace(id, live);
    return live;
  }

  // --- jobs -----------------------------------------------------------------------------------

  void run_job(std::shared_ptr<Live> live, protocol::SessionState snapshot, NodeId node, Stage target,
               std::string job_id) {
    const SessionId sid = snapshot.id();
    bus.publish(sid, ProgressKind::GenerationStarted,
                Json{{"job_id", job_id}, {"node", node}, {"next", target == Stage::Exploratory ? "Explore" : "Refine"}});
    std::optional<Error> failure;
    protocol::SessionState next = snapshot;
    try {
      if (target == Stage::Exploratory) {
        next = protocol::explore(snapshot, *live->gateway, *live->corpus, opts.explore, ids, node).session;
      } else {
        auto step = protocol::refine(snapshot, *live->gateway, opts.refine, ids, node, live->corpus.get());
        next = std::move(step.session);
        failure = std::move(step.error);
      }
    } catch (const Error& e) {
      failure = e;
    } catch (const std::exception& e) {
      failure = Error(Errc::BackendUnavailable, e.what());
    }

    std::vector<NodeId> added;
    for (const auto& [id, n] : next.tree().nodes())
      if (!snapshot.tree().contains(id)) added.push_back(id);
    std::optional<std::string> save_error;
    {
      std::lock_guard lock(live->mu);
      live->state = next;
      try {
        store.save(next);
      } catch (const Error& e) {
        save_error = e.what();
      }
    }
    for (const auto& id : added) bus.publish(sid, ProgressKind::NodeAdded, Json{{"job_id", job_id}, {"node", next.tree().node(id)}});
    for (const auto& id : added)
      if (const auto& s = next.tree().node(id).scores)
        bus.publish(sid, ProgressKind::ScoreReady, Json{{"job_id", job_id}, {"node", id}, {"scores", *s}});
    {
      std::lock_guard lock(live->mu);
      live->busy = false;
    }
    if (failure || save_error) {
      Json payload{{"job_id", job_id}, {"message", failure ? failure->what() : *save_error}};
      payload["error"] = failure ? std::string(to_string(failure->code())) : "Io";
      bus.publish(sid, ProgressKind::Error, payload);
    } else {
      bus.publish(sid, ProgressKind::RunCompleted,
                  Json{{"job_id", job_id}, {"new_nodes", added}, {"active", next.tree().active()}});
    }
    {
      std::lock_guard lock(mu);
      --running;
    }
    idle_cv.notify_all();
  }

  // --- handlers -------------------------------------------------------------------------------

  void post_corpus(const httplib::Request& req, httplib::Response& res) {
    const auto id = store.put_corpus(req.body);
    const auto corpus = store.corpus(id);
    reply(res, 201, Json{{"corpus_id", id}, {"size", corpus.entries().size()}});
  }

  void post_session(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto question = optional_text(body, "question").value_or("");
    if (trim(question).empty()) throw Error(Errc::EmptyQuestion, "research question is blank");
    const auto corpus_id = optional_text(body, "corpus_id").value_or("");
    auto corpus = std::make_shared<const InspirationCorpus>(store.corpus(corpus_id));
    auto backend = body.contains("llm_config") && !body.at("llm_config").is_null() ? backend_from(body.at("llm_config"))
                                                                                     : default_backend();
    if (!backend) throw Error(Errc::InvalidConfig, "no llm_config given and no default backend configured");

    auto live = std::make_shared<Live>();
    live->state = protocol::init_session(question, optional_text(body, "survey"), optional_text(body, "blueprint"),
                                         *corpus, ids);
    live->corpus = std::move(corpus);
    live->gateway = make_gateway(std::move(backend));
    store.save(live->state);
    {
      std::lock_guard lock(mu);
      sessions.emplace(live->state.id(), live);
    }
    reply(res, 201, summary(live->state));
  }

  void list_sessions(httplib::Response& res) {
    Json out = Json::array();
    for (const auto& id : store.sessions()) {
      try {
        auto live = get(id.value);
        std::lock_guard lock(live->mu);
        out.push_back(summary(live->state));
      } catch (const Error&) {
        // corrupt or half-written files are not listed
      }
    }
    reply(res, 200, out);
  }

  void get_tree(const std::string& id, httplib::Response& res) {
    auto live = get(id);
    std::lock_guard lock(live->mu);
    reply(res, 200, tree_document(live->state));
  }

  void get_export(const std::string& id, httplib::Response& res) {
    auto live = get(id);
    std::lock_guard lock(live->mu);
    res.status = 200;
    res.set_content(protocol::export_bytes(live->state), kJson);
  }

  void get_ranking(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    const auto scope = req.has_param("scope") ? req.get_param_value("scope") : std::string("leaves");
    if (scope != "leaves" && scope != "all") throw Error(Errc::InvalidConfig, "scope must be leaves or all");
    auto live = get(id);

    protocol::SessionState snapshot;
    std::vector<NodeId> candidates;
    {
      std::lock_guard lock(live->mu);
      const auto key = std::make_pair(live->state.tree().size(), scope);
      if (auto it = live->ranking_cache.find(key); it != live->ranking_cache.end()) {
        res.status = 200;
        res.set_content(it->second, kJson);
        return;
      }
      if (live->busy) throw Error(Errc::SessionBusy, "a run is in flight for this session");
      snapshot = live->state;
      if (scope == "leaves") {
        candidates = snapshot.tree().leaves();
      } else {
        for (const auto& [nid, node] : snapshot.tree().nodes()) candidates.push_back(nid);
      }
      live->busy = true;
    }

    // Nodes that already carry scores are reused; only the rest go through self-ranking.
    std::vector<protocol::RankedEntry> ranking;
    std::vector<NodeId> unscored;
    for (const auto& c : candidates) {
      if (const auto& s = snapshot.tree().node(c).scores)
        ranking.push_back({c, *s, {}});
      else
        unscored.push_back(c);
    }
    protocol::SessionState next = snapshot;
    try {
      if (!unscored.empty()) {
        if (!live->gateway) throw Error(Errc::BackendUnavailable, "no scoring backend configured");
        auto step = protocol::self_rank(snapshot, *live->gateway, unscored, ids, opts.refine.criteria);
        next = std::move(step.session);
        ranking.insert(ranking.end(), step.ranking.begin(), step.ranking.end());
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(live->mu);
      live->busy = false;
      if (const auto* err = dynamic_cast<const Error*>(&e); err && status_for(err->code()) != 503) throw;
      throw Error(Errc::BackendUnavailable, std::string("scoring backend unavailable: ") + e.what());
    }
    std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
      if (a.scores.has_value() != b.scores.has_value()) return a.scores.has_value();
      if (a.scores && a.scores->average != b.scores->average) return a.scores->average > b.scores->average;
      return a.node < b.node;
    });
    Json entries = Json::array();
    for (const auto& r : ranking) entries.push_back(ranked_json(r));
    const auto bytes = Json{{"scope", scope}, {"ranking", entries}}.dump();

    std::lock_guard lock(live->mu);
    live->busy = false;
    if (!unscored.empty()) {
      live->state = next;
      store.save(next);
    }
    live->ranking_cache[{next.tree().size(), scope}] = bytes;
    res.status = 200;
    res.set_content(bytes, kJson);
  }

  void post_act(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto live = get(id);
    const auto body = parse_body(req);
    const auto node = NodeId(optional_text(body, "node").value_or(""));
    const auto next = optional_text(body, "next").value_or("");
    if (next != "Explore" && next != "Refine") throw Error(Errc::InvalidConfig, "next must be Explore or Refine");
    const Stage target = next == "Explore" ? Stage::Exploratory : Stage::FineGrained;
    const auto feedback = optional_text(body, "feedback");

    protocol::SessionState snapshot;
    std::string job_id;
    {
      std::lock_guard lock(live->mu);
      if (live->busy) throw Error(Errc::SessionBusy, "a run is in flight for this session");
      auto state = live->state;
      if (!state.tree().contains(node)) throw Error(Errc::UnknownNode, "no node " + node.value);
      if (!live->gateway) throw Error(Errc::BackendUnavailable, "no backend configured for this session");
      if (feedback) state = protocol::apply_feedback(state, node, *feedback, ids);
      if (state.effective_stage(node) != target) state = protocol::route(state, node, target, ids);
      store.save(state);
      live->state = state;
      live->busy = true;
      snapshot = std::move(state);
      std::lock_guard jobs_lock(mu);
      job_id = "job-" + std::to_string(++job_seq);
      ++running;
      jobs.emplace_back(&Impl::run_job, this, live, snapshot, node, target, job_id);
    }
    reply(res, 202, Json{{"job_id", job_id}, {"session_id", snapshot.id()}});
  }

  void get_events(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto live = get(id);
    const SessionId sid = live->state.id();
    auto cursor = std::make_shared<std::uint64_t>(bus.head(sid));
    if (req.has_param("from")) {
      *cursor = std::stoull(req.get_param_value("from"));
    } else if (req.has_header("Last-Event-ID")) {
      *cursor = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
    }
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, sid, cursor](std::size_t, httplib::DataSink& sink) {
      const auto events = bus.read(sid, *cursor, opts.stream_heartbeat);
      if (events.empty()) {
        if (bus.closed()) {
          sink.done();
          return true;
        }
        const std::string beat = ": keep-alive\n\n";
        return sink.write(beat.data(), beat.size());
      }
      for (const auto& e : events) {
        const auto frame = to_sse(e);
        if (!sink.write(frame.data(), frame.size())) return false;
        *cursor = e.seq + 1;
      }
      return true;
    });
  }

  // --- routing --------------------------------------------------------------------------------

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        reply_error(res, e);
      } catch (const Json::exception& e) {
        reply(res, 400, Json{{"error", "InvalidConfig"}, {"message", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, Json{{"error", "Internal"}, {"message", e.what()}});
      }
    };
  }

  void routes() {
    http.Post("/corpora", guarded([this](const auto& req, auto& res) { post_corpus(req, res); }));
    http.Post("/sessions", guarded([this](const auto& req, auto& res) { post_session(req, res); }));
    http.Get("/sessions", guarded([this](const auto&, auto& res) { list_sessions(res); }));
    http.Get(R"(/sessions/([^/]+)/tree)", guarded([this](const auto& req, auto& res) { get_tree(req.matches[1], res); }));
    http.Get(R"(/sessions/([^/]+)/ranking)",
             guarded([this](const auto& req, auto& res) { get_ranking(req.matches[1], req, res); }));
    http.Post(R"(/sessions/([^/]+)/act)",
              guarded([this](const auto& req, auto& res) { post_act(req.matches[1], req, res); }));
    http.Get(R"(/sessions/([^/]+)/events)",
             guarded([this](const auto& req, auto& res) { get_events(req.matches[1], req, res); }));
    http.Get(R"(/sessions/([^/]+)/export)",
             guarded([this](const auto& req, auto& res) { get_export(req.matches[1], res); }));
  }

  void join_jobs() {
    std::vector<std::thread> pending;
    {
      std::lock_guard lock(mu);
      pending.swap(jobs);
    }
    for (auto& t : pending)
      if (t.joinable()) t.join();
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

int Service::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->server_thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

bool Service::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

void Service::stop() {
  if (!impl_) return;
  wait_idle();
  impl_->bus.close();
  impl_->http.stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
  impl_->join_jobs();
}

void Service::wait_idle() {
  std::unique_lock lock(impl_->mu);
  impl_->idle_cv.wait(lock, [&] { return impl_->running == 0; });
}

}  // namespace moose::api
