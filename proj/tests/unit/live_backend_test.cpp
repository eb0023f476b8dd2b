#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "moose/core/json.hpp"
#include "testkit.hpp"

using namespace moose;
using namespace moose::llm;

namespace {

// A local stand-in for a chat-completions endpoint that fails the first `failures` requests.
class MockCompletions {
public:
  MockCompletions(int failures, int failure_status) : failures_(failures), status_(failure_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_auth = req.get_header_value("Authorization");
      last_body = Json::parse(req.body);
      if (failures_-- > 0) {
        res.status = status_;
        res.set_content("{\"error\":\"nope\"}", "application/json");
        return;
      }
      const Json reply{{"choices", Json::array({Json{{"message", Json{{"role", "assistant"}, {"content", "«hypothesis»H«/hypothesis»"}}}}})},
                       {"usage", Json{{"total_tokens", 42}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockCompletions() {
    server_.stop();
    thread_.join();
  }
  OpenAiBackend::Config config() const {
    return {"http://127.0.0.1:" + std::to_string(port_) + "/v1", "sk-test", "test-model", 5};
  }

  std::atomic<int> hits{0};
  std::string last_auth;
  Json last_body;

private:
  httplib::Server server_;
  std::thread thread_;
  std::atomic<int> failures_;
  int status_;
  int port_ = 0;
};

GenerationRequest request() {
  return GenerationRequest::make(TemplateId::ProposeRefinement, {{"question", "Q"},
                                                                 {"context", "(none)"},
                                                                 {"hypothesis", "H"},
                                                                 {"level", "1"},
                                                                 {"level_descriptor", "d"}});
}

}  // namespace

TEST(LiveBackend, SendsChatCompletion) {
  MockCompletions mock(0, 200);
  LlmGateway gw(std::make_shared<OpenAiBackend>(mock.config()), TemplateSet::builtin(), testkit::fast_gateway());
  const auto r = gw.complete(request());
  EXPECT_EQ(r.text, "«hypothesis»H«/hypothesis»");
  EXPECT_EQ(gw.tokens_used(), 42u);
  EXPECT_EQ(mock.last_auth, "Bearer sk-test");
  EXPECT_EQ(mock.last_body.at("model"), "test-model");
  EXPECT_EQ(mock.last_body.at("messages")[0].at("role"), "user");
}

TEST(LiveBackend, ServerErrorsAreRetried) {
  MockCompletions mock(2, 503);
  LlmGateway gw(std::make_shared<OpenAiBackend>(mock.config()), TemplateSet::builtin(), testkit::fast_gateway());
  EXPECT_EQ(gw.complete(request()).text, "«hypothesis»H«/hypothesis»");
  EXPECT_EQ(mock.hits.load(), 3);
}

TEST(LiveBackend, AuthFailureIsNotRetried) {
  MockCompletions mock(10, 401);
  LlmGateway gw(std::make_shared<OpenAiBackend>(mock.config()), TemplateSet::builtin(), testkit::fast_gateway());
  try {
    gw.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BackendUnavailable);
  }
  EXPECT_EQ(mock.hits.load(), 1);
}

TEST(LiveBackend, UnreachableHostIsUnavailable) {
  OpenAiBackend::Config cfg{"http://127.0.0.1:1/v1", "k", "m", 1};
  LlmGateway gw(std::make_shared<OpenAiBackend>(cfg), TemplateSet::builtin(), testkit::fast_gateway());
  try {
    gw.complete(request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BackendUnavailable);
  }
}
