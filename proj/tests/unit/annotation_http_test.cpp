#include <gtest/gtest.h>

#include <thread>

#include "extentlab/annotation_server.hpp"
#include "extentlab/errors.hpp"
#include "fixtures.hpp"

// After Eigen: resolv.h defines a _res macro.
#include <httplib.h>

namespace extentlab {
namespace {

// Keystrokes of the annotation UI and the request each one issues.
//   e: expand, t: entity types, 1..3: preselected label, r: REJECT.
class Client {
 public:
  explicit Client(int port) : http_("127.0.0.1", port) {}

  Json post(const std::string& path, const Json& body, int expected = 200) {
    auto res = http_.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    EXPECT_EQ(res->status, expected) << res->body;
    return Json::parse(res->body);
  }
  Json get(const std::string& path, int expected = 200) {
    auto res = http_.Get(path);
    EXPECT_TRUE(res) << path;
    EXPECT_EQ(res->status, expected) << res->body;
    return Json::parse(res->body);
  }

  Json key(const std::string& session, char k) {
    const std::string base = "/sessions/" + session;
    if (k == 'e') return post(base + "/expand", Json::object());
    if (k == 't') return post(base + "/entity-types", Json::object());
    if (k == 'r') return post(base + "/submit", {{"label", kReject}});
    const Json view = get(base + "/view");
    return post(base + "/submit", {{"label", view.at("preselected").at(k - '1')}});
  }

 private:
  httplib::Client http_;
};

struct Running {
  Running(std::span<const RelationSample> samples, const Classifier& decider,
          const std::filesystem::path& dir)
      : store(dir / "store.jsonl"),
        service(samples, decider, store, dir / "sessions.json"),
        server(service) {
    port = server.bind("127.0.0.1", 0);
    thread = std::thread([this] { server.serve(); });
  }
  ~Running() {
    server.stop();
    thread.join();
  }

  AnnotationStore store;
  AnnotationService service;
  AnnotationServer server;
  int port = 0;
  std::thread thread;
};

TEST(AnnotationHttp, TwentySampleSessionWithRestart) {
  const auto dir = testing::scratch_dir("http");
  SyntheticOptions options;
  options.count = 20;
  options.kind = SyntheticKind::kContextDetermined;
  const auto samples = samples_from_corpus(synthetic_corpus(options)).samples;
  std::vector<std::string> ids;
  for (const auto& s : samples) ids.push_back(s.sample_id);
  const auto labels = synthetic_labels();
  const KeywordClassifier decider(LabelSet(labels), {{"works", labels[0], 0.8}}, labels[1], 0.6);

  const std::vector<std::string> scripts = {"1", "e1", "ee2", "t3", "r", "eet1", "eeeeeeeeeeee1"};
  auto script_of = [&](int i) { return scripts[i % scripts.size()]; };
  std::string session_id;
  int done = 0;
  Json before_restart;
  {
    Running running(samples, decider, dir);
    Client client(running.port);
    const Json session = client.post("/sessions", {{"annotator_id", "ann"}, {"sample_ids", ids}}, 201);
    session_id = session.at("session_id");
    for (; done < 11; ++done) {
      const Json view = client.get("/sessions/" + session_id + "/view");
      EXPECT_EQ(view.at("position"), done);
      for (char k : script_of(done)) client.key(session_id, k);
    }
    // Half-way through the next sample.
    before_restart = client.key(session_id, 'e');
    EXPECT_EQ(before_restart.at("position"), done);
  }
  {
    Running running(samples, decider, dir);
    Client client(running.port);
    Json view = client.get("/sessions/" + session_id + "/view");
    EXPECT_EQ(view.at("position"), done);
    EXPECT_EQ(view, before_restart);
    for (; done < 20; ++done) {
      view = client.get("/sessions/" + session_id + "/view");
      ASSERT_EQ(view.at("end"), false);
      for (char k : script_of(done)) client.key(session_id, k);
    }
    EXPECT_EQ(client.get("/sessions/" + session_id + "/view").at("end"), true);

    client.post("/sessions/" + session_id + "/expand", Json::object(), 409);
    client.post("/sessions/nope/expand", Json::object(), 404);
    client.post("/sessions", {{"annotator_id", "ann"}}, 400);
    const Json exported = client.get("/annotations/export?annotator=ann");
    ASSERT_EQ(exported.at("records").size(), 20u);
    for (const auto& raw : exported.at("records")) {
      const AnnotationRecord record = annotation_record_from_json(raw);
      EXPECT_TRUE(record_consistent(record, running.service.priorities(record.sample_id)))
          << record.sample_id;
    }
    EXPECT_TRUE(client.get("/annotations/export?annotator=bob").at("records").empty());
  }
  const auto stored = AnnotationStore(dir / "store.jsonl").records();
  ASSERT_EQ(stored.size(), 20u);
  EXPECT_EQ(stored[4].label, kReject);
  EXPECT_TRUE(stored[3].entity_types_revealed);
  EXPECT_EQ(stored[2].revealed_tokens.size(),
            (samples[2].argument_tokens().size() + 2));
}

TEST(AnnotationHttp, Addresses) {
  EXPECT_EQ(parse_listen_address(""), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_EQ(parse_listen_address("0.0.0.0:9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
  EXPECT_EQ(parse_listen_address(":0").second, 0);
  EXPECT_THROW(parse_listen_address("host:abc"), InvalidArgument);
  EXPECT_EQ(http_status("not_found"), 404);
  EXPECT_EQ(http_status("conflict_error"), 409);
  EXPECT_EQ(http_status("validation_error"), 400);
}

}  // namespace
}  // namespace extentlab
