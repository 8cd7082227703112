// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hbench/service.hpp"
#include "test_support.hpp"

namespace hbench::service {
namespace {

json read_json(const char* name) {
  std::ifstream in(testing::fixture(name));
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

json session_doc(std::size_t batch = 1, double eta = 0.5) {
  return {{"network", read_json("f1.json")},
          {"catalog", read_json("f1_catalog.json")},
          {"config",
           {{"batch_size", batch},
            {"rating_range", {0, 10}},
            {"seed", 11},
            {"dynamics", {{"eta", eta}, {"lambda_T", 0.0}, {"lambda_H", 1.0}, {"tau", 0.5}}}}},
          {"models",
           {{{"id", "a"}, {"metrics", {{"acc", 0.8}, {"lat", 0.4}}}},
            {{"id", "b"}, {"metrics", {{"acc", 0.4}, {"lat", 0.8}}}}}}};
}

// Planted part-worths per stakeholder: acc levels (low, mid, high), lat (slow, fast).
double planted_rating(std::size_t h, const Profile& p) {
  static const double acc[2][3] = {{-1.5, 0.25, 1.25}, {-0.3, 0.1, 0.2}};
  static const double lat[2][2] = {{-0.5, 0.5}, {-1.2, 1.2}};
  return 5.0 + acc[h][p.levels[0]] + lat[h][p.levels[1]];
}

// Answers every remaining task for one stakeholder with planted ratings.
void answer_all(SessionCore& c, std::size_t h) {
  const std::string id = c.network().stakeholders()[h].id;
  for (Task t = c.next_task(id); !t.complete; t = c.next_task(id))
    c.submit(id, t.profile->id, planted_rating(h, *t.profile));
}

// --- documents --------------------------------------------------------------

TEST(SessionSpecDocument, Parses) {
  const SessionSpec s = session_spec_from_json(session_doc(3));
  EXPECT_EQ(s.config.batch_size, 3u);
  EXPECT_EQ(s.config.seed, 11u);
  EXPECT_EQ(s.catalog.attributes.size(), 2u);
  EXPECT_EQ(s.models.size(), 2u);
  EXPECT_EQ(catalog_from_json(catalog_to_json(s.catalog)), s.catalog);
}

TEST(SessionSpecDocument, Rejections) {
  json bad = session_doc();
  bad["network"]["blocks"]["A_T"][0][1] = -0.5;
  try {
    session_spec_from_json(bad);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_EQ(e.code(), "invalid_network");
    EXPECT_TRUE(e.details().contains("findings"));
    EXPECT_NE(e.details().dump().find("A_T"), std::string::npos);
  }
  json missing = session_doc();
  missing.erase("catalog");
  EXPECT_THROW(session_spec_from_json(missing), ParseError);
  json extra = session_doc();
  extra["config"]["turbo"] = true;
  EXPECT_THROW(session_spec_from_json(extra), ParseError);
}

// --- core -------------------------------------------------------------------

TEST(SessionCore, CreationBuildsFullRankDesign) {
  const SessionCore c(session_spec_from_json(session_doc()));
  EXPECT_EQ(layout_of(c.network()).total(), 5u);
  EXPECT_EQ(c.design().profiles.size(), 8u);  // twice the 4 coefficients
  EXPECT_TRUE(detail::full_column_rank(c.design().matrix));
  EXPECT_EQ(c.weights(), DenseMatrix(2, 2));
  EXPECT_TRUE(c.trace().empty());
}

TEST(SessionCore, CatalogMustCoverMetrics) {
  SessionSpec s = session_spec_from_json(session_doc());
  s.catalog.attributes.pop_back();
  EXPECT_THROW(SessionCore{s}, ConfigError);
  s = session_spec_from_json(session_doc());
  s.catalog.attributes[1].metric_id = "nope";
  EXPECT_THROW(SessionCore{s}, UnknownIdError);
}

TEST(SessionCore, TaskOrderIsDeterministicAndStable) {
  SessionCore a(session_spec_from_json(session_doc())), b(session_spec_from_json(session_doc()));
  const Task t1 = a.next_task("h1");
  EXPECT_FALSE(t1.complete);
  EXPECT_EQ(t1.answered, 0u);
  EXPECT_EQ(t1.total, 8u);
  EXPECT_EQ(a.next_task("h1").profile, t1.profile);
  EXPECT_EQ(b.next_task("h1").profile, t1.profile);
  a.submit("h1", t1.profile->id, 5.0);
  EXPECT_NE(a.next_task("h1").profile, t1.profile);
  EXPECT_EQ(a.next_task("h1").answered, 1u);
  answer_all(a, 0);
  const Task done = a.next_task("h1");
  EXPECT_TRUE(done.complete);
  EXPECT_FALSE(done.profile.has_value());
  EXPECT_EQ(done.answered, 8u);
  EXPECT_THROW(a.next_task("h9"), ServiceError);
}

TEST(SessionCore, BatchOfOneStepsOncePerResponse) {
  SessionCore c(session_spec_from_json(session_doc(1)));
  const Task t = c.next_task("h2");
  const SubmitSummary s = c.submit("h2", t.profile->id, 7.0);
  EXPECT_TRUE(s.stepped);
  EXPECT_EQ(s.iteration, 1u);
  ASSERT_EQ(c.trace().size(), 1u);
  EXPECT_EQ(c.trace()[0].iteration, 1u);
  EXPECT_EQ(s.scores.size(), 2u);
}

TEST(SessionCore, LargerBatchesStepOnBoundary) {
  SessionCore c(session_spec_from_json(session_doc(3)));
  for (int i = 0; i < 2; ++i) {
    const Task t = c.next_task("h1");
    EXPECT_FALSE(c.submit("h1", t.profile->id, 4.0).stepped);
  }
  EXPECT_EQ(c.pending_in_batch(), 2u);
  const Task t = c.next_task("h1");
  EXPECT_TRUE(c.submit("h1", t.profile->id, 4.0).stepped);
  EXPECT_EQ(c.pending_in_batch(), 0u);
  EXPECT_EQ(c.trace().size(), 1u);
}

TEST(SessionCore, RejectionsLeaveStateUnchanged) {
  SessionCore c(session_spec_from_json(session_doc()));
  const Task t = c.next_task("h1");
  auto status_of = [&](auto&& f) {
    try {
      f();
    } catch (const ServiceError& e) {
      return e.status();
    }
    return 0;
  };
  EXPECT_EQ(status_of([&] { c.submit("h1", t.profile->id, 10.5); }), 422);
  EXPECT_EQ(status_of([&] { c.submit("h1", t.profile->id, std::nan("")); }), 422);
  EXPECT_EQ(status_of([&] { c.submit("h1", "p999", 5.0); }), 404);
  EXPECT_EQ(status_of([&] { c.submit("zz", t.profile->id, 5.0); }), 404);
  EXPECT_TRUE(c.log().empty());
  EXPECT_TRUE(c.trace().empty());
  EXPECT_EQ(c.next_task("h1").profile, t.profile);
  c.submit("h1", t.profile->id, 10.0);
  EXPECT_EQ(status_of([&] { c.submit("h1", t.profile->id, 3.0); }), 409);
  EXPECT_EQ(c.log().size(), 1u);
}

TEST(SessionCore, NoiselessRatingsGiveStableUtilities) {
  SessionCore c(session_spec_from_json(session_doc(1)));
  answer_all(c, 0);
  // Ranges of the planted part-worths: acc 2.75, lat 1.0.
  EXPECT_NEAR(c.utilities()(0, 0), 2.75, 1e-9);
  EXPECT_NEAR(c.utilities()(0, 1), 1.0, 1e-9);
  const DenseMatrix U_before = c.utilities();
  answer_all(c, 1);
  EXPECT_LE(testing::max_abs_diff(c.utilities().block(0, 0, 1, 2), U_before.block(0, 0, 1, 2)), 1e-12);
  // Once the refit reproduces the same utilities, the human signal for h1
  // only measures the remaining distance g(U) - W, which shrinks each step.
  const auto& tr = c.trace();
  std::size_t first = 0;
  while (first < tr.size() && tr[first].G_H(0, 0) == 0.0) ++first;
  ASSERT_LT(first, tr.size());
  for (std::size_t i = first + 1; i < tr.size(); ++i) {
    EXPECT_LE(std::abs(tr[i].G_H(0, 0)), std::abs(tr[i - 1].G_H(0, 0)) + 1e-12);
  }
}

TEST(SessionCore, ConvergedSessionReportsVerdict) {
  SessionCore c(session_spec_from_json(session_doc(1, 1.0)));
  answer_all(c, 0);
  answer_all(c, 1);
  ASSERT_TRUE(c.verdict().has_value());
  EXPECT_LT(c.verdict()->residual, 1e-8);
  EXPECT_LE(testing::max_abs_diff(c.weights(), project(c.utilities(), c.spec().config.dynamics.constraints)),
            1e-12);
}

TEST(SessionCore, ReplayReproducesWeightsExactly) {
  SessionCore c(session_spec_from_json(session_doc(2)));
  Rng rng(5);
  for (int i = 0; i < 12; ++i) {
    const std::string sh = i % 3 ? "h1" : "h2";
    const Task t = c.next_task(sh);
    if (t.complete) continue;
    c.submit(sh, t.profile->id, std::round(rng.uniform(0, 10) * 4) / 4);
  }
  const SessionCore r = SessionCore::replay(c.spec(), c.log());
  EXPECT_EQ(r.weights(), c.weights());
  EXPECT_EQ(r.utilities(), c.utilities());
  EXPECT_EQ(r.trace().size(), c.trace().size());
}

// --- snapshots --------------------------------------------------------------

TEST(Snapshot, FreshAndCursor) {
  SessionCore c(session_spec_from_json(session_doc(1)));
  json j = snapshot_to_json(*take_snapshot("s", c), c.network(), 0);
  EXPECT_EQ(j["iteration"], 0);
  EXPECT_TRUE(j["trace"].empty());
  EXPECT_EQ(j["W"]["values"], io::matrix_to_json(DenseMatrix(2, 2)));
  EXPECT_EQ(j["network"]["supra_size"], 5);
  EXPECT_TRUE(j["fixed_point"].is_null());
  EXPECT_EQ(j["leaderboard"]["entries"].size(), 2u);

  for (int i = 0; i < 3; ++i) {
    const Task t = c.next_task("h1");
    c.submit("h1", t.profile->id, 6.0);
  }
  const auto snap = take_snapshot("s", c);
  EXPECT_EQ(snapshot_to_json(*snap, c.network(), 0)["trace"].size(), 3u);
  EXPECT_EQ(snapshot_to_json(*snap, c.network(), 1)["trace"].size(), 2u);
  EXPECT_TRUE(snapshot_to_json(*snap, c.network(), 3)["trace"].empty());
  EXPECT_EQ(snapshot_to_json(*snap, c.network(), 3)["cursor"], 3);
}

TEST(Snapshot, TaskDocument) {
  SessionCore c(session_spec_from_json(session_doc()));
  const Task t = c.next_task("h1");
  const json j = task_to_json(t, c.design(), c.spec().config);
  EXPECT_EQ(j["task"]["kind"], "rating");
  EXPECT_EQ(j["task"]["profile_id"], t.profile->id);
  ASSERT_EQ(j["task"]["attributes"].size(), 2u);
  EXPECT_TRUE(j["task"]["attributes"][0].contains("description"));
  EXPECT_EQ(j["rating_range"], json({0.0, 10.0}));
}

// --- store and concurrency --------------------------------------------------

TEST(SessionStore, Idempotency) {
  SessionStore store;
  const auto [id, created] = store.create(session_doc(), std::string("k1"));
  EXPECT_TRUE(created);
  EXPECT_EQ(id.size(), 16u);
  const auto [id2, created2] = store.create(session_doc(), std::string("k1"));
  EXPECT_EQ(id2, id);
  EXPECT_FALSE(created2);
  json body_key = session_doc();
  body_key["idempotency_key"] = "k1";
  EXPECT_EQ(store.create(body_key).first, id);
  try {
    store.create(session_doc(4), std::string("k1"));
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  EXPECT_NE(store.create(session_doc()).first, id);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_THROW(store.get("0000000000000000"), ServiceError);
}

TEST(SessionStore, ConcurrentSubmissionsAreSerialized) {
  SessionStore store;
  const std::string id = store.create(session_doc(1)).first;
  auto s = store.get(id);
  std::vector<std::pair<std::string, std::string>> work;
  for (const char* sh : {"h1", "h2"})
    for (const auto& p : s->design().profiles) work.push_back({sh, p.id});

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::atomic<int> torn{0};
  std::thread reader([&] {
    while (!stop) {
      const auto snap = s->snapshot();
      // batch_size 1: every accepted response is one complete step.
      if (snap->trace->size() != snap->responses) ++torn;
    }
  });
  std::vector<std::thread> writers;
  for (int w = 0; w < 4; ++w)
    writers.emplace_back([&] {
      for (std::size_t i = next++; i < work.size(); i = next++)
        store.submit(id, work[i].first, work[i].second, static_cast<double>(i % 11));
    });
  for (auto& t : writers) t.join();
  stop = true;
  reader.join();

  EXPECT_EQ(torn.load(), 0);
  const auto log = s->log();
  ASSERT_EQ(log.size(), work.size());
  for (std::size_t i = 0; i < log.size(); ++i) EXPECT_EQ(log[i].seq, i + 1);
  const SessionCore replayed = SessionCore::replay(s->spec(), log);
  EXPECT_EQ(replayed.weights(), s->snapshot()->W);
}

TEST(SessionStore, ResponseLogFile) {
  const auto path = std::filesystem::temp_directory_path() / "hbench_service_test_log.jsonl";
  std::filesystem::remove(path);
  {
    SessionStore store({path});
    const std::string id = store.create(session_doc()).first;
    const Task t = store.get(id)->next_task("h1");
    store.submit(id, "h1", t.profile->id, 3.0);
  }
  std::ifstream in(path);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const json j = json::parse(line);
  EXPECT_EQ(j["seq"], 1);
  EXPECT_EQ(j["stakeholder"], "h1");
  EXPECT_EQ(j["rating"], 3.0);
  std::filesystem::remove(path);
}

// --- HTTP -------------------------------------------------------------------

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    register_routes(server_, store_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Result post(const std::string& path, const json& body, httplib::Headers h = {}) {
    return client_->Post(path, h, body.dump(), kMediaType);
  }

  std::string create_session(std::size_t batch = 1) {
    auto r = post("/sessions", session_doc(batch));
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body)["session_id"];
  }

  SessionStore store_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpTest, Healthz) {
  auto r = client_->Get("/healthz");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), kMediaType);
  EXPECT_EQ(json::parse(r->body)["status"], "ok");
}

TEST_F(HttpTest, CreateWithIdempotencyKey) {
  auto a = post("/sessions", session_doc(), {{"Idempotency-Key", "abc"}});
  auto b = post("/sessions", session_doc(), {{"Idempotency-Key", "abc"}});
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->status, 201);
  EXPECT_EQ(b->status, 200);
  const json ja = json::parse(a->body), jb = json::parse(b->body);
  EXPECT_EQ(ja["session_id"], jb["session_id"]);
  EXPECT_EQ(ja["supra_size"], 5);
  EXPECT_EQ(ja["profiles"], 8);
  EXPECT_EQ(post("/sessions", session_doc(2), {{"Idempotency-Key", "abc"}})->status, 409);
}

TEST_F(HttpTest, CreateRejections) {
  auto r = client_->Post("/sessions", "{not json", kMediaType);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["error"]["code"], "malformed_document");

  json bad = session_doc();
  bad["network"]["blocks"]["A_HT"][0][0] = -0.7;
  r = post("/sessions", bad);
  EXPECT_EQ(r->status, 422);
  const json j = json::parse(r->body);
  EXPECT_TRUE(j.contains("validation"));
  EXPECT_NE(j["error"]["message"].get<std::string>().find("A_HT"), std::string::npos);
}

TEST_F(HttpTest, ElicitationRoundTrip) {
  const std::string id = create_session(1);
  auto t = client_->Get("/sessions/" + id + "/tasks/h1");
  ASSERT_EQ(t->status, 200);
  const json task = json::parse(t->body);
  EXPECT_FALSE(task["complete"]);
  const std::string profile = task["task"]["profile_id"];

  auto before = json::parse(client_->Get("/sessions/" + id + "/state")->body);
  EXPECT_EQ(before["iteration"], 0);

  auto s = post("/sessions/" + id + "/responses",
                {{"stakeholder", "h1"}, {"profile", profile}, {"rating", 7.5}});
  ASSERT_EQ(s->status, 200);
  const json sum = json::parse(s->body);
  EXPECT_TRUE(sum["stepped"]);
  EXPECT_EQ(sum["iteration"], 1);

  auto after = json::parse(client_->Get("/sessions/" + id + "/state?since=0")->body);
  EXPECT_EQ(after["iteration"], 1);
  EXPECT_EQ(after["trace"].size(), 1u);
  EXPECT_EQ(after["responses"], 1);
  EXPECT_EQ(after["w_tilde"], sum["w_tilde"]);
  EXPECT_TRUE(json::parse(client_->Get("/sessions/" + id + "/state?since=1")->body)["trace"].empty());

  auto tr = client_->Get("/sessions/" + id + "/trace");
  ASSERT_EQ(tr->status, 200);
  EXPECT_EQ(tr->get_header_value("Content-Type"), kJsonLinesType);
  EXPECT_EQ(std::count(tr->body.begin(), tr->body.end(), '\n'), 1);
  EXPECT_EQ(json::parse(tr->body.substr(0, tr->body.find('\n')))["t"], 1);

  // Duplicate and out-of-range responses.
  EXPECT_EQ(post("/sessions/" + id + "/responses",
                 {{"stakeholder", "h1"}, {"profile", profile}, {"rating", 1.0}})->status, 409);
  const std::string next = json::parse(client_->Get("/sessions/" + id + "/tasks/h1")->body)["task"]["profile_id"];
  EXPECT_EQ(post("/sessions/" + id + "/responses",
                 {{"stakeholder", "h1"}, {"profile", next}, {"rating", 11}})->status, 422);
  EXPECT_EQ(post("/sessions/" + id + "/responses",
                 {{"stakeholder", "h1"}, {"profile", next}, {"rating", "high"}})->status, 400);
  EXPECT_EQ(post("/sessions/" + id + "/responses",
                 {{"stakeholder", "h1"}, {"profile", next}, {"rating", 1}, {"x", 1}})->status, 400);
}

TEST_F(HttpTest, NotFoundAndBadCursor) {
  EXPECT_EQ(client_->Get("/sessions/ffffffffffffffff/state")->status, 404);
  EXPECT_EQ(client_->Get("/sessions/ffffffffffffffff/trace")->status, 404);
  const std::string id = create_session();
  EXPECT_EQ(client_->Get("/sessions/" + id + "/tasks/nobody")->status, 404);
  EXPECT_EQ(client_->Get("/sessions/" + id + "/state?since=abc")->status, 400);
  EXPECT_EQ(client_->Get("/sessions/" + id + "/state?since=-1")->status, 400);
  auto r = post("/sessions/" + id + "/responses",
                {{"stakeholder", "h1"}, {"profile", "p404"}, {"rating", 1}});
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(json::parse(r->body)["error"]["code"], "unknown_profile");
}

TEST_F(HttpTest, CompletionMarker) {
  const std::string id = create_session(4);
  for (;;) {
    const json t = json::parse(client_->Get("/sessions/" + id + "/tasks/h2")->body);
    if (t["complete"]) {
      EXPECT_TRUE(t["task"].is_null());
      EXPECT_EQ(t["answered"], 8);
      break;
    }
    ASSERT_EQ(post("/sessions/" + id + "/responses",
                   {{"stakeholder", "h2"}, {"profile", t["task"]["profile_id"]}, {"rating", 5}})
                  ->status,
              200);
  }
  EXPECT_EQ(json::parse(client_->Get("/sessions/" + id + "/state")->body)["iteration"], 2);
}

}  // namespace
}  // namespace hbench::service
