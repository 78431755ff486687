#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <dtreason/http.hpp>

using namespace dtreason;

namespace {

std::string file(const std::string& name) {
  std::ifstream in(std::string(DTREASON_SCENARIO_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Client {
  Router& r;
  HttpResponse post(const std::string& path, const json& body) { return r.handle("POST", path, body.dump()); }
  HttpResponse post_raw(const std::string& path, const std::string& body) { return r.handle("POST", path, body); }
  HttpResponse get(const std::string& path) { return r.handle("GET", path, ""); }
};

// Session with DT1, F=(2,2) label 0, CE label 1 and CE.x1=F.x1.
std::string minimal_contrastive(Client& c) {
  std::string id = c.post("/sessions", json::object()).body["id"];
  std::string base = "/sessions/" + id;
  EXPECT_EQ(c.post_raw(base + "/models", file("dt1.json")).status, 201);
  EXPECT_EQ(c.post_raw(base + "/schema", file("toy_schema.json")).status, 200);
  EXPECT_EQ(c.post(base + "/instances", {{"name", "F"}, {"label", 0}, {"features", {{"x1", 2}, {"x2", 2}}}}).status, 201);
  EXPECT_EQ(c.post(base + "/instances", {{"name", "CE"}, {"label", "1"}}).status, 201);
  EXPECT_EQ(c.post(base + "/constraints", {{"text", "CE.x1 = F.x1"}}).status, 201);
  return id;
}

}  // namespace

TEST(Service, MinimalContrastiveFlow) {
  Router r;
  Client c{r};
  std::string base = "/sessions/" + minimal_contrastive(c);
  HttpResponse region = c.post(base + "/solve", {{"project", {"CE"}}});
  ASSERT_EQ(region.status, 200);
  EXPECT_EQ(region.body["answers"][0]["constraints"], json({"CE.x1=2", "CE.x2>=3"}));
  HttpResponse best = c.post(base + "/solve", {{"minimize", "l1norm(F, CE)"}, {"project", {"CE"}}});
  ASSERT_EQ(best.status, 200);
  EXPECT_EQ(best.body["answers"][0]["constraints"], json({"CE.x1=2", "CE.x2=3"}));
  EXPECT_EQ(best.body["answers"][0]["min_value"], "1");
  EXPECT_EQ(best.body["answers"][0]["rules"][1]["kind"], "contrastive");
  EXPECT_EQ(best.body["metrics"]["N_CE"], 1);
  HttpResponse t = c.get(base + "/transcript");
  EXPECT_NE(t.body["text"].get<std::string>().find("Min value: 1\n"), std::string::npos);
  EXPECT_NE(t.body["script"].get<std::string>().find("constraint CE.x1 = F.x1\n"), std::string::npos);
}

TEST(Service, PayloadMatchesScriptRunner) {
  Router r;
  Client c{r};
  std::string base = "/sessions/" + minimal_contrastive(c);
  json api = c.post(base + "/solve", {{"minimize", "l1norm(F, CE)"}, {"project", {"CE"}}}).body;
  Session s;
  std::ostringstream out;
  std::istringstream in(
      "model dt1.json\nschema toy_schema.json\ninstance F label=0 features=2,2\ninstance CE label=1\n"
      "constraint CE.x1 = F.x1\nsolveopt minimize=l1norm(F, CE) project=CE\n");
  ScriptRunner(s, out, ScriptRunner::Format::Structured, DTREASON_SCENARIO_DIR).run(in);
  EXPECT_EQ(api.dump(), json::parse(out.str()).dump());
}

TEST(Service, Errors) {
  Router r;
  Client c{r};
  EXPECT_EQ(c.get("/sessions/nope/transcript").status, 404);
  EXPECT_EQ(c.get("/elsewhere").status, 404);
  std::string base = "/sessions/" + minimal_contrastive(c);
  HttpResponse bad = c.post(base + "/constraints", {{"text", "CE.x1 <= "}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body["kind"], "parse_error");
  EXPECT_EQ(bad.body["position"], 8);
  EXPECT_EQ(c.post(base + "/constraints", {{"text", "CE.x9 <= 1"}}).body["position"], 3);
  HttpResponse dup = c.post(base + "/instances", {{"name", "F"}, {"label", 0}});
  EXPECT_EQ(dup.status, 409);
  HttpResponse missing = c.post(base + "/retract", {{"text", "CE.x2 = 7"}});
  EXPECT_EQ(missing.status, 400);
  EXPECT_EQ(missing.body["kind"], "no_such_constraint");
  EXPECT_EQ(c.post_raw(base + "/constraints", "{oops").status, 400);
  EXPECT_EQ(c.post(base + "/constraints", {{"text", "CE.x1 >= 0\nsolveopt"}}).status, 400);
  EXPECT_EQ(c.post(base + "/solve", {{"minimize", "l3norm(F, CE)"}}).status, 400);
  EXPECT_EQ(c.post(base + "/instances", {{"label", 0}}).status, 400);
  // failed requests leave the session untouched
  EXPECT_EQ(c.get(base + "/constraints").body["constraints"].size(), 3u);
}

TEST(Service, RetractResetDelete) {
  Router r;
  Client c{r};
  std::string id = minimal_contrastive(c);
  std::string base = "/sessions/" + id;
  c.post(base + "/constraints", {{"text", "CE.x2 <= 10"}});
  EXPECT_EQ(c.post(base + "/retract", {{"last", true}}).body["constraints"].size(), 3u);
  EXPECT_EQ(c.post(base + "/retract", {{"text", "CE.x1 = F.x1"}}).body["constraints"].size(), 2u);
  EXPECT_EQ(c.post(base + "/reset", {{"keep_model", true}}).body["trees"], 1);
  EXPECT_EQ(c.get(base + "/instances").body["instances"].size(), 0u);
  EXPECT_EQ(c.post(base + "/verbosity", {{"level", 0}}).body["verbosity"], 0);
  EXPECT_EQ(r.handle("DELETE", base, "").status, 200);
  EXPECT_EQ(c.get(base + "/instances").status, 404);
  EXPECT_EQ(r.session_count(), 0u);
}

TEST(Service, SessionsAreIsolated) {
  Router r;
  Client c{r};
  std::string a = "/sessions/" + minimal_contrastive(c);
  std::string b = "/sessions/" + minimal_contrastive(c);
  EXPECT_NE(a, b);
  c.post(a + "/constraints", {{"text", "CE.x2 = F.x2"}});
  EXPECT_EQ(c.post(a + "/solve", json::object()).body["no_answer"], true);
  EXPECT_EQ(c.post(b + "/solve", json::object()).body["no_answer"], false);
}

TEST(Service, ConcurrentRequests) {
  Router r;
  Client c{r};
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(minimal_contrastive(c));
  std::vector<std::thread> workers;
  std::vector<int> ok(8, 0);
  for (int w = 0; w < 8; ++w)
    workers.emplace_back([&, w] {
      Client local{r};
      std::string base = "/sessions/" + ids[w % 4];
      for (int k = 0; k < 5; ++k) {
        HttpResponse s = local.post(base + "/solve", {{"minimize", "l1norm(F, CE)"}, {"project", {"CE"}}});
        ok[w] += s.status == 200 && s.body["answers"][0]["min_value"] == "1";
      }
    });
  for (auto& t : workers) t.join();
  for (int v : ok) EXPECT_EQ(v, 5);
  // every solve of a session landed in its transcript
  for (const auto& id : ids) {
    std::string text = c.get("/sessions/" + id + "/transcript").body["text"];
    std::size_t n = 0;
    for (auto p = text.find("Min value"); p != std::string::npos; p = text.find("Min value", p + 1)) ++n;
    EXPECT_EQ(n, 10u);
  }
}

TEST(Service, OverHttp) {
  Router router;
  httplib::Server srv;
  mount(srv, router);
  int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  httplib::Client cl("127.0.0.1", port);
  auto created = cl.Post("/sessions", "{}", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  std::string base = "/sessions/" + json::parse(created->body)["id"].get<std::string>();
  EXPECT_EQ(cl.Post(base + "/models", file("dt1.json"), "application/json")->status, 201);
  EXPECT_EQ(cl.Post(base + "/instances", R"({"name": "F", "label": 0, "features": {"x1": 2, "x2": 2}})",
                    "application/json")
                ->status,
            201);
  auto solved = cl.Post(base + "/solve", "{}", "application/json");
  ASSERT_TRUE(solved);
  EXPECT_EQ(json::parse(solved->body)["answers"][0]["constraints"], json({"F.x1=2", "F.x2=2"}));
  EXPECT_EQ(solved->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(cl.Delete(base)->status, 200);
  EXPECT_EQ(cl.Get(base + "/transcript")->status, 404);
  srv.stop();
  t.join();
}
