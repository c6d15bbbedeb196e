#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include <unistd.h>

#include "campus/server.hpp"

using namespace campus;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Harness {
  fs::path dir;
  std::unique_ptr<ApiServer> server;
  std::unique_ptr<httplib::Client> client;

  explicit Harness(const std::string& name, bool fresh = true) {
    dir = fs::temp_directory_path() / ("campus-server-" + name + "-" + std::to_string(::getpid()));
    if (fresh) fs::remove_all(dir);
    start();
  }

  void start() {
    ServerOptions opt;
    opt.port = 0;
    opt.data_dir = dir;
    opt.web_dir = "";
    opt.job_workers = 2;
    opt.compute_workers = 2;
    server = std::make_unique<ApiServer>(opt);
    const int port = server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(120, 0);
  }

  void restart() {
    client.reset();
    server.reset();
    start();
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client->Post(path, body.dump(), "application/json");
  }

  // Polls until the job leaves queued/running; progress must never drop.
  json wait(const std::string& id) {
    double last = -1.0;
    std::string status = "queued";
    for (int i = 0; i < 2000; ++i) {
      const auto res = client->Get("/api/jobs/" + id);
      REQUIRE(res);
      REQUIRE(res->status == 200);
      const json j = json::parse(res->body);
      CHECK(j["progress"].get<double>() >= last);
      last = j["progress"].get<double>();
      const std::string now = j["status"];
      if (status == "running") CHECK(now != "queued");
      status = now;
      if (status == "done" || status == "failed") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    FAIL("job did not finish");
    return {};
  }

  ~Harness() {
    client.reset();
    server.reset();
    fs::remove_all(dir);
  }
};

json small_posterior() {
  return {{"points", json::array({{{"alpha", 0.3}, {"beta", 0.4}, {"i_out", 100}, {"accepted", 3}, {"attempted", 10}},
                                  {{"alpha", 0.6}, {"beta", 0.35}, {"i_out", 60}, {"accepted", 1}, {"attempted", 10}}})}};
}

}  // namespace

TEST_CASE("simulate endpoint") {
  Harness h("simulate");
  const json zero{{"params", {{"beta", 0.0}, {"i_out", 0}}}, {"init", {{"S", 6500}}}, {"seed", 1}};
  auto res = h.post("/api/simulate", zero);
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  const json body = json::parse(res->body);
  REQUIRE(body["weekly_cases"].size() == 16);
  for (const auto& c : body["weekly_cases"]) CHECK(c.get<long>() == 0);

  const json req{{"params", {{"alpha", 0.4}}}, {"seed", 9}};
  const auto a = h.post("/api/simulate", req);
  const auto b = h.post("/api/simulate", req);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->body == b->body);

  CHECK(h.post("/api/simulate", {{"params", {{"alpha", 2}}}})->status == 400);
  CHECK(h.post("/api/simulate", {{"params", {{"alhpa", 0.2}}}})->status == 400);
  CHECK(h.client->Post("/api/simulate", "{not json", "application/json")->status == 400);
  CHECK(h.post("/api/simulate", {{"init", {{"S", 10}}}})->status == 422);
  CHECK(h.client->Options("/api/simulate")->status == 204);
}

TEST_CASE("unknown ids") {
  Harness h("unknown");
  CHECK(h.client->Get("/api/jobs/nope")->status == 404);
  CHECK(h.client->Get("/api/jobs/nope/result")->status == 404);
  CHECK(h.client->Get("/api/posterior/nope")->status == 404);
  CHECK(h.post("/api/sweep", {{"posterior_id", "fit-999999"}})->status == 404);
}

TEST_CASE("sweep validation") {
  Harness h("sweepval");
  CHECK(h.post("/api/sweep", {{"strategies", json::array()}, {"posterior", small_posterior()}})->status == 400);
  CHECK(h.post("/api/sweep", {{"strategies", {{{"sigma", 1.5}, {"interval_days", 7}}}}, {"posterior", small_posterior()}})
            ->status == 400);
  CHECK(h.post("/api/sweep", json::object())->status == 400);
}

TEST_CASE("sweep job runs, reports nine strategies and returns stable bytes") {
  Harness h("sweep");
  auto res = h.post("/api/sweep", {{"posterior", small_posterior()}, {"n", 6}, {"seed", 4}});
  REQUIRE(res);
  REQUIRE(res->status == 202);
  const std::string id = json::parse(res->body)["job_id"];
  const json record = h.wait(id);
  CHECK(record["status"] == "done");
  CHECK(record["progress"] == 1.0);
  const auto r1 = h.client->Get("/api/jobs/" + id + "/result");
  const auto r2 = h.client->Get("/api/jobs/" + id + "/result");
  REQUIRE(r1);
  CHECK(r1->status == 200);
  CHECK(r1->body == r2->body);
  const json report = json::parse(r1->body);
  CHECK(report["reports"].size() == 9);
  CHECK(report["reports"][0]["strategy"]["label"] == "40% every 14 days");

  // Same request, same numbers, separate job.
  const std::string id2 = json::parse(h.post("/api/sweep", {{"posterior", small_posterior()}, {"n", 6}, {"seed", 4}})->body)["job_id"];
  h.wait(id2);
  CHECK(h.client->Get("/api/jobs/" + id2 + "/result")->body == r1->body);

  // Finished jobs survive a restart.
  h.restart();
  const auto again = h.client->Get("/api/jobs/" + id + "/result");
  REQUIRE(again);
  CHECK(again->status == 200);
  CHECK(again->body == r1->body);
}

TEST_CASE("fit job exposes intervals and a posterior usable by sweeps") {
  Harness h("fit");
  // Observed data straight from a simulation so the tiny grid has a chance.
  const auto sim = h.post("/api/simulate", {{"params", {{"alpha", 0.5}, {"beta", 0.4}, {"i_out", 100}}}, {"seed", 3}});
  const json weekly = json::parse(sim->body)["weekly_cases"];
  auto res = h.post("/api/fit", {{"observed", weekly}, {"grid_points", 3}, {"n_traj", 20}, {"seed", 2}});
  REQUIRE(res);
  REQUIRE(res->status == 202);
  const std::string id = json::parse(res->body)["job_id"];
  const json record = h.wait(id);
  REQUIRE(record["status"] == "done");
  const json result = json::parse(h.client->Get("/api/jobs/" + id + "/result")->body);
  CHECK(result["posterior_id"] == id);
  CHECK(result.contains("intervals"));
  const auto post = h.client->Get("/api/posterior/" + id);
  REQUIRE(post);
  CHECK(post->status == 200);
  CHECK(json::parse(post->body)["points"].size() == 27);

  CHECK(h.post("/api/fit", {{"observed", json::array({1, 2, 3})}})->status == 400);
  CHECK(h.post("/api/fit", json::object())->status == 400);
}

TEST_CASE("ensemble job") {
  Harness h("ensemble");
  auto res = h.post("/api/ensemble", {{"posterior", small_posterior()}, {"size", 8}, {"seed", 1}});
  REQUIRE(res->status == 202);
  const std::string id = json::parse(res->body)["job_id"];
  CHECK(h.wait(id)["status"] == "done");
  const json result = json::parse(h.client->Get("/api/jobs/" + id + "/result")->body);
  CHECK(result["curves"].size() == 8);
  CHECK(result["band"]["median"].size() == 16);
}
