#include "campus/server.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "campus/abc.hpp"
#include "campus/ensemble.hpp"
#include "campus/errors.hpp"
#include "campus/io.hpp"
#include "campus/policy.hpp"

namespace campus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// A request that parses but describes an impossible state (HTTP 422).
struct Unprocessable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown posterior or job (HTTP 404).
struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Status { queued, running, done, failed };

const char* status_name(Status s) {
  switch (s) {
    case Status::queued: return "queued";
    case Status::running: return "running";
    case Status::done: return "done";
    case Status::failed: return "failed";
  }
  return "failed";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct Job {
  std::string id;
  std::string kind;
  fs::path dir;
  std::atomic<Status> status{Status::queued};
  std::atomic<double> progress{0.0};
  std::mutex mutex;  // guards error
  std::string error;
  std::function<json(Job&)> work;

  void advance(double fraction) {
    double seen = progress.load();
    while (fraction > seen && !progress.compare_exchange_weak(seen, fraction)) {
    }
  }

  json record() {
    json j{{"id", id},
           {"kind", kind},
           {"status", status_name(status.load())},
           {"progress", progress.load()}};
    if (status.load() == Status::done) j["result"] = "/api/jobs/" + id + "/result";
    std::lock_guard lock(mutex);
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

json posterior_json(const std::string& id, const PosteriorSample& posterior) {
  json points = json::array();
  for (std::size_t i = 0; i < posterior.points.size(); ++i) {
    const auto& p = posterior.points[i];
    points.push_back({{"alpha", p.alpha},
                      {"beta", p.beta},
                      {"i_out", p.i_out},
                      {"accepted", posterior.counts[i].accepted},
                      {"attempted", posterior.counts[i].attempted}});
  }
  return {{"id", id}, {"size", posterior.size()}, {"points", points}};
}

PosteriorSample posterior_from(const json& j) {
  PosteriorSample posterior;
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
    throw InvalidArgument("posterior must be {\"points\": [...]}");
  for (const auto& p : j["points"]) {
    posterior.points.push_back({p.at("alpha").get<double>(), p.at("beta").get<double>(),
                                p.at("i_out").get<Count>()});
    const Count accepted = p.at("accepted").get<Count>();
    const Count attempted = p.value("attempted", std::max<Count>(accepted, 1));
    if (accepted < 0 || attempted < 1 || accepted > attempted)
      throw InvalidArgument("posterior counts need 0 <= accepted <= attempted");
    posterior.counts.push_back({accepted, attempted});
  }
  if (posterior.empty()) throw InvalidArgument("posterior has no accepted draws");
  return posterior;
}

// Model params, initial state and horizon shared by every request kind.
SimConfig sim_config_from(const json& body) {
  SimConfig config;
  if (body.contains("params")) config.base = params_from_json(body["params"]);
  config.base.validate();
  if (body.contains("horizon_days")) {
    if (!body["horizon_days"].is_number_integer()) throw InvalidArgument("horizon_days must be an integer");
    config.horizon_days = body["horizon_days"].get<int>();
    if (config.horizon_days < 1) throw InvalidArgument("horizon_days must be at least 1");
  }
  if (body.contains("init")) {
    config.init = state_from_json(body["init"]);
    try {
      config.init.validate(config.base.n_total);
    } catch (const InvalidArgument& e) {
      throw Unprocessable(e.what());
    }
  } else {
    config.init = CompartmentState::seeded(config.base.n_total, std::min<Count>(10, config.base.n_total));
  }
  if (body.contains("tolerance")) {
    const json& t = body["tolerance"];
    config.tolerance.weeks = t.value("weeks", config.tolerance.weeks);
    config.tolerance.cases = t.value("cases", config.tolerance.cases);
    config.tolerance.peak_floor = t.value("peak_floor", config.tolerance.peak_floor);
  }
  config.validate();
  return config;
}

std::uint64_t seed_from(const json& body) {
  if (!body.contains("seed")) return 20201;
  if (!body["seed"].is_number_unsigned()) throw InvalidArgument("seed must be a non-negative integer");
  return body["seed"].get<std::uint64_t>();
}

int positive_int(const json& body, const char* key, int fallback) {
  if (!body.contains(key)) return fallback;
  if (!body[key].is_number_integer() || body[key].get<long long>() < 1)
    throw InvalidArgument(std::string(key) + " must be a positive integer");
  return body[key].get<int>();
}

}  // namespace

struct ApiServer::Impl {
  ServerOptions options;
  httplib::Server http;
  std::thread http_thread;

  std::mutex mutex;
  std::condition_variable wake;
  std::condition_variable idle;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::deque<std::shared_ptr<Job>> queue;
  int next_id = 1;
  int active = 0;
  bool stopping = false;
  std::vector<std::thread> workers;

  explicit Impl(ServerOptions opts) : options(std::move(opts)) {
    fs::create_directories(options.data_dir / "jobs");
    restore();
    const unsigned n = std::max(1u, options.job_workers);
    for (unsigned i = 0; i < n; ++i) workers.emplace_back([this] { work_loop(); });
    routes();
  }

  ~Impl() {
    {
      std::lock_guard lock(mutex);
      stopping = true;
    }
    wake.notify_all();
    for (auto& w : workers) w.join();
  }

  // Completed jobs from an earlier run; anything unfinished is marked failed.
  void restore() {
    for (const auto& entry : fs::directory_iterator(options.data_dir / "jobs")) {
      const fs::path record = entry.path() / "job.json";
      if (!fs::exists(record)) continue;
      json j;
      try {
        j = json::parse(read_file(record));
      } catch (const json::exception&) {
        continue;
      }
      auto job = std::make_shared<Job>();
      job->id = j.value("id", entry.path().filename().string());
      job->kind = j.value("kind", std::string("unknown"));
      job->dir = entry.path();
      const std::string status = j.value("status", std::string("failed"));
      const bool done = status == "done" && fs::exists(entry.path() / "result.json");
      job->status = done ? Status::done : Status::failed;
      job->progress = done ? 1.0 : j.value("progress", 0.0);
      job->error = done ? "" : j.value("error", std::string("interrupted by a server restart"));
      const auto dash = job->id.rfind('-');
      if (dash != std::string::npos) {
        try {
          next_id = std::max(next_id, std::stoi(job->id.substr(dash + 1)) + 1);
        } catch (const std::exception&) {
        }
      }
      jobs[job->id] = job;
    }
  }

  void persist(Job& job) {
    write_text(job.dir / "job.json", dump(job.record()));
  }

  std::shared_ptr<Job> submit(const std::string& kind, std::function<json(Job&)> work) {
    auto job = std::make_shared<Job>();
    job->kind = kind;
    job->work = std::move(work);
    {
      std::lock_guard lock(mutex);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%06d", kind.c_str(), next_id++);
      job->id = buf;
      job->dir = options.data_dir / "jobs" / job->id;
      fs::create_directories(job->dir);
      persist(*job);
      jobs[job->id] = job;
      queue.push_back(job);
    }
    wake.notify_one();
    return job;
  }

  void work_loop() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mutex);
        wake.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping && queue.empty()) return;
        job = queue.front();
        queue.pop_front();
        ++active;
      }
      job->status = Status::running;
      try {
        const json result = job->work(*job);
        write_text(job->dir / "result.json", dump(result));
        job->advance(1.0);
        job->status = Status::done;
      } catch (const std::exception& e) {
        {
          std::lock_guard lock(job->mutex);
          job->error = e.what();
        }
        job->status = Status::failed;
      }
      job->work = nullptr;
      persist(*job);
      {
        std::lock_guard lock(mutex);
        --active;
      }
      idle.notify_all();
    }
  }

  void wait_idle() {
    std::unique_lock lock(mutex);
    idle.wait(lock, [&] { return queue.empty() && active == 0; });
  }

  std::shared_ptr<Job> find(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = jobs.find(id);
    if (it == jobs.end()) throw NotFound("unknown job '" + id + "'");
    return it->second;
  }

  // A posterior is the acceptance surface of a finished fit job.
  PosteriorSample posterior(const std::string& id) {
    if (id.find_first_of("/\\.") != std::string::npos) throw NotFound("unknown posterior '" + id + "'");
    const fs::path file = options.data_dir / "jobs" / id / "acceptance_surface.csv";
    if (!fs::exists(file)) throw NotFound("unknown posterior '" + id + "'");
    return read_acceptance_surface_csv(file);
  }

  PosteriorSample posterior_for(const json& body) {
    if (body.contains("posterior_id")) {
      if (!body["posterior_id"].is_string()) throw InvalidArgument("posterior_id must be a string");
      return posterior(body["posterior_id"].get<std::string>());
    }
    if (body.contains("posterior")) return posterior_from(body["posterior"]);
    throw InvalidArgument("give posterior_id or an inline posterior");
  }

  // ---------------------------------------------------------------- handlers

  json simulate(const json& body) {
    const SimConfig config = sim_config_from(body);
    RngStream rng(seed_from(body));
    return trajectory_summary(campus::simulate(config.base, config.init, config.horizon_days, rng));
  }

  std::shared_ptr<Job> fit(const json& body) {
    const SimConfig config = sim_config_from(body);
    if (!body.contains("observed") || !body["observed"].is_array())
      throw InvalidArgument("observed must be a list of weekly case counts");
    WeeklySeries observed;
    for (const auto& c : body["observed"]) {
      if (!c.is_number_integer() || c.get<Count>() < 0)
        throw InvalidArgument("observed counts must be non-negative integers");
      observed.push_back(c.get<Count>());
    }
    const PeakSet peaks = detect_peaks(observed, config.tolerance.peak_floor);
    if (peaks.empty()) throw InvalidArgument("observed series has no peaks");
    const PriorGrid grid = PriorGrid::uniform(positive_int(body, "grid_points", 11));
    grid.validate();
    AbcOptions abc;
    abc.n_traj = positive_int(body, "n_traj", 200);
    abc.base_seed = seed_from(body);
    abc.workers = options.compute_workers;
    const double level = body.value("credible_level", 0.95);
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("credible_level must lie in (0, 1)");

    return submit("fit", [=, this](Job& job) {
      AbcOptions opt = abc;
      opt.progress = [&job](double f) { job.advance(f); };
      const PosteriorSample posterior = run_abc(build_grid(grid), peaks, config, opt);
      std::ostringstream surface, draws;
      write_acceptance_surface_csv(surface, posterior);
      write_posterior_draws_csv(draws, posterior);
      write_text(job.dir / "acceptance_surface.csv", surface.str());
      write_text(job.dir / "posterior_draws.csv", draws.str());
      json result{{"posterior_id", job.id},
                  {"observed_peaks", to_json(peaks)},
                  {"posterior_size", posterior.size()},
                  {"n_traj", opt.n_traj},
                  {"grid_points", grid.alpha.points},
                  {"seed", opt.base_seed}};
      if (posterior.empty()) {
        result["intervals"] = nullptr;
      } else {
        result["intervals"] = to_json(marginal_ci(posterior, level), posterior);
        write_text(job.dir / "intervals.json", dump(result["intervals"]));
      }
      return result;
    });
  }

  std::shared_ptr<Job> sweep(const json& body) {
    std::vector<Strategy> strategies;
    if (body.contains("strategies")) {
      if (!body["strategies"].is_array()) throw InvalidArgument("strategies must be a list");
      for (const auto& s : body["strategies"]) strategies.push_back(strategy_from_json(s));
      if (strategies.empty()) throw InvalidArgument("strategy list is empty");
    } else {
      strategies = default_strategy_grid();
    }
    const SimConfig config = sim_config_from(body);
    SweepOptions sweep;
    sweep.n_per_strategy = positive_int(body, "n", 200);
    sweep.base_seed = seed_from(body);
    sweep.common_random_numbers = body.value("common_random_numbers", true);
    sweep.workers = options.compute_workers;
    const PosteriorSample posterior = posterior_for(body);

    return submit("sweep", [=](Job& job) {
      SweepOptions opt = sweep;
      opt.progress = [&job](double f) { job.advance(f); };
      const auto reports = run_policy_sweep(strategies, posterior, config, opt);
      return to_json(reports, opt);
    });
  }

  std::shared_ptr<Job> ensemble(const json& body) {
    const SimConfig config = sim_config_from(body);
    const int size = positive_int(body, "size", 200);
    const std::uint64_t seed = seed_from(body);
    const PosteriorSample posterior = posterior_for(body);
    const unsigned threads = options.compute_workers;

    return submit("ensemble", [=](Job&) {
      RngStream pick(derive_seed(seed, 0xe45e));
      const auto draws = draw_posterior_params(posterior, static_cast<std::size_t>(size), pick);
      const CurveMatrix curves = simulate_ensemble(draws, config, seed, threads);
      json provenance = json::array();
      for (const auto& p : curves.provenance)
        provenance.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"i_out", p.i_out}});
      return json{{"band", to_json(functional_band(curves))},
                  {"curves", curves.curves},
                  {"provenance", provenance},
                  {"seed", seed}};
    });
  }

  // ------------------------------------------------------------------ routes

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(dump(body), "application/json");
  }

  static void guarded(httplib::Response& res, const std::function<void()>& body) {
    try {
      body();
    } catch (const json::parse_error& e) {
      reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const InvalidArgument& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const Unprocessable& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const NotFound& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  }

  static json body_of(const httplib::Request& req) {
    json j = req.body.empty() ? json::object() : json::parse(req.body);
    if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
    return j;
  }

  void accepted(httplib::Response& res, const std::shared_ptr<Job>& job) {
    res.set_header("Location", "/api/jobs/" + job->id);
    reply(res, 202, {{"job_id", job->id}, {"status", status_name(job->status.load())}});
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"version", version_string()}});
    });
    http.Get("/api/strategies/default", [](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& s : default_strategy_grid()) list.push_back(to_json(s));
      reply(res, 200, list);
    });
    http.Post("/api/simulate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, simulate(body_of(req))); });
    });
    http.Post("/api/fit", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { accepted(res, fit(body_of(req))); });
    });
    http.Post("/api/sweep", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { accepted(res, sweep(body_of(req))); });
    });
    http.Post("/api/ensemble", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { accepted(res, ensemble(body_of(req))); });
    });
    http.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, find(req.matches[1])->record()); });
    });
    http.Get(R"(/api/jobs/([A-Za-z0-9_-]+)/result)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto job = find(req.matches[1]);
                 if (job->status.load() != Status::done) return reply(res, 409, job->record());
                 res.status = 200;
                 res.set_content(read_file(job->dir / "result.json"), "application/json");
               });
             });
    http.Get(R"(/api/posterior/([A-Za-z0-9_-]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const std::string id = req.matches[1];
                 json j = posterior_json(id, posterior(id));
                 const fs::path intervals = options.data_dir / "jobs" / id / "intervals.json";
                 j["intervals"] = fs::exists(intervals) ? json::parse(read_file(intervals)) : json(nullptr);
                 reply(res, 200, j);
               });
             });
    if (!options.web_dir.empty() && fs::is_directory(options.web_dir))
      http.set_mount_point("/", options.web_dir.string());
  }
};

ApiServer::ApiServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  int port = impl_->options.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (!impl_->http.bind_to_port(impl_->options.host, port)) {
    port = -1;
  }
  if (port < 0) throw std::runtime_error("cannot bind " + impl_->options.host + ":" +
                                         std::to_string(impl_->options.port));
  impl_->http_thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void ApiServer::run() {
  if (!impl_->http.listen(impl_->options.host, impl_->options.port))
    throw std::runtime_error("cannot listen on " + impl_->options.host + ":" +
                             std::to_string(impl_->options.port));
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->http_thread.joinable()) impl_->http_thread.join();
}

void ApiServer::wait_idle() { impl_->wait_idle(); }

int serve(const ServerOptions& options) {
  ApiServer server(options);
  std::cerr << "listening on http://" << options.host << ":" << options.port << "\n";
  server.run();
  return 0;
}

}  // namespace campus
