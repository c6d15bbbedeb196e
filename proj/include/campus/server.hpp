#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace campus {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "campus-data";
  std::filesystem::path web_dir = "web";  // served at / when it exists
  unsigned job_workers = 2;
  unsigned compute_workers = 0;  // threads inside one job; 0 = all cores
};

/// REST API over the simulator. Fits, sweeps and ensembles run as jobs on a
/// small in-process pool; finished jobs live under data_dir/jobs/<id>/ and are
/// picked up again after a restart.
class ApiServer {
 public:
  explicit ApiServer(ServerOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and starts serving on a background thread; returns the bound port.
  int start();
  /// Serves on the calling thread until stop() is called.
  void run();
  void stop();
  /// Blocks until every queued and running job has finished.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking entry point used by `campus serve`.
int serve(const ServerOptions& options);

}  // namespace campus
