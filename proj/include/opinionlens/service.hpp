#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "opinionlens/pipeline.hpp"

namespace httplib {
class Server;
}

namespace opinionlens {

struct ServiceOptions {
  std::string bundle_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t cap_bytes = 1 << 20;
  // Defer loading to the first request; failures answer 503 and are retried.
  bool lazy = false;
  std::string ui_dir;
  std::string allow_origin;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// JSON API over a loaded pipeline bundle. Handlers are callable directly
// (without sockets) and are safe to run concurrently.
class Service {
 public:
  // Eager mode throws if the bundle cannot be loaded.
  explicit Service(ServiceOptions options);
  // Wraps an already-loaded bundle.
  Service(Bundle bundle, ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle_predict(std::string_view body) const;
  HttpResponse handle_health() const;
  HttpResponse handle_dilution(std::string_view body) const;

  // Binds the configured address; port 0 picks a free port. Returns the bound
  // port or -1.
  int bind();
  // Serves until stop(); in-flight requests complete before it returns.
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  std::shared_ptr<const Bundle> bundle() const;
  void setup_routes();

  ServiceOptions options_;
  mutable std::mutex load_mutex_;
  mutable std::shared_ptr<const Bundle> bundle_;
  std::chrono::steady_clock::time_point started_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace opinionlens
