#include "opinionlens/service.hpp"

#include <httplib.h>

#include "opinionlens/error.hpp"
#include "opinionlens/eval.hpp"

namespace opinionlens {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  return {status, "application/json", j.dump()};
}

HttpResponse from_error(const Error& e) {
  const int status = e.code() == ErrorCode::kIoError ? 500 : 400;
  return error_response(status, error_code_name(e.code()), e.what());
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), started_(std::chrono::steady_clock::now()) {
  if (!options_.lazy) bundle_ = std::make_shared<const Bundle>(load_bundle(options_.bundle_path));
  setup_routes();
}

Service::Service(Bundle bundle, ServiceOptions options)
    : options_(std::move(options)),
      bundle_(std::make_shared<const Bundle>(std::move(bundle))),
      started_(std::chrono::steady_clock::now()) {
  setup_routes();
}

Service::~Service() = default;

std::shared_ptr<const Bundle> Service::bundle() const {
  std::lock_guard lock(load_mutex_);
  if (!bundle_ && options_.lazy) {
    try {
      bundle_ = std::make_shared<const Bundle>(load_bundle(options_.bundle_path));
    } catch (const Error&) {
      return nullptr;
    }
  }
  return bundle_;
}

HttpResponse Service::handle_health() const {
  const auto b = bundle();
  ordered_json j;
  j["status"] = b ? "ok" : "unavailable";
  j["model_version"] = b ? ordered_json(b->model_version) : ordered_json(nullptr);
  j["uptime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  return {b ? 200 : 503, "application/json", j.dump()};
}

HttpResponse Service::handle_predict(std::string_view body) const {
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = bundle();
  if (!b) return error_response(503, "bundle_unavailable", "no pipeline bundle loaded");
  if (body.size() > options_.cap_bytes) return error_response(413, "payload_too_large", "request exceeds size cap");

  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(400, "malformed_json", "body must be a JSON object");
  const auto text_it = req.find("text");
  if (text_it == req.end() || !text_it->is_string()) {
    return error_response(400, "malformed_request", "field 'text' (string) is required");
  }
  const std::string text = text_it->get<std::string>();
  Mode mode = Mode::kTwoStep;
  if (auto it = req.find("mode"); it != req.end() && !it->is_null()) {
    auto parsed = it->is_string() ? parse_mode(it->get<std::string>()) : std::nullopt;
    if (!parsed) return error_response(400, "malformed_request", "mode must be one_step or two_step");
    mode = *parsed;
  }
  std::vector<SentenceOverride> overrides;
  if (auto it = req.find("overrides"); it != req.end() && !it->is_null()) {
    if (!it->is_array()) return error_response(400, "malformed_request", "overrides must be an array");
    for (const auto& o : *it) {
      if (!o.is_object() || !o.contains("index") || !o.contains("keep") || !o["index"].is_number_unsigned() ||
          !o["keep"].is_boolean()) {
        return error_response(400, "bad_override_index", "each override needs index (unsigned) and keep (bool)");
      }
      overrides.push_back({o["index"].get<std::size_t>(), o["keep"].get<bool>()});
    }
  }

  try {
    const PolarityVerdict verdict = b->pipeline->explain(text, mode, overrides);
    ordered_json j = to_json(verdict);
    j["model_version"] = b->model_version;
    j["latency_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {200, "application/json", j.dump()};
  } catch (const Error& e) {
    return from_error(e);
  }
}

HttpResponse Service::handle_dilution(std::string_view body) const {
  const auto b = bundle();
  if (!b) return error_response(503, "bundle_unavailable", "no pipeline bundle loaded");
  if (body.size() > options_.cap_bytes) return error_response(413, "payload_too_large", "request exceeds size cap");
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(400, "malformed_json", "body must be a JSON object");
  try {
    DilutionSweepSpec spec;
    if (req.contains("ratios")) spec.ratios = req.at("ratios").get<std::vector<double>>();
    if (req.contains("seed")) spec.seed = req.at("seed").get<std::uint64_t>();
    if (req.contains("placement")) {
      auto p = parse_placement(req.at("placement").get<std::string>());
      if (!p) return error_response(400, "malformed_request", "placement must be interleave or append");
      spec.placement = *p;
    }
    Corpus corpus;
    std::size_t line = 0;
    for (const auto& d : req.at("corpus")) corpus.push_back(document_from_json(d, ++line));
    line = 0;
    if (req.contains("pool")) {
      for (const auto& d : req.at("pool")) spec.neutral_pool.push_back(document_from_json(d, ++line));
    }
    const auto rows = dilution_sweep(*b->pipeline, corpus, spec);
    return {200, "text/csv", sweep_to_csv(rows)};
  } catch (const json::exception& e) {
    return error_response(400, "malformed_request", e.what());
  } catch (const Error& e) {
    return from_error(e);
  }
}

// ---------------------------------------------------------------------------

void Service::setup_routes() {
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(options_.cap_bytes);
  auto reply = [this](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    if (!options_.allow_origin.empty()) res.set_header("Access-Control-Allow-Origin", options_.allow_origin);
  };
  server_->Post("/v1/predict", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_predict(req.body));
  });
  server_->Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_health());
  });
  server_->Post("/v1/experiment/dilution", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_dilution(req.body));
  });
  if (!options_.allow_origin.empty()) {
    server_->Options(R"(/v1/.*)", [this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", options_.allow_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  if (!options_.ui_dir.empty()) server_->set_mount_point("/", options_.ui_dir);
}

int Service::bind() {
  if (options_.port == 0) return server_->bind_to_any_port(options_.host);
  return server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

bool Service::is_running() const { return server_->is_running(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace opinionlens
