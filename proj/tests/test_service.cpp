#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "opinionlens/error.hpp"
#include "opinionlens/eval.hpp"
#include "opinionlens/service.hpp"
#include "opinionlens/util.hpp"
#include "test_support.hpp"

using namespace opinionlens;
using nlohmann::json;
using opinionlens::testing::small_setup;
using opinionlens::testing::temp_dir;

namespace {

// Bundle of the shared trained pipeline, saved once.
const std::string& bundle_dir() {
  static const std::string dir = [] {
    std::string d = temp_dir("svc-bundle");
    save_bundle(d, *small_setup().pipeline);
    return d;
  }();
  return dir;
}

Service& service() {
  static Service svc(ServiceOptions{.bundle_path = bundle_dir()});
  return svc;
}

std::string predict_body(const std::string& text, const std::string& mode = "two_step") {
  return json{{"text", text}, {"mode", mode}}.dump();
}

json without_latency(const std::string& body) {
  json j = json::parse(body);
  j.erase("latency_ms");
  return j;
}

}  // namespace

TEST(ServicePredict, SingleSentence) {
  const auto r = service().handle_predict(predict_body("Taxes are theft."));
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  EXPECT_EQ(j.at("sentences").size(), 1u);
  EXPECT_TRUE(j.contains("score"));
  EXPECT_TRUE(j.contains("latency_ms"));
  EXPECT_EQ(j.at("model_version"), sha256_hex(read_file(bundle_dir() + "/manifest.json")));
}

TEST(ServicePredict, MatchesLibraryScore) {
  const auto& s = small_setup();
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& text = s.polar_split.test[i].text;
    for (auto mode : {Mode::kOneStep, Mode::kTwoStep}) {
      const auto r = service().handle_predict(predict_body(text, std::string(to_string(mode))));
      ASSERT_EQ(r.status, 200);
      EXPECT_EQ(json::parse(r.body).at("score").get<double>(), s.pipeline->predict(text, mode).score);
    }
  }
}

TEST(ServicePredict, ErrorCodes) {
  auto code = [](const HttpResponse& r) { return json::parse(r.body).at("error").at("code").get<std::string>(); };
  auto r = service().handle_predict(R"({"text":"   "})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "empty_text");
  r = service().handle_predict("{nope");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "malformed_json");
  r = service().handle_predict(R"({"mode":"two_step"})");
  EXPECT_EQ(code(r), "malformed_request");
  r = service().handle_predict(R"({"text":"A b.","mode":"three_step"})");
  EXPECT_EQ(code(r), "malformed_request");
  r = service().handle_predict(R"({"text":"One here. Two there.","overrides":[{"index":5,"keep":true}]})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "bad_override_index");
}

TEST(ServicePredict, OverridesApply) {
  const std::string text = "Taxes are theft. Nice weather today.";
  const auto r = service().handle_predict(
      json{{"text", text}, {"overrides", json::array({json{{"index", 1}, {"keep", true}}})}}.dump());
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_TRUE(j.at("sentences")[1].at("kept").get<bool>());
  EXPECT_TRUE(j.at("sentences")[1].at("overridden").get<bool>());
}

TEST(ServicePredict, RepliesAreReproducible) {
  const std::string body = predict_body("Healthcare is a right. The game starts at noon.");
  const auto first = without_latency(service().handle_predict(body).body);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(without_latency(service().handle_predict(body).body), first);
}

TEST(ServicePredict, PayloadCap) {
  Service small(load_bundle(bundle_dir()), ServiceOptions{.cap_bytes = 64});
  const auto r = small.handle_predict(predict_body(std::string(100, 'a')));
  EXPECT_EQ(r.status, 413);
  EXPECT_EQ(small.handle_predict(predict_body("Short one.")).status, 200);
}

TEST(ServiceHealth, ReportsVersion) {
  const auto r = service().handle_health();
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("model_version"), load_bundle(bundle_dir()).model_version);
  EXPECT_GE(j.at("uptime_s").get<double>(), 0.0);
}

TEST(ServiceLazy, MissingBundleAnswers503ThenRecovers) {
  const std::string dir = temp_dir("svc-lazy") + "/bundle";
  Service lazy(ServiceOptions{.bundle_path = dir, .lazy = true});
  EXPECT_EQ(lazy.handle_health().status, 503);
  EXPECT_EQ(lazy.handle_predict(predict_body("Hello there.")).status, 503);
  save_bundle(dir, *small_setup().pipeline);
  EXPECT_EQ(lazy.handle_health().status, 200);
  EXPECT_EQ(lazy.handle_predict(predict_body("Hello there.")).status, 200);
}

TEST(ServiceEager, MissingBundleThrows) {
  EXPECT_THROW(Service(ServiceOptions{.bundle_path = "/nonexistent/bundle"}), Error);
}

TEST(ServiceDilution, RatioZeroMatchesCompareModesAndRepeats) {
  const auto& s = small_setup();
  json corpus = json::array(), pool = json::array();
  Corpus test(s.polar_split.test.begin(), s.polar_split.test.begin() + 20);
  for (const auto& d : test) corpus.push_back(json::parse(to_json(d).dump()));
  for (std::size_t i = 0; i < 20; ++i) pool.push_back(json::parse(to_json(s.neutral_split.test[i]).dump()));
  const std::string body = json{{"ratios", {0.0, 0.5}}, {"seed", 3}, {"corpus", corpus}, {"pool", pool}}.dump();
  const auto r = service().handle_dilution(body);
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "text/csv");
  EXPECT_EQ(service().handle_dilution(body).body, r.body);
  const auto report = compare_modes(*s.pipeline, test);
  DilutionSweepSpec spec;
  spec.ratios = {0.0};
  spec.seed = 3;
  const auto rows = dilution_sweep(*s.pipeline, test, spec);
  EXPECT_EQ(rows[0].accuracy, *report.one_step.accuracy);
  EXPECT_EQ(rows[1].accuracy, *report.two_step.accuracy);
  // Header plus both ratio-0 rows lead the service's CSV.
  const std::string expected = sweep_to_csv(rows);
  EXPECT_EQ(r.body.substr(0, expected.size()), expected);
}

TEST(ServiceHttp, LiveRoundTrip) {
  Service svc(load_bundle(bundle_dir()), ServiceOptions{.host = "127.0.0.1", .port = 0, .allow_origin = "*"});
  const int port = svc.bind();
  ASSERT_GT(port, 0);
  std::thread server([&] { svc.listen_after_bind(); });
  svc.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto pred = client.Post("/v1/predict", predict_body("Taxes are theft."), "application/json");
  ASSERT_TRUE(pred);
  EXPECT_EQ(pred->status, 200);
  EXPECT_EQ(pred->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(without_latency(pred->body), without_latency(svc.handle_predict(predict_body("Taxes are theft.")).body));
  auto bad = client.Post("/v1/predict", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  svc.stop();
  server.join();
  EXPECT_FALSE(svc.is_running());
}
