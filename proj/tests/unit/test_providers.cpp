#include <gtest/gtest.h>

#include <fstream>

#include <cstdlib>
#include <set>
#include <thread>

// Must match the core library build of httplib (ODR).
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "hallucount/core/error.hpp"
#include "hallucount/providers/digest.hpp"
#include "hallucount/providers/hash_embedder.hpp"
#include "hallucount/providers/rate_limiter.hpp"
#include "hallucount/providers/remote.hpp"
#include "hallucount/providers/replay.hpp"
#include "hallucount/core/text.hpp"
#include "support.hpp"

namespace hallucount::providers {
namespace {

using testing::ScriptedCompletion;
using testing::TempDir;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

// ---------------------------------------------------------------------------
// hash embedder

TEST(HashEmbed, Purity) {
  EXPECT_EQ(hash_embed("knee pain", 64), hash_embed("knee pain", 64));
  EXPECT_DOUBLE_EQ(cosine_similarity(hash_embed("knee pain", 64), hash_embed("knee pain", 64)), 1.0);
  EXPECT_EQ(hash_embed("Knee, PAIN!", 64), hash_embed("knee pain", 64));
  EXPECT_NEAR(hash_embed("a b c d e", 16).norm(), 1.0, 1e-12);
}

TEST(HashEmbed, Errors) {
  EXPECT_EQ(code_of([] { hash_embed("x", 15); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { hash_embed(" ... ", 64); }), ErrorCode::kZeroVector);
}

TEST(HashEmbed, DisjointSingleTokensOneHotOracle) {
  // Each single-token text is a one-hot vector on its bucket, so the cosine
  // is 1 on a collision and 0 otherwise.
  const auto bq = hash_bucket("qqq", 64);
  const auto bz = hash_bucket("zzz", 64);
  const auto q = hash_embed("qqq", 64);
  EXPECT_DOUBLE_EQ(q[bq], 1.0);
  const double expected = bq == bz ? 1.0 : 0.0;
  EXPECT_DOUBLE_EQ(cosine_similarity(q, hash_embed("zzz", 64)), expected);

  // Brute force: pairs of distinct tokens agree with the bucket oracle.
  for (int i = 0; i < 40; ++i) {
    for (int j = i + 1; j < 40; ++j) {
      const std::string a = "tok" + std::to_string(i), b = "tok" + std::to_string(j);
      const double c = cosine_similarity(hash_embed(a, 16), hash_embed(b, 16));
      EXPECT_DOUBLE_EQ(c, hash_bucket(a, 16) == hash_bucket(b, 16) ? 1.0 : 0.0);
    }
  }
}

TEST(HashEmbed, DisjointTokenStrictlyDecreasesSimilarity) {
  SeededRng rng(3);
  int checked = 0;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> bag;
    std::set<std::size_t> used;
    for (std::size_t i = 0, k = 1 + rng.below(6); i < k; ++i) {
      const std::string tok = "w" + std::to_string(rng.below(30));
      bag.push_back(tok);
      used.insert(hash_bucket(tok, 256));
    }
    const std::string extra = "extra" + std::to_string(iter);
    if (used.count(hash_bucket(extra, 256))) continue;  // collision, excluded
    std::string base = text::join(bag, " ");
    std::string shuffled = bag.back();
    for (std::size_t i = 0; i + 1 < bag.size(); ++i) shuffled += " " + bag[i];
    EXPECT_DOUBLE_EQ(cosine_similarity(hash_embed(base, 256), hash_embed(shuffled, 256)), 1.0);
    EXPECT_LT(cosine_similarity(hash_embed(base, 256), hash_embed(base + " " + extra, 256)), 1.0);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(HashEmbedder, BatchContract) {
  HashEmbedder e(64);
  const std::vector<std::string> same = {"knee pain", "knee pain"};
  auto out = e.embed_batch(same);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], out[1]);
  const std::vector<std::string> abc = {"a", "b", "c"};
  out = e.embed_batch(abc);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& v : out) EXPECT_EQ(v.dim(), 64u);
  EXPECT_EQ(code_of([&] { e.embed_batch({}); }), ErrorCode::kEmptyInput);
  const std::vector<std::string> with_empty = {"a", ""};
  EXPECT_EQ(code_of([&] { e.embed_batch(with_empty); }), ErrorCode::kEmptyInput);
}

// ---------------------------------------------------------------------------
// requests and digests

TEST(Request, Validate) {
  CompletionRequest r{"", 10, 0.0, std::nullopt};
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::kInvalidArgument);
  r.prompt = "p";
  r.max_output_length = 0;
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::kInvalidArgument);
  r.max_output_length = 5;
  r.temperature = -0.1;
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Digest, CoversEveryField) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const CompletionRequest base{"p", 10, 0.0, std::nullopt};
  std::set<std::string> seen = {request_digest(base)};
  auto variant = base;
  variant.prompt = "q";
  seen.insert(request_digest(variant));
  variant = base;
  variant.max_output_length = 11;
  seen.insert(request_digest(variant));
  variant = base;
  variant.temperature = 0.5;
  seen.insert(request_digest(variant));
  variant = base;
  variant.seed = 1;
  seen.insert(request_digest(variant));
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(request_digest(base), request_digest(CompletionRequest{"p", 10, 0.0, std::nullopt}));
  EXPECT_NE(embedding_digest("a"), embedding_digest("b"));
}

// ---------------------------------------------------------------------------
// replay

TEST(Replay, LookupAndMiss) {
  auto store = std::make_shared<FixtureStore>();
  const CompletionRequest d1{"prompt one", 100, 0.0, std::nullopt};
  EXPECT_TRUE(store->insert({request_digest(d1), FixtureKind::kCompletion, "- fact A\n- fact B"}));
  EXPECT_FALSE(store->insert({request_digest(d1), FixtureKind::kCompletion, "other"}));
  ReplayCompletionProvider p("replay", store);
  EXPECT_EQ(p.complete(d1), "- fact A\n- fact B");
  EXPECT_EQ(code_of([&] { p.complete({"prompt two", 100, 0.0, std::nullopt}); }),
            ErrorCode::kFixtureMiss);
  ReplayEmbeddingProvider e("replay", store);
  const std::vector<std::string> texts = {"x"};
  EXPECT_EQ(code_of([&] { e.embed_batch(texts); }), ErrorCode::kFixtureMiss);
}

TEST(Replay, RecordThenReplayIsByteIdentical) {
  TempDir dir;
  auto store = std::make_shared<FixtureStore>();
  auto live = std::make_shared<ScriptedCompletion>(
      [](const CompletionRequest& r) { return "echo:" + r.prompt + "\n\"q\" \\ ü"; });
  RecordingCompletionProvider rec(live, store);
  auto embed_live = std::make_shared<HashEmbedder>(32);
  RecordingEmbeddingProvider rec_e(embed_live, store);

  std::vector<CompletionRequest> reqs;
  std::vector<std::string> answers;
  for (int i = 0; i < 10; ++i) {
    reqs.push_back({"prompt " + std::to_string(i), 64, i % 2 ? 0.7 : 0.0,
                    i % 2 ? std::optional<std::int64_t>(i) : std::nullopt});
    answers.push_back(rec.complete(reqs.back()));
  }
  const std::vector<std::string> texts = {"knee pain", "0.1 mg daily", "knee pain"};
  const auto vectors = rec_e.embed_batch(texts);
  store->save(dir / "fx.jsonl");

  auto loaded = std::make_shared<const FixtureStore>(FixtureStore::load(dir / "fx.jsonl"));
  EXPECT_EQ(loaded->size(), 12u);
  ReplayCompletionProvider replay("r", loaded);
  for (std::size_t i = 0; i < reqs.size(); ++i) EXPECT_EQ(replay.complete(reqs[i]), answers[i]);
  ReplayEmbeddingProvider replay_e("r", loaded);
  const auto replayed = replay_e.embed_batch(texts);
  ASSERT_EQ(replayed.size(), vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) EXPECT_EQ(replayed[i], vectors[i]);

  // Re-saving produces the same bytes.
  loaded->save(dir / "fx2.jsonl");
  EXPECT_EQ(testing::read_file(dir / "fx.jsonl"), testing::read_file(dir / "fx2.jsonl"));
}

TEST(Replay, BadFixtureLine) {
  TempDir dir;
  {
    std::ofstream f(dir / "bad.jsonl");
    f << "{\"digest\":\"x\",\"kind\":\"completion\",\"response\":\"a\"}\n{\"digest\":1}\n";
  }
  try {
    FixtureStore::load(dir / "bad.jsonl");
    FAIL();
  } catch (const SchemaViolation& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

// ---------------------------------------------------------------------------
// rate limiter

struct FakeClock {
  LimiterClock::time_point now{};
  std::vector<LimiterClock::duration> sleeps;
  LimiterClock clock() {
    return {[this] { return now; }, [this](LimiterClock::duration d) {
              sleeps.push_back(d);
              now += d;
            }};
  }
};

TEST(RateLimiter, RollingWindow) {
  using namespace std::chrono_literals;
  FakeClock fc;
  auto limiter = RateLimiter::per_minute(60, fc.clock());
  std::vector<LimiterClock::time_point> admitted;
  for (int i = 0; i < 200; ++i) {
    fc.now += 100ms;
    admitted.push_back(limiter.acquire());
  }
  // At most 60 admissions in any rolling 60 s window.
  for (std::size_t i = 0; i + 60 < admitted.size(); ++i) {
    EXPECT_GE(admitted[i + 60] - admitted[i], std::chrono::minutes(1));
  }
  EXPECT_FALSE(fc.sleeps.empty());
  // The first 60 need no wait.
  RateLimiter fresh(3, 1s, fc.clock());
  fc.sleeps.clear();
  for (int i = 0; i < 3; ++i) fresh.acquire();
  EXPECT_TRUE(fc.sleeps.empty());
  fresh.acquire();
  ASSERT_EQ(fc.sleeps.size(), 1u);
  EXPECT_EQ(fc.sleeps[0], 1s);
}

// ---------------------------------------------------------------------------
// remote provider against a local server

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ProviderConfig local_config(const std::string& endpoint) {
  ProviderConfig c;
  c.endpoint = endpoint;
  c.timeout = std::chrono::milliseconds(5000);
  c.max_retries = 3;
  c.backoff_base = std::chrono::milliseconds(1);
  c.requests_per_minute = 1000;
  return c;
}

LimiterClock no_sleep() {
  return {[] { return std::chrono::steady_clock::now(); }, [](LimiterClock::duration) {}};
}

constexpr const char* kSecret = "sk-test-0123456789abcdef";

TEST(Remote, CompletionAndRetryOn429) {
  ::setenv("HALLUCOUNT_TEST_KEY", kSecret, 1);
  LocalServer srv;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body;
  srv.server().Post("/complete", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 429;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"text":"3"}]})", "application/json");
  });
  auto cfg = local_config(srv.url("/complete"));
  cfg.credential_ref = "HALLUCOUNT_TEST_KEY";
  cfg.model = "m1";
  RemoteCompletionProvider p("remote", cfg, no_sleep());
  EXPECT_EQ(p.complete({"count please", 16, 0.0, std::nullopt}), "3");
  EXPECT_EQ(hits.load(), 3);
  EXPECT_EQ(seen_auth, std::string("Bearer ") + kSecret);
  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["prompt"], "count please");
  EXPECT_EQ(body["model"], "m1");
  EXPECT_FALSE(body.contains("seed"));

  // The serialized config names the variable, never its value.
  const nlohmann::json j = cfg;
  EXPECT_EQ(j.dump().find(kSecret), std::string::npos);
  EXPECT_NE(j.dump().find("HALLUCOUNT_TEST_KEY"), std::string::npos);
}

TEST(Remote, RateLimitedAfterRetryBudget) {
  LocalServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/c", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 429;
  });
  auto cfg = local_config(srv.url("/c"));
  cfg.max_retries = 2;
  RemoteCompletionProvider p("remote", cfg, no_sleep());
  EXPECT_EQ(code_of([&] { p.complete({"x", 4, 0.0, std::nullopt}); }), ErrorCode::kRateLimited);
  EXPECT_EQ(hits.load(), 3);
}

TEST(Remote, AuthFailureIsImmediateAndRedacted) {
  ::setenv("HALLUCOUNT_TEST_KEY", kSecret, 1);
  LocalServer srv;
  std::atomic<int> hits{0};
  srv.server().Post("/c", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    res.status = 401;
    res.set_content("bad key " + req.get_header_value("Authorization"), "text/plain");
  });
  srv.server().Post("/echo", [&](const httplib::Request& req, httplib::Response& res) {
    res.status = 400;
    res.set_content("rejected " + req.get_header_value("Authorization"), "text/plain");
  });
  auto cfg = local_config(srv.url("/c"));
  cfg.credential_ref = "HALLUCOUNT_TEST_KEY";
  RemoteCompletionProvider p("remote", cfg, no_sleep());
  try {
    p.complete({"x", 4, 0.0, std::nullopt});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthFailure);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
  }
  EXPECT_EQ(hits.load(), 1);

  // A 4xx body echoing the header is redacted.
  cfg.endpoint = srv.url("/echo");
  RemoteCompletionProvider echo("remote", cfg, no_sleep());
  try {
    echo.complete({"x", 4, 0.0, std::nullopt});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderFailure);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("***"), std::string::npos);
  }
}

TEST(Remote, MissingCredentialVariable) {
  ::unsetenv("HALLUCOUNT_UNSET_KEY");
  auto cfg = local_config("http://127.0.0.1:9/c");
  cfg.credential_ref = "HALLUCOUNT_UNSET_KEY";
  RemoteCompletionProvider p("remote", cfg, no_sleep());
  EXPECT_EQ(code_of([&] { p.complete({"x", 4, 0.0, std::nullopt}); }), ErrorCode::kAuthFailure);
}

TEST(Remote, Embeddings) {
  LocalServer srv;
  srv.server().Post("/e", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < body["input"].size(); ++i) {
      data.push_back({{"embedding", {1.0, static_cast<double>(i)}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  RemoteEmbeddingProvider p("remote-e", local_config(srv.url("/e")), no_sleep());
  const std::vector<std::string> texts = {"a", "b"};
  const auto out = p.embed_batch(texts);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[1][1], 1.0);
}

TEST(Remote, ConfigValidation) {
  auto cfg = local_config("ftp://x");
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);
  cfg = local_config("http://localhost:1/x");
  cfg.requests_per_minute = 0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);
  nlohmann::json j = {{"endpoint", "http://x/"}, {"api_key", "inline"}};
  EXPECT_EQ(code_of([&] { j.get<ProviderConfig>(); }), ErrorCode::kConfig);
}

}  // namespace
}  // namespace hallucount::providers
