#include <doctest.h>

#include <set>
#include <sstream>

#include "dataset.hpp"
#include "error.hpp"
#include "fewshot.hpp"
#include "helpers.hpp"

using namespace txtest;

namespace {

std::string line_of(const GuidedSample& gs) { return guided_sample_to_json(gs).dump(); }

Dataset three_sample_fixture() {
  Dataset ds;
  ds.samples = {guided(sample("s1", "a", "Paris")), guided(sample("s2", "a", "Rome")),
                guided(sample("s3", "b", "Oslo"))};
  return ds;
}

int data_error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return 0;
}

}  // namespace

TEST_CASE("empty dataset file has zero counters") {
  std::istringstream in("");
  const Dataset ds = read_dataset(in);
  CHECK(ds.samples.empty());
  CHECK(ds.counters() == DatasetCounters{0, 0, 0});
}

TEST_CASE("counters over three lines, one with exemplars") {
  GuidedSample with = guided(sample("s2", "get_weather", "Rome"));
  with.exemplars = {example("get_weather", "Weather in Lima?", "Lima")};
  with.provenance = Provenance::Random;
  std::istringstream in(line_of(guided(sample("s1"))) + "\n" + line_of(with) + "\n\n" +
                        line_of(guided(sample("s3", "get_weather", "Oslo"))) + "\n");
  const Dataset ds = read_dataset(in);
  REQUIRE(ds.samples.size() == 3);
  CHECK(ds.samples[1].base.id == "s2");
  CHECK(ds.counters() == DatasetCounters{3, 1, 2});
}

TEST_CASE("unknown ground-truth tool names the line") {
  Json j = guided_sample_to_json(guided(sample("s1")));
  j["ground_truth"][0]["name"] = "x";
  std::istringstream in(j.dump() + "\n");
  try {
    read_dataset(in);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Data);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("malformed and duplicate lines are data errors") {
  std::istringstream bad("{not json}\n");
  CHECK(data_error_code([&] { read_dataset(bad); }) == 2);
  std::istringstream dup(line_of(guided(sample("s1"))) + "\n" + line_of(guided(sample("s1"))) + "\n");
  try {
    read_dataset(dup);
    FAIL("expected duplicate id error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("missing required argument is rejected") {
  Sample s = sample("s1");
  s.ground_truth[0].arguments = Json::object();
  CHECK_THROWS_AS(validate_sample(s), Error);
}

TEST_CASE("dataset round-trips through JSONL") {
  Dataset ds = build_random_fewshots(three_sample_fixture(), 1, 3);
  ds.samples[2].detached = true;
  std::ostringstream out;
  write_dataset(out, ds);
  std::istringstream in(out.str());
  const Dataset back = read_dataset(in);
  std::ostringstream again;
  write_dataset(again, back);
  CHECK(again.str() == out.str());
  CHECK(back.samples[2].detached);
}

TEST_CASE("provenance defaults to none and must agree with exemplars") {
  Json j = guided_sample_to_json(guided(sample("s1")));
  j.erase("provenance");
  CHECK(guided_sample_from_json(j).provenance == Provenance::None);
  j["provenance"] = "random";
  std::istringstream in(j.dump() + "\n");
  CHECK_THROWS_AS(read_dataset(in), Error);
}

TEST_CASE("random few-shots on the three-sample fixture") {
  const Dataset out = build_random_fewshots(three_sample_fixture(), 1, 11);
  const auto& s1 = out.samples[0];
  const auto& s2 = out.samples[1];
  const auto& s3 = out.samples[2];
  REQUIRE(s1.exemplars.size() == 1);
  CHECK(s1.exemplars[0].question == s2.base.query);
  CHECK(s1.exemplars[0].answers == s2.base.ground_truth);
  REQUIRE(s2.exemplars.size() == 1);
  CHECK(s2.exemplars[0].question == s1.base.query);
  CHECK(s3.exemplars.empty());
  CHECK(s3.provenance == Provenance::None);
  CHECK(s1.provenance == Provenance::Random);
  CHECK(out.counters() == DatasetCounters{3, 2, 1});
}

TEST_CASE("single-sample dataset gets no exemplars") {
  Dataset ds;
  ds.samples = {guided(sample("only"))};
  const Dataset out = build_random_fewshots(ds, 1, 0);
  CHECK(out.samples[0].provenance == Provenance::None);
}

TEST_CASE("a donor repeating the target's own pair is never drawn") {
  Dataset ds;
  Sample twin = sample("twin", "a", "Paris");
  Sample orig = sample("orig", "a", "Paris");
  twin.query = orig.query;
  ds.samples = {guided(orig), guided(twin), guided(sample("far", "a", "Quito"))};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset out = build_random_fewshots(ds, 3, seed);
    for (const auto& gs : out.samples) {
      const std::string own = pair_key(gs.base.query, gs.base.ground_truth);
      for (const auto& ex : gs.exemplars) CHECK(pair_key(ex.question, ex.answers) != own);
      CHECK_NOTHROW(validate_guided(gs));
    }
  }
}

TEST_CASE("multi-tool ground truth draws per tool and deduplicates") {
  Dataset ds;
  Sample both = sample("both", "a", "Paris");
  both.tools.push_back(tool("b"));
  both.ground_truth.push_back(ToolCall{"b", Json{{"city", "Paris"}}});
  Sample donor = sample("donor", "a", "Rome");
  donor.tools.push_back(tool("b"));
  donor.ground_truth.push_back(ToolCall{"b", Json{{"city", "Rome"}}});
  ds.samples = {guided(both), guided(donor)};
  const Dataset out = build_random_fewshots(ds, 1, 5);
  // The only donor serves both tools; it appears once.
  CHECK(out.samples[0].exemplars.size() == 1);
}

TEST_CASE("random few-shots are deterministic in the seed") {
  Dataset ds;
  for (int i = 0; i < 30; ++i) ds.samples.push_back(guided(sample("s" + std::to_string(i), "a", "c" + std::to_string(i))));
  std::ostringstream a, b;
  write_dataset(a, build_random_fewshots(ds, 2, 9));
  write_dataset(b, build_random_fewshots(ds, 2, 9));
  CHECK(a.str() == b.str());
  std::ostringstream c;
  write_dataset(c, build_random_fewshots(ds, 2, 10));
  CHECK(c.str() != a.str());
}

TEST_CASE("detach clears guidance, is idempotent, and blocks re-attachment") {
  GuidedSample gs = guided(sample("s1"));
  gs.exemplars = {example("get_weather", "q1", "A"), example("get_weather", "q2", "B")};
  gs.provenance = Provenance::Cautious;
  const GuidedSample d = detach_fewshot(gs);
  CHECK(d.exemplars.empty());
  CHECK(d.detached);
  CHECK(d.provenance == Provenance::None);
  const GuidedSample dd = detach_fewshot(d);
  CHECK(guided_sample_to_json(dd) == guided_sample_to_json(d));
  GuidedSample again = d;
  CHECK_THROWS_AS(attach_exemplars(again, {example("get_weather", "q3", "C")}, Provenance::Bold), Error);
  Dataset ds;
  ds.samples = {d, guided(sample("s2"))};
  CHECK(build_random_fewshots(ds, 1, 0).samples[0].exemplars.empty());
}

namespace {

struct VettingFixture {
  Dataset ds;
  Environment env;
  PolicyParams params;
};

// Target "t" plus two donors on the same tool. The correct candidate's
// guided logit is set by `guided_logit`, its raw logit stays far below.
VettingFixture vetting_fixture(double correct_theta, double g) {
  VettingFixture f;
  f.ds.samples = {guided(sample("t", "a", "Paris")), guided(sample("d1", "a", "Rome")),
                  guided(sample("d2", "a", "Oslo"))};
  f.env = Environment(f.ds, RewardMode{}, 1);
  for (const auto& gs : f.ds.samples) {
    std::vector<double> row(f.env.space(gs.base.id).size(), 0.0);
    row[0] = correct_theta;
    f.params.theta[gs.base.id] = row;
  }
  f.params.guidance_weight = g;
  return f;
}

}  // namespace

TEST_CASE("cautious vetting keeps exemplars that verifiably help") {
  // Guided success probability 0.9 at temperature 1.
  const double correct = std::log(0.9 / 0.1 * 5.0);
  auto f = vetting_fixture(correct - 3.0, 3.0);
  const double p = probs(f.params, f.env.space("t"), true, 1.0)[0];
  CHECK(p == doctest::Approx(0.9).epsilon(1e-12));
  const VettingOptions opts{10, 1.0, 1, kVettingRetries};
  const Dataset out = build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Cautious, opts, 4);
  CHECK(out.samples[0].provenance == Provenance::Cautious);
  CHECK_FALSE(out.samples[0].exemplars.empty());
}

TEST_CASE("cautious vetting falls back to none when guidance cannot succeed") {
  auto f = vetting_fixture(-1e3, 0.0);
  const VettingOptions opts{10, 0.7, 1, kVettingRetries};
  const Dataset cautious = build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Cautious, opts, 4);
  for (const auto& gs : cautious.samples) {
    CHECK(gs.provenance == Provenance::None);
    CHECK(gs.exemplars.empty());
  }
  const Dataset bold = build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Bold, opts, 4);
  CHECK(bold.samples[0].provenance == Provenance::Bold);
  CHECK_FALSE(bold.samples[0].exemplars.empty());
}

TEST_CASE("cautious output passes a fresh verification run") {
  auto f = vetting_fixture(-2.0, 2.5);
  const VettingOptions opts{10, 0.7, 1, kVettingRetries};
  const Dataset out = build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Cautious, opts, 8);
  int kept = 0;
  for (const auto& gs : out.samples) {
    if (gs.exemplars.empty()) continue;
    ++kept;
    // A high-rollout fresh run: guided success probability is well above 0.
    Rng rng = make_stream(1234, 0, gs.base.id, StreamPurpose::Vetting);
    CHECK(verify_guidance(gs, f.env, f.params, 200, 0.7, rng));
  }
  CHECK(kept > 0);
}

TEST_CASE("vetted builder is deterministic and skips detached samples") {
  auto f = vetting_fixture(-2.0, 2.5);
  f.ds.samples[1] = detach_fewshot(f.ds.samples[1]);
  const VettingOptions opts{10, 0.7, 1, kVettingRetries};
  std::ostringstream a, b;
  write_dataset(a, build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Cautious, opts, 2));
  const Dataset again = build_vetted_fewshots(f.ds, f.env, f.params, FewshotMode::Cautious, opts, 2);
  write_dataset(b, again);
  CHECK(a.str() == b.str());
  CHECK(again.samples[1].detached);
  CHECK(again.samples[1].exemplars.empty());
}

TEST_CASE("canonical serialization ignores key order") {
  const ToolCall x{"f", Json::parse(R"({"b":1,"a":2})")};
  const ToolCall y{"f", Json::parse(R"({"a":2,"b":1})")};
  CHECK(canonical(x) == canonical(y));
  CHECK(canonical(x) == R"({"arguments":{"a":2,"b":1},"name":"f"})");
}
