// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "mslab/error.hpp"
#include "mslab/harness.hpp"

using namespace mslab;
using json = nlohmann::json;

namespace {

TrialConfig small(const std::string& id, int count = 4) {
  auto j = json::parse(builtin_config(id));
  j["ensemble"]["count"] = count;
  if (id != "P31scale" && id != "P32scale") j["grid"]["N"] = id == "SQID" ? 16 : 32;
  return parse_trial_config(j.dump());
}

std::string with(const std::string& id, const std::function<void(json&)>& edit) {
  auto j = json::parse(builtin_config(id));
  edit(j);
  return j.dump();
}

}  // namespace

TEST_CASE("every theorem id has a built-in config that validates") {
  for (const auto& id : theorem_ids()) {
    CAPTURE(id);
    const auto cfg = parse_trial_config(builtin_config(id));
    CHECK(cfg.theorem_id == id);
    CHECK_NOTHROW(validate_hypotheses(cfg));
  }
  CHECK_THROWS_AS(builtin_config("T99"), ConfigError);
}

TEST_CASE("every file in configs/ parses and validates") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MSLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    std::ifstream in(entry.path());
    std::stringstream text;
    text << in.rdbuf();
    const auto cfg = parse_trial_config(text.str());
    CHECK(cfg.theorem_id == entry.path().stem().string());
    CHECK_NOTHROW(validate_hypotheses(cfg));
    ++seen;
  }
  CHECK(seen == static_cast<int>(theorem_ids().size()));
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_trial_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["colour"] = 1; })), ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["grid"]["N"] = 100; })), ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["theorem_id"] = "T7"; })), ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["ensemble"]["count"] = -1; })), ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["ensemble"]["generator"] = "noise"; })),
                  ConfigError);
  CHECK_THROWS_AS(parse_trial_config(with("T11i", [](json& j) { j["exponents"]["p0"] = "one"; })), ConfigError);
}

TEST_CASE("config hash is canonical") {
  const auto a = parse_trial_config(builtin_config("T11i"));
  // Same content, different key order and explicit defaults.
  const auto b = parse_trial_config(R"({"ensemble": {"generator": "random_trig", "seed": 20260101, "count": 50},
    "weights": "unit", "exponents": {"s": 2, "p_list": [2.0, 2.0], "p0": 1.0},
    "symbol": "gauss_bump", "grid": {"L": 1.0, "N": 128, "dim": 1}, "theorem_id": "T11i"})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  auto c = a;
  c.ensemble.seed += 1;
  CHECK(config_hash(c) != config_hash(a));
  CHECK(parse_trial_config(canonical_config_json(a)).ensemble.seed == a.ensemble.seed);
}

TEST_CASE("hypothesis gates name the failed hypothesis") {
  auto expect_reject = [](const std::string& text, const std::string& needle) {
    const auto cfg = parse_trial_config(text);
    try {
      validate_hypotheses(cfg);
      FAIL("expected rejection: " << needle);
    } catch (const HypothesisError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_reject(with("T11i", [](json& j) { j["exponents"]["p_list"] = {1.0, 2.0}; }), "requires p1,p2>p0");
  expect_reject(with("T11i", [](json& j) { j["exponents"]["s"] = 3; }), "s in [n+1, 2n]");
  expect_reject(with("T11i", [](json& j) { j["exponents"]["p0"] = 2.5; j["exponents"]["p_list"] = {3.0, 3.0}; }),
                "2n/s <= p0 <= 2");
  expect_reject(with("T11i", [](json& j) { j["weights"] = "power:a=1.5"; }), "A_{P/p0}");
  expect_reject(with("T11ii", [](json& j) { j["exponents"]["p_list"] = {2.0, 3.0}; }), "p1=p0 or p2=p0");
  expect_reject(with("T11ii", [](json& j) { j["exponents"]["p0"] = 1.0; j["exponents"]["p_list"] = {1.0, 3.0}; }),
                "p0>2n/s");
  expect_reject(with("T12ii", [](json& j) { j["weights"] = "power:a=0.5"; }), "A_1");
  expect_reject(with("T16", [](json& j) { j["weights"] = "power:a=-1"; }), "A_1");
  expect_reject(with("T14", [](json& j) { j["exponents"]["p_list"] = {1.0, 3.0}; }), "p_i>=p0");
  expect_reject(with("L43", [](json& j) { j["exponents"]["delta"] = 0.6; }), "0<delta<min(1,p0/m)");
  expect_reject(with("L46", [](json& j) { j["exponents"]["delta"] = 0.45; }), "0<delta<epsilon");
  expect_reject(with("L46", [](json& j) { j["exponents"]["q0"] = 1.0; }), "q0>p0");
  expect_reject(with("L44", [](json& j) { j["windows"] = {{"wrap", true}}; }), "do not wrap");
  expect_reject(with("P31scale", [](json& j) { j["exponents"]["p0"] = 1.0; }), "2n/s<p<=2");
  expect_reject(with("SQID", [](json& j) { j["grid"]["N"] = 64; }), "N<=32");
}

TEST_CASE("trial inputs are seeded by (seed, index) only") {
  const auto cfg = small("T11i");
  const Grid g(1, 32, 1.0);
  const auto a = generate_inputs(cfg, g, 3, 2);
  const auto b = generate_inputs(cfg, g, 3, 2);
  const auto c = generate_inputs(cfg, g, 4, 2);
  CHECK(a[0].values() == b[0].values());
  CHECK(a[0].values() != c[0].values());
  // Support in the middle half.
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    if (x <= 0.25 || x >= 0.75) CHECK(a[0][i] == cplx(0.0));
  }
  // Same continuum functions on the refined grid.
  const Grid g2(1, 64, 1.0);
  const auto fine = generate_inputs(cfg, g2, 3, 2);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(fine[0][2 * i] - a[0][i]) < 1e-12);

  auto r1 = trial_rng(5, 0), r2 = trial_rng(5, 0), r3 = trial_rng(6, 0);
  CHECK(r1() == r2());
  CHECK(trial_rng(5, 0)() != r3());
}

TEST_CASE("zero inputs give ratio 0 for every target") {
  for (const auto& id : theorem_ids()) {
    if (id == "P31scale" || id == "P32scale") continue;  // no input fields
    CAPTURE(id);
    auto cfg = small(id, 1);
    cfg.ensemble.generator = "zero";
    const auto rec = run_trial(cfg, 0);
    CHECK(rec.ratio == 0.0);
    CHECK(rec.lhs == 0.0);
  }
}

TEST_CASE("constant b makes the commutator domination vanish") {
  auto cfg = small("L46", 2);
  cfg.bmo = {"constant:c=3"};
  const auto rec = run_trial(cfg, 0);
  CHECK(rec.lhs == 0.0);
  CHECK(rec.ratio == 0.0);
  CHECK(rec.degenerate);
}

TEST_CASE("scaling trials reproduce the dilation exponent") {
  const auto rep = ensemble_report(small("P31scale", 4));
  CHECK(rep.summary.max_ratio < 1e-3);
  const auto rep2 = ensemble_report(small("P32scale", 4));
  CHECK(rep2.summary.max_ratio < 1e-3);
}

TEST_CASE("ensemble reports") {
  auto empty = small("T11i", 0);
  const auto e = ensemble_report(empty);
  CHECK(e.records.empty());
  CHECK(e.summary.nan_flag);
  CHECK(std::isnan(e.summary.max_ratio));

  const auto cfg = small("T11i", 4);
  const auto rep = ensemble_report(cfg);
  CHECK(rep.records.size() == 4);
  CHECK(rep.refinement_records.size() == 4);
  CHECK(rep.refinement_records[0].n == 64);
  CHECK(std::isfinite(rep.summary.max_ratio));
  REQUIRE(rep.summary.refinement_drift.has_value());

  const std::string text = report_json(rep);
  const auto again = summary_from_report_json(text);
  CHECK(again.max_ratio == rep.summary.max_ratio);
  CHECK(again.median_ratio == rep.summary.median_ratio);
  CHECK(*again.refinement_drift == *rep.summary.refinement_drift);
  CHECK(again.count == rep.summary.count);

  const auto j = json::parse(text);
  CHECK(j["schema"] == "mslab.report/1");
  CHECK(j["config_hash"] == config_hash(cfg));

  const std::string csv = report_csv(rep);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 + 4);
  const std::string dat = ratios_dat(rep);
  CHECK(dat.find(format_double(rep.records[0].ratio)) != std::string::npos);
}

TEST_CASE("reports do not depend on the thread count") {
  const auto cfg = small("T12i", 6);
  ::setenv("MSLAB_THREADS", "1", 1);
  const std::string one = report_json(ensemble_report(cfg));
  ::setenv("MSLAB_THREADS", "3", 1);
  const std::string three = report_json(ensemble_report(cfg));
  ::unsetenv("MSLAB_THREADS");
  CHECK(one == three);
}

TEST_CASE("domination checks") {
  CHECK_THROWS_AS(domination_field_check("T11i", small("L43")), ConfigError);
  const auto rep = domination_field_check("L44", small("L44", 3));
  CHECK(std::isfinite(rep.summary.max_ratio));
  for (const auto& r : rep.records) CHECK_FALSE(r.degenerate);
}
