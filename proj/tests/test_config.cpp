#include "mvsde/config.hpp"
#include "mvsde/outputs.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mvsde;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults and overrides") {
  const auto cfg = parse(
      "experiment = picard_contraction  # trailing comment\n"
      "seed = 7\n"
      "[grid]\n"
      "dt = 0.01\n"
      "[drift]\n"
      "a = 0.3\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.r0 == 0.1);
  CHECK(cfg.drift.at("name") == "linear_delay");
  CHECK(cfg.drift.at("a") == "0.3");
  CHECK(cfg.drift.at("b") == "0.25");
}

TEST_CASE("choosing another coefficient drops the default parameters") {
  const auto cfg = parse("experiment = picard_contraction\n[drift]\nname = zero\n");
  CHECK(cfg.drift == KeyValues{{"name", "zero"}});
}

TEST_CASE("write and parse round trip") {
  for (const auto& name : experiment_names()) {
    ExperimentConfig cfg = default_config(name);
    cfg.seed = 18446744073709551615ull;
    cfg.dt = cfg.dt == 1e-3 ? 1e-3 : cfg.dt;
    std::ostringstream out;
    write_config(out, cfg);
    const auto back = parse(out.str());
    std::ostringstream again;
    write_config(again, back);
    CHECK(out.str() == again.str());
    CHECK(back.seed == cfg.seed);
    CHECK(back.dt == cfg.dt);
  }
}

TEST_CASE("validation errors are distinct and name the field") {
  const std::string r0 = error_of("experiment = uniqueness\n[grid]\ndt = 0.03\nr0 = 0.1\nT = 0.9\n");
  const std::string horizon = error_of("experiment = uniqueness\n[grid]\ndt = 0.01\nT = 1.005\n");
  const std::string particles = error_of("experiment = distribution_iteration\n[run]\nparticles = 0\n");
  const std::string drift = error_of("experiment = uniqueness\n[drift]\nname = cubic\n");
  const std::string diffusion = error_of("experiment = uniqueness\n[diffusion]\nname = cubic\n");
  CHECK(r0.find("r0") != std::string::npos);
  CHECK(horizon.find("T") != std::string::npos);
  CHECK(particles.find("particles") != std::string::npos);
  CHECK(drift.find("[drift]") != std::string::npos);
  CHECK(diffusion.find("[diffusion]") != std::string::npos);
  const std::set<std::string> all = {r0, horizon, particles, drift, diffusion};
  CHECK(all.size() == 5);
  CHECK(all.count("") == 0);
}

TEST_CASE("malformed files") {
  CHECK(error_of("[grid]\ndt = 0.1\n").find("experiment") != std::string::npos);
  CHECK(error_of("experiment = nope\n").find("nope") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[grid]\nstep = 0.1\n").find("step") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[plot]\n").find("plot") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[run]\npaths = many\n").find("paths") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[grid]\ndt = 0.1\ndt = 0.2\n").find("duplicate") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[drift]\nwobble = 1\n").find("wobble") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\nseed = -1\n").find("seed") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[run]\nscheme = rk4\n").find("scheme") != std::string::npos);
  CHECK(error_of("experiment = uniqueness\n[drift]\nname = mf_linear\n").find("mean-field") != std::string::npos);
}

TEST_CASE("operator sections") {
  CHECK(std::holds_alternative<ZeroOperator>(make_operator({{"type", "zero"}}, 2)));
  const auto box = make_operator({{"type", "normal_cone"}, {"domain", "box"}, {"lower", "-1"}, {"upper", "1, inf"}}, 2);
  const auto& shape = std::get<NormalCone>(box).domain.shape();
  CHECK(std::get<Box>(shape).upper(1) == std::numeric_limits<double>::infinity());
  const auto graph = make_operator({{"type", "graph"}, {"vertices", "-1:-1, 0:0, 0:1"}, {"left", "vertical"},
                                    {"right", "2"}},
                                   1);
  CHECK(std::get<MonotoneGraph>(graph).domain_lower() == -1.0);
  CHECK_THROWS_AS(make_operator({{"type", "normal_cone"}, {"domain", "halfline"}}, 2), ConfigError);
  CHECK_THROWS_AS(make_operator({{"type", "normal_cone"}, {"domain", "ball"}, {"radius", "0"}}, 1), ConfigError);
  CHECK_THROWS_AS(make_operator({{"type", "graph"}, {"vertices", "1:0, 0:1"}}, 1), ConfigError);
  CHECK_THROWS_AS(make_operator({{"type", "zero"}, {"slope", "1"}}, 1), ConfigError);
  CHECK_THROWS_AS(make_operator({{"type", "elastic"}}, 1), ConfigError);
}

TEST_CASE("scheme and operator must fit together") {
  CHECK_THROWS_AS(parse("experiment = uniqueness\n[run]\nscheme = project_then_step\n[operator]\ntype = sign\n"),
                  ConfigError);
  CHECK_NOTHROW(parse("experiment = uniqueness\n[run]\nscheme = project_then_step\n"));
}

TEST_CASE("results round trip through files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mvsde_outputs_test";
  fs::remove_all(dir);
  const ExperimentConfig cfg = default_config("w2_oracle");

  emit_outputs(ExperimentOutput{}, cfg, dir.string());
  CHECK(fs::exists(dir / "results.jsonl"));
  CHECK(fs::file_size(dir / "results.jsonl") == 0);
  CHECK(fs::exists(dir / "manifest.cfg"));
  CHECK(load_config((dir / "manifest.cfg").string()).seed == cfg.seed);

  ExperimentOutput out;
  out.records.push_back(within("x", "m1", 0.1 + 0.2, 0.01, 0.3, 1e-8));
  out.records.push_back(at_most("x", "m2", std::nan(""), 1.0));
  out.records.push_back(report("x", "m3", 1e300));
  out.records.back().wall_seconds = 2.5;
  emit_outputs(out, cfg, dir.string());
  const auto back = read_results(dir.string());
  REQUIRE(back.size() == 3);
  CHECK(back[0] == out.records[0]);
  CHECK(std::isnan(back[1].value));
  CHECK_FALSE(back[1].pass);
  CHECK(back[2] == out.records[2]);
  fs::remove_all(dir);
}

TEST_CASE("comparisons") {
  CHECK(within("e", "m", 1.0, std::nullopt, 1.5, 0.5).pass);
  CHECK_FALSE(within("e", "m", 1.0, std::nullopt, 1.5, 0.4).pass);
  CHECK(at_least("e", "m", 10.0, 10.0).pass);
  CHECK_FALSE(at_most("e", "m", 1.1, 1.0).pass);
  CHECK(report("e", "m", 3.0).pass);
}
