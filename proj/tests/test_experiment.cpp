#include "oscillab/experiment.hpp"

#include "oscillab/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace oscillab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("oscillab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string minimal_config(const std::string& objective, const std::string& runs) {
  return std::string("{\"objective\": \"") + objective +
         "\", \"x0\": [1.0], \"seed\": 7, \"runs\": [" + runs + "]}";
}

}  // namespace

TEST_CASE("objective ids resolve: builtin names, csv paths, parameters") {
  const auto dir = fresh_dir("objective_ids");
  Matrix h(2, 2);
  h << 4.0, 0.0, 0.0, 1.0;
  io::write_text_file(dir / "H.csv", io::matrix_csv(h));

  const auto quadratic = parse_objective("quadratic:H.csv", dir);
  CHECK(quadratic.constants.smoothness == doctest::Approx(4.0));
  CHECK(parse_objective("pl_nonconvex", dir).dimension == 1);
  CHECK(parse_objective("self_concordant:3", dir).dimension == 3);
  CHECK(parse_composite_objective("lasso:0.25").nonsmooth(test::scalar_vec(2.0)) ==
        doctest::Approx(0.5));
  CHECK(is_composite_id("lasso:0.1"));
  CHECK_FALSE(is_composite_id("pl_nonconvex"));
  CHECK_THROWS_AS(parse_objective("rosenbrock", dir), std::invalid_argument);
}

TEST_CASE("config parsing rejects bad pairings before anything runs") {
  const auto dir = fresh_dir("pairings");
  // a PL certificate cannot attach to a NAG run
  const std::string bad_cert = minimal_config(
      "pl_nonconvex",
      "{\"name\": \"nag\", \"algorithm\": \"NAG_SC\", \"eta\": 0.1, \"iterations\": 5,"
      " \"ode\": {\"time_scale\": 0.316227766016838, \"t_end\": 1.0},"
      " \"certificates\": [\"VGD_PL\"]}");
  CHECK_THROWS_WITH_AS(parse_experiment(bad_cert, dir), doctest::Contains("does not pair"),
                       std::invalid_argument);

  const std::string bad_bound = minimal_config(
      "pl_nonconvex",
      "{\"name\": \"vgd\", \"algorithm\": \"VGD\", \"eta\": 0.1, \"iterations\": 5,"
      " \"bounds\": [\"NAG_SC\"]}");
  CHECK_THROWS_AS(parse_experiment(bad_bound, dir), std::invalid_argument);

  const std::string unknown = minimal_config(
      "no_such_objective",
      "{\"name\": \"vgd\", \"algorithm\": \"VGD\", \"eta\": 0.1, \"iterations\": 5}");
  CHECK_THROWS_AS(parse_experiment(unknown, dir), std::invalid_argument);

  // certificates need the ODE companion
  const std::string no_ode = minimal_config(
      "pl_nonconvex",
      "{\"name\": \"vgd\", \"algorithm\": \"VGD\", \"eta\": 0.1, \"iterations\": 5,"
      " \"certificates\": [\"VGD_PL\"]}");
  CHECK_THROWS_AS(parse_experiment(no_ode, dir), std::invalid_argument);
}

TEST_CASE("an empty run list produces a manifest and nothing else") {
  const auto dir = fresh_dir("empty");
  ExperimentConfig config;
  config.objective_id = "pl_nonconvex";
  config.x0 = test::scalar_vec(1.0);
  config.output_dir = (dir / "out").string();
  const auto result = run_experiment(config);
  CHECK(result.runs_executed == 0);
  CHECK(result.all_checks_passed);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("run_experiment writes trajectories, reports, and a complete manifest") {
  const auto dir = fresh_dir("full");
  const std::string text = minimal_config(
      "pl_nonconvex",
      "{\"name\": \"vgd\", \"algorithm\": \"VGD\", \"eta\": 0.1, \"iterations\": 50,"
      " \"ode\": {\"time_scale\": 0.1, \"dt\": 0.001, \"t_end\": 5.0},"
      " \"certificates\": [\"VGD_PL\"], \"bounds\": [\"VGD_PL\"]}");
  auto config = parse_experiment(text, dir);
  config.output_dir = (dir / "out").string();
  const auto result = run_experiment(config);
  CHECK(result.all_checks_passed);
  CHECK(result.runs_executed == 1);

  for (const std::string name :
       {"vgd.csv", "vgd.json", "vgd_ode.csv", "vgd_ode.json", "vgd_cert_VGD_PL.csv",
        "vgd_cert_VGD_PL.json", "vgd_bound_VGD_PL.csv", "vgd_bound_VGD_PL.json",
        "config.json"})
    CHECK(fs::exists(dir / "out" / name));

  std::string diagnostics;
  CHECK(verify_manifest(dir / "out" / "manifest.json", &diagnostics));

  // tampering is detected
  io::write_text_file(dir / "out" / "vgd.csv", "k,x_1,f\n0,0,0\n");
  CHECK_FALSE(verify_manifest(dir / "out" / "manifest.json", &diagnostics));
  CHECK(diagnostics.find("vgd.csv") != std::string::npos);
}

TEST_CASE("figure2 preset: contents and determinism") {
  const auto preset = figure2_preset();
  REQUIRE(preset.inline_matrix.has_value());
  CHECK((*preset.inline_matrix)(0, 0) == 300.0);
  CHECK((*preset.inline_matrix)(0, 1) == 1.0);
  CHECK((*preset.inline_matrix)(1, 1) == 50.0);
  CHECK(preset.x0[0] == 1.0);
  CHECK(preset.x0[1] == 1.0);
  REQUIRE(preset.runs.size() == 4);
  CHECK(preset.runs[0].algorithm.step_size == 1e-4);
  CHECK(preset.runs[1].algorithm.step_size == 1e-4);
  CHECK(preset.runs[2].algorithm.step_size == 2e-4);
  CHECK(preset.runs[3].algorithm.step_size == 2e-4);
  CHECK(preset.runs[0].ode.enabled);
  CHECK(preset.runs[1].ode.enabled);
  CHECK_FALSE(preset.runs[2].ode.enabled);

  const auto dir = fresh_dir("figure2");
  auto first = preset;
  first.output_dir = (dir / "a").string();
  auto second = preset;
  second.output_dir = (dir / "b").string();
  const auto result_a = run_experiment(first);
  const auto result_b = run_experiment(second);
  CHECK(result_a.all_checks_passed);

  // 4 discrete runs (csv + json), 2 ode companions (csv + json),
  // the matrix csv, the config echo, and the manifest
  CHECK(result_a.artifacts.size() == 4 * 2 + 2 * 2 + 2);

  REQUIRE(result_a.artifacts == result_b.artifacts);
  for (const auto& relative : result_a.artifacts) {
    const auto a = io::read_text_file(dir / "a" / relative);
    const auto b = io::read_text_file(dir / "b" / relative);
    CHECK_MESSAGE(a == b, "artifact differs: ", relative);
  }
  CHECK(io::read_text_file(dir / "a" / "manifest.json") ==
        io::read_text_file(dir / "b" / "manifest.json"));
}

TEST_CASE("every listed id round-trips through the parsers") {
  const std::string catalog = list_settings();
  for (const auto kind : all_algorithms()) {
    CHECK(catalog.find(to_string(kind)) != std::string::npos);
    CHECK(algorithm_from_string(to_string(kind)) == kind);
  }
  for (const auto setting : all_certificate_settings()) {
    CHECK(catalog.find(to_string(setting)) != std::string::npos);
    CHECK(certificate_setting_from_string(to_string(setting)) == setting);
  }
  for (const auto id : all_rate_bounds()) {
    CHECK(catalog.find(to_string(id)) != std::string::npos);
    CHECK(rate_bound_from_string(to_string(id)) == id);
  }
  CHECK(catalog.find("NAG_QG") != std::string::npos);
  CHECK(catalog.find("sigma = 4/(5m)") != std::string::npos);
  CHECK(catalog.find("lambda = 1/(5m)") != std::string::npos);
}

TEST_CASE("composite experiment: prox runs with the proximal certificate") {
  const auto dir = fresh_dir("composite");
  const std::string text = minimal_config(
      "lasso:0.1",
      "{\"name\": \"prox\", \"algorithm\": \"PROX_GRAD\", \"eta\": 0.5, \"iterations\": 40,"
      " \"ode\": {\"time_scale\": 0.5, \"dt\": 0.001, \"t_end\": 4.0},"
      " \"certificates\": [\"COMPOSITE_PROXPL\"]}");
  auto config = parse_experiment(text, dir);
  config.output_dir = (dir / "out").string();
  const auto result = run_experiment(config);
  CHECK(result.all_checks_passed);
  CHECK(fs::exists(dir / "out" / "prox_cert_COMPOSITE_PROXPL.json"));

  // a smooth algorithm on the composite objective is rejected at parse time
  const std::string bad = minimal_config(
      "lasso:0.1",
      "{\"name\": \"vgd\", \"algorithm\": \"VGD\", \"eta\": 0.1, \"iterations\": 5}");
  CHECK_THROWS_AS(parse_experiment(bad, dir), std::invalid_argument);
}

TEST_CASE("csv round-trip formatting is exact") {
  for (double value : {1.0, -0.1, 3.141592653589793, 1e-300, 2e-4, 49.996}) {
    const std::string text = io::format_double(value);
    CHECK(std::stod(text) == value);
  }
  const std::string csv = io::csv_row({1.0, 0.5, -2e-4});
  CHECK(csv == "1,0.5,-2e-04\n");
}

TEST_CASE("matrix csv round-trips through write and read") {
  const auto dir = fresh_dir("matrix");
  Matrix h(2, 2);
  h << 300.0, 1.0, 1.0, 50.0;
  io::write_text_file(dir / "H.csv", io::matrix_csv(h));
  const Matrix back = io::read_matrix_csv(dir / "H.csv");
  CHECK((back - h).norm() == 0.0);
}
