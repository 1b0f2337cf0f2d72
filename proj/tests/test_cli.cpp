#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bellsim/descriptor.hpp"
#include "bellsim/inequality.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using namespace bellsim;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(BELLSIM_TEST_TMP) / "cli" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_CASE("zoo list") {
  const auto r = run({"zoo", "list"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("hp_time_correlated") != std::string::npos);
}

TEST_CASE("exit codes separate configuration from model failures") {
  const auto dir = scratch("exit").string();
  CHECK(run({"--out", dir, "chsh", "--model", "no_such_model"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "chsh", "--model", "./missing.ini"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "--tol", "-1", "chsh", "--model", "constant_plus"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "simulate", "--model", "constant_plus", "--trials", "0"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "simulate"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "--bogus"}).code == cli::kExitConfig);
  CHECK(run({"--out", dir, "chsh", "--model", "constant_plus", "--method", "mc", "--trials", "0"}).code ==
        cli::kExitConfig);
  // Three slots cannot carry a balanced sign function.
  const fs::path odd = fs::path(dir) / "odd.ini";
  fs::create_directories(odd.parent_path());
  std::ofstream(odd) << "[model]\nname = odd\nangles = 0\n[source]\nstates = l0\nprior = 1\n[grid]\nslots = 3\n"
                        "[gen1]\nkind = constant\nvalues = 1\nvalue = 0\n[gen2]\nkind = constant\nvalues = 1\n"
                        "value = 0\n[out1]\nkind = constant\nvalue = 1\n[out2]\nkind = constant\nvalue = 1\n";
  const auto infeasible = run({"--out", dir, "transform", "--model", odd.string(), "--op", "rademacher"});
  CHECK(infeasible.code == cli::kExitModel);
  CHECK(infeasible.err.find("error:") != std::string::npos);
  CHECK(run({"--out", dir, "transform", "--model", "constant_plus", "--op", "layer_double", "--op", "layer_double"})
            .code == cli::kExitModel);
  CHECK(run({"--out", dir, "chsh", "--model", "constant_plus"}).code == cli::kExitOk);
}

TEST_CASE("check reports both modes for hp_time_correlated") {
  const auto dir = scratch("check");
  const auto r = run({"--out", dir.string(), "--deterministic", "check", "--model", "hp_time_correlated", "--tables"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("given_lambda         FAIL max_deviation=0.1875") != std::string::npos);
  CHECK(r.out.find("given_lambda_and_m   PASS max_deviation=0") != std::string::npos);
  const auto j = read_json(dir / "check.json");
  CHECK(j["summary"]["given_lambda"]["pass"] == false);
  CHECK(j["summary"]["given_lambda_and_m"]["pass"] == true);
  CHECK(j["factorization"].size() == 16);
  CHECK_FALSE(j.contains("generated_at"));
  CHECK(j.contains("argv"));
  CHECK(fs::exists(dir / "joint_a4_b4.csv"));
  CHECK(slurp(dir / "joint_a1_b1.csv").find("lambda_star,lambda_dblstar,lambda,m,prob") != std::string::npos);
}

TEST_CASE("transform writes a reloadable model with zero conditionals") {
  const auto dir = scratch("transform");
  const auto r = run({"--out", dir.string(), "--deterministic", "transform", "--model", "bell_product_basic", "--op",
                      "rademacher", "--op", "layer_double", "--name", "basic_zeroed"});
  REQUIRE(r.code == cli::kExitOk);
  const auto model = load_model(dir / "model.ini");
  CHECK(model.name() == "basic_zeroed");
  CHECK(model.is_layer_doubled());
  CHECK(model.grid().slot_count() == 8);
  const auto j = read_json(dir / "transform.json");
  CHECK(j["chsh_before"]["S"] == j["chsh_after"]["S"]);
  for (const auto& row : j["conditional_expectations"]) {
    for (const auto& [label, v] : row["cond_a"].items()) CHECK(v.get<double>() == 0.0);
    for (const auto& [label, v] : row["cond_b"].items()) CHECK(v.get<double>() == 0.0);
  }
  CHECK(std::abs(chsh(model, optimal_chsh_settings()).s_value + 2.0) <= 1e-12);

  const auto target = run({"--out", (dir / "target").string(), "transform", "--model", "constant_plus", "--op",
                           "target:S1:0.5"});
  REQUIRE(target.code == cli::kExitOk);
  CHECK(read_json(dir / "target" / "transform.json")["steps"][0]["achieved"] == 0.5);
}

TEST_CASE("deterministic runs are byte-identical") {
  for (const std::vector<std::string>& cmd :
       {std::vector<std::string>{"simulate", "--model", "hashed_clock", "--trials", "2000", "--policy",
                                 "seeded_random", "--chsh", "0,pi/2,pi/4,3*pi/4"},
        std::vector<std::string>{"chsh", "--model", "setting_dependent", "--method", "monte_carlo", "--trials", "5000"},
        std::vector<std::string>{"audit", "--model", "bell_product_basic", "--trials", "200"},
        std::vector<std::string>{"transform", "--model", "hashed_clock", "--op", "rademacher", "--op",
                                 "layer_double"}}) {
    const auto first = scratch("det_1_" + cmd[0]);
    const auto second = scratch("det_2_" + cmd[0]);
    auto a = std::vector<std::string>{"--seed", "17", "--deterministic", "--out", first.string()};
    auto b = std::vector<std::string>{"--seed", "17", "--deterministic", "--out", second.string()};
    a.insert(a.end(), cmd.begin(), cmd.end());
    b.insert(b.end(), cmd.begin(), cmd.end());
    REQUIRE(run(a).code == cli::kExitOk);
    REQUIRE(run(b).code == cli::kExitOk);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(first)) {
      ++files;
      const auto name = entry.path().filename();
      CAPTURE(name.string());
      auto lhs = slurp(entry.path());
      auto rhs = slurp(second / name);
      // The output directory is part of the recorded argv.
      for (std::size_t p; (p = lhs.find(first.string())) != std::string::npos;) lhs.replace(p, first.string().size(), "OUT");
      for (std::size_t p; (p = rhs.find(second.string())) != std::string::npos;) rhs.replace(p, second.string().size(), "OUT");
      CHECK(lhs == rhs);
    }
    CHECK(files >= 1);
  }
}

TEST_CASE("simulate and audit outputs") {
  const auto dir = scratch("simulate");
  REQUIRE(run({"--out", dir.string(), "simulate", "--model", "hp_time_correlated", "--trials", "16"}).code ==
          cli::kExitOk);
  const auto csv = slurp(dir / "trials.csv");
  CHECK(csv.find("trial,m,a,b,lambda,lambda_star,lambda_dblstar,A,B\n") != std::string::npos);
  CHECK(read_json(dir / "summary.json").contains("generated_at"));

  REQUIRE(run({"--out", dir.string(), "audit", "--model", "hashed_clock", "--trials", "100"}).code == cli::kExitOk);
  const auto audit = read_json(dir / "audit.json");
  CHECK(audit["pass"] == true);
}
