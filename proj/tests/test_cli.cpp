#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "skewfib/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  fs::path dir;

  json report() const {
    std::ifstream in(dir / "report.json");
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
  }
  std::string rawReport() const {
    std::ifstream in(dir / "report.json");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

fs::path freshDir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("skewfib_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Run runCli(const std::string& tag, const std::string& command,
           const std::string& config_text, std::uint64_t seed = 0) {
  Run r;
  r.dir = freshDir(tag);
  fs::path cfg = r.dir / "config.json";
  std::ofstream(cfg) << config_text;
  skewfib::cli::Options opts;
  opts.command = command;
  opts.config_path = cfg.string();
  opts.out_dir = r.dir.string();
  opts.seed = seed;
  std::ostringstream out, err;
  r.code = skewfib::cli::runCommand(opts, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const char* kSmallGrids = R"("grid": {"n": 11, "extent": 3.0},
  "grid3": {"n": 5, "extent": 3.0})";

}  // namespace

TEST_CASE("certify hopf passes everything") {
  Run r = runCli("certify_hopf", "certify", std::string(R"({
  "fibration": {"builtin": "hopf", "sigma": 1},
  )") + kSmallGrids + "}");
  CHECK(r.code == 0);
  json rep = r.report();
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("sigma").get<int>() == 1);
  CHECK(rep.at("version").get<std::string>() == std::string(skewfib::cli::kVersion));
  for (const json& c : rep.at("certificates"))
    CHECK(c.at("verdict").get<std::string>() == "pass");
}

TEST_CASE("certify degenerate(3) fails nondegeneracy and contact") {
  Run r = runCli("certify_deg", "certify", std::string(R"({
  "fibration": {"builtin": "degenerate", "k": 3},
  )") + kSmallGrids + "}");
  CHECK(r.code == 1);
  json rep = r.report();
  CHECK_FALSE(rep.at("pass").get<bool>());
  bool skew_pass = false, nd_fail = false, nd_witness_origin = false,
       contact_fail = false;
  for (const json& c : rep.at("certificates")) {
    std::string check = c.at("check").get<std::string>();
    std::string verdict = c.value("verdict", std::string("error"));
    if (check == "skew" && verdict == "pass") skew_pass = true;
    if (check == "nondegenerate" && verdict == "fail") {
      nd_fail = true;
      const json& w = c.at("witnesses");
      if (!w.empty() && std::abs(w[0].at("data")[0].get<double>()) < 1e-12 &&
          std::abs(w[0].at("data")[1].get<double>()) < 1e-12)
        nd_witness_origin = true;
    }
    if (check == "contact" && verdict == "fail") contact_fail = true;
  }
  CHECK(skew_pass);
  CHECK(nd_fail);
  CHECK(nd_witness_origin);
  CHECK(contact_fail);
}

TEST_CASE("certify glued fails skew but passes contact") {
  Run r = runCli("certify_glued", "certify", std::string(R"({
  "fibration": {"builtin": "glued"},
  "checks": ["skew", "contact"],
  )") + kSmallGrids + "}");
  CHECK(r.code == 1);
  json rep = r.report();
  bool skew_fail = false, contact_pass = false;
  for (const json& c : rep.at("certificates")) {
    std::string check = c.at("check").get<std::string>();
    if (check == "skew" && c.at("verdict") == "fail") skew_fail = true;
    if (check == "contact" && c.at("verdict") == "pass") contact_pass = true;
  }
  CHECK(skew_fail);
  CHECK(contact_pass);
}

TEST_CASE("certify vfield runs the line-field checks") {
  Run r = runCli("certify_vfield", "certify", std::string(R"({
  "fibration": {"builtin": "planar_twist", "f": "y"},
  )") + kSmallGrids + "}");
  CHECK(r.code == 0);
  json rep = r.report();
  std::vector<std::string> checks;
  for (const json& c : rep.at("certificates"))
    checks.push_back(c.at("check").get<std::string>());
  CHECK(checks == std::vector<std::string>{"line_field", "contact"});
}

TEST_CASE("certify a one-form") {
  Run r = runCli("certify_form", "certify", std::string(R"({
  "form": {"builtin": "planar_tight"},
  )") + kSmallGrids + "}");
  CHECK(r.code == 0);
  CHECK(r.report().at("pass").get<bool>());
}

TEST_CASE("unknown keys are rejected with exit 2") {
  Run r = runCli("unknown_key", "certify", R"({
  "fibration": {"builtin": "hopf"},
  "typo_key": true})");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown key") != std::string::npos);
  CHECK_FALSE(fs::exists(r.dir / "report.json"));

  Run r2 = runCli("unknown_nested", "certify", R"({
  "fibration": {"builtin": "hopf", "oops": 1}})");
  CHECK(r2.code == 2);
}

TEST_CASE("config errors exit with 2") {
  CHECK(runCli("bad_json", "certify", "{not json").code == 2);
  CHECK(runCli("no_spec", "certify", "{}").code == 2);
  CHECK(runCli("bad_builtin", "certify",
               R"({"fibration": {"builtin": "moebius"}})")
            .code == 2);
  CHECK(runCli("missing_radii", "foliation",
               R"({"fibration": {"builtin": "hopf"}})")
            .code == 2);
  CHECK(runCli("bad_demo", "demo", R"({"name": "unknown"})").code == 2);
  CHECK(runCli("bad_expr", "certify",
               R"({"fibration": {"builtin": "expressions", "b1": "p1+", "b2": "p2"}})")
            .code == 2);
}

TEST_CASE("foliation command writes a loadable CSV") {
  Run r = runCli("foliation_hopf", "foliation", R"({
  "fibration": {"builtin": "hopf"},
  "radii": [0.5],
  "samples": 6})");
  CHECK(r.code == 0);
  json rep = r.report();
  CHECK_FALSE(rep.at("closed_candidate").get<bool>());
  REQUIRE(rep.at("scans").size() == 1);
  CHECK(rep.at("scans")[0].at("verdict").get<std::string>() == "no closed leaf found");

  // every CSV sample re-validates the on-sphere invariant
  std::ifstream csv(r.dir / "leaves.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "radius,leaf_id,step,x,y,z,longitude");
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    double radius, x, y, z, lon;
    int leaf_id, step;
    char c;
    std::istringstream ss(line);
    ss >> radius >> c >> leaf_id >> c >> step >> c >> x >> c >> y >> c >> z >> c >> lon;
    REQUIRE_FALSE(ss.fail());
    CHECK(std::abs(std::sqrt(x * x + y * y + z * z) - radius) <= 1e-8);
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("lift command closed form and CSV") {
  Run r = runCli("lift_planar", "lift", R"({
  "fibration": {"builtin": "planar_linear"},
  "path": {"type": "segment", "from": [0.0, 1.5], "to": [2.0, 1.5]},
  "z0": 0.25,
  "steps": 400})");
  CHECK(r.code == 0);
  json rep = r.report();
  CHECK(rep.at("complete").get<bool>());
  // gamma(t) = (2t, 1.5): z' = y * x' = 3, so z(1) = 0.25 + 3
  CHECK(std::abs(rep.at("z_final").get<double>() - 3.25) <= 1e-9);
  CHECK(rep.at("max_residual").get<double>() <= 1e-6);

  std::ifstream csv(r.dir / "lift.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,gamma1,gamma2,z,residual");
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    double t, g1, g2, z, res;
    char c;
    std::istringstream ss(line);
    ss >> t >> c >> g1 >> c >> g2 >> c >> z >> c >> res;
    REQUIRE_FALSE(ss.fail());
    CHECK(std::abs(z - (0.25 + 1.5 * g1)) <= 1e-9);
    CHECK(res <= 1e-6);
    ++rows;
  }
  CHECK(rows == 401);
}

TEST_CASE("lift reports incompleteness with exit 1") {
  Run r = runCli("lift_lost", "lift", R"({
  "fibration": {"builtin": "planar_twist", "f": "y"},
  "path": {"type": "segment", "from": [0.0, 0.0], "to": [0.0, 2.0]},
  "steps": 200})");
  CHECK(r.code == 1);
  json rep = r.report();
  CHECK_FALSE(rep.at("complete").get<bool>());
  CHECK(rep.contains("lost_transversality_at"));
}

TEST_CASE("homotopy command accepts capped and rejects degenerate") {
  Run ok = runCli("homotopy_capped", "homotopy", R"({
  "fibration": {"builtin": "capped"},
  "grid": {"n": 11, "extent": 3.0},
  "t_count": 5})");
  CHECK(ok.code == 0);
  json rep = ok.report();
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("sigma").get<int>() == 1);
  CHECK(rep.at("margins").size() == 5);

  Run bad = runCli("homotopy_deg", "homotopy", R"({
  "fibration": {"builtin": "degenerate", "k": 3},
  "grid": {"n": 11, "extent": 3.0}})");
  CHECK(bad.code == 1);
  CHECK(bad.report().contains("rejected"));
}

TEST_CASE("demo commands") {
  Run ot = runCli("demo_ot", "demo", R"({"name": "overtwisted"})");
  CHECK(ot.code == 1);  // signals "not a fibration"
  json rep = ot.report();
  CHECK_FALSE(rep.at("is_fibration").get<bool>());
  CHECK(std::abs(rep.at("pierce_y").get<double>() -
                 std::sqrt(3.14159265358979323846 * 3.14159265358979323846 - 4.0)) <=
        1e-10);

  Run rad = runCli("demo_radial", "demo", R"({"name": "radial"})");
  CHECK(rad.code == 1);  // c vanishes: expected failure of the contact property
  CHECK(rad.report().at("max_abs_c").get<double>() <= 1e-6);
}

TEST_CASE("reports are byte-identical across reruns") {
  const std::string config = std::string(R"({
  "fibration": {"builtin": "capped"},
  "pair_budget": 2000,
  )") + kSmallGrids + "}";
  Run a = runCli("det_a", "certify", config, 123);
  Run b = runCli("det_b", "certify", config, 123);
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(a.rawReport() == b.rawReport());
  CHECK(a.rawReport().find("elapsed") == std::string::npos);  // timing stays in stderr
}

TEST_CASE("runMain argument handling") {
  std::ostringstream out, err;
  CHECK(skewfib::cli::runMain({"--help"}, out, err) == 0);
  CHECK(out.str().find("certify") != std::string::npos);

  std::ostringstream out2, err2;
  CHECK(skewfib::cli::runMain({"bogus-command"}, out2, err2) == 2);

  std::ostringstream out3, err3;
  CHECK(skewfib::cli::runMain({"certify"}, out3, err3) == 2);  // --config required

  fs::path dir = freshDir("runmain");
  std::ofstream(dir / "config.json")
      << R"({"fibration": {"builtin": "hopf"}, "checks": ["skew"]})";
  std::ostringstream out4, err4;
  int code = skewfib::cli::runMain({"certify", "--config",
                                    (dir / "config.json").string(), "--out",
                                    dir.string(), "--seed", "7"},
                                   out4, err4);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "report.json"));
}
