#include "skewfib/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewfib/contact.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/linespace.hpp"
#include "skewfib/spherecorr.hpp"

namespace skewfib::cli {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string csvNum(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void requireKeys(const json& obj, const std::vector<std::string>& allowed,
                 const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto& k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) throw ConfigError("unknown key \"" + it.key() + "\" in " + context);
  }
}

std::vector<std::string> xyz() { return {"x", "y", "z"}; }

fib::FibrationSpec buildSpec(const json& f) {
  requireKeys(f, {"builtin", "sigma", "k", "f", "b1", "b2", "v", "label"}, "fibration");
  if (!f.contains("builtin")) throw ConfigError("fibration.builtin is required");
  std::string name = f.at("builtin").get<std::string>();
  if (name == "hopf") return fib::makeHopf(f.value("sigma", 1));
  if (name == "degenerate") return fib::makeDegenerate(f.value("k", 3));
  if (name == "capped") {
    if (!f.contains("f")) return fib::makeCappedAtan();
    expr::Expr fs = expr::parse(f.at("f").get<std::string>(), {"s"});
    return fib::FibrationSpec("capped(" + f.at("f").get<std::string>() + ")",
                              fib::BRep{fib::Frame::standard(), fib::BMap::capped(fs)});
  }
  if (name == "glued") return fib::makeGlued();
  if (name == "planar_linear") return fib::makePlanarLinear();
  if (name == "planar_twist")
    return fib::makePlanarTwist(expr::parse(f.value("f", std::string("y")), {"y"}));
  if (name == "vfield") {
    if (!f.contains("v") || !f.at("v").is_array() || f.at("v").size() != 3)
      throw ConfigError("fibration.v must be three expression strings");
    return fib::makeVField(expr::parse(f.at("v")[0].get<std::string>(), xyz()),
                           expr::parse(f.at("v")[1].get<std::string>(), xyz()),
                           expr::parse(f.at("v")[2].get<std::string>(), xyz()),
                           f.value("label", std::string("vfield")));
  }
  if (name == "expressions") {
    if (!f.contains("b1") || !f.contains("b2"))
      throw ConfigError("fibration.b1 and fibration.b2 are required");
    expr::Expr b1 = expr::parse(f.at("b1").get<std::string>(), {"p1", "p2"});
    expr::Expr b2 = expr::parse(f.at("b2").get<std::string>(), {"p1", "p2"});
    return fib::FibrationSpec(
        f.value("label", std::string("expressions")),
        fib::BRep{fib::Frame::standard(), fib::BMap::expressions(b1, b2)});
  }
  throw ConfigError("unknown fibration builtin \"" + name + "\"");
}

contact::OneForm buildForm(const json& f) {
  requireKeys(f, {"builtin", "a", "b", "c", "label"}, "form");
  if (f.contains("builtin")) {
    std::string name = f.at("builtin").get<std::string>();
    if (name == "standard_tight") return contact::OneForm::standardTight();
    if (name == "planar_tight") return contact::OneForm::planarTight();
    if (name == "overtwisted") return contact::OneForm::overtwisted();
    throw ConfigError("unknown form builtin \"" + name + "\"");
  }
  if (!f.contains("a") || !f.contains("b") || !f.contains("c"))
    throw ConfigError("form needs a, b, c coefficient expressions");
  return contact::OneForm(expr::parse(f.at("a").get<std::string>(), xyz()),
                          expr::parse(f.at("b").get<std::string>(), xyz()),
                          expr::parse(f.at("c").get<std::string>(), xyz()),
                          f.value("label", std::string("form")));
}

SolverConfig buildSolver(const json& root) {
  SolverConfig cfg;
  if (root.contains("solver")) {
    const json& s = root.at("solver");
    requireKeys(s, {"residual_tol", "max_iters", "fd_step", "ode_step"}, "solver");
    cfg.residual_tol = s.value("residual_tol", cfg.residual_tol);
    cfg.max_iters = s.value("max_iters", cfg.max_iters);
    cfg.fd_step = s.value("fd_step", cfg.fd_step);
    cfg.ode_step = s.value("ode_step", cfg.ode_step);
  }
  cfg.validate();
  return cfg;
}

fib::GridSpec buildGrid(const json& root) {
  fib::GridSpec g;
  if (root.contains("grid")) {
    const json& j = root.at("grid");
    requireKeys(j, {"n", "extent"}, "grid");
    g.n = j.value("n", g.n);
    g.extent = j.value("extent", g.extent);
  }
  if (g.n < 2 || g.extent <= 0) throw ConfigError("grid needs n >= 2 and extent > 0");
  return g;
}

fib::Grid3Spec buildGrid3(const json& root) {
  fib::Grid3Spec g;
  if (root.contains("grid3")) {
    const json& j = root.at("grid3");
    requireKeys(j, {"n", "extent", "offset"}, "grid3");
    g.n = j.value("n", g.n);
    g.extent = j.value("extent", g.extent);
    if (j.contains("offset")) {
      const json& o = j.at("offset");
      if (!o.is_array() || o.size() != 3) throw ConfigError("grid3.offset must be [x,y,z]");
      g.offset = {o[0].get<double>(), o[1].get<double>(), o[2].get<double>()};
    }
  }
  if (g.n < 2 || g.extent <= 0) throw ConfigError("grid3 needs n >= 2 and extent > 0");
  return g;
}

json witnessJson(const Witness& w) {
  return json{{"kind", w.kind}, {"data", w.data}, {"value", w.value}};
}

json certJson(const Certificate& c) {
  json j{{"property", c.property}, {"verdict", to_string(c.verdict)},
         {"margin", c.margin},     {"sigma", c.sigma},
         {"grid", c.grid},         {"tolerances", c.tolerances}};
  json ws = json::array();
  for (const auto& w : c.witnesses) ws.push_back(witnessJson(w));
  j["witnesses"] = ws;
  j["series"] = c.series;
  return j;
}

json loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return cfg;
}

void writeReport(const Options& opts, const json& report, std::ostream& out) {
  std::filesystem::create_directories(opts.out_dir);
  std::filesystem::path path = std::filesystem::path(opts.out_dir) / "report.json";
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << report.dump(2) << "\n";
  out << "report: " << path.string() << "\n";
}

json baseReport(const Options& opts, const json& cfg) {
  return json{{"version", kVersion},
              {"command", opts.command},
              {"seed", opts.seed},
              {"config", cfg},
              {"thresholds",
               {{"eps_stop", contact::kEpsStop},
                {"eps_trans", contact::kEpsTrans},
                {"angle_tol", contact::kAngleTol}}}};
}

// ---------------------------------------------------------------------------

int cmdCertify(const Options& opts, const json& cfg, std::ostream& out) {
  requireKeys(cfg, {"fibration", "form", "grid", "grid3", "solver", "checks",
                    "pair_budget", "covering_radii", "covering_threshold"},
              "config");
  SolverConfig solver = buildSolver(cfg);
  fib::GridSpec grid = buildGrid(cfg);
  fib::Grid3Spec grid3 = buildGrid3(cfg);
  json report = baseReport(opts, cfg);
  json certs = json::array();

  bool any_fail = false;
  bool any_error = false;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      Certificate c = fn();
      if (!c.pass()) any_fail = true;
      json cj = certJson(c);
      cj["check"] = name;
      certs.push_back(cj);
      out << name << ": " << to_string(c.verdict) << "\n";
    } catch (const Error& e) {
      any_error = true;
      certs.push_back(json{{"check", name}, {"error", e.what()}});
      out << name << ": error (" << e.what() << ")\n";
    }
  };

  if (cfg.contains("form")) {
    contact::OneForm form = buildForm(cfg.at("form"));
    run("contact", [&] { return contact::certifyContact(form, grid3); });
  }

  if (cfg.contains("fibration")) {
    fib::FibrationSpec spec = buildSpec(cfg.at("fibration"));
    report["fibration_label"] = spec.label();

    std::vector<std::string> checks;
    if (cfg.contains("checks")) {
      for (const auto& c : cfg.at("checks")) checks.push_back(c.get<std::string>());
    } else if (spec.isBMap()) {
      checks = {"skew", "nondegenerate", "covering", "contact", "definiteness", "claim"};
    } else {
      checks = {"line_field", "contact"};
    }

    std::size_t budget = cfg.value("pair_budget", 0u);
    std::vector<double> cov_radii{1, 2, 5, 10, 20};
    if (cfg.contains("covering_radii"))
      cov_radii = cfg.at("covering_radii").get<std::vector<double>>();
    double cov_threshold = cfg.value("covering_threshold", 10.0);

    for (const std::string& name : checks) {
      if (name == "skew")
        run(name, [&] { return fib::certifySkew(spec, grid, budget, opts.seed); });
      else if (name == "nondegenerate")
        run(name, [&] { return fib::certifyNondegenerate(spec, grid); });
      else if (name == "covering")
        run(name, [&] { return fib::certifyCovering(spec, cov_radii, cov_threshold); });
      else if (name == "contact")
        run(name, [&] { return contact::certifyContact(spec, grid3, solver); });
      else if (name == "definiteness")
        run(name, [&] { return lines::definitenessOnM(spec, grid); });
      else if (name == "claim")
        run(name, [&] { return lines::verifyClaim(spec, grid); });
      else if (name == "line_field")
        run(name, [&] { return fib::verifyLineField(spec, grid3, solver); });
      else
        throw ConfigError("unknown check \"" + name + "\"");
    }
    report["sigma"] = spec.cachedSigma();
  }

  if (!cfg.contains("form") && !cfg.contains("fibration"))
    throw ConfigError("certify needs a fibration or a form");

  report["certificates"] = certs;
  report["pass"] = !any_fail && !any_error;
  writeReport(opts, report, out);
  return any_error ? 2 : (any_fail ? 1 : 0);
}

int cmdFoliation(const Options& opts, const json& cfg, std::ostream& out) {
  requireKeys(cfg, {"fibration", "solver", "radii", "samples", "step_scale", "max_steps"},
              "config");
  if (!cfg.contains("fibration")) throw ConfigError("foliation needs a fibration");
  if (!cfg.contains("radii")) throw ConfigError("foliation needs radii");
  fib::FibrationSpec spec = buildSpec(cfg.at("fibration"));
  SolverConfig solver = buildSolver(cfg);
  std::vector<double> radii = cfg.at("radii").get<std::vector<double>>();
  int samples = cfg.value("samples", 32);
  double step_scale = cfg.value("step_scale", 0.005);
  int max_steps = cfg.value("max_steps", 200000);

  json report = baseReport(opts, cfg);
  report["fibration_label"] = spec.label();
  json scans = json::array();

  std::filesystem::create_directories(opts.out_dir);
  std::filesystem::path csv_path = std::filesystem::path(opts.out_dir) / "leaves.csv";
  std::ofstream csv(csv_path);
  csv << "radius,leaf_id,step,x,y,z,longitude\n";

  bool candidate = false;
  for (double r : radii) {
    contact::ScanResult scan =
        contact::scanClosedLeaves(spec, r, samples, solver, step_scale, max_steps);
    candidate = candidate || scan.closed_candidate;
    json sj{{"radius", scan.radius},
            {"samples", scan.samples},
            {"arc_step", scan.arc_step},
            {"verdict", scan.verdict},
            {"min_margin", scan.min_margin},
            {"closed_candidate", scan.closed_candidate},
            {"candidate_phi", scan.candidate_phi}};
    json recs = json::array();
    for (const auto& rec : scan.records)
      recs.push_back(json{{"phi", rec.phi},
                          {"ret", rec.ret},
                          {"winding", rec.winding},
                          {"status", rec.status}});
    sj["records"] = recs;
    scans.push_back(sj);
    out << "radius " << r << ": " << scan.verdict << "\n";

    for (std::size_t li = 0; li < scan.leaves.size(); ++li) {
      const auto& leaf = scan.leaves[li];
      for (std::size_t si = 0; si < leaf.points.size(); ++si) {
        const Vec3& p = leaf.points[si];
        csv << csvNum(r) << ',' << li << ',' << si << ',' << csvNum(p.x) << ','
            << csvNum(p.y) << ',' << csvNum(p.z) << ',' << csvNum(leaf.longitudes[si])
            << '\n';
      }
    }
  }
  out << "leaves: " << csv_path.string() << "\n";

  report["scans"] = scans;
  report["closed_candidate"] = candidate;
  writeReport(opts, report, out);
  return candidate ? 1 : 0;  // finding a closed leaf contradicts tightness evidence
}

int cmdLift(const Options& opts, const json& cfg, std::ostream& out) {
  requireKeys(cfg, {"fibration", "solver", "path", "z0", "steps"}, "config");
  if (!cfg.contains("fibration") || !cfg.contains("path"))
    throw ConfigError("lift needs a fibration and a path");
  fib::FibrationSpec spec = buildSpec(cfg.at("fibration"));
  SolverConfig solver = buildSolver(cfg);
  double z0 = cfg.value("z0", 0.0);
  int steps = cfg.value("steps", 1000);

  const json& pj = cfg.at("path");
  requireKeys(pj, {"type", "from", "to", "center", "radius", "points"}, "path");
  std::string type = pj.value("type", std::string());
  std::function<Vec2(double)> gamma;
  if (type == "segment") {
    auto fr = pj.at("from").get<std::vector<double>>();
    auto to = pj.at("to").get<std::vector<double>>();
    if (fr.size() != 2 || to.size() != 2) throw ConfigError("segment endpoints are [x,y]");
    gamma = [=](double t) {
      return Vec2{fr[0] + (to[0] - fr[0]) * t, fr[1] + (to[1] - fr[1]) * t};
    };
  } else if (type == "circle") {
    std::vector<double> c{0.0, 0.0};
    if (pj.contains("center")) c = pj.at("center").get<std::vector<double>>();
    double r = pj.value("radius", 1.0);
    if (c.size() != 2) throw ConfigError("circle center is [x,y]");
    gamma = [=](double t) {
      return Vec2{c[0] + r * std::cos(2 * kPi * t), c[1] + r * std::sin(2 * kPi * t)};
    };
  } else if (type == "polyline") {
    auto pts = pj.at("points").get<std::vector<std::vector<double>>>();
    if (pts.size() < 2) throw ConfigError("polyline needs at least two points");
    for (const auto& p : pts)
      if (p.size() != 2) throw ConfigError("polyline points are [x,y]");
    gamma = [=](double t) {
      double s = std::clamp(t, 0.0, 1.0) * (static_cast<double>(pts.size()) - 1);
      std::size_t i = std::min(static_cast<std::size_t>(s), pts.size() - 2);
      double w = s - static_cast<double>(i);
      return Vec2{pts[i][0] + (pts[i + 1][0] - pts[i][0]) * w,
                  pts[i][1] + (pts[i + 1][1] - pts[i][1]) * w};
    };
  } else {
    throw ConfigError("path.type must be segment | circle | polyline");
  }

  json report = baseReport(opts, cfg);
  report["fibration_label"] = spec.label();
  int exit_code = 0;
  try {
    contact::LiftResult lift =
        contact::legendrianLift(spec, gamma, 0.0, 1.0, steps, z0, solver);
    report["complete"] = true;
    report["max_residual"] = lift.max_residual;
    report["z_final"] = lift.z.back();
    out << "lift: complete, max residual " << lift.max_residual << "\n";

    std::filesystem::create_directories(opts.out_dir);
    std::filesystem::path csv_path = std::filesystem::path(opts.out_dir) / "lift.csv";
    std::ofstream csv(csv_path);
    csv << "t,gamma1,gamma2,z,residual\n";
    for (std::size_t i = 0; i < lift.t.size(); ++i)
      csv << csvNum(lift.t[i]) << ',' << csvNum(lift.gamma[i].x) << ','
          << csvNum(lift.gamma[i].y) << ',' << csvNum(lift.z[i]) << ','
          << csvNum(lift.residual[i]) << '\n';
    out << "lift csv: " << csv_path.string() << "\n";
  } catch (const LostTransversality& e) {
    report["complete"] = false;
    report["lost_transversality_at"] = e.t;
    out << "lift: lost transversality at t=" << e.t << "\n";
    exit_code = 1;
  }
  writeReport(opts, report, out);
  return exit_code;
}

int cmdHomotopy(const Options& opts, const json& cfg, std::ostream& out) {
  requireKeys(cfg, {"fibration", "solver", "grid", "t_count"}, "config");
  if (!cfg.contains("fibration")) throw ConfigError("homotopy needs a fibration");
  fib::FibrationSpec spec = buildSpec(cfg.at("fibration"));
  SolverConfig solver = buildSolver(cfg);
  fib::GridSpec grid = buildGrid(cfg);
  int t_count = cfg.value("t_count", 11);

  json report = baseReport(opts, cfg);
  report["fibration_label"] = spec.label();
  try {
    auto normalized = std::make_shared<const fib::FibrationSpec>(
        corr::normalizeSpec(spec, grid, solver));
    corr::HomotopyPath path = corr::certifyHomotopy(normalized, t_count, grid, solver);
    report["normalized_label"] = normalized->label();
    report["sigma"] = path.sigma;
    report["t_grid"] = path.t_grid;
    report["margins"] = path.margins;
    report["convexity_slack"] = path.convexity_slack;
    report["pass"] = path.pass;
    json certs = json::array();
    for (const auto& c : path.certificates) certs.push_back(certJson(c));
    report["certificates"] = certs;
    out << "homotopy: " << (path.pass ? "pass" : "fail") << "\n";
    writeReport(opts, report, out);
    return path.pass ? 0 : 1;
  } catch (const PreconditionFailed& e) {
    report["rejected"] = e.what();
    report["pass"] = false;
    out << "homotopy: rejected (" << e.what() << ")\n";
    writeReport(opts, report, out);
    return 1;
  }
}

int cmdDemo(const Options& opts, const json& cfg, std::ostream& out) {
  requireKeys(cfg, {"name", "solver", "grid3"}, "config");
  std::string name = cfg.value("name", std::string());
  json report = baseReport(opts, cfg);

  if (name == "overtwisted") {
    contact::OvertwistedReport d = contact::overtwistedDemo();
    report["vertical_defect"] = d.vertical_defect;
    report["interior_point"] = {d.interior_point.x, d.interior_point.y, d.interior_point.z};
    report["interior_direction"] = {d.interior_direction.x, d.interior_direction.y,
                                    d.interior_direction.z};
    report["cross_point"] = {d.cross_point.x, d.cross_point.y, d.cross_point.z};
    report["pierce_y"] = d.pierce_y;
    report["expected_y"] = d.expected_y;
    report["is_fibration"] = d.is_fibration;
    report["conclusion"] = d.conclusion;
    out << "demo overtwisted: pierce at y=" << d.pierce_y << ", not a fibration\n";
    writeReport(opts, report, out);
    return d.is_fibration ? 0 : 1;  // the demo exhibits a non-fibration
  }
  if (name == "radial") {
    SolverConfig solver = buildSolver(cfg);
    fib::Grid3Spec grid3;
    grid3.offset = {0.5, 0.5, 0.5};
    if (cfg.contains("grid3")) grid3 = buildGrid3(cfg);
    fib::FibrationSpec spec = fib::makeVField(
        expr::parse("x / sqrt(x^2 + y^2 + z^2)", xyz()),
        expr::parse("y / sqrt(x^2 + y^2 + z^2)", xyz()),
        expr::parse("z / sqrt(x^2 + y^2 + z^2)", xyz()), "radial");
    std::vector<Vec3> pts = grid3.points();
    double max_c = 0.0;
    for (const Vec3& p : pts)
      max_c = std::max(max_c, std::abs(contact::contactFunction(spec, p, solver)));
    report["max_abs_c"] = max_c;
    report["contact"] = max_c > 1e-6;
    report["conclusion"] = "gradient line field: c vanishes, the plane distribution "
                           "is nowhere contact (round spheres are tangent)";
    out << "demo radial: max |c| = " << max_c << ", not contact\n";
    writeReport(opts, report, out);
    return max_c > 1e-6 ? 2 : 1;  // expected: the property fails by construction
  }
  throw ConfigError("unknown demo \"" + name + "\"");
}

}  // namespace

int runCommand(const Options& opts, std::ostream& out, std::ostream& err) {
  auto start = std::chrono::steady_clock::now();
  int code = 2;
  try {
    json cfg = loadConfig(opts.config_path);
    if (opts.command == "certify") code = cmdCertify(opts, cfg, out);
    else if (opts.command == "foliation") code = cmdFoliation(opts, cfg, out);
    else if (opts.command == "lift") code = cmdLift(opts, cfg, out);
    else if (opts.command == "homotopy") code = cmdHomotopy(opts, cfg, out);
    else if (opts.command == "demo") code = cmdDemo(opts, cfg, out);
    else throw ConfigError("unknown command \"" + opts.command + "\"");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 2;
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  err << "elapsed: " << ms << " ms\n";  // timing stays out of the report
  return code;
}

int runMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"numerical toolkit for line fibrations of R^3 and their contact structures"};
  app.require_subcommand(1);

  Options opts;
  for (const char* name : {"certify", "foliation", "lift", "homotopy", "demo"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON config path")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "random seed for sampled checks");
    sub->callback([&opts, name] { opts.command = name; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return runCommand(opts, out, err);
}

}  // namespace skewfib::cli
