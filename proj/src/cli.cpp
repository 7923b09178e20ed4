#include "carpet/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "carpet/parallel.hpp"

namespace carpet {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError(what + ": not a number: '" + s + "'");
  return v;
}

cplx parse_complex(const std::string& s, const std::string& what) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) return {parse_double(parts[0], what), 0.0};
  if (parts.size() == 2) return {parse_double(parts[0], what), parse_double(parts[1], what)};
  throw UsageError(what + ": expected re or re:im, got '" + s + "'");
}

Window parse_window(const std::string& s) {
  const auto p = split(s, ',');
  if (p.size() != 3) throw UsageError("--window: expected cx,cy,hw");
  Window w{cplx(parse_double(p[0], "--window"), parse_double(p[1], "--window")),
           parse_double(p[2], "--window"), false};
  if (!(w.half_width > 0.0)) throw UsageError("--window: half width must be positive");
  return w;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(std::string("config: bad value for '") + key + "'");
  }
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw InputError(std::string("config: ") + what + " must be positive");
}

struct Flags {
  std::string config;
  std::string map, map2;
  int res = 0;
  std::string window;
  int max_iter = 0;
  double tol_px = 0.0;
  std::uint64_t seed = 0;
  long samples = 0;
  std::string out, components, out_dir, xi;
  int max_exp = 0;
};

void emit(const RunConfig& cfg, const Json& j, std::ostream& out) {
  if (cfg.out.empty()) {
    out << dump_json(j);
  } else {
    write_file(cfg.out, dump_json(j));
  }
}

Json header(const char* command, const RunConfig& cfg) {
  Json j;
  j["command"] = command;
  j["config"] = config_json(cfg);
  return j;
}

RasterOptions raster_options(const RunConfig& cfg, int default_res) {
  RasterOptions o;
  o.window = cfg.window;
  o.resolution = cfg.resolution_or(default_res);
  o.max_iter = cfg.max_iter;
  return o;
}

std::vector<BoettcherChart> charts_for(const RationalMap& f, const OrbitReport& rep,
                                       const Scene& scene, long per_chart, std::uint64_t seed,
                                       Json& errors) {
  std::vector<BoettcherChart> charts;
  for (const auto& c : rep.cycles) {
    if (c.period != 1 || c.cls != CycleClass::Superattracting) continue;
    const SpherePoint p = c.points.front();
    const int id = component_of(scene, p);
    if (id < 0) {
      errors.push_back({{"point", to_json(p)}, {"error", "no component holds the point"}});
      continue;
    }
    std::vector<SpherePoint> pts;
    const int n = scene.grid.resolution();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (scene.comps.map[scene.grid.index(i, j)] == id) pts.push_back(scene.grid.pixel_point(i, j));
    std::mt19937_64 rng(seed);
    const size_t take = std::min(pts.size(), static_cast<size_t>(std::max(per_chart, 1L)));
    for (size_t i = 0; i < take; ++i) std::swap(pts[i], pts[i + rng() % (pts.size() - i)]);
    pts.resize(take);
    charts.push_back(boettcher_chart(f, p, pts));
  }
  return charts;
}

Json error_json(const char* kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

int cmd_orbits(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  Json j = header("orbits", cfg);
  j["map"] = map_to_json(f);
  j["orbits"] = orbit_json(rep);
  emit(cfg, j, out);
  return rep.is_pcf ? 0 : 2;
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw UsageError("render: --out is required");
  const RationalMap f = read_map(cfg.map_path);
  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  const RasterOptions o = raster_options(cfg, 512);
  Json j = header("render", cfg);
  if (cfg.components_out.empty()) {
    const RasterGrid grid = rasterize(f, rep, o);
    write_file(cfg.out, ppm_image(grid));
    j["julia_pixels"] = grid.julia_count();
    j["unresolved_pixels"] = grid.unresolved_count();
  } else {
    const Scene scene = build_scene(f, rep.attracting_cycles(), o);
    write_file(cfg.out, ppm_image(scene.grid));
    const auto curves = trace_all(scene);
    Json table = header("components", cfg);
    table["components"] = component_table(scene, curves);
    write_file(cfg.components_out, dump_json(table));
    j["julia_pixels"] = scene.grid.julia_count();
    j["unresolved_pixels"] = scene.grid.unresolved_count();
    j["components"] = static_cast<long>(scene.comps.list.size());
  }
  j["image"] = cfg.out;
  out << dump_json(j);
  return 0;
}

int cmd_geometry(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  const Scene scene = build_scene(f, rep.attracting_cycles(), raster_options(cfg, 512));
  const auto curves = trace_all(scene);
  Json j = header("geometry", cfg);
  j["carpet_evidence"] = evidence_json(carpet_evidence(scene, curves));
  j["geometry"] = geometry_json(geometry_report(scene, curves, cfg.samples.value_or(2000), cfg.seed));
  emit(cfg, j, out);
  return 0;
}

Json elevator_section(const RationalMap& f, const RunConfig& cfg, bool& ok) {
  NormalizeOptions no;
  no.resolution = cfg.resolution_or(1024);
  no.max_iter = cfg.max_iter;
  no.seed = cfg.seed;
  const ElevatorContext ctx = normalize(f, no);
  const int n = static_cast<int>(cfg.samples.value_or(100));
  const DistortionStats s = distortion_stats(ctx, n, cfg.seed);
  int nested_ok = 0;
  for (const auto& [p, r] : sample_disks(ctx, n, cfg.seed)) {
    const NestedCheck c = nested_consistency(ctx, p, r);
    nested_ok += c.monotone && c.lands;
  }
  Json j = elevator_json(ctx, s);
  j["nested"] = {{"tested", n}, {"consistent", nested_ok}};
  ok = s.invalid == 0 && nested_ok == n;
  return j;
}

int cmd_elevator(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  bool ok = false;
  Json j = header("elevator", cfg);
  j["elevator"] = elevator_section(f, cfg, ok);
  emit(cfg, j, out);
  return ok ? 0 : 2;
}

int cmd_boettcher(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  const Scene scene = build_scene(f, rep.attracting_cycles(), raster_options(cfg, 512));
  Json errors = Json::array();
  const auto charts = charts_for(f, rep, scene, cfg.samples.value_or(200), cfg.seed, errors);
  Json j = header("boettcher", cfg);
  Json a = Json::array();
  for (const auto& c : charts) a.push_back(boettcher_json(c));
  j["charts"] = a;
  j["errors"] = errors;
  emit(cfg, j, out);
  return charts.empty() ? 2 : 0;
}

int cmd_symmetries(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  const Scene scene = build_scene(f, rep.attracting_cycles(), raster_options(cfg, 512));
  SymmetryOptions so;
  so.tol_pixels = cfg.tol_px;
  const SymmetryReport sr = detect_symmetries(f, scene, rep, so);
  Json j = header("symmetries", cfg);
  j["symmetries"] = symmetry_json(sr);
  emit(cfg, j, out);
  return sr.group.closed ? 0 : 2;
}

int cmd_verify_eq(const RunConfig& cfg, std::ostream& out) {
  const RationalMap f = read_map(cfg.map_path);
  const RationalMap g = read_map(cfg.map2_path);
  const MoebiusMap xi = parse_moebius(cfg.xi);
  const RasterOptions o = raster_options(cfg, 512);
  auto samples = [&](const RationalMap& h) {
    const OrbitReport rep = postcritical_report(h, cfg.budget, cfg.tolerances);
    return julia_samples(rasterize(h, rep, o), h, 4000, cfg.seed);
  };
  const JuliaSamples fs = samples(f), gs = samples(g);
  const FunctionalSearch s = functional_equation_search(f, g, xi, fs, gs, cfg.max_exp, cfg.tol_px);
  Json j = header("verify-eq", cfg);
  j["xi"] = to_json(xi);
  j["functional_equation"] = functional_json(s);
  emit(cfg, j, out);
  return s.precheck ? 0 : 2;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  namespace fs = std::filesystem;
  const RationalMap f = read_map(cfg.map_path);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw OutputError("cannot create " + cfg.out_dir);
  const std::string json_path = (fs::path(cfg.out_dir) / "report.json").string();
  const std::string ppm_path = (fs::path(cfg.out_dir) / "julia.ppm").string();
  const std::string inv_path = (fs::path(cfg.out_dir) / "julia_inverted.ppm").string();

  bool ok = true;
  Json j = header("report", cfg);
  j["map"] = map_to_json(f);
  auto stage = [&](const char* name, auto&& body) {
    try {
      j[name] = body();
    } catch (const Error& e) {
      ok = false;
      j[name] = error_json("domain", e.what());
    }
  };

  const OrbitReport rep = postcritical_report(f, cfg.budget, cfg.tolerances);
  j["orbits"] = orbit_json(rep);
  ok = ok && rep.is_pcf;

  std::optional<Scene> scene;
  stage("raster", [&] {
    scene = build_scene(f, rep.attracting_cycles(), raster_options(cfg, 512));
    write_file(ppm_path, ppm_image(scene->grid));
    write_file(inv_path, ppm_image(scene->inverted));
    return Json{{"images", {ppm_path, inv_path}},
                {"julia_pixels", scene->grid.julia_count()},
                {"unresolved_pixels", scene->grid.unresolved_count()},
                {"components", static_cast<long>(scene->comps.list.size())}};
  });
  if (scene) {
    const auto curves = trace_all(*scene);
    j["components"] = component_table(*scene, curves);
    stage("geometry", [&] {
      Json g;
      g["carpet_evidence"] = evidence_json(carpet_evidence(*scene, curves));
      g["estimators"] = geometry_json(geometry_report(*scene, curves, cfg.samples.value_or(2000), cfg.seed));
      return g;
    });
    stage("boettcher", [&] {
      Json errors = Json::array();
      const auto charts = charts_for(f, rep, *scene, 200, cfg.seed, errors);
      Json a = Json::array();
      for (const auto& c : charts) a.push_back(boettcher_json(c));
      return Json{{"charts", a}, {"errors", errors}};
    });
    stage("symmetries", [&] {
      SymmetryOptions so;
      so.tol_pixels = cfg.tol_px;
      const SymmetryReport sr = detect_symmetries(f, *scene, rep, so);
      ok = ok && sr.group.closed;
      return symmetry_json(sr);
    });
  }
  stage("elevator", [&] {
    RunConfig ec = cfg;
    ec.resolution.reset();
    bool good = false;
    Json e = elevator_section(f, ec, good);
    ok = ok && good;
    return e;
  });
  j["ok"] = ok;
  write_file(json_path, dump_json(j));
  out << dump_json(Json{{"report", json_path}, {"images", {ppm_path, inv_path}}, {"ok", ok}});
  return ok ? 0 : 2;
}

void apply_threads() {
  const char* env = std::getenv("CARPET_DYN_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("CARPET_DYN_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

void apply_config(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  static const std::vector<std::string> known = {
      "map", "map2", "resolution", "window", "max_iter", "budget", "tolerances", "seed",
      "samples", "out", "components", "out_dir", "xi", "max_exp"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw InputError("config: unknown key '" + it.key() + "'");
  if (j.contains("map")) cfg.map_path = get<std::string>(j, "map");
  if (j.contains("map2")) cfg.map2_path = get<std::string>(j, "map2");
  if (j.contains("resolution")) {
    const int r = get<int>(j, "resolution");
    if (r < 8) throw InputError("config: resolution must be at least 8");
    cfg.resolution = r;
  }
  if (j.contains("window")) {
    const auto w = get<std::vector<double>>(j, "window");
    if (w.size() != 3 || !(w[2] > 0.0)) throw InputError("config: window must be [cx, cy, hw]");
    cfg.window = Window{cplx(w[0], w[1]), w[2], false};
  }
  if (j.contains("max_iter")) cfg.max_iter = get<int>(j, "max_iter");
  if (j.contains("budget")) cfg.budget = get<int>(j, "budget");
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    if (!t.is_object()) throw InputError("config: tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string& k = it.key();
      const double v = get<double>(t, k.c_str());
      check_positive(v, ("tolerances." + k).c_str());
      if (k == "root") cfg.tolerances.root = v;
      else if (k == "cycle") cfg.tolerances.revisit = v;
      else if (k == "exact") cfg.tolerances.exact = v;
      else if (k == "hausdorff_px") cfg.tol_px = v;
      else throw InputError("config: unknown tolerance '" + k + "'");
    }
  }
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("samples")) cfg.samples = get<long>(j, "samples");
  if (j.contains("out")) cfg.out = get<std::string>(j, "out");
  if (j.contains("components")) cfg.components_out = get<std::string>(j, "components");
  if (j.contains("out_dir")) cfg.out_dir = get<std::string>(j, "out_dir");
  if (j.contains("xi")) cfg.xi = get<std::string>(j, "xi");
  if (j.contains("max_exp")) cfg.max_exp = get<int>(j, "max_exp");
  if (cfg.max_iter < 1 || cfg.budget < 1) throw InputError("config: iteration budgets must be positive");
  if (cfg.samples && *cfg.samples < 1) throw InputError("config: samples must be positive");
}

Json config_json(const RunConfig& cfg) {
  Json j;
  j["map"] = cfg.map_path;
  if (!cfg.map2_path.empty()) j["map2"] = cfg.map2_path;
  j["resolution"] = cfg.resolution ? Json(*cfg.resolution) : Json(nullptr);
  j["window"] = Json::array({cfg.window.center.real(), cfg.window.center.imag(), cfg.window.half_width});
  j["max_iter"] = cfg.max_iter;
  j["budget"] = cfg.budget;
  j["tolerances"] = {{"root", cfg.tolerances.root},
                     {"cycle", cfg.tolerances.revisit},
                     {"exact", cfg.tolerances.exact},
                     {"hausdorff_px", cfg.tol_px}};
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples ? Json(*cfg.samples) : Json(nullptr);
  return j;
}

MoebiusMap parse_moebius(const std::string& text) {
  auto parts = split(text, ',');
  bool conj = false;
  if (parts.size() == 5 && parts[4] == "conj") {
    conj = true;
    parts.pop_back();
  }
  if (parts.size() != 4) throw UsageError("--xi: expected a,b,c,d[,conj]");
  const cplx a = parse_complex(parts[0], "--xi"), b = parse_complex(parts[1], "--xi"),
             c = parse_complex(parts[2], "--xi"), d = parse_complex(parts[3], "--xi");
  if (std::abs(a * d - b * c) == 0.0) throw UsageError("--xi: singular matrix");
  return MoebiusMap(a, b, c, d, conj);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"carpet-dyn: dynamics and geometry of carpet Julia sets"};
  app.require_subcommand(1);
  Flags fl;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"orbits", "postcritical report", cmd_orbits},
      {"render", "PPM image of the basins", cmd_render},
      {"geometry", "carpet geometry estimators", cmd_geometry},
      {"elevator", "conformal elevator statistics", cmd_elevator},
      {"boettcher", "Boettcher charts at superattracting fixed points", cmd_boettcher},
      {"symmetries", "Moebius symmetry group", cmd_symmetries},
      {"verify-eq", "functional equation search", cmd_verify_eq},
      {"report", "full pipeline with JSON and PPM output", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> apps;
  for (const Sub& s : subs) {
    CLI::App* a = app.add_subcommand(s.name, s.help);
    a->add_option("map", fl.map, "map JSON file");
    if (std::string(s.name) == "verify-eq") {
      a->add_option("map2", fl.map2, "second map JSON file");
      a->add_option("--xi", fl.xi, "a,b,c,d[,conj]");
      a->add_option("--max-exp", fl.max_exp, "largest exponent (at most 6)");
    }
    a->add_option("--config", fl.config, "run configuration JSON");
    a->add_option("--res", fl.res, "raster resolution");
    a->add_option("--window", fl.window, "cx,cy,hw");
    a->add_option("--max-iter", fl.max_iter, "iteration budget per pixel");
    a->add_option("--tol-px", fl.tol_px, "Hausdorff tolerance in pixels");
    a->add_option("--seed", fl.seed, "RNG seed");
    a->add_option("--samples", fl.samples, "sample count");
    a->add_option("--out", fl.out, "output path");
    if (std::string(s.name) == "render") a->add_option("--components", fl.components, "component table JSON");
    if (std::string(s.name) == "report") a->add_option("--out-dir", fl.out_dir, "output directory");
    apps.emplace_back(a, &s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 1;
  }

  CLI::App* used = nullptr;
  const Sub* sub = nullptr;
  for (auto& [a, s] : apps)
    if (a->parsed()) {
      used = a;
      sub = s;
    }
  if (!used) {
    err << app.help();
    return 1;
  }
  auto given = [&](const char* name) {
    const CLI::Option* o = used->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };

  RunConfig cfg;
  try {
    apply_threads();
    if (given("--config")) apply_config(cfg, read_json(fl.config));
    if (given("map")) cfg.map_path = fl.map;
    if (given("map2")) cfg.map2_path = fl.map2;
    if (given("--res")) {
      if (fl.res < 8) throw UsageError("--res must be at least 8");
      cfg.resolution = fl.res;
    }
    if (given("--window")) cfg.window = parse_window(fl.window);
    if (given("--max-iter")) {
      if (fl.max_iter < 1) throw UsageError("--max-iter must be positive");
      cfg.max_iter = fl.max_iter;
    }
    if (given("--tol-px")) {
      if (!(fl.tol_px > 0.0)) throw UsageError("--tol-px must be positive");
      cfg.tol_px = fl.tol_px;
    }
    if (given("--seed")) cfg.seed = fl.seed;
    if (given("--samples")) {
      if (fl.samples < 1) throw UsageError("--samples must be positive");
      cfg.samples = fl.samples;
    }
    if (given("--out")) cfg.out = fl.out;
    if (given("--components")) cfg.components_out = fl.components;
    if (given("--out-dir")) cfg.out_dir = fl.out_dir;
    if (given("--xi")) cfg.xi = fl.xi;
    if (given("--max-exp")) cfg.max_exp = fl.max_exp;
    if (cfg.map_path.empty()) throw UsageError(std::string(sub->name) + ": no map given");
    if (std::string(sub->name) == "verify-eq" && cfg.map2_path.empty())
      throw UsageError("verify-eq: no second map given");
    return sub->run(cfg, out);
  } catch (const UsageError& e) {
    err << e.what() << "\n" << used->help();
    return 1;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    out << dump_json(error_json("precondition", e.what()));
    return 2;
  } catch (const Error& e) {
    out << dump_json(error_json("domain", e.what()));
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace carpet
