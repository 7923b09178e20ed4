#include "carpet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace carpet {

namespace {

void dump(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out += "[";
        for (size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], indent + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"nan\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      return;
    }
    default:
      out += j.dump();
  }
}

std::vector<cplx> coefficients_from_json(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].empty())
    throw InputError(std::string("map: '") + key + "' must be a nonempty array");
  std::vector<cplx> c;
  for (const auto& e : j[key]) {
    if (e.is_number()) {
      c.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      c.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InputError(std::string("map: entries of '") + key + "' must be [re, im] pairs");
    }
  }
  return c;
}

Json double_or_null(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, 0, out);
  out += "\n";
  return out;
}

RationalMap map_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("map: expected a JSON object");
  Polynomial p(coefficients_from_json(j, "numerator"));
  Polynomial q(coefficients_from_json(j, "denominator"));
  try {
    return RationalMap(std::move(p), std::move(q));
  } catch (const Error& e) {
    throw InputError(std::string("map: ") + e.what());
  }
}

Json map_to_json(const RationalMap& f) {
  Json j;
  for (const char* key : {"numerator", "denominator"}) {
    const Polynomial& p = key[0] == 'n' ? f.numerator() : f.denominator();
    Json a = Json::array();
    for (cplx c : p.coefficients()) a.push_back(to_json(c));
    j[key] = a;
  }
  return j;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

RationalMap read_map(const std::string& path) { return map_from_json(read_json(path)); }

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const SpherePoint& p) { return p.is_infinity() ? Json("inf") : to_json(p.value()); }

Json to_json(const MoebiusMap& m) {
  const MoebiusMap n = m.normalized();
  Json j;
  j["matrix"] = Json::array({to_json(n.a()), to_json(n.b()), to_json(n.c()), to_json(n.d())});
  j["orientation_reversing"] = n.orientation_reversing();
  return j;
}

Json to_json(const std::vector<SpherePoint>& points) {
  Json a = Json::array();
  for (const auto& p : points) a.push_back(to_json(p));
  return a;
}

Json orbit_json(const OrbitReport& rep) {
  Json j;
  j["degree"] = rep.degree;
  Json crit = Json::array();
  for (size_t i = 0; i < rep.orbits.size(); ++i) {
    const CriticalOrbit& o = rep.orbits[i];
    Json c;
    c["point"] = to_json(o.critical.point);
    c["local_degree"] = o.critical.local_degree;
    c["tail"] = to_string(o.tail.kind);
    c["preperiod"] = o.tail.preperiod;
    c["period"] = o.tail.period;
    c["orbit"] = to_json(o.tail.orbit);
    c["cycle_index"] = o.cycle_index ? Json(*o.cycle_index) : Json(nullptr);
    c["in_julia"] = o.in_julia;
    c["boundary_ambiguous"] = o.boundary_ambiguous;
    crit.push_back(c);
  }
  j["critical"] = crit;
  Json cycles = Json::array();
  for (const auto& c : rep.cycles) {
    Json x;
    x["points"] = to_json(c.points);
    x["period"] = c.period;
    x["multiplier"] = c.multiplier;
    x["class"] = to_string(c.cls);
    cycles.push_back(x);
  }
  j["cycles"] = cycles;
  j["post_finite"] = rep.post_finite;
  j["post"] = to_json(rep.post);
  j["post_c"] = to_json(rep.post_c);
  j["pcf"] = rep.is_pcf;
  j["subhyperbolic"] = rep.is_subhyperbolic;
  j["hyperbolic"] = rep.is_hyperbolic;
  j["offending_critical"] =
      rep.offending_critical ? Json(*rep.offending_critical) : Json(nullptr);
  j["degree_bound"] = rep.degree_bound;
  j["budget"] = rep.budget;
  j["tolerances"] = {{"revisit", rep.tolerances.revisit},
                     {"exact", rep.tolerances.exact},
                     {"root", rep.tolerances.root}};
  return j;
}

Json component_table(const Scene& scene, const std::vector<PeripheralCurve>& curves) {
  std::vector<const PeripheralCurve*> by_id(scene.comps.list.size(), nullptr);
  for (const auto& c : curves)
    if (c.component >= 0 && static_cast<size_t>(c.component) < by_id.size())
      by_id[c.component] = &c;
  Json a = Json::array();
  for (const Component& c : scene.comps.list) {
    Json x;
    x["id"] = c.id;
    x["label"] = c.label;
    x["pixels"] = c.pixels;
    x["diameter"] = by_id[c.id] ? Json(by_id[c.id]->diameter) : Json(nullptr);
    x["bbox"] = Json::array({c.i0, c.j0, c.i1, c.j1});
    x["touches_edge"] = c.touches_edge;
    a.push_back(x);
  }
  return a;
}

Json evidence_json(const CarpetEvidence& e) {
  return {{"components", e.components},
          {"traced", e.traced},
          {"sub_resolution", e.sub_resolution},
          {"unbounded", e.unbounded},
          {"all_simple", e.all_simple},
          {"pairwise_disjoint", e.pairwise_disjoint},
          {"min_diameter_px", e.min_diameter_px},
          {"consistent", e.consistent}};
}

Json geometry_json(const GeometryReport& g) {
  Json j;
  j["curves"] = g.curves;
  j["L"] = g.L;
  j["quasicircle"] = g.quasicircle;
  j["separation"] = {{"c", g.separation.c},
                     {"first", g.separation.first},
                     {"second", g.separation.second},
                     {"intersecting", g.separation.intersecting}};
  j["locations_and_scales"] = {{"C", g.scales.C},
                               {"pass_rate", g.scales.pass_rate},
                               {"c_limit", g.scales.c_limit},
                               {"samples", g.scales.samples}};
  j["porosity"] = {{"c_por", g.porosity.c_por},
                   {"pass_rate", g.porosity.pass_rate},
                   {"samples", g.porosity.samples}};
  return j;
}

Json elevator_json(const ElevatorContext& ctx, const DistortionStats& s) {
  Json c;
  c["period"] = ctx.period;
  c["scale"] = ctx.scale;
  c["normalizer"] = to_json(ctx.normalizer);
  c["eps0"] = ctx.eps0;
  c["delta0"] = ctx.delta0;
  c["lipschitz"] = ctx.lipschitz;
  c["pixel"] = ctx.pixel;
  c["N"] = ctx.N;
  c["post"] = to_json(ctx.post);
  c["julia_radius"] = ctx.julia_radius;
  c["julia_diameter"] = ctx.julia_diameter;
  c["outer_modulus"] = ctx.outer_modulus;
  Json d;
  d["samples"] = s.samples;
  d["invalid"] = s.invalid;
  d["gamma"] = s.gamma;
  d["C1"] = s.C1;
  d["fit_residual"] = s.fit_residual;
  d["degenerate"] = s.degenerate;
  d["r1"] = s.r1;
  d["C2"] = s.C2;
  d["C3"] = double_or_null(s.C3);
  d["fold_pairs"] = s.fold_pairs;
  d["q_in_post"] = s.q_in_post;
  d["min_image_diameter"] = s.min_image_diameter;
  d["max_image_diameter"] = s.max_image_diameter;
  d["max_n"] = s.max_n;
  d["max_k"] = s.max_k;
  return {{"context", c}, {"distortion", d}};
}

Json boettcher_json(const BoettcherChart& chart) {
  Json j;
  j["point"] = to_json(chart.point);
  j["k"] = chart.k;
  j["scale"] = to_json(chart.scale);
  j["rows"] = static_cast<long>(chart.rows.size());
  j["failed"] = chart.failed();
  j["flagged"] = static_cast<long>(
      std::count_if(chart.rows.begin(), chart.rows.end(), [](const auto& r) { return r.flagged; }));
  j["max_residual"] = chart.max_residual();
  Json table = Json::array();
  for (const auto& r : chart.rows)
    if (r.ok) table.push_back(Json::array({to_json(r.z), to_json(r.psi)}));
  j["table"] = table;
  return j;
}

Json symmetry_json(const SymmetryReport& rep) {
  Json j;
  j["landmarks"] = to_json(rep.landmarks);
  j["candidates"] = rep.candidates;
  j["accepted"] = static_cast<long>(rep.accepted.size());
  const SymmetryGroup& g = rep.group;
  Json els = Json::array();
  for (size_t i = 0; i < g.elements.size(); ++i) {
    Json e = to_json(g.elements[i]);
    e["score_px"] = g.scores[i];
    els.push_back(e);
  }
  j["group"] = {{"order", g.order},
                {"closed", g.closed},
                {"verdict", g.verdict},
                {"delta0", g.delta0},
                {"elements", els},
                {"table", g.table}};
  j["caveat"] = rep.caveat;
  return j;
}

Json functional_json(const FunctionalSearch& s) {
  Json j;
  j["precheck"] = s.precheck;
  j["precheck_score_px"] = s.precheck_score;
  j["tolerance"] = s.tolerance;
  Json rel = Json::array();
  for (const auto& r : s.relations)
    rel.push_back({{"m_prime", r.m_prime},
                   {"m", r.m},
                   {"n", r.n},
                   {"residual", r.residual},
                   {"degree_identity", r.degree_identity}});
  j["relations"] = rel;
  j["reduced_l"] = s.reduced_l ? Json(*s.reduced_l) : Json(nullptr);
  return j;
}

std::string ppm_image(const RasterGrid& grid) {
  static const unsigned char palette[8][3] = {{70, 130, 220}, {230, 160, 40}, {90, 190, 110},
                                              {200, 80, 160}, {60, 190, 200}, {210, 210, 70},
                                              {150, 100, 220}, {220, 100, 90}};
  const int n = grid.resolution();
  std::ostringstream head;
  head << "P6\n" << n << " " << n << "\n255\n";
  std::string out = head.str();
  out.reserve(out.size() + static_cast<size_t>(n) * n * 3);
  const double lmax = std::log1p(std::max(grid.max_iter, 1));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const size_t k = grid.index(i, j);
      unsigned char rgb[3] = {128, 128, 128};
      if (grid.julia[k]) {
        rgb[0] = rgb[1] = rgb[2] = 0;
      } else if (grid.label[k] != kUnresolved) {
        const auto* c = palette[grid.label[k] % 8];
        const double shade = 1.0 - 0.6 * std::min(1.0, std::log1p(grid.iterations[k]) / lmax);
        for (int t = 0; t < 3; ++t) rgb[t] = static_cast<unsigned char>(std::lround(c[t] * shade));
      }
      out.append(reinterpret_cast<const char*>(rgb), 3);
    }
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw OutputError("cannot write " + path);
}

}  // namespace carpet
