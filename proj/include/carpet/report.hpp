#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "carpet/boettcher.hpp"
#include "carpet/elevator.hpp"
#include "carpet/geometry.hpp"
#include "carpet/rigidity.hpp"

namespace carpet {

using Json = nlohmann::ordered_json;

/// Malformed input files or values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output path that cannot be written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-space indented JSON; doubles printed with %.17g, non-finite doubles as
/// the strings "inf", "-inf" and "nan".
std::string dump_json(const Json& j);

/// {"numerator": [[re, im], ...], "denominator": [[re, im], ...]}, lowest
/// degree first. Throws InputError on a malformed object.
RationalMap map_from_json(const Json& j);
Json map_to_json(const RationalMap& f);
RationalMap read_map(const std::string& path);
Json read_json(const std::string& path);

Json to_json(cplx z);
/// [re, im], or the string "inf".
Json to_json(const SpherePoint& p);
Json to_json(const MoebiusMap& m);
Json to_json(const std::vector<SpherePoint>& points);

Json orbit_json(const OrbitReport& rep);
Json component_table(const Scene& scene, const std::vector<PeripheralCurve>& curves);
Json evidence_json(const CarpetEvidence& e);
Json geometry_json(const GeometryReport& g);
Json elevator_json(const ElevatorContext& ctx, const DistortionStats& s);
Json boettcher_json(const BoettcherChart& chart);
Json symmetry_json(const SymmetryReport& rep);
Json functional_json(const FunctionalSearch& s);

/// P6 image of a raster: basin labels as colors shaded by escape time, julia
/// pixels black, unresolved pixels gray.
std::string ppm_image(const RasterGrid& grid);

/// Writes the bytes or throws OutputError.
void write_file(const std::string& path, const std::string& bytes);

}  // namespace carpet
