#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "carpet/report.hpp"

namespace carpet {

struct RunConfig {
  std::string map_path;
  /// Second map (verify-eq).
  std::string map2_path;
  /// Unset means the subcommand's own default (1024 for elevator, else 512).
  std::optional<int> resolution;
  Window window{cplx(0.0, 0.0), 2.0, false};
  int max_iter = 500;
  int budget = 10000;
  OrbitTolerances tolerances;
  double tol_px = 2.0;
  std::uint64_t seed = 1;
  /// Unset means the subcommand's default (geometry 2000, elevator 100,
  /// boettcher 200 per chart).
  std::optional<long> samples;
  std::string out;
  std::string components_out;
  std::string out_dir = ".";
  /// a,b,c,d[,conj] with complex entries written re or re:im.
  std::string xi = "1,0,0,1";
  int max_exp = 4;

  int resolution_or(int fallback) const { return resolution.value_or(fallback); }
};

/// Settings from a --config JSON object. Throws InputError on malformed
/// values or non-positive tolerances.
void apply_config(RunConfig& cfg, const Json& j);
Json config_json(const RunConfig& cfg);

/// "a,b,c,d" or "a,b,c,d,conj"; each entry is re or re:im.
MoebiusMap parse_moebius(const std::string& text);

/// Exit 0 on success, 2 on verdict-level failures (with a structured error on
/// stdout when no report could be produced), 1 on usage, input or output
/// errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace carpet
