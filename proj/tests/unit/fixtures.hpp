#pragma once

#include <map>
#include <string>

#include "atlforge/cgm.hpp"
#include "atlforge/ispl.hpp"
#include "oracles.hpp"

namespace fixture {

inline atlforge::ModelSpec load(const std::string& relative) {
  return atlforge::parse_model(oracle::read_file(oracle::source_path(relative)));
}

inline atlforge::ModelSpec goldseeker_spec() { return load("models/goldseeker.ispl"); }
inline atlforge::ModelSpec flip_spec() { return load("models/flip.ispl"); }

// Every agent-local variable at its lowest value (false for booleans).
inline std::map<atlforge::VarId, int> zero_locals(const atlforge::ModelSpec& spec) {
  std::map<atlforge::VarId, int> init;
  for (atlforge::VarId v = 0; v < static_cast<atlforge::VarId>(spec.variables.size()); ++v)
    if (spec.variables[v].owner != atlforge::kEnvironment) init[v] = spec.variables[v].domain.lo;
  return init;
}

inline atlforge::VarId var(const atlforge::ModelSpec& spec, const std::string& name) {
  return spec.resolve_var(name).value();
}

// Goldseeker state with both agents unmined.
inline atlforge::StateId gs_state(const atlforge::Cgm& cgm, int rba, int cba, int rra, int cra, bool taken = false,
                                  bool ba_mined = false, bool ra_mined = false) {
  std::vector<int> values{rba, cba, rra, cra, taken ? 1 : 0, ba_mined ? 1 : 0, ra_mined ? 1 : 0};
  return cgm.encode(values);
}

}  // namespace fixture
