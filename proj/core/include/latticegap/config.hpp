#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "latticegap/lattice_model.hpp"

namespace latticegap {

/// A lattice plus the run parameters a configuration file may carry.
///
/// File layout (YAML):
///
///   lattice:
///     n1: 1
///     n2: 1
///     masses: 1.0                # number (every node) or list of n1*n2
///     strip_perturbation: -0.9   # number (row i2 = 0) or list
///     point_perturbation: 0.1    # number (node 0) or list
///     strip_orientation: e1      # only e1 is supported
///     adjacency: square          # or a list of {from, to, offset: [o1, o2]}
///   run:
///     seed: 7
///     tol: 1.0e-10
///     grid: 64
///     omega_max: 12.0
///     threads: 1
///
/// Unknown keys are errors.
struct RunConfig {
  LatticeSpec spec;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  std::size_t grid = 64;
  std::optional<double> omega_max;
  unsigned threads = 0;
};

/// Throws SpecError carrying the 1-based line and column of the offending node.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// YAML text that parse_config turns back into `spec`.
std::string to_yaml(const LatticeSpec& spec);

}  // namespace latticegap
