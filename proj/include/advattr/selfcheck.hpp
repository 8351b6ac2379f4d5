#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advattr/world.hpp"

namespace advattr {

struct CheckLine {
  std::string name;
  double value = 0.0;  // worst observed error
  double bound = 0.0;
  bool pass = false;
};

/// Finite-difference checks of every differentiable op kind.
std::vector<CheckLine> gradient_op_checks(std::uint64_t seed, std::size_t instances);

/// Finite-difference check of the full diff -> generators -> synthesis ->
/// loss chain on small random worlds, for both losses.
CheckLine gradient_chain_check(const WorldConfig& config, std::uint64_t seed,
                               std::size_t instances);

/// Closed-form weights against the grid oracle and the stationarity bound.
CheckLine solver_check(std::uint64_t seed, std::size_t instances, std::size_t max_dim,
                       double grid_step);

/// Every check above at the sizes used by the command-line `check`.
std::vector<CheckLine> self_check(const WorldConfig& config, std::uint64_t seed);

}  // namespace advattr
