#ifndef PRESTAMO_CLI_HPP_
#define PRESTAMO_CLI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prestamo/features.hpp"
#include "prestamo/model.hpp"

namespace prestamo::cli {

/// Everything a train/tune/ablate run needs. Built from a flat
/// "key = value" file; command-line flags of the same name override it.
struct RunConfig {
  std::string train;
  std::string dev;
  std::string test;
  std::string embeddings;
  std::string model;
  std::string output_dir;
  FeatureConfig features;
  TrainConfig training;
  std::vector<double> grid_c1{0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<double> grid_c2{0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<double> grid_scaling{0.5, 1.0, 2.0, 4.0};
  /// Embedding files to sweep; "none" disables embeddings for that point.
  /// Empty means: the `embeddings` table if set, otherwise "none".
  std::vector<std::string> grid_embeddings;
  bool ignore_other = false;
};

/// Every key accepted by config files, in documentation order.
const std::vector<std::string_view>& config_keys();

/// Throws ConfigError for unknown keys or unparsable values.
void apply_config_value(RunConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment line. Returns the keys
/// that were set, in file order.
std::vector<std::string> read_config(std::istream& in, RunConfig& config);

/// Entry point. Exit codes: 0 success, 1 validation/config/data error,
/// 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prestamo::cli

#endif  // PRESTAMO_CLI_HPP_
