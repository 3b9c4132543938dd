#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfsim/core.hpp"

namespace selfsim::cli {

inline constexpr std::string_view kVersion = "0.1.0";
/// Seed used when neither --seed, the config file, nor SELFSIM_SEED provides one.
inline constexpr std::uint64_t kDefaultSeed = 20240607;
/// Added to the seed for the baseline batch of the equivalence suite so the
/// two batches are independent.
inline constexpr std::uint64_t kBaselineSeedOffset = 0x9E3779B97F4A7C15ull;

enum class Command { simulate, verify, bench };

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  Process process = Process::fbm;
  std::vector<Method> methods{Method::lamperti};
  double hurst = 0.5;
  std::vector<std::size_t> sizes{1024};
  std::size_t paths = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string out;  // empty: stdout
  std::string format = "csv";
  double truncation = 50.0;
  unsigned substeps = 8;
  unsigned embedding_cap = 6;
  std::string suite;
  Method baseline = Method::cholesky;

  Method method() const { return methods.front(); }
};

using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines; '#' starts a comment.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::string& path);

std::vector<std::size_t> parse_size_list(std::string_view text);

/// Merges flags > config file > environment seed > command defaults, and
/// validates the result. Throws UsageError or DomainError.
RunConfig resolve_config(Command command, const KeyValues& flags, const KeyValues& file,
                         std::optional<std::string> env_seed);

/// Throws UsageError for (process, method) pairs the samplers do not support.
void validate_combination(Process process, Method method);

int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, std::ostream& out);

/// Full command line (without the program name). Errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace selfsim::cli
