#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace fbmhd::cli {

/// Process exit codes; the README table mirrors this list.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kDiffeomorphism = 4,
  kCompatibility = 5,
  kNoConvergence = 6,
  kSingular = 7,
  kIo = 8,
  kAuditFailed = 9,
};

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

/// Environment variable that roots relative output directories.
constexpr const char* kOutRootEnv = "FBMHD_OUT_ROOT";

/// --out wins over the config; a relative result is placed under the
/// output root when the environment variable is set.
std::string resolve_out_dir(const std::string& flag, const std::string& from_config);

int cmd_simulate(const CommonArgs& a, const std::string& resume);
int cmd_modes(const CommonArgs& a, std::optional<int> k_max);
int cmd_lemmas(const CommonArgs& a);
int cmd_energy_audit(const std::string& series, const std::string& out, double tol);

}  // namespace fbmhd::cli
