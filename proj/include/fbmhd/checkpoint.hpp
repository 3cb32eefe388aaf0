#pragma once

#include "fbmhd/dynamics.hpp"

#include <stdexcept>
#include <string>

namespace fbmhd {

/// Layout (all little-endian):
///   8 bytes  magic "FBMHDCKP"
///   u32      format version
///   i32 nx, i32 nz
///   f64 g, sigma, kappa, bbar1, bbar2
///   f64 t
///   f64 v1, v2, b1, b2  (nx*nz each, x1 fastest)
///   f64 h               (nx)
/// Derived fields (q, geometry) are not stored; refresh after loading.
class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, corrupt, version, mismatch };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

constexpr std::uint32_t kCheckpointVersion = 2;

struct CheckpointData {
  int nx = 0;
  int nz = 0;
  Params params;
  State state;
};

/// Writes to path via a temporary file and rename.
void write_checkpoint(const std::string& path, const Grid& g, const Params& p, const State& s);

CheckpointData read_checkpoint(const std::string& path);

/// read_checkpoint plus a grid check; throws CheckpointError (mismatch).
State load_checkpoint(const std::string& path, const Grid& g);

}  // namespace fbmhd
