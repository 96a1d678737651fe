#pragma once

#include <string>

#include "prefpol/adam.hpp"
#include "prefpol/policy.hpp"

namespace prefpol {

// Training snapshot. Serialized to the "PPC1" container: text header,
// little-endian f64 payload, trailing CRC32.
struct Checkpoint {
  PolicyParams params;
  AdamState adam;
  long step = 0;
  std::string config_hash;
  std::string objective;  // "cpl" or "bc"

  bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace prefpol
