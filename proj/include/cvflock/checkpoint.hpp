#pragma once

#include <memory>
#include <string>

#include "cvflock/policy.hpp"

namespace cvflock {

// Versioned JSON checkpoint: model kind, architecture, flat parameter array
// (re/im interleaved for complex weights) and an integrity checksum.
// save/load round-trips parameters bit-exactly.
void save_checkpoint(const Policy& policy, const std::string& path);
std::unique_ptr<Policy> load_checkpoint(const std::string& path);

}  // namespace cvflock
