// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/common/hash.hpp"

#include <fmt/format.h>

namespace codecorpus {

std::string to_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace codecorpus
