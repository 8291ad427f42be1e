// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/common/rng.hpp"

#include <limits>
#include <stdexcept>

#include "codecorpus/common/hash.hpp"

namespace codecorpus {

std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
    return splitmix64(base ^ splitmix64(fnv1a64(key)));
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        std::uint64_t x = next_u64();
        if (x < limit) return x % bound;
    }
}

}  // namespace codecorpus
