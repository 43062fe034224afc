#include "bwbary/rng.hpp"

namespace bwbary {

double CounterRng::next_open_unit() noexcept {
  const std::uint64_t k = next() >> 12;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-52;
}

}  // namespace bwbary
