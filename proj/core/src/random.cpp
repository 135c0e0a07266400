#include "microlearn/random.hpp"

#include <limits>
#include <stdexcept>

namespace microlearn {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index bound must be positive");
  constexpr auto max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound + 1) % bound;  // largest multiple of bound, minus one
  std::uint64_t draw = 0;
  do {
    draw = engine_();
  } while (draw > limit);
  return draw % bound;
}

}  // namespace microlearn
