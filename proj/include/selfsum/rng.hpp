#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfsum {

// std::mt19937's output sequence is fixed by the standard; the distributions are not.
// Everything below draws through the raw engine so results are identical on every platform.

/// Unbiased draw from [0, n) via rejection sampling.
inline std::uint32_t uniform_below(std::mt19937& rng, std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t span = std::uint64_t{1} << 32;
  const std::uint64_t limit = span - span % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::uint32_t>(r % n);
}

/// Uniform sample of min(k, |items|) elements without replacement (partial Fisher-Yates).
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k, std::mt19937& rng) {
  const std::size_t n = items.size();
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_below(rng, static_cast<std::uint32_t>(n - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, static_cast<std::uint32_t>(i));
    std::swap(items[i - 1], items[j]);
  }
}

inline std::string save_rng_state(const std::mt19937& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

inline std::mt19937 load_rng_state(const std::string& state) {
  std::mt19937 rng;
  std::istringstream ss(state);
  ss >> rng;
  if (!ss) throw std::invalid_argument("malformed rng state");
  return rng;
}

}  // namespace selfsum
