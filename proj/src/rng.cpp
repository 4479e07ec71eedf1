#include "liewalk/rng.hpp"

#include <cmath>

namespace liewalk {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
  std::uint64_t w = s;
  splitmix64(w);
  std::uint64_t out = splitmix64(w);
  return out;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t s = mix64(seed, stream_id);
  std::uint32_t words[8];
  for (int i = 0; i < 4; ++i) {
    std::uint64_t w = splitmix64(s);
    words[2 * i] = static_cast<std::uint32_t>(w);
    words[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words, words + 8);
  eng_.seed(seq);
}

RngStream RngStream::fork(std::uint64_t child) const {
  return RngStream(seed_, mix64(stream_id_, child));
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = n * (~0ull / n);
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

void RngStream::normal_pair(double& z0, double& z1) {
  const double u1 = uniform_pos();
  const double u2 = uniform01();
  const double rho = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  z0 = rho * std::cos(ang);
  z1 = rho * std::sin(ang);
}

double RngStream::normal() {
  double z0, z1;
  normal_pair(z0, z1);
  return z0;
}

}  // namespace liewalk
