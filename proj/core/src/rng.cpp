#include "oslsim/rng.hpp"

#include <cmath>

namespace osl {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index ^ 0xd1b54a32d192ed03ULL));
}

double Rng::uniform_open() {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return u;
}

double Rng::exponential(double rate) { return -std::log(uniform_pos()) / rate; }

}  // namespace osl
