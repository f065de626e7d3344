#pragma once
#include <cstdint>

namespace dimer {

// splitmix64 run in counter mode: stateless, reproducible across platforms,
// cheap to seek. stream(seed, k) is the k-th word of the stream.
inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : seed_(seed ^ (0x6a09e667f3bcc909ULL * (stream + 1))) {}

  uint64_t next_u64() { return splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * counter_++); }

  // uniform in [0,1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [0, n)
  uint64_t next_below(uint64_t n) {
    // rejection-free modulo is fine here; n is tiny compared to 2^64
    return next_u64() % n;
  }

  uint64_t counter() const { return counter_; }
  void seek(uint64_t counter) { counter_ = counter; }

  static const char* name() { return "splitmix64-ctr"; }

private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

}  // namespace dimer
