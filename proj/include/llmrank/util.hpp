#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace llmrank {

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

// Combines a base seed with a stream id so derived streams are independent of
// each other and of the order they are drawn in.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// std::mt19937_64 with hand rolled draws. The standard distributions are
// implementation defined, so everything seed-sensitive goes through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

  uint64_t next_u64() { return engine_(); }
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }  // [0,1)
  uint64_t next_below(uint64_t bound) { return next_u64() % bound; }
  double next_normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates, deterministic across platforms for a given Rng stream.
template <typename T>
void shuffle_in_place(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = rng.next_below(i);
    std::swap(values[i - 1], values[j]);
  }
}

// Number of maximal runs of non-whitespace characters.
int64_t whitespace_token_count(std::string_view text);

// Shortest round-trip representation.
std::string format_double(double value);

// Half-up rounding of a non-negative mean to the nearest integer label.
int round_half_up(double value);

// Runs fn(0..count-1) on up to max_workers threads. Rethrows the first
// exception that escapes fn after all workers join.
void parallel_for(std::size_t count, int max_workers, const std::function<void(std::size_t)>& fn);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace llmrank
