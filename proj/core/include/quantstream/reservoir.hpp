#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "quantstream/errors.hpp"
#include "quantstream/rng.hpp"

namespace quantstream {

// Fixed-capacity uniform sample over a stream of unknown length
// (algorithm R). Keeps density estimation O(1) in stream length: the
// streaming commands feed a reservoir and hand its contents to the KDE.
template <class T>
class ReservoirSampler {
 public:
  ReservoirSampler(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), engine_(make_stream(seed, 0x7e5e)) {
    if (capacity_ == 0) throw ConfigError("reservoir: capacity must be >= 1");
  }

  void add(const T& value) {
    ++seen_;
    if (sample_.size() < capacity_) {
      sample_.push_back(value);
      return;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, seen_ - 1);
    const std::uint64_t j = pick(engine_);
    if (j < capacity_) sample_[static_cast<std::size_t>(j)] = value;
  }

  const std::vector<T>& sample() const { return sample_; }
  std::uint64_t seen() const { return seen_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<T> sample_;
  std::mt19937_64 engine_;
};

// Default reservoir size for streaming density estimation.
inline constexpr std::size_t kDefaultReservoirCapacity = 4096;

}  // namespace quantstream
