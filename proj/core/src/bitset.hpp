// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixed-width bit set used by the selection search. Private to the library.

#ifndef DELTACHECK_SRC_BITSET_HPP_
#define DELTACHECK_SRC_BITSET_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace deltacheck::detail {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool any() const {
    for (auto w : words_) {
      if (w) return true;
    }
    return false;
  }

  Bits& operator|=(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }
  Bits& operator&=(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
    return *this;
  }

  // |a | b|
  static std::size_t count_or(const Bits& a, const Bits& b) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < a.words_.size(); ++k) {
      c += static_cast<std::size_t>(std::popcount(a.words_[k] | b.words_[k]));
    }
    return c;
  }
  // |a & ~b|
  static std::size_t count_andnot(const Bits& a, const Bits& b) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < a.words_.size(); ++k) {
      c += static_cast<std::size_t>(std::popcount(a.words_[k] & ~b.words_[k]));
    }
    return c;
  }
  static bool intersects(const Bits& a, const Bits& b) {
    for (std::size_t k = 0; k < a.words_.size(); ++k) {
      if (a.words_[k] & b.words_[k]) return true;
    }
    return false;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k] & ~o.words_[k]) return false;
    }
    return true;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      for (std::uint64_t w = words_[k]; w; w &= w - 1) {
        f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
      }
    }
  }

  friend bool operator==(const Bits&, const Bits&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace deltacheck::detail

#endif  // DELTACHECK_SRC_BITSET_HPP_
