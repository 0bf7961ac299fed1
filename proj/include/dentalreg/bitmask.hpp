#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dentalreg/errors.hpp"

namespace dentalreg {

struct PixelBox {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // inclusive
  int width() const { return max_x - min_x + 1; }
  int height() const { return max_y - min_y + 1; }
};

/// Packed binary raster, row-major, 64 pixels per word.
class Bitmask {
 public:
  Bitmask() = default;
  Bitmask(int width, int height)
      : w_(width),
        h_(height),
        words_((static_cast<std::size_t>(width) * height + 63) / 64, 0) {}

  int width() const { return w_; }
  int height() const { return h_; }

  bool get(int x, int y) const {
    const std::size_t i = idx(x, y);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(int x, int y, bool value = true) {
    const std::size_t i = idx(x, y);
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value)
      words_[i >> 6] |= bit;
    else
      words_[i >> 6] &= ~bit;
  }

  void clear() { words_.assign(words_.size(), 0); }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  bool any() const {
    for (std::uint64_t w : words_)
      if (w) return true;
    return false;
  }

  bool same_size(const Bitmask& o) const { return w_ == o.w_ && h_ == o.h_; }

  /// Tight bounding box of set pixels; nullopt when the mask is empty.
  std::optional<PixelBox> bounding_box() const {
    PixelBox box{w_, h_, -1, -1};
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x)
        if (get(x, y)) {
          if (x < box.min_x) box.min_x = x;
          if (x > box.max_x) box.max_x = x;
          if (y < box.min_y) box.min_y = y;
          if (y > box.max_y) box.max_y = y;
        }
    if (box.max_x < 0) return std::nullopt;
    return box;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * w_ + x;
  }

  int w_ = 0;
  int h_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Pixel counts over a masked pair: A = a\m, B = b\m.
struct MaskedCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t a_and_b = 0;
};

inline MaskedCounts masked_counts(const Bitmask& a, const Bitmask& b,
                                  const Bitmask& m) {
  if (!a.same_size(b) || !a.same_size(m))
    throw DimensionMismatch("bitmask dimensions differ");
  MaskedCounts c;
  const auto& wa = a.words();
  const auto& wb = b.words();
  const auto& wm = m.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const std::uint64_t ai = wa[i] & ~wm[i];
    const std::uint64_t bi = wb[i] & ~wm[i];
    c.a += std::popcount(ai);
    c.b += std::popcount(bi);
    c.a_and_b += std::popcount(ai & bi);
  }
  return c;
}

inline bool is_subset(const Bitmask& inner, const Bitmask& outer) {
  if (!inner.same_size(outer)) throw DimensionMismatch("bitmask dimensions differ");
  const auto& wi = inner.words();
  const auto& wo = outer.words();
  for (std::size_t i = 0; i < wi.size(); ++i)
    if (wi[i] & ~wo[i]) return false;
  return true;
}

inline std::size_t count_xor(const Bitmask& a, const Bitmask& b) {
  if (!a.same_size(b)) throw DimensionMismatch("bitmask dimensions differ");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i)
    n += std::popcount(a.words()[i] ^ b.words()[i]);
  return n;
}

}  // namespace dentalreg
