#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dentalreg/image_io.hpp"

namespace dentalreg {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

namespace detail {

// 5x7 glyphs for tick labels; 5-bit rows, MSB = leftmost column
inline const std::uint8_t* glyph_5x7(char c) {
  static constexpr std::uint8_t digits[10][7] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
  static constexpr std::uint8_t dot[7] = {0, 0, 0, 0, 0, 0x0C, 0x0C};
  static constexpr std::uint8_t minus[7] = {0, 0, 0, 0x1F, 0, 0, 0};
  static constexpr std::uint8_t blank[7] = {0, 0, 0, 0, 0, 0, 0};
  if (c >= '0' && c <= '9') return digits[c - '0'];
  if (c == '.') return dot;
  if (c == '-') return minus;
  return blank;
}

inline void draw_text(RgbImage& img, int x, int y, const std::string& text, Rgb color) {
  for (char c : text) {
    const std::uint8_t* glyph = glyph_5x7(c);
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (glyph[row] & (0x10 >> col)) {
          const int px = x + col, py = y + row;
          if (px >= 0 && px < img.width && py >= 0 && py < img.height)
            img.put(px, py, color.r, color.g, color.b);
        }
    x += 6;
  }
}

inline void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (x0 >= 0 && x0 < img.width && y0 >= 0 && y0 < img.height)
      img.put(x0, y0, color.r, color.g, color.b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace detail

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  Rgb color{0, 90, 200};
};

struct PlotOptions {
  int width = 640;
  int height = 480;
  bool y_from_zero = true;
  double y_pad_frac = 0.05;
};

/// Minimal line chart: white canvas, framed plot area, tick labels, one
/// polyline per series. Deterministic bytes for identical inputs.
inline RgbImage render_line_chart(const std::vector<PlotSeries>& series,
                                  const PlotOptions& opt = {}) {
  RgbImage img(opt.width, opt.height);
  std::fill(img.pixels.begin(), img.pixels.end(), 255);
  const int left = 52, right = 12, top = 12, bottom = 28;
  const int x0 = left, x1 = opt.width - right;
  const int y0 = opt.height - bottom, y1 = top;  // y grows upward in data

  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        min_x = max_x = s.x[i];
        min_y = max_y = s.y[i];
        first = false;
      }
      min_x = std::min(min_x, s.x[i]);
      max_x = std::max(max_x, s.x[i]);
      min_y = std::min(min_y, s.y[i]);
      max_y = std::max(max_y, s.y[i]);
    }
  if (opt.y_from_zero) min_y = std::min(0.0, min_y);
  if (max_x == min_x) max_x = min_x + 1;
  if (max_y == min_y) max_y = min_y + 1;
  max_y += (max_y - min_y) * opt.y_pad_frac;

  auto px = [&](double x) {
    return x0 + static_cast<int>(std::lround((x - min_x) / (max_x - min_x) * (x1 - x0)));
  };
  auto py = [&](double y) {
    return y0 - static_cast<int>(std::lround((y - min_y) / (max_y - min_y) * (y0 - y1)));
  };

  const Rgb frame{60, 60, 60};
  const Rgb grid{225, 225, 225};
  const int n_ticks = 5;
  for (int t = 0; t <= n_ticks; ++t) {
    const double vx = min_x + (max_x - min_x) * t / n_ticks;
    const double vy = min_y + (max_y - min_y) * t / n_ticks;
    detail::draw_line(img, px(vx), y1, px(vx), y0, grid);
    detail::draw_line(img, x0, py(vy), x1, py(vy), grid);
    detail::draw_text(img, px(vx) - 8, y0 + 6, detail::tick_label(vx), frame);
    detail::draw_text(img, 4, py(vy) - 3, detail::tick_label(vy), frame);
  }
  detail::draw_line(img, x0, y0, x1, y0, frame);
  detail::draw_line(img, x0, y0, x0, y1, frame);

  for (const auto& s : series)
    for (std::size_t i = 1; i < s.x.size(); ++i)
      detail::draw_line(img, px(s.x[i - 1]), py(s.y[i - 1]), px(s.x[i]), py(s.y[i]),
                        s.color);
  return img;
}

}  // namespace dentalreg
