#include "dsts/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace dsts {
namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 engine_;
};

struct Grating {
  double fx, fy, phase, amplitude;
  std::array<double, 3> tint;
};

struct Shape {
  bool ellipse;
  double cx, cy, rx, ry, angle;
  std::array<double, 3> colour;
  Grating texture;
};

Grating random_grating(Uniform& rng, double fmin, double fmax, double amp_scale) {
  const double f = fmin * std::pow(fmax / fmin, rng());
  const double theta = std::numbers::pi * rng();
  Grating g{f * std::cos(theta), f * std::sin(theta), 2.0 * std::numbers::pi * rng(),
            amp_scale * std::sqrt(fmin / f), {}};
  for (double& t : g.tint) t = rng.range(0.6, 1.0);
  return g;
}

double grating_at(const Grating& g, double x, double y) {
  return g.amplitude * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
}

}  // namespace

RgbImage make_textured_image(std::size_t width, std::size_t height, std::uint64_t seed) {
  Uniform rng(seed * 0x9E3779B97F4A7C15ull + 0x1234567ull);
  std::array<double, 3> c0{}, c1{};
  for (auto& v : c0) v = rng.range(40.0, 200.0);
  for (auto& v : c1) v = rng.range(40.0, 200.0);
  const double grad_angle = 2.0 * std::numbers::pi * rng();

  std::vector<Grating> background(18);
  for (auto& g : background) g = random_grating(rng, 0.004, 0.2, 22.0);

  std::vector<Shape> shapes(static_cast<std::size_t>(12 + rng() * 14));
  const double scale = static_cast<double>(std::min(width, height));
  for (auto& s : shapes) {
    s.ellipse = rng() < 0.55;
    s.cx = rng.range(0.0, static_cast<double>(width));
    s.cy = rng.range(0.0, static_cast<double>(height));
    s.rx = rng.range(0.03, 0.22) * scale;
    s.ry = rng.range(0.03, 0.22) * scale;
    s.angle = std::numbers::pi * rng();
    for (auto& v : s.colour) v = rng.range(10.0, 245.0);
    s.texture = random_grating(rng, 0.03, 0.3, rng() < 0.5 ? 0.0 : 18.0);
  }

  RgbImage image(width, height);
  const double gx = std::cos(grad_angle) / static_cast<double>(width);
  const double gy = std::sin(grad_angle) / static_cast<double>(height);
  std::vector<std::array<double, 3>> pixels(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x);
      const double fy = static_cast<double>(y);
      const double t = std::clamp(0.5 + (fx * gx + fy * gy), 0.0, 1.0);
      auto& px = pixels[y * width + x];
      for (std::size_t ch = 0; ch < 3; ++ch) px[ch] = c0[ch] * (1.0 - t) + c1[ch] * t;
      for (const auto& g : background) {
        const double v = grating_at(g, fx, fy);
        for (std::size_t ch = 0; ch < 3; ++ch) px[ch] += v * g.tint[ch];
      }
    }
  }
  // Painter's order: later shapes occlude earlier ones.
  for (const auto& s : shapes) {
    const double ca = std::cos(s.angle);
    const double sa = std::sin(s.angle);
    const double reach = std::max(s.rx, s.ry) * 1.5;
    const auto y0 = static_cast<std::size_t>(std::max(0.0, s.cy - reach));
    const auto y1 = static_cast<std::size_t>(std::clamp(s.cy + reach, 0.0, static_cast<double>(height)));
    const auto x0 = static_cast<std::size_t>(std::max(0.0, s.cx - reach));
    const auto x1 = static_cast<std::size_t>(std::clamp(s.cx + reach, 0.0, static_cast<double>(width)));
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        const double dx = static_cast<double>(x) - s.cx;
        const double dy = static_cast<double>(y) - s.cy;
        const double u = (dx * ca + dy * sa) / s.rx;
        const double v = (-dx * sa + dy * ca) / s.ry;
        const bool inside = s.ellipse ? (u * u + v * v <= 1.0) : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
        if (!inside) continue;
        const double tex = grating_at(s.texture, static_cast<double>(x), static_cast<double>(y));
        auto& px = pixels[y * width + x];
        for (std::size_t ch = 0; ch < 3; ++ch) px[ch] = s.colour[ch] + tex * s.texture.tint[ch];
      }
    }
  }
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      image.data[i * 3 + ch] = static_cast<std::uint8_t>(std::lround(std::clamp(pixels[i][ch], 0.0, 255.0)));
    }
  }
  return image;
}

}  // namespace dsts
