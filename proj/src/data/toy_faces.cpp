#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sharpmask/codec.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/imaging.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

// Soft inside-ellipse coverage with roughly a one-pixel transition.
double ellipse_alpha(double u, double v, double cx, double cy, double ax, double ay) {
  const double du = (u - cx) / ax;
  const double dv = (v - cy) / ay;
  const double d = std::sqrt(du * du + dv * dv);
  return std::clamp((1.0 - d) * std::min(ax, ay) + 0.5, 0.0, 1.0);
}

struct Identity {
  Rgb bg0, bg1, skin, hair, eye, mouth;
  double bg_angle;
  double cx, cy, ax, ay;
  double hair_line;
  double eye_dx, eye_dy, eye_rx, eye_ry;
  double mouth_dy, mouth_rx, mouth_ry;
  double tex_fx, tex_fy, tex_phase, tex_amp;
  double light_angle;
};

struct Frame {
  double shift_x, shift_y, gain;
};

struct Forgery {
  double warp_cx, warp_cy, warp_radius, warp_angle;
  Rgb color_gain;
  double blur_sigma, blur_cx, blur_cy, blur_radius;
  double grid_amp;  // period-2 upsampling trace inside the face
};

Identity draw_identity(SplitMix& rng, double res) {
  Identity id{};
  id.bg0 = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
  id.bg1 = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
  id.bg_angle = rng.uniform(0.0, 2.0 * M_PI);
  id.skin = {rng.uniform(0.55, 0.92), rng.uniform(0.38, 0.72), rng.uniform(0.28, 0.6)};
  id.hair = {rng.uniform(0.05, 0.45), rng.uniform(0.03, 0.3), rng.uniform(0.02, 0.25)};
  id.eye = {rng.uniform(0.05, 0.25), rng.uniform(0.05, 0.25), rng.uniform(0.05, 0.3)};
  id.mouth = {rng.uniform(0.55, 0.8), rng.uniform(0.15, 0.3), rng.uniform(0.15, 0.3)};
  id.cx = res * rng.uniform(0.45, 0.55);
  id.cy = res * rng.uniform(0.47, 0.55);
  id.ax = res * rng.uniform(0.26, 0.33);
  id.ay = res * rng.uniform(0.34, 0.42);
  id.hair_line = rng.uniform(0.45, 0.65);
  id.eye_dx = rng.uniform(0.35, 0.45);
  id.eye_dy = rng.uniform(0.18, 0.28);
  id.eye_rx = res * rng.uniform(0.045, 0.06);
  id.eye_ry = res * rng.uniform(0.025, 0.035);
  id.mouth_dy = rng.uniform(0.4, 0.5);
  id.mouth_rx = rng.uniform(0.3, 0.45);
  id.mouth_ry = res * rng.uniform(0.02, 0.03);
  id.tex_fx = rng.uniform(1.2, 2.2) * 32.0 / res;
  id.tex_fy = rng.uniform(1.2, 2.2) * 32.0 / res;
  id.tex_phase = rng.uniform(0.0, 2.0 * M_PI);
  id.tex_amp = rng.uniform(0.015, 0.03);
  id.light_angle = rng.uniform(0.0, 2.0 * M_PI);
  return id;
}

Frame draw_frame(SplitMix& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.95, 1.05)};
}

Forgery draw_forgery(SplitMix& rng, const Identity& id) {
  Forgery f{};
  f.warp_cx = id.cx + id.ax * rng.uniform(-0.15, 0.15);
  f.warp_cy = id.cy + id.ay * rng.uniform(-0.15, 0.15);
  f.warp_radius = 0.75 * std::min(id.ax, id.ay);
  f.warp_angle = rng.uniform(0.5, 0.9) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  auto shift = [&rng] { return rng.uniform(0.05, 0.1) * (rng.uniform() < 0.5 ? -1.0 : 1.0); };
  f.color_gain = {1.0 + shift(), 1.0 + shift(), 1.0 + shift()};
  f.blur_sigma = rng.uniform(0.8, 1.2);
  f.blur_cx = id.cx + id.ax * rng.uniform(-0.3, 0.3);
  f.blur_cy = id.cy + id.ay * rng.uniform(-0.3, 0.3);
  f.blur_radius = std::min(id.ax, id.ay) * rng.uniform(0.4, 0.55);
  f.grid_amp = rng.uniform(0.03, 0.05);
  return f;
}

Rgb render(const Identity& id, const Frame& fr, double u, double v, double res) {
  u -= fr.shift_x;
  v -= fr.shift_y;
  const double bt = std::clamp(
      0.5 + ((u / res - 0.5) * std::cos(id.bg_angle) + (v / res - 0.5) * std::sin(id.bg_angle)),
      0.0, 1.0);
  Rgb col = mix(id.bg0, id.bg1, bt);

  const double shade = 1.0 + 0.15 * ((u - id.cx) * std::cos(id.light_angle) +
                                     (v - id.cy) * std::sin(id.light_angle)) / id.ax;
  const double tex = id.tex_amp * std::sin(id.tex_fx * u + id.tex_phase) *
                     std::sin(id.tex_fy * v + 0.5 * id.tex_phase);
  Rgb face{id.skin.r * shade + tex, id.skin.g * shade + tex, id.skin.b * shade + tex};

  const double hair_edge = id.cy - id.hair_line * id.ay;
  const double hair_alpha = std::clamp(hair_edge - v + 0.5, 0.0, 1.0);
  face = mix(face, id.hair, hair_alpha);

  const double ey = id.cy - id.eye_dy * id.ay;
  const double eye_alpha =
      std::max(ellipse_alpha(u, v, id.cx - id.eye_dx * id.ax, ey, id.eye_rx, id.eye_ry),
               ellipse_alpha(u, v, id.cx + id.eye_dx * id.ax, ey, id.eye_rx, id.eye_ry));
  face = mix(face, id.eye, eye_alpha);

  const double mouth_alpha = ellipse_alpha(u, v, id.cx, id.cy + id.mouth_dy * id.ay,
                                           id.mouth_rx * id.ax, id.mouth_ry);
  face = mix(face, id.mouth, mouth_alpha);

  col = mix(col, face, ellipse_alpha(u, v, id.cx, id.cy, id.ax, id.ay));
  return {col.r * fr.gain, col.g * fr.gain, col.b * fr.gain};
}

torch::Tensor to_tensor(const std::vector<Rgb>& px, int64_t res) {
  auto t = torch::empty({1, 3, res, res}, torch::kDouble);
  auto a = t.accessor<double, 4>();
  for (int64_t y = 0; y < res; ++y) {
    for (int64_t x = 0; x < res; ++x) {
      const auto& c = px[static_cast<size_t>(y * res + x)];
      a[0][0][y][x] = std::clamp(c.r, 0.0, 1.0);
      a[0][1][y][x] = std::clamp(c.g, 0.0, 1.0);
      a[0][2][y][x] = std::clamp(c.b, 0.0, 1.0);
    }
  }
  return t;
}

uint64_t mix_seed(uint64_t seed, uint64_t stream, uint64_t index) {
  SplitMix m(seed ^ (stream * 0xD1B54A32D192ED03ULL) ^ (index * 0x9E3779B97F4A7C15ULL));
  return m.next();
}

}  // namespace

std::pair<ImageBatch, ImageBatch> render_toy_pair(const ToyDatasetOptions& options,
                                                  int64_t index) {
  const int64_t res = options.resolution;
  const double r = static_cast<double>(res);
  const int64_t source = index / options.frames_per_source;

  SplitMix id_rng(mix_seed(options.seed, 1, static_cast<uint64_t>(source)));
  const Identity id = draw_identity(id_rng, r);
  const Forgery forgery = draw_forgery(id_rng, id);
  SplitMix frame_rng(mix_seed(options.seed, 2, static_cast<uint64_t>(index)));
  const Frame frame = draw_frame(frame_rng);

  std::vector<Rgb> real(static_cast<size_t>(res * res));
  std::vector<Rgb> fake(real.size());
  std::vector<double> color_mask(real.size());
  std::vector<double> blur_mask(real.size());
  const double fcx = id.cx + frame.shift_x;
  const double fcy = id.cy + frame.shift_y;
  for (int64_t y = 0; y < res; ++y) {
    for (int64_t x = 0; x < res; ++x) {
      const double u = static_cast<double>(x) + 0.5;
      const double v = static_cast<double>(y) + 0.5;
      const auto i = static_cast<size_t>(y * res + x);
      real[i] = render(id, frame, u, v, r);

      // Swirl around the warp center, fading out at warp_radius.
      const double wx = forgery.warp_cx + frame.shift_x;
      const double wy = forgery.warp_cy + frame.shift_y;
      const double dx = u - wx;
      const double dy = v - wy;
      const double d = std::sqrt(dx * dx + dy * dy);
      double su = u;
      double sv = v;
      if (d < forgery.warp_radius) {
        const double falloff = 1.0 - d / forgery.warp_radius;
        const double a = forgery.warp_angle * falloff * falloff;
        su = wx + dx * std::cos(a) - dy * std::sin(a);
        sv = wy + dx * std::sin(a) + dy * std::cos(a);
      }
      fake[i] = render(id, frame, su, sv, r);
      color_mask[i] = ellipse_alpha(u, v, fcx, fcy, 0.85 * id.ax, 0.85 * id.ay);
      blur_mask[i] = ellipse_alpha(u, v, forgery.blur_cx + frame.shift_x,
                                   forgery.blur_cy + frame.shift_y, forgery.blur_radius,
                                   forgery.blur_radius);
    }
  }
  for (size_t i = 0; i < fake.size(); ++i) {
    const double m = color_mask[i];
    fake[i].r *= 1.0 + (forgery.color_gain.r - 1.0) * m;
    fake[i].g *= 1.0 + (forgery.color_gain.g - 1.0) * m;
    fake[i].b *= 1.0 + (forgery.color_gain.b - 1.0) * m;
  }

  const auto real_img = ImageBatch::from_tensor(to_tensor(real, res).to(torch::kFloat));
  const auto warped = ImageBatch::from_tensor(to_tensor(fake, res));
  const auto blurred = gaussian_blur(warped, forgery.blur_sigma).tensor();
  auto mask = torch::from_blob(blur_mask.data(), {1, 1, res, res}, torch::kDouble).clone();
  auto fake_t = warped.tensor() + mask * (blurred - warped.tensor());
  auto grid = torch::empty({1, 1, res, res}, torch::kDouble);
  auto g = grid.accessor<double, 4>();
  for (int64_t y = 0; y < res; ++y) {
    for (int64_t x = 0; x < res; ++x) {
      g[0][0][y][x] = ((x + y) % 2 == 0 ? 1.0 : -1.0) * forgery.grid_amp *
                      color_mask[static_cast<size_t>(y * res + x)];
    }
  }
  fake_t = fake_t + grid;
  return {real_img, ImageBatch::from_tensor_clamped(fake_t.to(torch::kFloat))};
}

Manifest synthesize_toy_dataset(const ToyDatasetOptions& options, const fs::path& out_dir) {
  if (options.n_pairs < 1) {
    throw Error(ErrorKind::Validation, "toy dataset: n_pairs must be >= 1");
  }
  if (options.resolution != 32 && options.resolution != 64) {
    throw Error(ErrorKind::Validation, "toy dataset: resolution must be 32 or 64");
  }
  if (options.frames_per_source < 1) {
    throw Error(ErrorKind::Validation, "toy dataset: frames_per_source must be >= 1");
  }
  std::error_code ec;
  fs::create_directories(out_dir / "real", ec);
  fs::create_directories(out_dir / "fake", ec);
  if (ec) {
    throw Error(ErrorKind::Io, "toy dataset: cannot create " + out_dir.string() + ": " + ec.message());
  }

  Manifest manifest;
  manifest.split = Split::All;
  manifest.resolution = options.resolution;
  manifest.seed = options.seed;
  manifest.root = out_dir;
  for (int64_t i = 0; i < options.n_pairs; ++i) {
    char source[32];
    char name[48];
    std::snprintf(source, sizeof(source), "s%05lld",
                  static_cast<long long>(i / options.frames_per_source));
    std::snprintf(name, sizeof(name), "%s_%02lld.png", source,
                  static_cast<long long>(i % options.frames_per_source));
    const auto [real, fake] = render_toy_pair(options, i);
    save_image(out_dir / "real" / name, real);
    save_image(out_dir / "fake" / name, fake);
    manifest.samples.push_back(PairedSample{fs::path("real") / name, fs::path("fake") / name,
                                            source, DatasetTag::Toy});
  }
  write_manifest(out_dir / "all.jsonl", manifest);
  return manifest;
}

}  // namespace sharpmask
