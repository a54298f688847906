#include "udderid/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "udderid/error.hpp"
#include "udderid/random.hpp"

namespace udderid {
namespace {

std::string cow_name(int index, int count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "cow%0*d", width, index + 1);
  return buf;
}

bool edges_within(const TeatQuad<double>& c, double lo, double hi) {
  for (std::size_t i = 0; i < 4; ++i) {
    const double len = (c[(i + 1) % 4] - c[i]).norm();
    if (len < lo || len > hi) return false;
  }
  return true;
}

Box enclosing_udder(const TeatQuad<double>& centers, const std::array<Eigen::Vector2d, 4>& dims, double margin) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (std::size_t i = 0; i < 4; ++i) {
    x0 = std::min(x0, centers[i].x() - dims[i].x() / 2);
    x1 = std::max(x1, centers[i].x() + dims[i].x() / 2);
    y0 = std::min(y0, centers[i].y() - dims[i].y() / 2);
    y1 = std::max(y1, centers[i].y() + dims[i].y() / 2);
  }
  return {x0 - margin, y0 - margin, (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin};
}

UdderAnnotation assemble(const std::string& ref, const TeatQuad<double>& centers,
                         const std::array<Eigen::Vector2d, 4>& dims, const Box& udder) {
  UdderAnnotation ann;
  ann.image_ref = ref;
  ann.udder_box = udder;
  for (std::size_t i = 0; i < 4; ++i) {
    ann.teats[i] = {centers[i].x() - dims[i].x() / 2, centers[i].y() - dims[i].y() / 2, dims[i].x(), dims[i].y()};
  }
  return ann;
}

struct Geometry {
  TeatQuad<double> centers;
  std::array<Eigen::Vector2d, 4> dims;
  Box udder;
};

// One perturbation draw. Positive factors are floored so boxes stay valid.
Geometry perturb(const Geometry& g, Rng& rng, double center_sigma, double box_sigma, double scale_sigma) {
  Geometry out = g;
  Eigen::Vector2d shift = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector2d d(rng.normal(0, center_sigma), rng.normal(0, center_sigma));
    out.centers[i] += d;
    shift += d / 4;
    out.dims[i].x() *= std::max(0.2, 1 + rng.normal(0, box_sigma));
    out.dims[i].y() *= std::max(0.2, 1 + rng.normal(0, box_sigma));
  }
  const double uw = out.udder.w * std::max(0.2, 1 + rng.normal(0, box_sigma));
  const double uh = out.udder.h * std::max(0.2, 1 + rng.normal(0, box_sigma));
  const double ucx = out.udder.x + out.udder.w / 2 + shift.x();
  const double ucy = out.udder.y + out.udder.h / 2 + shift.y();
  if (box_sigma > 0 || center_sigma > 0) out.udder = {ucx - uw / 2, ucy - uh / 2, uw, uh};

  const double s = std::clamp(1 + rng.normal(0, scale_sigma), 0.5, 1.5);
  if (scale_sigma > 0) {
    const Eigen::Vector2d pivot(out.udder.x + out.udder.w / 2, out.udder.y + out.udder.h / 2);
    for (std::size_t i = 0; i < 4; ++i) {
      out.centers[i] = pivot + s * (out.centers[i] - pivot);
      out.dims[i] *= s;
    }
    out.udder = {pivot.x() - s * out.udder.w / 2, pivot.y() - s * out.udder.h / 2, s * out.udder.w, s * out.udder.h};
  }
  return out;
}

Geometry perturb_convex(const Geometry& g, Rng& rng, double center_sigma, double box_sigma, double scale_sigma) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Geometry out = perturb(g, rng, center_sigma, box_sigma, scale_sigma);
    if (check_convex_order(out.centers) == ConvexOrder::Valid) return out;
  }
  return g;
}

double hash01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(derive_seed(seed, a, b) >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3 - 2 * t); }

// Value noise on a lattice with the given cell size, in [-1, 1].
double value_noise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto iu = static_cast<std::uint64_t>(static_cast<std::int64_t>(fu) + (1LL << 32));
  const auto iv = static_cast<std::uint64_t>(static_cast<std::int64_t>(fv) + (1LL << 32));
  const double tu = smoothstep(u - fu);
  const double tv = smoothstep(v - fv);
  const double a = hash01(seed, iu, iv);
  const double b = hash01(seed, iu + 1, iv);
  const double c = hash01(seed, iu, iv + 1);
  const double d = hash01(seed, iu + 1, iv + 1);
  return 2 * ((a * (1 - tu) + b * tu) * (1 - tv) + (c * (1 - tu) + d * tu) * tv) - 1;
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

bool box_inside(const Box& b, ImageSize size) {
  return b.x >= 0 && b.y >= 0 && b.x + b.w <= size.width && b.y + b.h <= size.height;
}

}  // namespace

std::vector<CowTemplate> generate_herd(int count, std::uint64_t master_seed, const GeometryPrior& prior) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "herd size must be at least 1");
  std::vector<CowTemplate> herd;
  herd.reserve(static_cast<std::size_t>(count));
  const double c = prior.canvas / 2;

  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(master_seed, 0x4845u, static_cast<std::uint64_t>(i)));
    CowTemplate cow;
    cow.cow_id = cow_name(i, count);
    for (;;) {
      const double depth = rng.uniform(prior.spacing_min, prior.spacing_max);
      const double front = rng.uniform(prior.spacing_min, prior.spacing_max);
      const double rear = rng.uniform(prior.spacing_min, prior.spacing_max);
      const auto jitter = [&] { return rng.uniform(-prior.stagger, prior.stagger); };
      // Front row on the left: the frame is rotated so the cow faces left.
      cow.centers[0] = {c - depth / 2 + jitter(), c - front / 2 + jitter()};  // LF
      cow.centers[1] = {c - depth / 2 + jitter(), c + front / 2 + jitter()};  // RF
      cow.centers[2] = {c + depth / 2 + jitter(), c + rear / 2 + jitter()};   // RR
      cow.centers[3] = {c + depth / 2 + jitter(), c - rear / 2 + jitter()};   // LR
      if (check_convex_order(cow.centers) == ConvexOrder::Valid &&
          edges_within(cow.centers, prior.spacing_min, prior.spacing_max)) {
        break;
      }
    }
    for (auto& d : cow.teat_dims) {
      d = {rng.uniform(prior.teat_w_min, prior.teat_w_max), rng.uniform(prior.teat_h_min, prior.teat_h_max)};
    }
    cow.udder_box = enclosing_udder(cow.centers, cow.teat_dims,
                                    rng.uniform(prior.udder_margin_min, prior.udder_margin_max));
    cow.texture_seed = rng.next();
    herd.push_back(std::move(cow));
  }
  return herd;
}

UdderAnnotation template_annotation(const CowTemplate& cow) {
  return assemble(cow.cow_id, cow.centers, cow.teat_dims, cow.udder_box);
}

UdderAnnotation sample_session(const CowTemplate& cow, const NoiseModel& noise, Session session, std::uint64_t seed) {
  Geometry g{cow.centers, cow.teat_dims, cow.udder_box};

  if (session.collection > 1 && noise.drift_factor > 1) {
    // Persistent change between collections: seeded by the cow and the
    // collection only, so both days of the collection share it.
    Rng drift(derive_seed(cow.texture_seed, 0x4452u, static_cast<std::uint64_t>(session.collection)));
    const double k = noise.drift_factor - 1;
    g = perturb_convex(g, drift, k * noise.drift_center_sigma, k * noise.drift_box_sigma, k * noise.drift_box_sigma);
  }

  Rng rng(seed);
  g = perturb_convex(g, rng, noise.center_sigma, noise.box_sigma, noise.scale_sigma);

  const std::string ref = cow.cow_id + "_c" + std::to_string(session.collection) + "_d" + std::to_string(session.day);
  return assemble(ref, g.centers, g.dims, g.udder);
}

UdderAnnotation translated(UdderAnnotation ann, double dx, double dy) {
  ann.udder_box.x += dx;
  ann.udder_box.y += dy;
  for (Box& b : ann.teats) {
    b.x += dx;
    b.y += dy;
  }
  return ann;
}

GrayImage render_synthetic_image(const UdderAnnotation& ann, std::uint64_t texture_seed, ImageSize size) {
  if (size.width < 1 || size.height < 1) throw Error(ErrorCode::InvalidArgument, "empty canvas");
  if (!box_inside(ann.udder_box, size)) throw Error(ErrorCode::BoxOutsideCanvas, "udder box");
  for (const TeatPosition p : kTeatOrder) {
    if (!box_inside(ann.teat(p), size)) {
      throw Error(ErrorCode::BoxOutsideCanvas, "teat " + std::string(to_string(p)));
    }
  }

  const Box& u = ann.udder_box;
  // Vein polylines in udder-normalized coordinates.
  Rng rng(derive_seed(texture_seed, 0x5645u));
  std::vector<std::vector<Eigen::Vector2d>> veins(4 + rng.index(4));
  for (auto& vein : veins) {
    Eigen::Vector2d p(rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.4));
    double heading = rng.uniform(0.3, 2.8);
    vein.push_back(p);
    for (int step = 0; step < 24; ++step) {
      heading += rng.normal(0, 0.35);
      p += 0.035 * Eigen::Vector2d(std::cos(heading), std::sin(heading));
      vein.push_back(p);
    }
  }
  const double vein_width = std::max(1.5, 0.012 * std::min(u.w, u.h));

  GrayImage img(size.height, size.width);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const Eigen::Vector2d px(x + 0.5, y + 0.5);
      const double nu = (px.x() - u.x) / u.w;
      const double nv = (px.y() - u.y) / u.h;
      double value = 45 + 12 * value_noise(texture_seed, px.x() / 24, px.y() / 24);

      if (nu >= 0 && nu <= 1 && nv >= 0 && nv <= 1) {
        value = 115 + 22 * value_noise(texture_seed ^ 0x9E37u, nu * 8, nv * 8) +
                8 * value_noise(texture_seed ^ 0x7F4Au, nu * 29, nv * 29);
        double nearest = 1e300;
        for (const auto& vein : veins) {
          for (std::size_t i = 0; i + 1 < vein.size(); ++i) {
            const Eigen::Vector2d a(u.x + vein[i].x() * u.w, u.y + vein[i].y() * u.h);
            const Eigen::Vector2d b(u.x + vein[i + 1].x() * u.w, u.y + vein[i + 1].y() * u.h);
            nearest = std::min(nearest, segment_distance(px, a, b));
          }
        }
        if (nearest < 2 * vein_width) value -= 45 * std::exp(-(nearest * nearest) / (vein_width * vein_width));
      }

      for (const Box& t : ann.teats) {
        const double ex = (px.x() - (t.x + t.w / 2)) / (t.w / 2);
        const double ey = (px.y() - (t.y + t.h / 2)) / (t.h / 2);
        const double r2 = ex * ex + ey * ey;
        if (r2 <= 1) value += 70 * (1 - r2);
      }
      value += 6 * (hash01(texture_seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)) - 0.5);
      img(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return img;
}

}  // namespace udderid
