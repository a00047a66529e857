/*
 * Copyright 2026 The box3d Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "core/detection.hpp"
#include "core/error.hpp"

namespace box3d {

namespace {

double& axis(Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }
double axis(const Vec3& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }

struct P2 {
  double x = 0.0;
  double y = 0.0;
};

double cross(const P2& o, const P2& a, const P2& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// Counter-clockwise convex hull, collinear points dropped.
std::vector<P2> convex_hull(std::vector<P2> pts) {
  std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<P2> h(2 * pts.size());
  std::size_t k = 0;
  for (const P2& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

P2 area_centroid(const std::vector<P2>& poly) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2& p = poly[i];
    const P2& q = poly[(i + 1) % poly.size()];
    const double c = p.x * q.y - q.x * p.y;
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a) < 1e-12) {
    P2 m;
    for (const P2& p : poly) {
      m.x += p.x / static_cast<double>(poly.size());
      m.y += p.y / static_cast<double>(poly.size());
    }
    return m;
  }
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

std::vector<P2> scaled(const std::vector<P2>& poly, double factor) {
  const P2 c = area_centroid(poly);
  std::vector<P2> out;
  out.reserve(poly.size());
  for (const P2& p : poly) out.push_back({c.x + (p.x - c.x) * factor, c.y + (p.y - c.y) * factor});
  return out;
}

// Minkowski sum with the rectangle [-hx, hx] x [-hy, hy].
std::vector<P2> dilated(const std::vector<P2>& poly, double hx, double hy) {
  std::vector<P2> pts;
  pts.reserve(poly.size() * 4);
  for (const P2& p : poly) {
    pts.push_back({p.x - hx, p.y - hy});
    pts.push_back({p.x + hx, p.y - hy});
    pts.push_back({p.x - hx, p.y + hy});
    pts.push_back({p.x + hx, p.y + hy});
  }
  return convex_hull(std::move(pts));
}

bool inside(const std::vector<P2>& hull, double x, double y) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], {x, y}) < 0.0) return false;
  }
  return true;
}

struct Rect {
  double x0, y0, x1, y1;
  bool overlaps(const Rect& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

Rect bbox(const std::vector<P2>& poly) {
  Rect r{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
  for (const P2& p : poly) {
    r.x0 = std::min(r.x0, p.x);
    r.y0 = std::min(r.y0, p.y);
    r.x1 = std::max(r.x1, p.x);
    r.y1 = std::max(r.y1, p.y);
  }
  return r;
}

// Pixels whose centers lie in `hull`.
BinaryMask rasterize(const std::vector<P2>& hull, int w, int h) {
  BinaryMask mask(w, h);
  if (hull.size() < 3) return mask;
  const Rect r = bbox(hull);
  const int x0 = std::max(0, static_cast<int>(std::ceil(r.x0)));
  const int x1 = std::min(w - 1, static_cast<int>(std::floor(r.x1)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(r.y0)));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(r.y1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (inside(hull, x, y)) mask.set(x, y, true);
  return mask;
}

// Image silhouette of an object, or empty when any corner is too close to or
// behind the image plane.
std::optional<std::vector<P2>> silhouette(const Aabb3& box, const RigidTransform& T_LW, const CameraModel& cam,
                                          double* depth) {
  std::vector<P2> px;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner{(c & 1) ? box.max.x : box.min.x, (c & 2) ? box.max.y : box.min.y,
                      (c & 4) ? box.max.z : box.min.z};
    const Vec3 pl = T_LW.apply(corner);
    if (cam.extrinsics.apply(pl).z < 0.5) return std::nullopt;
    const auto p = project_point(pl, cam);
    if (!p) return std::nullopt;
    px.push_back({p->u, p->v});
  }
  *depth = cam.extrinsics.apply(T_LW.apply(box.center())).z;
  return convex_hull(std::move(px));
}

double box_distance(const Aabb3& b, const Vec3& p) {
  const double dx = std::max({b.min.x - p.x, 0.0, p.x - b.max.x});
  const double dy = std::max({b.min.y - p.y, 0.0, p.y - b.max.y});
  const double dz = std::max({b.min.z - p.z, 0.0, p.z - b.max.z});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void sample_surface(const Aabb3& box, double spacing, SurfaceSampling sampling, std::mt19937_64& rng,
                    std::vector<Vec3>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double eb = axis(box.max, b) - axis(box.min, b);
    const double ec = axis(box.max, c) - axis(box.min, c);
    for (int side = 0; side < 2; ++side) {
      const double fixed = side ? axis(box.max, a) : axis(box.min, a);
      if (sampling == SurfaceSampling::Grid) {
        const int nb = std::max(1, static_cast<int>(std::lround(eb / spacing)));
        const int nc = std::max(1, static_cast<int>(std::lround(ec / spacing)));
        for (int i = 0; i <= nb; ++i)
          for (int j = 0; j <= nc; ++j) {
            Vec3 p;
            axis(p, a) = fixed;
            axis(p, b) = i == nb ? axis(box.max, b) : axis(box.min, b) + i * spacing;
            axis(p, c) = j == nc ? axis(box.max, c) : axis(box.min, c) + j * spacing;
            out.push_back(p);
          }
      } else {
        const int nb = std::max(1, static_cast<int>(std::ceil(eb / spacing - 1e-9)));
        const int nc = std::max(1, static_cast<int>(std::ceil(ec / spacing - 1e-9)));
        const double cb = eb / nb;
        const double cc = ec / nc;
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nc; ++j) {
            Vec3 p;
            axis(p, a) = fixed;
            axis(p, b) = axis(box.min, b) + (i + unit(rng)) * cb;
            axis(p, c) = axis(box.min, c) + (j + unit(rng)) * cc;
            out.push_back(p);
          }
      }
    }
  }
}

void validate_spec(const SynthSpec& s) {
  auto check = [](bool ok, const char* msg) {
    if (!ok) throw_config(msg);
  };
  check(s.scans >= 0, "synth: scans must be >= 0");
  check(s.object_count >= 0, "synth: object count must be >= 0");
  check(s.spacing > 0.0 && std::isfinite(s.spacing), "synth: surface spacing must be positive");
  check(s.noise_sigma >= 0.0 && std::isfinite(s.noise_sigma), "synth: noise sigma must be >= 0");
  check(s.dropout_rate >= 0.0 && s.dropout_rate <= 1.0, "synth: dropout rate must be in [0, 1]");
  check(s.mask_coverage > 0.0 && s.mask_coverage <= 1.0, "synth: mask coverage must be in (0, 1]");
  check(s.clutter_points >= 0, "synth: clutter point count must be >= 0");
  check(s.confidence > 0.0 && s.confidence <= 1.0, "synth: confidence must be in (0, 1]");
  check(std::isfinite(s.step) && std::isfinite(s.yaw_amplitude) && std::isfinite(s.sensor_height),
        "synth: pose parameters must be finite");
  check(s.min_size.x > 0 && s.min_size.y > 0 && s.min_size.z > 0, "synth: object sizes must be positive");
  check(s.min_size.x <= s.max_size.x && s.min_size.y <= s.max_size.y && s.min_size.z <= s.max_size.z,
        "synth: min_size must not exceed max_size");
  check(s.min_gap >= 0.0, "synth: min_gap must be >= 0");
  check(s.class_id >= 0 && s.class_id < kNumClasses, "synth: class id out of range");
  for (const auto& o : s.objects) {
    check(o.class_id >= 0 && o.class_id < kNumClasses, "synth: object class id out of range");
    check(o.box.min.x < o.box.max.x && o.box.min.y < o.box.max.y && o.box.min.z < o.box.max.z,
          "synth: object boxes must have positive extent");
  }
}

std::vector<SynthObject> place_objects(const SynthSpec& s, std::mt19937_64& rng) {
  if (!s.objects.empty()) return s.objects;
  std::vector<SynthObject> out;
  if (s.object_count == 0) return out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kNear = 8.0;
  constexpr double kSlope = 0.6;  // |y| <= 0.6 x stays inside the horizontal field of view
  const double cell = std::max(s.max_size.x, s.max_size.y) + s.min_gap;
  double far = std::sqrt(3.0 * s.object_count * cell * cell / kSlope + kNear * kNear);
  auto snap = [&](double v) {
    return s.sampling == SurfaceSampling::Grid ? std::round(v / s.spacing) * s.spacing : v;
  };
  std::size_t attempts = 0;
  while (out.size() < static_cast<std::size_t>(s.object_count)) {
    if (++attempts % (200 * static_cast<std::size_t>(s.object_count)) == 0) far *= 1.1;
    Vec3 size{s.min_size.x + unit(rng) * (s.max_size.x - s.min_size.x),
              s.min_size.y + unit(rng) * (s.max_size.y - s.min_size.y),
              s.min_size.z + unit(rng) * (s.max_size.z - s.min_size.z)};
    if (s.sampling == SurfaceSampling::Grid) {
      size = {std::max(1.0, std::round(size.x / s.spacing)) * s.spacing,
              std::max(1.0, std::round(size.y / s.spacing)) * s.spacing,
              std::max(1.0, std::round(size.z / s.spacing)) * s.spacing};
    }
    const double cx = kNear + unit(rng) * (far - kNear);
    const double cy = (2.0 * unit(rng) - 1.0) * kSlope * cx;
    Aabb3 box{{snap(cx - size.x / 2), snap(cy - size.y / 2), 0.0}, {}, Frame::World};
    box.max = box.min + size;
    bool clear = true;
    for (const auto& o : out) {
      if (box.min.x - s.min_gap < o.box.max.x && o.box.min.x < box.max.x + s.min_gap &&
          box.min.y - s.min_gap < o.box.max.y && o.box.min.y < box.max.y + s.min_gap) {
        clear = false;
        break;
      }
    }
    if (clear) out.push_back({box, s.class_id, true});
  }
  return out;
}

std::string numbered(const char* dir, std::int64_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%06lld%s", dir, static_cast<long long>(i), ext);
  return buf;
}

}  // namespace

CameraModel synthetic_camera() {
  CameraModel cam;
  cam.fx = 700.0;
  cam.fy = 700.0;
  cam.cx = 620.5;
  cam.cy = 187.0;
  cam.width = 1242;
  cam.height = 375;
  Mat3 r;
  r.m = {0, -1, 0, 0, 0, -1, 1, 0, 0};  // LiDAR (x fwd, y left, z up) -> camera (x right, y down, z fwd)
  cam.extrinsics = RigidTransform(r, {});
  return cam;
}

SynthResult generate_synthetic_sequence(const SynthSpec& spec, const fs::path& out_dir) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  std::error_code ec;
  fs::create_directories(out_dir / "scans", ec);
  fs::create_directories(out_dir / "detections", ec);
  if (spec.mode == DetectionMode::Raw) fs::create_directories(out_dir / "protos", ec);
  if (ec) throw_io(out_dir.string() + ": cannot create output directories: " + ec.message());

  SynthResult result;
  const CameraModel cam = synthetic_camera();
  std::vector<SynthObject> objects = place_objects(spec, rng);
  for (std::size_t k : spec.undetected_objects) {
    if (k >= objects.size()) throw_config("synth: undetected object index " + std::to_string(k) + " out of range");
    objects[k].detectable = false;
  }

  // Scans without a detection record.
  std::set<std::int64_t> silent(spec.withheld_scans.begin(), spec.withheld_scans.end());
  if (spec.dropout_rate > 0.0 && spec.scans > 0) {
    std::vector<std::int64_t> order(static_cast<std::size_t>(spec.scans));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n = static_cast<std::size_t>(std::lround(spec.dropout_rate * spec.scans));
    silent.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  }
  for (std::int64_t s : silent) {
    if (s >= 0 && s < spec.scans) result.scans_without_detections.push_back(s);
  }

  // Static background clutter.
  std::vector<Vec3> clutter;
  if (spec.clutter_points > 0) {
    Aabb3 region{{-5.0, -10.0, 0.0}, {spec.step * spec.scans + 15.0, 10.0, 3.0}, Frame::World};
    for (const auto& o : objects) {
      region.expand(o.box.min - Vec3{10.0, 10.0, 0.0});
      region.expand(o.box.max + Vec3{10.0, 10.0, 0.0});
    }
    region.min.z = 0.0;
    region.max.z = std::max(region.max.z, 3.0);
    std::size_t attempts = 0;
    while (clutter.size() < static_cast<std::size_t>(spec.clutter_points) &&
           attempts++ < 1000 * static_cast<std::size_t>(spec.clutter_points)) {
      const Vec3 p{region.min.x + unit(rng) * (region.max.x - region.min.x),
                   region.min.y + unit(rng) * (region.max.y - region.min.y),
                   region.min.z + unit(rng) * (region.max.z - region.min.z)};
      bool far_enough = true;
      for (const auto& o : objects) {
        if (box_distance(o.box, p) <= 1.0) {
          far_enough = false;
          break;
        }
      }
      if (far_enough) clutter.push_back(p);
    }
  }

  std::vector<Pose> poses;
  SequenceManifest manifest;
  manifest.calibration_path = out_dir / "calib.txt";
  manifest.poses_path = out_dir / "poses.txt";
  manifest.frame_width = cam.width;
  manifest.frame_height = cam.height;
  manifest.mode = spec.mode;

  std::size_t records_with_objects = 0;
  const double coverage_scale = std::sqrt(spec.mask_coverage);
  const double cell_w = static_cast<double>(cam.width) / kPrototypeSize;
  const double cell_h = static_cast<double>(cam.height) / kPrototypeSize;

  for (std::int64_t i = 0; i < spec.scans; ++i) {
    const double yaw = spec.yaw_amplitude * std::sin(0.7 * static_cast<double>(i));
    const Pose pose{i, RigidTransform(Mat3::rotation_z(yaw), {spec.step * static_cast<double>(i), 0.0,
                                                                 spec.sensor_height})};
    poses.push_back(pose);
    const RigidTransform T_LW = pose.T_WL.inverse();

    PointCloud scan;
    std::vector<Vec3> world;
    for (const auto& o : objects) sample_surface(o.box, spec.spacing, spec.sampling, rng, world);
    world.insert(world.end(), clutter.begin(), clutter.end());
    scan.points.reserve(world.size());
    for (const Vec3& pw : world) {
      Vec3 pl = T_LW.apply(pw);
      if (spec.noise_sigma > 0.0) pl += Vec3{noise(rng), noise(rng), noise(rng)};
      scan.points.push_back(pl);
    }
    ManifestEntry entry;
    entry.scan_id = i;
    entry.pose_row = static_cast<std::size_t>(i);
    entry.scan_path = out_dir / numbered("scans", i, ".bin");
    write_scan(entry.scan_path, scan);

    if (!silent.count(i)) {
      struct Visible {
        std::size_t object;
        double depth;
        std::vector<P2> hull;
      };
      std::vector<Visible> visible;
      for (std::size_t k = 0; k < objects.size(); ++k) {
        if (!objects[k].detectable) continue;
        double depth = 0.0;
        auto hull = silhouette(objects[k].box, T_LW, cam, &depth);
        if (!hull || hull->size() < 3) continue;
        std::vector<P2> poly = spec.mask_coverage < 1.0 ? scaled(*hull, coverage_scale) : *hull;
        const Rect r = bbox(poly);
        if (r.x1 < 0.0 || r.y1 < 0.0 || r.x0 > cam.width - 1 || r.y0 > cam.height - 1) continue;
        visible.push_back({k, depth, std::move(poly)});
      }
      // Nearest first: contested pixels go to the occluding object.
      std::stable_sort(visible.begin(), visible.end(),
                       [](const Visible& a, const Visible& b) { return a.depth < b.depth; });

      entry.detections_path = out_dir / numbered("detections", i, ".txt");
      if (spec.mode == DetectionMode::Decoded) {
        std::vector<Detection2D> dets;
        for (const auto& v : visible) {
          // Half-pixel dilation: every point projecting into the silhouette
          // rounds to a set pixel.
          BinaryMask mask = rasterize(dilated(v.hull, 0.5, 0.5), cam.width, cam.height);
          const PixelRect b = mask.bounds();
          if (b.empty()) continue;
          dets.push_back({{static_cast<double>(b.x0), static_cast<double>(b.y0), static_cast<double>(b.x1),
                           static_cast<double>(b.y1)},
                          objects[v.object].class_id,
                          spec.confidence,
                          std::move(mask)});
        }
        records_with_objects += dets.empty() ? 0 : 1;
        write_decoded_detections(*entry.detections_path, cam.width, cam.height, dets);
      } else {
        // One-hot prototype per detection; objects share a prototype when
        // their supports do not meet, since masks are clipped to their box.
        PrototypeSet protos(kNumMaskWeights, kPrototypeSize, kPrototypeSize,
                            std::vector<float>(kPrototypeBlobBytes / sizeof(float), -8.0f));
        std::vector<std::vector<Rect>> slot_support(kNumMaskWeights);
        std::vector<RawDetection> raw;
        for (const auto& v : visible) {
          const std::vector<P2> box_poly = dilated(v.hull, 2.0, 2.0);  // survives 1 px erosion
          const std::vector<P2> support = dilated(v.hull, cell_w + 1.0, cell_h + 1.0);
          const Rect sr = bbox(support);
          int slot = -1;
          for (int k = 0; k < kNumMaskWeights && slot < 0; ++k) {
            bool free = true;
            for (const Rect& o : slot_support[static_cast<std::size_t>(k)]) free = free && !o.overlaps(sr);
            if (free) slot = k;
          }
          if (slot < 0) {
            result.warnings.push_back("scan " + std::to_string(i) + ": more than 32 overlapping objects; object " +
                                      std::to_string(v.object) + " not encoded");
            continue;
          }
          slot_support[static_cast<std::size_t>(slot)].push_back(sr);
          for (int gy = 0; gy < kPrototypeSize; ++gy)
            for (int gx = 0; gx < kPrototypeSize; ++gx) {
              const double fx = (gx + 0.5) * cell_w - 0.5;
              const double fy = (gy + 0.5) * cell_h - 0.5;
              if (inside(support, fx, fy)) protos.at(slot, gy, gx) = 8.0f;
            }
          Rect br = bbox(box_poly);
          br.x0 = std::clamp(br.x0, 0.0, cam.width - 1.0);
          br.x1 = std::clamp(br.x1, 0.0, cam.width - 1.0);
          br.y0 = std::clamp(br.y0, 0.0, cam.height - 1.0);
          br.y1 = std::clamp(br.y1, 0.0, cam.height - 1.0);
          RawDetection r;
          r.cx = 0.5 * (br.x0 + br.x1);
          r.cy = 0.5 * (br.y0 + br.y1);
          r.width = std::max(br.x1 - br.x0, 1.0);
          r.height = std::max(br.y1 - br.y0, 1.0);
          r.class_confidences[static_cast<std::size_t>(objects[v.object].class_id)] = spec.confidence;
          r.mask_weights[static_cast<std::size_t>(slot)] = 1.0;
          raw.push_back(r);
        }
        records_with_objects += raw.empty() ? 0 : 1;
        write_raw_detections(*entry.detections_path, cam.width, cam.height, raw);
        entry.protos_path = out_dir / numbered("protos", i, ".bin");
        write_prototypes(*entry.protos_path, protos);
      }
    }
    manifest.entries.push_back(std::move(entry));
  }

  if (records_with_objects == 0 && !objects.empty()) {
    result.warnings.push_back("infeasible synthetic layout: no object appears in any detection record");
  }

  for (const auto& o : objects) result.ground_truth.push_back({std::nullopt, o.class_id, o.box});
  write_calibration(manifest.calibration_path, cam);
  write_poses(manifest.poses_path, poses);
  result.manifest_path = out_dir / "manifest.txt";
  write_manifest(result.manifest_path, manifest);
  result.ground_truth_path = out_dir / "gt.txt";
  write_ground_truth(result.ground_truth_path, result.ground_truth);
  return result;
}

}  // namespace box3d
