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

#include "core/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "core/error.hpp"

namespace box3d {

namespace {

// ---- small text-format helpers ----------------------------------------------

struct TextLine {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whitespace-separated tokens; blank lines and '#' comment lines dropped.
std::vector<TextLine> read_text_lines(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<TextLine> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++number;
    std::string_view line(text.data() + pos, end - pos);
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      TextLine tl;
      tl.number = number;
      std::size_t i = first;
      while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) tl.tokens.emplace_back(line.substr(i, j - i));
        i = j;
      }
      lines.push_back(std::move(tl));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line, const std::string& what) {
  throw_input(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& tok, const fs::path& path, std::size_t line, const char* what) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) fail_at(path, line, std::string("expected ") + what + ", got '" + tok + "'");
  return v;
}

std::int64_t parse_int(const std::string& tok, const fs::path& path, std::size_t line, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail_at(path, line, std::string("expected ") + what + ", got '" + tok + "'");
  }
  return v;
}

void expect_arity(const TextLine& l, std::size_t n, const fs::path& path, const std::string& what) {
  if (l.tokens.size() != n) {
    fail_at(path, l.number,
            what + ": expected " + std::to_string(n - 1) + " values, got " + std::to_string(l.tokens.size() - 1));
  }
}

// Values that round to zero print unsigned.
std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", std::fabs(v) < 5e-7 ? 0.0 : v);
  return buf;
}

// Shortest text that reads back to the same double.
std::string fmt17(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v == 0.0 ? 0.0 : v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw_io(path.string() + ": write failed");
}

template <typename T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path candidate(p);
  return candidate.is_absolute() ? candidate : base / candidate;
}

}  // namespace

// ---- scans ------------------------------------------------------------------

ScanReadResult read_scan(const fs::path& path) {
  const std::string bytes = read_file(path);
  constexpr std::size_t kRecord = 4 * sizeof(float);
  if (bytes.size() % kRecord != 0) {
    throw_input(path.string() + ": truncated at byte " + std::to_string(bytes.size() / kRecord * kRecord) +
                " (file size " + std::to_string(bytes.size()) + " is not a multiple of 16)");
  }
  ScanReadResult out;
  out.cloud.frame = Frame::Lidar;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size() / kRecord;
  out.cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = data + i * kRecord;
    const Vec3 p{load_le<float>(rec), load_le<float>(rec + 4), load_le<float>(rec + 8)};
    if (!p.finite()) {
      ++out.dropped_nonfinite;
      continue;
    }
    out.cloud.points.push_back(p);
  }
  return out;
}

void write_scan(const fs::path& path, const PointCloud& cloud) {
  std::string bytes;
  bytes.reserve(cloud.points.size() * 16);
  for (const Vec3& p : cloud.points) {
    store_le(bytes, static_cast<float>(p.x));
    store_le(bytes, static_cast<float>(p.y));
    store_le(bytes, static_cast<float>(p.z));
    store_le(bytes, 0.0f);
  }
  write_text(path, bytes);
}

// ---- calibration --------------------------------------------------------------

CameraModel read_calibration(const fs::path& path) {
  const auto lines = read_text_lines(path);
  std::optional<std::array<double, 4>> k;
  std::optional<std::array<int, 2>> size;
  std::optional<std::array<double, 12>> tr;
  std::size_t tr_line = 0;
  for (const auto& l : lines) {
    const std::string& key = l.tokens[0];
    if (key == "K:") {
      expect_arity(l, 5, path, "K:");
      std::array<double, 4> v{};
      for (std::size_t i = 0; i < 4; ++i) v[i] = parse_double(l.tokens[i + 1], path, l.number, "real");
      k = v;
    } else if (key == "size:") {
      expect_arity(l, 3, path, "size:");
      size = std::array<int, 2>{static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer width")),
                                static_cast<int>(parse_int(l.tokens[2], path, l.number, "integer height"))};
    } else if (key == "Tr:") {
      expect_arity(l, 13, path, "Tr:");
      std::array<double, 12> v{};
      for (std::size_t i = 0; i < 12; ++i) v[i] = parse_double(l.tokens[i + 1], path, l.number, "real");
      tr = v;
      tr_line = l.number;
    } else {
      fail_at(path, l.number, "unknown key '" + key + "'");
    }
  }
  if (!k) throw_input(path.string() + ": missing key 'K:'");
  if (!size) throw_input(path.string() + ": missing key 'size:'");
  if (!tr) throw_input(path.string() + ": missing key 'Tr:'");

  CameraModel cam;
  cam.fx = (*k)[0];
  cam.fy = (*k)[1];
  cam.cx = (*k)[2];
  cam.cy = (*k)[3];
  cam.width = (*size)[0];
  cam.height = (*size)[1];
  try {
    cam.extrinsics = RigidTransform::from_row_major_3x4(*tr);
    cam.validate();
  } catch (const Error& e) {
    fail_at(path, tr_line, e.what());
  }
  return cam;
}

void write_calibration(const fs::path& path, const CameraModel& cam) {
  std::string s = "# box3d calibration: pixel = K [R|t] p_lidar\n";
  s += "K: " + fmt17(cam.fx) + " " + fmt17(cam.fy) + " " + fmt17(cam.cx) + " " + fmt17(cam.cy) + "\n";
  s += "size: " + std::to_string(cam.width) + " " + std::to_string(cam.height) + "\n";
  s += "Tr:";
  for (double v : cam.extrinsics.row_major_3x4()) s += " " + fmt17(v);
  s += "\n";
  write_text(path, s);
}

CameraModel convert_kitti_calibration(const fs::path& path, const std::string& projection_key, int width,
                                      int height) {
  const auto lines = read_text_lines(path);
  std::map<std::string, std::pair<std::size_t, std::vector<double>>> entries;
  for (const auto& l : lines) {
    std::string key = l.tokens[0];
    if (!key.empty() && key.back() == ':') key.pop_back();
    std::vector<double> vals;
    for (std::size_t i = 1; i < l.tokens.size(); ++i) vals.push_back(parse_double(l.tokens[i], path, l.number, "real"));
    entries[key] = {l.number, std::move(vals)};
  }
  auto need = [&](const std::string& key, std::size_t n) -> const std::vector<double>& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw_input(path.string() + ": missing key '" + key + ":'");
    if (it->second.second.size() != n) {
      fail_at(path, it->second.first,
              key + ": expected " + std::to_string(n) + " values, got " + std::to_string(it->second.second.size()));
    }
    return it->second.second;
  };
  const auto& p = need(projection_key, 12);
  const auto& tr = need("Tr_velo_to_cam", 12);
  Mat3 r0 = Mat3::identity();
  if (entries.count("R0_rect")) {
    const auto& r = need("R0_rect", 9);
    std::copy(r.begin(), r.end(), r0.m.begin());
    r0 = orthonormalize(r0, 1e-3);
  }

  // P = K [I | b] with K upper triangular, unit bottom-right.
  const double fx = p[0], skew = p[1], cx = p[2], fy = p[5], cy = p[6];
  if (std::abs(p[4]) > 1e-9 || std::abs(p[8]) > 1e-9 || std::abs(p[9]) > 1e-9 || std::abs(p[10] - 1.0) > 1e-9) {
    fail_at(path, entries[projection_key].first, projection_key + ": left 3x3 block is not a pinhole K");
  }
  if (std::abs(skew) > 1e-6 * std::abs(fx)) {
    fail_at(path, entries[projection_key].first, projection_key + ": non-zero skew is not supported");
  }
  const double bz = p[11];
  const Vec3 b{(p[3] - cx * bz) / fx, (p[7] - cy * bz) / fy, bz};

  const RigidTransform velo_to_cam = RigidTransform::from_row_major_3x4(std::span<const double, 12>(tr.data(), 12));
  const Mat3 rot = r0 * velo_to_cam.rotation();
  const Vec3 t = r0 * velo_to_cam.translation() + b;

  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.extrinsics = RigidTransform(orthonormalize(rot, 1e-6), t);
  cam.validate();
  return cam;
}

// ---- poses ------------------------------------------------------------------

std::vector<Pose> read_poses(const fs::path& path) {
  std::vector<Pose> poses;
  for (const auto& l : read_text_lines(path)) {
    if (l.tokens.size() != 12) {
      fail_at(path, l.number, "expected 12 values, got " + std::to_string(l.tokens.size()));
    }
    std::array<double, 12> v{};
    for (std::size_t i = 0; i < 12; ++i) v[i] = parse_double(l.tokens[i], path, l.number, "real");
    try {
      poses.push_back({static_cast<std::int64_t>(poses.size()), RigidTransform::from_row_major_3x4(v)});
    } catch (const Error& e) {
      fail_at(path, l.number, e.what());
    }
  }
  return poses;
}

void write_poses(const fs::path& path, const std::vector<Pose>& poses) {
  std::string s;
  for (const Pose& p : poses) {
    const auto rows = p.T_WL.row_major_3x4();
    for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? " " : "") + fmt17(rows[i]);
    s += "\n";
  }
  write_text(path, s);
}

// ---- detections -------------------------------------------------------------

const char* detection_mode_name(DetectionMode m) { return m == DetectionMode::Decoded ? "decoded" : "raw"; }

std::vector<std::uint32_t> rle_encode(const BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t c : mask.cells()) {
    if (c != current) {
      runs.push_back(run);
      run = 0;
      current = c;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

BinaryMask rle_decode(const std::vector<std::uint32_t>& runs, int width, int height) {
  const std::uint64_t total = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  std::uint64_t sum = 0;
  for (std::uint32_t r : runs) sum += r;
  if (sum != total) {
    throw_input("RLE run lengths sum to " + std::to_string(sum) + ", expected width*height = " + std::to_string(total));
  }
  BinaryMask mask(width, height);
  std::size_t pos = 0;
  bool value = false;
  for (std::uint32_t r : runs) {
    if (value) mask.fill_run(pos, r);
    pos += r;
    value = !value;
  }
  return mask;
}

PrototypeSet read_prototypes(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() != kPrototypeBlobBytes) {
    throw_input(path.string() + ": prototype blob is " + std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(kPrototypeBlobBytes) + " bytes (32 x 160 x 160 float32)");
  }
  std::vector<float> data(kPrototypeBlobBytes / sizeof(float));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = load_le<float>(p + i * sizeof(float));
  return PrototypeSet(kNumMaskWeights, kPrototypeSize, kPrototypeSize, std::move(data));
}

void write_prototypes(const fs::path& path, const PrototypeSet& protos) {
  if (protos.count() != kNumMaskWeights || protos.rows() != kPrototypeSize || protos.cols() != kPrototypeSize) {
    throw_input("prototype set must be 32 x 160 x 160 for serialization");
  }
  std::string bytes;
  bytes.reserve(kPrototypeBlobBytes);
  for (float v : protos.data()) store_le(bytes, v);
  write_text(path, bytes);
}

FrameDetections read_detections(const fs::path& path, DetectionMode mode, const std::optional<fs::path>& protos_path) {
  FrameDetections out;
  bool have_frame = false;
  for (const auto& l : read_text_lines(path)) {
    const std::string& key = l.tokens[0];
    if (key == "frame") {
      expect_arity(l, 3, path, "frame");
      out.frame_width = static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer width"));
      out.frame_height = static_cast<int>(parse_int(l.tokens[2], path, l.number, "integer height"));
      if (out.frame_width <= 0 || out.frame_height <= 0) fail_at(path, l.number, "frame dimensions must be positive");
      have_frame = true;
      continue;
    }
    if (!have_frame) fail_at(path, l.number, "'frame <w> <h>' must precede detection records");
    if (mode == DetectionMode::Decoded) {
      if (key != "det") fail_at(path, l.number, "expected 'det' record in decoded mode, got '" + key + "'");
      if (l.tokens.size() < 8) fail_at(path, l.number, "det: expected class, confidence, box and RLE");
      Detection2D d;
      const auto cls = parse_int(l.tokens[1], path, l.number, "integer class id");
      if (cls < 0 || cls >= kNumClasses) fail_at(path, l.number, "class id out of range [0, 80)");
      d.class_id = static_cast<int>(cls);
      d.confidence = parse_double(l.tokens[2], path, l.number, "confidence");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) fail_at(path, l.number, "confidence outside [0, 1]");
      d.box = {parse_double(l.tokens[3], path, l.number, "x_min"), parse_double(l.tokens[4], path, l.number, "y_min"),
               parse_double(l.tokens[5], path, l.number, "x_max"), parse_double(l.tokens[6], path, l.number, "y_max")};
      const auto n_runs = parse_int(l.tokens[7], path, l.number, "run count");
      if (n_runs < 0 || static_cast<std::size_t>(n_runs) != l.tokens.size() - 8) {
        fail_at(path, l.number, "RLE declares " + std::to_string(n_runs) + " runs, found " +
                                    std::to_string(l.tokens.size() - 8));
      }
      std::vector<std::uint32_t> runs;
      runs.reserve(static_cast<std::size_t>(n_runs));
      for (std::size_t i = 8; i < l.tokens.size(); ++i) {
        const auto r = parse_int(l.tokens[i], path, l.number, "run length");
        if (r < 0 || r > 0xFFFFFFFFll) fail_at(path, l.number, "run length out of range");
        runs.push_back(static_cast<std::uint32_t>(r));
      }
      try {
        d.mask = rle_decode(runs, out.frame_width, out.frame_height);
      } catch (const Error& e) {
        fail_at(path, l.number, e.what());
      }
      out.decoded.push_back(std::move(d));
    } else {
      if (key != "raw") fail_at(path, l.number, "expected 'raw' record in raw mode, got '" + key + "'");
      expect_arity(l, 1 + 4 + kNumClasses + kNumMaskWeights, path, "raw");
      RawDetection r;
      r.cx = parse_double(l.tokens[1], path, l.number, "cx");
      r.cy = parse_double(l.tokens[2], path, l.number, "cy");
      r.width = parse_double(l.tokens[3], path, l.number, "width");
      r.height = parse_double(l.tokens[4], path, l.number, "height");
      if (!(r.width > 0.0 && r.height > 0.0)) fail_at(path, l.number, "raw box width/height must be positive");
      for (int c = 0; c < kNumClasses; ++c) {
        r.class_confidences[static_cast<std::size_t>(c)] =
            parse_double(l.tokens[static_cast<std::size_t>(5 + c)], path, l.number, "class confidence");
      }
      for (int k = 0; k < kNumMaskWeights; ++k) {
        r.mask_weights[static_cast<std::size_t>(k)] =
            parse_double(l.tokens[static_cast<std::size_t>(5 + kNumClasses + k)], path, l.number, "mask weight");
      }
      out.raw.push_back(r);
    }
  }
  if (!have_frame) throw_input(path.string() + ": missing 'frame <w> <h>' record");
  if (mode == DetectionMode::Raw) {
    if (!protos_path) throw_input(path.string() + ": raw-mode detections need a prototype blob");
    out.protos = read_prototypes(*protos_path);
  }
  return out;
}

void write_decoded_detections(const fs::path& path, int frame_w, int frame_h,
                              const std::vector<Detection2D>& detections) {
  std::string s = "# box3d detections decoded\nframe " + std::to_string(frame_w) + " " + std::to_string(frame_h) + "\n";
  for (const Detection2D& d : detections) {
    if (d.mask.width() != frame_w || d.mask.height() != frame_h) throw_input("detection mask does not match frame");
    const auto runs = rle_encode(d.mask);
    s += "det " + std::to_string(d.class_id) + " " + fmt17(d.confidence) + " " + fmt17(d.box.x_min) + " " +
         fmt17(d.box.y_min) + " " + fmt17(d.box.x_max) + " " + fmt17(d.box.y_max) + " " + std::to_string(runs.size());
    for (std::uint32_t r : runs) s += " " + std::to_string(r);
    s += "\n";
  }
  write_text(path, s);
}

void write_raw_detections(const fs::path& path, int frame_w, int frame_h, const std::vector<RawDetection>& raw) {
  std::string s = "# box3d detections raw\nframe " + std::to_string(frame_w) + " " + std::to_string(frame_h) + "\n";
  for (const RawDetection& r : raw) {
    s += "raw " + fmt17(r.cx) + " " + fmt17(r.cy) + " " + fmt17(r.width) + " " + fmt17(r.height);
    for (double c : r.class_confidences) s += " " + fmt17(c);
    for (double w : r.mask_weights) s += " " + fmt17(w);
    s += "\n";
  }
  write_text(path, s);
}

// ---- manifest ---------------------------------------------------------------

SequenceManifest read_manifest(const fs::path& path) {
  const fs::path base = path.parent_path();
  SequenceManifest m;
  bool have_calib = false, have_poses = false, have_frame = false;
  auto existing = [&](const std::string& p, std::size_t line) {
    fs::path r = resolve(base, p);
    if (!fs::exists(r)) fail_at(path, line, "referenced path does not exist: " + r.string());
    return r;
  };
  for (const auto& l : read_text_lines(path)) {
    const std::string& key = l.tokens[0];
    if (key == "calibration") {
      expect_arity(l, 2, path, "calibration");
      m.calibration_path = existing(l.tokens[1], l.number);
      have_calib = true;
    } else if (key == "poses") {
      expect_arity(l, 2, path, "poses");
      m.poses_path = existing(l.tokens[1], l.number);
      have_poses = true;
    } else if (key == "frame") {
      expect_arity(l, 3, path, "frame");
      m.frame_width = static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer width"));
      m.frame_height = static_cast<int>(parse_int(l.tokens[2], path, l.number, "integer height"));
      have_frame = true;
    } else if (key == "detections") {
      expect_arity(l, 2, path, "detections");
      if (l.tokens[1] == "decoded") {
        m.mode = DetectionMode::Decoded;
      } else if (l.tokens[1] == "raw") {
        m.mode = DetectionMode::Raw;
      } else {
        fail_at(path, l.number, "detections mode must be 'decoded' or 'raw'");
      }
    } else if (key == "scan") {
      if (l.tokens.size() != 5 && l.tokens.size() != 6) {
        fail_at(path, l.number, "scan: expected '<id> <scan> <detections|-> <pose_row> [<protos>]'");
      }
      ManifestEntry e;
      e.scan_id = parse_int(l.tokens[1], path, l.number, "integer scan id");
      if (!m.entries.empty() && e.scan_id <= m.entries.back().scan_id) {
        fail_at(path, l.number, "scan ids must be strictly increasing");
      }
      e.scan_path = existing(l.tokens[2], l.number);
      if (l.tokens[3] != "-") e.detections_path = existing(l.tokens[3], l.number);
      const auto row = parse_int(l.tokens[4], path, l.number, "integer pose row");
      if (row < 0) fail_at(path, l.number, "pose row must be >= 0");
      e.pose_row = static_cast<std::size_t>(row);
      if (l.tokens.size() == 6) e.protos_path = existing(l.tokens[5], l.number);
      m.entries.push_back(std::move(e));
    } else {
      fail_at(path, l.number, "unknown manifest key '" + key + "'");
    }
  }
  if (!have_calib) throw_input(path.string() + ": missing 'calibration'");
  if (!have_poses) throw_input(path.string() + ": missing 'poses'");
  if (!have_frame) throw_input(path.string() + ": missing 'frame'");
  if (m.mode == DetectionMode::Raw) {
    for (const auto& e : m.entries) {
      if (e.detections_path && !e.protos_path) {
        throw_input(path.string() + ": raw-mode scan " + std::to_string(e.scan_id) + " lacks a prototype blob");
      }
    }
  }
  return m;
}

void write_manifest(const fs::path& path, const SequenceManifest& m) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    std::error_code ec;
    const fs::path r = fs::relative(p, base.empty() ? fs::path(".") : base, ec);
    return (ec || r.empty()) ? p.generic_string() : r.generic_string();
  };
  std::string s = "# box3d sequence manifest\n";
  s += "calibration " + rel(m.calibration_path) + "\n";
  s += "poses " + rel(m.poses_path) + "\n";
  s += "frame " + std::to_string(m.frame_width) + " " + std::to_string(m.frame_height) + "\n";
  s += std::string("detections ") + detection_mode_name(m.mode) + "\n";
  for (const auto& e : m.entries) {
    s += "scan " + std::to_string(e.scan_id) + " " + rel(e.scan_path) + " " +
         (e.detections_path ? rel(*e.detections_path) : std::string("-")) + " " + std::to_string(e.pose_row);
    if (e.protos_path) s += " " + rel(*e.protos_path);
    s += "\n";
  }
  write_text(path, s);
}

// ---- registry ---------------------------------------------------------------

namespace {
constexpr const char* kRegistryColumns =
    "object_id class_id centroid_x centroid_y centroid_z min_x min_y min_z max_x max_y max_z observation_count "
    "point_count";
}

std::string format_registry(const std::vector<SnapshotEntry>& snapshot, const std::vector<std::string>& header_comments) {
  std::string s = "# box3d registry v1\n";
  for (const auto& c : header_comments) s += "# " + c + "\n";
  s += kRegistryColumns;
  s += "\n";
  for (const SnapshotEntry& e : snapshot) {
    s += std::to_string(e.object_id) + " " + std::to_string(e.class_id);
    for (double v : {e.centroid.x, e.centroid.y, e.centroid.z, e.box.min.x, e.box.min.y, e.box.min.z, e.box.max.x,
                     e.box.max.y, e.box.max.z}) {
      s += " " + fmt6(v);
    }
    s += " " + std::to_string(e.observation_count) + " " + std::to_string(e.point_count) + "\n";
  }
  return s;
}

void write_registry(const fs::path& path, const std::vector<SnapshotEntry>& snapshot,
                    const std::vector<std::string>& header_comments) {
  write_text(path, format_registry(snapshot, header_comments));
}

std::vector<SnapshotEntry> read_registry(const fs::path& path) {
  std::vector<SnapshotEntry> out;
  bool header_seen = false;
  for (const auto& l : read_text_lines(path)) {
    if (!header_seen && l.tokens[0] == "object_id") {
      header_seen = true;
      continue;
    }
    expect_arity(l, 13, path, "registry record");
    SnapshotEntry e;
    e.object_id = parse_int(l.tokens[0], path, l.number, "integer object id");
    e.class_id = static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer class id"));
    double v[9];
    for (std::size_t i = 0; i < 9; ++i) v[i] = parse_double(l.tokens[2 + i], path, l.number, "real");
    e.centroid = {v[0], v[1], v[2]};
    e.box = {{v[3], v[4], v[5]}, {v[6], v[7], v[8]}, Frame::World};
    if (!(e.box.min.x <= e.box.max.x && e.box.min.y <= e.box.max.y && e.box.min.z <= e.box.max.z)) {
      fail_at(path, l.number, "box min exceeds max");
    }
    e.observation_count = static_cast<int>(parse_int(l.tokens[11], path, l.number, "integer observation count"));
    const auto pc = parse_int(l.tokens[12], path, l.number, "integer point count");
    if (pc < 0) fail_at(path, l.number, "negative point count");
    e.point_count = static_cast<std::size_t>(pc);
    out.push_back(e);
  }
  return out;
}

// ---- ground truth -----------------------------------------------------------

std::vector<GroundTruthBox> read_ground_truth(const fs::path& path) {
  std::vector<GroundTruthBox> out;
  for (const auto& l : read_text_lines(path)) {
    expect_arity(l, 8, path, "ground truth record");
    GroundTruthBox g;
    if (l.tokens[0] != "global") g.scan_id = parse_int(l.tokens[0], path, l.number, "'global' or integer scan id");
    g.class_id = static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer class id"));
    double v[6];
    for (std::size_t i = 0; i < 6; ++i) v[i] = parse_double(l.tokens[2 + i], path, l.number, "real");
    g.box = {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, Frame::World};
    if (!(v[0] <= v[3] && v[1] <= v[4] && v[2] <= v[5])) fail_at(path, l.number, "box min exceeds max");
    out.push_back(g);
  }
  return out;
}

void write_ground_truth(const fs::path& path, const std::vector<GroundTruthBox>& boxes) {
  std::string s = "# box3d ground truth: <global|scan_id> class_id min_x min_y min_z max_x max_y max_z\n";
  for (const auto& g : boxes) {
    s += (g.scan_id ? std::to_string(*g.scan_id) : std::string("global")) + " " + std::to_string(g.class_id);
    for (double v : {g.box.min.x, g.box.min.y, g.box.min.z, g.box.max.x, g.box.max.y, g.box.max.z}) s += " " + fmt17(v);
    s += "\n";
  }
  write_text(path, s);
}

std::map<int, int> read_class_map(const fs::path& path) {
  std::map<int, int> out;
  for (const auto& l : read_text_lines(path)) {
    expect_arity(l, 2, path, "class map");
    out[static_cast<int>(parse_int(l.tokens[0], path, l.number, "integer detector class"))] =
        static_cast<int>(parse_int(l.tokens[1], path, l.number, "integer ground-truth class"));
  }
  return out;
}

// ---- PLY --------------------------------------------------------------------

void write_ply(const fs::path& path, const std::vector<ColoredPoint>& points) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(points.size()) +
                  "\nproperty float x\nproperty float y\nproperty float z\n"
                  "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& cp : points) {
    s += fmt6(cp.p.x) + " " + fmt6(cp.p.y) + " " + fmt6(cp.p.z) + " " + std::to_string(cp.rgb[0]) + " " +
         std::to_string(cp.rgb[1]) + " " + std::to_string(cp.rgb[2]) + "\n";
  }
  write_text(path, s);
}

std::array<std::uint8_t, 3> object_color(ObjectId id) {
  std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  // Channels in [32, 223] so no object is drawn white like the background.
  return {static_cast<std::uint8_t>(32 + (z & 0xFF) % 192), static_cast<std::uint8_t>(32 + ((z >> 8) & 0xFF) % 192),
          static_cast<std::uint8_t>(32 + ((z >> 16) & 0xFF) % 192)};
}

}  // namespace box3d
