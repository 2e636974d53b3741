#include "io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace aucoder::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

// Map between native 66-point layout and the template: the two inner mouth
// corners (60, 64) are absent.
TemplateMap make_disfa66() {
  TemplateMap m{"disfa66", {}};
  int src = 0;
  for (int t = 0; t < 68; ++t) {
    if (t == 60 || t == 64) continue;
    m.index_map.emplace_back(src++, t);
  }
  return m;
}

// 49-point layout: no jawline (0..16) and no inner mouth corners.
TemplateMap make_bp4d49() {
  TemplateMap m{"bp4d49", {}};
  int src = 0;
  for (int t = 17; t < 68; ++t) {
    if (t == 60 || t == 64) continue;
    m.index_map.emplace_back(src++, t);
  }
  return m;
}

TemplateMap make_ibug68() {
  TemplateMap m{"ibug68", {}};
  for (int t = 0; t < 68; ++t) m.index_map.emplace_back(t, t);
  return m;
}

}  // namespace

KeypointMask TemplateMap::keypoint_mask() const {
  KeypointMask mask{};
  mask.fill(false);
  for (const auto& [src, tmpl] : index_map) {
    if (tmpl >= 0 && tmpl < static_cast<int>(kTemplatePoints)) mask[tmpl] = true;
  }
  return mask;
}

void TemplateMap::validate() const {
  if (index_map.empty()) fail(ErrorCode::InvalidArgument, "template map '" + dataset_id + "' is empty");
  std::set<int> sources, targets;
  for (const auto& [src, tmpl] : index_map) {
    if (tmpl < 0 || tmpl >= static_cast<int>(kTemplatePoints))
      fail(ErrorCode::InvalidArgument,
           "template map '" + dataset_id + "': template index " + std::to_string(tmpl) + " outside [0, 67]");
    if (src < 0 || src >= static_cast<int>(index_map.size()))
      fail(ErrorCode::InvalidArgument,
           "template map '" + dataset_id + "': source index " + std::to_string(src) + " outside native range");
    if (!targets.insert(tmpl).second)
      fail(ErrorCode::InvalidArgument,
           "template map '" + dataset_id + "': duplicate template index " + std::to_string(tmpl));
    if (!sources.insert(src).second)
      fail(ErrorCode::InvalidArgument,
           "template map '" + dataset_id + "': duplicate source index " + std::to_string(src));
  }
}

std::vector<std::string> builtin_template_map_names() { return {"ibug68", "disfa66", "bp4d49"}; }

TemplateMap builtin_template_map(const std::string& name) {
  if (name == "ibug68" || name == "ck68" || name == "identity68") return make_ibug68();
  if (name == "disfa66") return make_disfa66();
  if (name == "bp4d49") return make_bp4d49();
  fail(ErrorCode::InvalidArgument, "unknown template map '" + name + "'");
}

TemplateMap load_template_map(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  TemplateMap m;
  try {
    m.dataset_id = j.value("dataset_id", path.stem().string());
    for (const auto& pair : j.at("index_map")) {
      m.index_map.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": malformed template map: " + e.what());
  }
  m.validate();
  return m;
}

TemplateMap resolve_template_map(const std::string& name_or_path, const fs::path& base_dir) {
  for (const auto& n : builtin_template_map_names()) {
    if (n == name_or_path) return builtin_template_map(n);
  }
  if (name_or_path == "ck68" || name_or_path == "identity68") return builtin_template_map(name_or_path);
  fs::path p(name_or_path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (!fs::exists(p)) fail(ErrorCode::InvalidArgument, "unknown template map '" + name_or_path + "'");
  return load_template_map(p);
}

fs::path DatasetManifest::resolve(const fs::path& p) const {
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

DatasetManifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.template_map_id = j.value("template_map", std::string("ibug68"));
    m.anchor_set_id = j.value("anchor_set", std::string("auto"));
    std::set<std::string> seen;
    for (const auto& s : j.at("subjects")) {
      SubjectEntry e;
      e.id = s.at("id").get<std::string>();
      if (!seen.insert(e.id).second)
        fail(ErrorCode::InvalidArgument, path.string() + ": duplicate subject '" + e.id + "'");
      for (const auto& f : s.at("frames")) e.frames.emplace_back(f.get<std::string>());
      const auto& nf = s.at("neutral_frame");
      if (nf.is_number_integer()) {
        e.neutral_frame = nf.get<int>();
      } else {
        const auto name = nf.get<std::string>();
        e.neutral_frame = -1;
        for (std::size_t i = 0; i < e.frames.size(); ++i) {
          if (e.frames[i] == fs::path(name)) {
            e.neutral_frame = static_cast<int>(i);
            break;
          }
        }
      }
      if (e.neutral_frame < 0 || e.neutral_frame >= static_cast<int>(e.frames.size()))
        fail(ErrorCode::InvalidArgument,
             path.string() + ": subject '" + e.id + "' names a neutral frame that is not among its frames");
      m.subjects.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  json j;
  j["dataset_id"] = manifest.dataset_id;
  j["template_map"] = manifest.template_map_id;
  j["anchor_set"] = manifest.anchor_set_id;
  j["subjects"] = json::array();
  for (const auto& s : manifest.subjects) {
    json frames = json::array();
    for (const auto& f : s.frames) frames.push_back(f.generic_string());
    j["subjects"].push_back({{"id", s.id}, {"neutral_frame", s.neutral_frame}, {"frames", frames}});
  }
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<Point2> read_keypoint_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open keypoint file " + path.string());
  std::vector<Point2> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    auto cells = split_commas(t);
    if (pts.empty() && lineno == 1 && cells.size() == 2 && cells[0] == "x" && cells[1] == "y") continue;
    if (cells.size() != 2)
      fail(ErrorCode::Parse, where(path, lineno) + ": expected two columns x,y");
    Point2 p;
    if (!parse_double(cells[0], p.x) || !parse_double(cells[1], p.y))
      fail(ErrorCode::Parse, where(path, lineno) + ": malformed number");
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail(ErrorCode::Parse, where(path, lineno) + ": non-finite coordinate");
    pts.push_back(p);
  }
  return pts;
}

void write_keypoint_csv(const std::vector<Point2>& points, const fs::path& path) {
  std::string out;
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
    out += buf;
  }
  write_text_file(path, out);
}

KeypointFrame remap_to_template(const std::vector<Point2>& native, const TemplateMap& map,
                                const std::string& subject_id, int frame_index, const std::string& source) {
  if (native.size() != map.native_count())
    fail(ErrorCode::InvalidArgument,
         (source.empty() ? std::string("frame") : source) + ": row count " + std::to_string(native.size()) +
             " does not match template map '" + map.dataset_id + "' (" + std::to_string(map.native_count()) + ")");
  KeypointFrame f;
  f.subject_id = subject_id;
  f.frame_index = frame_index;
  f.mask.fill(false);
  for (const auto& [src, tmpl] : map.index_map) {
    const auto& p = native[static_cast<std::size_t>(src)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail(ErrorCode::Parse, (source.empty() ? std::string("frame") : source) + ": non-finite coordinate");
    f.points[static_cast<std::size_t>(tmpl)] = p;
    f.mask[static_cast<std::size_t>(tmpl)] = true;
  }
  return f;
}

std::vector<KeypointFrame> load_frames(const DatasetManifest& manifest, const TemplateMap& map) {
  map.validate();
  std::vector<KeypointFrame> frames;
  std::set<std::pair<std::string, int>> seen;
  for (const auto& subject : manifest.subjects) {
    for (std::size_t i = 0; i < subject.frames.size(); ++i) {
      const auto path = manifest.resolve(subject.frames[i]);
      if (!fs::exists(path)) fail(ErrorCode::Io, "missing frame file " + path.string());
      const int idx = static_cast<int>(i);
      if (!seen.emplace(subject.id, idx).second)
        fail(ErrorCode::InvalidArgument,
             "duplicate frame (" + subject.id + ", " + std::to_string(idx) + ")");
      frames.push_back(remap_to_template(read_keypoint_csv(path), map, subject.id, idx, path.string()));
    }
  }
  return frames;
}

AuFrames load_au_frames(const std::vector<fs::path>& paths, const fs::path& neutral_path,
                        const std::vector<std::string>& labels) {
  if (paths.empty()) fail(ErrorCode::InvalidArgument, "empty dictionary: no AU keypoint files given");
  if (neutral_path.empty() || !fs::exists(neutral_path))
    fail(ErrorCode::Io, "missing neutral AU keypoint file " + neutral_path.string());
  if (!labels.empty() && labels.size() != paths.size())
    fail(ErrorCode::InvalidArgument, "AU label count does not match file count");
  const auto identity = builtin_template_map("ibug68");
  AuFrames out;
  out.neutral = remap_to_template(read_keypoint_csv(neutral_path), identity, "au", -1, neutral_path.string());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!fs::exists(paths[i])) fail(ErrorCode::Io, "missing AU keypoint file " + paths[i].string());
    out.apex.push_back(remap_to_template(read_keypoint_csv(paths[i]), identity, "au", static_cast<int>(i),
                                         paths[i].string()));
    out.labels.push_back(labels.empty() ? paths[i].stem().string() : labels[i]);
  }
  return out;
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 24);
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v))
        fail(ErrorCode::InvalidArgument, "non-finite matrix entry at (" + std::to_string(r) + ", " +
                                             std::to_string(c) + ") for " + path.string());
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  write_text_file(path, out);
}

Matrix read_matrix_csv(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split_commas(line);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      fail(ErrorCode::Parse, where(path, lineno) + ": ragged row (" + std::to_string(cells.size()) +
                                 " columns, expected " + std::to_string(cols) + ")");
    }
    for (auto cell : cells) {
      double v;
      if (!parse_double(cell, v)) fail(ErrorCode::Parse, where(path, lineno) + ": malformed number");
      values.push_back(v);
    }
    ++rows;
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
  return m;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace aucoder::io
