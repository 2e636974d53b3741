#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "types.hpp"

namespace aucoder::io {

// Correspondence between a dataset's native keypoint order and the
// 68-slot template. Slots that no native index maps to are redundant.
struct TemplateMap {
  std::string dataset_id;
  std::vector<std::pair<int, int>> index_map;  // (source_index, template_index)

  std::size_t native_count() const { return index_map.size(); }
  KeypointMask keypoint_mask() const;
  // Throws InvalidArgument when indices are out of range or repeated.
  void validate() const;
};

// Built-in maps: "ibug68" (identity), "disfa66" and "bp4d49".
TemplateMap builtin_template_map(const std::string& name);
TemplateMap load_template_map(const std::filesystem::path& path);
// Built-in name, or a JSON file path resolved relative to base_dir.
TemplateMap resolve_template_map(const std::string& name_or_path,
                                 const std::filesystem::path& base_dir = {});
std::vector<std::string> builtin_template_map_names();

struct KeypointFrame {
  std::string subject_id;
  int frame_index = 0;
  KeypointArray points{};
  KeypointMask mask{};
};

struct SubjectEntry {
  std::string id;
  int neutral_frame = 0;  // position within frames
  std::vector<std::filesystem::path> frames;
};

struct DatasetManifest {
  std::string dataset_id;
  std::string template_map_id;
  std::string anchor_set_id;
  std::vector<SubjectEntry> subjects;
  std::filesystem::path base_dir;  // frame paths resolve against this

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Native keypoint file: one "x,y" row per keypoint. A leading "x,y" header
// line is tolerated.
std::vector<Point2> read_keypoint_csv(const std::filesystem::path& path);
void write_keypoint_csv(const std::vector<Point2>& points, const std::filesystem::path& path);

// Places native points into template slots; absent slots stay (0,0).
KeypointFrame remap_to_template(const std::vector<Point2>& native, const TemplateMap& map,
                                const std::string& subject_id, int frame_index,
                                const std::string& source = {});

std::vector<KeypointFrame> load_frames(const DatasetManifest& manifest, const TemplateMap& map);

struct AuFrames {
  std::vector<KeypointFrame> apex;
  std::vector<std::string> labels;
  KeypointFrame neutral;
};

// AU keypoint files must hold all 68 template points. Labels default to the
// file stem.
AuFrames load_au_frames(const std::vector<std::filesystem::path>& paths,
                        const std::filesystem::path& neutral_path,
                        const std::vector<std::string>& labels = {});

// Comma-separated, row-major, no header, 17 significant digits.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace aucoder::io
