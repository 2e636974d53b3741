#include "aucoder/aucoder.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "json.hpp"
#include "pipeline.hpp"
#include "store.hpp"
#include "synth.hpp"

struct aucoder_features {
  aucoder::features::FeatureMatrix value;
};

struct aucoder_model {
  aucoder::pca::PcaModel value;
};

struct aucoder_dictionary {
  aucoder::sparse::Dictionary value;
};

namespace {

namespace fs = std::filesystem;
using aucoder::ErrorCode;

thread_local std::string g_last_error;

aucoder_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return AUCODER_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return AUCODER_ERR_IO;
    case ErrorCode::Parse: return AUCODER_ERR_PARSE;
    case ErrorCode::Degenerate: return AUCODER_ERR_DEGENERATE;
    case ErrorCode::OutOfRange: return AUCODER_ERR_OUT_OF_RANGE;
    case ErrorCode::MaskMismatch: return AUCODER_ERR_MASK;
  }
  return AUCODER_ERR_INTERNAL;
}

template <class F>
aucoder_status guarded(F&& body) {
  try {
    body();
    return AUCODER_OK;
  } catch (const aucoder::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return AUCODER_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AUCODER_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AUCODER_ERR_INTERNAL;
  }
}

template <class... Ptrs>
void require(const char* what, Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) aucoder::fail(ErrorCode::InvalidArgument, std::string(what) + ": null argument");
}

nlohmann::json parse_run(const char* run_json) {
  if (run_json == nullptr || *run_json == '\0') return nullptr;
  try {
    return nlohmann::json::parse(run_json);
  } catch (const nlohmann::json::exception& e) {
    aucoder::fail(ErrorCode::Parse, std::string("run metadata is not valid JSON: ") + e.what());
  }
}

aucoder::sparse::LarsConfig to_config(const aucoder_lars_options* o) {
  aucoder::sparse::LarsConfig c;
  if (o == nullptr) return c;
  c.max_active = static_cast<Eigen::Index>(o->max_active);
  c.ridge = o->ridge;
  if (o->tolerance > 0.0) c.tolerance = o->tolerance;
  c.normalize_columns = o->normalize_columns != 0;
  return c;
}

void write_table_sidecar(const fs::path& csv, const std::string& kind, const nlohmann::json& body,
                         const nlohmann::json& run) {
  nlohmann::json j = body;
  j["format"] = kind;
  j["table"] = csv.filename().string();
  if (!run.is_null()) j["run"] = run;
  aucoder::io::write_text_file(aucoder::store::sidecar_path(csv), j.dump(2) + "\n");
}

}  // namespace

extern "C" {

const char* aucoder_version(void) { return "0.1.0"; }

const char* aucoder_last_error(void) { return g_last_error.c_str(); }

const char* aucoder_status_name(aucoder_status status) {
  switch (status) {
    case AUCODER_OK: return "ok";
    case AUCODER_ERR_INVALID_ARGUMENT: return "invalid argument";
    case AUCODER_ERR_IO: return "i/o error";
    case AUCODER_ERR_PARSE: return "parse error";
    case AUCODER_ERR_DEGENERATE: return "degenerate input";
    case AUCODER_ERR_OUT_OF_RANGE: return "out of range";
    case AUCODER_ERR_MASK: return "keypoint mask mismatch";
    case AUCODER_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

aucoder_status aucoder_config_hash(const char* text, char out[17]) {
  return guarded([&] {
    require("aucoder_config_hash", text, out);
    const auto h = aucoder::pipeline::config_hash(text);
    std::memcpy(out, h.c_str(), 17);
  });
}

aucoder_status aucoder_features_preprocess(const char* manifest_path, const char* anchor_set, aucoder_features** out) {
  return guarded([&] {
    require("aucoder_features_preprocess", manifest_path, out);
    *out = nullptr;
    auto x = aucoder::pipeline::preprocess_file(manifest_path, anchor_set ? anchor_set : "");
    *out = new aucoder_features{std::move(x)};
  });
}

aucoder_status aucoder_features_load(const char* path, aucoder_features** out) {
  return guarded([&] {
    require("aucoder_features_load", path, out);
    *out = nullptr;
    *out = new aucoder_features{aucoder::store::load_features(path)};
  });
}

aucoder_status aucoder_features_save(const aucoder_features* f, const char* path, const char* run_json) {
  return guarded([&] {
    require("aucoder_features_save", f, path);
    aucoder::store::save_features(f->value, path, parse_run(run_json));
  });
}

aucoder_status aucoder_features_subsample(const aucoder_features* f, size_t count, uint64_t seed,
                                          aucoder_features** out) {
  return guarded([&] {
    require("aucoder_features_subsample", f, out);
    *out = nullptr;
    *out = new aucoder_features{
        aucoder::features::subsample_columns(f->value, static_cast<Eigen::Index>(count), seed)};
  });
}

aucoder_status aucoder_features_shape(const aucoder_features* f, size_t* rows, size_t* cols) {
  return guarded([&] {
    require("aucoder_features_shape", f, rows, cols);
    *rows = static_cast<size_t>(f->value.data.rows());
    *cols = static_cast<size_t>(f->value.data.cols());
  });
}

aucoder_status aucoder_features_copy_data(const aucoder_features* f, double* out, size_t len) {
  return guarded([&] {
    require("aucoder_features_copy_data", f, out);
    if (len != static_cast<size_t>(f->value.data.size()))
      aucoder::fail(ErrorCode::InvalidArgument, "aucoder_features_copy_data: buffer length mismatch");
    std::memcpy(out, f->value.data.data(), len * sizeof(double));
  });
}

aucoder_status aucoder_features_mask_rows(const aucoder_features* f, size_t* rows) {
  return guarded([&] {
    require("aucoder_features_mask_rows", f, rows);
    *rows = aucoder::mask_count(f->value.row_mask);
  });
}

void aucoder_features_free(aucoder_features* f) { delete f; }

aucoder_status aucoder_model_fit(const aucoder_features* train, size_t k, aucoder_model** out) {
  return guarded([&] {
    require("aucoder_model_fit", train, out);
    *out = nullptr;
    *out = new aucoder_model{aucoder::pca::fit_pca(train->value, static_cast<Eigen::Index>(k))};
  });
}

aucoder_status aucoder_model_fit_target(const aucoder_features* train, double target_ve, aucoder_model** out,
                                        double* max_achievable) {
  return guarded([&] {
    require("aucoder_model_fit_target", train, out);
    *out = nullptr;
    if (max_achievable) {
      const auto limit = std::min(static_cast<Eigen::Index>(aucoder::mask_count(train->value.row_mask)),
                                  train->value.cols());
      *max_achievable = aucoder::pca::train_ve(aucoder::pca::fit_pca(train->value, limit), train->value);
    }
    const auto sel = aucoder::pca::select_k(train->value, target_ve);
    *out = new aucoder_model{aucoder::pca::fit_pca(train->value, sel.k)};
  });
}

aucoder_status aucoder_model_load(const char* path, aucoder_model** out) {
  return guarded([&] {
    require("aucoder_model_load", path, out);
    *out = nullptr;
    *out = new aucoder_model{aucoder::store::load_model(path)};
  });
}

aucoder_status aucoder_model_save(const aucoder_model* model, const char* path, const char* run_json) {
  return guarded([&] {
    require("aucoder_model_save", model, path);
    nlohmann::json extra;
    const auto run = parse_run(run_json);
    if (!run.is_null()) extra["run"] = run;
    aucoder::store::save_model(model->value, path, extra);
  });
}

aucoder_status aucoder_model_k(const aucoder_model* model, size_t* k) {
  return guarded([&] {
    require("aucoder_model_k", model, k);
    *k = static_cast<size_t>(model->value.k());
  });
}

aucoder_status aucoder_model_copy_basis(const aucoder_model* model, double* out, size_t len) {
  return guarded([&] {
    require("aucoder_model_copy_basis", model, out);
    if (len != static_cast<size_t>(model->value.basis.size()))
      aucoder::fail(ErrorCode::InvalidArgument, "aucoder_model_copy_basis: buffer length mismatch");
    std::memcpy(out, model->value.basis.data(), len * sizeof(double));
  });
}

aucoder_status aucoder_model_ve(const aucoder_model* model, const aucoder_features* data, double* ve) {
  return guarded([&] {
    require("aucoder_model_ve", model, data, ve);
    *ve = aucoder::pca::test_ve(model->value, data->value);
  });
}

void aucoder_model_free(aucoder_model* model) { delete model; }

aucoder_status aucoder_dictionary_from_model(const aucoder_model* model, const char* id, aucoder_dictionary** out) {
  return guarded([&] {
    require("aucoder_dictionary_from_model", model, out);
    *out = nullptr;
    *out = new aucoder_dictionary{aucoder::sparse::Dictionary::from_model(model->value, id ? id : "pca")};
  });
}

aucoder_status aucoder_dictionary_load(const char* path, aucoder_dictionary** out) {
  return guarded([&] {
    require("aucoder_dictionary_load", path, out);
    *out = nullptr;
    *out = new aucoder_dictionary{aucoder::store::load_dictionary(path)};
  });
}

aucoder_status aucoder_dictionary_save(const aucoder_dictionary* dict, const char* path, const char* run_json) {
  return guarded([&] {
    require("aucoder_dictionary_save", dict, path);
    aucoder::store::save_dictionary(dict->value, path, parse_run(run_json));
  });
}

aucoder_status aucoder_dictionary_size(const aucoder_dictionary* dict, size_t* columns) {
  return guarded([&] {
    require("aucoder_dictionary_size", dict, columns);
    *columns = static_cast<size_t>(dict->value.size());
  });
}

aucoder_status aucoder_dictionary_set_id(aucoder_dictionary* dict, const char* id) {
  return guarded([&] {
    require("aucoder_dictionary_set_id", dict, id);
    dict->value.id = id;
  });
}

void aucoder_dictionary_free(aucoder_dictionary* dict) { delete dict; }

void aucoder_lars_options_init(aucoder_lars_options* o) {
  if (o == nullptr) return;
  const aucoder::sparse::LarsConfig c;
  o->max_active = static_cast<size_t>(c.max_active);
  o->ridge = c.ridge;
  o->tolerance = c.tolerance;
  o->normalize_columns = c.normalize_columns ? 1 : 0;
}

aucoder_status aucoder_encode(const aucoder_features* data, const aucoder_dictionary* dict,
                              const aucoder_lars_options* options, const char* out_path, const char* run_json,
                              double* realized_mc, double* test_ve) {
  return guarded([&] {
    require("aucoder_encode", data, dict, options);
    const auto r = aucoder::sparse::encode_matrix(data->value, dict->value, to_config(options));
    if (out_path) aucoder::store::save_code(r, out_path, parse_run(run_json));
    if (realized_mc) *realized_mc = r.realized_mc;
    if (test_ve) *test_ve = r.ve.value;
  });
}

aucoder_status aucoder_sweep_k(const aucoder_features* train, const aucoder_features* const* tests, size_t n_tests,
                               size_t k_min, size_t k_max, const char* csv_path, const char* svg_path,
                               const char* run_json) {
  return guarded([&] {
    require("aucoder_sweep_k", train, csv_path);
    if (n_tests == 0 || tests == nullptr)
      aucoder::fail(ErrorCode::InvalidArgument, "aucoder_sweep_k: at least one test set is required");
    std::vector<aucoder::features::FeatureMatrix> sets;
    for (size_t i = 0; i < n_tests; ++i) {
      require("aucoder_sweep_k", tests[i]);
      sets.push_back(tests[i]->value);
    }
    const auto run = parse_run(run_json);
    const auto table = aucoder::pipeline::sweep_k(train->value, sets, static_cast<Eigen::Index>(k_min),
                                                  static_cast<Eigen::Index>(k_max));
    aucoder::io::write_text_file(csv_path, aucoder::pipeline::sweep_k_csv(table));
    write_table_sidecar(csv_path, "aucoder.sweep_k/1",
                        {{"train", table.train_id},
                         {"tests", table.test_ids},
                         {"k_limit", table.k_limit},
                         {"columns", "k,train_ve,mean_test_ve,test_ve:<dataset>..."}},
                        run);
    if (svg_path) aucoder::io::write_text_file(svg_path, aucoder::pipeline::sweep_k_svg(table));
  });
}

aucoder_status aucoder_compare(const aucoder_features* test, const aucoder_dictionary* const* dicts, size_t n_dicts,
                               const size_t* budgets, size_t n_budgets, const aucoder_lars_options* options,
                               const char* csv_path, const char* svg_path, const char* run_json) {
  return guarded([&] {
    require("aucoder_compare", test, csv_path);
    if (n_dicts == 0 || dicts == nullptr)
      aucoder::fail(ErrorCode::InvalidArgument, "aucoder_compare: at least one dictionary is required");
    std::vector<aucoder::sparse::Dictionary> ds;
    for (size_t i = 0; i < n_dicts; ++i) {
      require("aucoder_compare", dicts[i]);
      ds.push_back(dicts[i]->value);
    }
    std::vector<Eigen::Index> b;
    for (size_t i = 0; budgets && i < n_budgets; ++i) b.push_back(static_cast<Eigen::Index>(budgets[i]));
    auto cfg = to_config(options);
    const auto run = parse_run(run_json);
    const auto curves = aucoder::pipeline::compare(test->value, ds, b, cfg);
    aucoder::io::write_text_file(csv_path, aucoder::pipeline::compare_csv(curves));
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& c : curves) ids.push_back(c.dictionary_id);
    write_table_sidecar(csv_path, "aucoder.compare/1",
                        {{"test", test->value.dataset_id},
                         {"dictionaries", ids},
                         {"ridge", cfg.ridge},
                         {"normalized_columns", cfg.normalize_columns},
                         {"budget_rule", "per-sample cap"},
                         {"columns", "dictionary,kind,budget,realized_mc,test_ve"}},
                        run);
    if (svg_path)
      aucoder::io::write_text_file(svg_path, aucoder::pipeline::compare_svg(curves, test->value.dataset_id));
  });
}

aucoder_status aucoder_render_components(const aucoder_model* model, const char* neutral_path, const size_t* indices,
                                         size_t n_indices, double scale, const char* out_dir) {
  return guarded([&] {
    require("aucoder_render_components", model, indices, out_dir);
    aucoder::KeypointArray neutral = aucoder::geometry::canonical_template();
    aucoder::KeypointMask mask = aucoder::full_keypoint_mask();
    if (neutral_path) {
      const auto pts = aucoder::io::read_keypoint_csv(neutral_path);
      const auto frame = aucoder::io::remap_to_template(pts, aucoder::io::builtin_template_map("ibug68"), "neutral",
                                                        0, neutral_path);
      neutral = frame.points;
      mask = frame.mask;
    }
    std::vector<std::string> svgs;
    for (size_t i = 0; i < n_indices; ++i)
      svgs.push_back(aucoder::pipeline::render_component(model->value, static_cast<Eigen::Index>(indices[i]), neutral,
                                                         mask, scale));
    for (size_t i = 0; i < n_indices; ++i)
      aucoder::io::write_text_file(fs::path(out_dir) / ("component_" + std::to_string(indices[i]) + ".svg"), svgs[i]);
  });
}

void aucoder_synth_options_init(aucoder_synth_options* o) {
  if (o == nullptr) return;
  const aucoder::synth::SynthOptions d;
  o->dataset_id = "synth";
  o->template_map = "ibug68";
  o->subjects = d.subjects;
  o->frames_per_subject = d.frames_per_subject;
  o->n_bases = d.n_bases;
  o->weight_scale = d.weight_scale;
  o->decay = d.decay;
  o->activation = d.activation;
  o->noise = d.noise;
  o->nuisance = d.nuisance ? 1 : 0;
  o->basis_seed = d.basis_seed;
  o->seed = d.seed;
  o->au_count = 0;
}

aucoder_status aucoder_synth(const aucoder_synth_options* o, const char* out_dir) {
  return guarded([&] {
    require("aucoder_synth", o, out_dir);
    aucoder::synth::SynthOptions s;
    if (o->dataset_id) s.dataset_id = o->dataset_id;
    if (o->template_map) s.template_map = o->template_map;
    s.subjects = o->subjects;
    s.frames_per_subject = o->frames_per_subject;
    s.n_bases = o->n_bases;
    s.weight_scale = o->weight_scale;
    s.decay = o->decay;
    s.activation = o->activation;
    s.noise = o->noise;
    s.nuisance = o->nuisance != 0;
    s.basis_seed = o->basis_seed;
    s.seed = o->seed;
    aucoder::synth::write_dataset(aucoder::synth::generate(s), out_dir);
    if (o->au_count > 0) {
      aucoder::synth::AuSetOptions a;
      a.count = o->au_count;
      a.seed = o->seed + 1;
      aucoder::synth::write_au_set(a, fs::path(out_dir) / "au");
    }
  });
}

}  // extern "C"
