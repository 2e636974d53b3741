// aucoder: batch front end over the aucoder C API.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "aucoder/aucoder.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(aucoder_status s, const std::string& what) {
  if (s != AUCODER_OK)
    throw CliError(what + ": " + aucoder_status_name(s) + ": " + aucoder_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Features = std::unique_ptr<aucoder_features, Deleter<aucoder_features, aucoder_features_free>>;
using Model = std::unique_ptr<aucoder_model, Deleter<aucoder_model, aucoder_model_free>>;
using Dictionary = std::unique_ptr<aucoder_dictionary, Deleter<aucoder_dictionary, aucoder_dictionary_free>>;

Features load_features(const std::string& path) {
  aucoder_features* f = nullptr;
  check(aucoder_features_load(path.c_str(), &f), "loading features " + path);
  return Features(f);
}

// Run metadata embedded in every artifact: the command, its configuration,
// a hash of that configuration and the seed.
std::string run_meta(const std::string& command, const json& config, std::optional<std::uint64_t> seed = {}) {
  json run;
  run["command"] = command;
  run["config"] = config;
  char hash[17];
  check(aucoder_config_hash((command + config.dump()).c_str(), hash), "hashing config");
  run["config_hash"] = hash;
  run["seed"] = seed ? json(*seed) : json(nullptr);
  run["version"] = aucoder_version();
  return run.dump();
}

// "all" | "a:b" | "a,b,c" (ranges may appear inside comma lists).
std::vector<size_t> parse_index_list(const std::string& text) {
  std::vector<size_t> out;
  if (text.empty() || text == "all") return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        const size_t lo = std::stoul(item.substr(0, colon)), hi = std::stoul(item.substr(colon + 1));
        if (hi < lo) throw CliError("descending range '" + item + "'");
        for (size_t v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw CliError("malformed index list '" + text + "'");
    }
  }
  return out;
}

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("AUCODER_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("unrecognised AUCODER_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"aucoder: data-driven facial action units from keypoint sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(aucoder_version()));

  std::string out_dir = ".";
  std::uint64_t seed = 0;

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "register frames and write displacement features");
  std::string manifest, anchors, pre_name = "features";
  size_t subsample = 0;
  pre->add_option("--manifest", manifest, "dataset manifest JSON")->required();
  pre->add_option("--anchors", anchors, "anchor set name or JSON (default: manifest's)");
  pre->add_option("--subsample", subsample, "keep this many random columns (0 keeps all)");
  pre->add_option("--seed", seed, "subsampling seed");
  pre->add_option("--name", pre_name, "artifact stem");
  pre->add_option("--out", out_dir, "output directory");

  // fit
  auto* fit = app.add_subcommand("fit", "fit the PCA basis");
  std::string fit_features, fit_name = "model";
  size_t k = 0;
  double target_ve = 0.0;
  fit->add_option("--features", fit_features, "training features")->required();
  auto* k_opt = fit->add_option("--k", k, "number of components");
  auto* t_opt = fit->add_option("--target-ve", target_ve, "smallest k reaching this Train VE (percent)");
  k_opt->excludes(t_opt);
  fit->add_option("--name", fit_name, "artifact stem");
  fit->add_option("--out", out_dir, "output directory");

  // sweep-k
  auto* sweep = app.add_subcommand("sweep-k", "Train VE and mean Test VE against k");
  std::string sweep_train;
  std::vector<std::string> sweep_tests;
  size_t k_min = 1, k_max = 136;
  sweep->add_option("--train", sweep_train, "training features")->required();
  sweep->add_option("--test", sweep_tests, "test features (repeatable)")->required();
  sweep->add_option("--k-min", k_min, "first k");
  sweep->add_option("--k-max", k_max, "last k (clamped to the rank bound)");
  sweep->add_option("--out", out_dir, "output directory");

  // encode
  auto* enc = app.add_subcommand("encode", "sparse-code features in a dictionary");
  std::string enc_features, enc_dict, enc_name = "code";
  aucoder_lars_options lars;
  aucoder_lars_options_init(&lars);
  bool normalize = false;
  enc->add_option("--features", enc_features, "features to encode")->required();
  enc->add_option("--dict", enc_dict, "model, dictionary or AU set JSON")->required();
  enc->add_option("--budget", lars.max_active, "per-sample component budget")->required();
  enc->add_option("--ridge", lars.ridge, "elastic-net ridge weight");
  enc->add_flag("--normalize", normalize, "solve with unit-norm atoms");
  enc->add_option("--name", enc_name, "artifact stem");
  enc->add_option("--out", out_dir, "output directory");

  // compare
  auto* cmp = app.add_subcommand("compare", "Test VE against mean components per dictionary");
  std::string cmp_test, budgets_text = "all";
  std::vector<std::string> cmp_dicts;
  cmp->add_option("--test", cmp_test, "test features")->required();
  cmp->add_option("--dict", cmp_dicts, "[name=]path of a model, dictionary or AU set (repeatable)")->required();
  cmp->add_option("--budgets", budgets_text, "budgets: all | a:b | a,b,c");
  cmp->add_option("--ridge", lars.ridge, "elastic-net ridge weight");
  cmp->add_flag("--normalize", normalize, "solve with unit-norm atoms");
  cmp->add_option("--out", out_dir, "output directory");

  // render
  auto* ren = app.add_subcommand("render", "draw PCA components on a neutral face");
  std::string ren_model, ren_neutral, ren_indices;
  double ren_scale = 10.0;
  ren->add_option("--model", ren_model, "model sidecar")->required();
  ren->add_option("--neutral", ren_neutral, "68-point neutral keypoint CSV (default: template face)");
  ren->add_option("--indices", ren_indices, "1-based components: all | a:b | a,b,c (default: first 8)");
  ren->add_option("--scale", ren_scale, "displacement scale factor");
  ren->add_option("--out", out_dir, "output directory");

  // synth
  auto* syn = app.add_subcommand("synth", "write a synthetic keypoint dataset with a known basis");
  aucoder_synth_options so;
  aucoder_synth_options_init(&so);
  std::string syn_id = so.dataset_id, syn_map = so.template_map;
  bool no_nuisance = false;
  syn->add_option("--dataset-id", syn_id, "dataset id");
  syn->add_option("--template-map", syn_map, "ibug68 | disfa66 | bp4d49");
  syn->add_option("--subjects", so.subjects, "subjects");
  syn->add_option("--frames", so.frames_per_subject, "frames per subject, neutral included");
  syn->add_option("--bases", so.n_bases, "true basis size");
  syn->add_option("--noise", so.noise, "noise std relative to the leading weight std");
  syn->add_option("--weight-scale", so.weight_scale, "leading weight std (standard-space units)");
  syn->add_option("--basis-seed", so.basis_seed, "seed of the true basis");
  syn->add_option("--seed", so.seed, "seed of weights, noise and nuisance transforms");
  syn->add_option("--au-count", so.au_count, "also write an AU set with this many AUs");
  syn->add_flag("--no-nuisance", no_nuisance, "skip the random head placement");
  syn->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out(out_dir);
    fs::create_directories(out);

    if (*pre) {
      json cfg{{"manifest", manifest}, {"anchors", anchors}, {"subsample", subsample}};
      aucoder_features* raw = nullptr;
      check(aucoder_features_preprocess(manifest.c_str(), anchors.empty() ? nullptr : anchors.c_str(), &raw),
            "preprocessing " + manifest);
      Features f(raw);
      if (subsample > 0) {
        aucoder_features* sub = nullptr;
        check(aucoder_features_subsample(f.get(), subsample, seed, &sub), "subsampling");
        f.reset(sub);
      }
      size_t rows = 0, cols = 0;
      check(aucoder_features_shape(f.get(), &rows, &cols), "shape");
      const auto path = (out / (pre_name + ".json")).string();
      check(aucoder_features_save(f.get(), path.c_str(), run_meta("preprocess", cfg, seed).c_str()), "saving");
      spdlog::info("wrote {} ({}x{})", path, rows, cols);
    } else if (*fit) {
      if (k == 0 && target_ve <= 0.0) throw CliError("fit needs --k or --target-ve");
      Features f = load_features(fit_features);
      aucoder_model* raw = nullptr;
      json cfg{{"features", fit_features}};
      if (k > 0) {
        cfg["k"] = k;
        check(aucoder_model_fit(f.get(), k, &raw), "fitting");
      } else {
        cfg["target_ve"] = target_ve;
        double best = 0.0;
        const auto s = aucoder_model_fit_target(f.get(), target_ve, &raw, &best);
        if (s == AUCODER_ERR_OUT_OF_RANGE)
          throw CliError("target Train VE " + std::to_string(target_ve) + " unreachable; maximum achievable is " +
                         std::to_string(best));
        check(s, "fitting");
      }
      Model m(raw);
      size_t fitted_k = 0;
      double ve = 0.0;
      check(aucoder_model_k(m.get(), &fitted_k), "model k");
      check(aucoder_model_ve(m.get(), f.get(), &ve), "train VE");
      json run = json::parse(run_meta("fit", cfg));
      run["selected_k"] = fitted_k;
      run["train_ve"] = ve;
      const auto path = (out / (fit_name + ".json")).string();
      check(aucoder_model_save(m.get(), path.c_str(), run.dump().c_str()), "saving model");
      spdlog::info("wrote {} (k={}, Train VE {:.4f})", path, fitted_k, ve);
      std::cout << "k=" << fitted_k << " train_ve=" << ve << "\n";
    } else if (*sweep) {
      Features train = load_features(sweep_train);
      std::vector<Features> tests;
      std::vector<const aucoder_features*> ptrs;
      for (const auto& t : sweep_tests) {
        tests.push_back(load_features(t));
        ptrs.push_back(tests.back().get());
      }
      json cfg{{"train", sweep_train}, {"tests", sweep_tests}, {"k_min", k_min}, {"k_max", k_max}};
      const auto csv = (out / "sweep_k.csv").string(), svg = (out / "sweep_k.svg").string();
      check(aucoder_sweep_k(train.get(), ptrs.data(), ptrs.size(), k_min, k_max, csv.c_str(), svg.c_str(),
                            run_meta("sweep-k", cfg).c_str()),
            "sweep-k");
      spdlog::info("wrote {} and {}", csv, svg);
    } else if (*enc) {
      lars.normalize_columns = normalize ? 1 : 0;
      Features f = load_features(enc_features);
      aucoder_dictionary* raw = nullptr;
      check(aucoder_dictionary_load(enc_dict.c_str(), &raw), "loading dictionary " + enc_dict);
      Dictionary d(raw);
      json cfg{{"features", enc_features}, {"dict", enc_dict}, {"budget", lars.max_active},
               {"ridge", lars.ridge}, {"normalize", normalize}};
      double mc = 0.0, ve = 0.0;
      const auto path = (out / (enc_name + ".json")).string();
      check(aucoder_encode(f.get(), d.get(), &lars, path.c_str(), run_meta("encode", cfg).c_str(), &mc, &ve),
            "encoding");
      spdlog::info("wrote {}", path);
      std::cout << "realized_mc=" << mc << " test_ve=" << ve << "\n";
    } else if (*cmp) {
      lars.normalize_columns = normalize ? 1 : 0;
      Features f = load_features(cmp_test);
      std::vector<Dictionary> dicts;
      std::vector<const aucoder_dictionary*> ptrs;
      for (const auto& spec : cmp_dicts) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        aucoder_dictionary* raw = nullptr;
        check(aucoder_dictionary_load(path.c_str(), &raw), "loading dictionary " + path);
        dicts.emplace_back(raw);
        if (eq != std::string::npos)
          check(aucoder_dictionary_set_id(raw, spec.substr(0, eq).c_str()), "naming dictionary");
        ptrs.push_back(raw);
      }
      const auto budgets = parse_index_list(budgets_text);
      json cfg{{"test", cmp_test}, {"dicts", cmp_dicts}, {"budgets", budgets_text},
               {"ridge", lars.ridge}, {"normalize", normalize}};
      const auto csv = (out / "compare.csv").string(), svg = (out / "compare.svg").string();
      check(aucoder_compare(f.get(), ptrs.data(), ptrs.size(), budgets.empty() ? nullptr : budgets.data(),
                            budgets.size(), &lars, csv.c_str(), svg.c_str(), run_meta("compare", cfg).c_str()),
            "compare");
      spdlog::info("wrote {} and {}", csv, svg);
    } else if (*ren) {
      aucoder_model* raw = nullptr;
      check(aucoder_model_load(ren_model.c_str(), &raw), "loading model " + ren_model);
      Model m(raw);
      auto indices = parse_index_list(ren_indices);
      if (indices.empty()) {
        size_t mk = 0;
        check(aucoder_model_k(m.get(), &mk), "model k");
        const size_t last = ren_indices == "all" ? mk : std::min<size_t>(mk, 8);
        for (size_t i = 1; i <= last; ++i) indices.push_back(i);
      }
      check(aucoder_render_components(m.get(), ren_neutral.empty() ? nullptr : ren_neutral.c_str(), indices.data(),
                                      indices.size(), ren_scale, out_dir.c_str()),
            "render");
      spdlog::info("wrote {} component figure(s) to {}", indices.size(), out_dir);
    } else if (*syn) {
      so.dataset_id = syn_id.c_str();
      so.template_map = syn_map.c_str();
      so.nuisance = no_nuisance ? 0 : 1;
      check(aucoder_synth(&so, out_dir.c_str()), "synth");
      spdlog::info("wrote synthetic dataset '{}' to {}", syn_id, out_dir);
    }
  } catch (const CliError& e) {
    std::cerr << "aucoder: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "aucoder: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
