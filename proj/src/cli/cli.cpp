#include "vizsim/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "vizsim/baselines.hpp"
#include "vizsim/checksum.hpp"
#include "vizsim/distance_matrix.hpp"
#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"
#include "vizsim/metric.hpp"
#include "vizsim/nn/fixtures.hpp"
#include "vizsim/nn/model.hpp"
#include "vizsim/stimuli.hpp"

namespace vizsim::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Flags shared by every command that turns images into distances.
struct BackendOptions {
  std::string backend = "alexnet";
  std::string weights;
  std::string scaling = "ones";
  std::string space = "srgb";
  std::size_t size = 64;
  std::vector<std::size_t> layers;
  std::optional<std::size_t> exclude_layer;
  std::size_t ms_ssim_scales = 5;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void add_backend_options(CLI::App* cmd, BackendOptions& o) {
  cmd->add_option("--backend", o.backend, "alexnet|squeezenet|vgg16|resnet18|resnet50|mse|ssim|ms-ssim")
      ->capture_default_str();
  cmd->add_option("--weights", o.weights, "Weight archive directory, or 'random' (seeded by --seed)");
  cmd->add_option("--scaling", o.scaling, "Scaling archive directory, or 'ones'")->capture_default_str();
  cmd->add_option("--space", o.space, "Color space for the mse backend: srgb|lab")->capture_default_str();
  cmd->add_option("--size", o.size, "Model input size")->check(CLI::IsMember({64, 224}))->capture_default_str();
  cmd->add_option("--layers", o.layers, "Extraction layers to sum (0-based, comma separated)")->delimiter(',');
  cmd->add_option("--exclude-layer", o.exclude_layer, "Drop one extraction layer (0-based)");
  cmd->add_option("--ms-ssim-scales", o.ms_ssim_scales, "MS-SSIM scale count")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for random weights and resampling")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

unsigned thread_count(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// A resolved backend. Holds the archives the metric backend points into.
struct Resolved {
  std::optional<nn::Arch> arch;
  baselines::BaselineKind baseline = baselines::BaselineKind::mse_srgb;
  baselines::MsSsimConfig ms_ssim;
  nn::TensorArchive weights;
  metric::Backend backend;
  std::vector<std::size_t> layers;
  ojson config;

  bool deep() const { return arch.has_value(); }
};

std::vector<std::size_t> resolve_layer_selection(const BackendOptions& o, std::size_t layer_count) {
  if (!o.layers.empty() && o.exclude_layer) throw ValidationError("--layers and --exclude-layer are exclusive");
  if (o.exclude_layer) {
    if (*o.exclude_layer >= layer_count) {
      throw ValidationError(fmt::format("--exclude-layer {} out of range [0, {})", *o.exclude_layer, layer_count));
    }
    if (layer_count < 2) throw ValidationError("cannot exclude the only extraction layer");
    std::vector<std::size_t> keep;
    for (std::size_t l = 0; l < layer_count; ++l) {
      if (l != *o.exclude_layer) keep.push_back(l);
    }
    return keep;
  }
  metric::DistanceConfig cfg;
  if (!o.layers.empty()) cfg.layers = o.layers;
  return cfg.resolve_layers(layer_count);
}

ojson archive_echo(const std::string& given, const fs::path& dir) {
  return ojson{{"path", given}, {"sha256", nn::archive_checksum(dir)}};
}

nn::TensorArchive load_weights(const BackendOptions& o, const nn::ArchitectureSpec& spec, ojson& echo) {
  if (o.weights.empty()) throw ValidationError("deep backends need --weights (archive directory or 'random')");
  if (o.weights == "random") {
    echo = ojson{{"source", "random"}, {"seed", o.seed}};
    return nn::random_init(spec, o.seed);
  }
  const fs::path dir = nn::resolve_archive_path(o.weights);
  auto archive = nn::load_archive(dir);
  if (archive.metadata().architecture != nn::arch_name(spec.arch)) {
    throw ValidationError(fmt::format("archive {} holds '{}' weights, backend is '{}'", dir.string(),
                                      archive.metadata().architecture, nn::arch_name(spec.arch)));
  }
  echo = archive_echo(o.weights, dir);
  echo["weight_set"] = nn::weight_set_name(archive.metadata().weight_set);
  return archive;
}

std::unique_ptr<Resolved> resolve_backend(const BackendOptions& o) {
  auto r = std::make_unique<Resolved>();
  r->config["backend"] = o.backend;
  r->config["size"] = o.size;
  r->config["seed"] = o.seed;
  if (o.backend == "mse" || o.backend == "ssim" || o.backend == "ms-ssim") {
    if (!o.layers.empty() || o.exclude_layer) throw ValidationError("layer selection needs a deep backend");
    if (o.backend == "mse") {
      if (o.space == "srgb") {
        r->baseline = baselines::BaselineKind::mse_srgb;
      } else if (o.space == "lab") {
        r->baseline = baselines::BaselineKind::mse_lab;
      } else {
        throw ValidationError(fmt::format("unknown --space '{}' (srgb|lab)", o.space));
      }
      r->config["space"] = o.space;
    } else if (o.backend == "ssim") {
      r->baseline = baselines::BaselineKind::ssim;
      r->config["distance"] = "1 - similarity";
    } else {
      r->config["distance"] = "1 - similarity";
      r->baseline = baselines::BaselineKind::ms_ssim;
      r->ms_ssim = baselines::MsSsimConfig::with_scales(o.ms_ssim_scales);
      r->config["ms_ssim_scales"] = o.ms_ssim_scales;
    }
    return r;
  }
  const auto arch = nn::parse_arch(o.backend);
  if (!arch) {
    throw ValidationError(
        fmt::format("unknown backend '{}' (alexnet|squeezenet|vgg16|resnet18|resnet50|mse|ssim|ms-ssim)", o.backend));
  }
  r->arch = arch;
  const auto& spec = nn::architecture_spec(*arch);
  ojson weights_echo;
  r->weights = load_weights(o, spec, weights_echo);
  r->config["weights"] = weights_echo;
  r->backend.spec = &spec;
  r->backend.weights = &r->weights;
  if (o.scaling == "ones") {
    r->backend.scaling = metric::ScalingWeights::ones_for(spec);
    r->config["scaling"] = "ones";
  } else {
    const fs::path dir = nn::resolve_archive_path(o.scaling);
    r->backend.scaling = metric::ScalingWeights::from_archive(nn::load_archive(dir), spec);
    r->config["scaling"] = archive_echo(o.scaling, dir);
  }
  r->backend.preprocess.target_size = o.size;
  r->layers = resolve_layer_selection(o, spec.extraction_layer_count);
  r->backend.distance.layers = r->layers;
  r->config["layers"] = r->layers;
  return r;
}

std::vector<ImageStimulus> resized_all(const std::vector<ImageStimulus>& images, std::size_t size) {
  std::vector<ImageStimulus> out;
  for (const auto& img : images) {
    auto r = resize(img, size);
    r.id = img.id;
    out.push_back(std::move(r));
  }
  return out;
}

DistanceMatrix compute_matrix(const Resolved& r, const std::vector<ImageStimulus>& images, std::size_t size,
                              unsigned threads) {
  if (r.deep()) return metric::pairwise_matrix(images, r.backend, threads);
  return baselines::pairwise_matrix(resized_all(images, size), r.baseline, r.ms_ssim, threads);
}

// Images in a directory, sorted by file name; ids are file stems.
std::vector<ImageStimulus> load_image_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(fmt::format("{} is not a directory", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = lower(entry.path().extension().string());
    if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw ValidationError(fmt::format("{} holds {} images; need at least 2", dir.string(), files.size()));

  std::vector<ImageStimulus> images;
  std::vector<std::string> failures;
  std::set<std::string> seen;
  for (const auto& f : files) {
    const auto id = f.stem().string();
    if (!seen.insert(id).second) failures.push_back(fmt::format("{}: duplicate id '{}'", f.string(), id));
    try {
      auto img = load_image(f);
      img.id = id;
      images.push_back(std::move(img));
    } catch (const Error& e) {
      failures.push_back(e.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = fmt::format("{} of {} images failed to load:", failures.size(), files.size());
    for (const auto& f : failures) msg += "\n  " + f;
    throw ValidationError(msg);
  }
  return images;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson value(double v) { return ojson{{"value", v}}; }

ojson ci_json(const eval::ConfidenceInterval& ci) { return ojson{{"lo", ci.lo}, {"mean", ci.mean}, {"hi", ci.hi}}; }

ojson scores_json(const eval::ClusteringScores& s) {
  return ojson{{"rand_index", value(s.rand_index)},
               {"adjusted_rand", value(s.adjusted_rand)},
               {"nmi", value(s.nmi)},
               {"ami", value(s.ami)}};
}

eval::WardVariant parse_linkage(const std::string& name) {
  if (name == "ward.D2") return eval::WardVariant::d2;
  if (name == "ward.D") return eval::WardVariant::d1;
  throw ValidationError(fmt::format("unknown --linkage '{}' (ward.D2|ward.D)", name));
}

eval::ClusterLabels cluster_matrix(const DistanceMatrix& m, std::size_t k, eval::WardVariant variant) {
  return eval::cut_k(eval::hac_ward(m, variant), k);
}

// Reference labels from human groupings (JSON) or an existing label file (CSV).
eval::ClusterLabels reference_labels(const std::string& path, std::size_t k, eval::WardVariant variant,
                                     ojson& echo) {
  echo = ojson{{"path", path}, {"sha256", sha256_file(path)}};
  if (lower(fs::path(path).extension().string()) == ".csv") return eval::read_labels_csv(path);
  return cluster_matrix(eval::consensus_matrix(eval::read_groupings(path)), k, variant);
}

struct KernelInput {
  DistanceMatrix matrix;
  ojson echo;
};

KernelInput load_kernel(const std::string& path) {
  auto k = eval::read_kernel_csv(path);
  return {std::move(k.matrix), ojson{{"path", path}, {"sha256", sha256_file(path)}}};
}

// Spearman after normalizing the model matrix; null when undefined.
ojson kernel_rho(const DistanceMatrix& model, DistanceMatrix kernel, bool by_position, bool& undefined) {
  if (by_position) {
    if (kernel.size() != model.size()) {
      throw ValidationError(fmt::format("matrix is {}x{}, kernel is {}x{}", model.size(), model.size(),
                                        kernel.size(), kernel.size()));
    }
    kernel.ids = model.ids;
  }
  try {
    return value(eval::spearman_rho(eval::normalize01(model), eval::normalize01(kernel)));
  } catch (const DomainError& e) {
    undefined = true;
    return ojson{{"value", nullptr}, {"error", e.what()}};
  }
}

std::vector<std::string> extraction_names(const nn::ArchitectureSpec& spec) {
  std::vector<std::string> names;
  for (const auto& layer : spec.features) {
    if (layer.is_extraction_point) names.push_back(layer.name);
  }
  return names;
}

// ---------------------------------------------------------------------------

struct DistArgs {
  BackendOptions backend;
  std::string a, b, out;
};

int cmd_dist(const DistArgs& args, std::ostream& out) {
  const auto r = resolve_backend(args.backend);
  auto a = load_image(args.a);
  auto b = load_image(args.b);
  double d = 0.0;
  if (r->deep()) {
    const auto fa = metric::normalized_features(a, r->backend);
    const auto fb = metric::normalized_features(b, r->backend);
    d = metric::perceptual_distance(fa, fb, r->backend.scaling, r->backend.distance);
  } else {
    a.id = "a";
    b.id = "b";
    d = baselines::pairwise_matrix(resized_all({a, b}, args.backend.size), r->baseline, r->ms_ssim, 1)(0, 1);
  }
  out << format_double(d) << "\n";
  if (!args.out.empty()) {
    ojson j{{"distance", value(d)},
            {"config", r->config},
            {"images", ojson::array({ojson{{"path", args.a}, {"sha256", sha256_file(args.a)}},
                                     ojson{{"path", args.b}, {"sha256", sha256_file(args.b)}}})}};
    j["config"]["command"] = "dist";
    write_text_file(args.out, dump(j));
  }
  return kOk;
}

struct MatrixArgs {
  BackendOptions backend;
  std::string dir, out;
};

int cmd_matrix(const MatrixArgs& args) {
  const auto r = resolve_backend(args.backend);
  const auto images = load_image_dir(args.dir);
  const auto m = compute_matrix(*r, images, args.backend.size, thread_count(args.backend.threads));
  const auto csv = to_csv(m);
  write_text_file(args.out, csv);
  ojson meta{{"command", "matrix"}, {"config", r->config}, {"images", m.size()}, {"csv_sha256", sha256_hex(csv)}};
  write_text_file(args.out + ".json", dump(meta));
  return kOk;
}

struct ClusterArgs {
  std::string matrix, out, linkage = "ward.D2";
  std::size_t k = 20;
};

int cmd_cluster(const ClusterArgs& args, std::ostream& out) {
  const auto labels = cluster_matrix(read_matrix_csv(args.matrix), args.k, parse_linkage(args.linkage));
  emit(eval::labels_to_csv(labels), args.out, out);
  return kOk;
}

struct EvalClustArgs {
  std::string labels, reference, out, linkage = "ward.D2", mi_norm = "arithmetic";
  std::size_t k = 20;
};

int cmd_evalclust(const EvalClustArgs& args, std::ostream& out) {
  const auto norm = eval::parse_mi_normalization(args.mi_norm);
  const auto predicted = eval::read_labels_csv(args.labels);
  ojson ref_echo;
  const auto reference = reference_labels(args.reference, args.k, parse_linkage(args.linkage), ref_echo);
  ojson j = scores_json(eval::score_clustering(predicted, reference, norm));
  j["config"] = ojson{{"command", "evalclust"},
                      {"labels", ojson{{"path", args.labels}, {"sha256", sha256_file(args.labels)}}},
                      {"reference", ref_echo},
                      {"k", args.k},
                      {"linkage", args.linkage},
                      {"mi_normalization", eval::mi_normalization_name(norm)}};
  emit(dump(j), args.out, out);
  return kOk;
}

struct KernelEvalArgs {
  std::string matrix, kernel, out;
  bool by_position = false;
};

int cmd_kernel_eval(const KernelEvalArgs& args, std::ostream& out) {
  const auto m = read_matrix_csv(args.matrix);
  auto kernel = load_kernel(args.kernel);
  bool undefined = false;
  ojson j{{"spearman", kernel_rho(m, std::move(kernel.matrix), args.by_position, undefined)}};
  j["config"] = ojson{{"command", "kernel-eval"},
                      {"matrix", ojson{{"path", args.matrix}, {"sha256", sha256_file(args.matrix)}}},
                      {"kernel", kernel.echo},
                      {"by_position", args.by_position},
                      {"normalization", "min-max off-diagonal"}};
  emit(dump(j), args.out, out);
  return undefined ? kDomain : kOk;
}

struct AblateArgs {
  BackendOptions backend;
  std::string mode, dir, reference, kernel, out, linkage = "ward.D2", mi_norm = "arithmetic";
  std::size_t k = 20;
  std::size_t trials = 10;
  std::size_t bootstrap = 1000;
  double level = 0.95;
  bool by_position = false;
};

// Scores one model matrix against the ablation target.
struct AblationTarget {
  std::optional<eval::ClusterLabels> reference;
  std::optional<DistanceMatrix> kernel;
  std::size_t k = 20;
  eval::WardVariant variant = eval::WardVariant::d2;
  eval::MiNormalization norm = eval::MiNormalization::arithmetic;
  bool by_position = false;
  bool undefined = false;

  ojson score(const DistanceMatrix& m) {
    if (reference) return scores_json(eval::score_clustering(cluster_matrix(m, k, variant), *reference, norm));
    return ojson{{"spearman", kernel_rho(m, *kernel, by_position, undefined)}};
  }
};

int cmd_ablate(const AblateArgs& args, std::ostream& out) {
  if (args.reference.empty() == args.kernel.empty()) throw ValidationError("ablate needs exactly one of --reference or --kernel");
  if (args.mode != "per-layer" && args.mode != "loo" && args.mode != "random") {
    throw ValidationError(fmt::format("unknown --mode '{}' (per-layer|loo|random)", args.mode));
  }
  BackendOptions opts = args.backend;
  if (args.mode == "random") opts.weights = "random";
  if (!opts.layers.empty() || opts.exclude_layer) throw ValidationError("ablate selects layers itself");
  const auto r = resolve_backend(opts);
  if (!r->deep()) throw ValidationError("ablation needs a deep backend");
  const unsigned threads = thread_count(args.backend.threads);

  AblationTarget target;
  target.k = args.k;
  target.variant = parse_linkage(args.linkage);
  target.norm = eval::parse_mi_normalization(args.mi_norm);
  target.by_position = args.by_position;
  ojson config = r->config;
  config["command"] = "ablate";
  config["mode"] = args.mode;
  if (!args.reference.empty()) {
    ojson echo;
    target.reference = reference_labels(args.reference, args.k, target.variant, echo);
    config["reference"] = echo;
    config["k"] = args.k;
    config["linkage"] = args.linkage;
    config["mi_normalization"] = eval::mi_normalization_name(target.norm);
  } else {
    auto kernel = load_kernel(args.kernel);
    target.kernel = std::move(kernel.matrix);
    config["kernel"] = kernel.echo;
    config["by_position"] = args.by_position;
  }

  const auto images = load_image_dir(args.dir);
  std::vector<std::string> ids;
  for (const auto& img : images) ids.push_back(img.id);
  const auto& spec = *r->backend.spec;
  const auto names = extraction_names(spec);
  ojson report{{"config", config}};

  if (args.mode == "per-layer" || args.mode == "loo") {
    const auto stacks = metric::normalized_features(images, r->backend, threads);
    const auto terms = metric::pairwise_layer_terms(stacks, r->backend.scaling, threads);
    ojson rows = ojson::array();
    for (std::size_t l = 0; l < names.size(); ++l) {
      std::vector<std::size_t> layers;
      for (std::size_t t = 0; t < names.size(); ++t) {
        if (args.mode == "per-layer" ? t == l : t != l) layers.push_back(t);
      }
      ojson row{{"layer", l}, {"name", names[l]}};
      row.update(target.score(metric::matrix_from_layer_terms(ids, terms, layers)));
      rows.push_back(std::move(row));
    }
    report["rows"] = std::move(rows);
  } else {
    if (args.trials < 2) throw ValidationError("random ablation needs at least 2 trials");
    report["config"]["trials"] = args.trials;
    report["config"]["bootstrap"] = args.bootstrap;
    report["config"]["level"] = args.level;
    report["config"]["trial_seeds"] = fmt::format("seed + t for t in [0, {})", args.trials);
    ojson trials = ojson::array();
    std::vector<std::string> measures;
    std::vector<std::vector<double>> values;
    for (std::size_t t = 0; t < args.trials; ++t) {
      const std::uint64_t seed = args.backend.seed + t;
      const auto weights = nn::random_init(spec, seed);
      metric::Backend backend = r->backend;
      backend.weights = &weights;
      ojson row{{"trial", t}, {"seed", seed}};
      const ojson scores = target.score(metric::pairwise_matrix(images, backend, threads));
      row.update(scores);
      if (measures.empty()) {
        for (const auto& [name, _] : scores.items()) measures.push_back(name);
        values.resize(measures.size());
      }
      for (std::size_t m = 0; m < measures.size(); ++m) {
        const auto& v = scores.at(measures[m]).at("value");
        if (!v.is_null()) values[m].push_back(v.get<double>());
      }
      trials.push_back(std::move(row));
    }
    report["trials"] = std::move(trials);
    std::mt19937_64 rng(args.backend.seed);
    ojson summary;
    for (std::size_t m = 0; m < measures.size(); ++m) {
      summary[measures[m]] = values[m].empty() ? ojson(nullptr)
                                               : ci_json(eval::bootstrap_ci(values[m], args.bootstrap, args.level, rng));
    }
    report["summary"] = std::move(summary);
  }
  emit(dump(report), args.out, out);
  return target.undefined ? kDomain : kOk;
}

struct StimuliArgs {
  std::string channel, out, palette;
};

int cmd_stimuli(const StimuliArgs& args, std::ostream& out) {
  const fs::path palette = args.palette.empty() ? stimuli::default_palette_file() : fs::path(args.palette);
  const auto data = stimuli::read_palette_data(palette);
  std::vector<stimuli::Channel> channels;
  if (args.channel == "all") {
    channels = {stimuli::Channel::color, stimuli::Channel::shape, stimuli::Channel::size,
                stimuli::Channel::size_color};
  } else {
    channels = {stimuli::parse_channel(args.channel)};
  }
  for (auto c : channels) {
    const auto written = stimuli::write_palette(stimuli::palette_spec(c, data), args.out);
    out << fmt::format("{}: {} images\n", stimuli::channel_name(c), written.size());
  }
  return kOk;
}

struct InitRandomArgs {
  std::string arch, out;
  std::uint64_t seed = 0;
};

int cmd_init_random(const InitRandomArgs& args) {
  const auto arch = nn::parse_arch(args.arch);
  if (!arch) throw ValidationError(fmt::format("unknown architecture '{}'", args.arch));
  nn::save_archive(nn::random_init(nn::architecture_spec(*arch), args.seed), args.out);
  return kOk;
}

struct ClassifyArgs {
  BackendOptions backend;
  std::string image, fixtures, out;
};

int cmd_classify(const ClassifyArgs& args, std::ostream& out) {
  const auto r = resolve_backend(args.backend);
  if (!r->deep()) throw ValidationError("classify needs a deep backend");
  const auto& spec = *r->backend.spec;
  if (!args.fixtures.empty()) {
    const auto report = nn::run_fixtures(nn::read_fixtures(args.fixtures), spec, r->weights);
    ojson rows = ojson::array();
    for (const auto& res : report.results) {
      ojson row{{"image_path", res.image_path.generic_string()}, {"expected_top1", res.expected_top1}, {"top1", res.top1}};
      if (res.max_abs_error) row["max_abs_error"] = *res.max_abs_error;
      if (res.hash_match) row["hash_match"] = *res.hash_match;
      rows.push_back(std::move(row));
    }
    ojson j{{"agreement", value(static_cast<double>(report.agreeing) / static_cast<double>(report.results.size()))},
            {"max_abs_error", value(report.max_abs_error)},
            {"passed", report.passed()},
            {"results", rows},
            {"config", r->config}};
    emit(dump(j), args.out, out);
    return report.passed() ? kOk : kDomain;
  }
  if (args.image.empty()) throw ValidationError("classify needs an image or --fixtures");
  PreprocessConfig cfg;
  cfg.target_size = args.backend.size;
  out << nn::classify_sanity(to_model_input(load_image(args.image), cfg), spec, r->weights) << "\n";
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return kInvalidInput;
    case ErrorKind::domain: return kDomain;
    case ErrorKind::io: return kIo;
  }
  return kInternal;
}

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::io: return "io";
  }
  return "internal";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perceptual distances between visualization images"};
  app.name("vizsim");
  app.require_subcommand(1);

  DistArgs dist;
  auto* c_dist = app.add_subcommand("dist", "Distance between two images");
  c_dist->add_option("image_a", dist.a)->required();
  c_dist->add_option("image_b", dist.b)->required();
  c_dist->add_option("--out", dist.out, "JSON sidecar path");
  add_backend_options(c_dist, dist.backend);

  MatrixArgs matrix;
  auto* c_matrix = app.add_subcommand("matrix", "Pairwise distance matrix over a directory of images");
  c_matrix->add_option("dir", matrix.dir)->required();
  c_matrix->add_option("--out", matrix.out, "CSV path; metadata goes to <out>.json")->required();
  add_backend_options(c_matrix, matrix.backend);

  ClusterArgs cluster;
  auto* c_cluster = app.add_subcommand("cluster", "Ward clustering of a distance matrix");
  c_cluster->add_option("matrix", cluster.matrix)->required();
  c_cluster->add_option("--k", cluster.k, "Cluster count")->capture_default_str();
  c_cluster->add_option("--linkage", cluster.linkage, "ward.D2|ward.D")->capture_default_str();
  c_cluster->add_option("--out", cluster.out, "Labels CSV path (stdout when omitted)");

  EvalClustArgs evalclust;
  auto* c_eval = app.add_subcommand("evalclust", "Agreement between cluster labels and a reference");
  c_eval->add_option("labels", evalclust.labels)->required();
  c_eval->add_option("--reference", evalclust.reference, "Groupings JSON or labels CSV")->required();
  c_eval->add_option("--k", evalclust.k, "Reference cluster count")->capture_default_str();
  c_eval->add_option("--linkage", evalclust.linkage, "ward.D2|ward.D")->capture_default_str();
  c_eval->add_option("--mi-norm", evalclust.mi_norm, "arithmetic|max|min|geometric")->capture_default_str();
  c_eval->add_option("--out", evalclust.out, "Results JSON path (stdout when omitted)");

  KernelEvalArgs kernel_eval;
  auto* c_kernel = app.add_subcommand("kernel-eval", "Spearman correlation against a perceptual kernel");
  c_kernel->add_option("matrix", kernel_eval.matrix)->required();
  c_kernel->add_option("kernel", kernel_eval.kernel)->required();
  c_kernel->add_flag("--by-position", kernel_eval.by_position, "Match kernel rows to matrix rows by order");
  c_kernel->add_option("--out", kernel_eval.out, "Results JSON path (stdout when omitted)");

  AblateArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate", "Layer and random-weight ablations");
  c_ablate->add_option("dir", ablate.dir)->required();
  c_ablate->add_option("--mode", ablate.mode, "per-layer|loo|random")->required();
  c_ablate->add_option("--reference", ablate.reference, "Groupings JSON or labels CSV");
  c_ablate->add_option("--kernel", ablate.kernel, "Perceptual kernel CSV");
  c_ablate->add_flag("--by-position", ablate.by_position, "Match kernel rows to images by order");
  c_ablate->add_option("--k", ablate.k, "Cluster count")->capture_default_str();
  c_ablate->add_option("--linkage", ablate.linkage, "ward.D2|ward.D")->capture_default_str();
  c_ablate->add_option("--mi-norm", ablate.mi_norm, "arithmetic|max|min|geometric")->capture_default_str();
  c_ablate->add_option("--trials", ablate.trials, "Random-weight trials")->capture_default_str();
  c_ablate->add_option("--bootstrap", ablate.bootstrap, "Bootstrap resamples")->capture_default_str();
  c_ablate->add_option("--level", ablate.level, "Confidence level")->capture_default_str();
  c_ablate->add_option("--out", ablate.out, "Report JSON path (stdout when omitted)");
  add_backend_options(c_ablate, ablate.backend);

  StimuliArgs stim;
  auto* c_stim = app.add_subcommand("stimuli", "Render palette stimuli as PNGs");
  c_stim->add_option("--channel", stim.channel, "color|shape|size|size-color|all")->required();
  c_stim->add_option("--out", stim.out, "Output directory")->required();
  c_stim->add_option("--palette", stim.palette, "Palette data file");

  InitRandomArgs init;
  auto* c_init = app.add_subcommand("init-random", "Write a randomly initialized weight archive");
  c_init->add_option("--arch", init.arch)->required();
  c_init->add_option("--seed", init.seed)->capture_default_str();
  c_init->add_option("--out", init.out, "Archive directory")->required();

  ClassifyArgs classify;
  classify.backend.size = 224;
  auto* c_classify = app.add_subcommand("classify", "Top-1 class of an image, or a fixture sanity run");
  c_classify->add_option("image", classify.image);
  c_classify->add_option("--fixtures", classify.fixtures, "Fixtures JSON");
  c_classify->add_option("--out", classify.out, "Report JSON path (stdout when omitted)");
  add_backend_options(c_classify, classify.backend);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "vizsim: error[invalid_input]: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (*c_dist) return cmd_dist(dist, out);
    if (*c_matrix) return cmd_matrix(matrix);
    if (*c_cluster) return cmd_cluster(cluster, out);
    if (*c_eval) return cmd_evalclust(evalclust, out);
    if (*c_kernel) return cmd_kernel_eval(kernel_eval, out);
    if (*c_ablate) return cmd_ablate(ablate, out);
    if (*c_stim) return cmd_stimuli(stim, out);
    if (*c_init) return cmd_init_random(init);
    if (*c_classify) return cmd_classify(classify, out);
  } catch (const Error& e) {
    err << "vizsim: error[" << kind_name(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "vizsim: error[io]: " << e.what() << "\n";
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    err << "vizsim: error[invalid_input]: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "vizsim: error[internal]: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace vizsim::cli
