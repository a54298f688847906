// udderid: command-line front end.
//
//   udderid synth    --count 75 --out data/
//   udderid extract  --manifest data/collection1.json --layout geometry --out features.csv
//   udderid evaluate --manifest data/collection1.json --algorithm all --out report.csv
//   udderid enroll   --manifest data/collection1.json --algorithm knn --out model.json
//   udderid identify --model model.json --manifest data/collection1.json
//   udderid serve    --manifest data/collection1.json --port 8080

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "udderid/annotation_server.hpp"
#include "udderid/classifiers.hpp"
#include "udderid/dataset_io.hpp"
#include "udderid/error.hpp"
#include "udderid/evaluation.hpp"
#include "udderid/random.hpp"
#include "udderid/synthetic.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace udderid;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;
constexpr int kRenderCanvas = 640;
constexpr double kRenderOffset = 120;  // places the 400 px template canvas inside the render canvas

void echo_config(const std::string& command, Json config) {
  config["command"] = command;
  std::cout << "config: " << config.dump() << '\n';
}

std::vector<Manifest> load_manifests(const std::vector<std::string>& paths) {
  std::vector<Manifest> out;
  for (const std::string& p : paths) out.push_back(load_manifest(p));
  return out;
}

FeatureLayout layout_arg(const std::string& text) {
  const auto layout = parse_layout(text);
  if (!layout) throw Error(ErrorCode::InvalidArgument, "unknown layout " + text);
  return *layout;
}

// Extracts features, printing one line per failed sample. Returns false if
// any sample failed.
bool extract_all(const std::vector<Manifest>& manifests, FeatureLayout layout, bool normalize, Dataset& out) {
  ExtractionResult result = extract_dataset(manifests, layout, normalize);
  for (const ExtractionFailure& f : result.failures) {
    std::cerr << "error: cow " << f.cow_id << " collection " << f.collection << " day " << f.day << ": "
              << f.message << '\n';
  }
  out = std::move(result.dataset);
  return result.failures.empty();
}

Dataset load_dataset(const std::vector<std::string>& manifests, const std::vector<std::string>& feature_files,
                     FeatureLayout layout, bool normalize) {
  Dataset ds;
  if (!extract_all(load_manifests(manifests), layout, normalize, ds)) {
    throw Error(ErrorCode::ExtractionError, "feature extraction failed for some samples");
  }
  for (const std::string& f : feature_files) {
    Dataset more = import_features(f);
    for (Sample& s : more.samples) {
      if (s.features.layout != layout) {
        throw Error(ErrorCode::LayoutMismatch, f + " holds " + std::string(to_string(s.features.layout)));
      }
      ds.samples.push_back(std::move(s));
    }
  }
  validate(ds);
  return ds;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {  // lo:hi or lo:hi:step
        const auto second = item.find(':', colon + 1);
        const int lo = std::stoi(item.substr(0, colon));
        const int hi = std::stoi(item.substr(colon + 1, second == std::string::npos ? std::string::npos : second - colon - 1));
        const int step = second == std::string::npos ? 1 : std::stoi(item.substr(second + 1));
        if (step < 1) throw Error(ErrorCode::InvalidArgument, "range step must be positive");
        for (int v = lo; v <= hi; v += step) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "bad group size list: " + text);
    }
  }
  return out;
}

// Default group sizes span 2..75, capped at the eligible herd size.
std::vector<int> default_group_sizes(std::size_t eligible) {
  std::vector<int> out;
  for (const int n : {2, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75}) {
    if (static_cast<std::size_t>(n) <= eligible) out.push_back(n);
  }
  if (out.empty() || (eligible < 75 && static_cast<std::size_t>(out.back()) < eligible)) {
    out.push_back(static_cast<int>(eligible));
  }
  return out;
}

Hyperparams hyperparams_from(int k, bool no_standardize) {
  Hyperparams hp;
  hp.knn_k = k;
  hp.standardize = !no_standardize;
  return hp;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::vector<std::string> manifests;
  std::string layout = "geometry-17";
  bool normalize = false;
  std::string out;
};

int cmd_extract(const ExtractArgs& a) {
  const FeatureLayout layout = layout_arg(a.layout);
  echo_config("extract", {{"manifests", a.manifests}, {"layout", to_string(layout)}, {"normalize", a.normalize},
                          {"out", a.out}});
  Dataset ds;
  const bool ok = extract_all(load_manifests(a.manifests), layout, a.normalize, ds);
  if (!ok) return 1;
  export_features(ds, layout, a.out);
  std::cout << "wrote " << ds.samples.size() << " samples to " << a.out << '\n';
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> manifests;
  std::vector<std::string> features;
  std::string algorithm = "knn";
  std::string layout = "geometry-17";
  std::string n_values;
  int trials = 50;
  std::uint64_t seed = kDefaultSeed;
  std::string mode = "consecutive-day";
  int threads = 1;
  int k = 1;
  bool normalize = false;
  bool no_standardize = false;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const FeatureLayout layout = layout_arg(a.layout);
  const auto mode = parse_protocol(a.mode);
  if (!mode) throw Error(ErrorCode::InvalidArgument, "unknown mode " + a.mode);
  std::vector<Algorithm> algorithms;
  if (a.algorithm == "all") {
    algorithms.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  } else if (const auto alg = parse_algorithm(a.algorithm)) {
    algorithms.push_back(*alg);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm " + a.algorithm);
  }

  const Dataset ds = load_dataset(a.manifests, a.features, layout, a.normalize);
  const ProtocolSplit split = split_protocol(ds, *mode);
  const std::vector<int> n_values =
      a.n_values.empty() ? default_group_sizes(eligible_cows(split).size()) : parse_int_list(a.n_values);

  CurveOptions options;
  options.trials = a.trials;
  options.master_seed = a.seed;
  options.threads = a.threads;
  options.hyperparams = hyperparams_from(a.k, a.no_standardize);

  echo_config("evaluate", {{"manifests", a.manifests},
                           {"features", a.features},
                           {"algorithm", a.algorithm},
                           {"layout", to_string(layout)},
                           {"n_values", n_values},
                           {"trials", a.trials},
                           {"seed", a.seed},
                           {"mode", to_string(*mode)},
                           {"threads", a.threads},
                           {"k", a.k},
                           {"normalize", a.normalize},
                           {"standardize", !a.no_standardize},
                           {"out", a.out}});

  EvaluationReport report;
  for (const Algorithm alg : algorithms) {
    const EvaluationReport part = accuracy_curve(split, alg, n_values, options);
    report.entries.insert(report.entries.end(), part.entries.begin(), part.entries.end());
  }
  export_report(report, a.out);
  std::cout << report_csv(report);
  return 0;
}

struct SynthArgs {
  int count = 75;
  int collections = 1;
  int shared = -1;
  NoiseModel noise;
  std::uint64_t seed = kDefaultSeed;
  bool images = false;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  const int shared = a.shared < 0 ? a.count : a.shared;
  if (shared > a.count) throw Error(ErrorCode::InvalidArgument, "--shared cannot exceed --count");
  if (a.noise.drift_factor < 1) throw Error(ErrorCode::InvalidArgument, "--drift must be >= 1");
  echo_config("synth", {{"count", a.count},
                        {"collections", a.collections},
                        {"shared", shared},
                        {"center_sigma", a.noise.center_sigma},
                        {"box_sigma", a.noise.box_sigma},
                        {"scale_sigma", a.noise.scale_sigma},
                        {"drift", a.noise.drift_factor},
                        {"seed", a.seed},
                        {"images", a.images},
                        {"out", a.out}});

  const int total = a.collections == 2 ? 2 * a.count - shared : a.count;
  const std::vector<CowTemplate> herd = generate_herd(total, a.seed);
  const fs::path root = fs::absolute(a.out).lexically_normal();
  fs::create_directories(root);

  for (int collection = 1; collection <= a.collections; ++collection) {
    std::vector<int> members;
    for (int i = 0; i < a.count; ++i) members.push_back(i);
    if (collection == 2) {
      members.resize(static_cast<std::size_t>(shared));
      for (int i = a.count; i < total; ++i) members.push_back(i);
    }

    Manifest manifest;
    manifest.collection = collection;
    for (const int i : members) {
      const CowTemplate& cow = herd[static_cast<std::size_t>(i)];
      for (int day = 1; day <= 2; ++day) {
        const std::uint64_t session_seed = derive_seed(a.seed, 0x5345u, static_cast<std::uint64_t>(i),
                                                       static_cast<std::uint64_t>(collection),
                                                       static_cast<std::uint64_t>(day));
        UdderAnnotation ann = sample_session(cow, a.noise, {collection, day}, session_seed);
        const std::string stem = ann.image_ref;
        ManifestEntry entry;
        entry.cow_id = cow.cow_id;
        entry.day = day;
        entry.annotation = root / "annotations" / (stem + ".json");
        if (a.images) {
          ann = translated(ann, kRenderOffset, kRenderOffset);
          ann.image_ref = "images/" + stem + ".png";
          entry.image = root / "images" / (stem + ".png");
          fs::create_directories(entry.image->parent_path());
          save_png(render_synthetic_image(ann, cow.texture_seed, {kRenderCanvas, kRenderCanvas}), *entry.image);
        }
        save_annotation(ann, entry.annotation);
        manifest.entries.push_back(std::move(entry));
      }
    }
    const fs::path path = root / ("collection" + std::to_string(collection) + ".json");
    save_manifest(manifest, path);
    std::cout << "wrote " << manifest.entries.size() << " entries to " << path.string() << '\n';
  }
  return 0;
}

struct ServeArgs {
  std::string manifest;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
};

AnnotationServer* g_server = nullptr;

extern "C" void handle_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& a) {
  echo_config("serve", {{"manifest", a.manifest}, {"host", a.host}, {"port", a.port}, {"ui_dir", a.ui_dir}});
  AnnotationService service(load_manifest(a.manifest));
  AnnotationServer server(service, a.ui_dir.empty() ? std::nullopt : std::optional<fs::path>(a.ui_dir));
  const int port = server.bind(a.host, a.port);
  std::cout << "serving " << service.manifest().entries.size() << " frames on http://" << a.host << ":" << port
            << "/" << std::endl;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

struct EnrollArgs {
  std::vector<std::string> manifests;
  std::string algorithm = "knn";
  std::string layout = "geometry-17";
  int day = 1;
  int k = 1;
  bool normalize = false;
  bool no_standardize = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_enroll(const EnrollArgs& a) {
  const FeatureLayout layout = layout_arg(a.layout);
  const auto alg = parse_algorithm(a.algorithm);
  if (!alg) throw Error(ErrorCode::InvalidArgument, "unknown algorithm " + a.algorithm);
  echo_config("enroll", {{"manifests", a.manifests}, {"algorithm", a.algorithm}, {"layout", to_string(layout)},
                         {"day", a.day}, {"k", a.k}, {"normalize", a.normalize},
                         {"standardize", !a.no_standardize}, {"seed", a.seed}, {"out", a.out}});
  const Dataset ds = load_dataset(a.manifests, {}, layout, a.normalize);
  std::vector<LabeledVector> gallery;
  for (const Sample& s : ds.samples) {
    if (a.day == 0 || s.day == a.day) gallery.push_back({s.features, s.cow_id});
  }
  const TrainedModel model = fit(*alg, gallery, hyperparams_from(a.k, a.no_standardize), a.seed);
  write_file_atomic(a.out, to_json(model));
  std::cout << "enrolled " << model.labels().size() << " cows from " << gallery.size() << " samples into " << a.out
            << '\n';
  return 0;
}

struct IdentifyArgs {
  std::string model;
  std::vector<std::string> manifests;
  int day = 2;
  bool normalize = false;
  std::string out;
};

int cmd_identify(const IdentifyArgs& a) {
  std::ifstream in(a.model, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, a.model);
  std::stringstream text;
  text << in.rdbuf();
  const TrainedModel model = model_from_json(text.str());
  echo_config("identify", {{"model", a.model}, {"manifests", a.manifests}, {"day", a.day},
                           {"normalize", a.normalize}, {"out", a.out}});

  const Dataset ds = load_dataset(a.manifests, {}, model.layout(), a.normalize);
  std::string csv = "cow_id,collection,day,predicted,correct\n";
  std::size_t total = 0;
  std::size_t correct = 0;
  for (const Sample& s : ds.samples) {
    if (a.day != 0 && s.day != a.day) continue;
    const std::string predicted = model.predict(s.features);
    const bool hit = predicted == s.cow_id;
    csv += s.cow_id + "," + std::to_string(s.collection) + "," + std::to_string(s.day) + "," + predicted + "," +
           (hit ? "1" : "0") + "\n";
    ++total;
    correct += hit ? 1 : 0;
  }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(a.out, csv);
  }
  std::cout << "rank-1 accuracy: " << correct << "/" << total << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NIR udder biometrics: feature extraction, identification experiments, annotation server"};
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* ex = app.add_subcommand("extract", "Extract features for every manifest entry into a CSV");
  ex->add_option("--manifest", extract.manifests, "Manifest JSON (repeatable)")->required();
  ex->add_option("--layout", extract.layout, "geometry-17 | texture-72 | combined-89")->capture_default_str();
  ex->add_flag("--normalize", extract.normalize, "Divide distances/sizes by the udder box scale");
  ex->add_option("--out", extract.out, "Output CSV")->required();

  EvaluateArgs evaluate;
  auto* ev = app.add_subcommand("evaluate", "Run randomized gallery/probe identification trials");
  ev->add_option("--manifest", evaluate.manifests, "Manifest JSON (repeatable)");
  ev->add_option("--features", evaluate.features, "Feature CSV from `extract` (repeatable)");
  ev->add_option("--algorithm", evaluate.algorithm, "knn | logreg | svm | tree | forest | all")->capture_default_str();
  ev->add_option("--layout", evaluate.layout, "geometry-17 | texture-72 | combined-89")->capture_default_str();
  ev->add_option("--n", evaluate.n_values, "Group sizes, e.g. 2,5,10 or 2:20:2 (default 2..75)");
  ev->add_option("--trials", evaluate.trials, "Trials per group size")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--seed", evaluate.seed, "Master seed")->capture_default_str();
  ev->add_option("--mode", evaluate.mode, "consecutive-day | cross-collection")->capture_default_str();
  ev->add_option("--threads", evaluate.threads, "Worker threads for trials")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--k", evaluate.k, "Neighbors for knn")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_flag("--normalize", evaluate.normalize, "Scale-normalize geometric features");
  ev->add_flag("--no-standardize", evaluate.no_standardize, "Skip per-dimension standardization");
  ev->add_option("--out", evaluate.out, "Report CSV")->required();

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Write a synthetic herd: manifests, annotations, optional images");
  sy->add_option("--count", synth.count, "Cows per collection")->capture_default_str()->check(CLI::PositiveNumber);
  sy->add_option("--collections", synth.collections, "1 or 2")->capture_default_str()->check(CLI::Range(1, 2));
  sy->add_option("--shared", synth.shared, "Cows present in both collections (default: all)");
  sy->add_option("--center-sigma", synth.noise.center_sigma, "Teat center jitter, px")->capture_default_str();
  sy->add_option("--box-sigma", synth.noise.box_sigma, "Relative box jitter")->capture_default_str();
  sy->add_option("--scale-sigma", synth.noise.scale_sigma, "Relative global scale jitter")->capture_default_str();
  sy->add_option("--drift", synth.noise.drift_factor, "Collection-2 drift factor (>= 1)")->capture_default_str();
  sy->add_option("--seed", synth.seed, "Master seed")->capture_default_str();
  sy->add_flag("--images", synth.images, "Render synthetic frames");
  sy->add_option("--out", synth.out, "Output directory")->required();

  ServeArgs serve;
  auto* se = app.add_subcommand("serve", "Serve the annotation API and UI for a manifest");
  se->add_option("--manifest", serve.manifest, "Manifest JSON")->required();
  se->add_option("--host", serve.host, "Bind address")->capture_default_str();
  se->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str();
  se->add_option("--ui-dir", serve.ui_dir, "Directory holding the built annotation UI");

  EnrollArgs enroll;
  auto* en = app.add_subcommand("enroll", "Fit a classifier on gallery samples and save it as JSON");
  en->add_option("--manifest", enroll.manifests, "Manifest JSON (repeatable)")->required();
  en->add_option("--algorithm", enroll.algorithm, "knn | logreg | svm | tree | forest")->capture_default_str();
  en->add_option("--layout", enroll.layout, "geometry-17 | texture-72 | combined-89")->capture_default_str();
  en->add_option("--day", enroll.day, "Day to enroll (0 = all)")->capture_default_str()->check(CLI::Range(0, 2));
  en->add_option("--k", enroll.k, "Neighbors for knn")->capture_default_str()->check(CLI::PositiveNumber);
  en->add_flag("--normalize", enroll.normalize, "Scale-normalize geometric features");
  en->add_flag("--no-standardize", enroll.no_standardize, "Skip per-dimension standardization");
  en->add_option("--seed", enroll.seed, "Training seed")->capture_default_str();
  en->add_option("--out", enroll.out, "Model JSON")->required();

  IdentifyArgs identify;
  auto* id = app.add_subcommand("identify", "Rank-1 identification of manifest samples against a saved model");
  id->add_option("--model", identify.model, "Model JSON from `enroll`")->required();
  id->add_option("--manifest", identify.manifests, "Manifest JSON (repeatable)")->required();
  id->add_option("--day", identify.day, "Day to identify (0 = all)")->capture_default_str()->check(CLI::Range(0, 2));
  id->add_flag("--normalize", identify.normalize, "Scale-normalize geometric features");
  id->add_option("--out", identify.out, "Prediction CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ex) return cmd_extract(extract);
    if (*ev) {
      if (evaluate.manifests.empty() && evaluate.features.empty()) {
        std::cerr << "evaluate: give at least one --manifest or --features\n";
        return 2;
      }
      return cmd_evaluate(evaluate);
    }
    if (*sy) return cmd_synth(synth);
    if (*se) return cmd_serve(serve);
    if (*en) return cmd_enroll(enroll);
    if (*id) return cmd_identify(identify);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
