#include "aof/attack.hpp"
#include "aof/dataset.hpp"
#include "aof/defense.hpp"
#include "aof/error.hpp"
#include "aof/eval.hpp"
#include "aof/model_io.hpp"
#include "aof/off_mesh.hpp"
#include "aof/parallel.hpp"
#include "aof/report.hpp"
#include "aof/spectral.hpp"
#include "aof/train.hpp"
#include "aof/xyz_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace aof;

namespace {

constexpr int kModuleFailure = 1;
constexpr int kConfigFailure = 2;

// Bad flag values detected after parsing.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& flag) {
  std::string out = "AOF_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option("--" + name, value, help)->envname(env_name(name))->capture_default_str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid " + what + " '" + text + "'");
}

long parse_long(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid " + what + " '" + text + "'");
}

// State shared by every command; becomes the run manifest.
struct Run {
  std::string command;
  CLI::App* app = nullptr;
  fs::path manifest;
  std::vector<std::pair<std::string, std::string>> results;
  int warnings = 0;
  int threads = default_threads();

  void result(const std::string& key, const std::string& value) { results.emplace_back(key, value); }
  void result(const std::string& key, const std::optional<double>& value) {
    results.emplace_back(key, value ? format_real(*value) : std::string("undefined"));
  }
};

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const Run& run, int exit_code, const std::string& error, double seconds, const std::string& started) {
  if (run.manifest.empty()) return;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", run.command);
  kv.emplace_back("tool_version", AOF_VERSION);
  kv.emplace_back("status", exit_code == 0 ? "ok" : "error");
  kv.emplace_back("exit_code", std::to_string(exit_code));
  if (!error.empty()) kv.emplace_back("error", error);
  for (const CLI::Option* opt : run.app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    kv.emplace_back("config." + name, value);
  }
  for (const auto& r : run.results) kv.emplace_back("result." + r.first, r.second);
  kv.emplace_back("warnings", std::to_string(run.warnings));
  kv.emplace_back("started_utc", started);
  kv.emplace_back("wall_seconds", format_real(seconds));
  std::error_code ec;
  if (run.manifest.has_parent_path()) fs::create_directories(run.manifest.parent_path(), ec);
  try {
    write_key_values(run.manifest, kv);
  } catch (const std::exception& e) {
    std::cerr << "warning: could not write run manifest: " << e.what() << '\n';
  }
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<PointCloud> select_split(const LabeledDataset& ds, const std::string& split) {
  if (split == "all") return ds.clouds;
  if (split != "train" && split != "test") throw ConfigError("--split must be train, test or all");
  return ds.subset(parse_split(split)).clouds;
}

std::vector<Split> select_split_tags(const LabeledDataset& ds, const std::string& split) {
  if (split == "all") return ds.splits;
  return std::vector<Split>(ds.subset(parse_split(split)).size(), parse_split(split));
}

std::string cloud_file_name(const PointCloud& c, std::size_t i) {
  return c.name.empty() ? "cloud_" + std::to_string(i) : c.name;
}

// Writes clouds under `dir/sub/` plus `dir/manifest.csv` and `dir/classes.txt`.
void write_cloud_set(const fs::path& dir, const std::string& sub, const std::string& suffix,
                     const std::vector<PointCloud>& clouds, const std::vector<Split>& splits,
                     const std::vector<std::string>& class_names) {
  make_dir(dir / sub);
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
  manifest << "path,label,split\n";
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const std::string rel = sub + "/" + cloud_file_name(clouds[i], i) + suffix + ".xyz";
    save_xyz(clouds[i], dir / rel);
    manifest << rel << ',' << (clouds[i].label ? std::to_string(*clouds[i].label) : std::string()) << ','
             << to_string(splits[i]) << '\n';
  }
  std::ofstream classes(dir / "classes.txt", std::ios::binary);
  for (const auto& n : class_names) classes << n << '\n';
  if (!manifest || !classes) throw IoError("failed writing manifest in " + dir.string());
}

// ---------------------------------------------------------------- attack flags

struct AttackFlags {
  AttackConfig cfg;
  std::string variant = "aof";
  std::string mode = "untargeted";
  double bandwidth = 0.0;

  void add(CLI::App* app) {
    flag(app, "variant", variant, "aof or baseline");
    flag(app, "m", cfg.m, "number of low-frequency eigenvectors");
    flag(app, "gamma", cfg.gamma, "weight of the low-frequency loss term");
    flag(app, "kappa", cfg.kappa, "margin of the C&W loss");
    flag(app, "eps-inf", cfg.eps_inf, "l_inf perturbation budget");
    flag(app, "iters", cfg.n_iter, "iterations per initialization");
    flag(app, "inits", cfg.inits, "number of initializations");
    flag(app, "lr", cfg.learning_rate, "Adam step size");
    flag(app, "k", cfg.k, "kNN graph degree");
    flag(app, "bandwidth", bandwidth, "Gaussian kernel eps (0 = mean kNN distance)");
    flag(app, "mode", mode, "untargeted or targeted:<class>");
  }

  AttackConfig resolve() const {
    AttackConfig out = cfg;
    if (variant == "aof") out.variant = AttackVariant::Aof;
    else if (variant == "baseline") out.variant = AttackVariant::BaselineFullSpectrum;
    else throw ConfigError("--variant must be aof or baseline");
    if (mode.rfind("targeted:", 0) == 0) {
      out.mode.target = static_cast<int>(parse_long(mode.substr(9), "target class"));
    } else if (mode != "untargeted") {
      throw ConfigError("--mode must be untargeted or targeted:<class>");
    }
    if (bandwidth < 0.0) throw ConfigError("--bandwidth must be non-negative");
    if (bandwidth > 0.0) out.bandwidth = bandwidth;
    try {
      out.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    return out;
  }
};

void print_attack_config(const AttackConfig& c) {
  std::cout << "attack config:\n"
            << "  variant = " << (c.variant == AttackVariant::Aof ? "aof" : "baseline") << '\n'
            << "  eta = " << c.learning_rate << '\n'
            << "  iterations = " << c.n_iter << '\n'
            << "  initializations = " << c.inits << '\n'
            << "  kappa = " << c.kappa << '\n'
            << "  gamma = " << c.gamma << '\n'
            << "  m = " << c.m << '\n'
            << "  k = " << c.k << '\n'
            << "  eps_inf = " << c.eps_inf << '\n'
            << "  mode = " << (c.mode.target ? "targeted:" + std::to_string(*c.mode.target) : "untargeted") << '\n';
}

std::vector<Classifier> load_models(const std::string& list, std::vector<std::string>* names) {
  std::vector<Classifier> models;
  for (const auto& path : split_list(list)) {
    models.push_back(load_model(path));
    if (names) names->push_back(fs::path(path).stem().string());
  }
  if (models.empty()) throw ConfigError("--models needs at least one model file");
  return models;
}

// ---------------------------------------------------------------- commands

struct Command {
  CLI::App* app;
  std::string name;
  std::function<int(Run&)> run;
};

struct DatasetGen {
  int classes = 5, per_class = 100;
  Eigen::Index points = kDefaultPoints;
  std::uint64_t seed = 0;
  std::string out;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("gen", "generate the synthetic shape dataset");
    flag(app, "classes", classes, "number of shape classes (1-5)");
    flag(app, "per-class", per_class, "instances per class");
    flag(app, "points", points, "points per cloud");
    flag(app, "seed", seed, "random seed");
    flag(app, "out", out, "output directory")->required();
    return {app, "dataset gen", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              if (classes < 1 || classes > 5) throw ConfigError("--classes must lie in [1, 5]");
              if (per_class < 1) throw ConfigError("--per-class must be positive");
              if (points < 8) throw ConfigError("--points must be at least 8");
              const LabeledDataset ds = generate_shape_dataset(per_class, points, seed, classes);
              write_dataset(ds, out);
              run.result("clouds", std::to_string(ds.size()));
              std::cout << "wrote " << ds.size() << " clouds to " << out << '\n';
              return 0;
            }};
  }
};

struct DatasetImport {
  std::string in, out;
  Eigen::Index points = kDefaultPoints;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("import-off", "sample OFF meshes laid out as <in>/<class>/[train|test]/*.off");
    flag(app, "in", in, "mesh root directory")->required();
    flag(app, "points", points, "points per cloud");
    flag(app, "seed", seed, "sampling seed");
    flag(app, "train-fraction", train_fraction, "train share when a class has no train/test folders");
    flag(app, "out", out, "output directory")->required();
    return {app, "dataset import-off", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              if (points < 1) throw ConfigError("--points must be positive");
              if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("--train-fraction must lie in (0, 1]");
              if (!fs::is_directory(in)) throw IoError("not a directory: " + in);

              auto off_files = [](const fs::path& dir) {
                std::vector<fs::path> files;
                if (!fs::is_directory(dir)) return files;
                for (const auto& e : fs::directory_iterator(dir))
                  if (e.is_regular_file() && e.path().extension() == ".off") files.push_back(e.path());
                std::sort(files.begin(), files.end());
                return files;
              };
              std::vector<fs::path> class_dirs;
              for (const auto& e : fs::directory_iterator(in))
                if (e.is_directory()) class_dirs.push_back(e.path());
              std::sort(class_dirs.begin(), class_dirs.end());

              LabeledDataset ds;
              std::uint64_t index = 0;
              for (const auto& dir : class_dirs) {
                std::vector<std::pair<fs::path, Split>> items;
                const auto train = off_files(dir / "train"), test = off_files(dir / "test");
                if (!train.empty() || !test.empty()) {
                  for (const auto& f : train) items.emplace_back(f, Split::Train);
                  for (const auto& f : test) items.emplace_back(f, Split::Test);
                } else {
                  const auto files = off_files(dir);
                  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(files.size())));
                  for (std::size_t i = 0; i < files.size(); ++i)
                    items.emplace_back(files[i], i < std::max<std::size_t>(n_train, 1) ? Split::Train : Split::Test);
                }
                if (items.empty()) continue;
                const int label = ds.num_classes();
                ds.class_names.push_back(dir.filename().string());
                for (const auto& [file, split] : items) {
                  PointCloud c = load_off_and_sample(file, points, derive_seed(seed, index++));
                  c.label = label;
                  ds.clouds.push_back(std::move(c));
                  ds.splits.push_back(split);
                }
              }
              if (ds.size() == 0) throw IoError("no .off meshes found under " + in);
              write_dataset(ds, out);
              run.result("clouds", std::to_string(ds.size()));
              run.result("classes", std::to_string(ds.num_classes()));
              std::cout << "imported " << ds.size() << " meshes in " << ds.num_classes() << " classes\n";
              return 0;
            }};
  }
};

struct Train {
  std::string data, dims = "64,128,64", out;
  TrainConfig cfg;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("train", "train a point cloud classifier");
    flag(app, "data", data, "dataset manifest.csv")->required();
    flag(app, "dims", dims, "hidden widths h1,h2,h3");
    flag(app, "epochs", cfg.epochs, "training epochs");
    flag(app, "lr", cfg.learning_rate, "Adam learning rate");
    flag(app, "batch-size", cfg.batch_size, "mini-batch size");
    flag(app, "weight-decay", cfg.weight_decay, "L2 penalty on weights");
    flag(app, "seed", cfg.seed, "initialization and shuffling seed");
    flag(app, "out", out, "output model file")->required();
    return {app, "train", [this](Run& run) {
              run.manifest = fs::path(out + ".manifest.txt");
              const auto parts = split_list(dims);
              if (parts.size() != 3) throw ConfigError("--dims needs three comma-separated widths");
              if (cfg.epochs < 1) throw ConfigError("--epochs must be at least 1");
              if (!(cfg.learning_rate > 0.0)) throw ConfigError("--lr must be positive");
              if (cfg.batch_size < 1) throw ConfigError("--batch-size must be at least 1");
              const LabeledDataset ds = read_manifest(data);
              ModelDims d;
              d.h1 = static_cast<int>(parse_long(parts[0], "width"));
              d.h2 = static_cast<int>(parse_long(parts[1], "width"));
              d.h3 = static_cast<int>(parse_long(parts[2], "width"));
              d.classes = ds.num_classes();
              if (d.h1 < 1 || d.h2 < 1 || d.h3 < 1) throw ConfigError("--dims widths must be positive");
              const TrainResult r = train(ds, cfg, d, [](int epoch, double loss) {
                std::cout << "epoch " << epoch << " loss " << loss << '\n';
              });
              if (fs::path(out).has_parent_path()) make_dir(fs::path(out).parent_path());
              save_model(r.model, out);
              std::cout << "train_accuracy=" << r.report.train_accuracy << " test_accuracy=" << r.report.test_accuracy
                        << '\n';
              run.result("train_accuracy", format_real(r.report.train_accuracy));
              run.result("test_accuracy", format_real(r.report.test_accuracy));
              return 0;
            }};
  }
};

struct Attack {
  std::string model, data, split = "test", out;
  std::uint64_t seed = 0;
  bool print_config = false;
  AttackFlags attack;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("attack", "craft adversarial clouds against a model");
    flag(app, "model", model, "victim model file");
    flag(app, "data", data, "dataset manifest.csv");
    flag(app, "split", split, "train, test or all");
    attack.add(app);
    flag(app, "seed", seed, "attack seed");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory");
    app->add_flag("--print-config", print_config, "print the resolved attack configuration and exit");
    return {app, "attack", [this](Run& run) {
              if (!out.empty()) run.manifest = fs::path(out) / "run_manifest.txt";
              const AttackConfig cfg = attack.resolve();
              print_attack_config(cfg);
              if (print_config) return 0;
              if (model.empty() || data.empty() || out.empty())
                throw ConfigError("--model, --data and --out are required");
              const Classifier victim = load_model(model);
              const LabeledDataset ds = read_manifest(data);
              const auto clouds = select_split(ds, split);
              const auto tags = select_split_tags(ds, split);
              if (cfg.mode.target && *cfg.mode.target >= victim.dims().classes)
                throw ConfigError("target class exceeds the model's class count");

              const auto batch = attack_batch(victim, clouds, cfg, seed, run.threads);
              const auto adv = adversarial_clouds(batch, clouds);
              make_dir(out);
              write_attack_csv(fs::path(out) / "results.csv", clouds, batch);
              write_cloud_set(out, "adv", "_adv", adv, tags, ds.class_names);
              for (const auto& item : batch) {
                if (item.result) continue;
                ++run.warnings;
                std::cerr << "warning: " << item.error << '\n';
              }
              const EvalReport wb = asr(victim, clouds, adv, run.threads);
              write_eval_csv(fs::path(out) / "eval.csv", wb);
              run.result("clouds", std::to_string(clouds.size()));
              run.result("white_box_asr", wb.asr);
              std::cout << "attacked " << clouds.size() << " clouds, white-box ASR "
                        << (wb.asr ? format_real(*wb.asr) : "undefined") << '\n';
              if (run.warnings) std::cerr << run.warnings << " clouds failed\n";
              return 0;
            }};
  }
};

struct Defend {
  std::string data, split = "all", out;
  DefenseConfig cfg;
  std::uint64_t seed = 0;

  Command install(CLI::App* parent, DefenseKind kind) {
    const bool is_srs = kind == DefenseKind::Srs;
    auto* app = parent->add_subcommand(is_srs ? "srs" : "sor", is_srs ? "simple random sampling" : "statistical outlier removal");
    flag(app, "data", data, "dataset manifest.csv")->required();
    flag(app, "split", split, "train, test or all");
    if (is_srs) {
      flag(app, "keep", cfg.srs_keep, "points kept (0 = half)");
      flag(app, "seed", seed, "sampling seed");
    } else {
      flag(app, "k", cfg.sor_k, "neighbors in the distance statistic");
      flag(app, "alpha", cfg.sor_alpha, "standard deviation multiplier");
    }
    flag(app, "out", out, "output directory")->required();
    return {app, is_srs ? "defend srs" : "defend sor", [this, kind](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              if (cfg.srs_keep < 0) throw ConfigError("--keep must be non-negative");
              if (cfg.sor_k < 1) throw ConfigError("--k must be at least 1");
              if (!(cfg.sor_alpha >= 0.0)) throw ConfigError("--alpha must be non-negative");
              const LabeledDataset ds = read_manifest(data);
              const auto clouds = select_split(ds, split);
              std::vector<PointCloud> defended;
              std::ostringstream sizes;
              sizes << "cloud_name,input_points,output_points\n";
              for (std::size_t i = 0; i < clouds.size(); ++i) {
                const auto& c = clouds[i];
                const Eigen::Index keep = cfg.srs_keep > 0 ? cfg.srs_keep : (c.size() + 1) / 2;
                defended.push_back(kind == DefenseKind::Srs ? srs(c, keep, derive_seed(seed, i))
                                                            : sor(c, cfg.sor_k, cfg.sor_alpha));
                sizes << c.name << ',' << c.size() << ',' << defended.back().size() << '\n';
              }
              make_dir(out);
              write_cloud_set(out, "clouds", "", defended, select_split_tags(ds, split), ds.class_names);
              std::ofstream(fs::path(out) / "sizes.csv", std::ios::binary) << sizes.str();
              run.result("clouds", std::to_string(clouds.size()));
              std::cout << "defended " << clouds.size() << " clouds\n";
              return 0;
            }};
  }
};

struct EvalAsr {
  std::string model, clean, adv, split = "test", out;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("asr", "attack success rate of adversarial clouds");
    flag(app, "model", model, "evaluation model")->required();
    flag(app, "clean", clean, "clean dataset manifest")->required();
    flag(app, "adv", adv, "adversarial manifest, same order as the clean split")->required();
    flag(app, "split", split, "train, test or all");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval asr", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              const Classifier m = load_model(model);
              const auto c = select_split(read_manifest(clean), split);
              const auto a = select_split(read_manifest(adv), split);
              const EvalReport r = asr(m, c, a, run.threads);
              make_dir(out);
              write_eval_csv(fs::path(out) / "eval.csv", r);
              run.result("asr", r.asr);
              std::cout << "ASR " << (r.asr ? format_real(*r.asr) : "undefined") << " (" << r.fooled << "/"
                        << r.attacked << ")\n";
              return 0;
            }};
  }
};

struct EvalTransfer {
  std::string models, data, split = "test", out;
  std::uint64_t seed = 0;
  AttackFlags attack;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("transfer", "transfer ASR matrix over a set of models");
    flag(app, "models", models, "comma-separated model files")->required();
    flag(app, "data", data, "dataset manifest.csv")->required();
    flag(app, "split", split, "train, test or all");
    attack.add(app);
    flag(app, "seed", seed, "attack seed");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval transfer", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              const AttackConfig cfg = attack.resolve();
              std::vector<std::string> names;
              const auto ms = load_models(models, &names);
              const auto clouds = select_split(read_manifest(data), split);
              const TransferMatrix tm = transfer_matrix(ms, clouds, cfg, seed, run.threads);
              make_dir(out);
              write_transfer_csv(fs::path(out) / "transfer.csv", tm, names);
              for (std::size_t i = 0; i < names.size(); ++i)
                for (std::size_t j = 0; j < names.size(); ++j)
                  run.result("asr." + names[i] + "." + names[j], tm.reports[i][j].asr);
              std::cout << "wrote " << (fs::path(out) / "transfer.csv").string() << '\n';
              return 0;
            }};
  }
};

struct EvalDefense {
  std::string model, clean, adv, split = "test", defense = "sor", out;
  DefenseConfig cfg;
  std::uint64_t seed = 0;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("defense", "ASR after a preprocessing defense");
    flag(app, "model", model, "evaluation model")->required();
    flag(app, "clean", clean, "clean dataset manifest")->required();
    flag(app, "adv", adv, "adversarial manifest")->required();
    flag(app, "split", split, "train, test or all");
    flag(app, "defense", defense, "srs or sor");
    flag(app, "keep", cfg.srs_keep, "SRS points kept (0 = half)");
    flag(app, "sor-k", cfg.sor_k, "SOR neighbors");
    flag(app, "alpha", cfg.sor_alpha, "SOR standard deviation multiplier");
    flag(app, "seed", seed, "SRS seed");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval defense", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              DefenseKind kind;
              if (defense == "srs") kind = DefenseKind::Srs;
              else if (defense == "sor") kind = DefenseKind::Sor;
              else throw ConfigError("--defense must be srs or sor");
              if (cfg.srs_keep < 0 || cfg.sor_k < 1 || !(cfg.sor_alpha >= 0.0)) throw ConfigError("invalid defense parameters");
              const Classifier m = load_model(model);
              const auto c = select_split(read_manifest(clean), split);
              const auto a = select_split(read_manifest(adv), split);
              const EvalReport r = defense_eval(m, c, a, kind, cfg, seed, run.threads);
              make_dir(out);
              write_eval_csv(fs::path(out) / "eval.csv", r);
              run.result("asr", r.asr);
              std::cout << defense << " ASR " << (r.asr ? format_real(*r.asr) : "undefined") << '\n';
              return 0;
            }};
  }
};

struct EvalLfcSweep {
  std::string model, data, split = "test", ms = "0.2,0.4,0.78,1.0", out;
  int k = 10;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("lfc-sweep", "accuracy on low-frequency components");
    flag(app, "model", model, "model file")->required();
    flag(app, "data", data, "dataset manifest.csv")->required();
    flag(app, "split", split, "train, test or all");
    flag(app, "ms", ms, "comma-separated m values; entries with a '.' are fractions of N");
    flag(app, "k", k, "kNN graph degree");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval lfc-sweep", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              const Classifier m = load_model(model);
              const auto clouds = select_split(read_manifest(data), split);
              if (clouds.empty()) throw InvalidArgument("no clouds in the selected split");
              const Eigen::Index n = clouds.front().size();
              std::vector<Eigen::Index> values;
              for (const auto& item : split_list(ms)) {
                if (item.find('.') != std::string::npos) {
                  values.push_back(static_cast<Eigen::Index>(std::ceil(parse_double(item, "m fraction") * static_cast<double>(n) - 1e-9)));
                } else {
                  values.push_back(parse_long(item, "m"));
                }
              }
              if (values.empty()) throw ConfigError("--ms needs at least one value");
              const LfcSweep sweep = lfc_accuracy_sweep(m, clouds, values, k, run.threads);
              make_dir(out);
              write_lfc_sweep_csv(fs::path(out) / "lfc_sweep.csv", sweep);
              for (std::size_t j = 0; j < sweep.ms.size(); ++j)
                run.result("accuracy.m" + std::to_string(sweep.ms[j]), format_real(sweep.accuracy[j]));
              run.result("accuracy.original", format_real(sweep.original_accuracy));
              std::cout << "original accuracy " << sweep.original_accuracy << '\n';
              return 0;
            }};
  }
};

struct EvalAblation {
  std::string param = "m", values, models, data, split = "test", out;
  std::uint64_t seed = 0;
  AttackFlags attack;

  Command install(CLI::App* parent, Run& shared) {
    auto* app = parent->add_subcommand("ablation", "sweep one attack parameter");
    flag(app, "param", param, "m, gamma or eps-inf");
    flag(app, "values", values, "comma-separated values")->required();
    flag(app, "models", models, "victim first, then transfer models")->required();
    flag(app, "data", data, "dataset manifest.csv")->required();
    flag(app, "split", split, "train, test or all");
    attack.add(app);
    flag(app, "seed", seed, "attack seed");
    flag(app, "threads", shared.threads, "worker threads");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval ablation", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              AblationParameter p;
              if (param == "m") p = AblationParameter::M;
              else if (param == "gamma") p = AblationParameter::Gamma;
              else if (param == "eps-inf") p = AblationParameter::EpsInf;
              else throw ConfigError("--param must be m, gamma or eps-inf");
              const AttackConfig cfg = attack.resolve();
              std::vector<double> vs;
              for (const auto& v : split_list(values)) {
                AttackConfig probe = cfg;
                const double x = parse_double(v, "value");
                if (p == AblationParameter::M) probe.m = static_cast<Eigen::Index>(std::llround(x));
                if (p == AblationParameter::Gamma) probe.gamma = x;
                if (p == AblationParameter::EpsInf) probe.eps_inf = x;
                try {
                  probe.validate();
                } catch (const InvalidArgument& e) {
                  throw ConfigError(std::string("--values: ") + e.what());
                }
                vs.push_back(x);
              }
              if (vs.empty()) throw ConfigError("--values needs at least one value");
              const auto ms = load_models(models, nullptr);
              const auto clouds = select_split(read_manifest(data), split);
              const auto rows = ablation_sweep(p, vs, cfg, ms, clouds, seed, run.threads);
              make_dir(out);
              write_ablation_csv(fs::path(out) / "ablation.csv", param, rows);
              for (const auto& r : rows) {
                run.result("white_box_asr." + format_real(r.value), r.white_box_asr);
                run.result("mean_transfer_asr." + format_real(r.value), r.mean_transfer_asr);
              }
              std::cout << "wrote " << rows.size() << " rows\n";
              return 0;
            }};
  }
};

struct EvalCdf {
  std::string clean, adv, split = "test", out;
  int k = 10;
  double bandwidth = 0.0;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("cdf", "cumulative spectral energy of perturbations");
    flag(app, "clean", clean, "clean dataset manifest")->required();
    flag(app, "adv", adv, "adversarial manifest")->required();
    flag(app, "split", split, "train, test or all");
    flag(app, "k", k, "kNN graph degree");
    flag(app, "bandwidth", bandwidth, "Gaussian kernel eps (0 = mean kNN distance)");
    flag(app, "out", out, "output directory")->required();
    return {app, "eval cdf", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              const auto c = select_split(read_manifest(clean), split);
              const auto a = select_split(read_manifest(adv), split);
              if (c.size() != a.size()) throw ShapeError("clean and adversarial sets differ in size");
              std::optional<double> bw;
              if (bandwidth > 0.0) bw = bandwidth;
              std::vector<Points> deltas;
              std::vector<SpectralBasis> bases;
              for (std::size_t i = 0; i < c.size(); ++i) {
                if (c[i].size() != a[i].size()) throw ShapeError("cloud " + c[i].name + " changed size");
                deltas.push_back(a[i].points() - c[i].points());
                bases.push_back(spectral_basis(c[i].points(), k, bw));
              }
              const SpectralCdf cdf = spectral_cdf(deltas, bases);
              make_dir(out);
              write_cdf_csv(fs::path(out) / "cdf.csv", cdf);
              run.result("used", std::to_string(cdf.used));
              run.result("skipped", std::to_string(cdf.skipped));
              std::cout << "spectral CDF over " << cdf.used << " perturbations (" << cdf.skipped << " zero)\n";
              return 0;
            }};
  }
};

struct SpectralSplitCmd {
  std::string in, out;
  Eigen::Index m = 100;
  int k = 10;
  double bandwidth = 0.0;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("split", "split one cloud into low and high frequency parts");
    flag(app, "in", in, "input .xyz file")->required();
    flag(app, "m", m, "number of low-frequency eigenvectors");
    flag(app, "k", k, "kNN graph degree");
    flag(app, "bandwidth", bandwidth, "Gaussian kernel eps (0 = mean kNN distance)");
    flag(app, "out", out, "output directory")->required();
    return {app, "spectral split", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              if (k < 1) throw ConfigError("--k must be at least 1");
              if (m < 0) throw ConfigError("--m must be non-negative");
              const PointCloud c = load_xyz(in);
              std::optional<double> bw;
              if (bandwidth > 0.0) bw = bandwidth;
              const FrequencySplit s = lfc_split(c, std::min<Eigen::Index>(m, c.size()), k, bw);
              if (m > c.size()) {
                ++run.warnings;
                std::cerr << "warning: m clamped to N=" << c.size() << '\n';
              }
              make_dir(out);
              save_xyz(s.lfc, fs::path(out) / "lfc.xyz");
              save_xyz(s.hfc, fs::path(out) / "hfc.xyz");
              run.result("points", std::to_string(c.size()));
              std::cout << "wrote lfc.xyz and hfc.xyz\n";
              return 0;
            }};
  }
};

struct SpectralBasisCmd {
  std::string in, out;
  int k = 10;
  double bandwidth = 0.0;

  Command install(CLI::App* parent) {
    auto* app = parent->add_subcommand("basis", "dump the Laplacian eigenbasis of one cloud");
    flag(app, "in", in, "input .xyz file")->required();
    flag(app, "k", k, "kNN graph degree");
    flag(app, "bandwidth", bandwidth, "Gaussian kernel eps (0 = mean kNN distance)");
    flag(app, "out", out, "output directory")->required();
    return {app, "spectral basis", [this](Run& run) {
              run.manifest = fs::path(out) / "run_manifest.txt";
              if (k < 1) throw ConfigError("--k must be at least 1");
              const PointCloud c = load_xyz(in);
              std::optional<double> bw;
              if (bandwidth > 0.0) bw = bandwidth;
              const SpectralBasis b = spectral_basis(c.points(), k, bw);
              make_dir(out);
              save_basis(b, fs::path(out) / "basis.bin");
              std::ostringstream s;
              s << "index,eigenvalue\n";
              for (Eigen::Index i = 0; i < b.size(); ++i) s << i << ',' << format_real(b.eigenvalues()(i)) << '\n';
              std::ofstream(fs::path(out) / "eigenvalues.csv", std::ios::binary) << s.str();
              std::cout << "wrote basis of size " << b.size() << '\n';
              return 0;
            }};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain adversarial attacks on point clouds"};
  app.set_version_flag("--version", AOF_VERSION);
  app.require_subcommand(1);

  Run run;
  std::vector<Command> commands;

  auto* dataset = app.add_subcommand("dataset", "create datasets")->require_subcommand(1);
  DatasetGen gen;
  DatasetImport import_off;
  commands.push_back(gen.install(dataset));
  commands.push_back(import_off.install(dataset));

  Train train_cmd;
  commands.push_back(train_cmd.install(&app));
  Attack attack_cmd;
  commands.push_back(attack_cmd.install(&app, run));

  auto* defend = app.add_subcommand("defend", "apply a preprocessing defense")->require_subcommand(1);
  Defend srs_cmd, sor_cmd;
  commands.push_back(srs_cmd.install(defend, DefenseKind::Srs));
  commands.push_back(sor_cmd.install(defend, DefenseKind::Sor));

  auto* eval = app.add_subcommand("eval", "evaluation metrics")->require_subcommand(1);
  EvalAsr eval_asr;
  EvalTransfer eval_transfer;
  EvalDefense eval_defense;
  EvalLfcSweep eval_lfc;
  EvalAblation eval_ablation;
  EvalCdf eval_cdf;
  commands.push_back(eval_asr.install(eval, run));
  commands.push_back(eval_transfer.install(eval, run));
  commands.push_back(eval_defense.install(eval, run));
  commands.push_back(eval_lfc.install(eval, run));
  commands.push_back(eval_ablation.install(eval, run));
  commands.push_back(eval_cdf.install(eval));

  auto* spectral = app.add_subcommand("spectral", "graph spectral tools")->require_subcommand(1);
  SpectralSplitCmd split_cmd;
  SpectralBasisCmd basis_cmd;
  commands.push_back(split_cmd.install(spectral));
  commands.push_back(basis_cmd.install(spectral));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  for (auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    run.command = cmd.name;
    run.app = cmd.app;
    const std::string started = now_utc();
    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    std::string error;
    try {
      if (run.threads < 1) throw ConfigError("--threads must be at least 1");
      code = cmd.run(run);
    } catch (const ConfigError& e) {
      error = e.what();
      code = kConfigFailure;
    } catch (const std::exception& e) {
      error = e.what();
      code = kModuleFailure;
    }
    if (!error.empty()) std::cerr << "error: " << error << '\n';
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(run, code, error, seconds, started);
    return code;
  }
  return kConfigFailure;
}
