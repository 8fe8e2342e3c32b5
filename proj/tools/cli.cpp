// Copyright 2026 The strfkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "strfkit/bank_io.hpp"
#include "strfkit/error.hpp"
#include "strfkit/learner.hpp"
#include "strfkit/melfront.hpp"
#include "strfkit/modanalysis.hpp"
#include "strfkit/parallel.hpp"
#include "strfkit/strfconv.hpp"
#include "strfkit/taskdist.hpp"
#include "strfkit/tasks.hpp"
#include "strfkit/wav.hpp"
#include "svg.hpp"

namespace strfkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config checks on flag values are usage errors, not runtime ones.
template <typename F>
void check_usage(F&& f) {
  try {
    f();
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IOError(path.string(), "cannot open for writing");
  os << text;
  if (!os) throw IOError(path.string(), "write failed");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError(dir.string(), ec.message());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string brief(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json mel_config_json(const MelConfig& m) {
  return {{"n_mels", m.n_mels},           {"f_min", m.f_min},
          {"f_max", m.f_max},             {"window_length", m.window_length},
          {"hop_length", m.hop_length},   {"fft_size", m.fft_size},
          {"log_floor", m.log_floor}};
}

json params_json(const GaborParams& p) {
  return {{"sigma_t", p.sigma_t}, {"sigma_f", p.sigma_f}, {"F", p.F}, {"gamma", p.gamma}};
}

json point_json(const ModulationPoint& m) {
  return {{"omega_hz", m.omega}, {"Omega_cpo", m.Omega}, {"sigma_t_s", m.sigma_t_s}, {"sigma_f_oct", m.sigma_f_oct}};
}

json interval_json(const Interval& iv) {
  return {{"estimate", iv.estimate}, {"ci_low", iv.low}, {"ci_high", iv.high}, {"n_valid", iv.n_valid}};
}

void add_mel_flags(CLI::App* sub, MelConfig& mel) {
  sub->add_option("--n-mels", mel.n_mels, "mel channels")->capture_default_str();
  sub->add_option("--f-min", mel.f_min, "lowest mel edge (Hz)")->capture_default_str();
  sub->add_option("--f-max", mel.f_max, "highest mel edge (Hz)")->capture_default_str();
  sub->add_option("--window", mel.window_length, "analysis window (s)")->capture_default_str();
  sub->add_option("--hop", mel.hop_length, "hop (s)")->capture_default_str();
}

ConversionRates rates_for(const MelConfig& mel) {
  return {.frame_rate = 1.0 / mel.hop_length, .channels_per_octave = channels_per_octave(mel)};
}

// ---- spectrogram ----

struct SpectrogramArgs {
  std::string input;
  std::string out;
  std::string format = "binary";
  MelConfig mel;
};

int cmd_spectrogram(const SpectrogramArgs& a, std::ostream& out) {
  check_usage([&] { a.mel.validate(16000); });
  const Waveform w = read_wav(a.input);
  const MelSpectrogram mel = mel_spectrogram(w, a.mel);
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw IOError(a.out, "cannot open for writing");
  if (a.format == "csv")
    write_mel_csv(os, mel);
  else
    write_mel_binary(os, mel);
  os.close();
  if (!os) throw IOError(a.out, "write failed");

  Manifest m{.command = "spectrogram",
             .config = {{"format", a.format}, {"mel", mel_config_json(a.mel)}, {"sample_rate", w.sample_rate}},
             .inputs = {a.input},
             .outputs = {a.out}};
  write_json(a.out + ".manifest.json", m.to_json());
  out << a.out << ": " << mel.n_frames() << " frames x " << mel.n_mels() << " mels\n";
  return kExitOk;
}

// ---- apply ----

struct ApplyArgs {
  std::string mel_path;
  std::string bank_path;
  std::string out;
  std::string mode = "concat";
  std::string path = "auto";
  int csv_filter = -1;
};

int cmd_apply(const ApplyArgs& a, std::ostream& out) {
  const auto mode = parse_output_mode(a.mode);
  if (!mode) throw UsageError("--mode must be one of real, imag, magnitude, concat");
  const ConvPath path = a.path == "direct" ? ConvPath::kDirect : a.path == "fft" ? ConvPath::kFft : ConvPath::kAuto;

  std::ifstream is(a.mel_path, std::ios::binary);
  if (!is) throw IOError(a.mel_path, "cannot open spectrogram");
  MelSpectrogram mel;
  try {
    mel = read_mel_binary(is);
  } catch (const InvalidInput& e) {
    throw IOError(a.mel_path, e.what());
  }
  const FilterBank bank = read_bank(a.bank_path);
  const FeatureMap z = apply_bank(mel, bank.filters, bank.grid, path);
  const RealTensor x = project(z, *mode);
  if (a.csv_filter >= static_cast<int>(x.n_filters))
    throw UsageError("--csv-filter exceeds the bank size " + std::to_string(x.n_filters));

  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw IOError(a.out, "cannot open for writing");
  if (a.csv_filter >= 0)
    write_feature_csv(os, x, a.csv_filter);
  else
    write_feature_binary(os, x, *mode);
  os.close();
  if (!os) throw IOError(a.out, "write failed");

  json cfg = {{"mode", a.mode}, {"path", a.path}};
  cfg["csv_filter"] = a.csv_filter >= 0 ? json(a.csv_filter) : json(nullptr);
  Manifest m{.command = "apply", .config = cfg, .inputs = {a.mel_path, a.bank_path}, .outputs = {a.out}};
  write_json(a.out + ".manifest.json", m.to_json());
  out << a.out << ": " << x.n_frames << " x " << x.n_channels << " x " << x.n_filters << " (" << a.mode << ")\n";
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string task = "chirp-direction";
  std::string out_dir = ".";
  std::string optimizer = "adam";
  std::string mode = "concat";
  int examples_per_class = 64;
  TrainConfig cfg;
  MelConfig mel;
};

json report_json(const TrainReport& r, const ToyTask& task, const ConversionRates& rates, const std::string& status) {
  json epochs = json::array();
  for (const auto& e : r.epochs) epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
  json initial = json::array(), final_bank = json::array();
  for (const auto& p : r.initial_bank) initial.push_back(params_json(p));
  for (const auto& p : r.final_bank) final_bank.push_back(params_json(p));
  json preferred = json::array();
  for (std::size_t c = 0; c < r.class_preferred_filter.size(); ++c) {
    const int k = r.class_preferred_filter[c];
    const auto& p = r.final_bank[static_cast<std::size_t>(k)];
    preferred.push_back({{"class", c < task.class_names.size() ? task.class_names[c] : std::to_string(c)},
                         {"filter", k},
                         {"params", params_json(p)},
                         {"modulation", point_json(to_cartesian(p, rates))}});
  }
  json weights = json::array();
  for (Eigen::Index i = 0; i < r.readout.weights.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.readout.weights.cols(); ++j) row.push_back(r.readout.weights(i, j));
    weights.push_back(std::move(row));
  }
  json bias = json::array();
  for (Eigen::Index i = 0; i < r.readout.bias.size(); ++i) bias.push_back(r.readout.bias(i));
  json doc = {
      {"schema_version", 1},
      {"status", status},
      {"task", r.task_name},
      {"class_names", task.class_names},
      {"n_classes", r.n_classes},
      {"initial_accuracy", r.initial_accuracy},
      {"final_accuracy", r.final_accuracy},
      {"epochs", std::move(epochs)},
      {"class_preferred_filters", std::move(preferred)},
      {"initial_bank", std::move(initial)},
      {"final_bank", std::move(final_bank)},
      {"readout", {{"weights", std::move(weights)}, {"bias", std::move(bias)}}},
  };
  if (r.gradient_check)
    doc["gradient_check"] = {{"n_checked", r.gradient_check->n_checked},
                             {"max_relative_error", r.gradient_check->max_relative_error},
                             {"p99_relative_error", r.gradient_check->p99_relative_error}};
  else
    doc["gradient_check"] = nullptr;
  return doc;
}

int cmd_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  if (a.optimizer != "adam" && a.optimizer != "sgd") throw UsageError("--optimizer must be adam or sgd");
  a.cfg.optimizer = a.optimizer == "adam" ? Optimizer::kAdam : Optimizer::kSgd;
  const auto mode = parse_output_mode(a.mode);
  if (!mode) throw UsageError("--mode must be one of real, imag, magnitude, concat");
  a.cfg.output_mode = *mode;
  ToyTask task;
  try {
    task = make_task(a.task);
  } catch (const InvalidConfig& e) {
    throw UsageError(e.what());
  }
  check_usage([&] {
    a.cfg.validate();
    a.cfg.grid.validate();
    a.mel.validate(task.sample_rate);
    if (a.mel.n_mels < a.cfg.grid.n_freq) throw InvalidConfig("--n-mels must be at least --grid-freq");
  });

  const ConversionRates rates = rates_for(a.mel);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const json cfg = {
      {"task", a.task},
      {"examples_per_class", a.examples_per_class},
      {"filters", a.cfg.n_filters},
      {"epochs", a.cfg.n_epochs},
      {"batch_size", a.cfg.batch_size},
      {"learning_rate", a.cfg.learning_rate},
      {"optimizer", a.optimizer},
      {"adam", {{"beta1", a.cfg.adam_beta1}, {"beta2", a.cfg.adam_beta2}, {"epsilon", a.cfg.adam_epsilon}}},
      {"output_mode", a.mode},
      {"grid", {{"n_time", a.cfg.grid.n_time}, {"n_freq", a.cfg.grid.n_freq}}},
      {"divergence_threshold", a.cfg.divergence_threshold},
      {"gradient_check_samples", a.cfg.gradient_check_samples},
      {"mel", mel_config_json(a.mel)},
  };
  Manifest m{.command = "train",
             .config = cfg,
             .outputs = {"bank.json", "report.json", "metrics.csv"},
             .seed = a.cfg.seed};
  const json manifest = m.to_json();

  TrainReport report;
  std::string status = "ok";
  int code = kExitOk;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    report = train(task, a.cfg, a.examples_per_class, a.mel);
  } catch (const DivergedError& e) {
    report = e.last_stable();
    status = "diverged";
    code = kExitRuntime;
    err << "error: " << e.what() << " (last stable state written)\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_bank((dir / "bank.json").string(),
             {.grid = a.cfg.grid, .rates = rates, .filters = report.final_bank}, manifest);
  json rep = report_json(report, task, rates, status);
  rep["manifest"] = manifest;
  write_json(dir / "report.json", rep);
  std::ostringstream csv;
  csv << "epoch,loss,accuracy\n";
  for (const auto& e : report.epochs) csv << e.epoch << ',' << fmt(e.loss) << ',' << fmt(e.accuracy) << '\n';
  write_text(dir / "metrics.csv", csv.str());
  write_json(dir / "manifest.json", manifest);

  out << "task " << a.task << ": accuracy " << report.initial_accuracy << " -> " << report.final_accuracy << " after "
      << report.epochs.size() << " epochs (" << std::fixed << std::setprecision(1) << secs << " s)\n";
  return code;
}

// ---- analyze ----

struct AnalyzeArgs {
  std::string bank_path;
  std::string out_dir = ".";
  AnalysisConfig cfg;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  check_usage([&] {
    a.cfg.box.validate();
    if (a.cfg.n_boot < 1) throw InvalidConfig("--n-boot must be positive");
    if (a.cfg.resolution < 2) throw InvalidConfig("--resolution must be at least 2");
  });
  const FilterBank bank = read_bank(a.bank_path);
  if (bank.filters.empty()) throw InvalidInput(a.bank_path + ": bank has no filters");
  const auto points = to_modulation_points(bank.filters, bank.rates, true);
  const PopulationStats s = analyze_population(points, bank.rates, a.cfg);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const json cfg = {{"delta_t", a.cfg.box.delta_t},
                    {"delta_f", a.cfg.box.delta_f},
                    {"n_boot", a.cfg.n_boot},
                    {"resolution", a.cfg.resolution},
                    {"ci_percentiles", {2.5, 97.5}}};
  std::vector<std::string> outputs{"stats.json", "points.csv", "figure.svg"};
  if (s.density) outputs.emplace_back("density.csv");
  Manifest m{.command = "analyze", .config = cfg, .inputs = {a.bank_path}, .outputs = outputs, .seed = a.cfg.seed};
  const json manifest = m.to_json();

  json doc = {
      {"schema_version", 1},
      {"n_filters", points.size()},
      {"counts", {{"n", s.counts.n}, {"n_low", s.counts.n_low}, {"n_dt", s.counts.n_dt}, {"n_df", s.counts.n_df}}},
      {"box", {{"delta_t_hz", s.box.delta_t}, {"delta_f_cpo", s.box.delta_f}}},
      {"alpha_asymmetry", interval_json(s.alpha_asymmetry)},
      {"alpha_asymmetry_centered", interval_json(s.alpha_asymmetry_centered)},
      {"alpha_low", interval_json(s.alpha_low)},
  };
  doc["alpha_star"] = s.alpha_star ? interval_json(*s.alpha_star) : json(nullptr);
  if (!s.alpha_star) doc["alpha_star_reason"] = s.alpha_star_reason;
  doc["alpha_sep"] = s.alpha_sep ? interval_json(*s.alpha_sep) : json(nullptr);
  if (!s.alpha_sep) doc["alpha_sep_reason"] = s.alpha_sep_reason;
  if (s.density)
    doc["kde"] = {{"bandwidth_omega_hz", s.density->bandwidth_omega},
                  {"bandwidth_Omega_cpo", s.density->bandwidth_Omega},
                  {"n_omega", s.density->omega_axis.size()},
                  {"n_Omega", s.density->Omega_axis.size()}};
  else
    doc["kde"] = nullptr;
  doc["manifest"] = manifest;
  write_json(dir / "stats.json", doc);

  std::ostringstream csv;
  csv << "index,omega_hz,Omega_cpo,sigma_t_s,sigma_f_oct,sigma_t,sigma_f,F,gamma\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto& g = bank.filters[i];
    csv << i << ',' << fmt(p.omega) << ',' << fmt(p.Omega) << ',' << fmt(p.sigma_t_s) << ',' << fmt(p.sigma_f_oct)
        << ',' << fmt(g.sigma_t) << ',' << fmt(g.sigma_f) << ',' << fmt(g.F) << ',' << fmt(g.gamma) << '\n';
  }
  write_text(dir / "points.csv", csv.str());

  if (s.density) {
    const auto& d = *s.density;
    std::ostringstream dc;
    dc << "Omega_cpo\\omega_hz";
    for (double w : d.omega_axis) dc << ',' << fmt(w);
    dc << '\n';
    for (std::size_t i = 0; i < d.Omega_axis.size(); ++i) {
      dc << fmt(d.Omega_axis[i]);
      for (Eigen::Index j = 0; j < d.values.cols(); ++j) dc << ',' << fmt(d.values(static_cast<Eigen::Index>(i), j));
      dc << '\n';
    }
    write_text(dir / "density.csv", dc.str());
  }
  write_text(dir / "figure.svg",
             modulation_figure(points, s.density ? &*s.density : nullptr, bank.rates, s.box, manifest.dump()));
  write_json(dir / "manifest.json", manifest);

  out << a.bank_path << ": " << points.size() << " filters, alpha_low " << s.alpha_low.estimate;
  if (s.alpha_star) out << ", alpha_star " << s.alpha_star->estimate;
  if (s.alpha_sep) out << ", alpha_sep " << s.alpha_sep->estimate;
  out << '\n';
  return kExitOk;
}

// ---- distance ----

struct DistanceArgs {
  std::vector<std::string> banks;
  std::vector<std::string> names;
  std::string out_dir = ".";
  SinkhornConfig cfg;
};

json node_json(const DendrogramNode& n) {
  json doc = {{"merge_height", n.merge_height}};
  if (n.is_leaf()) {
    doc["name"] = n.name;
  } else {
    doc["children"] = json::array({node_json(n.children[0]), node_json(n.children[1])});
  }
  return doc;
}

std::string matrix_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& d) {
  std::ostringstream os;
  os << "task";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    os << names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d.cols(); ++j) os << ',' << fmt(d(i, j));
    os << '\n';
  }
  return os.str();
}

int cmd_distance(const DistanceArgs& a, std::ostream& out, std::ostream& err) {
  if (a.banks.size() < 2) throw UsageError("distance needs at least two banks");
  if (!a.names.empty() && a.names.size() != a.banks.size())
    throw UsageError("--names must give one name per bank");
  check_usage([&] {
    if (!(a.cfg.reg_lambda > 0.0) || !std::isfinite(a.cfg.reg_lambda)) throw InvalidConfig("--lambda must be positive");
    if (a.cfg.max_iter < 1) throw InvalidConfig("--max-iter must be positive");
    if (!(a.cfg.tol > 0.0)) throw InvalidConfig("--tol must be positive");
  });

  std::vector<TaskPopulation> pops;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < a.banks.size(); ++i) {
    const FilterBank bank = read_bank(a.banks[i]);
    if (bank.filters.empty()) throw InvalidInput(a.banks[i] + ": bank has no filters");
    std::string name = a.names.empty() ? fs::path(a.banks[i]).stem().string() : a.names[i];
    if (a.names.empty() && name == "bank") name = fs::path(a.banks[i]).parent_path().filename().string();
    if (name.empty()) name = "bank" + std::to_string(i);
    if (const int n = seen[name]++; n > 0) name += "_" + std::to_string(n + 1);
    TaskPopulation pop;
    pop.task_name = name;
    pop.points = to_modulation_points(bank.filters, bank.rates, true);
    pops.push_back(std::move(pop));
  }
  const Normalization norm = normalize_populations(pops);
  const PairwiseDistances d = pairwise_distances(norm.populations, a.cfg);
  const Dendrogram tree = linkage(d.distance, d.names);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  const json cfg = {{"lambda", a.cfg.reg_lambda},
                    {"max_iter", a.cfg.max_iter},
                    {"tol", a.cfg.tol},
                    {"names", d.names},
                    {"normalization", "joint z-score over all banks"},
                    {"linkage", "average"}};
  Manifest m{.command = "distance",
             .config = cfg,
             .inputs = a.banks,
             .outputs = {"distances.csv", "distances_regularized.csv", "distance.json", "dendrogram.json",
                         "dendrogram.svg"}};
  const json manifest = m.to_json();

  write_text(dir / "distances.csv", matrix_csv(d.names, d.distance));
  write_text(dir / "distances_regularized.csv", matrix_csv(d.names, d.regularized));

  static constexpr std::array<const char*, 4> kAxes{"sigma_t_s", "sigma_f_oct", "omega_hz", "Omega_cpo"};
  json axes = json::object();
  for (std::size_t k = 0; k < 4; ++k)
    axes[kAxes[k]] = {{"mean", norm.mean[k]}, {"stddev", norm.stddev[k]}, {"degenerate", norm.degenerate_axis[k]}};
  json warnings = json::array();
  for (const auto& w : d.warnings) {
    warnings.push_back({{"i", w.i}, {"j", w.j}, {"message", w.warning.message},
                        {"marginal_error", w.warning.marginal_error}});
    err << "warning: " << d.names[static_cast<std::size_t>(w.i)] << " vs " << d.names[static_cast<std::size_t>(w.j)]
        << ": " << w.warning.message << '\n';
  }
  json merges = json::array();
  for (const auto& mg : tree.merges) merges.push_back({{"left", mg.left}, {"right", mg.right}, {"height", mg.height}});
  write_json(dir / "distance.json", {{"schema_version", 1},
                                     {"names", d.names},
                                     {"self_distance", d.self_distance},
                                     {"normalization", std::move(axes)},
                                     {"warnings", std::move(warnings)},
                                     {"merges", std::move(merges)},
                                     {"manifest", manifest}});
  write_json(dir / "dendrogram.json",
             {{"schema_version", 1}, {"linkage", "average"}, {"root", node_json(tree.root)}, {"manifest", manifest}});
  write_text(dir / "dendrogram.svg", dendrogram_figure(tree, manifest.dump()));
  write_json(dir / "manifest.json", manifest);

  for (std::size_t i = 0; i < d.names.size(); ++i) {
    out << d.names[i];
    for (Eigen::Index j = 0; j < d.distance.cols(); ++j)
      out << ' ' << std::setprecision(6) << d.distance(static_cast<Eigen::Index>(i), j);
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

std::vector<DefaultEntry> defaults_table() {
  const MelConfig mel;
  const KernelGrid grid;
  const TrainConfig train;
  const AnalysisConfig an;
  const SinkhornConfig sk;
  return {
      {"mel.n_mels", std::to_string(mel.n_mels), "reference"},
      {"mel.f_min_hz", brief(mel.f_min), "reference"},
      {"mel.f_max_hz", brief(mel.f_max), "reference"},
      {"mel.window_s", brief(mel.window_length), "tunable"},
      {"mel.hop_s", brief(mel.hop_length), "tunable"},
      {"grid.n_time", std::to_string(grid.n_time), "reference"},
      {"grid.n_freq", std::to_string(grid.n_freq), "reference"},
      {"train.filters", std::to_string(train.n_filters), "tunable"},
      {"train.epochs", std::to_string(train.n_epochs), "tunable"},
      {"train.batch_size", std::to_string(train.batch_size), "tunable"},
      {"train.learning_rate", brief(train.learning_rate), "tunable"},
      {"train.optimizer", "adam", "reference"},
      {"train.adam_betas", brief(train.adam_beta1) + "," + brief(train.adam_beta2), "reference"},
      {"train.adam_epsilon", brief(train.adam_epsilon), "reference"},
      {"train.output_mode", to_string(train.output_mode), "reference"},
      {"train.examples_per_class", "64", "tunable"},
      {"analyze.delta_t_hz", brief(an.box.delta_t), "reference"},
      {"analyze.delta_f_cpo", brief(an.box.delta_f), "reference"},
      {"analyze.n_boot", std::to_string(an.n_boot), "reference"},
      {"analyze.resolution", std::to_string(an.resolution), "tunable"},
      {"distance.lambda", brief(sk.reg_lambda), "reference"},
      {"distance.max_iter", std::to_string(sk.max_iter), "tunable"},
      {"distance.tol", brief(sk.tol), "tunable"},
      {"seed", "0", "tunable"},
  };
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"strfkit: learnable Gabor STRF filter banks and population analysis"};
  app.name("strfkit");
  app.set_version_flag("--version", std::string(kToolVersion));
  bool show_defaults = false;
  app.add_flag("--show-defaults", show_defaults, "print the table of numerical defaults");
  app.require_subcommand(0, 1);

  SpectrogramArgs sa;
  auto* sg = app.add_subcommand("spectrogram", "WAV to log-mel spectrogram");
  sg->add_option("input", sa.input, "input WAV")->required();
  sg->add_option("--out,-o", sa.out, "output file")->required();
  sg->add_option("--format", sa.format, "binary or csv")
      ->check(CLI::IsMember({"binary", "csv"}))
      ->capture_default_str();
  add_mel_flags(sg, sa.mel);

  ApplyArgs aa;
  auto* apply = app.add_subcommand("apply", "convolve a spectrogram with a filter bank");
  apply->add_option("spectrogram", aa.mel_path, "binary mel spectrogram")->required();
  apply->add_option("bank", aa.bank_path, "filter bank JSON")->required();
  apply->add_option("--out,-o", aa.out, "output file")->required();
  apply->add_option("--mode", aa.mode, "real, imag, magnitude or concat")->capture_default_str();
  apply->add_option("--path", aa.path, "convolution path")
      ->check(CLI::IsMember({"auto", "direct", "fft"}))
      ->capture_default_str();
  apply->add_option("--csv-filter", aa.csv_filter, "write the CSV slice of one filter instead of the binary tensor")
      ->check(CLI::NonNegativeNumber);

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "learn a filter bank on a toy task");
  tr->add_option("--task", ta.task, "toy task")->check(CLI::IsMember(task_names()))->capture_default_str();
  tr->add_option("--out-dir", ta.out_dir, "output directory")->capture_default_str();
  tr->add_option("--filters", ta.cfg.n_filters, "bank size")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--epochs", ta.cfg.n_epochs, "epochs")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--batch-size", ta.cfg.batch_size, "minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--lr", ta.cfg.learning_rate, "learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  tr->add_option("--optimizer", ta.optimizer, "adam or sgd")->capture_default_str();
  tr->add_option("--mode", ta.mode, "output representation")->capture_default_str();
  tr->add_option("--seed", ta.cfg.seed, "seed")->capture_default_str();
  tr->add_option("--examples-per-class", ta.examples_per_class, "training examples per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tr->add_option("--grid-time", ta.cfg.grid.n_time, "kernel frames (odd)")->capture_default_str();
  tr->add_option("--grid-freq", ta.cfg.grid.n_freq, "kernel channels (odd)")->capture_default_str();
  tr->add_option("--grad-check", ta.cfg.gradient_check_samples, "parameters checked by finite differences (0: off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_mel_flags(tr, ta.mel);

  AnalyzeArgs na;
  auto* an = app.add_subcommand("analyze", "population descriptors of a bank");
  an->add_option("bank", na.bank_path, "filter bank JSON")->required();
  an->add_option("--out-dir", na.out_dir, "output directory")->capture_default_str();
  an->add_option("--delta-t", na.cfg.box.delta_t, "low box half-width (Hz)")->capture_default_str();
  an->add_option("--delta-f", na.cfg.box.delta_f, "low box height (cyc/oct)")->capture_default_str();
  an->add_option("--n-boot", na.cfg.n_boot, "bootstrap replicates")->capture_default_str();
  an->add_option("--resolution", na.cfg.resolution, "density lattice size")->capture_default_str();
  an->add_option("--seed", na.cfg.seed, "bootstrap seed")->capture_default_str();

  DistanceArgs da;
  auto* di = app.add_subcommand("distance", "Sinkhorn distances and cluster tree between banks");
  di->add_option("banks", da.banks, "two or more filter bank JSON files")->required();
  di->add_option("--names", da.names, "task names, one per bank");
  di->add_option("--out-dir", da.out_dir, "output directory")->capture_default_str();
  di->add_option("--lambda", da.cfg.reg_lambda, "entropic regularization")->capture_default_str();
  di->add_option("--max-iter", da.cfg.max_iter, "iteration cap per solve")->capture_default_str();
  di->add_option("--tol", da.cfg.tol, "marginal tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (show_defaults) {
      out << std::left << std::setw(28) << "key" << std::setw(14) << "value" << " kind\n";
      for (const auto& d : defaults_table())
        out << std::setw(28) << d.key << std::setw(14) << d.value << ' ' << d.kind << '\n';
      out << "threads: " << thread_count() << " (STRFKIT_THREADS)\n";
      return kExitOk;
    }
    if (sg->parsed()) return cmd_spectrogram(sa, out);
    if (apply->parsed()) return cmd_apply(aa, out);
    if (tr->parsed()) return cmd_train(ta, out, err);
    if (an->parsed()) return cmd_analyze(na, out);
    if (di->parsed()) return cmd_distance(da, out, err);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"strfkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace strfkit::cli
