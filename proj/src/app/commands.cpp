// Copyright 2026 The QCSE Toolkit Authors
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


#include "qcse/app/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>

#include "qcse/app/config.hpp"
#include "qcse/app/pipeline.hpp"
#include "qcse/chirp.hpp"
#include "qcse/corpus.hpp"
#include "qcse/features.hpp"
#include "qcse/model_io.hpp"
#include "qcse/noise.hpp"

namespace qcse::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.qcm";
constexpr const char* kSecondCheckpointFile = "model.ckpt2.qcm";
constexpr const char* kManifestFile = "manifest.csv";

// Flags shared by every subcommand. Values only apply when given.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    seed_opt = sub->add_option("--seed", seed, "master seed for every random stream");
  }

  // defaults < inherited < --config < flags
  RunConfig resolve(const RunConfig& inherited) const {
    RunConfig cfg = inherited;
    if (!config.empty()) cfg = load_config(config, cfg);
    if (seed_opt->count()) cfg.seed = seed;
    return cfg;
  }
};

template <typename T>
void apply_if(const CLI::Option* opt, const T& value, T& field) {
  if (opt && opt->count()) field = value;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// The effective configuration of a previous stage, if it left one behind.
RunConfig inherited_config(const fs::path& dir) {
  const fs::path p = dir / kConfigFileName;
  return fs::exists(p) ? load_config(p) : RunConfig{};
}

// Accepts a manifest file or a directory holding manifest.csv.
fs::path manifest_path(const std::string& arg) {
  const fs::path p = fs::absolute(arg);
  return fs::is_directory(p) ? p / kManifestFile : p;
}

// Where an item's output goes, relative to the output directory: the input's
// relative path when it stays inside the manifest tree, otherwise
// <split>/<file name>.
fs::path output_relpath(const ManifestEntry& e, const char* extension) {
  fs::path rel(e.path);
  bool inside = rel.is_relative();
  for (const auto& part : rel) {
    if (part == "..") inside = false;
  }
  if (!inside) rel = fs::path(std::string(to_string(e.split))) / rel.filename();
  rel.replace_extension(extension);
  return rel;
}

void check_unique(const std::vector<fs::path>& rels) {
  std::set<fs::path> seen;
  for (const fs::path& r : rels) {
    if (!seen.insert(r).second) {
      throw std::invalid_argument("two manifest entries map to the same output file " + r.string());
    }
  }
}

struct ItemFailure {
  std::size_t row = 0;
  std::string path;
  std::string message;
};

int report_failures(const std::vector<ItemFailure>& failures, std::size_t total, const char* verb,
                    std::ostream& err) {
  err << "error: " << failures.size() << " of " << total << " items failed to " << verb << ":\n";
  for (const ItemFailure& f : failures) {
    err << "  row " << f.row << " (" << f.path << "): " << f.message << '\n';
  }
  return kExitFailure;
}

// Runs `work(i)` for every index in parallel and gathers per-item errors in
// index order.
template <typename Work>
std::vector<ItemFailure> for_each_item(const std::vector<ManifestEntry>& entries, Work work) {
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(entries.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      work(k);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  std::vector<ItemFailure> failures;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!errors[i].empty()) failures.push_back({i + 2, entries[i].path, errors[i]});
  }
  return failures;
}

struct FeatureSet {
  LabeledFeatures data;
  FeatureKind kind = FeatureKind::qcse;
  double radius = 0.0;
};

// Loads every feature file of one split from an extract output manifest.
FeatureSet load_feature_split(const fs::path& manifest, Split split) {
  const std::vector<ManifestEntry> entries = load_manifest(manifest);
  FeatureSet out;
  bool first = true;
  for (const ManifestEntry& e : entries) {
    if (e.split != split) continue;
    FeatureMatrix f = read_features(resolve_entry(manifest, e));
    if (first) {
      out.kind = f.kind;
      out.radius = f.radius;
      first = false;
    } else if (f.kind != out.kind || f.radius != out.radius || f.n_bins != out.data.features[0].n_bins) {
      throw std::invalid_argument(e.path + ": feature type differs from the first " +
                                  std::string(to_string(split)) + " file");
    }
    out.data.features.push_back(std::move(f));
    out.data.labels.push_back(e.label);
  }
  if (first) {
    throw std::invalid_argument(manifest.string() + " lists no " + std::string(to_string(split)) +
                                " items");
  }
  return out;
}

// --- synth -----------------------------------------------------------------

struct SynthCommand {
  CommonFlags common;
  std::size_t n_train = 200;
  std::size_t n_test = 100;
  std::string out_dir;
  double duration = 0.0;
  CLI::Option* duration_opt = nullptr;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("synth", "generate a synthetic normal/whispered corpus");
    common.add(sub);
    sub->add_option("--train", n_train, "utterances per class in the train split")->check(CLI::PositiveNumber);
    sub->add_option("--test", n_test, "utterances per class in the test split")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory")->required();
    duration_opt = sub->add_option("--duration", duration, "utterance length in seconds");
  }

  int run(std::ostream& out) const {
    RunConfig cfg = common.resolve({});
    apply_if(duration_opt, duration, cfg.synth.duration_s);
    cfg.validate();
    const fs::path manifest = build_synthetic_corpus(n_train, n_test, cfg.synth_config(), out_dir);
    echo_config(out_dir, cfg);
    out << manifest.string() << '\n';
    return kExitOk;
  }
};

// --- extract ---------------------------------------------------------------

struct ExtractCommand {
  CommonFlags common;
  std::string manifest;
  std::string out_dir;
  double radius = 0.0;
  double snr_db = 0.0;
  std::size_t fft_size = 0;
  CLI::Option* radius_opt = nullptr;
  CLI::Option* snr_opt = nullptr;
  CLI::Option* fft_opt = nullptr;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("extract", "compute QSE/QCSE feature files for a manifest");
    common.add(sub);
    sub->add_option("--manifest", manifest, "audio manifest (file or directory)")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    radius_opt = sub->add_option("--radius", radius, "analysis radius; 1.0 gives QSE");
    snr_opt = sub->add_option("--snr-db", snr_db, "corrupt with white noise at this SNR first");
    fft_opt = sub->add_option("--fft-size", fft_size, "FFT length (power of two)");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const fs::path man = manifest_path(manifest);
    RunConfig cfg = common.resolve(inherited_config(man.parent_path()));
    apply_if(radius_opt, radius, cfg.chirp.radius);
    apply_if(fft_opt, fft_size, cfg.chirp.fft_size);
    if (fft_opt->count()) cfg.model.input_bins = static_cast<std::uint32_t>(fft_size / 8);
    if (snr_opt->count()) cfg.snr_db = snr_db;
    cfg.validate();

    const std::vector<ManifestEntry> entries = load_manifest(man);
    std::vector<fs::path> rels;
    for (const ManifestEntry& e : entries) rels.push_back(output_relpath(e, ".qcf"));
    check_unique(rels);

    const fs::path root(out_dir);
    const std::vector<ItemFailure> failures = for_each_item(entries, [&](std::size_t i) {
      const AudioBuffer audio = read_wav(resolve_entry(man, entries[i]));
      const fs::path dest = root / rels[i];
      fs::create_directories(dest.parent_path());
      write_features(dest, featurize(audio, cfg, i));
    });
    if (!failures.empty()) return report_failures(failures, entries.size(), "extract", err);

    std::vector<ManifestEntry> produced = entries;
    for (std::size_t i = 0; i < produced.size(); ++i) produced[i].path = rels[i].generic_string();
    write_manifest(root / kManifestFile, produced);
    echo_config(root, cfg);
    out << "extracted " << entries.size() << ' ' << to_string(kind_for_radius(cfg.chirp.radius))
        << " files to " << root.string() << '\n';
    return kExitOk;
  }
};

// --- corrupt ---------------------------------------------------------------

struct CorruptCommand {
  CommonFlags common;
  std::string manifest;
  std::string out_dir;
  double snr_db = 0.0;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("corrupt", "add white Gaussian noise to every WAV of a manifest");
    common.add(sub);
    sub->add_option("--manifest", manifest, "audio manifest (file or directory)")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--snr-db", snr_db, "signal-to-noise ratio in dB")->required();
  }

  int run(std::ostream& out, std::ostream& err) const {
    const fs::path man = manifest_path(manifest);
    RunConfig cfg = common.resolve(inherited_config(man.parent_path()));
    cfg.snr_db = snr_db;
    cfg.validate();

    const std::vector<ManifestEntry> entries = load_manifest(man);
    std::vector<fs::path> rels;
    for (const ManifestEntry& e : entries) rels.push_back(output_relpath(e, ".wav"));
    check_unique(rels);

    const fs::path root(out_dir);
    std::vector<std::size_t> clipped(entries.size(), 0);
    const std::vector<ItemFailure> failures = for_each_item(entries, [&](std::size_t i) {
      const AudioBuffer audio = read_wav(resolve_entry(man, entries[i]));
      const AudioBuffer noisy = add_awgn(audio, NoiseSpec{snr_db, noise_seed(cfg.seed, i)});
      const fs::path dest = root / rels[i];
      fs::create_directories(dest.parent_path());
      clipped[i] = write_wav(dest, noisy);
    });
    if (!failures.empty()) return report_failures(failures, entries.size(), "corrupt", err);

    std::vector<ManifestEntry> produced = entries;
    for (std::size_t i = 0; i < produced.size(); ++i) produced[i].path = rels[i].generic_string();
    write_manifest(root / kManifestFile, produced);
    // The files carry the noise; extracting them again must not add more.
    RunConfig echoed = cfg;
    echoed.snr_db.reset();
    echo_config(root, echoed);

    std::size_t total_clipped = 0;
    for (std::size_t c : clipped) total_clipped += c;
    out << "corrupted " << entries.size() << " files at " << snr_db << " dB SNR";
    if (total_clipped) out << " (" << total_clipped << " samples clipped)";
    out << '\n';
    return kExitOk;
  }
};

// --- train -----------------------------------------------------------------

struct TrainCommand {
  CommonFlags common;
  std::string features;
  std::string out_dir;
  std::size_t epochs = 0, batch = 0, patience = 0, chunks = 0;
  double lr = 0.0;
  std::string optimizer, padding;
  CLI::Option *epochs_opt = nullptr, *batch_opt = nullptr, *patience_opt = nullptr,
              *chunks_opt = nullptr, *lr_opt = nullptr, *optimizer_opt = nullptr,
              *padding_opt = nullptr;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("train", "train the 1D-CNN on extracted features");
    common.add(sub);
    sub->add_option("--features", features, "extract output (directory or manifest)")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    epochs_opt = sub->add_option("--epochs", epochs, "maximum epochs");
    batch_opt = sub->add_option("--batch", batch, "batch size in frames");
    patience_opt = sub->add_option("--patience", patience, "early-stopping patience in epochs");
    lr_opt = sub->add_option("--lr", lr, "learning rate");
    optimizer_opt = sub->add_option("--optimizer", optimizer, "adaptive_moment or sgd_momentum");
    padding_opt = sub->add_option("--padding", padding, "convolution padding: valid or same");
    chunks_opt = sub->add_option("--grad-chunks", chunks,
                                 "split each batch into this many parallel pieces");
  }

  int run(std::ostream& out) const {
    const fs::path man = manifest_path(features);
    RunConfig cfg = common.resolve(inherited_config(man.parent_path()));
    apply_if(epochs_opt, epochs, cfg.train.max_epochs);
    apply_if(batch_opt, batch, cfg.train.batch_size);
    apply_if(patience_opt, patience, cfg.train.patience);
    apply_if(lr_opt, lr, cfg.train.learning_rate);
    apply_if(chunks_opt, chunks, cfg.train.grad_chunks);
    if (optimizer_opt->count()) cfg.train.optimizer = parse_optimizer(optimizer);
    if (padding_opt->count()) cfg.model.padding = parse_padding(padding);
    cfg.validate();

    const FeatureSet set = load_feature_split(man, Split::train);
    if (set.data.features.front().n_bins != cfg.model.input_bins) {
      throw std::invalid_argument("features have " + std::to_string(set.data.features.front().n_bins) +
                                  " bins but the model expects " + std::to_string(cfg.model.input_bins));
    }
    const NormStats norm = fit_norm(set.data.features);
    const TrainResult result = train(normalized(set.data, norm), cfg.model, cfg.train_config());

    const fs::path root(out_dir);
    fs::create_directories(root);
    save_model(root / kModelFile, TrainedModel{result.checkpoints[0].params, norm});
    if (result.checkpoints.size() > 1) {
      save_model(root / kSecondCheckpointFile, TrainedModel{result.checkpoints[1].params, norm});
    }
    write_text(root / "train_log.csv", render_train_log(result));
    echo_config(root, cfg);

    out << "parameters: " << param_count(cfg.model) << '\n';
    for (const std::string& s : describe_stages(cfg.model)) out << "  " << s << '\n';
    out << "epochs: " << result.log.size() << " (" << result.stop_reason << ")\n";
    for (std::size_t i = 0; i < result.checkpoints.size(); ++i) {
      char line[128];
      std::snprintf(line, sizeof line, "checkpoint %zu: epoch %zu, validation loss %.6g\n", i + 1,
                    result.checkpoints[i].epoch, result.checkpoints[i].validation_loss);
      out << line;
    }
    return kExitOk;
  }
};

// --- eval ------------------------------------------------------------------

struct EvalCommand {
  CommonFlags common;
  std::string features;
  std::vector<std::string> models;
  std::string out_dir;
  std::string dataset = "test";

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("eval", "score trained checkpoints on the test split");
    common.add(sub);
    sub->add_option("--features", features, "extract output (directory or manifest)")->required();
    sub->add_option("--model", models, "model file or train output directory (repeatable)")
        ->required();
    sub->add_option("--out", out_dir, "write report.txt and metrics.csv here");
    sub->add_option("--dataset", dataset, "dataset name recorded in the report");
  }

  static std::vector<fs::path> model_files(const std::vector<std::string>& args) {
    std::vector<fs::path> files;
    for (const std::string& a : args) {
      const fs::path p(a);
      if (fs::is_directory(p)) {
        files.push_back(p / kModelFile);
        if (fs::exists(p / kSecondCheckpointFile)) files.push_back(p / kSecondCheckpointFile);
      } else {
        files.push_back(p);
      }
    }
    return files;
  }

  int run(std::ostream& out) const {
    const fs::path man = manifest_path(features);
    RunConfig cfg = common.resolve(inherited_config(man.parent_path()));

    const FeatureSet set = load_feature_split(man, Split::test);
    cfg.chirp.radius = set.radius;

    std::vector<TrainedModel> loaded;
    for (const fs::path& f : model_files(models)) {
      TrainedModel m = load_model(f);
      if (m.params.config.input_bins != set.data.features.front().n_bins) {
        throw std::invalid_argument(f.string() + " expects " +
                                    std::to_string(m.params.config.input_bins) +
                                    " bins but the features have " +
                                    std::to_string(set.data.features.front().n_bins));
      }
      loaded.push_back(std::move(m));
    }
    const CheckpointEval e = evaluate_checkpoints(loaded, set.data, cfg, dataset);
    const std::string table = render_checkpoint_table(e);
    out << table;
    if (!out_dir.empty()) {
      const fs::path root(out_dir);
      write_text(root / "report.txt", table);
      write_text(root / "metrics.csv", render_csv(e.reports));
    }
    return kExitOk;
  }
};

// --- inspect ---------------------------------------------------------------

struct InspectCommand {
  CommonFlags common;
  std::string wav;
  std::string out_file;
  double radius = 0.0;
  double snr_db = 0.0;
  long frame = -1;
  bool spectrum = false;
  bool oracle = false;
  CLI::Option *radius_opt = nullptr, *snr_opt = nullptr;

  void add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("inspect", "dump QSE/QCSE envelopes of one frame as CSV");
    common.add(sub);
    sub->add_option("--wav", wav, "16-bit mono WAV file")->required()->check(CLI::ExistingFile);
    radius_opt = sub->add_option("--radius", radius, "QCSE radius");
    snr_opt = sub->add_option("--snr-db", snr_db, "also emit envelopes after adding noise at this SNR");
    sub->add_option("--frame", frame, "frame index (default: highest-energy frame)");
    sub->add_flag("--spectrum", spectrum,
                  "dump the complex chirp spectrum (bin,real,imag,magnitude_db) instead");
    sub->add_flag("--oracle", oracle, "with --spectrum, use direct summation instead of the FFT");
    sub->add_option("--out", out_file, "output file (default: stdout)");
  }

  static std::size_t loudest_frame(const FrameMatrix& frames) {
    std::size_t best = 0;
    double best_energy = -1.0;
    for (std::size_t i = 0; i < frames.n_frames; ++i) {
      double e = 0.0;
      for (double v : frames.row(i)) e += v * v;
      if (e > best_energy) {
        best_energy = e;
        best = i;
      }
    }
    return best;
  }

  int run(std::ostream& out) const {
    RunConfig cfg = common.resolve({});
    apply_if(radius_opt, radius, cfg.chirp.radius);
    if (snr_opt->count()) cfg.snr_db = snr_db;
    cfg.validate();
    if (oracle && !spectrum) throw CLI::ValidationError("--oracle", "requires --spectrum");

    const AudioBuffer audio = read_wav(wav);
    const FrameMatrix frames = frame_signal(audio, cfg.frame);
    std::size_t idx = 0;
    if (frame >= 0) {
      idx = static_cast<std::size_t>(frame);
      if (idx >= frames.n_frames) {
        throw std::invalid_argument("frame " + std::to_string(frame) + " out of range; the file has " +
                                    std::to_string(frames.n_frames) + " frames");
      }
    } else {
      idx = loudest_frame(frames);
    }

    std::string csv = spectrum ? spectrum_csv(frames, idx, cfg) : envelope_csv(audio, idx, cfg);
    if (out_file.empty()) {
      out << csv;
    } else {
      write_text(out_file, csv);
    }
    return kExitOk;
  }

  std::string spectrum_csv(const FrameMatrix& frames, std::size_t idx, const RunConfig& cfg) const {
    const ComplexSpectrum s = oracle
                                  ? chirp_spectrum_oracle(frames.row(idx), cfg.chirp.radius, cfg.chirp.fft_size)
                                  : chirp_spectrum(frames.row(idx), cfg.chirp);
    const std::vector<double> db = log_magnitude(s);
    std::string csv = "bin,real,imag,magnitude_db\n";
    char line[160];
    for (std::size_t k = 0; k < db.size(); ++k) {
      std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", k, s.bins[k].real(), s.bins[k].imag(),
                    db[k]);
      csv += line;
    }
    return csv;
  }

  std::string envelope_csv(const AudioBuffer& audio, std::size_t idx, const RunConfig& cfg) const {
    ChirpConfig unit = cfg.chirp;
    unit.radius = 1.0;
    std::vector<FeatureMatrix> cols{extract(audio, cfg.frame, unit), extract(audio, cfg.frame, cfg.chirp)};
    std::string csv = "bin,qse_db,qcse_db";
    if (cfg.snr_db) {
      const AudioBuffer noisy = add_awgn(audio, NoiseSpec{*cfg.snr_db, noise_seed(cfg.seed, 0)});
      cols.push_back(extract(noisy, cfg.frame, unit));
      cols.push_back(extract(noisy, cfg.frame, cfg.chirp));
      csv += ",qse_noisy_db,qcse_noisy_db";
    }
    csv += '\n';
    char cell[40];
    for (std::size_t k = 0; k < cols[0].n_bins; ++k) {
      csv += std::to_string(k);
      for (const FeatureMatrix& f : cols) {
        std::snprintf(cell, sizeof cell, ",%.10g", f.row(idx)[k]);
        csv += cell;
      }
      csv += '\n';
    }
    return csv;
  }
};

int parse_workers(const std::string& text) {
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size() && v > 0 && v <= 4096) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(std::string(kWorkersEnv), "expected a positive integer, got '" + text + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Normal/whispered speech classification with chirp spectral envelopes", "qcse");
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (overrides $" + std::string(kWorkersEnv) + ")")
      ->check(CLI::PositiveNumber);

  SynthCommand synth;
  ExtractCommand extract_cmd;
  CorruptCommand corrupt;
  TrainCommand train_cmd;
  EvalCommand eval;
  InspectCommand inspect;
  synth.add(app);
  extract_cmd.add(app);
  corrupt.add(app);
  train_cmd.add(app);
  eval.add(app);
  inspect.add(app);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (workers > 0) {
      omp_set_num_threads(workers);
    } else if (const char* env = std::getenv(kWorkersEnv); env && *env) {
      omp_set_num_threads(parse_workers(env));
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("synth")) return synth.run(out);
    if (app.got_subcommand("extract")) return extract_cmd.run(out, err);
    if (app.got_subcommand("corrupt")) return corrupt.run(out, err);
    if (app.got_subcommand("train")) return train_cmd.run(out);
    if (app.got_subcommand("eval")) return eval.run(out);
    if (app.got_subcommand("inspect")) return inspect.run(out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace qcse::app
