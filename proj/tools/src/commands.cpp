// Copyright 2026 The SkimNet Authors
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

#include "skimnet/cli/commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "skimnet/cli/gradcheck_suite.hpp"
#include "skimnet/cli/svg.hpp"
#include "skimnet/error.hpp"
#include "skimnet/format.hpp"
#include "skimnet/models/checkpoint.hpp"

namespace skimnet::cli {

namespace fs = std::filesystem;
using evalbench::EvalReport;
using evalbench::Strategy;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw Error(ErrorCategory::kMissingFile, path.string() + " not found (" + hint + ")");
}

synth::Dataset load_dataset(const ExperimentConfig& cfg) {
  const RunPaths paths(cfg.output_dir);
  synth::Dataset data;
  data.config = cfg.dataset;
  for (const char* name : {"train", "val", "test"}) {
    require_file(paths.split(name), "run `skimnet gen` first");
    synth::DatasetSplit split = synth::load_split(paths.split(name));
    const synth::DatasetConfig stored = synth::dataset_config_from_json(split.config_json);
    const auto& c = cfg.dataset;
    if (stored.image_dim != c.image_dim || stored.audio_dim != c.audio_dim || stored.clip_frames != c.clip_frames ||
        stored.num_classes != c.num_classes || stored.seq_len != c.seq_len) {
      throw Error(ErrorCategory::kDimensionConflict,
                  paths.split(name).string() + ": dataset dimensions conflict with the configuration");
    }
    auto& dst = std::string(name) == "train" ? data.train : std::string(name) == "val" ? data.val : data.test;
    dst = std::move(split.videos);
  }
  return data;
}

const std::vector<synth::SyntheticVideo>& split_of(const synth::Dataset& data, const std::string& name) {
  if (name == "train") return data.train;
  if (name == "val") return data.val;
  return data.test;
}

bool student_finetuned(const ExperimentConfig& cfg) {
  return cfg.skim.finetune_fusion || cfg.skim.finetune_encoders;
}

fs::path skim_student_path(const ExperimentConfig& cfg) {
  const RunPaths paths(cfg.output_dir);
  return student_finetuned(cfg) ? paths.root / "skim_student.sknp" : paths.student();
}

struct LoadedModels {
  models::Student student;
  std::optional<models::Skimmer> skimmer;
  std::optional<evalbench::LstmBaseline> lstm;
  std::optional<models::Teacher> teacher;

  evalbench::ModelSet set() const {
    return {&student, skimmer ? &*skimmer : nullptr, lstm ? &*lstm : nullptr, teacher ? &*teacher : nullptr};
  }
};

/// Student plus whatever the requested strategies and budget need.
std::unique_ptr<LoadedModels> load_models(const ExperimentConfig& cfg, const std::vector<Strategy>& strategies,
                                          const skim::InferenceBudget& budget) {
  const RunPaths paths(cfg.output_dir);
  const auto needs = [&](Strategy s) { return std::find(strategies.begin(), strategies.end(), s) != strategies.end(); };
  const bool need_skimmer = needs(Strategy::kOurs) || needs(Strategy::kNonRecurrent);
  const fs::path student_path = need_skimmer ? skim_student_path(cfg) : paths.student();
  require_file(student_path, "run `skimnet distill` first");
  auto m = std::make_unique<LoadedModels>(LoadedModels{models::load_student(student_path, cfg.model), {}, {}, {}});
  if (need_skimmer) {
    require_file(paths.skimmer(), "run `skimnet train-skim` first");
    m->skimmer.emplace(models::load_skimmer(paths.skimmer(), m->student));
  }
  if (needs(Strategy::kLstm)) {
    require_file(paths.lstm_baseline(), "run `skimnet train-skim` with skim.train_lstm_baseline enabled");
    m->lstm.emplace(evalbench::load_lstm_baseline(paths.lstm_baseline(), cfg.model));
  }
  if (needs(Strategy::kOurs) && budget.use_recognition_features) {
    require_file(paths.teacher(), "run `skimnet distill` first");
    m->teacher.emplace(models::load_teacher(paths.teacher(), cfg.model));
  }
  return m;
}

std::string teacher_log_csv(const std::vector<distill::TeacherLogRow>& log) {
  std::ostringstream out;
  out << "epoch,loss,val_acc\n";
  for (const auto& r : log) out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.val_acc) << '\n';
  return out.str();
}

std::string pct(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << 100.0 * v << '%';
  return os.str();
}

std::string fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

ExperimentConfig resolve_config(const fs::path& path, std::optional<std::uint64_t> seed,
                                const std::optional<fs::path>& out) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  cfg.resolve();
  cfg.validate();
  return cfg;
}

void prepare_output(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  write_text(RunPaths(cfg.output_dir).effective_config(), experiment_config_to_json(cfg));
}

void cmd_gen(const ExperimentConfig& cfg, std::ostream& log) {
  const RunPaths paths(cfg.output_dir);
  const synth::Dataset data = synth::gen_dataset(cfg.dataset);
  fs::create_directories(paths.root / "data");
  synth::save_split(paths.split("train"), cfg.dataset, data.train);
  synth::save_split(paths.split("val"), cfg.dataset, data.val);
  synth::save_split(paths.split("test"), cfg.dataset, data.test);
  log << "wrote " << data.train.size() << " train, " << data.val.size() << " val, " << data.test.size()
      << " test videos to " << (paths.root / "data").string() << '\n';
}

void cmd_distill(const ExperimentConfig& cfg, std::ostream& log) {
  const RunPaths paths(cfg.output_dir);
  const synth::Dataset data = load_dataset(cfg);
  std::vector<distill::TeacherLogRow> tlog;
  const models::Teacher teacher = distill::train_teacher(cfg.model, data, cfg.distill, &tlog);
  models::save_teacher(teacher, paths.teacher());
  write_text(paths.root / "teacher_log.csv", teacher_log_csv(tlog));
  log << "teacher clip accuracy (val): " << pct(distill::teacher_clip_accuracy(teacher, data.val)) << '\n';

  const distill::DistillResult r = distill::train_distill(data, teacher, cfg.model, cfg.distill);
  models::save_student(r.student, paths.student());
  write_text(paths.root / "distill_log.csv", distill::distill_log_csv(r.log));
  log << models::modality_name(cfg.distill.modality) << " student clip accuracy (val): " << pct(r.log.back().val_acc)
      << '\n';
}

void cmd_trainskim(const ExperimentConfig& cfg, std::ostream& log) {
  const RunPaths paths(cfg.output_dir);
  const synth::Dataset data = load_dataset(cfg);
  require_file(paths.student(), "run `skimnet distill` first");
  models::Student student = models::load_student(paths.student(), cfg.model);
  skim::SkimTrainResult r = skim::train_skim(data, student, cfg.model, cfg.skim);
  if (student_finetuned(cfg)) models::save_student(student, skim_student_path(cfg));
  models::save_skimmer(r.skimmer, paths.skimmer());
  write_text(paths.root / "skim_log.csv", skim::skim_log_csv(r.log));
  log << "skimmer video accuracy (val): " << pct(r.log.back().val_acc) << '\n';

  if (cfg.skim.train_lstm_baseline) {
    evalbench::LstmBaselineConfig lc;
    lc.epochs = cfg.skim.lstm_baseline_epochs;
    lc.learning_rate = cfg.skim.lstm_baseline_learning_rate;
    lc.batch_size = cfg.skim.batch_size;
    lc.clip_norm = cfg.skim.clip_norm;
    lc.seed = cfg.seed;
    const evalbench::LstmBaseline lstm = evalbench::train_lstm_baseline(data, student, lc);
    evalbench::save_lstm_baseline(lstm, paths.lstm_baseline());
    log << "trained LSTM baseline\n";
  }
}

std::vector<EvalReport> cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  const RunPaths paths(cfg.output_dir);
  const synth::Dataset data = load_dataset(cfg);
  const auto& videos = split_of(data, cfg.eval.split);
  const auto models = load_models(cfg, cfg.eval.strategies, cfg.eval.budget);
  const evalbench::ModelSet set = models->set();
  const evalbench::CostLedger dense = evalbench::analytic_cost(Strategy::kDense, cfg.model, models->student.modality(),
                                                               cfg.dataset.seq_len, cfg.eval.budget);
  evalbench::EvalOptions opts{cfg.eval.budget, cfg.eval.seeds};
  std::vector<EvalReport> reports;
  for (Strategy s : cfg.eval.strategies) {
    reports.push_back(evalbench::evaluate(s, videos, set, opts));
    write_text(paths.root / ("report_" + reports.back().strategy + ".json"),
               evalbench::report_to_json(reports.back(), dense));
    for (const auto& w : reports.back().warnings) log << "warning: " << w << '\n';
    if (s == Strategy::kOurs) {
      std::ostringstream traces;
      for (std::size_t i = 0; i < videos.size(); ++i) {
        auto out = evalbench::run_strategy(s, videos[i], set, cfg.eval.budget, cfg.eval.seeds.front(), i);
        traces << skim::trace_to_json(*out.trace, videos[i].label, out.probs) << '\n';
      }
      write_text(paths.root / "traces_ours.jsonl", traces.str());
    }
  }
  write_text(paths.root / "metrics.csv", evalbench::reports_to_csv(reports));
  const std::string table = evalbench::comparison_table(reports);
  write_text(paths.root / "comparison.txt", table);
  log << table;
  return reports;
}

std::string cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis, std::ostream& log) {
  const RunPaths paths(cfg.output_dir);
  const synth::Dataset data = load_dataset(cfg);
  const auto& videos = split_of(data, cfg.eval.split);
  std::vector<std::size_t> values = cfg.eval.sweep_values;
  if (values.empty()) {
    if (axis == SweepAxis::kTStop) {
      for (std::size_t t = 1; t <= cfg.skim.steps; ++t) values.push_back(t);
    } else {
      values = {1, 2, 3, 4, 5, 6, 8};
    }
  }
  const auto models = load_models(cfg, {Strategy::kOurs}, cfg.eval.budget);
  const evalbench::CostLedger dense = evalbench::analytic_cost(Strategy::kDense, cfg.model, models->student.modality(),
                                                               cfg.dataset.seq_len, cfg.eval.budget);
  const std::string name(sweep_axis_name(axis));
  std::ostringstream csv;
  csv << name << ",accuracy,recall,macs,ratio_vs_dense\n";
  Series acc{"accuracy", {}, {}}, ratio{"cost / dense", {}, {}};
  for (std::size_t v : values) {
    evalbench::EvalOptions opts{cfg.eval.budget, {cfg.eval.seeds.front()}};
    (axis == SweepAxis::kTStop ? opts.budget.t_stop : opts.budget.subsample_factor) = v;
    const EvalReport r = evalbench::evaluate(Strategy::kOurs, videos, models->set(), opts);
    const double rv = static_cast<double>(r.cost.total_macs()) / static_cast<double>(dense.total_macs());
    csv << v << ',' << format_double(r.accuracy) << ',' << format_double(r.recall.value_or(0.0)) << ','
        << r.cost.total_macs() << ',' << format_double(rv) << '\n';
    acc.x.push_back(static_cast<double>(v));
    acc.y.push_back(r.accuracy);
    ratio.x.push_back(static_cast<double>(v));
    ratio.y.push_back(rv);
    log << name << '=' << v << "  accuracy " << pct(r.accuracy) << "  cost/dense " << fixed3(rv) << '\n';
  }
  const ChartSpec spec{"Skimming: accuracy and cost vs " + name, name, "fraction", 640.0, 400.0};
  write_text(paths.root / ("sweep_" + name + ".csv"), csv.str());
  write_text(paths.root / ("curve_" + name + ".svg"), line_chart_svg(spec, {acc, ratio}));
  return csv.str();
}

bool cmd_gradcheck(const ExperimentConfig& cfg, const std::vector<std::string>& modules, std::ostream& log) {
  std::vector<ModuleCheck> checks;
  for (const auto& m : modules.empty() ? gradcheck_modules() : modules) {
    checks.push_back(run_gradcheck(cfg, m));
    const auto& r = checks.back().report;
    log << std::left << std::setw(14) << m << " max rel err " << format_double(r.max_rel_error) << " over "
        << r.entries_checked << " entries  " << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  write_text(RunPaths(cfg.output_dir).root / "gradcheck.json", gradcheck_report_json(checks));
  return std::all_of(checks.begin(), checks.end(), [](const ModuleCheck& c) { return c.report.passed; });
}

std::string error_json(const std::string& category, const std::string& message, int exit_code) {
  return nlohmann::json{{"error", {{"category", category}, {"message", message}, {"exit_code", exit_code}}}}.dump();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SkimNet: audio-visual skimming of untrimmed videos"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string axis_name;
  std::vector<std::string> modules;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "generate the synthetic dataset"},
      {"distill", "train the teacher and distil the image-audio student"},
      {"train-skim", "train the skimmer (and the LSTM baseline)"},
      {"eval", "evaluate strategies and write reports"},
      {"sweep", "accuracy/cost curve over t_stop or subsample_factor"},
      {"gradcheck", "finite-difference gradient checks of every module"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the top-level seed");
    sub->add_option("--out", out_dir, "override the output directory");
    if (name == "sweep") sub->add_option("--axis", axis_name, "t_stop or subsample_factor (default: eval.sweep_axis)");
    if (name == "gradcheck") sub->add_option("--module", modules, "restrict to these modules");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = category_exit_code(ErrorCategory::kConfig);
    err << error_json(std::string(category_name(ErrorCategory::kConfig)), e.what(), code) << '\n';
    return code;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg =
        resolve_config(config_path, seed, out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt);
    out << "seed: " << cfg.seed << '\n';
    prepare_output(cfg);
    if (command == "gen") cmd_gen(cfg, out);
    else if (command == "distill") cmd_distill(cfg, out);
    else if (command == "train-skim") cmd_trainskim(cfg, out);
    else if (command == "eval") cmd_eval(cfg, out);
    else if (command == "sweep") cmd_sweep(cfg, axis_name.empty() ? cfg.eval.sweep_axis : parse_sweep_axis(axis_name), out);
    else if (command == "gradcheck" && !cmd_gradcheck(cfg, modules, out)) {
      throw NumericError("gradient check failed; see gradcheck.json");
    }
    return 0;
  } catch (const Error& e) {
    const int code = category_exit_code(e.category());
    err << error_json(std::string(category_name(e.category())), e.what(), code) << '\n';
    return code;
  } catch (const fs::filesystem_error& e) {
    const int code = category_exit_code(ErrorCategory::kIo);
    err << error_json(std::string(category_name(ErrorCategory::kIo)), e.what(), code) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << error_json("internal_error", e.what(), 1) << '\n';
    return 1;
  }
}

}  // namespace skimnet::cli
