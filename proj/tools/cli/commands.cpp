/* Copyright 2026 The gramscan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gramscan/baselines.hpp"
#include "gramscan/error.hpp"
#include "gramscan/gramian.hpp"
#include "gramscan/parallel.hpp"
#include "gramscan/pipeline.hpp"
#include "gramscan/report.hpp"
#include "gramscan/store_io.hpp"
#include "gramscan/synthgen.hpp"

namespace gramscan::cli {
namespace {

using nlohmann::json;

enum class Format { kJson, kCsv };

struct Options {
  std::string input;
  std::string stats;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string format = "json";
  bool no_timestamp = false;

  int order_bound = kDefaultOrderBound;
  double scale_k = kDefaultScaleK;
  double percentile = kDefaultPercentile;
  unsigned iterations = kDefaultBootstrapIterations;
  bool global_threshold = false;

  std::string kernel = "gaussian";
  double beta = 0.0;
  double lambda_p = kDefaultLambda;
  double lambda_q = kDefaultLambda;

  std::string scenario = "S2";
  std::uint32_t classes = 10;
  std::uint32_t samples = 500;
  std::uint32_t channels = 16;
  std::uint32_t spatial = 64;
  double poison_fraction = 0.1;
  std::uint32_t target = 0;
  std::uint32_t stream = 0;
  bool reference = false;

  std::string partition = "deviation";
  int max_order = 9;
  unsigned repeats = 3;
};

Format format_of(const Options& o) {
  if (o.format == "json") return Format::kJson;
  if (o.format == "csv") return Format::kCsv;
  throw Error(ErrorKind::kInvalidInput, "unknown format '" + o.format + "'");
}

unsigned thread_count(const Options& o) {
  return o.threads == 0 ? default_parallelism() : o.threads;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void stamp(json& report, const Options& o) {
  if (!o.no_timestamp) report["generated_at"] = utc_now();
}

// Reports go to --out when given, else to the command's stdout stream.
class Sink {
 public:
  Sink(const Options& o, std::ostream& fallback) : path_(o.out), fallback_(fallback) {}
  std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }
  void commit() {
    if (path_.empty()) return;
    const std::string text = buffer_.str();
    write_file_atomic(path_, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                       text.size()));
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

RmmdConfig rmmd_config(const Options& o) {
  RmmdConfig c;
  c.kernel.kind = parse_kernel_kind(o.kernel);
  if (o.beta > 0.0) c.kernel.bandwidth_beta = o.beta;
  c.lambda_p = o.lambda_p;
  c.lambda_q = o.lambda_q;
  if (!(c.lambda_p >= 0.0) || !(c.lambda_q >= 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "lambda values must be >= 0");
  }
  return c;
}

json threshold_json(const std::optional<Threshold>& t) {
  if (!t) return nullptr;
  json j{{"value", t->value},
         {"percentile", t->percentile},
         {"iterations", t->iterations},
         {"per_class", t->per_class},
         {"seed", t->seed}};
  if (t->per_class) {
    json per = json::object();
    for (const auto& [id, v] : t->class_values) per[std::to_string(id)] = v;
    j["class_values"] = per;
  }
  return j;
}

void require_same_shape(const Dataset& data, const StatsFile& stats) {
  if (data.size() > 0 && data.n_channels != stats.n_channels) {
    throw Error(ErrorKind::kValidation, "dump has " + std::to_string(data.n_channels) +
                                            " channels but statistics were fitted on " +
                                            std::to_string(stats.n_channels));
  }
}

json scoring_config(const StatsFile& stats, const Options& o, const std::string& command) {
  return json{{"command", command},
              {"input", o.input},
              {"stats", o.stats},
              {"order_bound", stats.order_bound},
              {"scale_k", stats.scale_k},
              {"n_channels", stats.n_channels},
              {"threshold", threshold_json(stats.threshold)},
              {"threads", thread_count(o)},
              {"seed", o.seed},
              {"format", o.format}};
}

int cmd_fit(const Options& o, std::ostream& out) {
  const Dataset clean = read_dump(o.input);
  PipelineConfig cfg;
  cfg.order_bound = o.order_bound;
  cfg.scale_k = o.scale_k;
  cfg.percentile = o.percentile;
  cfg.iterations = o.iterations;
  cfg.per_class_threshold = !o.global_threshold;
  cfg.seed = o.seed;
  cfg.threads = thread_count(o);
  const StatsFile stats = fit_statistics(clean, cfg);
  write_stats(stats, o.out);

  json report{{"schema_version", kReportSchemaVersion},
              {"report", "fit"},
              {"n_classes", stats.classes.size()},
              {"n_samples", clean.size()},
              {"dimensions", gramian_length(stats.n_channels, stats.order_bound)},
              {"threshold", threshold_json(stats.threshold)},
              {"config",
               {{"command", "fit"},
                {"input", o.input},
                {"out", o.out},
                {"order_bound", cfg.order_bound},
                {"scale_k", cfg.scale_k},
                {"percentile", cfg.percentile},
                {"iterations", cfg.iterations},
                {"per_class_threshold", cfg.per_class_threshold},
                {"seed", cfg.seed},
                {"threads", cfg.threads}}}};
  stamp(report, o);
  out << report.dump(2) << '\n';
  return kExitClean;
}

int cmd_score(const Options& o, std::ostream& out) {
  const Format format = format_of(o);
  const Dataset data = read_dump(o.input);
  const StatsFile stats = read_stats(o.stats);
  require_same_shape(data, stats);
  const unsigned threads = thread_count(o);
  const auto gramians = compute_gramians(data, static_cast<int>(stats.order_bound), threads);
  const auto reports = score_gramians(gramians, data.labels, stats, threads);

  json header{{"schema_version", kReportSchemaVersion},
              {"report", "score"},
              {"n_samples", data.size()},
              {"config", scoring_config(stats, o, "score")}};
  stamp(header, o);

  Sink sink(o, out);
  std::ostream& s = sink.stream();
  bool any = false;
  if (format == Format::kJson) {
    s << header.dump() << '\n';
    for (const auto& r : reports) {
      s << deviation_record(r).dump() << '\n';
      any = any || r.flagged;
    }
  } else {
    s << "# " << header.dump() << '\n' << "index,class,deviation,flagged\n";
    for (const auto& r : reports) {
      s << r.sample_index << ',' << r.predicted_class << ',' << csv_number(r.deviation) << ','
        << (r.flagged ? 1 : 0) << '\n';
      any = any || r.flagged;
    }
  }
  sink.commit();
  return any ? kExitDetected : kExitClean;
}

void write_scan(const ScanReport& report, json j, Format format, const std::string& statistic,
                const Options& o, std::ostream& out) {
  stamp(j, o);
  Sink sink(o, out);
  std::ostream& s = sink.stream();
  if (format == Format::kJson) {
    s << j.dump(2) << '\n';
  } else {
    const std::string index_name = statistic == "R_t" ? "R_star" : statistic + "_star";
    json meta = j;
    meta.erase("classes");
    s << "# " << meta.dump() << '\n'
      << "class_id," << statistic << ',' << index_name << ",infected,n_clean,n_suspect\n";
    for (const auto& c : report.per_class) {
      s << c.class_id << ',' << csv_number(c.statistic) << ',' << csv_number(c.anomaly_index)
        << ',' << (c.infected ? 1 : 0) << ',' << c.n_clean << ',' << c.n_suspect << '\n';
    }
  }
  sink.commit();
}

int cmd_scan(const Options& o, std::ostream& out) {
  const Format format = format_of(o);
  const RmmdConfig rmmd = rmmd_config(o);
  const Dataset data = read_dump(o.input);
  const StatsFile stats = read_stats(o.stats);
  require_same_shape(data, stats);
  const unsigned threads = thread_count(o);
  const auto gramians = compute_gramians(data, static_cast<int>(stats.order_bound), threads);
  const auto reports = score_gramians(gramians, data.labels, stats, threads);
  const ScanReport scan = scan_gramians(gramians, data.labels, reports, rmmd, threads);

  json config = scoring_config(stats, o, "scan");
  config["rmmd"] = rmmd_config_json(rmmd);
  write_scan(scan, scan_report_json(scan, "scan", "R_t", config), format, "R_t", o, out);
  return scan.infected_classes().empty() ? kExitClean : kExitDetected;
}

int cmd_baseline(const Options& o, std::ostream& out) {
  const Format format = format_of(o);
  const Dataset data = read_dump(o.input);
  std::vector<std::uint8_t> suspect;
  json config{{"command", "baseline"},
              {"input", o.input},
              {"partition", o.partition},
              {"representation", "channel_mean"},
              {"format", o.format}};
  if (o.partition == "truth") {
    if (!data.poison) {
      throw Error(ErrorKind::kInvalidInput, "--partition truth needs a dump with poison bits");
    }
    suspect = *data.poison;
  } else if (o.partition == "deviation") {
    if (o.stats.empty()) {
      throw Error(ErrorKind::kInvalidInput, "--partition deviation needs --stats");
    }
    const StatsFile stats = read_stats(o.stats);
    require_same_shape(data, stats);
    const unsigned threads = thread_count(o);
    const auto gramians = compute_gramians(data, static_cast<int>(stats.order_bound), threads);
    suspect = flags_of(score_gramians(gramians, data.labels, stats, threads));
    config["stats"] = o.stats;
    config["order_bound"] = stats.order_bound;
    config["threshold"] = threshold_json(stats.threshold);
  } else {
    throw Error(ErrorKind::kInvalidInput, "unknown partition '" + o.partition + "'");
  }
  const ScanReport scan = baseline_scan(data, suspect);
  write_scan(scan, scan_report_json(scan, "baseline", "L", config), format, "L", o, out);
  return scan.infected_classes().empty() ? kExitClean : kExitDetected;
}

int cmd_synth(const Options& o, std::ostream& out, bool samples_given) {
  ScenarioSpec spec;
  spec.scenario = parse_scenario(o.scenario);
  spec.n_classes = o.classes;
  spec.samples_per_class = o.samples;
  spec.n_channels = o.channels;
  spec.spatial = o.spatial;
  spec.poison_fraction = o.poison_fraction;
  spec.target_class = o.target;
  spec.seed = o.seed;
  spec.stream = o.stream;
  spec.validate();
  if (o.reference) {
    spec = clean_reference(spec, samples_given ? o.samples : kDefaultReferenceSamples);
  }
  const Dataset data = generate(spec);
  write_dump(data, o.out);

  std::size_t n_poison = 0;
  if (data.poison) n_poison = std::count(data.poison->begin(), data.poison->end(), 1);
  json report{{"schema_version", kReportSchemaVersion},
              {"report", "synth"},
              {"n_samples", data.size()},
              {"n_poison", n_poison},
              {"config",
               {{"command", "synth"},
                {"out", o.out},
                {"scenario", to_string(spec.scenario)},
                {"n_classes", spec.n_classes},
                {"samples_per_class", spec.samples_per_class},
                {"n_channels", spec.n_channels},
                {"spatial", spec.spatial},
                {"poison_fraction", spec.poison_fraction},
                {"target_class", spec.target_class},
                {"seed", spec.seed},
                {"stream", spec.stream},
                {"reference", o.reference}}}};
  stamp(report, o);
  out << report.dump(2) << '\n';
  return kExitClean;
}

// Mean single-thread cost of Gramian extraction plus deviation scoring, per
// sample, for every order 1..max_order. Statistics are fitted on the dump.
int cmd_bench(const Options& o, std::ostream& out) {
  const Format format = format_of(o);
  if (o.max_order < 1 || o.max_order > 9) {
    throw Error(ErrorKind::kInvalidOrder, "--max-order must be in 1..9");
  }
  if (o.repeats == 0) throw Error(ErrorKind::kInvalidInput, "--repeats must be positive");
  const Dataset data = read_dump(o.input);
  if (data.size() == 0) throw Error(ErrorKind::kInsufficientData, "bench needs samples");

  std::vector<double> latency_us;
  std::vector<std::size_t> dims;
  for (int p = 1; p <= o.max_order; ++p) {
    const ClassGramians groups = group_by_class(compute_gramians(data, p, thread_count(o)),
                                                data.labels);
    std::map<ClassId, ClassStats> stats;
    for (const auto& [id, g] : groups) stats.emplace(id, fit_class_stats(g, id, o.scale_k));
    Threshold threshold;
    threshold.per_class = false;

    double best = std::numeric_limits<double>::infinity();
    double sink = 0.0;
    for (unsigned r = 0; r < o.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const GramianVector g = gramian_vector(data.tensors[i], p);
        sink += score_sample(g, i, stats.at(data.labels[i]), threshold).deviation;
      }
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    if (!(sink >= 0.0)) throw Error(ErrorKind::kNumerical, "non-finite deviation in bench");
    latency_us.push_back(best / static_cast<double>(data.size()));
    dims.push_back(gramian_length(data.n_channels, p));
  }
  bool increasing = true;
  for (std::size_t i = 1; i < latency_us.size(); ++i) {
    increasing = increasing && latency_us[i] > latency_us[i - 1];
  }

  json config{{"command", "bench"},
              {"input", o.input},
              {"max_order", o.max_order},
              {"repeats", o.repeats},
              {"scale_k", o.scale_k},
              {"threads", 1},
              {"format", o.format}};
  Sink sink(o, out);
  std::ostream& s = sink.stream();
  if (format == Format::kJson) {
    json rows = json::array();
    for (std::size_t i = 0; i < latency_us.size(); ++i) {
      rows.push_back({{"order", i + 1}, {"dimensions", dims[i]}, {"latency_us", latency_us[i]}});
    }
    json report{{"schema_version", kReportSchemaVersion},
                {"report", "bench"},
                {"n_samples", data.size()},
                {"orders", rows},
                {"strictly_increasing", increasing},
                {"config", config}};
    stamp(report, o);
    s << report.dump(2) << '\n';
  } else {
    s << "# " << json{{"report", "bench"}, {"config", config}}.dump() << '\n'
      << "order,dimensions,latency_us\n";
    for (std::size_t i = 0; i < latency_us.size(); ++i) {
      s << i + 1 << ',' << dims[i] << ',' << csv_number(latency_us[i]) << '\n';
    }
  }
  sink.commit();
  return kExitClean;
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message,
                std::optional<std::uint64_t> offset = std::nullopt) {
  json e{{"kind", kind}, {"message", message}};
  if (offset) e["offset"] = *offset;
  err << json{{"error", e}}.dump() << '\n';
}

}  // namespace

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("BEATRIX_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string text(raw);
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Gramian-feature backdoor detection on activation dumps", "gramscan"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed (overrides BEATRIX_SEED)");
    sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
    sub->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--no-timestamp", o.no_timestamp, "Omit generated_at from reports");
  };
  auto rmmd_flags = [&o](CLI::App* sub) {
    sub->add_option("--kernel", o.kernel, "Kernel")->check(CLI::IsMember({"gaussian", "linear"}));
    sub->add_option("--beta", o.beta, "Gaussian bandwidth, default median heuristic")
        ->check(CLI::PositiveNumber);
    sub->add_option("--lambda-p", o.lambda_p, "Penalty on the clean subgroup");
    sub->add_option("--lambda-q", o.lambda_q, "Penalty on the suspect subgroup");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit per-class statistics and the boundary");
  fit->add_option("-i,--input", o.input, "Clean .bfd dump")->required();
  fit->add_option("-o,--out", o.out, "Output .bstat")->required();
  fit->add_option("-P,--orders", o.order_bound, "Order bound P")->check(CLI::Range(1, 9));
  fit->add_option("-k,--scale-k", o.scale_k, "Band width in MADs")->check(CLI::PositiveNumber);
  fit->add_option("--percentile", o.percentile, "Boundary percentile")
      ->check(CLI::Range(0.0, 100.0));
  fit->add_option("-T,--iterations", o.iterations, "Bootstrap iterations")
      ->check(CLI::PositiveNumber);
  fit->add_flag("--global-threshold", o.global_threshold, "One pooled boundary for all classes");
  common(fit);

  CLI::App* score = app.add_subcommand("score", "Per-sample deviation scores");
  score->add_option("-i,--input", o.input, "Input .bfd dump")->required();
  score->add_option("-s,--stats", o.stats, "Fitted .bstat")->required();
  score->add_option("-o,--out", o.out, "Write the report here instead of stdout");
  common(score);

  CLI::App* scan = app.add_subcommand("scan", "Per-class RMMD scan");
  scan->add_option("-i,--input", o.input, "Input .bfd dump")->required();
  scan->add_option("-s,--stats", o.stats, "Fitted .bstat")->required();
  scan->add_option("-o,--out", o.out, "Write the report here instead of stdout");
  rmmd_flags(scan);
  common(scan);

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic scenario dump");
  synth->add_option("-o,--out", o.out, "Output .bfd")->required();
  synth->add_option("--scenario", o.scenario, "S1, S2, S3 or S4");
  synth->add_option("--classes", o.classes, "Number of classes");
  CLI::Option* samples_opt = synth->add_option("--samples", o.samples, "Samples per class");
  synth->add_option("--channels", o.channels, "Channels n");
  synth->add_option("--spatial", o.spatial, "Spatial size m");
  synth->add_option("--poison-fraction", o.poison_fraction, "Poisoned share of a class");
  synth->add_option("--target", o.target, "Target class");
  synth->add_option("--stream", o.stream, "Sample stream");
  synth->add_flag("--reference", o.reference,
                  "Write the clean reference set (next stream, no poison)");
  common(synth);

  CLI::App* baseline = app.add_subcommand("baseline", "Likelihood-ratio baseline scan");
  baseline->add_option("-i,--input", o.input, "Input .bfd dump")->required();
  baseline->add_option("-s,--stats", o.stats, "Fitted .bstat, for --partition deviation");
  baseline->add_option("--partition", o.partition, "Subgroup source")
      ->check(CLI::IsMember({"deviation", "truth"}));
  baseline->add_option("-o,--out", o.out, "Write the report here instead of stdout");
  common(baseline);

  CLI::App* bench = app.add_subcommand("bench", "Per-order scoring latency");
  bench->add_option("-i,--input", o.input, "Input .bfd dump")->required();
  bench->add_option("--max-order", o.max_order, "Largest order timed");
  bench->add_option("--repeats", o.repeats, "Timing repeats, the fastest is kept");
  bench->add_option("-k,--scale-k", o.scale_k, "Band width in MADs")->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", o.out, "Write the report here instead of stdout");
  common(bench);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitClean;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitOperational;
  }

  // --seed beats BEATRIX_SEED, which beats the default of 0.
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") == 0) {
    if (const auto s = env_seed()) o.seed = *s;
  }

  try {
    if (chosen == fit) return cmd_fit(o, out);
    if (chosen == score) return cmd_score(o, out);
    if (chosen == scan) return cmd_scan(o, out);
    if (chosen == synth) return cmd_synth(o, out, samples_opt->count() > 0);
    if (chosen == baseline) return cmd_baseline(o, out);
    if (chosen == bench) return cmd_bench(o, out);
  } catch (const Error& e) {
    emit_error(err, std::string(to_string(e.kind())), e.what(), e.offset());
    return kExitOperational;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return kExitOperational;
  }
  return kExitOperational;
}

}  // namespace gramscan::cli
