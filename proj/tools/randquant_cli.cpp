// randquant: closed forms, Monte Carlo verification, dithered-bank and
// unequal-step analysis for randomly designed scalar quantizers.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "randquant/check.hpp"
#include "randquant/closed_form.hpp"
#include "randquant/dithered.hpp"
#include "randquant/montecarlo.hpp"
#include "randquant/version.hpp"

namespace cf = randquant::closed_form;
namespace mc = randquant::montecarlo;
namespace dq = randquant::dithered;
namespace ck = randquant::check;

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStatFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kSchemaVersion = 1;

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string output;
  CLI::Option* seed_option = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts, const char* default_format) {
  opts.format = default_format;
  cmd->fallthrough();  // app-level options like --config may follow the subcommand
  opts.seed_option =
      cmd->add_option("--seed", opts.seed, "Random seed; falls back to $RANDQUANT_SEED");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output", opts.output, "Write to PATH instead of stdout");
}

// Flags beat the environment variable, which beats the built-in default.
void resolve_seed(CommonOpts& opts) {
  if (opts.seed_option && opts.seed_option->count() > 0) return;
  const char* env = std::getenv("RANDQUANT_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw CLI::ValidationError("RANDQUANT_SEED", "must be an unsigned integer");
  }
  opts.seed = value;
}

ordered_json make_manifest_body(const std::string& command, const ordered_json& params,
                                std::uint64_t checksum) {
  ordered_json manifest;
  manifest["version"] = randquant::kVersion;
  manifest["command"] = command;
  manifest["params"] = params;
  manifest["timestamp"] = timestamp_utc();
  manifest["payload_checksum"] = hex64(checksum);
  return manifest;
}

int write_payload(const CommonOpts& opts, const std::string& command,
                  const ordered_json& params, const std::string& payload,
                  bool manifest_sidecar) {
  if (opts.output.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return kExitOk;
  }
  {
    std::ofstream out(opts.output, std::ios::binary);
    if (!out) throw CLI::ValidationError("--output", "cannot open " + opts.output);
    out << payload;
  }
  if (manifest_sidecar) {
    std::ofstream manifest_out(opts.output + ".manifest.json", std::ios::binary);
    manifest_out << make_manifest_body(command, params, fnv1a(payload)).dump(2) << "\n";
  }
  return kExitOk;
}

// JSON reports carry the manifest inline; the checksum covers the document
// sans manifest, so re-runs differ only in the timestamp. CSV files get the
// manifest as a sidecar instead.
int emit_report(const CommonOpts& opts, const std::string& command,
                const ordered_json& params, ordered_json doc, const std::string& csv) {
  if (opts.format == "csv") {
    return write_payload(opts, command, params, csv, /*manifest_sidecar=*/true);
  }
  const std::uint64_t checksum = fnv1a(doc.dump());
  doc["manifest"] = make_manifest_body(command, params, checksum);
  return write_payload(opts, command, params, doc.dump(2) + "\n",
                       /*manifest_sidecar=*/false);
}

ordered_json report_json(const std::string& name, const mc::EstimateReport& report,
                         bool passed) {
  ordered_json j;
  j["name"] = name;
  j["mean"] = report.mean;
  j["std_error"] = report.std_error;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  if (report.target) j["target"] = *report.target;
  if (report.z_score) j["z_score"] = *report.z_score;
  j["passed"] = passed;
  return j;
}

std::string report_csv_row(const std::string& name, const mc::EstimateReport& report,
                           bool passed) {
  std::string row = name + ',' + g9(report.mean) + ',' + g9(report.std_error) + ',' +
                    std::to_string(report.trials) + ',' + std::to_string(report.seed) + ',';
  row += report.target ? g9(*report.target) : "";
  row += ',';
  row += report.z_score ? g9(*report.z_score) : "";
  row += ',';
  row += passed ? "1" : "0";
  row += '\n';
  return row;
}

constexpr const char* kReportCsvHeader = "name,mean,std_error,trials,seed,target,z_score,passed\n";

// ---------------------------------------------------------------------------
// table / curve / frame: streamed tabular output

class TableEmitter {
 public:
  TableEmitter(const CommonOpts& opts, std::string command, ordered_json params,
               std::string csv_header, std::vector<std::string> columns)
      : opts_(opts),
        command_(std::move(command)),
        params_(std::move(params)),
        csv_header_(std::move(csv_header)),
        columns_(std::move(columns)) {
    if (opts_.output.empty()) {
      out_ = stdout;
    } else {
      owned_ = std::fopen(opts_.output.c_str(), "wb");
      if (owned_ == nullptr) {
        throw CLI::ValidationError("--output", "cannot open " + opts_.output);
      }
      out_ = owned_;
    }
    if (json()) {
      ordered_json head;
      head["schema_version"] = kSchemaVersion;
      head["command"] = command_;
      head["params"] = params_;
      head["columns"] = columns_;
      std::string text = head.dump(2);
      text.erase(text.size() - 2);  // drop the closing "\n}"
      text += ",\n  \"rows\": [\n";
      raw(text);
    } else {
      payload(csv_header_);
    }
  }

  ~TableEmitter() {
    if (owned_ != nullptr) std::fclose(owned_);
  }

  void row(const std::vector<std::string>& cells) {
    std::string line;
    if (json()) {
      line = first_row_ ? "    [" : ",\n    [";
      first_row_ = false;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
      }
      line += ']';
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
      }
      line += '\n';
    }
    payload(line);
  }

  int finish() {
    if (json()) {
      raw("\n  ],\n");
      std::string tail = "  \"manifest\": ";
      std::string manifest = make_manifest_body(command_, params_, checksum_).dump(2);
      // Re-indent the nested object by two spaces.
      std::string indented;
      for (char c : manifest) {
        indented += c;
        if (c == '\n') indented += "  ";
      }
      tail += indented + "\n}\n";
      raw(tail);
    } else if (owned_ != nullptr) {
      std::fclose(owned_);
      owned_ = nullptr;
      std::ofstream manifest_out(opts_.output + ".manifest.json", std::ios::binary);
      manifest_out << make_manifest_body(command_, params_, checksum_).dump(2) << "\n";
    }
    return kExitOk;
  }

 private:
  bool json() const { return opts_.format == "json"; }

  void raw(std::string_view text) { std::fwrite(text.data(), 1, text.size(), out_); }

  void payload(std::string_view text) {
    checksum_ = fnv1a(text, checksum_);
    raw(text);
  }

  const CommonOpts& opts_;
  std::string command_;
  ordered_json params_;
  std::string csv_header_;
  std::vector<std::string> columns_;
  std::FILE* out_ = nullptr;
  std::FILE* owned_ = nullptr;
  std::uint64_t checksum_ = 0xCBF29CE484222325ULL;
  bool first_row_ = true;
};

// ---------------------------------------------------------------------------
// subcommand handlers

int run_table(const CommonOpts& opts, std::uint64_t k_min, std::uint64_t k_max) {
  if (!(k_min >= 1 && k_min <= k_max && k_max <= 100'000'000ULL)) {
    throw CLI::ValidationError("--kmin/--kmax", "need 1 <= kmin <= kmax <= 1e8");
  }
  ordered_json params{{"k_min", k_min}, {"k_max", k_max}, {"seed", opts.seed}};
  TableEmitter table(opts, "table", params, "K,D,R_bits,penalty_fixed,penalty_entropy\n",
                     {"K", "D", "R_bits", "penalty_fixed", "penalty_entropy"});
  for (std::uint64_t k = k_min; k <= k_max; ++k) {
    table.row({std::to_string(k), g9(cf::distortion_random(k)), g9(cf::rate_random(k)),
               g9(cf::penalty_fixed_rate(k)), g9(cf::penalty_entropy_constrained(k))});
  }
  return table.finish();
}

int run_curve(const CommonOpts& opts, std::uint64_t k_max) {
  if (!(k_max >= 1 && k_max <= 100'000'000ULL)) {
    throw CLI::ValidationError("--kmax", "need 1 <= kmax <= 1e8");
  }
  const std::string asymptote = g9(cf::asymptotic_penalty());
  ordered_json params{{"k_max", k_max}, {"seed", opts.seed}};
  TableEmitter table(opts, "curve", params, "K,penalty_fixed,penalty_entropy,asymptote\n",
                     {"K", "penalty_fixed", "penalty_entropy", "asymptote"});
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    table.row({std::to_string(k), g9(cf::penalty_fixed_rate(k)),
               g9(cf::penalty_entropy_constrained(k)), asymptote});
  }
  return table.finish();
}

int run_frame(const CommonOpts& opts, unsigned steps, double delta) {
  if (steps < 2) throw CLI::ValidationError("--steps", "need at least 2 grid points");
  if (!(delta > 0.0)) throw CLI::ValidationError("--delta", "must be positive");
  ordered_json params{{"steps", steps}, {"delta", delta}, {"seed", opts.seed}};
  TableEmitter table(opts, "frame", params, "theta,D_theta,R_theta,q_theta\n",
                     {"theta", "D_theta", "R_theta", "q_theta"});
  const double quarter_pi = std::numbers::pi / 4.0;
  for (unsigned i = 1; i <= steps; ++i) {
    const double theta = quarter_pi * i / steps;
    table.row({g9(theta), g9(cf::frame_distortion(theta, delta)),
               g9(cf::frame_rate(theta, delta)), g9(cf::q_theta(theta))});
  }
  return table.finish();
}

struct McOptions {
  std::uint64_t levels = 2;
  std::uint64_t trials = 100'000;
  unsigned threads = 1;
  std::string mode = "rao_blackwell";
  std::uint64_t raw_samples = 1;
  unsigned moment = 2;
  unsigned bins = 20;
  double delta0 = 0.0078125;   // 2^-7
  double delta1 = 0.015625;    // 2^-6
};

mc::TrialConfig to_trial_config(const McOptions& options, const CommonOpts& common) {
  mc::TrialConfig config;
  config.levels = options.levels;
  config.trials = options.trials;
  config.seed = common.seed;
  config.threads = options.threads;
  config.raw_samples_per_trial = options.raw_samples;
  config.mode = (options.mode == "raw" || options.mode == "raw_sampling")
                    ? mc::SamplingMode::raw_sampling
                    : mc::SamplingMode::rao_blackwell;
  return config;
}

int emit_single_report(const CommonOpts& opts, const std::string& subtarget,
                       const ordered_json& params, const mc::EstimateReport& report) {
  const bool passed = report.within(4.0);
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "mc";
  doc["subtarget"] = subtarget;
  doc["params"] = params;
  doc["reports"] = ordered_json::array({report_json(subtarget, report, passed)});
  doc["passed"] = passed;
  std::string csv = kReportCsvHeader + report_csv_row(subtarget, report, passed);
  const int rc = emit_report(opts, "mc " + subtarget, params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  if (!passed) {
    std::cerr << "FAIL: " << subtarget << " deviates from its target (|z| > 4)\n";
    return kExitStatFailure;
  }
  return kExitOk;
}

int run_mc_spacing(const CommonOpts& opts, const McOptions& options) {
  const auto config = to_trial_config(options, opts);
  const auto moment = mc::estimate_spacing_moment(config, options.moment);
  const auto histogram = mc::spacing_histogram_test(config, options.bins);
  const bool moment_ok = moment.within(4.0);
  const bool passed = moment_ok && histogram.passed;

  ordered_json params{{"K", options.levels},          {"trials", options.trials},
                      {"seed", opts.seed},            {"mode", options.mode},
                      {"moment", options.moment},     {"bins", options.bins}};
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "mc";
  doc["subtarget"] = "spacing";
  doc["params"] = params;
  doc["reports"] = ordered_json::array(
      {report_json("spacing_moment_p" + std::to_string(options.moment), moment, moment_ok)});
  ordered_json chi;
  chi["statistic"] = histogram.statistic;
  chi["dof"] = histogram.dof;
  chi["critical_0999"] = histogram.critical_value;
  chi["p_value"] = histogram.p_value;
  chi["requested_bins"] = histogram.requested_bins;
  chi["merged_bins"] = histogram.merged_bins;
  chi["samples"] = histogram.samples;
  chi["passed"] = histogram.passed;
  doc["histogram"] = chi;
  doc["passed"] = passed;

  std::string csv = kReportCsvHeader;
  csv += report_csv_row("spacing_moment_p" + std::to_string(options.moment), moment, moment_ok);
  csv += "spacing_histogram," + g9(histogram.statistic) + ',' + g9(histogram.critical_value) +
         ',' + std::to_string(histogram.samples) + ',' + std::to_string(opts.seed) + ',' +
         std::to_string(histogram.dof) + ',' + g9(histogram.p_value) + ',' +
         (histogram.passed ? "1" : "0") + '\n';

  const int rc = emit_report(opts, "mc spacing", params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  if (!passed) {
    std::cerr << "FAIL: spacing law check (moment z or chi-square)\n";
    return kExitStatFailure;
  }
  return kExitOk;
}

int run_mc_two_step(const CommonOpts& opts, const McOptions& options) {
  const auto oracle = mc::two_step_oracle(options.delta0, options.delta1, options.trials,
                                          opts.seed, options.threads);
  const double d_rel = std::fabs(oracle.distortion.mean - *oracle.distortion.target) /
                       *oracle.distortion.target;
  const double r_rel = std::fabs(oracle.rate.mean - *oracle.rate.target) / *oracle.rate.target;
  const bool passed = d_rel <= 0.01 && r_rel <= 0.01;

  ordered_json params{{"delta0", options.delta0},
                      {"delta1", options.delta1},
                      {"trials", options.trials},
                      {"seed", opts.seed}};
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "mc";
  doc["subtarget"] = "two_step";
  doc["params"] = params;
  doc["reports"] = ordered_json::array({report_json("distortion", oracle.distortion, d_rel <= 0.01),
                                        report_json("rate", oracle.rate, r_rel <= 0.01)});
  doc["relative_error_distortion"] = d_rel;
  doc["relative_error_rate"] = r_rel;
  if (oracle.step_size_warning) {
    doc["warning"] = "delta1 > 0.1: outside the high-resolution regime";
  }
  doc["passed"] = passed;

  std::string csv = kReportCsvHeader;
  csv += report_csv_row("distortion", oracle.distortion, d_rel <= 0.01);
  csv += report_csv_row("rate", oracle.rate, r_rel <= 0.01);

  if (oracle.step_size_warning) {
    std::cerr << "warning: delta1 > 0.1 violates the high-resolution assumption\n";
  }
  const int rc = emit_report(opts, "mc two_step", params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  if (!passed) {
    std::cerr << "FAIL: two-step oracle deviates from the closed forms by more than 1%\n";
    return kExitStatFailure;
  }
  return kExitOk;
}

// Penalty table over K = 1..sweep_max at a fixed step size.
int run_dithered_sweep(const CommonOpts& opts, std::size_t sweep_max, double delta,
                       std::uint64_t offset_trials, unsigned threads) {
  const auto rows = dq::sweep_penalty(sweep_max, delta, offset_trials, opts.seed, threads);
  ordered_json params{{"sweep_kmax", sweep_max},
                      {"delta", delta},
                      {"offset_trials", offset_trials},
                      {"seed", opts.seed}};
  TableEmitter table(opts, "dithered", params,
                     "K,mean_D,mean_R_bits,empirical_penalty,predicted_penalty\n",
                     {"K", "mean_D", "mean_R_bits", "empirical_penalty", "predicted_penalty"});
  for (const auto& row : rows) {
    table.row({std::to_string(row.channels), g9(row.mean_distortion), g9(row.mean_rate),
               g9(row.empirical_penalty), g9(row.predicted_penalty)});
  }
  return table.finish();
}

int run_dithered(const CommonOpts& opts, std::uint64_t levels, double delta,
                 std::uint64_t offset_trials, unsigned threads) {
  if (delta > 0x1p-4) {
    std::cerr << "warning: delta > 2^-4; high-resolution predictions degrade\n";
  }
  const auto report = dq::average_random_offsets(levels, delta, offset_trials, opts.seed, threads);
  const double d_rel =
      std::fabs(report.distortion.mean - *report.distortion.target) / *report.distortion.target;
  const double r_abs = std::fabs(report.rate.mean - *report.rate.target);
  const double penalty_rel =
      std::fabs(report.empirical_penalty - report.predicted_penalty) / report.predicted_penalty;
  const bool passed = d_rel <= 0.01 && r_abs <= 0.01 && penalty_rel <= 0.02;

  ordered_json params{{"K", levels},
                      {"delta", delta},
                      {"offset_trials", offset_trials},
                      {"seed", opts.seed}};
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "dithered";
  doc["params"] = params;
  doc["reports"] = ordered_json::array({report_json("distortion", report.distortion, d_rel <= 0.01),
                                        report_json("rate", report.rate, r_abs <= 0.01)});
  doc["relative_error_distortion"] = d_rel;
  doc["absolute_error_rate_bits"] = r_abs;
  doc["empirical_penalty"] = report.empirical_penalty;
  doc["predicted_penalty"] = report.predicted_penalty;
  doc["penalty_normalization"] = "D / ((1/12) 2^{-2R}), h(X) = 0";
  if (delta > 0x1p-4) doc["warning"] = "delta > 2^-4: outside the recommended regime";
  doc["passed"] = passed;

  std::string csv = kReportCsvHeader;
  csv += report_csv_row("distortion", report.distortion, d_rel <= 0.01);
  csv += report_csv_row("rate", report.rate, r_abs <= 0.01);

  const int rc = emit_report(opts, "dithered", params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  if (!passed) {
    std::cerr << "FAIL: dithered bank deviates from the step-size laws\n";
    return kExitStatFailure;
  }
  return kExitOk;
}

int run_two_step(const CommonOpts& opts, double delta0, double delta1,
                 std::optional<double> theta, double theta_delta, std::uint64_t trials,
                 unsigned threads) {
  cf::TwoStepConfig config = theta ? cf::TwoStepConfig::from_theta(*theta, theta_delta)
                                   : cf::TwoStepConfig(delta0, delta1);
  ordered_json params{{"delta0", config.delta0},
                      {"delta1", config.delta1},
                      {"trials", trials},
                      {"seed", opts.seed}};
  if (theta) params["theta"] = *theta;

  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "two-step";
  doc["params"] = params;
  doc["distortion"] = cf::two_step_distortion(config);
  doc["rate_bits"] = cf::two_step_rate(config);
  if (theta) doc["q_theta"] = cf::q_theta(*theta);

  std::string csv = "name,value\n";
  csv += "distortion," + g9(cf::two_step_distortion(config)) + '\n';
  csv += "rate_bits," + g9(cf::two_step_rate(config)) + '\n';
  if (theta) csv += "q_theta," + g9(cf::q_theta(*theta)) + '\n';

  bool passed = true;
  if (trials > 0) {
    const auto oracle =
        mc::two_step_oracle(config.delta0, config.delta1, trials, opts.seed, threads);
    const double d_rel = std::fabs(oracle.distortion.mean - *oracle.distortion.target) /
                         *oracle.distortion.target;
    const double r_rel =
        std::fabs(oracle.rate.mean - *oracle.rate.target) / *oracle.rate.target;
    passed = d_rel <= 0.01 && r_rel <= 0.01;
    doc["reports"] =
        ordered_json::array({report_json("oracle_distortion", oracle.distortion, d_rel <= 0.01),
                             report_json("oracle_rate", oracle.rate, r_rel <= 0.01)});
    if (oracle.step_size_warning) {
      doc["warning"] = "delta1 > 0.1: outside the high-resolution regime";
      std::cerr << "warning: delta1 > 0.1 violates the high-resolution assumption\n";
    }
    doc["passed"] = passed;
    csv += report_csv_row("oracle_distortion", oracle.distortion, d_rel <= 0.01);
    csv += report_csv_row("oracle_rate", oracle.rate, r_rel <= 0.01);
  }

  const int rc = emit_report(opts, "two-step", params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  if (!passed) {
    std::cerr << "FAIL: two-step oracle deviates from the closed forms by more than 1%\n";
    return kExitStatFailure;
  }
  return kExitOk;
}

int run_check(const CommonOpts& opts, const ck::CheckOptions& options) {
  const auto results = ck::run_all(options);
  std::size_t passed = 0;
  for (const auto& r : results) {
    std::cerr << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ": " << r.detail << "\n";
    if (r.passed) ++passed;
  }
  std::cerr << passed << "/" << results.size() << " invariants passed\n";

  ordered_json params{{"seed", options.seed},
                      {"harmonic_max", options.harmonic_scan_max},
                      {"trials", options.mc_trials},
                      {"offset_trials", options.offset_trials}};
  if (options.gamma_override) params["mutate_gamma"] = *options.gamma_override;

  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "check";
  doc["params"] = params;
  ordered_json rows = ordered_json::array();
  std::string csv = "id,passed,detail\n";
  for (const auto& r : results) {
    rows.push_back({{"id", r.id}, {"passed", r.passed}, {"detail", r.detail}});
    std::string detail = r.detail;
    for (char& c : detail) {
      if (c == ',') c = ';';
    }
    csv += r.id + ',' + (r.passed ? "1" : "0") + ',' + detail + '\n';
  }
  doc["results"] = rows;
  doc["passed"] = passed == results.size();

  const int rc = emit_report(opts, "check", params, std::move(doc), csv);
  if (rc != kExitOk) return rc;
  return passed == results.size() ? kExitOk : kExitStatFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distortion-rate analysis of randomly designed scalar quantizers"};
  app.set_config("--config", "", "Read option defaults from a TOML-style file");
  app.require_subcommand(1);
  app.set_version_flag("--version", randquant::kVersion);

  // table
  CommonOpts table_opts;
  std::uint64_t k_min = 1;
  std::uint64_t k_max = 64;
  auto* table_cmd = app.add_subcommand("table", "Closed-form D/R/penalty table over K");
  table_cmd->add_option("--kmin", k_min, "Smallest K (default 1)");
  table_cmd->add_option("--kmax", k_max, "Largest K (default 64)");
  add_common(table_cmd, table_opts, "csv");

  // curve
  CommonOpts curve_opts;
  std::uint64_t curve_k_max = 10'000;
  auto* curve_cmd = app.add_subcommand("curve", "Penalty-versus-K curve with its asymptote");
  curve_cmd->add_option("--kmax", curve_k_max, "Largest K (default 1e4)");
  add_common(curve_cmd, curve_opts, "csv");

  // mc
  CommonOpts mc_opts;
  McOptions mc_params;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo verification of the closed forms");
  mc_cmd->require_subcommand(1);
  add_common(mc_cmd, mc_opts, "json");
  auto add_mc_sampling = [&](CLI::App* sub, bool with_levels) {
    sub->fallthrough();  // --seed / --format / --output live on the parent
    if (with_levels) sub->add_option("--K", mc_params.levels, "Number of cells K");
    sub->add_option("--trials", mc_params.trials, "Trial count (default 1e5)");
    sub->add_option("--threads", mc_params.threads, "Worker threads (default 1)");
  };
  auto* mc_distortion = mc_cmd->add_subcommand("distortion", "Distortion vs 1/(2(K+1)(K+2))");
  add_mc_sampling(mc_distortion, true);
  mc_distortion->add_option("--mode", mc_params.mode, "rao_blackwell|raw")
      ->check(CLI::IsMember({"rao_blackwell", "rb", "raw", "raw_sampling"}));
  mc_distortion->add_option("--raw-samples", mc_params.raw_samples,
                            "Source samples per trial in raw mode");
  auto* mc_rate = mc_cmd->add_subcommand("rate", "Index entropy vs (H_K - 1)/ln 2");
  add_mc_sampling(mc_rate, true);
  mc_rate->add_option("--mode", mc_params.mode, "rao_blackwell|raw")
      ->check(CLI::IsMember({"rao_blackwell", "rb", "raw", "raw_sampling"}));
  mc_rate->add_option("--raw-samples", mc_params.raw_samples,
                      "Source samples per trial in raw mode");
  auto* mc_spacing =
      mc_cmd->add_subcommand("spacing", "Length-biased cell-length law: moment + chi-square");
  add_mc_sampling(mc_spacing, true);
  mc_spacing->add_option("--moment", mc_params.moment, "Moment order p (default 2)");
  mc_spacing->add_option("--bins", mc_params.bins, "Histogram bins (default 20)");
  auto* mc_two_step = mc_cmd->add_subcommand("two-step", "Unequal-step oracle vs closed forms");
  mc_two_step->alias("two_step");
  add_mc_sampling(mc_two_step, false);
  mc_two_step->add_option("--delta0", mc_params.delta0, "Finer step size");
  mc_two_step->add_option("--delta1", mc_params.delta1, "Coarser step size");

  // dithered
  CommonOpts dithered_opts;
  std::uint64_t dithered_levels = 2;
  double dithered_delta = 0x1p-8;
  std::uint64_t dithered_trials = 10'000;
  unsigned dithered_threads = 1;
  std::size_t dithered_sweep = 0;
  auto* dithered_cmd =
      app.add_subcommand("dithered", "Random-offset quantizer bank vs the step-size laws");
  dithered_cmd->add_option("--K", dithered_levels, "Number of channels");
  dithered_cmd->add_option("--delta", dithered_delta, "Common step size (default 2^-8)");
  dithered_cmd->add_option("--offset-trials", dithered_trials, "Offset draws (default 1e4)");
  dithered_cmd->add_option("--threads", dithered_threads, "Worker threads");
  dithered_cmd->add_option("--sweep-kmax", dithered_sweep,
                           "Emit a penalty table for K = 1..N instead of one report");
  add_common(dithered_cmd, dithered_opts, "json");

  // two-step
  CommonOpts two_step_opts;
  double ts_delta0 = 0x1p-7;
  double ts_delta1 = 0x1p-6;
  double ts_theta = 0.0;
  double ts_theta_delta = 0x1p-8;
  std::uint64_t ts_trials = 0;
  unsigned ts_threads = 1;
  auto* two_step_cmd =
      app.add_subcommand("two-step", "Unequal step sizes: closed forms, optional oracle");
  auto* ts_d0 = two_step_cmd->add_option("--delta0", ts_delta0, "Finer step size");
  auto* ts_d1 = two_step_cmd->add_option("--delta1", ts_delta1, "Coarser step size");
  auto* ts_th = two_step_cmd->add_option("--theta", ts_theta,
                                         "Rotation angle in (0, pi/4]; implies the step pair");
  two_step_cmd->add_option("--delta", ts_theta_delta, "Component step used with --theta");
  two_step_cmd->add_option("--trials", ts_trials, "Oracle trials (0 = closed forms only)");
  two_step_cmd->add_option("--threads", ts_threads, "Worker threads");
  ts_th->excludes(ts_d0);
  ts_th->excludes(ts_d1);
  add_common(two_step_cmd, two_step_opts, "json");

  // frame
  CommonOpts frame_opts;
  unsigned frame_steps = 64;
  double frame_delta = 0x1p-8;
  auto* frame_cmd = app.add_subcommand("frame", "Rotation-angle sweep of the two-step penalty");
  frame_cmd->add_option("--steps", frame_steps, "Grid points on (0, pi/4] (default 64)");
  frame_cmd->add_option("--delta", frame_delta, "Component step size (default 2^-8)");
  add_common(frame_cmd, frame_opts, "csv");

  // check
  CommonOpts check_opts;
  ck::CheckOptions check_params;
  double mutate_gamma = 0.0;
  auto* check_cmd = app.add_subcommand("check", "Run every module invariant");
  check_cmd->add_option("--harmonic-max", check_params.harmonic_scan_max,
                        "Harmonic bound scan limit (default 1e6)");
  check_cmd->add_option("--trials", check_params.mc_trials, "Monte Carlo trials (default 1e5)");
  check_cmd->add_option("--offset-trials", check_params.offset_trials,
                        "Dithered offset draws (default 1e4)");
  check_cmd->add_option("--threads", check_params.threads, "Worker threads");
  auto* mutate_opt = check_cmd->add_option(
      "--mutate-gamma", mutate_gamma, "Corrupt the Euler-Mascheroni constant (sanity check)");
  add_common(check_cmd, check_opts, "csv");

  try {
    app.parse(argc, argv);

    if (table_cmd->parsed()) {
      resolve_seed(table_opts);
      return run_table(table_opts, k_min, k_max);
    }
    if (curve_cmd->parsed()) {
      resolve_seed(curve_opts);
      return run_curve(curve_opts, curve_k_max);
    }
    if (frame_cmd->parsed()) {
      resolve_seed(frame_opts);
      return run_frame(frame_opts, frame_steps, frame_delta);
    }
    if (mc_cmd->parsed()) {
      resolve_seed(mc_opts);
      if (mc_distortion->parsed() || mc_rate->parsed()) {
        const auto config = to_trial_config(mc_params, mc_opts);
        ordered_json params{{"K", mc_params.levels},      {"trials", mc_params.trials},
                            {"seed", mc_opts.seed},       {"mode", mc_params.mode}};
        if (config.mode == mc::SamplingMode::raw_sampling) {
          params["raw_samples_per_trial"] = mc_params.raw_samples;
        }
        if (mc_distortion->parsed()) {
          return emit_single_report(mc_opts, "distortion", params,
                                    mc::estimate_distortion(config));
        }
        return emit_single_report(mc_opts, "rate", params, mc::estimate_rate(config));
      }
      if (mc_spacing->parsed()) return run_mc_spacing(mc_opts, mc_params);
      return run_mc_two_step(mc_opts, mc_params);
    }
    if (dithered_cmd->parsed()) {
      resolve_seed(dithered_opts);
      if (dithered_sweep > 0) {
        return run_dithered_sweep(dithered_opts, dithered_sweep, dithered_delta,
                                  dithered_trials, dithered_threads);
      }
      return run_dithered(dithered_opts, dithered_levels, dithered_delta, dithered_trials,
                          dithered_threads);
    }
    if (two_step_cmd->parsed()) {
      resolve_seed(two_step_opts);
      std::optional<double> theta;
      if (ts_th->count() > 0) theta = ts_theta;
      return run_two_step(two_step_opts, ts_delta0, ts_delta1, theta, ts_theta_delta,
                          ts_trials, ts_threads);
    }
    if (check_cmd->parsed()) {
      resolve_seed(check_opts);
      check_params.seed = check_opts.seed;
      if (mutate_opt->count() > 0) check_params.gamma_override = mutate_gamma;
      return run_check(check_opts, check_params);
    }
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStatFailure;
  }
}
