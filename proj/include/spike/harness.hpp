#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spike/complex_matrix.hpp"

namespace spike {

// One experiment run, fully described. `gap = 0` means the experiment's
// default (the power experiment sweeps its standard gap list). For the
// twoside experiment `r` is the query-history length and `trials` the
// number of fresh response draws.
struct ExperimentConfig {
  std::string experiment = "alignment";
  std::size_t d = 1000;
  std::size_t r = 1;
  std::vector<double> lambdas = {2.0};
  double gap = 0.0;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::string entry_law = "real-gaussian";
  std::string output_dir;
};

// Baseline configuration for each experiment name; these are the settings
// the CLI uses when no config file or flags override them.
ExperimentConfig default_config(const std::string& experiment);

// Structural validation; throws config-error naming the offending field.
void validate_config(const ExperimentConfig& cfg);

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_json_text(const ExperimentConfig& cfg);

struct TrialRecord {
  std::size_t index = 0;
  bool ok = true;
  std::string error;  // failure code when !ok
  // Insertion-ordered; names repeat across trials of one experiment.
  std::vector<std::pair<std::string, double>> metrics;
};

struct MetricSummary {
  std::string name;
  std::size_t count = 0;  // successful trials carrying the metric
  double mean = 0.0;
  double stddev = 0.0;
  double ci_half_width = 0.0;  // 1.96 * stddev / sqrt(count)
  double min = 0.0;
  double max = 0.0;
};

// Window check on a recorded number. Infinite lower/upper mean one-sided.
struct CriterionResult {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  std::vector<MetricSummary> summaries;
  std::vector<CriterionResult> criteria;
  std::size_t failed_trials = 0;
  double wall_time_s = 0.0;
  // Eigenvalues from the first trial when the experiment produces a
  // spectrum; feeds the scatter plot, not part of the JSON report.
  CVector scatter;
};

// Runs the named experiment: per-trial seeds (config.seed, trial index),
// failures recorded per trial and excluded from summaries, criteria
// evaluated from the summaries. trials = 0 yields an empty report.
ExperimentReport run(const ExperimentConfig& cfg);

// Report JSON with sorted keys; the signature variant drops wall_time_s so
// equal-content runs compare byte-identical.
std::string report_json_text(const ExperimentReport& rep);
std::string report_signature(const ExperimentReport& rep);

double metric_mean(const ExperimentReport& rep, const std::string& name);

void emit_json(const ExperimentReport& rep, const std::string& path);
void emit_csv(const ExperimentReport& rep, const std::string& path);
void emit_svg_scatter(const CVector& eigenvalues, const std::string& path);

int cli(int argc, char** argv);

}  // namespace spike
