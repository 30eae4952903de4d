#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simchan/config.hpp"

namespace simchan::experiment {

struct MetricRow {
    std::size_t l = 0;
    std::size_t k = 0;  // 0 for stages that do not depend on k
    std::string stage;  // init, fine_tuned, upper_bound, mlp, elm
    std::string metric_name;
    double value = 0.0;
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
};

struct MetricsReport {
    std::vector<MetricRow> rows;
    bool partial = false;
    std::vector<std::string> failures;  // "L=..., k=...: what went wrong"
};

// Runs the configured sweep: generates train/test data, initializes and
// fine-tunes a model per (L, k) cell, evaluates each stage, and (for
// positioning) trains the enabled baselines once per L. A failing cell
// marks the report partial and is recorded in `failures`; the other cells
// still run. Wall times go to the row only when cfg.measure_runtime is set
// (they are always logged to stderr), so default reports are byte-stable.
MetricsReport run_experiment(const config::ExperimentConfig& cfg);

// Delimiter-separated text with header L,k,stage,metric_name,value,
// runtime_s,seed and stable (L, k, stage) row ordering.
std::string format_report(const MetricsReport& report);
void emit_report(const MetricsReport& report, const std::string& path);

// Mean and median of a sample vector (median of an even count averages the
// two middle order statistics).
double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

}  // namespace simchan::experiment
