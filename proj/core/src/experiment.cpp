#include "simchan/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "simchan/baselines.hpp"
#include "simchan/simnet.hpp"
#include "simchan/train.hpp"

namespace simchan::experiment {

namespace {

using scene::LabeledDataset;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void log_timing(std::size_t l, std::size_t k, const char* stage, double secs) {
    std::fprintf(stderr, "[timing] L=%zu k=%zu stage=%s %.3f s\n", l, k, stage, secs);
}

LabeledDataset prefix(const LabeledDataset& ds, std::size_t n) {
    LabeledDataset out;
    out.task = ds.task;
    out.antenna_subset = ds.antenna_subset;
    out.inputs.assign(ds.inputs.begin(), ds.inputs.begin() + static_cast<std::ptrdiff_t>(n));
    out.targets.assign(ds.targets.begin(), ds.targets.begin() + static_cast<std::ptrdiff_t>(n));
    out.n_train = n;
    return out;
}

std::vector<num::RVec> predict_dataset(const net::SimilarityModel& m, const LabeledDataset& ds) {
    std::vector<num::RVec> out;
    out.reserve(ds.size());
    std::vector<net::ForwardTrace> traces;
    const std::vector<std::optional<std::size_t>> no_excludes;
    constexpr std::size_t kChunk = 128;
    for (std::size_t start = 0; start < ds.size(); start += kChunk) {
        const std::size_t stop = std::min(start + kChunk, ds.size());
        std::vector<const num::CVec*> inputs;
        inputs.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
            inputs.push_back(&ds.inputs[i].values);
        }
        net::forward_batch_into(m, inputs, no_excludes, traces);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            out.push_back(std::move(traces[i].t_hat));
        }
    }
    return out;
}

// Complex downlink targets of a mapping test set, reassembled once.
std::vector<scene::ChannelVector> unstacked_targets(const LabeledDataset& ds) {
    const std::size_t s_count = ds.inputs.front().n_subcarriers;
    const std::size_t n = ds.target_dim() / (2 * s_count);
    std::vector<scene::ChannelVector> out;
    out.reserve(ds.size());
    for (const auto& t : ds.targets) {
        out.push_back(train::unstack_channel(t, n, s_count));
    }
    return out;
}

double mapping_mean_se(const net::SimilarityModel& m, const LabeledDataset& test,
                       const std::vector<scene::ChannelVector>& truth) {
    const auto estimates = predict_dataset(m, test);
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        total += -train::se_loss(truth[i], estimates[i]);
    }
    return total / static_cast<double>(test.size());
}

std::vector<double> positioning_errors(const net::SimilarityModel& m, const LabeledDataset& test) {
    const auto estimates = predict_dataset(m, test);
    std::vector<double> errors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        errors[i] = train::pos_loss(test.targets[i], estimates[i]);
    }
    return errors;
}

std::vector<double> baseline_errors(const baselines::MlpModel& m, const LabeledDataset& test) {
    std::vector<double> errors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto y = baselines::baseline_predict(m, baselines::stack_complex(test.inputs[i].values));
        errors[i] = train::pos_loss(test.targets[i], y);
    }
    return errors;
}

std::vector<double> baseline_errors(const baselines::ElmModel& m, const LabeledDataset& test) {
    std::vector<double> errors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto y = baselines::baseline_predict(m, baselines::stack_complex(test.inputs[i].values));
        errors[i] = train::pos_loss(test.targets[i], y);
    }
    return errors;
}

int stage_rank(const std::string& stage) {
    if (stage == "init") return 0;
    if (stage == "fine_tuned") return 1;
    if (stage == "upper_bound") return 2;
    if (stage == "mlp") return 3;
    if (stage == "elm") return 4;
    return 5;
}

int metric_rank(const std::string& name) { return name.find("median") == std::string::npos ? 0 : 1; }

}  // namespace

double mean_of(const std::vector<double>& v) {
    num::check(!v.empty(), "mean_of: empty sample");
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    num::check(!v.empty(), "median_of: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricsReport run_experiment(const config::ExperimentConfig& cfg) {
    cfg.validate();
    MetricsReport report;
    const scene::Scene sc = cfg.scene.build();
    const std::uint64_t seed = cfg.scene.seed;
    const bool mapping = cfg.task == scene::Task::channel_mapping;

    std::vector<std::size_t> l_list = cfg.l_list;
    std::sort(l_list.begin(), l_list.end());
    l_list.erase(std::unique(l_list.begin(), l_list.end()), l_list.end());
    std::vector<std::size_t> k_list = cfg.k_list;
    std::sort(k_list.begin(), k_list.end());
    k_list.erase(std::unique(k_list.begin(), k_list.end()), k_list.end());

    const auto add_row = [&](std::size_t l, std::size_t k, const char* stage,
                             const char* metric, double value, double secs) {
        MetricRow row;
        row.l = l;
        row.k = k;
        row.stage = stage;
        row.metric_name = metric;
        row.value = value;
        row.runtime_s = cfg.measure_runtime ? secs : 0.0;
        row.seed = seed;
        report.rows.push_back(std::move(row));
    };
    const auto add_failure = [&](const std::string& where, const std::exception& e) {
        report.partial = true;
        report.failures.push_back(where + ": " + e.what());
    };

    LabeledDataset train_full, test;
    try {
        Timer t;
        const std::size_t l_max = l_list.back();
        train_full = scene::generate_dataset(sc, l_max, cfg.task, cfg.noise_std, cfg.subset_size,
                                             /*stream=*/0);
        test = scene::generate_dataset(sc, cfg.test_size, cfg.task, cfg.noise_std, cfg.subset_size,
                                       /*stream=*/1);
        log_timing(l_max, 0, "generate", t.seconds());
    } catch (const std::exception& e) {
        add_failure("dataset generation", e);
        return report;
    }

    std::vector<scene::ChannelVector> test_truth;
    double upper_bound = 0.0;
    if (mapping) {
        test_truth = unstacked_targets(test);
        std::vector<double> bounds(test_truth.size());
        for (std::size_t i = 0; i < test_truth.size(); ++i) {
            bounds[i] = train::se_upper_bound(test_truth[i]);
        }
        upper_bound = mean_of(bounds);
    }

    // Baselines reduce every channel to its dominant singular vector; do it
    // once on the largest split and slice prefixes per L.
    LabeledDataset reduced_full, reduced_test;
    const bool want_baselines = !mapping && (cfg.run_mlp || cfg.run_elm);
    bool baselines_ready = false;
    if (want_baselines) {
        try {
            Timer t;
            reduced_full = baselines::reduce_dataset(train_full);
            reduced_test = baselines::reduce_dataset(test);
            baselines_ready = true;
            log_timing(l_list.back(), 0, "reduce", t.seconds());
        } catch (const std::exception& e) {
            add_failure("input reduction", e);
        }
    }

    train::TrainConfig tcfg = cfg.train;
    tcfg.loss_kind =
        mapping ? train::LossKind::spectral_efficiency : train::LossKind::positioning;

    for (std::size_t l : l_list) {
        const LabeledDataset ds_l = prefix(train_full, l);

        for (std::size_t k : k_list) {
            const std::string cell = "L=" + std::to_string(l) + " k=" + std::to_string(k);
            try {
                Timer t_init;
                net::SimilarityModel model = net::init_from_dataset(ds_l, k);
                if (mapping) {
                    const double se = mapping_mean_se(model, test, test_truth);
                    const double secs = t_init.seconds();
                    log_timing(l, k, "init", secs);
                    add_row(l, k, "init", "mean_se", se, secs);
                } else {
                    const auto errors = positioning_errors(model, test);
                    const double secs = t_init.seconds();
                    log_timing(l, k, "init", secs);
                    add_row(l, k, "init", "mean_pos_error", mean_of(errors), secs);
                    add_row(l, k, "init", "median_pos_error", median_of(errors), secs);
                }

                Timer t_tune;
                train::fine_tune(model, ds_l, tcfg);
                if (mapping) {
                    const double se = mapping_mean_se(model, test, test_truth);
                    const double secs = t_tune.seconds();
                    log_timing(l, k, "fine_tuned", secs);
                    add_row(l, k, "fine_tuned", "mean_se", se, secs);
                    add_row(l, k, "upper_bound", "mean_se", upper_bound, 0.0);
                } else {
                    const auto errors = positioning_errors(model, test);
                    const double secs = t_tune.seconds();
                    log_timing(l, k, "fine_tuned", secs);
                    add_row(l, k, "fine_tuned", "mean_pos_error", mean_of(errors), secs);
                    add_row(l, k, "fine_tuned", "median_pos_error", median_of(errors), secs);
                }
            } catch (const std::exception& e) {
                add_failure(cell, e);
            }
        }

        if (want_baselines && baselines_ready) {
            const LabeledDataset reduced_l = prefix(reduced_full, l);
            if (cfg.run_mlp) {
                try {
                    Timer t;
                    baselines::MlpModel mlp =
                        baselines::mlp_init(2 * reduced_l.inputs.front().values.size(), seed);
                    train::TrainConfig mcfg = tcfg;
                    mcfg.epochs = cfg.mlp_epochs;
                    mcfg.learning_rate = cfg.mlp_learning_rate;
                    baselines::mlp_train(mlp, reduced_l, mcfg);
                    const auto errors = baseline_errors(mlp, reduced_test);
                    const double secs = t.seconds();
                    log_timing(l, 0, "mlp", secs);
                    add_row(l, 0, "mlp", "mean_pos_error", mean_of(errors), secs);
                    add_row(l, 0, "mlp", "median_pos_error", median_of(errors), secs);
                } catch (const std::exception& e) {
                    add_failure("L=" + std::to_string(l) + " mlp", e);
                }
            }
            if (cfg.run_elm) {
                try {
                    Timer t;
                    const baselines::ElmModel elm =
                        baselines::elm_train(reduced_l, cfg.elm_hidden, cfg.elm_ridge, seed);
                    const auto errors = baseline_errors(elm, reduced_test);
                    const double secs = t.seconds();
                    log_timing(l, 0, "elm", secs);
                    add_row(l, 0, "elm", "mean_pos_error", mean_of(errors), secs);
                    add_row(l, 0, "elm", "median_pos_error", median_of(errors), secs);
                } catch (const std::exception& e) {
                    add_failure("L=" + std::to_string(l) + " elm", e);
                }
            }
        }
    }
    return report;
}

std::string format_report(const MetricsReport& report) {
    std::vector<MetricRow> rows = report.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
        if (a.l != b.l) return a.l < b.l;
        if (a.k != b.k) return a.k < b.k;
        const int sa = stage_rank(a.stage), sb = stage_rank(b.stage);
        if (sa != sb) return sa < sb;
        return metric_rank(a.metric_name) < metric_rank(b.metric_name);
    });

    std::string out = "L,k,stage,metric_name,value,runtime_s,seed\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%s,%.12g,%.12g,%llu\n", row.l, row.k,
                      row.stage.c_str(), row.metric_name.c_str(), row.value, row.runtime_s,
                      static_cast<unsigned long long>(row.seed));
        out += buf;
    }
    if (report.partial) {
        out += "# partial report\n";
        for (const auto& f : report.failures) {
            out += "# failed: " + f + "\n";
        }
    }
    return out;
}

void emit_report(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("emit_report: cannot write " + path);
    }
    const std::string text = format_report(report);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
        throw std::runtime_error("emit_report: write failed for " + path);
    }
}

}  // namespace simchan::experiment
