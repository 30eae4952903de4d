#include <cstdio>
#include <optional>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "simchan/baselines.hpp"
#include "simchan/config.hpp"
#include "simchan/experiment.hpp"
#include "simchan/serialize.hpp"
#include "simchan/simnet.hpp"
#include "simchan/train.hpp"

namespace {

using namespace simchan;

config::ExperimentConfig resolve_config(const std::string& preset, const std::string& config_path,
                                        std::optional<std::uint64_t> seed) {
    config::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = config::load_config(config_path);
    } else if (preset == "mapping") {
        cfg = config::default_mapping_config();
    } else if (preset == "positioning") {
        cfg = config::default_positioning_config();
    } else {
        throw std::invalid_argument("unknown preset '" + preset +
                                    "' (expected mapping or positioning)");
    }
    if (seed) {
        config::apply_seed(cfg, *seed);
    }
    return cfg;
}

int cmd_gen(const config::ExperimentConfig& cfg, const std::string& out, std::size_t count,
            std::uint64_t stream, bool dump_config) {
    if (dump_config) {
        std::fputs(config::format_config(cfg).c_str(), stdout);
        return 0;
    }
    cfg.validate();
    const scene::Scene sc = cfg.scene.build();
    const std::size_t n = count > 0 ? count : *std::max_element(cfg.l_list.begin(), cfg.l_list.end());
    const auto ds = scene::generate_dataset(sc, n, cfg.task, cfg.noise_std, cfg.subset_size, stream);
    io::save_dataset(ds, out);
    std::fprintf(stderr, "wrote %zu samples (stream %llu) to %s\n", ds.size(),
                 static_cast<unsigned long long>(stream), out.c_str());
    return 0;
}

int cmd_train(const config::ExperimentConfig& cfg, const std::string& data,
              const std::string& out, std::size_t k, std::optional<std::size_t> epochs) {
    auto ds = io::load_dataset(data);
    train::TrainConfig tcfg = cfg.train;
    tcfg.loss_kind = ds.task == scene::Task::positioning ? train::LossKind::positioning
                                                         : train::LossKind::spectral_efficiency;
    if (epochs) {
        tcfg.epochs = *epochs;
    }
    const std::size_t k_eff = k > 0 ? k : cfg.k_list.front();

    net::SimilarityModel model = net::init_from_dataset(ds, k_eff);
    const auto history = train::fine_tune(model, ds, tcfg);
    std::printf("epoch,loss\n");
    for (std::size_t e = 0; e < history.size(); ++e) {
        std::printf("%zu,%.12g\n", e, history[e]);
    }
    if (!out.empty()) {
        io::save_model(model, out);
        std::fprintf(stderr, "wrote model (L=%zu, k=%zu) to %s\n", model.n_columns, model.k,
                     out.c_str());
    }
    return 0;
}

std::string eval_similarity(const net::SimilarityModel& model, const scene::LabeledDataset& ds) {
    std::vector<num::CVec> channels;
    channels.reserve(ds.size());
    for (const auto& ch : ds.inputs) channels.push_back(ch.values);
    const auto predictions = net::predict_batch(model, channels);

    std::string text = "metric_name,value\n";
    char buf[96];
    if (ds.task == scene::Task::channel_mapping) {
        const std::size_t s_count = ds.inputs.front().n_subcarriers;
        const std::size_t n = ds.target_dim() / (2 * s_count);
        std::vector<double> se(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto truth = train::unstack_channel(ds.targets[i], n, s_count);
            se[i] = -train::se_loss(truth, predictions[i]);
        }
        std::snprintf(buf, sizeof(buf), "mean_se,%.12g\n", experiment::mean_of(se));
        text += buf;
    } else {
        std::vector<double> errors(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            errors[i] = train::pos_loss(ds.targets[i], predictions[i]);
        }
        std::snprintf(buf, sizeof(buf), "mean_pos_error,%.12g\n", experiment::mean_of(errors));
        text += buf;
        std::snprintf(buf, sizeof(buf), "median_pos_error,%.12g\n", experiment::median_of(errors));
        text += buf;
    }
    return text;
}

template <typename Model>
std::string eval_baseline(const Model& model, const scene::LabeledDataset& ds) {
    num::check(ds.task == scene::Task::positioning,
               "eval: mlp/elm models evaluate on positioning datasets");
    const auto reduced = baselines::reduce_dataset(ds);
    std::vector<double> errors(reduced.size());
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        const auto y =
            baselines::baseline_predict(model, baselines::stack_complex(reduced.inputs[i].values));
        errors[i] = train::pos_loss(reduced.targets[i], y);
    }
    std::string text = "metric_name,value\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "mean_pos_error,%.12g\n", experiment::mean_of(errors));
    text += buf;
    std::snprintf(buf, sizeof(buf), "median_pos_error,%.12g\n", experiment::median_of(errors));
    text += buf;
    return text;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& out) {
    const auto ds = io::load_dataset(data);
    const auto model = io::load_model(model_path);
    const std::string text = std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, net::SimilarityModel>) {
                return eval_similarity(m, ds);
            } else {
                return eval_baseline(m, ds);
            }
        },
        model);
    std::fputs(text.c_str(), stdout);
    if (!out.empty()) {
        std::FILE* f = std::fopen(out.c_str(), "wb");
        if (f == nullptr) {
            throw std::runtime_error("eval: cannot write " + out);
        }
        std::fputs(text.c_str(), f);
        std::fclose(f);
    }
    return 0;
}

int cmd_report(const config::ExperimentConfig& cfg, const std::string& out) {
    const auto report = experiment::run_experiment(cfg);
    experiment::emit_report(report, out);
    std::fprintf(stderr, "wrote %zu rows to %s\n", report.rows.size(), out.c_str());
    if (report.partial) {
        for (const auto& f : report.failures) {
            std::fprintf(stderr, "failed: %s\n", f.c_str());
        }
        return 3;
    }
    return 0;
}

config::ExperimentConfig selftest_config() {
    config::ExperimentConfig cfg = config::default_mapping_config();
    cfg.scene.grid_x = 2;
    cfg.scene.grid_y = 2;
    cfg.scene.n_subcarriers = 4;
    cfg.subset_size = 2;
    cfg.l_list = {24, 48};
    cfg.k_list = {3};
    cfg.test_size = 12;
    cfg.train.epochs = 2;
    cfg.train.batch_size = 16;
    return cfg;
}

int cmd_selftest() {
    const auto cfg = selftest_config();
    const auto first = experiment::format_report(experiment::run_experiment(cfg));
    const auto second = experiment::format_report(experiment::run_experiment(cfg));
    if (first != second) {
        std::fprintf(stderr, "selftest: FAILED (report not reproducible)\n");
        return 1;
    }
    if (first.find("fine_tuned") == std::string::npos || first.find("init") == std::string::npos) {
        std::fprintf(stderr, "selftest: FAILED (missing stages)\n%s", first.c_str());
        return 1;
    }
    std::printf("selftest: ok\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"similarity-network channel mapping and positioning experiments"};
    app.require_subcommand(1);

    std::string preset = "mapping";
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string data;
    std::string model_path;
    std::size_t count = 0;
    std::uint64_t stream = 0;
    std::size_t k = 0;
    std::optional<std::size_t> epochs;
    bool dump_config = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--preset", preset, "built-in config: mapping or positioning");
        cmd->add_option("--config", config_path, "config file (overrides the preset)");
        cmd->add_option("--seed", seed, "master seed override");
    };

    auto* gen = app.add_subcommand("gen", "generate a dataset file");
    add_common(gen);
    gen->add_option("--out", out, "output dataset path");
    gen->add_option("--count", count, "sample count (default: largest L in the config)");
    gen->add_option("--stream", stream, "dataset stream id (train 0, test 1, ...)");
    gen->add_flag("--dump-config", dump_config, "print the effective config and exit");

    auto* tr = app.add_subcommand("train", "initialize and fine-tune a model on a dataset");
    add_common(tr);
    tr->add_option("--data", data, "input dataset path")->required();
    tr->add_option("--out", out, "output model path");
    tr->add_option("--k", k, "sparsity level (default: first k in the config)");
    tr->add_option("--epochs", epochs, "override the config epoch count");

    auto* ev = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    ev->add_option("--model", model_path, "model path")->required();
    ev->add_option("--data", data, "dataset path")->required();
    ev->add_option("--out", out, "also write the metrics to this file");

    auto* rep = app.add_subcommand("report", "run the configured sweep and emit the report");
    add_common(rep);
    rep->add_option("--out", out, "report path")->default_val("report.csv");

    app.add_subcommand("selftest", "run a built-in reproducibility check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (out.empty() && !dump_config) {
                throw std::invalid_argument("gen: --out is required");
            }
            return cmd_gen(resolve_config(preset, config_path, seed), out, count, stream,
                           dump_config);
        }
        if (tr->parsed()) {
            return cmd_train(resolve_config(preset, config_path, seed), data, out, k, epochs);
        }
        if (ev->parsed()) {
            return cmd_eval(model_path, data, out);
        }
        if (rep->parsed()) {
            return cmd_report(resolve_config(preset, config_path, seed), out);
        }
        return cmd_selftest();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
