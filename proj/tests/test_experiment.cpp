#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "simchan/experiment.hpp"

using namespace simchan;
using config::ExperimentConfig;
using experiment::MetricsReport;

namespace {

// A sweep small enough that the full pipeline runs in well under a second.
ExperimentConfig tiny_positioning() {
    ExperimentConfig c = config::default_positioning_config();
    c.scene.grid_x = 2;
    c.scene.grid_y = 2;
    c.scene.n_subcarriers = 2;
    c.scene.n_scatterers = 0;
    c.l_list = {12, 6};  // unsorted on purpose
    c.k_list = {3, 2};
    c.test_size = 5;
    c.train.epochs = 2;
    c.train.batch_size = 4;
    c.run_mlp = true;
    c.run_elm = true;
    c.mlp_epochs = 3;
    c.elm_hidden = 4;
    c.elm_ridge = 1e-4;
    return c;
}

ExperimentConfig tiny_mapping() {
    ExperimentConfig c = config::default_mapping_config();
    c.scene.grid_x = 2;
    c.scene.grid_y = 2;
    c.scene.n_subcarriers = 2;
    c.l_list = {8};
    c.k_list = {3};
    c.subset_size = 2;
    c.test_size = 4;
    c.train.epochs = 2;
    c.train.batch_size = 4;
    return c;
}

// (L, k, stage, metric) per report line, skipping the header.
using Key = std::tuple<std::string, std::string, std::string, std::string>;

std::vector<Key> row_keys(const std::string& text) {
    std::vector<Key> keys;
    std::istringstream iss(text);
    std::string line;
    std::getline(iss, line);
    REQUIRE(line == "L,k,stage,metric_name,value,runtime_s,seed");
    while (std::getline(iss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string l, k, stage, metric;
        std::getline(row, l, ',');
        std::getline(row, k, ',');
        std::getline(row, stage, ',');
        std::getline(row, metric, ',');
        keys.emplace_back(l, k, stage, metric);
    }
    return keys;
}

double row_value(const MetricsReport& r, std::size_t l, std::size_t k, const std::string& stage,
                 const std::string& metric) {
    for (const auto& row : r.rows) {
        if (row.l == l && row.k == k && row.stage == stage && row.metric_name == metric) {
            return row.value;
        }
    }
    FAIL("no such row: L=" << l << " k=" << k << " " << stage << " " << metric);
    return 0.0;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("presets validate and build the advertised scene") {
    const ExperimentConfig map = config::default_mapping_config();
    map.validate();
    CHECK(map.task == scene::Task::channel_mapping);
    CHECK(map.scene.build().n_antennas() == map.scene.grid_x * map.scene.grid_y);

    const ExperimentConfig pos = config::default_positioning_config();
    pos.validate();
    CHECK(pos.task == scene::Task::positioning);
    CHECK(pos.k_list.size() == 3);
}

TEST_CASE("format_config round-trips through the parser") {
    ExperimentConfig c = config::default_positioning_config();
    c.noise_std = 0.25;
    c.measure_runtime = true;
    c.l_list = {16, 32};
    c.scene.room = {6.5, 4.25, 3.0};
    c.train.learning_rate = 3.125e-4;

    const std::string text = config::format_config(c);
    const ExperimentConfig parsed = config::parse_config_text(text);
    CHECK(config::format_config(parsed) == text);
}

TEST_CASE("the task key selects the preset behind unspecified keys") {
    const ExperimentConfig pos = config::parse_config_text("task = positioning\n");
    CHECK(config::format_config(pos) == config::format_config(config::default_positioning_config()));

    const ExperimentConfig map = config::parse_config_text("");
    CHECK(config::format_config(map) == config::format_config(config::default_mapping_config()));

    // The task key wins no matter where it appears in the file.
    const ExperimentConfig late = config::parse_config_text(
        "l_list = 4 8\n"
        "task = positioning\n");
    CHECK(late.task == scene::Task::positioning);
    CHECK(late.train.loss_kind == train::LossKind::positioning);
    CHECK(late.l_list == std::vector<std::size_t>{4, 8});
    CHECK(late.test_size == config::default_positioning_config().test_size);
}

TEST_CASE("comments, blanks, and whitespace are tolerated") {
    const ExperimentConfig c = config::parse_config_text(
        "# sweep settings\n"
        "\n"
        "  k_list =  2 , 3,4  \n"
        "[train]\n"
        "  epochs=7\n"
        "# trailing comment\n");
    CHECK(c.k_list == std::vector<std::size_t>{2, 3, 4});
    CHECK(c.train.epochs == 7);
}

TEST_CASE("parse errors name the offending line") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("task = channel_mapping\nfrequency = 3\n"),
                         doctest::Contains("config: line 2: unknown key 'frequency' at top level"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("[scene]\nfrequency = 3\n"),
                         doctest::Contains("line 2: unknown key 'frequency' in section [scene]"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("\n[output]\n"),
                         doctest::Contains("line 2: unknown section [output]"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("[scene\n"),
                         doctest::Contains("line 1: unterminated section header"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("noise_std\n"),
                         doctest::Contains("line 1: expected key = value"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("noise_std = lots\n"),
                         doctest::Contains("line 1: expected a number, got 'lots'"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("[train]\nepochs = -3\n"),
                         doctest::Contains("line 2: expected a nonnegative integer, got '-3'"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("measure_runtime = maybe\n"),
                         doctest::Contains("line 1: expected a boolean, got 'maybe'"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(config::parse_config_text("task = locate\n"),
                         doctest::Contains("task must be channel_mapping or positioning"),
                         std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent sweeps") {
    ExperimentConfig c = tiny_positioning();
    c.l_list.clear();
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("l_list must be nonempty"),
                         std::invalid_argument);

    c = tiny_positioning();
    c.k_list = {6};  // == smallest L
    CHECK_THROWS_WITH_AS(c.validate(),
                         doctest::Contains("every k must satisfy 1 <= k <= L - 1"),
                         std::invalid_argument);

    c = tiny_positioning();
    c.test_size = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("test_size must be >= 1"),
                         std::invalid_argument);

    c = tiny_positioning();
    c.noise_std = -0.1;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("noise_std must be >= 0"),
                         std::invalid_argument);

    c = tiny_positioning();
    c.elm_hidden = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("elm_hidden must be >= 1"),
                         std::invalid_argument);
}

TEST_CASE("apply_seed points every seed at the master seed") {
    ExperimentConfig c = tiny_positioning();
    config::apply_seed(c, 77);
    CHECK(c.scene.seed == 77);
    CHECK(c.train.shuffle_seed == 77);
}

TEST_CASE("load_config reads files and reports missing ones") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "simchan-experiment-test.cfg";
    {
        std::ofstream out(path);
        out << "task = positioning\n[eval]\ntest_size = 9\n";
    }
    const ExperimentConfig c = config::load_config(path.string());
    CHECK(c.task == scene::Task::positioning);
    CHECK(c.test_size == 9);

    CHECK_THROWS_WITH_AS(config::load_config("/no/such/file.cfg"),
                         doctest::Contains("config: cannot open /no/such/file.cfg"),
                         std::runtime_error);
}

TEST_CASE("mean and median follow the order-statistic definitions") {
    CHECK(experiment::mean_of({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
    CHECK(experiment::median_of({5.0, 1.0, 3.0}) == doctest::Approx(3.0));
    CHECK(experiment::median_of({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
    CHECK_THROWS_WITH_AS(experiment::mean_of({}), doctest::Contains("mean_of: empty sample"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(experiment::median_of({}), doctest::Contains("median_of: empty sample"),
                         std::invalid_argument);
}

TEST_CASE("a positioning sweep emits every stage in stable order") {
    const ExperimentConfig c = tiny_positioning();
    const MetricsReport report = experiment::run_experiment(c);
    REQUIRE(report.failures.empty());
    CHECK_FALSE(report.partial);

    const std::string text = experiment::format_report(report);
    const std::vector<Key> expected = {
        {"6", "0", "mlp", "mean_pos_error"},
        {"6", "0", "mlp", "median_pos_error"},
        {"6", "0", "elm", "mean_pos_error"},
        {"6", "0", "elm", "median_pos_error"},
        {"6", "2", "init", "mean_pos_error"},
        {"6", "2", "init", "median_pos_error"},
        {"6", "2", "fine_tuned", "mean_pos_error"},
        {"6", "2", "fine_tuned", "median_pos_error"},
        {"6", "3", "init", "mean_pos_error"},
        {"6", "3", "init", "median_pos_error"},
        {"6", "3", "fine_tuned", "mean_pos_error"},
        {"6", "3", "fine_tuned", "median_pos_error"},
        {"12", "0", "mlp", "mean_pos_error"},
        {"12", "0", "mlp", "median_pos_error"},
        {"12", "0", "elm", "mean_pos_error"},
        {"12", "0", "elm", "median_pos_error"},
        {"12", "2", "init", "mean_pos_error"},
        {"12", "2", "init", "median_pos_error"},
        {"12", "2", "fine_tuned", "mean_pos_error"},
        {"12", "2", "fine_tuned", "median_pos_error"},
        {"12", "3", "init", "mean_pos_error"},
        {"12", "3", "init", "median_pos_error"},
        {"12", "3", "fine_tuned", "mean_pos_error"},
        {"12", "3", "fine_tuned", "median_pos_error"},
    };
    CHECK(row_keys(text) == expected);

    for (const auto& row : report.rows) {
        CHECK(row.runtime_s == 0.0);  // measure_runtime is off
        CHECK(row.seed == c.scene.seed);
        CHECK(row.value >= 0.0);
    }
}

TEST_CASE("a mapping sweep reports init, fine_tuned, and the upper bound") {
    const ExperimentConfig c = tiny_mapping();
    const MetricsReport report = experiment::run_experiment(c);
    REQUIRE(report.failures.empty());
    REQUIRE(report.rows.size() == 3);

    const double init = row_value(report, 8, 3, "init", "mean_se");
    const double tuned = row_value(report, 8, 3, "fine_tuned", "mean_se");
    const double bound = row_value(report, 8, 3, "upper_bound", "mean_se");
    CHECK(bound > 0.0);
    CHECK(init <= bound + 1e-9);
    CHECK(tuned <= bound + 1e-9);
}

TEST_CASE("a failing cell yields a partial report, not a crash") {
    ExperimentConfig c = tiny_positioning();
    c.l_list = {6};
    c.k_list = {2};
    c.run_mlp = false;
    c.elm_hidden = 16;  // more hidden units than training samples
    c.elm_ridge = 0.0;  // makes the normal equations singular

    const MetricsReport report = experiment::run_experiment(c);
    CHECK(report.partial);
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].find("L=6 elm") != std::string::npos);
    CHECK(report.failures[0].find("use ridge > 0") != std::string::npos);
    CHECK(report.rows.size() == 4);  // the similarity cell still ran

    const std::string text = experiment::format_report(report);
    CHECK(text.find("# partial report") != std::string::npos);
    CHECK(text.find("# failed: L=6 elm") != std::string::npos);
}

TEST_CASE("identical configs produce byte-identical reports") {
    const ExperimentConfig c = tiny_positioning();
    const std::string a = experiment::format_report(experiment::run_experiment(c));
    const std::string b = experiment::format_report(experiment::run_experiment(c));
    CHECK(a == b);
}

}  // TEST_SUITE
