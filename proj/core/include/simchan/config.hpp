#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simchan/chanscene.hpp"
#include "simchan/train.hpp"

namespace simchan::config {

// Declarative scene description; build() assembles the antenna grid and
// reflector list into a concrete Scene.
struct SceneSpec {
    scene::Point3 room{10.0, 10.0, 3.0};
    std::size_t grid_x = 4;
    std::size_t grid_y = 4;
    double antenna_z = 2.9;
    double wall_coeff = 0.6;
    std::size_t n_scatterers = 0;
    double scatterer_coeff = 0.4;
    int max_paths = 25;
    double carrier_uplink_hz = 2.4e9;
    double carrier_downlink_hz = 2.5e9;
    double subcarrier_spacing_hz = 15e3;
    int n_subcarriers = 16;
    std::uint64_t seed = 1;
    double user_z = 1.5;
    // Inset of the user box from the walls. The default keeps desk-scale
    // training sets dense relative to the carrier wavelength, which is the
    // regime where channel similarity tracks position.
    double user_margin = 3.0;

    scene::Scene build() const;
};

struct ExperimentConfig {
    SceneSpec scene;
    scene::Task task = scene::Task::channel_mapping;
    std::vector<std::size_t> l_list;
    std::vector<std::size_t> k_list;
    double noise_std = 0.0;
    std::size_t subset_size = 0;  // uplink antenna subset (mapping); 0 = all
    bool measure_runtime = false;

    train::TrainConfig train;

    std::size_t test_size = 500;

    bool run_mlp = true;
    bool run_elm = true;
    std::size_t mlp_epochs = 200;
    double mlp_learning_rate = 1e-3;
    std::size_t elm_hidden = 2000;
    double elm_ridge = 1e-6;

    void validate() const;
};

// Desk-scale presets for the two tasks.
ExperimentConfig default_mapping_config();
ExperimentConfig default_positioning_config();

// Parses the sectioned key = value format. Lines are `key = value`,
// `[section]`, blank, or `# comment`. The top-level `task` key selects
// which preset supplies the unspecified values. Unknown sections or keys
// are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Renders a config back into parseable text (the `selftest` and `gen`
// round-trip surface).
std::string format_config(const ExperimentConfig& cfg);

// Points every seed in the config at one master seed.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace simchan::config
