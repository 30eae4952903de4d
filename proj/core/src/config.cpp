#include "simchan/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simchan::config {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
    throw std::invalid_argument("config: line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return d;
    } catch (const std::exception&) {
    }
    fail_line(line, "expected a number, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, std::size_t line) {
    // stoull wraps negative input around instead of rejecting it.
    if (!v.empty() && v[0] != '-') {
        try {
            std::size_t pos = 0;
            const unsigned long long u = std::stoull(v, &pos);
            if (trim(v.substr(pos)).empty()) return u;
        } catch (const std::exception&) {
        }
    }
    fail_line(line, "expected a nonnegative integer, got '" + v + "'");
}

bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail_line(line, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_items(const std::string& v) {
    std::string tmp = v;
    std::replace(tmp.begin(), tmp.end(), ',', ' ');
    std::istringstream iss(tmp);
    std::vector<std::string> items;
    std::string tok;
    while (iss >> tok) items.push_back(tok);
    return items;
}

std::vector<std::size_t> parse_size_list(const std::string& v, std::size_t line) {
    std::vector<std::size_t> out;
    for (const auto& item : split_items(v)) {
        out.push_back(parse_u64(item, line));
    }
    if (out.empty()) fail_line(line, "expected a list of integers");
    return out;
}

scene::Task parse_task(const std::string& v, std::size_t line) {
    if (v == "channel_mapping") return scene::Task::channel_mapping;
    if (v == "positioning") return scene::Task::positioning;
    fail_line(line, "task must be channel_mapping or positioning, got '" + v + "'");
}

void apply_scene_key(SceneSpec& s, const std::string& key, const std::string& value,
                     std::size_t line) {
    if (key == "room") {
        const auto items = split_items(value);
        if (items.size() != 3) fail_line(line, "room expects three extents");
        s.room = {parse_double(items[0], line), parse_double(items[1], line),
                  parse_double(items[2], line)};
    } else if (key == "grid") {
        const auto items = split_items(value);
        if (items.size() != 2) fail_line(line, "grid expects two counts");
        s.grid_x = parse_u64(items[0], line);
        s.grid_y = parse_u64(items[1], line);
    } else if (key == "antenna_z") {
        s.antenna_z = parse_double(value, line);
    } else if (key == "wall_coeff") {
        s.wall_coeff = parse_double(value, line);
    } else if (key == "n_scatterers") {
        s.n_scatterers = parse_u64(value, line);
    } else if (key == "scatterer_coeff") {
        s.scatterer_coeff = parse_double(value, line);
    } else if (key == "max_paths") {
        s.max_paths = static_cast<int>(parse_u64(value, line));
    } else if (key == "carrier_uplink_hz") {
        s.carrier_uplink_hz = parse_double(value, line);
    } else if (key == "carrier_downlink_hz") {
        s.carrier_downlink_hz = parse_double(value, line);
    } else if (key == "subcarrier_spacing_hz") {
        s.subcarrier_spacing_hz = parse_double(value, line);
    } else if (key == "n_subcarriers") {
        s.n_subcarriers = static_cast<int>(parse_u64(value, line));
    } else if (key == "seed") {
        s.seed = parse_u64(value, line);
    } else if (key == "user_z") {
        s.user_z = parse_double(value, line);
    } else if (key == "user_margin") {
        s.user_margin = parse_double(value, line);
    } else {
        fail_line(line, "unknown key '" + key + "' in section [scene]");
    }
}

void apply_train_key(train::TrainConfig& t, const std::string& key, const std::string& value,
                     std::size_t line) {
    if (key == "learning_rate") {
        t.learning_rate = parse_double(value, line);
    } else if (key == "batch_size") {
        t.batch_size = parse_u64(value, line);
    } else if (key == "epochs") {
        t.epochs = parse_u64(value, line);
    } else if (key == "shuffle_seed") {
        t.shuffle_seed = parse_u64(value, line);
    } else if (key == "adam_beta1") {
        t.adam_beta1 = parse_double(value, line);
    } else if (key == "adam_beta2") {
        t.adam_beta2 = parse_double(value, line);
    } else if (key == "adam_eps") {
        t.adam_eps = parse_double(value, line);
    } else {
        fail_line(line, "unknown key '" + key + "' in section [train]");
    }
}

void apply_top_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                   std::size_t line) {
    if (key == "task") {
        c.task = parse_task(value, line);
    } else if (key == "l_list") {
        c.l_list = parse_size_list(value, line);
    } else if (key == "k_list") {
        c.k_list = parse_size_list(value, line);
    } else if (key == "noise_std") {
        c.noise_std = parse_double(value, line);
    } else if (key == "subset_size") {
        c.subset_size = parse_u64(value, line);
    } else if (key == "measure_runtime") {
        c.measure_runtime = parse_bool(value, line);
    } else {
        fail_line(line, "unknown key '" + key + "' at top level");
    }
}

void apply_eval_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                    std::size_t line) {
    if (key == "test_size") {
        c.test_size = parse_u64(value, line);
    } else {
        fail_line(line, "unknown key '" + key + "' in section [eval]");
    }
}

void apply_baselines_key(ExperimentConfig& c, const std::string& key, const std::string& value,
                         std::size_t line) {
    if (key == "mlp") {
        c.run_mlp = parse_bool(value, line);
    } else if (key == "elm") {
        c.run_elm = parse_bool(value, line);
    } else if (key == "mlp_epochs") {
        c.mlp_epochs = parse_u64(value, line);
    } else if (key == "mlp_learning_rate") {
        c.mlp_learning_rate = parse_double(value, line);
    } else if (key == "elm_hidden") {
        c.elm_hidden = parse_u64(value, line);
    } else if (key == "elm_ridge") {
        c.elm_ridge = parse_double(value, line);
    } else {
        fail_line(line, "unknown key '" + key + "' in section [baselines]");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

scene::Scene SceneSpec::build() const {
    scene::Scene s;
    s.room_extent = room;
    s.antennas = scene::ceiling_grid(room, grid_x, grid_y, antenna_z);
    s.reflectors = scene::room_walls(room, wall_coeff);
    if (n_scatterers > 0) {
        const auto extra = scene::random_scatterers(room, n_scatterers, scatterer_coeff, seed);
        s.reflectors.insert(s.reflectors.end(), extra.begin(), extra.end());
    }
    s.max_paths = max_paths;
    s.carrier_uplink_hz = carrier_uplink_hz;
    s.carrier_downlink_hz = carrier_downlink_hz;
    s.subcarrier_spacing_hz = subcarrier_spacing_hz;
    s.n_subcarriers = n_subcarriers;
    s.seed = seed;
    s.user_min = {user_margin, user_margin, user_z};
    s.user_max = {room[0] - user_margin, room[1] - user_margin, user_z};
    s.validate();
    return s;
}

void ExperimentConfig::validate() const {
    num::check(!l_list.empty(), "config: l_list must be nonempty");
    num::check(!k_list.empty(), "config: k_list must be nonempty");
    num::check(test_size >= 1, "config: test_size must be >= 1");
    num::check(noise_std >= 0.0, "config: noise_std must be >= 0");
    for (std::size_t l : l_list) {
        num::check(l >= 2, "config: every L must be >= 2");
        for (std::size_t k : k_list) {
            num::check(k >= 1 && k + 1 <= l, "config: every k must satisfy 1 <= k <= L - 1");
        }
    }
    train.validate();
    if (task == scene::Task::positioning) {
        if (run_elm) num::check(elm_hidden >= 1, "config: elm_hidden must be >= 1");
        num::check(elm_ridge >= 0.0, "config: elm_ridge must be >= 0");
        num::check(mlp_learning_rate >= 0.0, "config: mlp_learning_rate must be >= 0");
    }
    scene.build();  // throws on an invalid scene
}

ExperimentConfig default_mapping_config() {
    ExperimentConfig c;
    c.task = scene::Task::channel_mapping;
    c.l_list = {250, 1000, 4000};
    c.k_list = {5};
    c.subset_size = 4;
    c.noise_std = 0.0;
    c.scene.n_subcarriers = 16;
    // Room-scale delay spreads are ~100x shorter than in an outdoor cell, so
    // the 15 kHz numerology leaves every subcarrier nearly identical. 6 MHz
    // spacing gives a 96 MHz band that resolves meter-scale path differences
    // while keeping the FDD uplink and downlink bands disjoint.
    c.scene.subcarrier_spacing_hz = 6e6;
    // Correlation lookups only beat parametric models when the training set
    // samples the channel manifold at sub-wavelength spacing; a 1 m square
    // patch keeps nearest-neighbor distances near lambda/4 already at the
    // smallest training size.
    c.scene.user_margin = 4.5;
    c.train.learning_rate = 1e-3;
    c.train.batch_size = 1000;
    c.train.epochs = 100;
    c.train.loss_kind = train::LossKind::spectral_efficiency;
    c.train.shuffle_seed = 1;
    c.test_size = 500;
    c.run_mlp = false;
    c.run_elm = false;
    return c;
}

ExperimentConfig default_positioning_config() {
    ExperimentConfig c;
    c.task = scene::Task::positioning;
    c.l_list = {2048};
    c.k_list = {4, 8, 16};
    c.subset_size = 0;
    c.noise_std = 0.0;
    c.scene.n_subcarriers = 64;
    c.scene.subcarrier_spacing_hz = 1.5e6;
    c.scene.n_scatterers = 4;
    c.train.learning_rate = 1e-3;
    c.train.batch_size = 100;
    c.train.epochs = 30;
    c.train.loss_kind = train::LossKind::positioning;
    c.train.shuffle_seed = 1;
    c.test_size = 441;
    c.run_mlp = true;
    c.run_elm = true;
    c.mlp_epochs = 200;
    c.mlp_learning_rate = 1e-3;
    c.elm_hidden = 2000;
    c.elm_ridge = 1e-6;
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream iss(text);
    std::string raw;

    // First pass: the task key picks the preset that backs the file.
    scene::Task task = scene::Task::channel_mapping;
    {
        std::string section;
        std::size_t line_no = 0;
        std::istringstream scan(text);
        while (std::getline(scan, raw)) {
            ++line_no;
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[') {
                section = line;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            if (section.empty() && trim(line.substr(0, eq)) == "task") {
                task = parse_task(trim(line.substr(eq + 1)), line_no);
            }
        }
    }

    ExperimentConfig cfg = task == scene::Task::positioning ? default_positioning_config()
                                                            : default_mapping_config();

    std::string section;
    std::size_t line_no = 0;
    while (std::getline(iss, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_line(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scene" && section != "train" && section != "eval" &&
                section != "baselines") {
                fail_line(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_line(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail_line(line_no, "empty key");

        if (section.empty()) {
            apply_top_key(cfg, key, value, line_no);
        } else if (section == "scene") {
            apply_scene_key(cfg.scene, key, value, line_no);
        } else if (section == "train") {
            apply_train_key(cfg.train, key, value, line_no);
        } else if (section == "eval") {
            apply_eval_key(cfg, key, value, line_no);
        } else {
            apply_baselines_key(cfg, key, value, line_no);
        }
    }
    cfg.train.loss_kind = cfg.task == scene::Task::positioning
                              ? train::LossKind::positioning
                              : train::LossKind::spectral_efficiency;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("config: cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "task = "
        << (cfg.task == scene::Task::positioning ? "positioning" : "channel_mapping") << "\n";
    out << "l_list = " << fmt_list(cfg.l_list) << "\n";
    out << "k_list = " << fmt_list(cfg.k_list) << "\n";
    out << "noise_std = " << fmt(cfg.noise_std) << "\n";
    out << "subset_size = " << cfg.subset_size << "\n";
    out << "measure_runtime = " << (cfg.measure_runtime ? "true" : "false") << "\n";
    out << "\n[scene]\n";
    out << "room = " << fmt(cfg.scene.room[0]) << " " << fmt(cfg.scene.room[1]) << " "
        << fmt(cfg.scene.room[2]) << "\n";
    out << "grid = " << cfg.scene.grid_x << " " << cfg.scene.grid_y << "\n";
    out << "antenna_z = " << fmt(cfg.scene.antenna_z) << "\n";
    out << "wall_coeff = " << fmt(cfg.scene.wall_coeff) << "\n";
    out << "n_scatterers = " << cfg.scene.n_scatterers << "\n";
    out << "scatterer_coeff = " << fmt(cfg.scene.scatterer_coeff) << "\n";
    out << "max_paths = " << cfg.scene.max_paths << "\n";
    out << "carrier_uplink_hz = " << fmt(cfg.scene.carrier_uplink_hz) << "\n";
    out << "carrier_downlink_hz = " << fmt(cfg.scene.carrier_downlink_hz) << "\n";
    out << "subcarrier_spacing_hz = " << fmt(cfg.scene.subcarrier_spacing_hz) << "\n";
    out << "n_subcarriers = " << cfg.scene.n_subcarriers << "\n";
    out << "seed = " << cfg.scene.seed << "\n";
    out << "user_z = " << fmt(cfg.scene.user_z) << "\n";
    out << "user_margin = " << fmt(cfg.scene.user_margin) << "\n";
    out << "\n[train]\n";
    out << "learning_rate = " << fmt(cfg.train.learning_rate) << "\n";
    out << "batch_size = " << cfg.train.batch_size << "\n";
    out << "epochs = " << cfg.train.epochs << "\n";
    out << "shuffle_seed = " << cfg.train.shuffle_seed << "\n";
    out << "adam_beta1 = " << fmt(cfg.train.adam_beta1) << "\n";
    out << "adam_beta2 = " << fmt(cfg.train.adam_beta2) << "\n";
    out << "adam_eps = " << fmt(cfg.train.adam_eps) << "\n";
    out << "\n[eval]\n";
    out << "test_size = " << cfg.test_size << "\n";
    out << "\n[baselines]\n";
    out << "mlp = " << (cfg.run_mlp ? "true" : "false") << "\n";
    out << "elm = " << (cfg.run_elm ? "true" : "false") << "\n";
    out << "mlp_epochs = " << cfg.mlp_epochs << "\n";
    out << "mlp_learning_rate = " << fmt(cfg.mlp_learning_rate) << "\n";
    out << "elm_hidden = " << cfg.elm_hidden << "\n";
    out << "elm_ridge = " << fmt(cfg.elm_ridge) << "\n";
    return out.str();
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.scene.seed = seed;
    cfg.train.shuffle_seed = seed;
}

}  // namespace simchan::config
