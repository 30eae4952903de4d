#include "simchan/chanscene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "simchan/rng.hpp"

namespace simchan::scene {

namespace {

constexpr std::uint64_t kSubsetTag = 0x5342534554ULL;      // antenna subset draw
constexpr std::uint64_t kPositionTag = 0x504f53ULL;        // user position draw
constexpr std::uint64_t kNoiseTag = 0x4e4f495345ULL;       // input noise draw
constexpr std::uint64_t kScattererTag = 0x53434154ULL;

bool inside_box(const Point3& p, const Point3& lo, const Point3& hi) {
    for (int a = 0; a < 3; ++a) {
        if (p[a] < lo[a] || p[a] > hi[a]) {
            return false;
        }
    }
    return true;
}

Point3 mirror(const Point3& p, const Reflector& r) {
    Point3 q = p;
    q[r.axis] = 2.0 * r.offset - p[r.axis];
    return q;
}

double distance(const Point3& a, const Point3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

void Scene::validate() const {
    const Point3 origin{0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        if (!(room_extent[a] > 0.0)) {
            throw std::invalid_argument("scene: room extent must be positive");
        }
    }
    if (antennas.empty()) {
        throw std::invalid_argument("scene: needs at least one antenna");
    }
    for (const Point3& ant : antennas) {
        if (!inside_box(ant, origin, room_extent)) {
            throw std::invalid_argument("scene: antenna outside room");
        }
    }
    for (const Reflector& r : reflectors) {
        if (r.axis < 0 || r.axis > 2) {
            throw std::invalid_argument("scene: reflector axis out of range");
        }
        if (r.coeff < -1.0 || r.coeff > 1.0) {
            throw std::invalid_argument("scene: reflection coefficient outside [-1, 1]");
        }
    }
    if (max_paths < 1) {
        throw std::invalid_argument("scene: max_paths must be >= 1");
    }
    if (n_subcarriers < 1) {
        throw std::invalid_argument("scene: n_subcarriers must be >= 1");
    }
    for (int a = 0; a < 3; ++a) {
        if (user_min[a] > user_max[a] || user_min[a] < 0.0 || user_max[a] > room_extent[a]) {
            throw std::invalid_argument("scene: user box must lie inside the room");
        }
    }
}

std::vector<Path> enumerate_paths(const Scene& scene, const UserPosition& pos) {
    std::vector<Path> paths;
    paths.push_back(Path{pos.coordinates, 1.0});

    const std::size_t nr = scene.reflectors.size();
    for (std::size_t w = 0; w < nr; ++w) {
        const Reflector& r = scene.reflectors[w];
        paths.push_back(Path{mirror(pos.coordinates, r), r.coeff});
    }
    // Second order. Mirrors across different axes commute, so unordered pairs
    // of perpendicular planes are enumerated once; parallel planes give a
    // distinct image per order and keep both.
    for (std::size_t w1 = 0; w1 < nr; ++w1) {
        for (std::size_t w2 = 0; w2 < nr; ++w2) {
            if (w1 == w2) {
                continue;
            }
            const Reflector& a = scene.reflectors[w1];
            const Reflector& b = scene.reflectors[w2];
            if (a.axis != b.axis && w1 > w2) {
                continue;
            }
            paths.push_back(Path{mirror(mirror(pos.coordinates, a), b), a.coeff * b.coeff});
        }
    }

    Point3 centroid{0.0, 0.0, 0.0};
    for (const Point3& ant : scene.antennas) {
        for (int a = 0; a < 3; ++a) {
            centroid[a] += ant[a];
        }
    }
    for (int a = 0; a < 3; ++a) {
        centroid[a] /= static_cast<double>(scene.antennas.size());
    }

    std::vector<double> amplitude(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double d = std::max(distance(paths[i].image, centroid), 1e-9);
        amplitude[i] = std::abs(paths[i].gain) / d;
    }
    std::vector<std::size_t> order(paths.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return amplitude[a] > amplitude[b]; });

    std::vector<Path> kept;
    const std::size_t limit = std::min<std::size_t>(paths.size(), scene.max_paths);
    kept.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        kept.push_back(paths[order[i]]);
    }
    return kept;
}

ChannelVector synth_channel(const Scene& scene, const UserPosition& pos, double carrier_hz) {
    const Point3 origin{0.0, 0.0, 0.0};
    if (!inside_box(pos.coordinates, origin, scene.room_extent)) {
        throw std::invalid_argument("synth_channel: position outside scene bounds");
    }

    const std::vector<Path> paths = enumerate_paths(scene, pos);
    const std::size_t n_ant = scene.antennas.size();
    const std::size_t n_sub = static_cast<std::size_t>(scene.n_subcarriers);

    ChannelVector ch;
    ch.n_antennas = n_ant;
    ch.n_subcarriers = n_sub;
    ch.values.assign(n_ant * n_sub, cplx(0.0, 0.0));

    std::vector<double> dists(paths.size());
    const double half_span = (static_cast<double>(n_sub) - 1.0) / 2.0;
    for (std::size_t n = 0; n < n_ant; ++n) {
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const double d = distance(paths[p].image, scene.antennas[n]);
            if (d < 1e-6) {
                throw std::invalid_argument("synth_channel: position coincides with an antenna");
            }
            dists[p] = d;
        }
        for (std::size_t s = 0; s < n_sub; ++s) {
            const double f = carrier_hz + (static_cast<double>(s) - half_span) *
                                              scene.subcarrier_spacing_hz;
            cplx acc(0.0, 0.0);
            for (std::size_t p = 0; p < paths.size(); ++p) {
                const double phase = -2.0 * M_PI * f * dists[p] / kSpeedOfLight;
                const double amp = paths[p].gain / dists[p];
                acc += cplx(amp * std::cos(phase), amp * std::sin(phase));
            }
            ch.values[n * n_sub + s] = acc;
        }
    }
    return ch;
}

ChannelVector antenna_subset(const ChannelVector& ch, const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= ch.n_antennas) {
            throw std::invalid_argument("antenna_subset: index out of range");
        }
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            if (idx[i] == idx[j]) {
                throw std::invalid_argument("antenna_subset: duplicate index");
            }
        }
    }
    ChannelVector out;
    out.n_antennas = idx.size();
    out.n_subcarriers = ch.n_subcarriers;
    out.values.reserve(idx.size() * ch.n_subcarriers);
    for (std::size_t i : idx) {
        for (std::size_t s = 0; s < ch.n_subcarriers; ++s) {
            out.values.push_back(ch.values[i * ch.n_subcarriers + s]);
        }
    }
    return out;
}

std::vector<std::size_t> draw_antenna_subset(const Scene& scene, std::size_t subset_size) {
    const std::size_t n = scene.antennas.size();
    if (subset_size > n) {
        throw std::invalid_argument("draw_antenna_subset: subset larger than array");
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) {
        pool[i] = i;
    }
    rng::Prng prng = rng::Prng::from_path(scene.seed, {kSubsetTag});
    for (std::size_t i = 0; i < subset_size; ++i) {
        const std::size_t j = i + prng.next_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(subset_size);
    std::sort(pool.begin(), pool.end());
    return pool;
}

LabeledDataset generate_dataset(const Scene& scene, std::size_t n_samples, Task task,
                                double noise_std, std::size_t subset_size, std::uint64_t stream) {
    scene.validate();
    if (noise_std < 0.0) {
        throw std::invalid_argument("generate_dataset: noise_std must be >= 0");
    }

    LabeledDataset ds;
    ds.task = task;
    ds.n_train = n_samples;
    if (task == Task::channel_mapping && subset_size > 0) {
        ds.antenna_subset = draw_antenna_subset(scene, subset_size);
    }

    ds.inputs.reserve(n_samples);
    ds.targets.reserve(n_samples);
    const double component_std = noise_std / std::sqrt(2.0);

    for (std::size_t i = 0; i < n_samples; ++i) {
        rng::Prng pos_rng = rng::Prng::from_path(scene.seed, {kPositionTag, stream, i});
        UserPosition pos;
        for (int a = 0; a < 3; ++a) {
            pos.coordinates[a] = pos_rng.uniform(scene.user_min[a], scene.user_max[a]);
        }

        ChannelVector input = synth_channel(scene, pos, scene.carrier_uplink_hz);
        if (!ds.antenna_subset.empty()) {
            input = antenna_subset(input, ds.antenna_subset);
        }
        if (noise_std > 0.0) {
            rng::Prng noise_rng = rng::Prng::from_path(scene.seed, {kNoiseTag, stream, i});
            for (cplx& v : input.values) {
                v += cplx(component_std * noise_rng.next_gaussian(),
                          component_std * noise_rng.next_gaussian());
            }
        }

        RVec target;
        if (task == Task::channel_mapping) {
            const ChannelVector downlink = synth_channel(scene, pos, scene.carrier_downlink_hz);
            target.resize(2 * downlink.size());
            for (std::size_t j = 0; j < downlink.size(); ++j) {
                target[j] = downlink.values[j].real();
                target[downlink.size() + j] = downlink.values[j].imag();
            }
        } else {
            target = {pos.coordinates[0], pos.coordinates[1], pos.coordinates[2]};
        }

        ds.inputs.push_back(std::move(input));
        ds.targets.push_back(std::move(target));
    }
    return ds;
}

std::vector<Point3> ceiling_grid(const Point3& extent, std::size_t nx, std::size_t ny, double z) {
    std::vector<Point3> grid;
    grid.reserve(nx * ny);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            grid.push_back(Point3{(static_cast<double>(ix) + 0.5) * extent[0] / nx,
                                  (static_cast<double>(iy) + 0.5) * extent[1] / ny, z});
        }
    }
    return grid;
}

std::vector<Reflector> room_walls(const Point3& extent, double coeff) {
    std::vector<Reflector> walls;
    for (int a = 0; a < 3; ++a) {
        walls.push_back(Reflector{a, 0.0, coeff});
        walls.push_back(Reflector{a, extent[a], coeff});
    }
    return walls;
}

std::vector<Reflector> random_scatterers(const Point3& extent, std::size_t count, double coeff,
                                         std::uint64_t seed) {
    std::vector<Reflector> planes;
    rng::Prng prng = rng::Prng::from_path(seed, {kScattererTag});
    for (std::size_t i = 0; i < count; ++i) {
        Reflector r;
        r.axis = static_cast<int>(prng.next_index(2));  // vertical planes only
        r.offset = prng.uniform(0.0, extent[r.axis]);
        r.coeff = coeff;
        planes.push_back(r);
    }
    return planes;
}

}  // namespace simchan::scene
