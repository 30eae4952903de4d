#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "simchan/numkernel.hpp"

namespace simchan::scene {

using num::CVec;
using num::RVec;
using num::cplx;

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Task : std::uint64_t { channel_mapping = 0, positioning = 1 };

using Point3 = std::array<double, 3>;

// Axis-aligned reflecting plane: coordinate `axis` equals `offset`.
struct Reflector {
    int axis = 0;       // 0 = x, 1 = y, 2 = z
    double offset = 0.0;
    double coeff = 0.0;  // reflection coefficient in [-1, 1]
};

// Deterministic geometry defining the position-to-channel mapping. The room
// is the box [0, extent] in each coordinate; users are sampled uniformly in
// the (possibly degenerate) user box, which must lie inside the room.
struct Scene {
    Point3 room_extent{10.0, 10.0, 3.0};
    std::vector<Point3> antennas;
    std::vector<Reflector> reflectors;
    int max_paths = 25;
    double carrier_uplink_hz = 2.4e9;
    double carrier_downlink_hz = 2.5e9;
    double subcarrier_spacing_hz = 15e3;
    int n_subcarriers = 16;
    std::uint64_t seed = 1;
    Point3 user_min{0.0, 0.0, 1.5};
    Point3 user_max{10.0, 10.0, 1.5};

    std::size_t n_antennas() const { return antennas.size(); }
    void validate() const;  // throws std::invalid_argument on a bad scene
};

struct UserPosition {
    Point3 coordinates{0.0, 0.0, 0.0};
};

// Complex channel, antenna-major then subcarrier: values[n * S + s].
struct ChannelVector {
    CVec values;
    std::size_t n_antennas = 0;
    std::size_t n_subcarriers = 0;

    std::size_t size() const { return values.size(); }
};

// (input channel, target) pairs. Targets are real vectors of uniform length:
// stacked [Re | Im] downlink channels for channel_mapping, coordinates for
// positioning. The first n_train samples form the training split.
struct LabeledDataset {
    std::vector<ChannelVector> inputs;
    std::vector<RVec> targets;
    Task task = Task::positioning;
    std::vector<std::size_t> antenna_subset;  // empty means all antennas
    std::size_t n_train = 0;

    std::size_t size() const { return inputs.size(); }
    std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
    std::size_t target_dim() const { return targets.empty() ? 0 : targets.front().size(); }
};

// One multipath component: the image-source point and the product of
// reflection coefficients along the way (1 for line of sight).
struct Path {
    Point3 image{0.0, 0.0, 0.0};
    double gain = 1.0;
};

// Image-source expansion up to second-order reflections, sorted by
// descending amplitude |gain| / distance-to-array-centroid and truncated
// to scene.max_paths.
std::vector<Path> enumerate_paths(const Scene& scene, const UserPosition& pos);

// h_{n,s} = sum_paths (g / d_n) * exp(-j 2 pi f_s d_n / c0) with
// f_s = carrier + (s - (S-1)/2) * spacing. Deterministic in all inputs.
ChannelVector synth_channel(const Scene& scene, const UserPosition& pos, double carrier_hz);

// Restriction to the listed antennas (all subcarriers, order preserved).
ChannelVector antenna_subset(const ChannelVector& ch, const std::vector<std::size_t>& idx);

// L users uniform in the scene's user box, seeded from scene.seed and the
// stream id; per-sample streams are counter-derived, so samples are
// independent of generation order and a shorter dataset is a prefix of a
// longer one on the same stream. Inputs get circular complex white noise of
// standard deviation noise_std per entry (targets stay clean). For
// channel_mapping the inputs are restricted to a random antenna subset of
// size subset_size, drawn once per scene seed.
LabeledDataset generate_dataset(const Scene& scene, std::size_t n_samples, Task task,
                                double noise_std = 0.0, std::size_t subset_size = 0,
                                std::uint64_t stream = 0);

// The subset generate_dataset would use (fixed by scene.seed), ascending.
std::vector<std::size_t> draw_antenna_subset(const Scene& scene, std::size_t subset_size);

// Uniform nx-by-ny antenna grid at height z, centered cells.
std::vector<Point3> ceiling_grid(const Point3& extent, std::size_t nx, std::size_t ny, double z);

// The six walls of the room box, all with the same reflection coefficient.
std::vector<Reflector> room_walls(const Point3& extent, double coeff);

// Seeded axis-aligned scatterer planes inside the room (axes x or y).
std::vector<Reflector> random_scatterers(const Point3& extent, std::size_t count, double coeff,
                                         std::uint64_t seed);

}  // namespace simchan::scene
