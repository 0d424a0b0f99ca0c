#ifndef JRC_RADAR_HPP
#define JRC_RADAR_HPP

#include <array>
#include <optional>
#include <random>
#include <vector>

namespace jrc {

// Speed of light rounded to the automotive-radar convention so the derived
// round-number mode tables come out exact.
constexpr double kSpeedOfLight = 3.0e8;

struct ChirpConfig {
    double sweep_bandwidth_hz = 0.0;       // b
    double frequency_slope_hz_per_s = 0.0; // f_c
    std::optional<double> r_max_override_m;
    std::optional<double> f_max_hz;        // per-mode IF bandwidth, used when no override

    void validate() const;
};

struct RadarMode {
    double r_re = 0.0;   // range resolution (m)
    double r_max = 0.0;  // maximum detection range (m)
};

enum class ObjectKind { Car, Pedestrian };

struct SceneObject {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
    ObjectKind kind = ObjectKind::Car;
};

struct SizeDistributions {
    // (mean, std) in meters
    std::array<double, 2> car_length{4.62, 0.18};
    std::array<double, 2> car_width{1.92, 0.08};
    std::array<double, 2> ped_length{0.73, 0.085};
    std::array<double, 2> ped_width{0.68, 0.055};
    double car_fraction = 20.0 / 27.0;

    void validate() const;
};

// r_re = c0 / (2b); r_max from the override when present, else c0 * F_max / (2 f_c).
RadarMode derive_ranges(const ChirpConfig& chirp);

// Poisson count with mean density * (r_max / 45)^2.
int scaled_object_count(double density, double r_max, std::mt19937_64& rng);

// Objects uniform in [0, r_max]^2; radius = (length + width) / 4, resampled
// until positive.
std::vector<SceneObject> generate_scene(int count, const RadarMode& mode,
                                        const SizeDistributions& sizes,
                                        std::mt19937_64& rng);

// An FMCW chirp resolves targets by range: two returns merge into one
// detection when their range gap is below r_re. Each object occupies a range
// interval [range - depth, range + depth] around its center range (range =
// distance from the sensor at the scene origin); depth = radius / 4 models
// the spread of the front-face return, which is much shorter than the
// object's geometric extent. Returns the number of connected components
// under "interval gap < r_re".
int count_detected(const std::vector<SceneObject>& objects, double r_re);

// Range-interval half-depth of an object's radar return.
double range_depth(const SceneObject& object);

// (scene_count - detected) / scene_count; 0 for an empty scene.
double miss_ratio(int scene_count, int detected);

}  // namespace jrc

#endif
