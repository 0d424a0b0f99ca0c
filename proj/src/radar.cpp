#include "jrc/radar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "jrc/errors.hpp"

namespace jrc {

void ChirpConfig::validate() const {
    if (sweep_bandwidth_hz <= 0) throw ConfigError("sweep bandwidth must be > 0");
    if (frequency_slope_hz_per_s <= 0) throw ConfigError("frequency slope must be > 0");
    if (!r_max_override_m && !f_max_hz)
        throw ConfigError("radar mode needs either r_max_override or f_max");
    if (r_max_override_m && *r_max_override_m <= 0)
        throw ConfigError("r_max_override must be > 0");
}

void SizeDistributions::validate() const {
    for (const auto& dist : {car_length, car_width, ped_length, ped_width}) {
        if (dist[1] <= 0) throw ConfigError("object size std must be > 0");
    }
    if (car_fraction < 0 || car_fraction > 1)
        throw ConfigError("car_fraction must be in [0,1]");
}

RadarMode derive_ranges(const ChirpConfig& chirp) {
    chirp.validate();
    RadarMode mode;
    mode.r_re = kSpeedOfLight / (2.0 * chirp.sweep_bandwidth_hz);
    if (chirp.r_max_override_m) {
        mode.r_max = *chirp.r_max_override_m;
    } else {
        mode.r_max = kSpeedOfLight * (*chirp.f_max_hz) / (2.0 * chirp.frequency_slope_hz_per_s);
    }
    require(mode.r_re > 0 && mode.r_re < mode.r_max, "mode must satisfy 0 < r_re < r_max");
    return mode;
}

int scaled_object_count(double density, double r_max, std::mt19937_64& rng) {
    require(density > 0, "density must be > 0");
    double scale = r_max / 45.0;
    std::poisson_distribution<int> poisson(density * scale * scale);
    return poisson(rng);
}

std::vector<SceneObject> generate_scene(int count, const RadarMode& mode,
                                        const SizeDistributions& sizes,
                                        std::mt19937_64& rng) {
    require(count >= 0, "object count must be >= 0");
    std::uniform_real_distribution<double> pos(0.0, mode.r_max);
    std::uniform_real_distribution<double> kind_draw(0.0, 1.0);
    std::normal_distribution<double> car_l(sizes.car_length[0], sizes.car_length[1]);
    std::normal_distribution<double> car_w(sizes.car_width[0], sizes.car_width[1]);
    std::normal_distribution<double> ped_l(sizes.ped_length[0], sizes.ped_length[1]);
    std::normal_distribution<double> ped_w(sizes.ped_width[0], sizes.ped_width[1]);

    std::vector<SceneObject> scene;
    scene.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SceneObject obj;
        obj.x = pos(rng);
        obj.y = pos(rng);
        obj.kind = kind_draw(rng) < sizes.car_fraction ? ObjectKind::Car
                                                       : ObjectKind::Pedestrian;
        do {
            double length = obj.kind == ObjectKind::Car ? car_l(rng) : ped_l(rng);
            double width = obj.kind == ObjectKind::Car ? car_w(rng) : ped_w(rng);
            obj.radius = (length + width) / 4.0;
        } while (obj.radius <= 0.0);
        scene.push_back(obj);
    }
    return scene;
}

int count_detected(const std::vector<SceneObject>& objects, double r_re) {
    require(r_re > 0, "r_re must be > 0");
    if (objects.empty()) return 0;

    // Sweep the sorted range intervals; a new detection starts whenever the
    // gap to everything seen so far reaches r_re.
    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(objects.size());
    for (const auto& o : objects) {
        const double range = std::hypot(o.x, o.y);
        const double depth = range_depth(o);
        intervals.emplace_back(range - depth, range + depth);
    }
    std::sort(intervals.begin(), intervals.end());

    int components = 0;
    double covered_end = -std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : intervals) {
        if (lo - covered_end >= r_re) ++components;
        covered_end = std::max(covered_end, hi);
    }
    return components;
}

double range_depth(const SceneObject& object) { return object.radius / 4.0; }

double miss_ratio(int scene_count, int detected) {
    require(scene_count >= 0 && detected >= 0, "counts must be >= 0");
    require(detected <= scene_count, "detected cannot exceed scene count");
    if (scene_count == 0) return 0.0;  // nothing to miss
    return static_cast<double>(scene_count - detected) / scene_count;
}

}  // namespace jrc
