#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajal/error.hpp"
#include "trajal/rng.hpp"

namespace trajal {

/// Synthetic two-class trajectory dataset in the loader's input format.
struct FixtureSpec {
    std::size_t per_class = 50;
    double separation = 6.0; // class mean gap per feature, in units of the within-class sd
    std::uint64_t seed = 7;
    std::vector<std::string> labels = {"vessel", "not vessel"};
};

struct Fixture {
    nlohmann::ordered_json trajectories = nlohmann::ordered_json::array();
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
};

/// Each record carries six numeric properties whose class means differ by
/// `separation` standard deviations, plus a LineString geometry drifting at
/// the record's average speed. Records of different classes are interleaved.
inline Fixture make_fixture(const FixtureSpec& spec) {
    if (spec.labels.size() < 1) fail(ErrorKind::config, "fixture needs at least one label");
    Rng rng(spec.seed);
    Fixture out;
    struct Feature {
        const char* name;
        double base, sd;
    };
    static constexpr Feature features[] = {
        {"avg_speed", 4.0, 1.0},      {"max_speed", 9.0, 2.0},   {"direction_variance", 0.2, 0.05},
        {"duration_min", 60.0, 10.0}, {"length_km", 12.0, 3.0}, {"stop_ratio", 0.3, 0.05},
    };
    std::int64_t tid = 1;
    for (std::size_t i = 0; i < spec.per_class; ++i) {
        for (std::size_t c = 0; c < spec.labels.size(); ++c) {
            nlohmann::ordered_json props;
            props["tid"] = tid;
            double avg_speed = 0.0;
            for (const auto& f : features) {
                const double v = f.base + static_cast<double>(c) * spec.separation * f.sd + f.sd * rng.normal();
                props[f.name] = v;
                if (std::string_view(f.name) == "avg_speed") avg_speed = std::max(0.1, v);
            }
            nlohmann::ordered_json coords = nlohmann::ordered_json::array();
            double lon = 10.0 + rng.uniform(-0.5, 0.5);
            double lat = 54.0 + rng.uniform(-0.5, 0.5);
            double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const std::size_t points = 6 + rng.below(6);
            for (std::size_t p = 0; p < points; ++p) {
                const double t = 60.0 * static_cast<double>(p);
                coords.push_back({lon, lat, t});
                heading += 0.3 * rng.normal();
                const double step_m = avg_speed * 60.0;
                lat += step_m * std::cos(heading) / 111'195.0;
                lon += step_m * std::sin(heading) / (111'195.0 * std::cos(lat * std::numbers::pi / 180.0));
            }
            nlohmann::ordered_json line;
            line["type"] = "Feature";
            line["properties"] = props;
            line["geometry"] = {{"type", "LineString"}, {"coordinates", coords}};
            out.trajectories.push_back({{"line", line}});
            out.labels[std::to_string(tid)] = spec.labels[c];
            ++tid;
        }
    }
    return out;
}

/// Writes `<dir>/<key>.json` and `<dir>/<key>_label.json`.
inline void write_fixture(const Fixture& f, const std::filesystem::path& dir, const std::string& key) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto write = [](const std::filesystem::path& p, const nlohmann::ordered_json& j) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot write " + p.string(), {{"path", p.string()}});
        out << j.dump(1) << '\n';
    };
    write(dir / (key + ".json"), f.trajectories);
    write(dir / (key + "_label.json"), f.labels);
}

} // namespace trajal
