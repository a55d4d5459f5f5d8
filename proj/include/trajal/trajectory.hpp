#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"

namespace trajal {

using Tid = std::int64_t;

struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;
    std::optional<double> t; // seconds since epoch

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct FeatureValue {
    std::string name;
    std::optional<double> value; // nullopt: present in the source but null

    friend bool operator==(const FeatureValue&, const FeatureValue&) = default;
};

/// One moving object. `features` keeps source order; that order feeds the
/// first-appearance column order of the assembled table.
struct TrajectoryRecord {
    Tid tid = 0;
    std::vector<GeoPoint> points;
    std::vector<FeatureValue> features;

    const FeatureValue* find(std::string_view name) const {
        auto it = std::find_if(features.begin(), features.end(), [&](const auto& f) { return f.name == name; });
        return it == features.end() ? nullptr : &*it;
    }

    std::optional<double> feature(std::string_view name) const {
        const auto* f = find(name);
        return f ? f->value : std::nullopt;
    }

    std::set<std::string> missing() const {
        std::set<std::string> out;
        for (const auto& f : features) {
            if (!f.value) out.insert(f.name);
        }
        return out;
    }

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

using LabelStore = std::map<Tid, std::string>;

/// Label-merged numeric table, rows sorted by tid. The unit of all downstream math.
struct FeatureTable {
    std::vector<Tid> tids;
    std::vector<std::string> columns;
    Matrix values;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return tids.size(); }

    friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        fail(ErrorKind::not_found, "no such file: " + path.string(), {{"path", path.string()}});
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string(), {{"path", path.string()}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::ordered_json parse_json(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        fail(ErrorKind::parse, origin + ": malformed JSON at byte " + std::to_string(e.byte),
             {{"byte", e.byte}, {"path", origin}});
    }
}

inline bool parse_integer(std::string_view s, Tid& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::optional<Tid> json_integer(const nlohmann::ordered_json& v) {
    if (v.is_number_integer()) return v.get<Tid>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && std::floor(d) == d) return static_cast<Tid>(d);
    }
    if (v.is_string()) {
        Tid out = 0;
        if (parse_integer(v.get_ref<const std::string&>(), out)) return out;
    }
    return std::nullopt;
}

inline bool excluded_feature_key(std::string_view key) {
    return key == "tid" || key == "type" || key == "geometry.type" || key == "geometry.coordinates";
}

// Dotted flattening of nested objects. Non-numeric scalars and arrays are not features.
inline void flatten_properties(const nlohmann::ordered_json& obj, const std::string& prefix,
                               std::vector<FeatureValue>& out) {
    for (const auto& [raw_key, value] : obj.items()) {
        std::string key = prefix.empty() ? raw_key : prefix + "." + raw_key;
        constexpr std::string_view tag = "properties.";
        if (key.starts_with(tag)) key.erase(0, tag.size());
        if (value.is_object()) {
            flatten_properties(value, key, out);
            continue;
        }
        if (excluded_feature_key(key)) continue;
        if (value.is_null()) {
            out.push_back({key, std::nullopt});
        } else if (value.is_boolean()) {
            out.push_back({key, value.get<bool>() ? 1.0 : 0.0});
        } else if (value.is_number()) {
            out.push_back({key, value.get<double>()});
        }
    }
}

inline std::vector<GeoPoint> parse_coordinates(const nlohmann::ordered_json& coords, std::size_t element) {
    std::vector<GeoPoint> points;
    if (!coords.is_array()) {
        fail(ErrorKind::schema, "element " + std::to_string(element) + ": geometry.coordinates is not an array",
             {{"index", element}});
    }
    points.reserve(coords.size());
    for (const auto& c : coords) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
            fail(ErrorKind::schema, "element " + std::to_string(element) + ": coordinate must be [lon, lat(, t)]",
                 {{"index", element}});
        }
        GeoPoint p{c[0].get<double>(), c[1].get<double>(), std::nullopt};
        if (c.size() >= 3 && c[2].is_number()) p.t = c[2].get<double>();
        if (!(p.lon >= -180.0 && p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0)) {
            fail(ErrorKind::schema, "element " + std::to_string(element) + ": coordinate out of WGS84 range",
                 {{"index", element}});
        }
        if (p.t && !points.empty() && points.back().t && *p.t < *points.back().t) {
            fail(ErrorKind::schema, "element " + std::to_string(element) + ": timestamps decrease",
                 {{"index", element}});
        }
        points.push_back(p);
    }
    return points;
}

} // namespace detail

/// Parses the trajectory document held in memory (same format as the file).
inline std::vector<TrajectoryRecord> parse_trajectories(const std::string& text, const std::string& origin = "<memory>") {
    const nlohmann::ordered_json doc = detail::parse_json(text, origin);
    if (!doc.is_array()) fail(ErrorKind::schema, origin + ": top level must be an array");

    std::vector<TrajectoryRecord> records;
    records.reserve(doc.size());
    std::set<Tid> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const std::string where = "element " + std::to_string(i);
        if (!item.is_object() || !item.contains("line") || !item["line"].is_object()) {
            fail(ErrorKind::schema, where + ": missing \"line\" object", {{"index", i}});
        }
        const auto& line = item["line"];
        if (!line.contains("properties") || !line["properties"].is_object()) {
            fail(ErrorKind::schema, where + ": missing \"properties\" object", {{"index", i}});
        }
        const auto& props = line["properties"];
        std::optional<Tid> tid;
        if (props.contains("tid")) tid = detail::json_integer(props["tid"]);
        else if (props.contains("properties.tid")) tid = detail::json_integer(props["properties.tid"]);
        if (!tid) fail(ErrorKind::schema, where + ": missing integer \"tid\"", {{"index", i}});
        if (!seen.insert(*tid).second) {
            fail(ErrorKind::duplicate_id, "duplicate tid " + std::to_string(*tid), {{"index", i}, {"tid", *tid}});
        }

        TrajectoryRecord rec;
        rec.tid = *tid;
        detail::flatten_properties(props, "", rec.features);
        if (line.contains("geometry") && line["geometry"].is_object() && line["geometry"].contains("coordinates")) {
            rec.points = detail::parse_coordinates(line["geometry"]["coordinates"], i);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& path) {
    return parse_trajectories(detail::read_file(path), path.string());
}

inline LabelStore parse_labels(const std::string& text, const std::string& origin = "<memory>") {
    const nlohmann::ordered_json doc = detail::parse_json(text, origin);
    if (!doc.is_object()) fail(ErrorKind::schema, origin + ": label file must be a JSON object");
    LabelStore store;
    for (const auto& [key, value] : doc.items()) {
        Tid tid = 0;
        if (!detail::parse_integer(key, tid)) {
            fail(ErrorKind::schema, "label key \"" + key + "\" is not an integer", {{"key", key}});
        }
        if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
            fail(ErrorKind::schema, "label for \"" + key + "\" must be a non-empty string", {{"key", key}});
        }
        store[tid] = value.get<std::string>();
    }
    return store;
}

inline LabelStore load_labels(const std::filesystem::path& path) {
    return parse_labels(detail::read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Motion features

inline constexpr double earth_radius_m = 6'371'000.0;

inline double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept {
    constexpr double rad = std::numbers::pi / 180.0;
    const double phi1 = a.lat * rad;
    const double phi2 = b.lat * rad;
    const double dphi = (b.lat - a.lat) * rad;
    const double dlambda = (b.lon - a.lon) * rad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * earth_radius_m * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Initial bearing from a to b, radians.
inline double bearing_rad(const GeoPoint& a, const GeoPoint& b) noexcept {
    constexpr double rad = std::numbers::pi / 180.0;
    const double phi1 = a.lat * rad;
    const double phi2 = b.lat * rad;
    const double dlambda = (b.lon - a.lon) * rad;
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    return std::atan2(y, x);
}

/// Adds avg_speed, max_speed (m/s) and direction_variance (circular variance
/// of segment bearings, in [0,1]). Keys already present are left untouched.
inline TrajectoryRecord derive_motion_features(const TrajectoryRecord& record) {
    std::vector<GeoPoint> timed;
    for (const auto& p : record.points) {
        if (p.t) timed.push_back(p);
    }
    if (timed.size() < 2) {
        fail(ErrorKind::insufficient_points, "tid " + std::to_string(record.tid) + ": need at least 2 timestamped points",
             {{"tid", record.tid}, {"points", timed.size()}});
    }

    double distance = 0.0;
    double duration = 0.0;
    double max_speed = 0.0;
    double sum_sin = 0.0;
    double sum_cos = 0.0;
    std::size_t bearings = 0;
    for (std::size_t i = 1; i < timed.size(); ++i) {
        const double d = haversine_m(timed[i - 1], timed[i]);
        const double dt = *timed[i].t - *timed[i - 1].t;
        if (dt > 0.0) {
            distance += d;
            duration += dt;
            max_speed = std::max(max_speed, d / dt);
        }
        if (d > 0.0) {
            const double b = bearing_rad(timed[i - 1], timed[i]);
            sum_sin += std::sin(b);
            sum_cos += std::cos(b);
            ++bearings;
        }
    }
    if (duration <= 0.0) {
        fail(ErrorKind::insufficient_points, "tid " + std::to_string(record.tid) + ": no segment with positive duration",
             {{"tid", record.tid}});
    }
    double variance = 0.0;
    if (bearings > 0) {
        const double resultant = std::hypot(sum_sin, sum_cos) / static_cast<double>(bearings);
        variance = std::clamp(1.0 - resultant, 0.0, 1.0);
    }

    TrajectoryRecord out = record;
    auto add = [&](const char* name, double v) {
        if (!out.find(name)) out.features.push_back({name, v});
    };
    add("avg_speed", distance / duration);
    add("max_speed", max_speed);
    add("direction_variance", variance);
    return out;
}

// ---------------------------------------------------------------------------
// Assembly and CSV

/// Drop rows with absent features, inner-join on tid, sort by tid.
inline FeatureTable assemble_feature_table(const std::vector<TrajectoryRecord>& trajs, const LabelStore& labels) {
    FeatureTable table;
    std::set<std::string> known;
    for (const auto& rec : trajs) {
        for (const auto& f : rec.features) {
            if (known.insert(f.name).second) table.columns.push_back(f.name);
        }
    }
    if (table.columns.empty()) fail(ErrorKind::empty_table, "trajectories carry no numeric features");

    std::vector<const TrajectoryRecord*> kept;
    for (const auto& rec : trajs) {
        const bool complete = std::all_of(table.columns.begin(), table.columns.end(),
                                          [&](const std::string& c) { return rec.feature(c).has_value(); });
        if (complete && labels.contains(rec.tid)) kept.push_back(&rec);
    }
    if (kept.empty()) fail(ErrorKind::empty_table, "no labelled trajectory with complete features");
    std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) { return a->tid < b->tid; });

    table.values = Matrix(kept.size(), table.columns.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        table.tids.push_back(kept[i]->tid);
        table.labels.push_back(labels.at(kept[i]->tid));
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            table.values(i, j) = *kept[i]->feature(table.columns[j]);
        }
    }
    return table;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

} // namespace detail

/// Header is the feature columns then "label"; one row per trajectory in tid
/// order; numbers use shortest round-trip formatting.
inline std::string to_csv(const FeatureTable& table) {
    std::string out;
    for (const auto& c : table.columns) out += detail::csv_field(c) + ',';
    out += "label\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            out += detail::format_double(table.values(i, j));
            out += ',';
        }
        out += detail::csv_field(table.labels[i]);
        out += '\n';
    }
    return out;
}

inline void export_csv(const FeatureTable& table, const std::filesystem::path& path) {
    if (table.size() == 0) fail(ErrorKind::empty_table, "refusing to export an empty table");
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        fail(ErrorKind::io, "cannot write CSV to directory " + path.string(), {{"path", path.string()}});
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing", {{"path", path.string()}});
    out << to_csv(table);
    if (!out) fail(ErrorKind::io, "write failed for " + path.string(), {{"path", path.string()}});
}

/// Reads a CSV with a "label" column. A "tid" column, if present, supplies
/// row ids; otherwise rows are numbered from 0. An "id" column is ignored.
inline FeatureTable parse_csv(const std::string& text, const std::string& origin = "<memory>") {
    std::vector<std::string> lines;
    {
        std::string current;
        for (char c : text) {
            if (c == '\n') {
                if (!current.empty() && current.back() == '\r') current.pop_back();
                lines.push_back(std::move(current));
                current.clear();
            } else {
                current += c;
            }
        }
        if (!current.empty()) lines.push_back(std::move(current));
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) fail(ErrorKind::parse, origin + ": empty CSV");

    const auto header = detail::split_csv_line(lines[0]);
    std::optional<std::size_t> label_col;
    std::optional<std::size_t> tid_col;
    std::vector<std::size_t> feature_cols;
    FeatureTable table;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "label") label_col = j;
        else if (header[j] == "tid") tid_col = j;
        else if (header[j] == "id") continue;
        else {
            feature_cols.push_back(j);
            table.columns.push_back(header[j]);
        }
    }
    if (!label_col) fail(ErrorKind::schema, origin + ": no \"label\" column");

    const std::size_t n = lines.size() - 1;
    table.values = Matrix(n, feature_cols.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = detail::split_csv_line(lines[i + 1]);
        if (fields.size() != header.size()) {
            fail(ErrorKind::parse, origin + ": line " + std::to_string(i + 2) + " has " + std::to_string(fields.size()) +
                                       " fields, expected " + std::to_string(header.size()),
                 {{"line", i + 2}});
        }
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const auto& f = fields[feature_cols[k]];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                fail(ErrorKind::parse, origin + ": line " + std::to_string(i + 2) + ": \"" + f + "\" is not a number",
                     {{"line", i + 2}, {"column", table.columns[k]}});
            }
            table.values(i, k) = v;
        }
        Tid tid = static_cast<Tid>(i);
        if (tid_col && !detail::parse_integer(fields[*tid_col], tid)) {
            fail(ErrorKind::parse, origin + ": line " + std::to_string(i + 2) + ": bad tid", {{"line", i + 2}});
        }
        table.tids.push_back(tid);
        table.labels.push_back(fields[*label_col]);
    }
    if (table.size() == 0) fail(ErrorKind::empty_table, origin + ": CSV has no rows");
    return table;
}

inline FeatureTable import_csv(const std::filesystem::path& path) {
    return parse_csv(detail::read_file(path), path.string());
}

} // namespace trajal
