#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trajal/ensemble.hpp"
#include "trajal/error.hpp"
#include "trajal/font.hpp"
#include "trajal/matrix.hpp"
#include "trajal/metrics.hpp"
#include "trajal/parallel.hpp"
#include "trajal/pca.hpp"
#include "trajal/png.hpp"
#include "trajal/preprocess.hpp"
#include "trajal/trajectory.hpp"

namespace trajal {

// ---------------------------------------------------------------------------
// Grid

struct GridSpec {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    double h = 0.02;
    std::size_t nx = 0, ny = 0;

    double x(std::size_t c) const noexcept { return x_min + static_cast<double>(c) * h; }
    double y(std::size_t r) const noexcept { return y_min + static_cast<double>(r) * h; }
};

/// Points in [lo, hi) on the progression lo + k*h. The small relative guard
/// keeps spans that are whole multiples of h (up to rounding) from gaining an
/// extra point at the upper bound.
inline std::size_t grid_count(double lo, double hi, double h) {
    const double steps = (hi - lo) / h;
    return static_cast<std::size_t>(std::ceil(steps - 1e-9 * std::max(1.0, steps)));
}

inline GridSpec build_grid(const Matrix& x2, double h = 0.02, double margin = 0.5) {
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::config, "grid step h must be positive", {{"h", h}});
    if (x2.rows() < 1) fail(ErrorKind::dimension, "build_grid needs at least one point");
    if (x2.cols() != 2) fail(ErrorKind::dimension, "build_grid needs 2-D points", {{"cols", x2.cols()}});
    if (!x2.all_finite()) fail(ErrorKind::numeric, "build_grid input has non-finite values");
    GridSpec g;
    g.h = h;
    const auto xs = x2.column(0);
    const auto ys = x2.column(1);
    g.x_min = *std::min_element(xs.begin(), xs.end()) - margin;
    g.x_max = *std::max_element(xs.begin(), xs.end()) + margin;
    g.y_min = *std::min_element(ys.begin(), ys.end()) - margin;
    g.y_max = *std::max_element(ys.begin(), ys.end()) + margin;
    if (!(g.x_min < g.x_max) || !(g.y_min < g.y_max)) fail(ErrorKind::config, "grid bounds are empty; use margin > 0");
    g.nx = grid_count(g.x_min, g.x_max, h);
    g.ny = grid_count(g.y_min, g.y_max, h);
    constexpr std::size_t max_cells = 25'000'000;
    if (g.nx * g.ny > max_cells) {
        fail(ErrorKind::config, "grid too large; increase h", {{"nx", g.nx}, {"ny", g.ny}});
    }
    return g;
}

/// Row-major ny x nx class codes, y increasing with the row index.
struct Raster {
    std::size_t nx = 0, ny = 0;
    std::vector<int> codes;

    int at(std::size_t r, std::size_t c) const noexcept { return codes[r * nx + c]; }
    friend bool operator==(const Raster&, const Raster&) = default;
};

inline Raster classify_grid(const EnsembleModel& model, const GridSpec& grid) {
    if (model.n_features != 2) {
        fail(ErrorKind::dimension, "classify_grid needs a model trained on 2 features", {{"n_features", model.n_features}});
    }
    Raster out{grid.nx, grid.ny, {}};
    out.codes.reserve(grid.nx * grid.ny);
    // One row of the grid at a time keeps the probability matrix small.
    Matrix pts(grid.nx, 2);
    for (std::size_t r = 0; r < grid.ny; ++r) {
        for (std::size_t c = 0; c < grid.nx; ++c) {
            pts(c, 0) = grid.x(c);
            pts(c, 1) = grid.y(r);
        }
        const auto row = model.predict(pts);
        out.codes.insert(out.codes.end(), row.begin(), row.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Colors

namespace detail {

inline const std::map<std::string, Rgb, std::less<>>& named_colors() {
    static const std::map<std::string, Rgb, std::less<>> table = {
        {"black", {0, 0, 0}},          {"white", {255, 255, 255}},     {"red", {255, 0, 0}},
        {"lime", {0, 255, 0}},         {"green", {0, 128, 0}},         {"blue", {0, 0, 255}},
        {"yellow", {255, 255, 0}},     {"cyan", {0, 255, 255}},        {"aqua", {0, 255, 255}},
        {"magenta", {255, 0, 255}},    {"fuchsia", {255, 0, 255}},     {"silver", {192, 192, 192}},
        {"gray", {128, 128, 128}},     {"grey", {128, 128, 128}},      {"maroon", {128, 0, 0}},
        {"olive", {128, 128, 0}},      {"purple", {128, 0, 128}},      {"teal", {0, 128, 128}},
        {"navy", {0, 0, 128}},         {"orange", {255, 165, 0}},      {"brown", {165, 42, 42}},
        {"pink", {255, 192, 203}},     {"gold", {255, 215, 0}},        {"violet", {238, 130, 238}},
        {"indigo", {75, 0, 130}},      {"crimson", {220, 20, 60}},     {"coral", {255, 127, 80}},
        {"salmon", {250, 128, 114}},   {"tomato", {255, 99, 71}},      {"orchid", {218, 112, 214}},
        {"khaki", {240, 230, 140}},    {"turquoise", {64, 224, 208}},  {"tan", {210, 180, 140}},
        {"chocolate", {210, 105, 30}}, {"darkred", {139, 0, 0}},       {"darkblue", {0, 0, 139}},
        {"darkgreen", {0, 100, 0}},    {"darkorange", {255, 140, 0}},  {"lightblue", {173, 216, 230}},
        {"lightgreen", {144, 238, 144}}, {"lightgray", {211, 211, 211}}, {"lightgrey", {211, 211, 211}},
        {"darkgray", {169, 169, 169}}, {"darkgrey", {169, 169, 169}},  {"steelblue", {70, 130, 180}},
        {"royalblue", {65, 105, 225}}, {"skyblue", {135, 206, 235}},   {"firebrick", {178, 34, 34}},
        {"forestgreen", {34, 139, 34}}, {"seagreen", {46, 139, 87}},   {"slategray", {112, 128, 144}},
        {"limegreen", {50, 205, 50}},  {"deepskyblue", {0, 191, 255}}, {"dodgerblue", {30, 144, 255}},
        {"hotpink", {255, 105, 180}},  {"plum", {221, 160, 221}},      {"beige", {245, 245, 220}},
    };
    return table;
}

inline int hex_digit(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace detail

/// "#rgb", "#rrggbb" or a CSS color name (case-insensitive).
inline Rgb parse_color(std::string_view text) {
    if (!text.empty() && text.front() == '#') {
        const auto hex = text.substr(1);
        std::vector<int> d;
        for (char c : hex) d.push_back(detail::hex_digit(c));
        const bool ok = (hex.size() == 3 || hex.size() == 6) && std::none_of(d.begin(), d.end(), [](int v) { return v < 0; });
        if (!ok) fail(ErrorKind::config, "bad color \"" + std::string(text) + "\"", {{"color", text}});
        if (hex.size() == 3) return {static_cast<std::uint8_t>(d[0] * 17), static_cast<std::uint8_t>(d[1] * 17), static_cast<std::uint8_t>(d[2] * 17)};
        return {static_cast<std::uint8_t>(d[0] * 16 + d[1]), static_cast<std::uint8_t>(d[2] * 16 + d[3]),
                static_cast<std::uint8_t>(d[4] * 16 + d[5])};
    }
    std::string lower(text);
    lower.erase(std::remove(lower.begin(), lower.end(), ' '), lower.end());
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto& names = detail::named_colors();
    auto it = names.find(lower);
    if (it == names.end()) fail(ErrorKind::config, "unknown color \"" + std::string(text) + "\"", {{"color", text}});
    return it->second;
}

/// label -> color text, client supplied.
using ColorScale = std::map<std::string, std::string>;

/// Two-class default: red for the first label, blue for the second; further
/// labels cycle through a qualitative set.
inline ColorScale default_color_scale(const std::vector<std::string>& labels) {
    static constexpr std::array<std::string_view, 8> palette = {"#b2182b", "#2166ac", "#1b9e77", "#d95f02",
                                                                "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
    ColorScale out;
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]] = std::string(palette[i % palette.size()]);
    return out;
}

/// Resolves every label through `colors`; the first uncovered label is a
/// config error naming it.
inline std::vector<Rgb> resolve_colors(const LabelCodec& codec, const ColorScale& colors) {
    std::vector<Rgb> out;
    for (const auto& label : codec.labels()) {
        auto it = colors.find(label);
        if (it == colors.end()) {
            fail(ErrorKind::config, "colorScale has no color for label \"" + label + "\"", {{"label", label}});
        }
        out.push_back(parse_color(it->second));
    }
    return out;
}

/// alpha * c + (1 - alpha) * white, rounded to nearest.
inline Rgb blend_over_white(Rgb c, double alpha) noexcept {
    auto mix = [alpha](std::uint8_t v) {
        return static_cast<std::uint8_t>(std::lround(alpha * v + (1.0 - alpha) * 255.0));
    };
    return {mix(c.r), mix(c.g), mix(c.b)};
}

/// Round to 2 decimals, printed the shortest way with at least one decimal
/// ("1.0", "0.88", "0.5").
inline std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", score);
    std::string s(buf);
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

// ---------------------------------------------------------------------------
// Surface and rendering

struct TestPoint {
    double x = 0.0, y = 0.0;
    int true_code = 0;
    int predicted_code = 0;
};

struct DecisionSurface {
    GridSpec grid;
    Raster raster;
    std::vector<TestPoint> test_points;
    double f_score = 0.0;
    std::string model_name;
    std::size_t index = 1; // title ordinal
};

inline std::string surface_title(const DecisionSurface& s) {
    return std::to_string(s.index) + ". " + s.model_name + ", F-Score: " + format_score(s.f_score);
}

struct RenderLayout {
    long block = 1; // pixels per grid cell
    long left = 0, top = 0, plot_w = 0, plot_h = 0;
    long width = 0, height = 0;
};

inline RenderLayout layout_for(const GridSpec& g) {
    RenderLayout l;
    const auto longest = static_cast<long>(std::max(g.nx, g.ny));
    l.block = std::max(1L, (480 + longest - 1) / std::max(1L, longest));
    l.plot_w = static_cast<long>(g.nx) * l.block;
    l.plot_h = static_cast<long>(g.ny) * l.block;
    constexpr long margin_left = 60, margin_right = 30, margin_top = 40, margin_bottom = 40;
    l.width = std::max(600L, l.plot_w + margin_left + margin_right);
    l.height = std::max(350L, l.plot_h + margin_top + margin_bottom);
    l.left = margin_left + (l.width - margin_left - margin_right - l.plot_w) / 2;
    l.top = margin_top + (l.height - margin_top - margin_bottom - l.plot_h) / 2;
    return l;
}

namespace detail {

inline std::string axis_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(std::string_view(buf) == "-0.00" ? "0.00" : buf);
}

inline void draw_disc(Image& img, long cx, long cy, long radius, Rgb fill, Rgb edge) {
    for (long dy = -radius; dy <= radius; ++dy) {
        for (long dx = -radius; dx <= radius; ++dx) {
            const long d2 = dx * dx + dy * dy;
            if (d2 > radius * radius) continue;
            img.set(cx + dx, cy + dy, d2 > (radius - 1) * (radius - 1) ? edge : fill);
        }
    }
}

inline void draw_frame_and_axes(Image& img, const RenderLayout& l, const GridSpec& g, const std::string& title) {
    const Rgb black{0, 0, 0};
    const Rgb ink{40, 40, 40};
    img.fill_rect(l.left - 1, l.top - 1, l.plot_w + 2, 1, black);
    img.fill_rect(l.left - 1, l.top + l.plot_h, l.plot_w + 2, 1, black);
    img.fill_rect(l.left - 1, l.top - 1, 1, l.plot_h + 2, black);
    img.fill_rect(l.left + l.plot_w, l.top - 1, 1, l.plot_h + 2, black);

    const int title_scale = text_width(title, 2) + 20 <= l.width ? 2 : 1;
    draw_text(img, (l.width - text_width(title, title_scale)) / 2, (l.top - glyph_height * title_scale) / 2, title, ink,
              title_scale);

    const long tick = 4;
    const std::string xl = axis_number(g.x_min), xr = axis_number(g.x_max);
    const std::string yb = axis_number(g.y_min), yt = axis_number(g.y_max);
    img.fill_rect(l.left, l.top + l.plot_h, 1, tick, black);
    img.fill_rect(l.left + l.plot_w - 1, l.top + l.plot_h, 1, tick, black);
    draw_text(img, l.left - text_width(xl) / 2, l.top + l.plot_h + tick + 3, xl, ink);
    draw_text(img, l.left + l.plot_w - text_width(xr) / 2, l.top + l.plot_h + tick + 3, xr, ink);
    img.fill_rect(l.left - tick, l.top + l.plot_h - 1, tick, 1, black);
    img.fill_rect(l.left - tick, l.top, tick, 1, black);
    draw_text(img, l.left - tick - 3 - text_width(yb), l.top + l.plot_h - glyph_height / 2 - 1, yb, ink);
    draw_text(img, l.left - tick - 3 - text_width(yt), l.top - glyph_height / 2, yt, ink);
}

inline void draw_points(Image& img, const RenderLayout& l, const GridSpec& g, const std::vector<TestPoint>& pts,
                        const std::vector<Rgb>& palette, bool use_truth) {
    const Rgb white{255, 255, 255};
    const double scale = static_cast<double>(l.block) / g.h;
    for (const auto& p : pts) {
        const long px = l.left + std::lround((p.x - g.x_min) * scale);
        const long py = l.top + l.plot_h - 1 - std::lround((p.y - g.y_min) * scale);
        draw_disc(img, px, py, 5, palette[static_cast<std::size_t>(use_truth ? p.true_code : p.predicted_code)], white);
    }
}

inline void check_code(int code, std::size_t palette_size) {
    if (code < 0 || static_cast<std::size_t>(code) >= palette_size) {
        fail(ErrorKind::config, "class code has no color", {{"code", code}});
    }
}

} // namespace detail

/// Rasterized decision regions (class color at 75% over white) with test
/// points drawn opaque in their predicted-class color. `palette[code]`.
inline Image render_surface_image(const DecisionSurface& s, const std::vector<Rgb>& palette) {
    for (int c : s.raster.codes) detail::check_code(c, palette.size());
    for (const auto& p : s.test_points) detail::check_code(p.predicted_code, palette.size());
    const RenderLayout l = layout_for(s.grid);
    Image img(static_cast<std::size_t>(l.width), static_cast<std::size_t>(l.height));
    std::vector<Rgb> fill;
    for (Rgb c : palette) fill.push_back(blend_over_white(c, 0.75));
    for (std::size_t r = 0; r < s.raster.ny; ++r) {
        const long y0 = l.top + static_cast<long>(s.raster.ny - 1 - r) * l.block;
        for (std::size_t c = 0; c < s.raster.nx; ++c) {
            img.fill_rect(l.left + static_cast<long>(c) * l.block, y0, l.block, l.block,
                          fill[static_cast<std::size_t>(s.raster.at(r, c))]);
        }
    }
    detail::draw_points(img, l, s.grid, s.test_points, palette, false);
    detail::draw_frame_and_axes(img, l, s.grid, surface_title(s));
    return img;
}

inline void render_surface(const DecisionSurface& s, const LabelCodec& codec, const ColorScale& colors,
                           const std::filesystem::path& path) {
    write_png(render_surface_image(s, resolve_colors(codec, colors)), path);
}

/// Ground-truth scatter of the test points on a blank plot.
inline Image render_truth_image(const GridSpec& grid, const std::vector<TestPoint>& pts, const std::vector<Rgb>& palette) {
    for (const auto& p : pts) detail::check_code(p.true_code, palette.size());
    const RenderLayout l = layout_for(grid);
    Image img(static_cast<std::size_t>(l.width), static_cast<std::size_t>(l.height));
    detail::draw_points(img, l, grid, pts, palette, true);
    detail::draw_frame_and_axes(img, l, grid, "0. Ground Truth");
    return img;
}

// ---------------------------------------------------------------------------
// Pipeline

struct SurfaceOptions {
    double h = 0.02;
    double margin = 0.5;
    SplitConfig split{};       // 80/20, seed 34
    std::uint64_t seed = 34;   // model seed
    bool ground_truth = false; // also write test_0.png
    unsigned threads = 1;
};

struct SurfaceResult {
    std::vector<std::filesystem::path> paths; // test_1..3.png, in model order
    std::vector<DecisionSurface> surfaces;
    std::optional<std::filesystem::path> ground_truth_path;
    LabelCodec codec;
    Matrix projected; // min-max + PCA-2 coordinates of every row
};

inline constexpr std::array<ModelKind, 3> surface_models = {ModelKind::forest, ModelKind::extra_trees,
                                                            ModelKind::gradient_boosting};

/// Min-max rescale, PCA to 2-D, 80/20 split, then for each model kind: fit,
/// score on the test part, classify the grid and write test_<i+1>.png.
inline SurfaceResult surface_pipeline(const FeatureTable& table, const ColorScale& colors,
                                      const std::filesystem::path& out_dir, const SurfaceOptions& opt = {}) {
    if (table.size() == 0) fail(ErrorKind::empty_table, "surface pipeline needs a non-empty table");
    if (table.values.cols() < 2) {
        fail(ErrorKind::dimension, "surface pipeline needs at least 2 feature columns", {{"cols", table.values.cols()}});
    }
    auto [codes, codec] = encode_labels(table.labels);
    if (codec.size() < 2) fail(ErrorKind::degenerate, "surface pipeline needs at least 2 classes", {{"classes", codec.labels()}});
    const std::vector<Rgb> palette = resolve_colors(codec, colors);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir)) {
        fail(ErrorKind::io, "cannot create image directory " + out_dir.string(), {{"path", out_dir.string()}});
    }

    SurfaceResult result;
    const auto [scaled, mm] = minmax_rescale(table.values);
    const PCAModel pca = pca_fit(scaled, 2);
    result.projected = pca_transform(pca, scaled);
    const auto split = split_train_test(result.projected, codes, opt.split);
    const GridSpec grid = build_grid(result.projected, opt.h, opt.margin);

    result.surfaces.resize(surface_models.size());
    result.paths.resize(surface_models.size());
    parallel_for(surface_models.size(), opt.threads, [&](std::size_t i) {
        const ModelKind kind = surface_models[i];
        const EnsembleModel model = fit_model(kind, split.x_train, split.y_train, opt.seed, codec.size());
        const auto hue = model.predict(split.x_test);
        DecisionSurface& s = result.surfaces[i];
        s.grid = grid;
        s.f_score = weighted_f1(split.y_test, hue);
        s.model_name = std::string(display_name(kind));
        s.index = i + 1;
        s.raster = classify_grid(model, grid);
        for (std::size_t t = 0; t < split.x_test.rows(); ++t) {
            s.test_points.push_back({split.x_test(t, 0), split.x_test(t, 1), split.y_test[t], hue[t]});
        }
        result.paths[i] = out_dir / ("test_" + std::to_string(i + 1) + ".png");
        write_png(render_surface_image(s, palette), result.paths[i]);
    });
    if (opt.ground_truth) {
        result.ground_truth_path = out_dir / "test_0.png";
        write_png(render_truth_image(grid, result.surfaces.front().test_points, palette), *result.ground_truth_path);
    }
    result.codec = std::move(codec);
    return result;
}

} // namespace trajal
