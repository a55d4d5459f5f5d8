#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "trajal/error.hpp"

namespace trajal {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major from the top-left corner.
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, Rgb fill = {255, 255, 255})
        : width_(width), height_(height), pixels_(width * height, fill) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    const std::vector<Rgb>& pixels() const noexcept { return pixels_; }
    Rgb* data() noexcept { return pixels_.data(); }

    Rgb at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }

    /// Out-of-canvas writes are clipped.
    void set(long x, long y, Rgb c) noexcept {
        if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= width_ || static_cast<std::size_t>(y) >= height_) return;
        pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)] = c;
    }

    void fill_rect(long x0, long y0, long w, long h, Rgb c) noexcept {
        for (long y = y0; y < y0 + h; ++y)
            for (long x = x0; x < x0 + w; ++x) set(x, y, c);
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Rgb> pixels_;
};

/// PNG bytes for `img`. No timestamp or text chunks are written, so the
/// output depends on the pixels alone.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.width() == 0 || img.height() == 0) fail(ErrorKind::config, "cannot encode an empty image");
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(img.width());
    desc.height = static_cast<png_uint_32>(img.height());
    desc.format = PNG_FORMAT_RGB;
    static_assert(sizeof(Rgb) == 3);
    const void* buffer = img.pixels().data();
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, buffer, 0, nullptr)) {
        fail(ErrorKind::io, std::string("png encode failed: ") + desc.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, buffer, 0, nullptr)) {
        fail(ErrorKind::io, std::string("png encode failed: ") + desc.message);
    }
    out.resize(size);
    return out;
}

inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
        fail(ErrorKind::parse, std::string("png decode failed: ") + desc.message);
    }
    desc.format = PNG_FORMAT_RGB;
    Image img(desc.width, desc.height);
    if (!png_image_finish_read(&desc, nullptr, img.data(), 0, nullptr)) {
        png_image_free(&desc);
        fail(ErrorKind::parse, std::string("png decode failed: ") + desc.message);
    }
    return img;
}

inline void write_png(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string(), {{"path", path.string()}});
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "short write to " + path.string(), {{"path", path.string()}});
}

inline Image read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::not_found, "cannot open " + path.string(), {{"path", path.string()}});
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

} // namespace trajal
