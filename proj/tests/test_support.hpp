#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "trajal/matrix.hpp"
#include "trajal/rng.hpp"

namespace trajal::support {

/// Two (or more) isotropic Gaussian blobs; class c is centred at
/// centers[c]. Rows are interleaved class by class.
struct Blobs {
    Matrix x;
    std::vector<int> y;
};

inline Blobs make_blobs(std::size_t per_class, const std::vector<std::vector<double>>& centers, double sigma,
                        std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t d = centers.front().size();
    Blobs b{Matrix(per_class * centers.size(), d), {}};
    std::size_t row = 0;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < centers.size(); ++c) {
            for (std::size_t j = 0; j < d; ++j) b.x(row, j) = centers[c][j] + sigma * rng.normal();
            b.y.push_back(static_cast<int>(c));
            ++row;
        }
    }
    return b;
}

inline Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(n, d);
    for (double& v : m.data()) v = dist(gen);
    return m;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("trajal_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace trajal::support
