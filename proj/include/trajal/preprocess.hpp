#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"

namespace trajal {

struct ZScoreParams {
    std::vector<double> mean;
    std::vector<double> std; // population convention; 0 for constant columns

    Matrix transform(const Matrix& x) const {
        if (x.cols() != mean.size()) fail(ErrorKind::dimension, "z-score: column count mismatch");
        Matrix out(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                const double scale = std[j] > 0.0 ? std[j] : 1.0;
                out(i, j) = (x(i, j) - mean[j]) / scale;
            }
        }
        return out;
    }

    Matrix inverse_transform(const Matrix& z) const {
        Matrix out(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.rows(); ++i) {
            for (std::size_t j = 0; j < z.cols(); ++j) {
                const double scale = std[j] > 0.0 ? std[j] : 1.0;
                out(i, j) = z(i, j) * scale + mean[j];
            }
        }
        return out;
    }
};

struct MinMaxParams {
    std::vector<double> min;
    std::vector<double> range;

    Matrix transform(const Matrix& x) const {
        if (x.cols() != min.size()) fail(ErrorKind::dimension, "min-max: column count mismatch");
        Matrix out(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                out(i, j) = range[j] > 0.0 ? (x(i, j) - min[j]) / range[j] : 0.0;
            }
        }
        return out;
    }
};

/// Fit and apply z = (x - mean) / std column-wise. Zero-variance columns
/// are centred only, so they come out as zeros.
inline std::pair<Matrix, ZScoreParams> zscore_standardize(const Matrix& x) {
    if (x.empty()) fail(ErrorKind::dimension, "z-score: empty matrix");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    ZScoreParams params{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += x(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = x(i, j) - mean;
            ss += c * c;
        }
        params.mean[j] = mean;
        params.std[j] = std::sqrt(ss / static_cast<double>(n));
    }
    Matrix z = params.transform(x);
    for (std::size_t j = 0; j < d; ++j) {
        if (params.std[j] == 0.0) {
            for (std::size_t i = 0; i < n; ++i) z(i, j) = 0.0;
        }
    }
    return {std::move(z), std::move(params)};
}

inline std::pair<Matrix, MinMaxParams> minmax_rescale(const Matrix& x) {
    if (x.empty()) fail(ErrorKind::dimension, "min-max: empty matrix");
    const std::size_t d = x.cols();
    MinMaxParams params{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) {
        double lo = x(0, j);
        double hi = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) {
            lo = std::min(lo, x(i, j));
            hi = std::max(hi, x(i, j));
        }
        params.min[j] = lo;
        params.range[j] = hi - lo;
    }
    Matrix out = params.transform(x);
    // Guard the upper edge against (max - min) / range rounding past 1.
    for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
    return {std::move(out), std::move(params)};
}

/// Bijective label <-> code map; codes follow first appearance.
class LabelCodec {
public:
    LabelCodec() = default;
    explicit LabelCodec(const std::vector<std::string>& labels) {
        for (const auto& l : labels) add(l);
    }

    int add(const std::string& label) {
        auto [it, inserted] = forward_.try_emplace(label, static_cast<int>(reverse_.size()));
        if (inserted) reverse_.push_back(label);
        return it->second;
    }

    bool contains(const std::string& label) const { return forward_.contains(label); }

    int encode(const std::string& label) const {
        auto it = forward_.find(label);
        if (it == forward_.end()) fail(ErrorKind::config, "unknown label \"" + label + "\"", {{"label", label}});
        return it->second;
    }

    const std::string& decode(int code) const {
        if (code < 0 || static_cast<std::size_t>(code) >= reverse_.size()) {
            fail(ErrorKind::config, "unknown class code " + std::to_string(code));
        }
        return reverse_[static_cast<std::size_t>(code)];
    }

    std::size_t size() const noexcept { return reverse_.size(); }
    const std::vector<std::string>& labels() const noexcept { return reverse_; }
    const std::map<std::string, int>& forward() const noexcept { return forward_; }

    friend bool operator==(const LabelCodec& a, const LabelCodec& b) { return a.reverse_ == b.reverse_; }

private:
    std::map<std::string, int> forward_;
    std::vector<std::string> reverse_;
};

inline std::pair<std::vector<int>, LabelCodec> encode_labels(const std::vector<std::string>& labels) {
    LabelCodec codec;
    std::vector<int> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) codes.push_back(codec.add(l));
    return {std::move(codes), std::move(codec)};
}

} // namespace trajal
