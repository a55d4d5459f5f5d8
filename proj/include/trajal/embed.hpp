#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/pca.hpp"
#include "trajal/preprocess.hpp"
#include "trajal/trajectory.hpp"
#include "trajal/tsne.hpp"

namespace trajal {

enum class EmbeddingMethod { pca, tsne };

inline constexpr std::string_view to_string(EmbeddingMethod m) noexcept {
    return m == EmbeddingMethod::pca ? "pca" : "tsne";
}

struct Embedding {
    EmbeddingMethod method = EmbeddingMethod::pca;
    Matrix coords; // n x 2
    std::vector<std::string> labels;
};

struct EmbedResult {
    Embedding pca2;
    std::optional<Embedding> tsne2;
    std::optional<Error> tsne_error; // set when the t-SNE stage could not run
    std::size_t cascade_width = 0;
    double perplexity = 0.0; // effective value handed to t-SNE
};

/// Perplexity actually used for n points. Valid requests pass through; a
/// request that cannot be met (>= n - 1) drops to (n - 1) / 3, floored at 1.5.
inline double effective_perplexity(double requested, std::size_t n) {
    const double limit = static_cast<double>(n) - 1.0;
    if (requested < limit) return requested;
    return std::max(1.5, limit / 3.0);
}

/// z-score -> PCA(2) for the scatter; z-score -> PCA(floor(d/2)) -> t-SNE
/// for the second view. Both carry the table labels row-aligned.
inline EmbedResult embed_pipeline(const FeatureTable& table, TsneConfig config = {}) {
    const std::size_t n = table.size();
    const std::size_t d = table.columns.size();
    if (n == 0) fail(ErrorKind::empty_table, "embedding needs a non-empty table");
    if (d < 2) fail(ErrorKind::dimension, "embedding needs at least 2 feature columns", {{"d", d}});
    if (n < 2) fail(ErrorKind::dimension, "embedding needs at least 2 rows", {{"n", n}});

    const auto [z, params] = zscore_standardize(table.values);

    EmbedResult out;
    const PCAModel scatter = pca_fit(z, 2);
    out.pca2 = {EmbeddingMethod::pca, pca_transform(scatter, z), table.labels};

    out.cascade_width = cascade_width(d, n);
    if (n < 3) {
        out.tsne_error = Error(ErrorKind::degenerate, "t-SNE needs at least 3 rows", {{"n", n}});
        return out;
    }
    const PCAModel front = pca_fit(z, out.cascade_width);
    const Matrix reduced = pca_transform(front, z);
    config.perplexity = effective_perplexity(config.perplexity, n);
    out.perplexity = config.perplexity;
    out.tsne2 = Embedding{EmbeddingMethod::tsne, tsne_embed(reduced, config), table.labels};
    return out;
}

} // namespace trajal
