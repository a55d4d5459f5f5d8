#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trajal/ensemble.hpp"
#include "trajal/error.hpp"
#include "trajal/matrix.hpp"
#include "trajal/metrics.hpp"
#include "trajal/pca.hpp"
#include "trajal/preprocess.hpp"
#include "trajal/rng.hpp"
#include "trajal/trajectory.hpp"

namespace trajal {

enum class Strategy { rnd, unc, qbc };
enum class FeatureSpace { full, pca2 };

inline constexpr std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::rnd: return "RND";
    case Strategy::unc: return "UNC";
    case Strategy::qbc: return "QBC";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view s) {
    std::string up(s);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "RND") return Strategy::rnd;
    if (up == "UNC") return Strategy::unc;
    if (up == "QBC") return Strategy::qbc;
    fail(ErrorKind::config, "unknown strategy \"" + std::string(s) + "\"", {{"strategy", s}});
}

inline constexpr std::string_view to_string(FeatureSpace f) noexcept { return f == FeatureSpace::full ? "full" : "pca2"; }

inline FeatureSpace parse_feature_space(std::string_view s) {
    if (s == "full") return FeatureSpace::full;
    if (s == "pca2") return FeatureSpace::pca2;
    fail(ErrorKind::config, "unknown feature_space \"" + std::string(s) + "\"", {{"feature_space", s}});
}

struct ALConfig {
    Strategy strategy = Strategy::unc;
    ModelKind classifier = ModelKind::forest;
    std::size_t budget = 10;
    std::size_t bag_size = 2;
    std::uint64_t seed = 34;
    FeatureSpace feature_space = FeatureSpace::full;
    std::vector<std::string> labels; // declared label set (interactive mode)
    unsigned threads = 1;            // tree fitting only; results do not depend on it
};

inline nlohmann::json to_json(const ALConfig& c) {
    return {{"strategy", to_string(c.strategy)},   {"classifier", to_string(c.classifier)},
            {"budget", c.budget},                  {"bag_size", c.bag_size},
            {"seed", c.seed},                      {"feature_space", to_string(c.feature_space)},
            {"labels", c.labels}};
}

/// Missing keys keep the values already in `base`.
inline ALConfig al_config_from_json(const nlohmann::json& j, ALConfig base = {}) {
    if (!j.is_object()) fail(ErrorKind::config, "session config must be a JSON object");
    try {
        if (j.contains("strategy")) base.strategy = parse_strategy(j.at("strategy").get<std::string>());
        if (j.contains("classifier")) base.classifier = parse_model_kind(j.at("classifier").get<std::string>());
        if (j.contains("budget")) base.budget = j.at("budget").get<std::size_t>();
        if (j.contains("bag_size")) base.bag_size = j.at("bag_size").get<std::size_t>();
        if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("feature_space")) base.feature_space = parse_feature_space(j.at("feature_space").get<std::string>());
        if (j.contains("labels")) base.labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string("invalid session config: ") + e.what());
    }
    return base;
}

struct InformativenessScore {
    Tid tid = 0;
    double score = 0.0;
};

struct HistoryEntry {
    std::size_t round = 0; // 1-based round that this submit completed
    std::vector<Tid> queried;
    std::vector<std::string> labels;
    std::optional<double> holdout_f1;
};

/// 1 - max_c p(c|x) per row.
inline std::vector<double> least_confidence(const Matrix& proba) {
    std::vector<double> out(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        const auto row = proba.row(i);
        out[i] = 1.0 - *std::max_element(row.begin(), row.end());
    }
    return out;
}

/// -sum_c (v_c/|C|) ln(v_c/|C|) over one committee's votes.
inline double vote_entropy(std::span<const int> votes) {
    if (votes.empty()) return 0.0;
    std::map<int, std::size_t> tally;
    for (int v : votes) ++tally[v];
    const double c = static_cast<double>(votes.size());
    double h = 0.0;
    for (const auto& [cls, count] : tally) {
        const double f = static_cast<double>(count) / c;
        h -= f * std::log(f);
    }
    return h;
}

/// Per-tid uniform draw; depends only on (seed, round, tid), never on labels.
inline double random_score(std::uint64_t seed, std::size_t round, Tid tid) noexcept {
    return Rng(mix_seed(mix_seed(seed, round), static_cast<std::uint64_t>(tid))).uniform();
}

/// Highest score first, lower tid on ties.
inline std::vector<Tid> top_k(std::vector<InformativenessScore> scores, std::size_t k) {
    k = std::min(k, scores.size());
    auto better = [](const InformativenessScore& a, const InformativenessScore& b) {
        return a.score != b.score ? a.score > b.score : a.tid < b.tid;
    };
    std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k), scores.end(), better);
    std::vector<Tid> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(scores[i].tid);
    return out;
}

struct SessionStatus {
    std::size_t round = 0;
    std::size_t labeled_count = 0;
    std::size_t pending_count = 0;
    std::size_t pool_size = 0;
    std::size_t budget = 0;
    std::size_t remaining = 0;
    bool complete = false;
    std::map<std::string, std::size_t> label_counts;
};

inline constexpr int session_format_version = 1;

/// Pool-based active-learning state. Pool, pending bag and labeled set are
/// disjoint and together always cover the initial pool.
class ALSession {
public:
    /// Interactive session: table labels are hidden from the session.
    static ALSession create(const FeatureTable& table, const ALConfig& config, std::string id = {}) {
        ALSession s(table, config, std::move(id));
        for (const auto& l : config.labels) s.codec_.add(l);
        return s;
    }

    /// Simulated session: the table labels become the answer key and a seeded
    /// `holdout_fraction` of rows is reserved (never queried) for F1 tracking.
    static ALSession create_simulated(const FeatureTable& table, const ALConfig& config, double holdout_fraction,
                                      std::string id = {}) {
        if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
            fail(ErrorKind::config, "holdout_fraction must lie in [0, 1)", {{"holdout_fraction", holdout_fraction}});
        }
        if (holdout_fraction == 0.0) return create_simulated(table, FeatureTable{}, config, std::move(id));
        const auto [pool, holdout] = split_table(table, holdout_fraction, config.seed);
        return create_simulated(pool, holdout, config, std::move(id));
    }

    /// Simulated session with an explicit holdout table (may be empty).
    static ALSession create_simulated(const FeatureTable& pool, const FeatureTable& holdout, const ALConfig& config,
                                      std::string id = {}) {
        ALSession s(pool, config, std::move(id));
        s.simulated_ = true;
        for (std::size_t i = 0; i < pool.size(); ++i) s.answer_key_[pool.tids[i]] = pool.labels[i];
        for (const auto& l : pool.labels) s.codec_.add(l);
        for (const auto& l : config.labels) s.codec_.add(l);
        if (holdout.size() > 0) {
            if (holdout.columns != pool.columns) fail(ErrorKind::dimension, "holdout columns differ from pool columns");
            for (const auto& l : holdout.labels) s.codec_.add(l);
            s.holdout_tids_ = holdout.tids;
            s.holdout_x_ = s.project(holdout.values);
            for (const auto& l : holdout.labels) s.holdout_y_.push_back(s.codec_.encode(l));
        }
        return s;
    }

    /// Rebuild a persisted session over the same table (models are refit).
    static ALSession restore(const FeatureTable& table, const nlohmann::json& doc) {
        if (doc.value("format", "") != "trajal.session" || doc.value("version", 0) != session_format_version) {
            fail(ErrorKind::schema, "not a supported session document");
        }
        const ALConfig config = al_config_from_json(doc.at("config"));
        const bool simulated = doc.value("simulated", false);
        const std::set<Tid> holdout(doc.at("holdout").begin(), doc.at("holdout").end());
        FeatureTable pool, held;
        pool.columns = held.columns = table.columns;
        std::vector<std::size_t> pool_rows, held_rows;
        for (std::size_t i = 0; i < table.size(); ++i) (holdout.contains(table.tids[i]) ? held_rows : pool_rows).push_back(i);
        auto take = [&](FeatureTable& dst, const std::vector<std::size_t>& rows) {
            dst.values = table.values.select_rows(rows);
            for (auto r : rows) {
                dst.tids.push_back(table.tids[r]);
                dst.labels.push_back(table.labels[r]);
            }
        };
        take(pool, pool_rows);
        take(held, held_rows);
        const std::string id = doc.at("id").get<std::string>();
        ALSession s = simulated ? create_simulated(pool, held, config, id) : create(pool, config, id);
        for (const auto& l : doc.at("declared_labels")) s.codec_.add(l.get<std::string>());
        // Replay rounds so models and RND streams line up exactly.
        for (const auto& h : doc.at("history")) {
            std::map<Tid, std::string> answers;
            const auto& q = h.at("queried");
            const auto& l = h.at("labels");
            for (std::size_t i = 0; i < q.size(); ++i) answers[q[i].get<Tid>()] = l[i].get<std::string>();
            s.pending_ = q.get<std::vector<Tid>>();
            for (Tid t : s.pending_) s.pool_.erase(t);
            s.submit_labels(answers);
        }
        const auto pending = doc.at("pending").get<std::vector<Tid>>();
        for (Tid t : pending) {
            if (!s.pool_.erase(t)) fail(ErrorKind::schema, "pending tid not in pool", {{"tid", t}});
        }
        s.pending_ = pending;
        return s;
    }

    const std::string& id() const noexcept { return id_; }
    const ALConfig& config() const noexcept { return config_; }
    const std::set<Tid>& pool() const noexcept { return pool_; }
    const std::vector<Tid>& pending() const noexcept { return pending_; }
    const std::map<Tid, std::string>& labeled() const noexcept { return labeled_; }
    std::size_t round() const noexcept { return round_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    const std::optional<EnsembleModel>& model() const noexcept { return model_; }
    const LabelCodec& codec() const noexcept { return codec_; }
    bool simulated() const noexcept { return simulated_; }
    std::size_t initial_pool_size() const noexcept { return tids_.size(); }
    const std::vector<Tid>& holdout_tids() const noexcept { return holdout_tids_; }
    const std::vector<std::string>& columns() const noexcept { return columns_; }

    bool complete() const noexcept {
        return labeled_.size() >= config_.budget || (pool_.empty() && pending_.empty());
    }

    std::size_t remaining_budget() const noexcept { return config_.budget - labeled_.size(); }

    void declare_label(const std::string& label) {
        if (label.empty()) fail(ErrorKind::config, "label must be non-empty");
        codec_.add(label);
    }

    /// The simulated oracle's answer for `tid`.
    const std::string& oracle_label(Tid tid) const {
        if (!simulated_) fail(ErrorKind::protocol, "session has no simulated oracle");
        auto it = answer_key_.find(tid);
        if (it == answer_key_.end()) fail(ErrorKind::not_found, "unknown tid", {{"tid", tid}});
        return it->second;
    }

    /// Original (unscaled) feature values of one pool trajectory.
    std::map<std::string, double> feature_summary(Tid tid) const {
        const std::size_t r = row_of(tid);
        std::map<std::string, double> out;
        for (std::size_t c = 0; c < columns_.size(); ++c) out[columns_[c]] = raw_(r, c);
        return out;
    }

    /// Scores over the current pool (pending tids excluded). Falls back to RND
    /// at round 0 and while the labeled set holds a single class.
    std::vector<InformativenessScore> informativeness_scores() const {
        std::vector<InformativenessScore> out;
        out.reserve(pool_.size());
        if (pool_.empty()) return out;
        std::vector<std::size_t> rows;
        rows.reserve(pool_.size());
        for (Tid t : pool_) rows.push_back(row_of(t));

        if (effective_strategy() == Strategy::rnd) {
            for (Tid t : pool_) out.push_back({t, random_score(config_.seed, round_, t)});
            return out;
        }
        const Matrix xp = features_.select_rows(rows);
        std::vector<double> scores;
        if (effective_strategy() == Strategy::unc) {
            scores = least_confidence(model_->predict_proba(xp));
        } else {
            std::vector<std::vector<int>> votes;
            for (const auto& m : committee_) votes.push_back(m.predict(xp));
            scores.resize(rows.size());
            std::vector<int> v(votes.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t m = 0; m < votes.size(); ++m) v[m] = votes[m][i];
                scores[i] = vote_entropy(v);
            }
        }
        std::size_t i = 0;
        for (Tid t : pool_) out.push_back({t, scores[i++]});
        return out;
    }

    Strategy effective_strategy() const noexcept {
        if (round_ == 0 || !model_ || model_->degenerate) return Strategy::rnd;
        return config_.strategy;
    }

    /// The pending bag; selects a fresh one only when none is outstanding.
    const std::vector<Tid>& next_bag() {
        if (complete()) {
            fail(ErrorKind::session_complete, "label budget exhausted",
                 {{"budget", config_.budget}, {"labeled", labeled_.size()}});
        }
        if (!pending_.empty()) return pending_;
        const std::size_t k = std::min({config_.bag_size, remaining_budget(), pool_.size()});
        pending_ = top_k(informativeness_scores(), k);
        for (Tid t : pending_) pool_.erase(t);
        return pending_;
    }

    /// Answers must cover the pending bag exactly, with declared labels.
    void submit_labels(const std::map<Tid, std::string>& answers) {
        if (pending_.empty()) fail(ErrorKind::protocol, "no pending bag; request one first");
        const std::set<Tid> expected(pending_.begin(), pending_.end());
        std::vector<Tid> unexpected, missing;
        for (const auto& [t, l] : answers)
            if (!expected.contains(t)) unexpected.push_back(t);
        for (Tid t : pending_)
            if (!answers.contains(t)) missing.push_back(t);
        if (!unexpected.empty() || !missing.empty()) {
            fail(ErrorKind::protocol, "answers must match the pending bag exactly",
                 {{"unexpected_tids", unexpected}, {"missing_tids", missing}});
        }
        std::vector<std::string> undeclared;
        for (const auto& [t, l] : answers)
            if (!codec_.contains(l)) undeclared.push_back(l);
        if (!undeclared.empty()) fail(ErrorKind::protocol, "labels must be declared first", {{"undeclared_labels", undeclared}});

        HistoryEntry entry;
        entry.round = round_ + 1;
        for (Tid t : pending_) {
            entry.queried.push_back(t);
            entry.labels.push_back(answers.at(t));
            labeled_[t] = answers.at(t);
        }
        pending_.clear();
        ++round_;
        retrain();
        if (!holdout_y_.empty() && model_) entry.holdout_f1 = weighted_f1(holdout_y_, model_->predict(holdout_x_));
        history_.push_back(std::move(entry));
    }

    SessionStatus status() const {
        SessionStatus s;
        s.round = round_;
        s.labeled_count = labeled_.size();
        s.pending_count = pending_.size();
        s.pool_size = pool_.size();
        s.budget = config_.budget;
        s.remaining = remaining_budget();
        s.complete = complete();
        for (const auto& l : codec_.labels()) s.label_counts[l] = 0;
        for (const auto& [t, l] : labeled_) ++s.label_counts[l];
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& h : history_) {
            hist.push_back({{"round", h.round},
                            {"queried", h.queried},
                            {"labels", h.labels},
                            {"holdout_f1", h.holdout_f1 ? nlohmann::json(*h.holdout_f1) : nlohmann::json(nullptr)}});
        }
        return {{"format", "trajal.session"}, {"version", session_format_version},
                {"id", id_},                  {"config", trajal::to_json(config_)},
                {"simulated", simulated_},    {"declared_labels", codec_.labels()},
                {"holdout", holdout_tids_},   {"pending", pending_},
                {"round", round_},            {"history", hist}};
    }

private:
    ALSession(const FeatureTable& table, const ALConfig& config, std::string id)
        : id_(std::move(id)), config_(config), tids_(table.tids), columns_(table.columns), raw_(table.values) {
        if (config.budget < 1) fail(ErrorKind::config, "budget must be >= 1");
        if (config.bag_size < 1) fail(ErrorKind::config, "bag_size must be >= 1");
        if (config.bag_size > config.budget) {
            fail(ErrorKind::config, "bag_size exceeds budget", {{"bag_size", config.bag_size}, {"budget", config.budget}});
        }
        if (config.budget > table.size()) {
            fail(ErrorKind::config, "budget exceeds pool size", {{"budget", config.budget}, {"pool_size", table.size()}});
        }
        if (table.values.rows() != table.size()) fail(ErrorKind::dimension, "table rows and tids disagree");
        for (std::size_t i = 0; i < tids_.size(); ++i) row_index_[tids_[i]] = i;
        pool_.insert(tids_.begin(), tids_.end());
        if (config.feature_space == FeatureSpace::pca2) {
            if (table.values.cols() < 2 || table.size() < 3) {
                fail(ErrorKind::dimension, "pca2 feature space needs >= 2 columns and >= 3 rows");
            }
            auto [scaled, mm] = minmax_rescale(table.values);
            minmax_ = mm;
            pca_ = pca_fit(scaled, 2);
            features_ = pca_transform(*pca_, scaled);
        } else {
            features_ = table.values;
        }
    }

    static std::pair<FeatureTable, FeatureTable> split_table(const FeatureTable& table, double holdout_fraction,
                                                             std::uint64_t seed) {
        SplitConfig sc;
        sc.test_fraction = holdout_fraction;
        sc.seed = seed;
        const auto parts = split_train_test(table.values, std::vector<int>(table.size(), 0), sc);
        auto take = [&](const std::vector<std::size_t>& rows) {
            std::vector<std::size_t> sorted = rows;
            std::sort(sorted.begin(), sorted.end());
            FeatureTable t;
            t.columns = table.columns;
            t.values = table.values.select_rows(sorted);
            for (auto r : sorted) {
                t.tids.push_back(table.tids[r]);
                t.labels.push_back(table.labels[r]);
            }
            return t;
        };
        return {take(parts.train_index), take(parts.test_index)};
    }

    Matrix project(const Matrix& x) const {
        if (!pca_) return x;
        return pca_transform(*pca_, minmax_.transform(x));
    }

    std::size_t row_of(Tid tid) const {
        auto it = row_index_.find(tid);
        if (it == row_index_.end()) fail(ErrorKind::not_found, "tid not in session pool", {{"tid", tid}});
        return it->second;
    }

    void retrain() {
        std::vector<std::size_t> rows;
        std::vector<int> y;
        for (const auto& [t, l] : labeled_) {
            rows.push_back(row_of(t));
            y.push_back(codec_.encode(l));
        }
        const Matrix x = features_.select_rows(rows);
        const std::size_t k = codec_.size();
        model_ = fit_model(config_.classifier, x, y, config_.seed, k, config_.threads);
        committee_.clear();
        if (config_.strategy == Strategy::qbc) {
            for (ModelKind kind : {ModelKind::forest, ModelKind::extra_trees, ModelKind::gradient_boosting}) {
                committee_.push_back(kind == config_.classifier ? *model_
                                                                : fit_model(kind, x, y, config_.seed, k, config_.threads));
            }
        }
    }

    std::string id_;
    ALConfig config_;
    std::vector<Tid> tids_;
    std::vector<std::string> columns_;
    Matrix raw_;
    Matrix features_;
    std::map<Tid, std::size_t> row_index_;
    MinMaxParams minmax_;
    std::optional<PCAModel> pca_;

    LabelCodec codec_;
    std::set<Tid> pool_;
    std::vector<Tid> pending_;
    std::map<Tid, std::string> labeled_;
    std::size_t round_ = 0;
    std::vector<HistoryEntry> history_;
    std::optional<EnsembleModel> model_;
    std::vector<EnsembleModel> committee_;

    bool simulated_ = false;
    std::map<Tid, std::string> answer_key_;
    std::vector<Tid> holdout_tids_;
    Matrix holdout_x_;
    std::vector<int> holdout_y_;
};

/// Drives a simulated session to completion with its answer key. `on_step`
/// (optional) is called after every next_bag and every submit.
template <typename OnStep>
void run_simulation(ALSession& session, OnStep&& on_step) {
    while (!session.complete()) {
        const std::vector<Tid> bag = session.next_bag();
        on_step(session);
        std::map<Tid, std::string> answers;
        for (Tid t : bag) answers[t] = session.oracle_label(t);
        session.submit_labels(answers);
        on_step(session);
    }
}

inline void run_simulation(ALSession& session) {
    run_simulation(session, [](const ALSession&) {});
}

/// Labels consumed when holdout F1 first reaches `threshold`; nullopt if never.
inline std::optional<std::size_t> labels_to_reach(const std::vector<HistoryEntry>& history, double threshold) {
    std::size_t used = 0;
    for (const auto& h : history) {
        used += h.queried.size();
        if (h.holdout_f1 && *h.holdout_f1 >= threshold) return used;
    }
    return std::nullopt;
}

} // namespace trajal
