#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "trajal/trajectory.hpp"

using namespace trajal;
using trajal::support::TempDir;
using trajal::support::write_text;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected trajal::Error";
    return ErrorKind::not_found;
}

TrajectoryRecord record(Tid tid, std::vector<FeatureValue> features) {
    TrajectoryRecord r;
    r.tid = tid;
    r.features = std::move(features);
    return r;
}

} // namespace

TEST(LoadTrajectories, SingleElement) {
    const auto recs = parse_trajectories(R"([{"line": {"type": "Feature", "properties": {"tid": 7, "speed": 3.2}}}])");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].tid, 7);
    ASSERT_EQ(recs[0].features.size(), 1u);
    EXPECT_EQ(recs[0].features[0].name, "speed");
    EXPECT_DOUBLE_EQ(*recs[0].feature("speed"), 3.2);
    EXPECT_TRUE(recs[0].points.empty());
}

TEST(LoadTrajectories, ExcludesGeometryKeysAndStripsPrefix) {
    const auto recs = parse_trajectories(R"([{"line": {"type": "Feature",
        "properties": {"tid": 1, "geometry.type": "LineString", "type": "x", "properties.avg": 2.0, "nested": {"a": 1}},
        "geometry": {"type": "LineString", "coordinates": [[10.0, 50.0, 0], [10.1, 50.0, 60]]}}}])");
    ASSERT_EQ(recs.size(), 1u);
    const auto& r = recs[0];
    EXPECT_EQ(r.find("geometry.type"), nullptr);
    EXPECT_EQ(r.find("type"), nullptr);
    ASSERT_NE(r.find("avg"), nullptr);
    ASSERT_NE(r.find("nested.a"), nullptr);
    for (const auto& f : r.features) EXPECT_FALSE(f.name.starts_with("properties."));
    ASSERT_EQ(r.points.size(), 2u);
    EXPECT_DOUBLE_EQ(r.points[1].lon, 10.1);
    EXPECT_DOUBLE_EQ(*r.points[1].t, 60.0);
}

TEST(LoadTrajectories, NullFeatureIsMissing) {
    const auto recs = parse_trajectories(R"([{"line": {"properties": {"tid": 3, "a": 1, "b": null}}}])");
    EXPECT_EQ(recs[0].missing(), std::set<std::string>{"b"});
}

TEST(LoadTrajectories, Errors) {
    EXPECT_EQ(kind_of([] { parse_trajectories(R"([{"line": {"properties": {"tid": 4}}}, {"line": {"properties": {"tid": 4}}}])"); }),
              ErrorKind::duplicate_id);
    EXPECT_EQ(kind_of([] { parse_trajectories(R"([{"line": {"properties": {"a": 1}}}])"); }), ErrorKind::schema);
    try {
        parse_trajectories(R"([{"line": {"properties": {"tid": 1}}}, {"line": {"properties": {"x": 2}}}])");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.detail().at("index"), 1);
    }
    try {
        parse_trajectories("[{\"line\": ");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_TRUE(e.detail().contains("byte"));
    }
}

TEST(LoadTrajectories, FromFileAndMissingFile) {
    TempDir dir("traj");
    write_text(dir / "d.json", R"([{"line": {"properties": {"tid": 2, "a": 1}}}])");
    EXPECT_EQ(load_trajectories(dir / "d.json").size(), 1u);
    EXPECT_EQ(kind_of([&] { load_trajectories(dir / "nope.json"); }), ErrorKind::not_found);
}

TEST(LoadLabels, Cases) {
    const auto store = parse_labels(R"({"3":"vessel","5":"not vessel"})");
    EXPECT_EQ(store, (LabelStore{{3, "vessel"}, {5, "not vessel"}}));
    EXPECT_TRUE(parse_labels("{}").empty());
    try {
        parse_labels(R"({"x":"vessel"})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::schema);
        EXPECT_EQ(e.detail().at("key"), "x");
    }
}

TEST(MotionFeatures, OneDegreeOfLatitude) {
    TrajectoryRecord r;
    r.tid = 1;
    r.points = {{0.0, 0.0, 0.0}, {0.0, 1.0, 1000.0}};
    const auto out = derive_motion_features(r);
    // 1 degree of arc on a 6371 km sphere: 6371000 * pi / 180 = 111194.93 m.
    const double expected = 111.19493;
    EXPECT_NEAR(*out.feature("avg_speed"), expected, expected * 0.005);
    EXPECT_NEAR(*out.feature("max_speed"), expected, expected * 0.005);
    EXPECT_DOUBLE_EQ(*out.feature("direction_variance"), 0.0);
}

TEST(MotionFeatures, StraightPathHasZeroDirectionVariance) {
    TrajectoryRecord r;
    r.tid = 2;
    for (int i = 0; i < 6; ++i) r.points.push_back({0.0, 0.1 * i, 10.0 * i});
    EXPECT_NEAR(*derive_motion_features(r).feature("direction_variance"), 0.0, 1e-12);
}

TEST(MotionFeatures, ReversalGivesMaximalVariance) {
    TrajectoryRecord r;
    r.tid = 2;
    r.points = {{0.0, 0.0, 0.0}, {0.0, 0.1, 10.0}, {0.0, 0.0, 20.0}};
    EXPECT_NEAR(*derive_motion_features(r).feature("direction_variance"), 1.0, 1e-9);
}

TEST(MotionFeatures, ZeroDurationSegmentExcluded) {
    TrajectoryRecord r;
    r.tid = 3;
    r.points = {{0.0, 0.0, 0.0}, {0.0, 1.0, 1000.0}, {0.0, 2.0, 1000.0}};
    const auto out = derive_motion_features(r);
    EXPECT_TRUE(std::isfinite(*out.feature("max_speed")));
    EXPECT_NEAR(*out.feature("max_speed"), 111.19493, 0.6);
}

TEST(MotionFeatures, ErrorsAndIdempotence) {
    TrajectoryRecord single;
    single.points = {{0.0, 0.0, 0.0}};
    EXPECT_EQ(kind_of([&] { derive_motion_features(single); }), ErrorKind::insufficient_points);

    TrajectoryRecord r;
    r.tid = 5;
    r.features = {{"avg_speed", 42.0}};
    r.points = {{0.0, 0.0, 0.0}, {0.5, 0.5, 100.0}, {0.7, 0.2, 300.0}};
    const auto once = derive_motion_features(r);
    EXPECT_DOUBLE_EQ(*once.feature("avg_speed"), 42.0); // never overwritten
    EXPECT_EQ(derive_motion_features(once), once);
}

TEST(Assemble, SortsByTidAndJoinsLabels) {
    std::vector<TrajectoryRecord> trajs = {record(2, {{"a", 3.0}, {"b", 4.0}}), record(1, {{"a", 1.0}, {"b", 2.0}})};
    const auto t = assemble_feature_table(trajs, {{2, "x"}, {1, "y"}});
    EXPECT_EQ(t.tids, (std::vector<Tid>{1, 2}));
    EXPECT_EQ(t.labels, (std::vector<std::string>{"y", "x"}));
    EXPECT_EQ(t.columns, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(t.values(0, 0), 1.0);
    EXPECT_EQ(t.values(1, 1), 4.0);
}

TEST(Assemble, DropsIncompleteRowsAndUnlabelled) {
    std::vector<TrajectoryRecord> trajs = {record(1, {{"a", 1.0}, {"b", 2.0}}), record(3, {{"a", 1.0}, {"b", std::nullopt}}),
                                           record(4, {{"a", 1.0}}), record(5, {{"b", 9.0}, {"a", 8.0}})};
    const auto t = assemble_feature_table(trajs, {{1, "p"}, {3, "q"}, {4, "q"}});
    EXPECT_EQ(t.tids, (std::vector<Tid>{1}));
    for (double v : t.values.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Assemble, EmptyJoinIsError) {
    std::vector<TrajectoryRecord> trajs = {record(1, {{"a", 1.0}}), record(2, {{"a", 2.0}})};
    EXPECT_EQ(kind_of([&] { assemble_feature_table(trajs, {{9, "x"}}); }), ErrorKind::empty_table);
}

TEST(Assemble, DeterministicFromBytes) {
    const std::string doc = R"([{"line": {"properties": {"tid": 9, "b": 1.25, "a": 2}}},
                               {"line": {"properties": {"tid": 4, "a": 0.1, "b": 7}}}])";
    const auto labels = parse_labels(R"({"4": "u", "9": "v"})");
    const auto t1 = assemble_feature_table(parse_trajectories(doc), labels);
    const auto t2 = assemble_feature_table(parse_trajectories(doc), labels);
    EXPECT_EQ(t1, t2);
    EXPECT_EQ(t1.columns, (std::vector<std::string>{"b", "a"}));
    for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_EQ(t1.labels[i], labels.at(t1.tids[i]));
}

TEST(Csv, SingleRowSerialization) {
    FeatureTable t;
    t.tids = {1};
    t.columns = {"a"};
    t.values = Matrix{{1.5}};
    t.labels = {"x"};
    EXPECT_EQ(to_csv(t), "a,label\n1.5,x\n");
}

TEST(Csv, RoundTripIsIdentity) {
    FeatureTable t;
    t.tids = {0, 1, 2};
    t.columns = {"speed", "odd,name"};
    t.values = Matrix{{0.1, 1e-300}, {1.0 / 3.0, -2.5e17}, {std::nextafter(1.0, 2.0), 0.0}};
    t.labels = {"vessel", "not vessel", "quote\"d"};
    TempDir dir("csv");
    export_csv(t, dir / "t.csv");
    EXPECT_EQ(import_csv(dir / "t.csv"), t);
}

TEST(Csv, DirectoryPathIsIoError) {
    FeatureTable t;
    t.tids = {1};
    t.columns = {"a"};
    t.values = Matrix{{1.0}};
    t.labels = {"x"};
    TempDir dir("csvdir");
    EXPECT_EQ(kind_of([&] { export_csv(t, dir.path()); }), ErrorKind::io);
}

TEST(Csv, ReadsTidColumnAndIgnoresId) {
    const auto t = parse_csv("tid,a,id,label\n5,1.0,5,x\n8,2.0,8,y\n");
    EXPECT_EQ(t.tids, (std::vector<Tid>{5, 8}));
    EXPECT_EQ(t.columns, (std::vector<std::string>{"a"}));
}
