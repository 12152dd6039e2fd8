#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "mrar/ingest.hpp"
#include "test_support.hpp"

using namespace mrar;
using Catch::Approx;
using test_support::TempDir;
using test_support::write_file;

namespace {

const char* kCasasFixture =
    "2009-06-01 08:00:00.0 M01 ON 1 3\n"
    "2009-06-01 08:00:05.0 M02 ON 2 7\n"
    "2009-06-01 08:00:10.0 M01 OFF 1 3\n"
    "2009-06-01 08:01:00.0 D01 OPEN 2 8\n"
    "2009-06-02 09:00:00.0 M02 ON 1 4\n"
    "2009-06-02 09:00:30.0 M01 ON 2 7\n";

std::string aras_rows(int sensor_bit, int a1, int a2, int rows) {
    std::string out;
    for (int r = 0; r < rows; ++r) {
        for (int d = 0; d < 20; ++d) {
            out += (d == sensor_bit ? "1" : "0");
            out += ' ';
        }
        out += std::to_string(a1) + " " + std::to_string(a2) + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("casas loader: day structure, state carry, persistent annotations") {
    TempDir dir;
    write_file(dir.path() / "events.txt", kCasasFixture);
    Dataset ds = load_casas(dir.path());

    REQUIRE(ds.instances.size() == 2);
    CHECK(ds.instances[0].day_id == "2009-06-01");
    CHECK(ds.instances[1].day_id == "2009-06-02");
    CHECK(ds.feature_dim == 3);  // M01, M02, D01 by first appearance
    CHECK(ds.sensor_names == std::vector<std::string>({"M01", "M02", "D01"}));
    CHECK(ds.label_space.sizes == std::vector<int>({2, 2}));
    CHECK(ds.label_space.activity_names[0] == std::vector<std::string>({"3", "4"}));
    CHECK(ds.label_space.activity_names[1] == std::vector<std::string>({"7", "8"}));

    // the corpus-initial step (resident 2 unannotated) is dropped
    REQUIRE(ds.instances[0].length() == 3);
    REQUIRE(ds.instances[1].length() == 2);

    // state carry with per-sensor [0,1] normalization (constant M02 maps to 0)
    CHECK(ds.instances[0].observations[0].features == std::vector<double>({1, 0, 0}));
    CHECK(ds.instances[0].observations[1].features == std::vector<double>({0, 0, 0}));
    CHECK(ds.instances[0].observations[2].features == std::vector<double>({0, 0, 1}));
    CHECK(ds.instances[1].observations[0].features == std::vector<double>({0, 0, 1}));
    CHECK(ds.instances[1].observations[1].features == std::vector<double>({1, 0, 1}));

    // annotations persist until superseded, across the day boundary too
    CHECK(ds.instances[0].activities[0] == ActivityFrame({0, 0}));
    CHECK(ds.instances[0].activities[1] == ActivityFrame({0, 0}));
    CHECK(ds.instances[0].activities[2] == ActivityFrame({0, 1}));
    CHECK(ds.instances[1].activities[0] == ActivityFrame({1, 1}));
    CHECK(ds.instances[1].activities[1] == ActivityFrame({1, 0}));
}

TEST_CASE("casas loader is pure") {
    TempDir dir;
    write_file(dir.path() / "events.txt", kCasasFixture);
    CHECK(canonical_bytes(load_casas(dir.path())) == canonical_bytes(load_casas(dir.path())));
}

TEST_CASE("casas loader rejects malformed lines with their line number") {
    TempDir dir;
    write_file(dir.path() / "events.txt",
               "2009-06-01 08:00:00.0 M01 ON 1 3\n"
               "2009-06-01 08:00:05.0 M02 ON 2\n");
    try {
        load_casas(dir.path());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("events.txt:2") != std::string::npos);
    }
}

TEST_CASE("casas loader enforces a sensor manifest when present") {
    TempDir dir;
    write_file(dir.path() / "sensors.txt", "M01\nM02\n");
    write_file(dir.path() / "events.txt", kCasasFixture);  // mentions D01
    try {
        load_casas(dir.path());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("unknown sensor") != std::string::npos);
        CHECK(std::string(e.what()).find(":4") != std::string::npos);
    }

    TempDir dir2;
    write_file(dir2.path() / "sensors.txt", "D01\nM01\nM02\nM99\n");
    write_file(dir2.path() / "events.txt", kCasasFixture);
    Dataset ds = load_casas(dir2.path());
    CHECK(ds.feature_dim == 4);  // manifest order and width win
    CHECK(ds.sensor_names[0] == "D01");
}

TEST_CASE("casas loader rejects bad values and resident ids") {
    TempDir dir;
    write_file(dir.path() / "events.txt", "2009-06-01 08:00:00.0 M01 WOBBLE 1 3\n");
    CHECK_THROWS_AS(load_casas(dir.path()), FormatError);
    TempDir dir2;
    write_file(dir2.path() / "events.txt", "2009-06-01 08:00:00.0 M01 ON zero 3\n");
    CHECK_THROWS_AS(load_casas(dir2.path()), FormatError);
    CHECK_THROWS_AS(load_casas(dir.path() / "absent"), ConfigError);
}

TEST_CASE("aras loader: day files, shapes, zero-based labels") {
    TempDir dir;
    write_file(dir.path() / "DAY_1.txt", aras_rows(0, 1, 27, 4));
    write_file(dir.path() / "DAY_2.txt", aras_rows(3, 5, 9, 2));
    write_file(dir.path() / "DAY_10.txt", aras_rows(7, 2, 2, 3));
    Dataset ds = load_aras(dir.path(), 'A');

    REQUIRE(ds.instances.size() == 3);
    CHECK(ds.instances[0].day_id == "DAY_1");
    CHECK(ds.instances[1].day_id == "DAY_2");
    CHECK(ds.instances[2].day_id == "DAY_10");  // numeric day order
    CHECK(ds.feature_dim == 20);
    CHECK(ds.label_space.sizes == std::vector<int>({27, 27}));
    CHECK(ds.instances[0].activities[0] == ActivityFrame({0, 26}));
    CHECK(ds.instances[1].activities[0] == ActivityFrame({4, 8}));
    CHECK(ds.instances[0].observations[0].features[0] == 1.0);
    CHECK(ds.instances[0].observations[0].features[1] == 0.0);
}

TEST_CASE("aras loader resolves house subdirectories") {
    TempDir dir;
    write_file(dir.path() / "House A" / "DAY_1.txt", aras_rows(0, 1, 1, 2));
    write_file(dir.path() / "House B" / "DAY_1.txt", aras_rows(1, 2, 2, 2));
    Dataset a = load_aras(dir.path(), 'A');
    Dataset b = load_aras(dir.path(), 'B');
    CHECK(a.instances[0].activities[0] == ActivityFrame({0, 0}));
    CHECK(b.instances[0].activities[0] == ActivityFrame({1, 1}));
}

TEST_CASE("aras loader rejects bad rows") {
    TempDir dir;
    std::string bad = aras_rows(0, 1, 1, 1);
    bad = bad.substr(0, bad.size() - 3) + "\n";  // drop the last column
    write_file(dir.path() / "DAY_1.txt", bad);
    try {
        load_aras(dir.path());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("DAY_1.txt:1") != std::string::npos);
        CHECK(std::string(e.what()).find("22 columns") != std::string::npos);
    }

    TempDir dir2;  // 1-based source uses 1..27, so 0 is out of range
    write_file(dir2.path() / "DAY_1.txt", aras_rows(0, 0, 1, 1));
    CHECK_THROWS_AS(load_aras(dir2.path()), FormatError);
    TempDir dir3;
    write_file(dir3.path() / "DAY_1.txt", aras_rows(0, 28, 1, 1));
    CHECK_THROWS_AS(load_aras(dir3.path()), FormatError);
}

TEST_CASE("split_by_days partitions chronologically and rebuilds the codec") {
    SynthConfig cfg = make_synth_generator(2, {2, 2}, 5, 7, 1.0, 0.3, 2.0);
    cfg.steps_per_day = 50;
    cfg.days = 10;
    Dataset ds = generate_synthetic(cfg);

    Split split = split_by_days(ds, {6, 2, 2});
    CHECK(split.train.instances.size() == 6);
    CHECK(split.val.instances.size() == 2);
    CHECK(split.test.instances.size() == 2);
    CHECK(split.train.instances[0].day_id == ds.instances[0].day_id);
    CHECK(split.test.instances[1].day_id == ds.instances[9].day_id);

    std::set<std::string> ids;
    for (const auto* part : {&split.train, &split.val, &split.test})
        for (const auto& inst : part->instances) CHECK(ids.insert(inst.day_id).second);
    CHECK(ids.size() == 10);
    CHECK(split.train.label_space == ds.label_space);
    CHECK(split.val.codec == split.train.codec);

    // spec sums beyond the available days are rejected
    CHECK_THROWS_AS(split_by_days(ds, {30, 2, 2}), ConfigError);
    CHECK_THROWS_AS(split_by_days(ds, {0, 1, 1}), ConfigError);
    CHECK_NOTHROW(split_by_days(ds, {8, 0, 2}));  // val may be empty
}

TEST_CASE("split codec maps vectors unseen in training to UNK") {
    Dataset ds;
    ds.feature_dim = 1;
    ds.label_space.residents = 1;
    ds.label_space.sizes = {2};
    auto add_day = [&](const std::string& id, std::vector<double> values) {
        SequenceInstance inst;
        inst.day_id = id;
        for (double v : values) {
            Observation o;
            o.features = {v};
            inst.observations.push_back(o);
            inst.activities.push_back(ActivityFrame({0}));
        }
        ds.instances.push_back(std::move(inst));
    };
    add_day("d1", {0.0, 1.0});
    add_day("d2", {1.0, 0.0});
    add_day("d3", {0.5, 1.0});  // 0.5 never appears in training
    std::vector<std::vector<double>> rows;
    for (const auto& inst : ds.instances)
        for (const auto& obs : inst.observations) rows.push_back(obs.features);
    apply_codec(ds, ObservationCodec::build(rows));

    Split split = split_by_days(ds, {2, 0, 1});
    CHECK(split.train.codec.size() == 2);
    CHECK(split.test.instances[0].observations[0].symbol == split.train.codec.unk_id());
    CHECK(split.test.instances[0].observations[1].symbol ==
          split.train.codec.lookup({1.0}));
}

TEST_CASE("synthetic generation is deterministic in the seed") {
    SynthConfig cfg = make_synth_generator(2, {3, 3}, 8, 99, 1.0, 0.5, 3.0);
    cfg.steps_per_day = 120;
    cfg.days = 4;
    cfg.noise = 0.1;
    Dataset a = generate_synthetic(cfg);
    Dataset b = generate_synthetic(cfg);
    CHECK(canonical_bytes(a) == canonical_bytes(b));
    cfg.seed = 100;
    Dataset c = generate_synthetic(cfg);
    CHECK(canonical_bytes(a) != canonical_bytes(c));
}

TEST_CASE("deterministic generator tables force the unique path") {
    SynthConfig cfg;
    cfg.residents = 1;
    cfg.sizes = {2};
    cfg.symbols = 2;
    cfg.steps_per_day = 6;
    cfg.days = 1;
    cfg.priors = {Eigen::Vector2d(1.0, 0.0)};
    Eigen::MatrixXd trans(2, 2);
    trans << 0, 1, 1, 0;  // strict alternation
    cfg.transitions = {trans};
    cfg.emission.resize(2, 2);
    cfg.emission << 1, 0, 0, 1;  // state == symbol
    Dataset ds = generate_synthetic(cfg);
    for (int t = 0; t < 6; ++t) {
        CHECK(ds.instances[0].activities[t].labels[0] == t % 2);
        CHECK(ds.instances[0].observations[t].symbol == t % 2);
    }
}

TEST_CASE("noiseless samples hit only symbols their frame can emit") {
    SynthConfig cfg = make_synth_generator(2, {2, 2}, 6, 5, 1.0, 0.4, 2.5);
    cfg.steps_per_day = 300;
    cfg.days = 2;
    Dataset ds = generate_synthetic(cfg);
    for (const auto& inst : ds.instances)
        for (int t = 0; t < inst.length(); ++t) {
            int state = encode_combined(inst.activities[t], ds.label_space);
            CHECK(cfg.emission(state, inst.observations[t].symbol) > 0.0);
        }
}

TEST_CASE("empirical transition frequencies approach the generator tables") {
    SynthConfig cfg = make_synth_generator(2, {2, 2}, 6, 12345, 1.0, 0.5, 2.0);
    cfg.steps_per_day = 10000;
    cfg.days = 3;
    Dataset ds = generate_synthetic(cfg);
    const int joint = ds.label_space.combined_size();

    for (int m = 0; m < 2; ++m) {
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(joint, cfg.sizes[m]);
        for (const auto& inst : ds.instances) {
            int prev = -1;
            for (int t = 0; t < inst.length(); ++t) {
                int j = encode_combined(inst.activities[t], ds.label_space);
                if (t > 0) counts(prev, inst.activities[t].labels[m]) += 1.0;
                prev = j;
            }
        }
        for (int i = 0; i < joint; ++i) {
            double total = counts.row(i).sum();
            REQUIRE(total > 0.0);
            for (int k = 0; k < cfg.sizes[m]; ++k)
                CHECK(counts(i, k) / total ==
                      Approx(cfg.transitions[m](i, k)).margin(0.02));
        }
    }
}

TEST_CASE("synthetic config validation") {
    SynthConfig cfg = make_synth_generator(2, {2, 2}, 6, 1);
    cfg.transitions[0](0, 0) += 0.5;  // break normalization
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = make_synth_generator(2, {2, 2}, 6, 1);
    cfg.noise = 1.0;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = make_synth_generator(2, {2, 2}, 6, 1);
    cfg.feature_dim = 2;  // 2^2 < 6 symbols
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg.feature_dim = 3;  // 2^3 >= 6
    CHECK_NOTHROW(generate_synthetic(cfg));
}

TEST_CASE("binary symbol codes are distinct and in range") {
    SynthConfig cfg = make_synth_generator(1, {2}, 6, 2);
    cfg.feature_dim = 3;
    std::set<std::vector<double>> seen;
    for (int s = 0; s < 6; ++s) {
        auto v = cfg.symbol_features(s);
        CHECK(v.size() == 3);
        CHECK(seen.insert(v).second);
        for (double x : v) CHECK((x == 0.0 || x == 1.0));
    }
}

TEST_CASE("a day whose events are all unannotated is skipped with a warning") {
    TempDir dir;
    // day one holds only the corpus prefix (resident 2 never annotated yet)
    write_file(dir.path() / "events.txt",
               "2009-06-01 08:00:00.0 M01 ON 1 3\n"
               "2009-06-02 09:00:00.0 M02 ON 2 7\n"
               "2009-06-02 09:00:30.0 M01 OFF 1 4\n");
    Dataset ds = load_casas(dir.path());
    REQUIRE(ds.instances.size() == 1);
    CHECK(ds.instances[0].day_id == "2009-06-02");
    CHECK(ds.instances[0].length() == 2);
}

TEST_CASE("aras loader is pure") {
    TempDir dir;
    write_file(dir.path() / "DAY_1.txt", aras_rows(0, 1, 27, 4));
    write_file(dir.path() / "DAY_2.txt", aras_rows(3, 5, 9, 2));
    CHECK(canonical_bytes(load_aras(dir.path())) == canonical_bytes(load_aras(dir.path())));
}
