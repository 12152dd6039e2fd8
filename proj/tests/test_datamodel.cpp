#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "mrar/datamodel.hpp"
#include "test_support.hpp"

using namespace mrar;

namespace {

LabelSpace space_of(std::vector<int> sizes) {
    LabelSpace s;
    s.residents = static_cast<int>(sizes.size());
    s.sizes = std::move(sizes);
    return s;
}

}  // namespace

TEST_CASE("combined encoding basics") {
    CHECK(encode_combined(ActivityFrame({0, 0}), space_of({15, 15})) == 0);
    CHECK(encode_combined(ActivityFrame({2, 4}), space_of({3, 5})) == 14);
    CHECK(decode_combined(14, space_of({3, 5})) == ActivityFrame({2, 4}));
    CHECK(decode_combined(1, space_of({2})) == ActivityFrame({1}));
}

TEST_CASE("combined encoding rejects out-of-range input") {
    auto space = space_of({3, 5});
    CHECK_THROWS_AS(encode_combined(ActivityFrame({3, 0}), space), DomainError);
    CHECK_THROWS_AS(encode_combined(ActivityFrame({0, -1}), space), DomainError);
    CHECK_THROWS_AS(encode_combined(ActivityFrame({0}), space), DomainError);
    CHECK_THROWS_AS(decode_combined(15, space), DomainError);
    CHECK_THROWS_AS(decode_combined(-1, space), DomainError);
}

TEST_CASE("encode/decode are mutually inverse over the whole product space") {
    auto small = space_of({3, 4});
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            ActivityFrame f({a, b});
            CHECK(decode_combined(encode_combined(f, small), small) == f);
        }
    auto deep = space_of({4, 3, 2});
    REQUIRE(deep.combined_size() == 24);
    for (int j = 0; j < 24; ++j) CHECK(encode_combined(decode_combined(j, deep), deep) == j);
    for (int j = 0; j < 24; ++j)
        for (int m = 0; m < 3; ++m)
            CHECK(combined_digit(j, deep, m) == decode_combined(j, deep).labels[m]);
}

TEST_CASE("label space validation") {
    auto s = space_of({3, 5});
    CHECK_NOTHROW(s.validate());
    CHECK(s.combined_size() == 15);
    s.sizes[1] = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = space_of({});
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = space_of({100000, 100000, 100000});
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("codec assigns ids by first appearance and reserves UNK") {
    auto codec = build_observation_codec({{0, 1}, {1, 0}, {0, 1}});
    CHECK(codec.size() == 2);
    CHECK(codec.lookup({0, 1}) == 0);
    CHECK(codec.lookup({1, 0}) == 1);
    CHECK(codec.lookup({1, 1}) == codec.unk_id());
    CHECK(codec.unk_id() == 2);
    CHECK(codec.vector_of(1) == std::vector<double>({1, 0}));
}

TEST_CASE("codec rejects bad input") {
    CHECK_THROWS_AS(build_observation_codec({}), ConfigError);
    CHECK_THROWS_AS(build_observation_codec({{0, 1}, {1}}), FormatError);
}

TEST_CASE("canonical round trip preserves the dataset exactly") {
    test_support::TempDir dir;
    Dataset ds = test_support::tiny_dataset();
    write_canonical(ds, dir.path());
    Dataset back = read_canonical(dir.path());
    CHECK(canonical_bytes(back) == canonical_bytes(ds));
    CHECK(back.label_space.sizes == ds.label_space.sizes);
    CHECK(back.codec == ds.codec);
    // rewrite from the reloaded value: bytes stay stable
    test_support::TempDir dir2;
    write_canonical(back, dir2.path());
    Dataset again = read_canonical(dir2.path());
    CHECK(canonical_bytes(again) == canonical_bytes(ds));
}

TEST_CASE("codec survives serialization round trip") {
    test_support::TempDir dir;
    Dataset ds = test_support::tiny_dataset();
    write_codec_meta(ds, dir.path() / "codec.meta");
    ObservationCodec codec;
    LabelSpace space;
    std::vector<std::string> sensors;
    REQUIRE(read_codec_meta(dir.path() / "codec.meta", codec, space, sensors));
    CHECK(codec == ds.codec);
    CHECK(space.sizes == ds.label_space.sizes);
    for (int s = 0; s < ds.codec.size(); ++s)
        CHECK(codec.lookup(ds.codec.vector_of(s)) == s);
    CHECK(codec.lookup({9.5, 9.5}) == codec.unk_id());
}

TEST_CASE("dataset validation catches misalignment and duplicate days") {
    Dataset ds = test_support::tiny_dataset();
    CHECK_NOTHROW(ds.validate());
    Dataset dup = ds;
    dup.instances.push_back(dup.instances[0]);
    CHECK_THROWS_AS(dup.validate(), DomainError);
    Dataset ragged = ds;
    ragged.instances[0].activities.pop_back();
    CHECK_THROWS_AS(ragged.validate(), DomainError);
}

TEST_CASE("exact double text round trip") {
    for (double v : {0.0, 1.0, 0.5, 1.0 / 3.0, 0.1234567890123456789, 1e-300, 0x1.fffffffffffffp-1})
        CHECK(text_to_double(double_to_text(v)) == v);
    CHECK(double_to_text(0.5) == "0.5");
    CHECK_THROWS_AS(text_to_double("zebra"), FormatError);
}

TEST_CASE("worker pool width follows the environment variable") {
    setenv("MRAR_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("MRAR_WORKERS", "0", 1);  // invalid values fall back
    CHECK(worker_count() >= 1);
    unsetenv("MRAR_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("parallel_for visits every index exactly once") {
    for (const char* workers : {"1", "4"}) {
        setenv("MRAR_WORKERS", workers, 1);
        std::vector<int> hits(257, 0);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
        for (int h : hits) CHECK(h == 1);
    }
    unsetenv("MRAR_WORKERS");
    CHECK_THROWS_AS(parallel_for(4,
                                 [](std::size_t i) {
                                     if (i == 2) throw mrar::ConfigError("boom");
                                 }),
                    mrar::ConfigError);
}
