#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "olga/dataset.hpp"
#include "olga/graph.hpp"

using namespace olga;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("well-formed CSV loads with the right shape") {
    const auto path = temp_file("ds_ok.csv",
                                "f0,f1,label\n"
                                "1.0,0.0,1\n"
                                "0.9,0.1,1\n"
                                "0.0,1.0,0\n");
    const Dataset ds = load_dataset_csv(path);
    REQUIRE(ds.n() == 3);
    REQUIRE(ds.dim() == 2);
    REQUIRE(ds.labels[0] == Label::Interest);
    REQUIRE(ds.labels[2] == Label::NonInterest);
    REQUIRE(ds.features(1, 1) == 0.1);
}

TEST_CASE("text in a feature column names the offending row") {
    const auto path = temp_file("ds_text.csv",
                                "f0,f1,label\n"
                                "1.0,0.0,1\n"
                                "0.9,oops,1\n");
    REQUIRE_THROWS_WITH(load_dataset_csv(path), Catch::Matchers::ContainsSubstring("row 3"));
}

TEST_CASE("empty file is a parse error") {
    const auto path = temp_file("ds_empty.csv", "");
    REQUIRE_THROWS_AS(load_dataset_csv(path), ParseError);
}

TEST_CASE("missing label column is a parse error") {
    const auto path = temp_file("ds_nolabel.csv", "f0,f1,tag\n1,2,0\n");
    REQUIRE_THROWS_AS(load_dataset_csv(path), ParseError);
}

TEST_CASE("inconsistent row width is a parse error with the row number") {
    const auto path = temp_file("ds_ragged.csv",
                                "f0,f1,label\n"
                                "1.0,0.0,1\n"
                                "1.0,1\n");
    REQUIRE_THROWS_WITH(load_dataset_csv(path), Catch::Matchers::ContainsSubstring("row 3"));
}

TEST_CASE("zero feature rows are rejected at load time") {
    const auto path = temp_file("ds_zero.csv",
                                "f0,f1,label\n"
                                "0.0,0.0,1\n"
                                "1.0,0.0,0\n");
    REQUIRE_THROWS_WITH(load_dataset_csv(path), Catch::Matchers::ContainsSubstring("zero"));
}

TEST_CASE("dataset CSV round trip") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 10, 12, 5);
    const auto path = (std::filesystem::temp_directory_path() / "ds_rt.csv").string();
    save_dataset_csv(ds, path);
    const Dataset back = load_dataset_csv(path);
    REQUIRE(back.n() == ds.n());
    REQUIRE(back.features.bitwise_equal(ds.features));
    REQUIRE(back.labels == ds.labels);
}

TEST_CASE("synthetic data is deterministic per seed") {
    const Dataset a = synth_dataset(SynthKind::Blobs, 30, 30, 9);
    const Dataset b = synth_dataset(SynthKind::Blobs, 30, 30, 9);
    const Dataset c = synth_dataset(SynthKind::Blobs, 30, 30, 10);
    REQUIRE(a.features.bitwise_equal(b.features));
    REQUIRE_FALSE(a.features.bitwise_equal(c.features));
}

TEST_CASE("synth rejects empty classes") {
    REQUIRE_THROWS_AS(synth_dataset(SynthKind::Blobs, 0, 5, 1), ConfigError);
}

TEST_CASE("blobs are separable: cosine 1-NN accuracy above 0.95") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 150, 150, 21);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double best = -2.0;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < ds.n(); ++j) {
            if (j == i) continue;
            const double sim = cosine_similarity(ds.features.row(i), ds.features.row(j));
            if (sim > best) {
                best = sim;
                best_j = j;
            }
        }
        correct += ds.labels[best_j] == ds.labels[i];
    }
    REQUIRE(static_cast<double>(correct) / static_cast<double>(ds.n()) > 0.95);
}

TEST_CASE("ring places non-interest away from the interest blob") {
    const Dataset ds = synth_dataset(SynthKind::Ring, 40, 80, 3);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double dx = ds.features(i, 0) - 10.0;
        const double dy = ds.features(i, 1) - 10.0;
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (ds.labels[i] == Label::NonInterest) {
            REQUIRE(dist >= 4.0);
            REQUIRE(dist <= 5.0);
        } else {
            REQUIRE(dist < 4.0);
        }
    }
}
