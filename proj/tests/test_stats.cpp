#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "olga/metrics.hpp"
#include "olga/report_io.hpp"
#include "olga/rng.hpp"
#include "olga/stats.hpp"

using namespace olga;
using Catch::Matchers::WithinAbs;

TEST_CASE("f1-macro on hand-checked confusion tables") {
    SECTION("perfect predictions give 1.0") {
        std::vector<Label> truth{Label::Interest, Label::NonInterest, Label::Interest};
        REQUIRE(f1_macro(truth, truth) == 1.0);
    }
    SECTION("predicting everything interest on a balanced set") {
        std::vector<Label> truth;
        for (int i = 0; i < 5; ++i) truth.push_back(Label::Interest);
        for (int i = 0; i < 5; ++i) truth.push_back(Label::NonInterest);
        const std::vector<Label> pred(10, Label::Interest);
        // interest F1 = 10/15, non-interest F1 = 0, macro = 1/3
        REQUIRE_THAT(f1_macro(pred, truth), WithinAbs(1.0 / 3.0, 1e-15));
    }
    SECTION("empty input is an error") {
        REQUIRE_THROWS_AS(f1_macro({}, {}), ConfigError);
    }
}

TEST_CASE("f1-macro is symmetric in the class naming") {
    Rng rng(15);
    std::vector<Label> truth, pred;
    for (int i = 0; i < 50; ++i) {
        truth.push_back(rng.uniform() < 0.3 ? Label::Interest : Label::NonInterest);
        pred.push_back(rng.uniform() < 0.5 ? Label::Interest : Label::NonInterest);
    }
    auto flip = [](std::vector<Label> v) {
        for (Label& l : v)
            l = l == Label::Interest ? Label::NonInterest : Label::Interest;
        return v;
    };
    REQUIRE_THAT(f1_macro(flip(pred), flip(truth)), WithinAbs(f1_macro(pred, truth), 1e-15));
}

TEST_CASE("f1-macro is invariant under simultaneous permutation") {
    Rng rng(16);
    std::vector<Label> truth, pred;
    for (int i = 0; i < 40; ++i) {
        truth.push_back(rng.uniform() < 0.4 ? Label::Interest : Label::NonInterest);
        pred.push_back(rng.uniform() < 0.6 ? Label::Interest : Label::NonInterest);
    }
    const double base = f1_macro(pred, truth);

    std::vector<std::size_t> perm(truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<Label> truth_p, pred_p;
    for (std::size_t i : perm) {
        truth_p.push_back(truth[i]);
        pred_p.push_back(pred[i]);
    }
    REQUIRE(f1_macro(pred_p, truth_p) == base);
}

TEST_CASE("friedman ranks a strict winner first") {
    const Matrix scores{{0.9, 0.5, 0.4}, {0.8, 0.6, 0.7}};
    const auto result = friedman_nemenyi(scores, {"A", "B", "C"});
    REQUIRE(result.average_ranks[0] == 1.0);
    REQUIRE(result.critical_difference > 0.0);
}

TEST_CASE("ties share the average rank") {
    const Matrix scores{{0.9, 0.9, 0.1}, {0.5, 0.4, 0.3}};
    const auto result = friedman_nemenyi(scores, {"A", "B", "C"});
    REQUIRE(result.ranks(0, 0) == 1.5);
    REQUIRE(result.ranks(0, 1) == 1.5);
    REQUIRE(result.ranks(0, 2) == 3.0);
}

TEST_CASE("constant rows collapse to the mid rank") {
    const Matrix scores{{0.5, 0.5, 0.5}, {0.7, 0.6, 0.5}};
    const auto result = friedman_nemenyi(scores, {"A", "B", "C"});
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(result.ranks(0, j) == 2.0);
}

TEST_CASE("degenerate tables are rejected") {
    REQUIRE_THROWS_AS(friedman_nemenyi(Matrix(2, 1), {"only"}), ConfigError);
    REQUIRE_THROWS_AS(friedman_nemenyi(Matrix(1, 3), {"A", "B", "C"}), ConfigError);
    REQUIRE_THROWS_AS(friedman_nemenyi(Matrix(2, 3), {"A", "B"}), DimensionError);
}

TEST_CASE("average ranks always sum to m(m+1)/2") {
    Rng rng(77);
    Matrix scores(6, 5);
    for (std::size_t i = 0; i < scores.size(); ++i) scores.data()[i] = rng.uniform(0.0, 1.0);
    const auto result = friedman_nemenyi(scores, {"A", "B", "C", "D", "E"});
    const double sum =
        std::accumulate(result.average_ranks.begin(), result.average_ranks.end(), 0.0);
    REQUIRE_THAT(sum, WithinAbs(5.0 * 6.0 / 2.0, 1e-12));
}

TEST_CASE("identical methods get identical average ranks") {
    const Matrix scores{{0.9, 0.9, 0.2}, {0.4, 0.4, 0.1}, {0.6, 0.6, 0.8}};
    const auto result = friedman_nemenyi(scores, {"A", "A2", "C"});
    REQUIRE(result.average_ranks[0] == result.average_ranks[1]);
}

TEST_CASE("the bundled benchmark table reproduces the published ranking") {
    const ScoreTable table = load_score_table(std::string(OLGA_DATA_DIR) + "/ocl_benchmark_f1.csv");
    REQUIRE(table.datasets.size() == 16);
    REQUIRE(table.methods.size() == 7);

    const auto result = friedman_nemenyi(table.scores, table.methods);

    const auto olga_idx = static_cast<std::size_t>(
        std::find(result.methods.begin(), result.methods.end(), "OLGA") -
        result.methods.begin());
    REQUIRE_THAT(result.average_ranks[olga_idx], WithinAbs(1.468750, 1e-12));
    REQUIRE_THAT(result.critical_difference, WithinAbs(2.2518158317294, 1e-10));
    REQUIRE_THAT(result.friedman_chi2, WithinAbs(33.177654, 1e-5));

    for (std::size_t j = 0; j < result.methods.size(); ++j) {
        if (j == olga_idx) continue;
        REQUIRE(result.average_ranks[olga_idx] < result.average_ranks[j]);
        const bool expect_significant = result.methods[j] != "Deepwalk";
        REQUIRE(result.is_significant(static_cast<int>(olga_idx), static_cast<int>(j)) ==
                expect_significant);
    }
}

TEST_CASE("hypersphere volume of unit disk and ball") {
    REQUIRE_THAT(hypersphere_volume(2, 1.0), WithinAbs(3.14159265358979323846, 1e-12));
    REQUIRE_THAT(hypersphere_volume(3, 1.0), WithinAbs(4.18879020478639098462, 1e-12));
}

TEST_CASE("volume at n=16, r=0.5 is effectively zero") {
    // independent route: pi^8 / 8! * 0.5^16
    const double expected =
        std::pow(3.14159265358979323846, 8.0) / 40320.0 * std::pow(0.5, 16.0);
    REQUIRE_THAT(hypersphere_volume(16, 0.5), WithinAbs(expected, 1e-18));
    REQUIRE(hypersphere_volume(16, 0.5) < 1e-5);
    REQUIRE_THAT(hypersphere_volume(16, 0.5), WithinAbs(3.59e-6, 2e-8));
}

TEST_CASE("volume decreases monotonically in the dimension for r <= 0.5") {
    for (double r : {0.3, 0.45, 0.5}) {
        double prev = hypersphere_volume(2, r);
        for (std::size_t n = 3; n <= 40; ++n) {
            const double v = hypersphere_volume(n, r);
            REQUIRE(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("volume parameter validation") {
    REQUIRE_THROWS_AS(hypersphere_volume(0, 1.0), ConfigError);
    REQUIRE_THROWS_AS(hypersphere_volume(2, 0.0), ConfigError);
}
