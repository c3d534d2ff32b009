#include <catch2/catch_amalgamated.hpp>

#include "olga/evaluate.hpp"
#include "olga/report_io.hpp"

using namespace olga;

namespace {

GridSpec quick_grid() {
    GridSpec grid;
    grid.ks = {3};
    grid.radii = {0.3};
    grid.learning_rates = {5e-4};
    grid.patiences = {40};
    grid.embedding_dims = {2};
    grid.hidden_dim = 8;
    grid.max_epochs = 250;
    return grid;
}

}  // namespace

TEST_CASE("grid expansion covers the cartesian product") {
    GridSpec grid = quick_grid();
    grid.ks = {1, 2, 3};
    grid.radii = {0.3, 0.35, 0.4};
    grid.learning_rates = {1e-4, 5e-4};
    REQUIRE(expand_grid(Method::Olga, grid).size() == 3 * 3 * 2);

    // ocgnn sweeps nu/lambda instead of the radius
    grid.nus = {0.1, 0.2};
    grid.lambdas = {5e-4};
    REQUIRE(expand_grid(Method::OcgnnGcn, grid).size() == 3 * 2 * 2);

    grid.radii.clear();
    REQUIRE_THROWS_AS(expand_grid(Method::Olga, grid), ConfigError);
}

TEST_CASE("inside_rate counts boundary points as inside") {
    const auto sphere = HypersphereConfig::origin(2, 0.3);
    Matrix h{{0.0, 0.0}, {0.3, 0.0}, {0.6, 0.0}};
    REQUIRE(inside_rate(h, {0}, sphere) == 1.0);
    REQUIRE(inside_rate(h, {2}, sphere) == 0.0);
    REQUIRE_THAT(inside_rate(h, {0, 1, 2}, sphere),
                 Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    REQUIRE_THROWS_AS(inside_rate(h, {}, sphere), ConfigError);
}

TEST_CASE("run_cv produces one test score per fold and separates the blobs") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 50, 50, 33);
    CvConfig cv;
    cv.n_folds = 10;
    cv.seed = 33;
    const EvalReport report = run_cv(ds, Method::Olga, quick_grid(), cv);

    REQUIRE(report.folds.size() == 10);
    REQUIRE(report.method == std::string("olga"));
    double lo = 1.0, hi = 0.0;
    for (const FoldOutcome& f : report.folds) {
        lo = std::min(lo, f.test_f1);
        hi = std::max(hi, f.test_f1);
    }
    REQUIRE(report.mean >= lo);
    REQUIRE(report.mean <= hi);
    REQUIRE(report.mean > 0.85);
}

TEST_CASE("run_cv is reproducible bit for bit under a fixed seed") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 30, 30, 44);
    GridSpec grid = quick_grid();
    grid.max_epochs = 120;
    grid.patiences = {30};
    CvConfig cv;
    cv.n_folds = 5;
    cv.seed = 9;

    const EvalReport a = run_cv(ds, Method::Olga, grid, cv);
    const EvalReport b = run_cv(ds, Method::Olga, grid, cv);
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
        REQUIRE(a.folds[f].test_f1 == b.folds[f].test_f1);
        REQUIRE(a.folds[f].val_f1 == b.folds[f].val_f1);
        REQUIRE(a.folds[f].model.params.bitwise_equal(b.folds[f].model.params));
    }
    REQUIRE(a.mean == b.mean);

    // parallel dispatch does not change the outcome
    CvConfig cv2 = cv;
    cv2.jobs = 3;
    const EvalReport c = run_cv(ds, Method::Olga, grid, cv2);
    for (std::size_t f = 0; f < a.folds.size(); ++f)
        REQUIRE(a.folds[f].test_f1 == c.folds[f].test_f1);
}

TEST_CASE("run_cv works for the OCGNN baseline") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 30, 30, 55);
    GridSpec grid = quick_grid();
    grid.max_epochs = 120;
    grid.patiences = {30};
    grid.nus = {0.1};
    CvConfig cv;
    cv.n_folds = 5;
    cv.seed = 3;
    const EvalReport report = run_cv(ds, Method::OcgnnGcn, grid, cv);
    REQUIRE(report.folds.size() == 5);
    for (const FoldOutcome& f : report.folds) {
        REQUIRE(f.test_f1 >= 0.0);
        REQUIRE(f.test_f1 <= 1.0);
        REQUIRE(f.model.sphere.radius > 0.0);
    }
}

TEST_CASE("report JSON carries the protocol fields") {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 20, 20, 66);
    GridSpec grid = quick_grid();
    grid.max_epochs = 60;
    grid.patiences = {20};
    CvConfig cv;
    cv.n_folds = 4;
    cv.seed = 1;
    const EvalReport report = run_cv(ds, Method::Olga, grid, cv);
    const auto j = to_json(report);
    REQUIRE(j["method"] == "olga");
    REQUIRE(j["folds"].size() == 4);
    REQUIRE(j["folds"][0].contains("test_f1"));
    REQUIRE(j["folds"][0]["selected"].contains("k"));
    REQUIRE(j.contains("mean"));
    REQUIRE(j.contains("std"));
}
