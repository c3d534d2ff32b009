#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "olga/config.hpp"

using namespace olga;

namespace {

std::string write_config(const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / "olga_test.cfg";
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("config files parse into a run configuration") {
    const auto path = write_config(
        "# comment\n"
        "synth = blobs\n"
        "n_interest = 250\n"
        "n_non_interest = 250\n"
        "method = olga\n"
        "k = 1,2,3\n"
        "radius = 0.3, 0.35, 0.4\n"
        "lr = 0.0005\n"
        "patience = 300\n"
        "dims = 2\n"
        "hidden = 16\n"
        "max_epochs = 1500\n"
        "seed = 7\n"
        "out = results\n");
    const RunConfig cfg = make_run_config(parse_config_file(path));
    REQUIRE(cfg.synth == "blobs");
    REQUIRE(cfg.n_interest == 250);
    REQUIRE(cfg.method == Method::Olga);
    REQUIRE(cfg.grid.ks == std::vector<std::size_t>{1, 2, 3});
    REQUIRE(cfg.grid.radii == std::vector<double>{0.3, 0.35, 0.4});
    REQUIRE(cfg.grid.learning_rates == std::vector<double>{0.0005});
    REQUIRE(cfg.grid.patiences == std::vector<std::size_t>{300});
    REQUIRE(cfg.grid.hidden_dim == 16);
    REQUIRE(cfg.grid.max_epochs == 1500);
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.out_dir == "results");
}

TEST_CASE("unknown keys and malformed values are config errors") {
    REQUIRE_THROWS_AS(make_run_config(parse_config_file(write_config("mystery = 1\n"))),
                      ConfigError);
    REQUIRE_THROWS_AS(make_run_config(parse_config_file(write_config("lr = fast\n"))),
                      ConfigError);
    REQUIRE_THROWS_AS(make_run_config(parse_config_file(write_config("radius = -0.3\n"))),
                      ConfigError);
    REQUIRE_THROWS_AS(make_run_config(parse_config_file(write_config("nu = 1.5\n"))),
                      ConfigError);
    REQUIRE_THROWS_AS(make_run_config(parse_config_file(write_config("just a line\n"))),
                      ConfigError);
    REQUIRE_THROWS_AS(parse_config_file("/nonexistent/olga.cfg"), ConfigError);
}

TEST_CASE("an explicit dataset path beats the synth default") {
    const auto path = write_config("dataset = somewhere.csv\nsynth = ring\n");
    const RunConfig cfg = make_run_config(parse_config_file(path));
    REQUIRE(cfg.dataset_path == "somewhere.csv");
}

TEST_CASE("method string validation") {
    REQUIRE(method_from_string("olga") == Method::Olga);
    REQUIRE(method_from_string("ocgnn-gcn") == Method::OcgnnGcn);
    REQUIRE_THROWS_AS(method_from_string("deepwalk"), ConfigError);
}
