#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "olga/evaluate.hpp"
#include "olga/stats.hpp"

namespace olga {

struct ScoreTable {
    std::vector<std::string> datasets;  // row labels
    std::vector<std::string> methods;   // column labels
    Matrix scores;                      // datasets x methods
};

// CSV layout: header "dataset,<method>,<method>,..."; one row per dataset,
// first cell is the dataset name.
inline ScoreTable load_score_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open score table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw ParseError(path + ": header needs at least one method column");

    ScoreTable table;
    table.methods.assign(header.begin() + 1, header.end());

    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(path + ": row " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " columns");
        table.datasets.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c)
            values.push_back(detail::parse_number(fields[c], lineno, c));
    }
    if (table.datasets.empty()) throw ParseError(path + ": no data rows");
    table.scores = Matrix(table.datasets.size(), table.methods.size());
    std::copy(values.begin(), values.end(), table.scores.data());
    return table;
}

inline nlohmann::ordered_json to_json(const GridCell& cell) {
    return {{"k", cell.k},           {"radius", cell.radius},
            {"learning_rate", cell.learning_rate}, {"patience", cell.patience},
            {"embedding_dim", cell.embedding_dim}, {"nu", cell.nu},
            {"lambda", cell.lambda}};
}

inline nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
        const FoldOutcome& o = report.folds[f];
        folds.push_back({{"fold", f},
                         {"test_f1", o.test_f1},
                         {"val_f1", o.val_f1},
                         {"interest_inside_rate", o.interest_inside_rate},
                         {"non_interest_inside_rate", o.non_interest_inside_rate},
                         {"best_epoch", o.trace.best_epoch},
                         {"selected", to_json(o.selected)}});
    }
    return {{"method", report.method}, {"dataset", report.dataset},
            {"folds", folds},          {"mean", report.mean},
            {"std", report.stddev}};
}

inline nlohmann::ordered_json to_json(const RankResult& result) {
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (auto [a, b] : result.significant_pairs)
        pairs.push_back({result.methods[static_cast<std::size_t>(a)],
                         result.methods[static_cast<std::size_t>(b)]});
    return {{"methods", result.methods},
            {"avg_ranks", result.average_ranks},
            {"friedman_chi2", result.friedman_chi2},
            {"cd", result.critical_difference},
            {"significant_pairs", pairs}};
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace olga
