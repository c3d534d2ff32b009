#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "olga/error.hpp"
#include "olga/matrix.hpp"
#include "olga/rng.hpp"

namespace olga {

enum class Label { NonInterest = 0, Interest = 1 };

struct Dataset {
    Matrix features;            // n x f
    std::vector<Label> labels;  // one per node
    std::string name;

    std::size_t n() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    std::vector<int> indices_with(Label which) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == which) out.push_back(static_cast<int>(i));
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_number(const std::string& s, std::size_t row, std::size_t col) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": not a number: '" + s + "'");
    return value;
}

}  // namespace detail

// CSV contract: header row, numeric feature columns, final column `label`
// with 1 = interest and 0 = non-interest. Row numbers in errors are
// 1-based including the header.
inline Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header.back() != "label")
        throw ParseError(path + ": final column must be named 'label'");
    const std::size_t width = header.size();
    if (width < 2) throw ParseError(path + ": no feature columns");

    std::vector<double> values;
    std::vector<Label> labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != width)
            throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                             std::to_string(width) + " columns, got " +
                             std::to_string(fields.size()));
        for (std::size_t c = 0; c + 1 < width; ++c)
            values.push_back(detail::parse_number(fields[c], row, c));
        const double lab = detail::parse_number(fields.back(), row, width - 1);
        if (lab != 0.0 && lab != 1.0)
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": label must be 0 or 1, got " + fields.back());
        labels.push_back(lab == 1.0 ? Label::Interest : Label::NonInterest);
    }
    if (labels.empty()) throw ParseError(path + ": no data rows");
    if (labels.size() < 2) throw ParseError(path + ": need at least 2 nodes");

    Dataset ds;
    ds.name = path;
    ds.labels = std::move(labels);
    ds.features = Matrix(ds.labels.size(), width - 1);
    std::copy(values.begin(), values.end(), ds.features.data());

    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
        if (!std::isfinite(squared_norm(ds.features.row(i))))
            throw ParseError(path + ": row " + std::to_string(i + 2) + ": non-finite feature");
        if (squared_norm(ds.features.row(i)) == 0.0)
            throw ParseError(path + ": row " + std::to_string(i + 2) +
                             ": zero feature vector (cosine similarity undefined)");
    }
    return ds;
}

inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write dataset file: " + path);
    std::ostringstream header;
    for (std::size_t c = 0; c < ds.dim(); ++c) header << "f" << c << ",";
    out << header.str() << "label\n";
    out.precision(17);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (double v : ds.features.row(i)) out << v << ",";
        out << (ds.labels[i] == Label::Interest ? 1 : 0) << "\n";
    }
}

enum class SynthKind { Blobs, Ring };

inline SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "blobs") return SynthKind::Blobs;
    if (s == "ring") return SynthKind::Ring;
    throw ConfigError("unknown synthetic dataset kind: " + s);
}

// Deterministic synthetic datasets used in place of the original corpora.
//   blobs: two unit-variance Gaussian clusters with centers 4 sigma apart.
//          Both clusters sit away from the feature-space origin so that the
//          classes are also separated in angle (the graph metric is cosine).
//   ring:  an interest blob inside a non-interest annulus around it.
inline Dataset synth_dataset(SynthKind kind, std::size_t n_interest, std::size_t n_non_interest,
                             std::uint64_t seed) {
    if (n_interest < 1 || n_non_interest < 1)
        throw ConfigError("synth_dataset: class counts must be >= 1");
    Rng rng(Rng::derive(seed, 0x5b105));

    Dataset ds;
    ds.name = kind == SynthKind::Blobs ? "blobs" : "ring";
    const std::size_t n = n_interest + n_non_interest;
    ds.features = Matrix(n, 2);
    ds.labels.assign(n, Label::NonInterest);

    for (std::size_t i = 0; i < n; ++i) {
        const bool interest = i < n_interest;
        ds.labels[i] = interest ? Label::Interest : Label::NonInterest;
        double x = 0.0, y = 0.0;
        if (kind == SynthKind::Blobs) {
            x = rng.normal() + 5.0;
            y = rng.normal() + (interest ? 2.0 : -2.0);
        } else {
            if (interest) {
                x = 10.0 + 0.5 * rng.normal();
                y = 10.0 + 0.5 * rng.normal();
            } else {
                const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
                const double radius = rng.uniform(4.0, 5.0);
                x = 10.0 + radius * std::cos(angle);
                y = 10.0 + radius * std::sin(angle);
            }
        }
        ds.features(i, 0) = x;
        ds.features(i, 1) = y;
        // cosine similarity needs nonzero rows; nudge the measure-zero case
        if (squared_norm(ds.features.row(i)) == 0.0) ds.features(i, 0) = 1e-9;
    }
    return ds;
}

}  // namespace olga
