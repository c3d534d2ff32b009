#pragma once

#include <span>

#include "olga/dataset.hpp"
#include "olga/error.hpp"

namespace olga {

// Unweighted mean of the per-class F1 scores. A class absent from both the
// truth and the predictions contributes 0, which keeps the score honest on
// degenerate predictions.
inline double f1_macro(std::span<const Label> predictions, std::span<const Label> truth) {
    if (predictions.size() != truth.size())
        throw DimensionError("f1_macro: prediction/truth length mismatch");
    if (predictions.empty()) throw ConfigError("f1_macro: empty input");

    double macro = 0.0;
    for (Label positive : {Label::Interest, Label::NonInterest}) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool pred_pos = predictions[i] == positive;
            const bool true_pos = truth[i] == positive;
            tp += pred_pos && true_pos;
            fp += pred_pos && !true_pos;
            fn += !pred_pos && true_pos;
        }
        const double denom = static_cast<double>(2 * tp + fp + fn);
        macro += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    }
    return macro / 2.0;
}

}  // namespace olga
