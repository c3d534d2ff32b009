#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "olga/dataset.hpp"
#include "olga/error.hpp"
#include "olga/rng.hpp"

namespace olga {

// One cross-validation split. Only interest nodes are folded; the
// non-interest nodes are split 50/50 between the test and validation sets
// once per seed and reused by every fold.
struct FoldSplit {
    std::vector<int> train_interest;
    std::vector<int> val_interest;
    std::vector<int> val_non_interest;
    std::vector<int> test_interest;
    std::vector<int> test_non_interest;

    // Interest instances available for training, counting validation ones.
    std::size_t train_pool_size() const { return train_interest.size() + val_interest.size(); }
};

inline std::vector<FoldSplit> make_folds(const Dataset& ds, std::size_t n_folds,
                                         std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("make_folds: need at least 2 folds");
    std::vector<int> interest = ds.indices_with(Label::Interest);
    std::vector<int> non_interest = ds.indices_with(Label::NonInterest);
    if (interest.size() < n_folds)
        throw ConfigError("make_folds: " + std::to_string(interest.size()) +
                          " interest nodes cannot fill " + std::to_string(n_folds) + " folds");

    Rng rng(Rng::derive(seed, 0xf01d5));
    rng.shuffle(interest);
    rng.shuffle(non_interest);

    // test gets the larger half when the count is odd
    const std::size_t test_ni = (non_interest.size() + 1) / 2;
    std::vector<int> test_non(non_interest.begin(),
                              non_interest.begin() + static_cast<std::ptrdiff_t>(test_ni));
    std::vector<int> val_non(non_interest.begin() + static_cast<std::ptrdiff_t>(test_ni),
                             non_interest.end());
    std::sort(test_non.begin(), test_non.end());
    std::sort(val_non.begin(), val_non.end());

    // contiguous chunks of the shuffled interest list; the remainder goes to
    // the earliest folds
    const std::size_t base = interest.size() / n_folds;
    const std::size_t extra = interest.size() % n_folds;

    std::vector<FoldSplit> folds(n_folds);
    std::size_t offset = 0;
    for (std::size_t f = 0; f < n_folds; ++f) {
        const std::size_t take = base + (f < extra ? 1 : 0);
        FoldSplit& fold = folds[f];
        fold.test_interest.assign(interest.begin() + static_cast<std::ptrdiff_t>(offset),
                                  interest.begin() + static_cast<std::ptrdiff_t>(offset + take));
        std::vector<int> pool;
        pool.reserve(interest.size() - take);
        pool.insert(pool.end(), interest.begin(),
                    interest.begin() + static_cast<std::ptrdiff_t>(offset));
        pool.insert(pool.end(), interest.begin() + static_cast<std::ptrdiff_t>(offset + take),
                    interest.end());

        // 10% of the training pool (rounded down, at least 1) validates
        const std::size_t n_val = std::max<std::size_t>(1, pool.size() / 10);
        fold.val_interest.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
        fold.train_interest.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
        fold.val_non_interest = val_non;
        fold.test_non_interest = test_non;

        for (auto* v : {&fold.train_interest, &fold.val_interest, &fold.test_interest})
            std::sort(v->begin(), v->end());
        offset += take;
    }
    return folds;
}

}  // namespace olga
