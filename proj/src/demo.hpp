#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn.hpp"

namespace zinn {

// One-input function fitting: a [32] ReLU network against the least-squares
// line on the same samples.
struct Fig1Options {
    std::size_t samples = 10000;
    std::size_t hidden = 32;
    TrainConfig train{.batch_size = 50,
                      .epochs = 60,
                      .learning_rate = 0.01,
                      .lr_decay = 0.93,
                      .seed = 1,
                      .loss = LossKind::MseTransformed,
                      .optimizer = OptimizerKind::Adam,
                      .shuffle = true};
};

struct Fig1Case {
    std::string function;  // "linear", "quadratic", "complex"
    double nn_mse = 0.0;
    double linear_mse = 0.0;
    std::vector<double> history;
};

struct Fig1Report {
    std::vector<Fig1Case> cases;
    // "function,nn_mse,linear_mse,ratio" rows.
    std::string to_csv() const;
};

Fig1Report run_fig1(std::uint64_t seed, const Fig1Options& options = {});

}  // namespace zinn
