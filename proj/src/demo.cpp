#include "demo.hpp"

#include <cmath>
#include <functional>

#include "csv.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace zinn {

std::string Fig1Report::to_csv() const {
    std::string out = "function,nn_mse,linear_mse,ratio\n";
    for (const auto& c : cases) {
        out += c.function + "," + csv::format_number(c.nn_mse) + "," + csv::format_number(c.linear_mse) + "," +
               csv::format_number(c.linear_mse > 0.0 ? c.nn_mse / c.linear_mse : 0.0) + "\n";
    }
    return out;
}

Fig1Report run_fig1(std::uint64_t seed, const Fig1Options& o) {
    const std::vector<std::pair<std::string, std::function<double(double)>>> functions = {
        {"linear", [](double x) { return 5.0 * x; }},
        {"quadratic", [](double x) { return x * x; }},
        {"complex", [](double x) { return std::sin(x) * std::log(std::abs(x) + 1.0); }},
    };

    Rng rng(derive_seed(seed, 0));
    Matrix x(o.samples, 1);
    Matrix design(o.samples, 2);
    for (std::size_t i = 0; i < o.samples; ++i) {
        x(i, 0) = rng.uniform(-5.0, 5.0);
        design(i, 0) = 1.0;
        design(i, 1) = x(i, 0);
    }

    NetworkSpec spec;
    spec.input = 1;
    spec.hidden = {o.hidden};

    Fig1Report report;
    for (std::size_t k = 0; k < functions.size(); ++k) {
        std::vector<double> y(o.samples);
        for (std::size_t i = 0; i < o.samples; ++i) y[i] = functions[k].second(x(i, 0));

        Fig1Case c;
        c.function = functions[k].first;
        const auto line = ols_fit(design, y);
        std::vector<double> line_pred(o.samples);
        for (std::size_t i = 0; i < o.samples; ++i) {
            line_pred[i] = line.coefficients[0] + line.coefficients[1] * x(i, 0);
        }
        c.linear_mse = mse(line_pred, y);

        auto config = o.train;
        config.seed = derive_seed(seed, 2, k);
        auto result = train(spec, init_params(spec, derive_seed(seed, 1, k)), x, y, config);
        c.nn_mse = mse(predict(result.params, spec, x), y);
        c.history = std::move(result.history);
        report.cases.push_back(std::move(c));
    }
    return report;
}

}  // namespace zinn
