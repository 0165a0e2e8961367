#include "spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace zinn {

std::vector<double> SplineBasisSpec::knot_vector() const {
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(interior_knots + 2 * (degree + 1)));
    for (int i = 0; i <= degree; ++i) knots.push_back(lo);
    const double step = (hi - lo) / static_cast<double>(interior_knots + 1);
    for (int i = 1; i <= interior_knots; ++i) knots.push_back(lo + step * i);
    for (int i = 0; i <= degree; ++i) knots.push_back(hi);
    return knots;
}

std::vector<double> bspline_basis(double x, const SplineBasisSpec& spec) {
    if (!(x >= spec.lo && x <= spec.hi)) {
        fail(ErrorCode::DomainViolation, "spline input " + std::to_string(x) + " outside [" +
                                             std::to_string(spec.lo) + ", " +
                                             std::to_string(spec.hi) + "]");
    }
    const int p = spec.degree;
    const auto knots = spec.knot_vector();
    const int n = spec.basis_count();

    // Knot span: knots[span] <= x < knots[span + 1]; x == hi uses the last span.
    int span = n - 1;
    if (x < spec.hi) {
        const auto it = std::upper_bound(knots.begin(), knots.end(), x);
        span = static_cast<int>(it - knots.begin()) - 1;
    }

    // Triangular Cox-de Boor table for the p + 1 nonzero functions.
    std::vector<double> local(static_cast<std::size_t>(p + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    local[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = local[r] / (right[r + 1] + left[j - r]);
            local[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        local[j] = saved;
    }

    std::vector<double> basis(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r <= p; ++r) {
        basis[static_cast<std::size_t>(span - p + r)] = std::clamp(local[r], 0.0, 1.0);
    }
    return basis;
}

}  // namespace zinn
