#pragma once

#include <vector>

namespace zinn {

// Clamped B-spline basis over [lo, hi]: `interior_knots` evenly spaced knots
// strictly inside the domain, end knots repeated degree + 1 times.
struct SplineBasisSpec {
    int degree = 3;
    int interior_knots = 8;
    double lo = 0.0;
    double hi = 1440.0;

    int basis_count() const { return interior_knots + degree + 1; }
    std::vector<double> knot_vector() const;

    bool operator==(const SplineBasisSpec&) const = default;
};

// Minutes since midnight, 8 interior knots.
inline SplineBasisSpec time_of_day_basis() { return {3, 8, 0.0, 1440.0}; }
// Day of year, 12 interior knots.
inline SplineBasisSpec day_of_year_basis() { return {3, 12, 1.0, 366.0}; }

// Values of all basis functions at x. Throws DomainViolation outside [lo, hi].
std::vector<double> bspline_basis(double x, const SplineBasisSpec& spec);

}  // namespace zinn
