#include "opkin/grid.hpp"

#include <cmath>
#include <cstdlib>

namespace opkin {

double DensityGrid::mass() const {
    double s = 0.0;
    for (double v : value) s += v;
    return s * h();
}

double DensityGrid::mean() const {
    double s = 0.0;
    for (int i = 0; i < cells(); ++i) s += center(i) * value[i];
    return s * h();
}

double DensityGrid::second_moment() const {
    double s = 0.0;
    for (int i = 0; i < cells(); ++i) {
        const double w = center(i);
        s += w * w * value[i];
    }
    return s * h();
}

DensityGrid DensityGrid::uniform(int k) {
    DensityGrid g;
    g.value.assign(k, 0.5);
    return g;
}

DensityGrid DensityGrid::zeros(int k) {
    DensityGrid g;
    g.value.assign(k, 0.0);
    return g;
}

static void check_same_grid(const DensityGrid& a, const DensityGrid& b) {
    if (a.cells() != b.cells())
        throw std::invalid_argument("density grids have different cell counts");
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
    check_same_grid(a, b);
    double s = 0.0;
    for (int i = 0; i < a.cells(); ++i) s += std::abs(a.value[i] - b.value[i]);
    return s * a.h();
}

double wasserstein1_distance(const DensityGrid& a, const DensityGrid& b) {
    check_same_grid(a, b);
    const double h = a.h();
    double cdf_a = 0.0, cdf_b = 0.0, s = 0.0;
    // CDF difference at interior faces; at the last face both CDFs agree (total mass)
    for (int i = 0; i + 1 < a.cells(); ++i) {
        cdf_a += a.value[i] * h;
        cdf_b += b.value[i] * h;
        s += std::abs(cdf_a - cdf_b);
    }
    return s * h;
}

} // namespace opkin
