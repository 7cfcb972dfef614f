#pragma once

#include <stdexcept>
#include <vector>

namespace opkin {

// Cell-averaged density on a uniform partition of [-1, 1].
// Used both for the finite-volume solver state and for ensemble histograms.
struct DensityGrid {
    double time = 0.0;          // kinetic t for histograms, scaled tau for solver output
    std::vector<double> value;  // cell averages, left to right

    int cells() const { return static_cast<int>(value.size()); }
    double h() const { return 2.0 / cells(); }
    double center(int i) const { return -1.0 + (i + 0.5) * h(); }

    double mass() const;
    double mean() const;
    double second_moment() const;

    static DensityGrid uniform(int k);
    static DensityGrid zeros(int k);
};

// L1 distance between two densities on the same grid: sum |a-b| * h.
double l1_distance(const DensityGrid& a, const DensityGrid& b);

// 1-Wasserstein distance via cumulative sums: sum |CDF_a - CDF_b| * h.
double wasserstein1_distance(const DensityGrid& a, const DensityGrid& b);

struct MomentRecord {
    double t = 0.0;
    double mean = 0.0;
    double second_moment = 0.0;
    double c_f = 0.0;               // second_moment - mean^2
    double rejected_fraction = 0.0; // of proposed interactions since last record
};

using MomentSeries = std::vector<MomentRecord>;

} // namespace opkin
