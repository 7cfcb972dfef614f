#pragma once

#include <string>
#include <vector>

#include "opkin/grid.hpp"
#include "opkin/limit_lab.hpp"

namespace opkin {

// All floating-point output uses 17 significant digits, so identical runs
// produce byte-identical files.
std::string format_double(double x);

// columns: t,mean,second_moment,c_f,rejected_fraction
void write_moment_series_csv(const std::string& path, const MomentSeries& series);

// columns: cell_center,density
void write_density_csv(const std::string& path, const DensityGrid& grid);

// columns: gamma,sigma2,effective_lambda,L1_to_fp,L1_to_closed_form,W1_to_fp,
//          rejected_fraction,runtime_seconds
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// columns: fitted_rate,theoretical_rate,continuum_rate,relative_deviation
struct RateCheck;
void write_rate_check_csv(const std::string& path, double fitted, double theoretical,
                          double continuum, double relative_deviation);

// gnuplot script plotting a density CSV against an optional reference
void write_gnuplot_script(const std::string& path, const std::string& density_csv,
                          const std::string& reference_csv = "");

} // namespace opkin
