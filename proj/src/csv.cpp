#include "opkin/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace opkin {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary); // fixed newlines on every platform
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

void finish(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace

void write_moment_series_csv(const std::string& path, const MomentSeries& series) {
    auto f = open_out(path);
    f << "t,mean,second_moment,c_f,rejected_fraction\n";
    for (const auto& r : series) {
        f << format_double(r.t) << ',' << format_double(r.mean) << ','
          << format_double(r.second_moment) << ',' << format_double(r.c_f) << ','
          << format_double(r.rejected_fraction) << '\n';
    }
    finish(f, path);
}

void write_density_csv(const std::string& path, const DensityGrid& grid) {
    auto f = open_out(path);
    f << "cell_center,density\n";
    for (int i = 0; i < grid.cells(); ++i)
        f << format_double(grid.center(i)) << ',' << format_double(grid.value[i]) << '\n';
    finish(f, path);
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto f = open_out(path);
    f << "gamma,sigma2,effective_lambda,L1_to_fp,L1_to_closed_form,W1_to_fp,"
         "rejected_fraction,runtime_seconds\n";
    for (const auto& r : rows) {
        if (r.skipped) continue;
        f << format_double(r.gamma) << ',' << format_double(r.sigma2) << ','
          << format_double(r.effective_lambda) << ',' << format_double(r.l1_to_fp) << ','
          << format_double(r.l1_to_closed_form) << ',' << format_double(r.w1_to_fp) << ','
          << format_double(r.rejected_fraction) << ',' << format_double(r.runtime_seconds)
          << '\n';
    }
    finish(f, path);
}

void write_rate_check_csv(const std::string& path, double fitted, double theoretical,
                          double continuum, double relative_deviation) {
    auto f = open_out(path);
    f << "fitted_rate,theoretical_rate,continuum_rate,relative_deviation\n";
    f << format_double(fitted) << ',' << format_double(theoretical) << ','
      << format_double(continuum) << ',' << format_double(relative_deviation) << '\n';
    finish(f, path);
}

void write_gnuplot_script(const std::string& path, const std::string& density_csv,
                          const std::string& reference_csv) {
    auto f = open_out(path);
    f << "set datafile separator ','\n"
      << "set xlabel 'w'\n"
      << "set ylabel 'density'\n"
      << "set key top left\n";
    f << "plot '" << density_csv << "' every ::1 using 1:2 with lines title 'density'";
    if (!reference_csv.empty())
        f << ", \\\n     '" << reference_csv << "' every ::1 using 1:2 with lines title 'reference'";
    f << "\n";
    finish(f, path);
}

} // namespace opkin
