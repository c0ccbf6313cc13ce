// csv.hpp — deterministic CSV artifacts (17 significant digits, LF endings)

#pragma once

#include <string>
#include <vector>

#include "omprobe/lindblad.hpp"
#include "omprobe/nonlinear.hpp"
#include "omprobe/types.hpp"

namespace omprobe {

/// Shortest text that round-trips the double exactly (17 significant digits).
std::string format_double(double v);

std::string spectrum_csv(const Spectrum& spectrum);

struct SweepGRow {
    double y = 0.0;
    double g_mag = 0.0;
    ResponsePoint point;
};
std::string sweep_g_csv(const std::vector<SweepGRow>& rows);

std::string lindblad_csv(const std::vector<LindbladComparisonRow>& rows);

std::string convergence_csv(const ConvergenceTable& table);

std::string linearity_csv(const LinearityReport& report);

std::string timeseries_csv(const TimeSeries& series);

/// Writes with LF endings regardless of platform.
void write_file(const std::string& path, const std::string& contents);

} // namespace omprobe
