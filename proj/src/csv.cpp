// csv.cpp

#include "omprobe/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omprobe {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void append_point_fields(std::string& out, const ResponsePoint& pt) {
    out += format_double(pt.eps_t.real());
    out += ',';
    out += format_double(pt.eps_t.imag());
    out += ',';
    out += format_double(pt.transmission.real());
    out += ',';
    out += format_double(pt.transmission.imag());
    out += ',';
    out += format_double(pt.power_transmission);
}

} // namespace

std::string spectrum_csv(const Spectrum& s) {
    std::string out = "delta_prime,re_epsT,im_epsT,re_scriptT,im_scriptT,T\n";
    for (const auto& pt : s.points) {
        out += format_double(pt.delta_prime);
        out += ',';
        append_point_fields(out, pt);
        out += '\n';
    }
    return out;
}

std::string sweep_g_csv(const std::vector<SweepGRow>& rows) {
    std::string out = "y,g,re_epsT,im_epsT,re_scriptT,im_scriptT,T\n";
    for (const auto& r : rows) {
        out += format_double(r.y);
        out += ',';
        out += format_double(r.g_mag);
        out += ',';
        append_point_fields(out, r.point);
        out += '\n';
    }
    return out;
}

std::string lindblad_csv(const std::vector<LindbladComparisonRow>& rows) {
    std::string out = "delta_prime,re_epsT_num,im_epsT_num,re_epsT_ana,im_epsT_ana,abs_err\n";
    for (const auto& r : rows) {
        out += format_double(r.delta_prime);
        out += ',';
        out += format_double(r.eps_t_numeric.real());
        out += ',';
        out += format_double(r.eps_t_numeric.imag());
        out += ',';
        out += format_double(r.eps_t_analytic.real());
        out += ',';
        out += format_double(r.eps_t_analytic.imag());
        out += ',';
        out += format_double(r.abs_err);
        out += '\n';
    }
    return out;
}

std::string convergence_csv(const ConvergenceTable& table) {
    std::string out = "n_cav,n_mech,re_mean_c,im_mean_c,diff\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.trunc.n_cav);
        out += ',';
        out += std::to_string(r.trunc.n_mech);
        out += ',';
        out += format_double(r.mean_cavity.real());
        out += ',';
        out += format_double(r.mean_cavity.imag());
        out += ',';
        out += format_double(r.diff);
        out += '\n';
    }
    return out;
}

std::string linearity_csv(const LinearityReport& report) {
    std::string out = "eps_p_over_eps_c,margin,rel_deviation\n";
    for (const auto& r : report.rows) {
        out += format_double(r.eps_ratio);
        out += ',';
        out += format_double(r.margin);
        out += ',';
        out += format_double(r.rel_deviation);
        out += '\n';
    }
    return out;
}

std::string timeseries_csv(const TimeSeries& series) {
    std::string out = "t,re_c,im_c,re_b,im_b\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out += format_double(series.t[i]);
        out += ',';
        out += format_double(series.cavity[i].real());
        out += ',';
        out += format_double(series.cavity[i].imag());
        out += ',';
        out += format_double(series.mech[i].real());
        out += ',';
        out += format_double(series.mech[i].imag());
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace omprobe
