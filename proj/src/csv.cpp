#include "qbeam/csv.hpp"

#include "qbeam/errors.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>

namespace qbeam {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

void write_row(std::ofstream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) {
            out << ',';
        }
        out << format_number(v);
        first = false;
    }
    out << '\n';
}

} // namespace

std::string format_number(double v) {
    // snprintf honours LC_NUMERIC, which is "C" unless the program calls
    // setlocale; the CLI never does.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
    auto out = open_for_write(path);
    out << "s,x0,p0,sigma,dsigma,chi\n";
    for (const auto& st : trajectory) {
        write_row(out, {st.s, st.x0, st.p0, st.sigma, st.dsigma, st.chi});
    }
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
    auto out = open_for_write(path);
    out << "s,norm,mean_x,sigma,sigma_p,xp_corr,emit_rms,energy\n";
    for (const auto& r : records) {
        write_row(out, {r.s, r.norm, r.mean_x, r.sigma, r.sigma_p, r.xp_corr, r.emit_rms, r.energy});
    }
}

void write_fluid_snapshot(const std::filesystem::path& path, std::size_t index, const FluidFields& fields) {
    auto out = open_for_write(path);
    out << "# snapshot=" << index << " s=" << format_number(fields.s) << '\n';
    out << "x,n,P\n";
    for (std::size_t j = 0; j < fields.grid.n_cells; ++j) {
        write_row(out, {fields.grid.x(j), fields.n[j], fields.P[j]});
    }
}

void write_wave_snapshot(const std::filesystem::path& path, std::size_t index, const WaveField& field, double eps) {
    const MadelungFields m = madelung_decompose(field, eps);
    auto out = open_for_write(path);
    out << "# snapshot=" << index << " s=" << format_number(field.s) << '\n';
    out << "x,re_psi,im_psi,n,P\n";
    for (std::size_t j = 0; j < field.grid.n_cells; ++j) {
        write_row(out, {field.grid.x(j), field.psi[j].real(), field.psi[j].imag(), m.n[j], m.P[j]});
    }
}

} // namespace qbeam
