#include "pbgfluor/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "pbgfluor/error.hpp"

namespace pbgfluor::csv {

namespace {

std::ofstream open(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli", "cannot write '" + path.string() + "'");
    return out;
}

void close(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error("cli", "write failed for '" + path.string() + "'");
}

} // namespace

std::string format_number(double x) {
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), p);
}

void write_spectrum(const std::filesystem::path& path, const spectrum::SpectrumResult& r) {
    auto out = open(path);
    std::string flags;
    for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
    out << "omega,P,d2P,coherent_weight,flags\n";
    for (std::size_t i = 0; i < r.omega.size(); ++i) {
        out << format_number(r.omega[i]) << ',' << format_number(r.power[i]) << ',';
        if (r.d2_power) out << format_number((*r.d2_power)[i]);
        out << ',' << format_number(r.coherent_weight) << ',' << flags << '\n';
    }
    close(out, path);
}

void write_trajectory(const std::filesystem::path& path, const dynamics::OneTimeTrajectory& traj) {
    auto out = open(path);
    out << "t,R11_re,R11_im,R12_re,R12_im,R21_re,R21_im,R22_re,R22_im\n";
    for (std::size_t n = 0; n < traj.values.size(); ++n) {
        out << format_number(traj.grid.time(n));
        for (int k = 0; k < 4; ++k)
            out << ',' << format_number(traj.values[n](k).real()) << ',' << format_number(traj.values[n](k).imag());
        out << '\n';
    }
    close(out, path);
}

void write_correlation_field(const std::filesystem::path& path, const dynamics::CorrelationField& field,
                             const TimeGrid& grid) {
    auto out = open(path);
    out << "t1,t2,Re,Im\n";
    for (Eigen::Index j = 0; j < field.cols(); ++j)
        for (Eigen::Index i = j; i < field.rows(); ++i)
            out << format_number(grid.time(static_cast<std::size_t>(i))) << ','
                << format_number(grid.time(static_cast<std::size_t>(j))) << ',' << format_number(field(i, j).real())
                << ',' << format_number(field(i, j).imag()) << '\n';
    close(out, path);
}

void write_stationary_row(const std::filesystem::path& path, const dynamics::StationaryCorrelation& css) {
    auto out = open(path);
    out << "t1,t2,Re,Im\n";
    for (std::size_t i = 0; i < css.values.size(); ++i)
        out << format_number(css.t_star + css.step * static_cast<double>(i)) << ',' << format_number(css.t_star)
            << ',' << format_number(css.values[i].real()) << ',' << format_number(css.values[i].imag()) << '\n';
    close(out, path);
}

void write_oracle_population(const std::filesystem::path& path, const oracle::OneExcitationResult& res,
                             std::span<const double> dynamics_population) {
    auto out = open(path);
    out << "t,oracle,dynamics\n";
    for (std::size_t n = 0; n < res.excited_population.size(); ++n) {
        out << format_number(res.grid.time(n)) << ',' << format_number(res.excited_population[n]) << ',';
        if (n < dynamics_population.size()) out << format_number(dynamics_population[n]);
        out << '\n';
    }
    close(out, path);
}

void write_oracle_line(const std::filesystem::path& path, const oracle::OneExcitationResult& res) {
    auto out = open(path);
    const auto density = res.line_density();
    out << "omega,density\n";
    for (std::size_t l = 0; l < density.size(); ++l)
        out << format_number(res.mode_omegas[l]) << ',' << format_number(density[l]) << '\n';
    close(out, path);
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "cannot read '" + path.string() + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) return t;
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) t.header.push_back(h);
    }
    t.columns.assign(t.header.size(), {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (!std::getline(ss, cell, ',')) cell.clear();
            double x = std::numeric_limits<double>::quiet_NaN();
            if (!cell.empty()) std::from_chars(cell.data(), cell.data() + cell.size(), x);
            t.columns[c].push_back(x);
        }
    }
    return t;
}

} // namespace pbgfluor::csv
