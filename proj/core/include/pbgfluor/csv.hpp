// csv.hpp — Deterministic CSV writers (shortest round-trip number formatting)

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pbgfluor/dynamics.hpp"
#include "pbgfluor/oracle.hpp"
#include "pbgfluor/spectrum.hpp"

namespace pbgfluor::csv {

std::string format_number(double x);

// omega,P,d2P,coherent_weight,flags
void write_spectrum(const std::filesystem::path& path, const spectrum::SpectrumResult& r);
// t, then re/im of <R11>, <R12>, <R21>, <R22>
void write_trajectory(const std::filesystem::path& path, const dynamics::OneTimeTrajectory& traj);
// t1,t2,Re,Im over the lower triangle t1 >= t2
void write_correlation_field(const std::filesystem::path& path, const dynamics::CorrelationField& field,
                             const TimeGrid& grid);
// t1,t2,Re,Im along the stationary row t2 = t*
void write_stationary_row(const std::filesystem::path& path, const dynamics::StationaryCorrelation& css);
// t,oracle,dynamics (excited population)
void write_oracle_population(const std::filesystem::path& path, const oracle::OneExcitationResult& res,
                             std::span<const double> dynamics_population);
// omega,density
void write_oracle_line(const std::filesystem::path& path, const oracle::OneExcitationResult& res);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

// Reads a numeric CSV with a header line (used by tests and tools).
Table read_table(const std::filesystem::path& path);

} // namespace pbgfluor::csv
