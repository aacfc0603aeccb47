#pragma once

#include <string>
#include <vector>

#include "kflow/grid.hpp"

namespace kflow {
namespace io {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Analytic specs: "zero", "const:c", "cos:a" (u = (a/4pi^2) cos(2 pi x)),
// or a path to a two-column CSV "x,u" with header and x ascending in [0,1).
KahlerPotential potential_from_spec(const std::string& spec, const PeriodicGrid& grid);

// "uniform:m" (b = m, f = 0), "none", or a three-column CSV "x,b,f".
TwistData twist_from_spec(const std::string& spec, const PeriodicGrid& grid);

// "uniform", "cosdensity:a" (rho = 1 - a cos(2 pi x)), or a CSV "x,rho".
DensityMeasure density_from_spec(const std::string& spec, const PeriodicGrid& grid);

void write_potential_csv(const std::string& path, const KahlerPotential& u);

// Fixed 17-significant-digit formatting for reproducible, diffable output.
std::string fmt(double v);

// Flat key = value configuration files; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

} // namespace io
} // namespace kflow
