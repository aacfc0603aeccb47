#include "kflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kflow {
namespace io {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("cannot parse number '" + s + "' in " + what);
    }
}

// Columns of a CSV with a header row; periodic-linear resampling onto the grid.
std::vector<std::vector<double>> read_csv_columns(const std::string& path, std::size_t n_cols) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw UsageError("empty file '" + path + "'");
    std::vector<std::vector<double>> cols(n_cols);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (!std::getline(ss, cell, ','))
                throw UsageError("short row in '" + path + "'");
            cols[c].push_back(parse_number(cell, path));
        }
    }
    if (cols[0].size() < 2) throw UsageError("file '" + path + "' has fewer than two rows");
    for (std::size_t i = 1; i < cols[0].size(); ++i)
        if (cols[0][i] <= cols[0][i - 1])
            throw UsageError("x column in '" + path + "' is not strictly ascending");
    if (cols[0].front() < 0.0 || cols[0].back() >= 1.0)
        throw UsageError("x column in '" + path + "' must lie in [0,1)");
    return cols;
}

std::vector<double> resample_periodic(const std::vector<double>& xs, const std::vector<double>& ys,
                                      const PeriodicGrid& grid) {
    const std::size_t m = xs.size();
    std::vector<double> out(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.node(i);
        // locate the interval [xs[j], xs[j+1]) wrapping at the period
        std::size_t j = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
        double x0, x1, y0, y1;
        if (j == 0) { // before the first sample: wrap the last one back
            x0 = xs[m - 1] - 1.0;
            y0 = ys[m - 1];
            x1 = xs[0];
            y1 = ys[0];
        } else if (j == m) {
            x0 = xs[m - 1];
            y0 = ys[m - 1];
            x1 = xs[0] + 1.0;
            y1 = ys[0];
        } else {
            x0 = xs[j - 1];
            y0 = ys[j - 1];
            x1 = xs[j];
            y1 = ys[j];
        }
        const double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
        out[i] = (1.0 - t) * y0 + t * y1;
    }
    return out;
}

} // namespace

KahlerPotential potential_from_spec(const std::string& spec, const PeriodicGrid& grid) {
    std::vector<double> v(grid.n_points, 0.0);
    if (spec == "zero") {
        return KahlerPotential(grid, std::move(v));
    }
    if (starts_with(spec, "const:")) {
        const double c = parse_number(spec.substr(6), "const potential spec");
        std::fill(v.begin(), v.end(), c);
        return KahlerPotential(grid, std::move(v));
    }
    if (starts_with(spec, "cos:")) {
        const double a = parse_number(spec.substr(4), "cos potential spec");
        const double pi2_4 = kTwoPi * kTwoPi; // 4 pi^2
        for (int i = 0; i < grid.n_points; ++i)
            v[i] = a / pi2_4 * std::cos(kTwoPi * grid.node(i));
        return KahlerPotential(grid, std::move(v));
    }
    const auto cols = read_csv_columns(spec, 2);
    return KahlerPotential(grid, resample_periodic(cols[0], cols[1], grid));
}

TwistData twist_from_spec(const std::string& spec, const PeriodicGrid& grid) {
    if (spec == "none")
        return TwistData(grid, std::vector<double>(grid.n_points, 0.0),
                         std::vector<double>(grid.n_points, 0.0));
    if (starts_with(spec, "uniform:")) {
        const double m = parse_number(spec.substr(8), "uniform twist spec");
        if (m < 0.0) throw UsageError("uniform twist mass must be nonnegative");
        return TwistData(grid, std::vector<double>(grid.n_points, m),
                         std::vector<double>(grid.n_points, 0.0));
    }
    const auto cols = read_csv_columns(spec, 3);
    return TwistData(grid, resample_periodic(cols[0], cols[1], grid),
                     resample_periodic(cols[0], cols[2], grid));
}

DensityMeasure density_from_spec(const std::string& spec, const PeriodicGrid& grid) {
    if (spec == "uniform") return DensityMeasure(grid, std::vector<double>(grid.n_points, 1.0));
    if (starts_with(spec, "cosdensity:")) {
        const double a = parse_number(spec.substr(11), "cos density spec");
        std::vector<double> rho(grid.n_points);
        for (int i = 0; i < grid.n_points; ++i)
            rho[i] = 1.0 - a * std::cos(kTwoPi * grid.node(i));
        return DensityMeasure(grid, std::move(rho));
    }
    const auto cols = read_csv_columns(spec, 2);
    return DensityMeasure(grid, resample_periodic(cols[0], cols[1], grid));
}

void write_potential_csv(const std::string& path, const KahlerPotential& u) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << "x,u\n";
    for (int i = 0; i < u.grid.n_points; ++i)
        out << fmt(u.grid.node(i)) << "," << fmt(u.values[i]) << "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("config line without '=': " + t);
        kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
}

} // namespace io
} // namespace kflow
