#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaugeflow/cli.hpp"
#include "gaugeflow/gaugeflow.hpp"

namespace testing_support {

using gaugeflow::Mat;
using gaugeflow::Vec;

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double half = 1.0) {
    std::uniform_real_distribution<double> u(-half, half);
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = u(rng);
    return x;
}

inline Mat random_antisymmetric(std::mt19937_64& rng, Eigen::Index n) {
    Mat a(n, n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u(rng);
    return a - a.transpose();
}

/// One system per registered scenario, with default parameters.
struct NamedSystem {
    std::string name;
    gaugeflow::ScenarioInstance instance;
};

inline std::vector<NamedSystem> all_scenarios() {
    const auto reg = gaugeflow::default_registry();
    std::vector<NamedSystem> out;
    for (const auto& e : reg.entries()) out.push_back({e.name, reg.build(e.name, {})});
    return out;
}

/// A fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("gaugeflow_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
    std::ofstream f(p);
    f << j.dump(2);
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
    std::vector<double> values(const std::string& name) const {
        const int c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
        return out;
    }
};

inline Csv read_csv(const std::filesystem::path& p) {
    std::ifstream f(p);
    Csv csv;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (std::getline(f, line)) csv.header = split(line);
    while (std::getline(f, line)) {
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(std::stod(c));
        csv.rows.push_back(row);
    }
    return csv;
}

/// Fourth-order central difference of equally spaced samples at interior index k.
inline double five_point_derivative(const std::vector<double>& y, std::size_t k, double h) {
    return (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) / (12.0 * h);
}

/// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testing_support
