#include "meanloop/reporting.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "meanloop/errors.hpp"

namespace meanloop::reporting {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

nlohmann::json to_json(const SpectralReport& rep) {
    return {
        {"nullity", rep.nullity},
        {"tolerance_used", rep.tolerance_used},
        {"symmetry_defect", rep.symmetry_defect},
        {"bound", rep.bound},
        {"bound_satisfied", rep.bound_satisfied},
        {"sigma_max", rep.singular_values.size() ? rep.singular_values(0) : 0.0},
        {"sigma_min",
         rep.singular_values.size() ? rep.singular_values(rep.singular_values.size() - 1) : 0.0},
    };
}

nlohmann::json to_json(const NullityReport& rep) {
    nlohmann::json j{
        {"nullity_direct", rep.nullity_direct},
        {"nullity_reduced", rep.nullity_reduced},
        {"bound_A", rep.bound_A},
        {"commuting", rep.commuting},
        {"routes_agree", rep.routes_agree},
        {"bounds_hold", rep.bounds_hold},
    };
    if (rep.bound_B >= 0) j["bound_B"] = rep.bound_B;
    const auto tail = [](const Eigen::VectorXd& sv) {
        nlohmann::json arr = nlohmann::json::array();
        const int take = std::min<int>(8, static_cast<int>(sv.size()));
        for (int i = 0; i < take; ++i) arr.push_back(sv(sv.size() - take + i));
        return arr;
    };
    j["spectrum_tail_direct"] = tail(rep.spectrum_direct);
    j["spectrum_tail_reduced"] = tail(rep.spectrum_reduced);
    return j;
}

nlohmann::json critical_point_json(const CriticalPoint& cp) {
    return {
        {"mean", to_json(cp.mean.value)},
        {"mean_in_domain", cp.mean.in_domain},
        {"residual", cp.residual_norm},
        {"covector", to_json(cp.covector)},
        {"action", action(cp.pair, cp.loop)},
        {"point0", to_json(cp.loop.samples.col(0))},
        {"grid", cp.loop.grid.size()},
    };
}

void write_loop_csv(std::ostream& os, const Loop& u) {
    os << "t";
    for (int i = 0; i < u.dim(); ++i) os << ",x" << i;
    os << "\n";
    for (int k = 0; k < u.size(); ++k) {
        os << format_double(u.grid.node(k));
        for (int i = 0; i < u.dim(); ++i) os << "," << format_double(u.samples(i, k));
        os << "\n";
    }
}

Loop read_loop_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgumentError("loop CSV: empty file");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidArgumentError("loop CSV: no data rows");
    const int N = static_cast<int>(rows.size());
    const int dim = static_cast<int>(rows[0].size()) - 1;
    Eigen::MatrixXd samples(dim, N);
    for (int k = 0; k < N; ++k) {
        if (static_cast<int>(rows[k].size()) != dim + 1)
            throw InvalidArgumentError("loop CSV: ragged rows");
        for (int i = 0; i < dim; ++i) samples(i, k) = rows[k][i + 1];
    }
    return Loop(TimeGrid(N), std::move(samples));
}

void write_planar_csv(std::ostream& os, const PlanarLoop& x) {
    os << "t,re,im\n";
    for (int k = 0; k < x.size(); ++k)
        os << format_double(x.grid.node(k)) << "," << format_double(x.samples(0, k)) << ","
           << format_double(x.samples(1, k)) << "\n";
}

}  // namespace meanloop::reporting
