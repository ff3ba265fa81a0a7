#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "meanloop/critical_point.hpp"
#include "meanloop/hessian.hpp"
#include "meanloop/kepler.hpp"

namespace meanloop::reporting {

inline constexpr const char* kArtifactVersion = "meanloop 0.1.0";

/// 17 significant digits, enough to round-trip a double exactly.
std::string format_double(double x);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const SpectralReport& rep);
nlohmann::json to_json(const NullityReport& rep);

/// Summary of a solved critical point (mean, residual, action, loop head).
nlohmann::json critical_point_json(const CriticalPoint& cp);

/// Loop CSV: header row, column 0 = t, columns 1..2n = coordinates.
void write_loop_csv(std::ostream& os, const Loop& u);
Loop read_loop_csv(std::istream& is);

/// Planar orbit CSV: t, Re x, Im x.
void write_planar_csv(std::ostream& os, const PlanarLoop& x);

}  // namespace meanloop::reporting
