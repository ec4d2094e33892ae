#pragma once

#include "coulomb_ot/diagnostics.hpp"
#include "coulomb_ot/reference.hpp"

#include <iosfwd>
#include <string>

namespace coulomb_ot {

/// {"dim", "points", "weights", "cell_volume", optional "grid": {"shape",
/// "lower", "spacing"}}. Throws std::invalid_argument on malformed input.
std::string measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const std::string& text);
DiscreteMeasure load_measure(const std::string& path);

/// Header "i,j,mass", masses printed with 17 significant digits.
void write_plan_csv(std::ostream& out, const Plan& plan);

std::string report_to_json(const SolveReport& report);
std::string potentials_to_json(const PotentialPair& potentials);
std::string diagnostics_to_json(const DiagnosticsReport& report);
std::string oracle_to_json(const RadialOracle& oracle);

/// "index,x0,...,x{d-1},flag_reason" for the singular set.
void write_singular_csv(std::ostream& out, const DiagnosticsReport& report, const DiscreteMeasure& sources);

/// "index,R,E_plus,E,D,K_R" per examined point and radius.
void write_energies_csv(std::ostream& out, const DiagnosticsReport& report);

/// %.17g, with "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace coulomb_ot
