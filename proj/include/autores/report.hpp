#pragma once

// Deterministic text output: JSON with sorted keys and 17-digit floats, and
// the CSV layouts written by the command-line tool.

#include "autores/asymptotics.hpp"
#include "autores/harness.hpp"
#include "autores/painleve.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace autores::report {

using Json = nlohmann::json;

/// "%.16e"; NaN and infinities are not representable and map to "null".
std::string format_double(double x);

/// Sorted keys, floats via format_double, integers verbatim, two-space
/// indentation and a trailing newline. indent < 0 gives a single line.
std::string dump(const Json& j, int indent = 2);

Json to_json(const Params& p);
Json to_json(const DuffingParams& dp);
Json to_json(const IntegratorConfig& cfg);
Json to_json(const IntegrationStats& s);
Json to_json(const Prediction& pr);
Json to_json(const BreakReport& r);
Json to_json(const SweepResult& s);
Json to_json(const StabilityReport& s);
Json to_json(const FastMotionReport& r);
Json to_json(const EnvelopeComparison& c);
Json to_json(const DuffingReport& r);
Json to_json(const EquivalenceReport& r);
Json to_json(const PoleEstimate& e);
Json to_json(const Painleve1Solution& sol);

/// Rows tau,psi_re,psi_im,R,phi of a complex-form trajectory, with φ unwrapped.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
/// The same rows as a JSON array of arrays.
Json trajectory_rows(const Trajectory& tr);

/// Rows z,y,yprime.
void write_p1_csv(std::ostream& os, const Painleve1Solution& sol);

} // namespace autores::report
