#pragma once

#include <iosfwd>
#include <string>

#include "l2e/block_descent.hpp"

namespace l2e {

/// JSON with beta, eta, tau, weights, loss_trace, outer_iters, inner iteration
/// counts, converged, precision_diverged, init_warning, constraint_distance and
/// stage_starts. Wall time is left out so equal fits give equal text. Doubles are
/// written in shortest round-trip form; non-finite values as "inf", "-inf", "nan".
std::string fit_report_to_json(const FitReport& r, int indent = 2);

/// Inverse of fit_report_to_json (wall_time is 0). Throws InvalidArgument on
/// malformed input.
FitReport fit_report_from_json(const std::string& text);

/// Columns case, residual, weight, log_weight; one row per case, 17 significant
/// digits. log_weight is -tau^2 r^2 / 2 and stays finite where the weight underflows.
void write_weights_csv(std::ostream& os, const Dataset& data, const FitReport& r);

} // namespace l2e
