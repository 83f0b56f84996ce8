#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "qht/measurement.hpp"

namespace qht {

/// Header "y,phi", one record per line, 17 significant digits.
void write_samples_csv(std::ostream& out, std::span<const MeasurementRecord> records);

/// Inverse of write_samples_csv. Malformed rows raise std::runtime_error
/// naming the line; an input without records raises "no records".
std::vector<MeasurementRecord> read_samples_csv(std::istream& in);

}  // namespace qht
