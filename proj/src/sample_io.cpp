#include "qht/sample_io.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qht {

void write_samples_csv(std::ostream& out, std::span<const MeasurementRecord> records) {
  out << "y,phi\n" << std::setprecision(17);
  for (const auto& r : records) out << r.y << ',' << r.phi << '\n';
}

std::vector<MeasurementRecord> read_samples_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<MeasurementRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "y,phi") throw std::runtime_error("sample CSV line 1: expected header y,phi");
      continue;
    }
    if (line.empty()) continue;
    std::istringstream fields(line);
    MeasurementRecord r;
    char comma = 0;
    if (!(fields >> r.y >> comma >> r.phi) || comma != ',' || !(fields >> std::ws).eof() || !std::isfinite(r.y) ||
        !(r.phi >= 0.0 && r.phi <= std::numbers::pi)) {
      throw std::runtime_error("sample CSV line " + std::to_string(line_no) + ": malformed record '" + line + "'");
    }
    records.push_back(r);
  }
  if (records.empty()) throw std::runtime_error("no records");
  return records;
}

}  // namespace qht
