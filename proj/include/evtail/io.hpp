#pragma once

#include <istream>
#include <string>

#include "evtail/series.hpp"

namespace evtail {

enum class CsvFormat {
  Auto,          // decide from the column count of the first data row
  SingleColumn,  // one value per row
  TimeValue,     // time_ms,value per row; times must be strictly increasing
};

struct IngestOptions {
  CsvFormat format = CsvFormat::Auto;
  Unit unit = Unit::Dimensionless;
  double interval_ms = 1.0;  // single-column input; two-column derives it
};

// Streaming CSV reader.  Blank lines and '#' comments are skipped; a first
// row whose cells are all non-numeric and contain letters is treated as a
// header.  Any other malformed row raises ParseError citing its line number.
// Two-column input sets the series interval to the mean time step.
TimeSeries ingest(const std::string& path, const IngestOptions& options = {});

// Same parser over an already-open stream; `name` labels errors.
TimeSeries ingest_stream(std::istream& in, const std::string& name,
                         const IngestOptions& options = {});

// Writes to a temporary file in the target directory and renames it over
// `path`, so readers never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

// Series serialization used by the simulate and decluster subcommands:
// a single value column, '\n' line endings, shortest round-trip doubles.
std::string to_csv(std::span<const double> values);

}  // namespace evtail
