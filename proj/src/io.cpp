#include "evtail/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "evtail/error.hpp"
#include "evtail/strfmt.hpp"

namespace evtail {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_double(std::string_view cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && !cell.empty();
}

bool looks_like_header(const std::vector<std::string_view>& cells) {
  bool has_alpha = false;
  for (std::string_view cell : cells) {
    double ignored;
    if (parse_double(cell, ignored)) return false;
    for (char c : cell)
      if (std::isalpha(static_cast<unsigned char>(c))) has_alpha = true;
  }
  return has_alpha;
}

}  // namespace

TimeSeries ingest_stream(std::istream& in, const std::string& name,
                         const IngestOptions& options) {
  std::vector<double> values;
  std::size_t columns = 0;  // fixed by the first data row (or the format)
  if (options.format == CsvFormat::SingleColumn) columns = 1;
  if (options.format == CsvFormat::TimeValue) columns = 2;

  bool saw_candidate_header = false;
  double prev_time = 0.0;
  double time_span = 0.0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;

    const std::vector<std::string_view> cells = split_cells(body);
    if (values.empty() && !saw_candidate_header && looks_like_header(cells)) {
      saw_candidate_header = true;
      continue;
    }
    if (columns == 0) {
      if (cells.size() != 1 && cells.size() != 2)
        throw ParseError(strformat("%s: line %zu: expected 1 or 2 columns, got %zu",
                                   name.c_str(), line_no, cells.size()));
      columns = cells.size();
    }
    if (cells.size() != columns)
      throw ParseError(strformat("%s: line %zu: expected %zu column%s, got %zu",
                                 name.c_str(), line_no, columns,
                                 columns == 1 ? "" : "s", cells.size()));

    double parsed[2] = {0.0, 0.0};
    for (std::size_t c = 0; c < columns; ++c) {
      if (!parse_double(cells[c], parsed[c]))
        throw ParseError(strformat("%s: line %zu: '%.*s' is not a number",
                                   name.c_str(), line_no,
                                   static_cast<int>(cells[c].size()), cells[c].data()));
      if (!std::isfinite(parsed[c]))
        throw ParseError(strformat("%s: line %zu: non-finite value", name.c_str(), line_no));
    }
    if (columns == 2) {
      if (!values.empty() && !(parsed[0] > prev_time))
        throw ParseError(strformat("%s: line %zu: time %g does not increase past %g",
                                   name.c_str(), line_no, parsed[0], prev_time));
      if (values.empty()) time_span = -parsed[0];
      prev_time = parsed[0];
      values.push_back(parsed[1]);
    } else {
      values.push_back(parsed[0]);
    }
  }
  if (in.bad()) throw IoError(strformat("%s: read failed", name.c_str()));
  if (values.empty()) throw ParseError(strformat("%s: no data rows", name.c_str()));

  double interval = options.interval_ms;
  if (columns == 2 && values.size() > 1) {
    time_span += prev_time;  // last time minus first time
    interval = time_span / static_cast<double>(values.size() - 1);
  }
  return TimeSeries(std::move(values), interval, options.unit);
}

TimeSeries ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError(strformat("%s: cannot open for reading", path.c_str()));
  return ingest_stream(in, path, options);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = strformat("%s.tmp%ld", path.c_str(), static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(strformat("%s: cannot open for writing", tmp.c_str()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError(strformat("%s: write failed", tmp.c_str()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError(strformat("%s: rename failed: %s", path.c_str(), ec.message().c_str()));
  }
}

std::string to_csv(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 12);
  char buf[64];
  for (double v : values) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
    out.push_back('\n');
  }
  return out;
}

}  // namespace evtail
