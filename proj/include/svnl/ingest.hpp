#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>

#include "svnl/model.hpp"

namespace svnl {

enum class IngestMode { kPrices, kReturns };

IngestMode parse_ingest_mode(const std::string& s);

struct IngestConfig {
  /// Empty: rows are labelled 1..n in file order.
  std::string date_column = "date";
  std::string value_column = "close";
  IngestMode mode = IngestMode::kPrices;
  /// Prices mode: y_t = scale * (log p_t - log p_{t-1}).
  double return_scale = 100.0;
};

struct IngestResult {
  ReturnSeries series;
  std::size_t dropped_rows = 0;  // rows with a missing date or value
};

/// Reads a comma-separated file with a header row. Rows with missing fields
/// (empty, NA, NaN, null) are dropped and counted; rows are ordered by the
/// date column (numerically if every label is a number, else lexically).
/// Throws InputError for unreadable files, unparseable numbers, duplicate
/// dates, non-positive prices or fewer than 3 usable rows.
IngestResult ingest(const std::filesystem::path& path, const IngestConfig& config);
IngestResult ingest(std::istream& in, const IngestConfig& config);

}  // namespace svnl
