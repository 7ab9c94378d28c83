#include "svnl/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <vector>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

#include "svnl/errors.hpp"

namespace svnl {
namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_row(const std::string& line) {
  if (std::count(line.begin(), line.end(), '"') % 2 != 0) throw InputError("malformed CSV row: unbalanced quotes");
  std::vector<std::string> fields;
  try {
    Tokenizer tok(line);
    for (auto field : tok) {
      boost::algorithm::trim(field);
      fields.push_back(std::move(field));
    }
  } catch (const boost::escaped_list_error& e) {
    throw InputError(std::string("malformed CSV row: ") + e.what());
  }
  return fields;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null" || s == "NULL";
}

std::optional<double> parse_number(const std::string& s) {
  std::size_t pos = 0;
  try {
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("column '" + name + "' not found in header");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

IngestMode parse_ingest_mode(const std::string& s) {
  if (s == "prices") return IngestMode::kPrices;
  if (s == "returns") return IngestMode::kReturns;
  throw ConfigError("unknown ingest mode '" + s + "' (expected prices or returns)");
}

IngestResult ingest(std::istream& in, const IngestConfig& config) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);
  const std::size_t value_col = column_index(header, config.value_column);
  const std::optional<std::size_t> date_col =
      config.date_column.empty() ? std::nullopt : std::optional<std::size_t>(column_index(header, config.date_column));

  struct Row {
    std::string label;
    double value;
  };
  std::vector<Row> rows;
  IngestResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_row(line);
    const auto field = [&](std::size_t i) { return i < fields.size() ? fields[i] : std::string(); };
    const std::string value_text = field(value_col);
    const std::string label = date_col ? field(*date_col) : std::to_string(rows.size() + result.dropped_rows + 1);
    if (is_missing(value_text) || is_missing(label)) {
      ++result.dropped_rows;
      continue;
    }
    const auto value = parse_number(value_text);
    if (!value) throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + value_text + "'");
    if (!std::isfinite(*value)) {
      ++result.dropped_rows;
      continue;
    }
    rows.push_back({label, *value});
  }
  if (rows.size() < 3) throw InputError("fewer than 3 usable rows");

  // Order by label: numeric when every label parses as a number, else lexical (ISO dates sort correctly).
  std::vector<std::optional<double>> numeric(rows.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    numeric[i] = parse_number(rows[i].label);
    all_numeric = all_numeric && numeric[i].has_value();
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  const auto less = [&](std::size_t a, std::size_t b) {
    return all_numeric ? *numeric[a] < *numeric[b] : rows[a].label < rows[b].label;
  };
  std::stable_sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!less(order[i - 1], order[i])) throw InputError("duplicate date '" + rows[order[i]].label + "'");
  }

  ReturnSeries& s = result.series;
  if (config.mode == IngestMode::kReturns) {
    for (const std::size_t i : order) {
      s.labels.push_back(rows[i].label);
      s.y.push_back(rows[i].value);
    }
    return result;
  }
  for (const std::size_t i : order) {
    if (!(rows[i].value > 0.0)) throw InputError("non-positive price at '" + rows[i].label + "'");
  }
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Row& prev = rows[order[i - 1]];
    const Row& cur = rows[order[i]];
    s.labels.push_back(cur.label);
    s.y.push_back(config.return_scale * (std::log(cur.value) - std::log(prev.value)));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return ingest(in, config);
}

}  // namespace svnl
