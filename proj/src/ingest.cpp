#include "aec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "aec/error.hpp"

namespace aec {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

// Splits one line into numbers; throws on the first non-numeric token.
void parse_line(std::string_view line, std::size_t line_no, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_space(line[end])) ++end;
    std::string_view token = line.substr(pos, end - pos);
    std::string_view digits = token;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
      throw ParseError("non-numeric token '" + std::string(token) + "'", line_no);
    }
    out.push_back(value);
    pos = end;
  }
}

bool ignored_entry(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  if (name.empty() || name.front() == '.') return true;
  static const char* kSidecars[] = {".json", ".csv", ".md", ".txt"};
  const std::string ext = p.extension().string();
  return std::any_of(std::begin(kSidecars), std::end(kSidecars),
                     [&](const char* s) { return ext == s; });
}

Eigen::VectorXd take_column(const RawRecord& record, std::size_t channel, std::size_t decimation) {
  const std::size_t rows = record.row_count();
  const std::size_t kept = (rows + decimation - 1) / decimation;
  Eigen::VectorXd v(static_cast<Eigen::Index>(kept));
  for (std::size_t i = 0; i < kept; ++i) {
    v(static_cast<Eigen::Index>(i)) = record.values(static_cast<Eigen::Index>(i * decimation),
                                                    static_cast<Eigen::Index>(channel));
  }
  return v;
}

void check_decimation(std::size_t k) {
  if (k == 0) throw ConfigError("decimation factor must be >= 1");
}

// Sorts samples by timestamp, rejects duplicates, and assigns ordinals.
void finalize_order(std::vector<Sample>& samples) {
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
    return a.meta.timestamp < b.meta.timestamp;
  });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i].meta.timestamp == samples[i - 1].meta.timestamp) {
      throw ParseError("duplicate timestamp in '" + samples[i].meta.source_name + "' and '" +
                       samples[i - 1].meta.source_name + "'");
    }
    samples[i].meta.ordinal = i;
  }
  if (!samples.empty()) {
    const auto len = samples.front().values.size();
    for (const auto& s : samples) {
      if (s.values.size() != len) {
        throw DimensionError("record '" + s.meta.source_name + "' has " +
                             std::to_string(s.values.size()) + " points, expected " +
                             std::to_string(len));
      }
    }
  }
}

}  // namespace

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::none: return "none";
    case ScalingMode::global_minmax: return "global-minmax";
    case ScalingMode::per_sample_minmax: return "per-sample-minmax";
  }
  return "none";
}

ScalingMode scaling_mode_from_string(std::string_view text) {
  if (text == "none") return ScalingMode::none;
  if (text == "global-minmax") return ScalingMode::global_minmax;
  if (text == "per-sample-minmax") return ScalingMode::per_sample_minmax;
  throw ConfigError("unknown scaling mode '" + std::string(text) + "'");
}

Eigen::MatrixXd SampleCatalog::rows(std::size_t first, std::size_t count) const {
  if (first + count > samples.size()) throw DimensionError("catalog row range out of bounds");
  const auto len = static_cast<Eigen::Index>(sample_length());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(count), len);
  for (std::size_t i = 0; i < count; ++i) {
    m.row(static_cast<Eigen::Index>(i)) = samples[first + i].values.transpose();
  }
  return m;
}

RawRecord parse_record(std::istream& in, std::size_t expected_rows) {
  std::vector<double> data;
  std::vector<double> row;
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    parse_line(line, line_no, row);
    if (row.empty()) continue;
    if (rows == 0) {
      columns = row.size();
    } else if (row.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " columns, found " +
                           std::to_string(row.size()),
                       line_no);
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows != expected_rows) {
    throw ParseError("row count " + std::to_string(rows) + " != expected " +
                         std::to_string(expected_rows),
                     rows > expected_rows ? line_no : 0);
  }
  RawRecord record;
  record.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(
      data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns));
  return record;
}

RawRecord parse_record_text(std::string_view text, std::size_t expected_rows) {
  std::istringstream in{std::string(text)};
  return parse_record(in, expected_rows);
}

RawRecord read_record_file(const std::filesystem::path& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open record file " + path.string());
  try {
    return parse_record(in, expected_rows);
  } catch (const ParseError& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

std::string serialize_record(const RawRecord& record) {
  std::string out;
  char buf[32];
  for (Eigen::Index r = 0; r < record.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < record.values.cols(); ++c) {
      if (c) out.push_back('\t');
      auto res = std::to_chars(buf, buf + sizeof buf, record.values(r, c));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

void write_record_file(const std::filesystem::path& path, const RawRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write record file " + path.string());
  out << serialize_record(record);
  if (!out) throw IoError("write failed for " + path.string());
}

std::chrono::sys_seconds parse_timestamp(std::string_view name, const std::string& format) {
  std::tm tm{};
  std::istringstream in{std::string(name)};
  in >> std::get_time(&tm, format.c_str());
  if (in.fail() || in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("unparseable timestamp in filename '" + std::string(name) + "'");
  }
  const std::time_t t = timegm(&tm);
  return std::chrono::sys_seconds{std::chrono::seconds{t}};
}

std::string format_timestamp(std::chrono::sys_seconds ts, const std::string& format) {
  const std::time_t t = static_cast<std::time_t>(ts.time_since_epoch().count());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  const std::size_t n = std::strftime(buf, sizeof buf, format.c_str(), &tm);
  return std::string(buf, n);
}

SampleCatalog build_catalog(std::span<const NamedRecord> files, const std::string& bearing_id,
                            std::size_t channel, const CatalogOptions& options) {
  check_decimation(options.decimation);
  SampleCatalog catalog;
  catalog.bearing_id = bearing_id;
  catalog.channel = channel;
  catalog.decimation = options.decimation;
  catalog.samples.reserve(files.size());
  for (const auto& file : files) {
    if (channel >= file.record.channel_count()) {
      throw ConfigError("channel " + std::to_string(channel) + " out of range for '" + file.name +
                        "' with " + std::to_string(file.record.channel_count()) + " channels");
    }
    Sample s;
    s.meta.timestamp = parse_timestamp(file.name, options.timestamp_format);
    s.meta.source_name = file.name;
    s.values = take_column(file.record, channel, options.decimation);
    catalog.samples.push_back(std::move(s));
  }
  finalize_order(catalog.samples);
  return catalog;
}

SampleCatalog load_catalog_dir(const std::filesystem::path& dir, const std::string& bearing_id,
                               std::size_t channel, const CatalogOptions& options,
                               std::size_t expected_rows) {
  check_decimation(options.decimation);
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && !ignored_entry(entry.path())) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  SampleCatalog catalog;
  catalog.bearing_id = bearing_id;
  catalog.channel = channel;
  catalog.decimation = options.decimation;
  catalog.samples.reserve(paths.size());
  for (const auto& path : paths) {
    const std::string name = path.filename().string();
    Sample s;
    s.meta.timestamp = parse_timestamp(name, options.timestamp_format);
    s.meta.source_name = name;
    const RawRecord record = read_record_file(path, expected_rows);
    if (channel >= record.channel_count()) {
      throw ConfigError("channel " + std::to_string(channel) + " out of range for '" + name +
                        "' with " + std::to_string(record.channel_count()) + " channels");
    }
    s.values = take_column(record, channel, options.decimation);
    catalog.samples.push_back(std::move(s));
  }
  if (catalog.samples.empty()) throw IoError("no record files in " + dir.string());
  finalize_order(catalog.samples);
  return catalog;
}

SampleCatalog decimate(const SampleCatalog& catalog, std::size_t factor) {
  check_decimation(factor);
  SampleCatalog out = catalog;
  if (factor == 1) return out;
  for (auto& s : out.samples) {
    const auto kept = (static_cast<std::size_t>(s.values.size()) + factor - 1) / factor;
    Eigen::VectorXd v(static_cast<Eigen::Index>(kept));
    for (std::size_t i = 0; i < kept; ++i) {
      v(static_cast<Eigen::Index>(i)) = s.values(static_cast<Eigen::Index>(i * factor));
    }
    s.values = std::move(v);
  }
  out.decimation = catalog.decimation * factor;
  return out;
}

BearingId parse_bearing_id(std::string_view label) {
  BearingId id;
  char s = 0, b = 0;
  int consumed = 0;
  const std::string text(label);
  if (std::sscanf(text.c_str(), "%c%d%c%d%n", &s, &id.test, &b, &id.bearing, &consumed) != 4 ||
      consumed != static_cast<int>(text.size()) || (s != 'S' && s != 's') ||
      (b != 'B' && b != 'b') || id.test < 1 || id.bearing < 1) {
    throw ConfigError("bearing id '" + text + "' is not of the form S<test>B<bearing>");
  }
  return id;
}

std::size_t channel_for(std::size_t channel_count, int bearing, int sensor) {
  if (bearing < 1) throw ConfigError("bearing numbers are 1-based");
  if (channel_count == 8) {
    if (sensor < 1 || sensor > 2) throw ConfigError("eight-channel records carry sensors 1 and 2");
    return static_cast<std::size_t>(2 * bearing - 2 + (sensor - 1));
  }
  if (sensor != 1) throw ConfigError("records with one sensor per bearing only have sensor 1");
  const auto ch = static_cast<std::size_t>(bearing - 1);
  if (ch >= channel_count) {
    throw ConfigError("bearing " + std::to_string(bearing) + " has no column in a " +
                      std::to_string(channel_count) + "-channel record");
  }
  return ch;
}

SampleCatalog scale_catalog(const SampleCatalog& catalog, ScalingMode mode, std::size_t fit_count) {
  if (catalog.empty()) throw ConfigError("cannot scale an empty catalog");
  if (fit_count == 0 || fit_count > catalog.size()) fit_count = catalog.size();
  SampleCatalog out = catalog;
  if (mode == ScalingMode::none) {
    out.scaling = ScalingInfo{};
    return out;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < fit_count; ++i) {
    const auto& v = catalog.samples[i].values;
    if (!v.allFinite()) throw NumericalError("non-finite entry in sample " + std::to_string(i));
    lo = std::min(lo, v.minCoeff());
    hi = std::max(hi, v.maxCoeff());
  }
  if (!(hi > lo)) throw NumericalError("cannot min-max scale a constant dataset");

  out.scaling = ScalingInfo{mode, lo, hi, fit_count};
  if (mode == ScalingMode::global_minmax) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto& v = out.samples[i].values;
      v = (v.array() - lo) / span;
      if (i >= fit_count) v = v.cwiseMax(0.0).cwiseMin(1.0);
    }
  } else {
    out.scaling.fit_count = out.size();
    for (auto& s : out.samples) {
      const double a = s.values.minCoeff();
      const double b = s.values.maxCoeff();
      if (!(b > a)) {
        throw NumericalError("sample " + std::to_string(s.meta.ordinal) +
                             " is constant and cannot be min-max scaled");
      }
      s.values = (s.values.array() - a) / (b - a);
    }
  }
  return out;
}

SampleCatalog unscale_catalog(const SampleCatalog& catalog) {
  SampleCatalog out = catalog;
  switch (catalog.scaling.mode) {
    case ScalingMode::none: return out;
    case ScalingMode::per_sample_minmax:
      throw ConfigError("per-sample scaling does not retain per-sample bounds");
    case ScalingMode::global_minmax: break;
  }
  const double span = catalog.scaling.max - catalog.scaling.min;
  for (auto& s : out.samples) s.values = s.values.array() * span + catalog.scaling.min;
  out.scaling = ScalingInfo{};
  return out;
}

std::vector<std::filesystem::path> write_catalog_records(const SampleCatalog& catalog,
                                                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.reserve(catalog.size());
  for (const auto& s : catalog.samples) {
    const auto path = dir / s.meta.source_name;
    write_record_file(path, RawRecord{s.values});
    written.push_back(path);
  }
  return written;
}

nlohmann::json catalog_index(const SampleCatalog& catalog) {
  nlohmann::json names = nlohmann::json::array();
  for (const auto& s : catalog.samples) names.push_back(s.meta.source_name);
  nlohmann::json j{
      {"bearing_id", catalog.bearing_id},
      {"channel", catalog.channel},
      {"N", catalog.size()},
      {"sample_length", catalog.sample_length()},
      {"decimation", catalog.decimation},
      {"scaling",
       {{"mode", to_string(catalog.scaling.mode)},
        {"min", catalog.scaling.min},
        {"max", catalog.scaling.max},
        {"fit_count", catalog.scaling.fit_count}}},
      {"sources", std::move(names)},
  };
  j["change_point"] = catalog.change_point ? nlohmann::json(*catalog.change_point) : nullptr;
  return j;
}

}  // namespace aec
