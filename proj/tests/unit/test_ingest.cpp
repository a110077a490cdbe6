#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "aec/error.hpp"
#include "aec/ingest.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "tmpdir.hpp"

using namespace aec;

namespace {

RawRecord record_of(std::initializer_list<std::initializer_list<double>> rows) {
  RawRecord r;
  r.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) r.values(i, j++) = v;
    ++i;
  }
  return r;
}

SampleCatalog catalog_of(const std::vector<std::vector<double>>& rows) {
  SampleCatalog c;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Sample s;
    s.meta.ordinal = i;
    s.values = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), static_cast<Eigen::Index>(rows[i].size()));
    c.samples.push_back(s);
  }
  return c;
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse_record reads whitespace columns") {
  const RawRecord r = parse_record_text("1 2\n3 4\n5 6", 3);
  REQUIRE(r.row_count() == 3);
  REQUIRE(r.channel_count() == 2);
  CHECK(r.values(0, 0) == 1);
  CHECK(r.values(0, 1) == 2);
  CHECK(r.values(1, 0) == 3);
  CHECK(r.values(1, 1) == 4);
  CHECK(r.values(2, 0) == 5);
  CHECK(r.values(2, 1) == 6);

  const RawRecord tabs = parse_record_text("-0.022\t0.044\r\n+1e-3  \t-2.5\n\n", 2);
  CHECK(tabs.values(0, 0) == doctest::Approx(-0.022));
  CHECK(tabs.values(1, 0) == doctest::Approx(1e-3));
  CHECK(tabs.values(1, 1) == -2.5);
}

TEST_CASE("parse_record errors") {
  CHECK_THROWS_AS(parse_record_text("", 3), ParseError);
  CHECK(error_of([] { parse_record_text("", 3); }).find("row count 0") != std::string::npos);

  try {
    parse_record_text("1 2\n3 x", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  try {
    parse_record_text("1 2\n3 4\n5\n", 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_record_text("1\n2\n", 3), ParseError);
}

TEST_CASE("serialize then parse is the identity") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    RawRecord r;
    r.values.resize(17 + trial, 1 + trial % 4);
    for (Eigen::Index i = 0; i < r.values.size(); ++i) r.values.data()[i] = g(rng) * std::pow(10.0, trial % 7 - 3);
    const RawRecord back = parse_record_text(serialize_record(r), r.row_count());
    REQUIRE(back.values.rows() == r.values.rows());
    REQUIRE(back.values.cols() == r.values.cols());
    CHECK((back.values - r.values).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("timestamps") {
  const auto t = parse_timestamp("2003.10.22.12.06.24");
  CHECK(format_timestamp(t) == "2003.10.22.12.06.24");
  CHECK(parse_timestamp("2003.10.22.12.16.24") - t == std::chrono::seconds(600));
  CHECK_THROWS_AS(parse_timestamp("notes.txt"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2003.10.22.12.06.24.bak"), ParseError);
}

TEST_CASE("build_catalog orders by timestamp") {
  std::vector<NamedRecord> files{{"2003.10.22.12.16.24", record_of({{2, 20}, {3, 30}})},
                                 {"2003.10.22.12.06.24", record_of({{0, 10}, {1, 11}})}};
  const SampleCatalog c = build_catalog(files, "S1B1", 0);
  REQUIRE(c.size() == 2);
  CHECK(c.samples[0].meta.source_name == "2003.10.22.12.06.24");
  CHECK(c.samples[0].values(0) == 0);
  CHECK(c.samples[1].values(1) == 3);
  CHECK(c.samples[0].meta.ordinal == 0);
  CHECK(c.samples[1].meta.ordinal == 1);

  const SampleCatalog c1 = build_catalog(files, "S1B1", 1);
  CHECK(c1.samples[0].values(1) == 11);
}

TEST_CASE("build_catalog of three records, channel 0") {
  std::vector<NamedRecord> files{{"2004.02.12.10.32.39", record_of({{1, 9}, {2, 9}})},
                                 {"2004.02.12.10.42.39", record_of({{3, 9}, {4, 9}})},
                                 {"2004.02.12.10.52.39", record_of({{5, 9}, {6, 9}})}};
  const SampleCatalog c = build_catalog(files, "S2B1", 0);
  REQUIRE(c.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.samples[i].meta.ordinal == i);
    CHECK(c.samples[i].values(0) == static_cast<double>(2 * i + 1));
    CHECK(c.samples[i].values(1) == static_cast<double>(2 * i + 2));
  }
  CHECK(c.sample_length() == 2);
  CHECK(c.rows().rows() == 3);
}

TEST_CASE("build_catalog errors") {
  std::vector<NamedRecord> four{{"2003.10.22.12.06.24", record_of({{1, 2, 3, 4}})}};
  CHECK_THROWS_AS(build_catalog(four, "S1B1", 4), ConfigError);
  CHECK_NOTHROW(build_catalog(four, "S1B1", 3));

  std::vector<NamedRecord> dup{{"2003.10.22.12.06.24", record_of({{1}})},
                               {"2003.10.22.12.06.24", record_of({{2}})}};
  CHECK_THROWS_AS(build_catalog(dup, "S1B1", 0), ParseError);

  std::vector<NamedRecord> ragged{{"2003.10.22.12.06.24", record_of({{1}, {2}})},
                                  {"2003.10.22.12.16.24", record_of({{1}, {2}, {3}})}};
  CHECK_THROWS_AS(build_catalog(ragged, "S1B1", 0), DimensionError);
}

TEST_CASE("catalog ordinals equal timestamp ranks under shuffling") {
  std::mt19937_64 rng(11);
  const auto base = parse_timestamp("2004.02.12.10.32.39");
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial);
    std::vector<long> offsets(n);
    std::uniform_int_distribution<long> gap(1, 5000);
    long t = 0;
    for (auto& o : offsets) o = (t += gap(rng));
    std::vector<NamedRecord> files;
    for (std::size_t i = 0; i < n; ++i) {
      files.push_back({format_timestamp(base + std::chrono::seconds(offsets[i])),
                       record_of({{static_cast<double>(i)}})});
    }
    std::shuffle(files.begin(), files.end(), rng);
    const SampleCatalog c = build_catalog(files, "S1B1", 0);
    for (std::size_t i = 0; i < n; ++i) {
      // The record value was its rank at construction time.
      CHECK(c.samples[i].meta.ordinal == i);
      CHECK(c.samples[i].values(0) == static_cast<double>(i));
    }
  }
}

TEST_CASE("load_catalog_dir skips non-record files") {
  const auto dir = testutil::scratch_dir("load_dir");
  std::ofstream(dir / "2003.10.22.12.16.24") << "3 30\n4 40\n";
  std::ofstream(dir / "2003.10.22.12.06.24") << "1 10\n2 20\n";
  std::ofstream(dir / "README.md") << "not a record";
  std::ofstream(dir / ".hidden") << "x";
  CatalogOptions opts;
  const SampleCatalog c = load_catalog_dir(dir, "S1B2", 1, opts, 2);
  REQUIRE(c.size() == 2);
  CHECK(c.samples[0].values(0) == 10);
  CHECK(c.samples[1].values(1) == 40);
  CHECK(c.bearing_id == "S1B2");
  CHECK(c.channel == 1);

  std::ofstream(dir / "2003.10.22.12.26.24") << "5 50\nq 60\n";
  const std::string msg = error_of([&] { load_catalog_dir(dir, "S1B2", 1, opts, 2); });
  CHECK(msg.find("2003.10.22.12.26.24") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("bearing ids and channel mapping") {
  const BearingId id = parse_bearing_id("S1B3");
  CHECK(id.test == 1);
  CHECK(id.bearing == 3);
  CHECK_THROWS_AS(parse_bearing_id("B3"), ConfigError);
  CHECK(channel_for(8, 3, 1) == 4);
  CHECK(channel_for(8, 3, 2) == 5);
  CHECK(channel_for(8, 4, 1) == 6);
  CHECK(channel_for(4, 1) == 0);
  CHECK(channel_for(4, 3) == 2);
  CHECK_THROWS_AS(channel_for(4, 5), ConfigError);
  CHECK_THROWS_AS(channel_for(4, 1, 2), ConfigError);
}

TEST_CASE("decimation keeps every k-th point") {
  SampleCatalog c = catalog_of({{0, 1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12, 13}});
  const SampleCatalog d = decimate(c, 3);
  REQUIRE(d.sample_length() == 3);
  CHECK(d.samples[0].values(1) == 3);
  CHECK(d.samples[1].values(2) == 13);
  CHECK(d.decimation == 3);
  CHECK(d.size() == c.size());
  CHECK_THROWS_AS(decimate(c, 0), ConfigError);
}

TEST_CASE("global min-max scaling examples") {
  const SampleCatalog c = catalog_of({{-5, 0}, {5, 2.5}});
  const SampleCatalog s = scale_catalog(c, ScalingMode::global_minmax);
  CHECK(s.samples[0].values(0) == 0.0);
  CHECK(s.samples[1].values(0) == 1.0);
  CHECK(s.samples[0].values(1) == 0.5);
  CHECK(s.scaling.mode == ScalingMode::global_minmax);
  CHECK(s.scaling.min == -5);
  CHECK(s.scaling.max == 5);

  const SampleCatalog two = scale_catalog(catalog_of({{0, 1}, {1, 2}}), ScalingMode::global_minmax);
  CHECK(two.samples[0].values(0) == 0.0);
  CHECK(two.samples[0].values(1) == 0.5);
  CHECK(two.samples[1].values(0) == 0.5);
  CHECK(two.samples[1].values(1) == 1.0);

  const SampleCatalog none = scale_catalog(c, ScalingMode::none);
  CHECK(none.scaling.mode == ScalingMode::none);
  CHECK(none.samples[0].values == c.samples[0].values);
  CHECK(none.samples[1].values == c.samples[1].values);

  CHECK_THROWS_AS(scale_catalog(catalog_of({{2, 2}, {2, 2}}), ScalingMode::global_minmax),
                  NumericalError);
}

TEST_CASE("scaling fitted on a prefix clips the rest") {
  const SampleCatalog s = scale_catalog(catalog_of({{0, 1}, {1, 2}, {-3, 9}}), ScalingMode::global_minmax, 2);
  CHECK(s.scaling.fit_count == 2);
  CHECK(s.samples[2].values(0) == 0.0);
  CHECK(s.samples[2].values(1) == 1.0);
}

TEST_CASE("per-sample scaling") {
  const SampleCatalog s = scale_catalog(catalog_of({{1, 3, 2}, {10, 0, 5}}), ScalingMode::per_sample_minmax);
  CHECK(s.samples[0].values(2) == 0.5);
  CHECK(s.samples[1].values(0) == 1.0);
  CHECK(s.samples[1].values(2) == 0.5);
}

TEST_CASE("scaling invariants over random catalogs") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> rows(2 + trial % 7, std::vector<double>(5 + trial % 11));
    const double shift = 10.0 * g(rng);
    const double scale = std::exp(2.0 * g(rng));
    for (auto& row : rows) {
      for (auto& v : row) v = shift + scale * g(rng);
    }
    const SampleCatalog c = catalog_of(rows);
    const SampleCatalog s = scale_catalog(c, ScalingMode::global_minmax);
    const Eigen::MatrixXd m = s.rows();
    CHECK(std::fabs(m.minCoeff()) <= 1e-12);
    CHECK(std::fabs(m.maxCoeff() - 1.0) <= 1e-12);
    const SampleCatalog back = unscale_catalog(s);
    CHECK((back.rows() - c.rows()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, std::fabs(shift) + scale));
  }
}

TEST_CASE("generator is deterministic") {
  const SampleCatalog a = synth_run_to_failure(20, 256, 10, 0.02, 5);
  const SampleCatalog b = synth_run_to_failure(20, 256, 10, 0.02, 5);
  const SampleCatalog other = synth_run_to_failure(20, 256, 10, 0.02, 6);
  REQUIRE(a.size() == 20);
  CHECK(a.sample_length() == 256);
  CHECK(a.change_point == std::optional<std::size_t>(10));
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    identical = identical && a.samples[i].values == b.samples[i].values &&
                a.samples[i].meta.timestamp == b.samples[i].meta.timestamp;
  }
  CHECK(identical);
  CHECK(a.samples[3].values != other.samples[3].values);
  CHECK(a.samples[1].meta.timestamp - a.samples[0].meta.timestamp == std::chrono::seconds(600));
}

TEST_CASE("generator RMS rises after the change point") {
  const SampleCatalog c = synth_run_to_failure(200, 4096, 120, 0.02, 1);
  oracle::Vec r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    r[i] = oracle::rms({c.samples[i].values.data(), c.samples[i].values.data() + c.sample_length()});
  }
  const auto mean = [&](std::size_t lo, std::size_t hi) {
    return std::accumulate(r.begin() + static_cast<long>(lo), r.begin() + static_cast<long>(hi), 0.0) /
           static_cast<double>(hi - lo);
  };
  const std::size_t k = 20;
  CHECK(mean(120 + k, 200) > mean(0, 120));
  // Increasing in expectation: successive 20-sample block means climb.
  for (std::size_t lo = 120; lo + 40 <= 200; lo += 20) CHECK(mean(lo + 20, lo + 40) > mean(lo, lo + 20));
}

TEST_CASE("generator with zero severity is stationary") {
  const SampleCatalog c = synth_run_to_failure(200, 4096, 120, 0.0, 2);
  oracle::Vec r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    r[i] = oracle::rms({c.samples[i].values.data(), c.samples[i].values.data() + c.sample_length()});
  }
  const double before = std::accumulate(r.begin(), r.begin() + 120, 0.0) / 120.0;
  const double after = std::accumulate(r.begin() + 120, r.end(), 0.0) / 80.0;
  CHECK(std::fabs(after - before) / before < 0.01);
}

TEST_CASE("generated records survive a write and reload") {
  const auto dir = testutil::scratch_dir("synth_roundtrip");
  const SampleCatalog c = synth_run_to_failure(4, 64, 2, 0.02, 9);
  const auto files = write_catalog_records(c, dir);
  CHECK(files.size() == 4);
  const SampleCatalog back = load_catalog_dir(dir, "SYNTH", 0, {}, 64);
  REQUIRE(back.size() == 4);
  CHECK((back.rows() - c.rows()).cwiseAbs().maxCoeff() <= 1e-9);
  const auto index = catalog_index(back);
  CHECK(index.at("N") == 4);
  CHECK(index.at("sources").size() == 4);
}
