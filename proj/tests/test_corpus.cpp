// Copyright 2026 The Pubcast Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "pubcast/corpus.hpp"
#include "pubcast/rng.hpp"

using namespace pubcast;

TEST_CASE("csv records: field mapping, header, rejects") {
  std::istringstream in("author_id,year\na1,2005\n b , 1999 \na1,1800\n");
  ParseStats stats;
  const auto records = parse_records(in, RecordFormat::kCsv, &stats);
  REQUIRE(records.size() == 2);
  CHECK(records[0] == PublicationRecord{"a1", 2005});
  CHECK(records[1] == PublicationRecord{"b", 1999});
  CHECK(stats.rejected_year == 1);

  std::istringstream empty("");
  CHECK(parse_records(empty, RecordFormat::kCsv).empty());

  std::istringstream no_comma("a1,2001\nbogus line\n");
  CHECK_THROWS_WITH_AS(parse_records(no_comma, RecordFormat::kCsv),
                       "line 2: expected 'author_id,year'", InputError);
  std::istringstream bad_year("a1,twenty\n");
  CHECK_THROWS_AS(parse_records(bad_year, RecordFormat::kCsv), InputError);

  // Author ids may contain commas; the year is the last field.
  std::istringstream comma_name("Smith, Jr.,2004\n");
  const auto with_comma = parse_records(comma_name, RecordFormat::kCsv);
  REQUIRE(with_comma.size() == 1);
  CHECK(with_comma[0].author_id == "Smith, Jr.");
}

TEST_CASE("csv parse is the inverse of serialize on canonical records") {
  std::vector<PublicationRecord> records;
  RngStream rng(99);
  for (int i = 0; i < 500; ++i) {
    records.push_back({"author-" + std::to_string(rng.next_u64() % 50),
                       1950 + static_cast<int>(rng.next_u64() % 70)});
  }
  std::ostringstream out;
  write_records_csv(out, records);
  std::istringstream in(out.str());
  CHECK(parse_records(in, RecordFormat::kCsv) == records);
}

TEST_CASE("dblp fixture: 10 publications, two coauthored, 12 records") {
  std::ifstream in(std::string(PUBCAST_FIXTURE_DIR) + "/dblp_sample.xml");
  REQUIRE(in);
  ParseStats stats;
  const auto records = parse_records(in, RecordFormat::kDblpXml, &stats);
  CHECK(records.size() == 12);
  CHECK(stats.rejected_year == 0);

  std::size_t ada = 0;
  for (const auto& r : records) {
    if (r.author_id == "Ada Alpha") ++ada;
  }
  CHECK(ada == 3);
  // Entity decoding keeps author ids consistent.
  bool carla_2003 = false;
  for (const auto& r : records) {
    carla_2003 |= r == PublicationRecord{"Carla Gamma", 2003};
  }
  CHECK(carla_2003);
}

TEST_CASE("dblp parser survives markup in attribute values") {
  std::istringstream in(
      "<dblp><article key=\"a>b\" note='x<y'>"
      "<author>A. Uthor</author><year>2004</year></article></dblp>");
  const auto records = parse_records(in, RecordFormat::kDblpXml);
  REQUIRE(records.size() == 1);
  CHECK(records[0] == PublicationRecord{"A. Uthor", 2004});
}

TEST_CASE("dblp parser reports malformed input with a line number") {
  std::istringstream mismatch("<dblp><article><author>A</author></book></dblp>");
  CHECK_THROWS_AS(parse_records(mismatch, RecordFormat::kDblpXml), InputError);
  std::istringstream bad_year(
      "<dblp><article><author>A</author><year>MMXX</year></article></dblp>");
  CHECK_THROWS_AS(parse_records(bad_year, RecordFormat::kDblpXml), InputError);
  // A publication without a year is rejected, not fatal.
  std::istringstream no_year("<dblp><article><author>A</author></article></dblp>");
  ParseStats stats;
  CHECK(parse_records(no_year, RecordFormat::kDblpXml, &stats).empty());
  CHECK(stats.rejected_year == 1);
}

TEST_CASE("build_series cumulative counting") {
  const std::vector<PublicationRecord> records = {
      {"s", 1995}, {"s", 1995}, {"s", 1997}, {"early", 1940}, {"late", 2050}};
  BuildStats stats;
  const SeriesMap series = build_series(records, 1951, 2000, &stats);
  REQUIRE(series.size() == 1);
  const AuthorSeries& s = series.at("s");
  CHECK(s.at(1994) == 0);
  CHECK(s.at(1995) == 2);
  CHECK(s.at(1996) == 2);
  CHECK(s.at(1997) == 3);
  CHECK(s.at(2000) == 3);
  CHECK(s.at(1900) == 0);  // before the base year
  CHECK(stats.dropped_before_t0 == 1);
  CHECK(stats.dropped_after_end == 1);
  CHECK_THROWS_AS(s.at(2001), std::out_of_range);
}

TEST_CASE("series invariants on a random corpus") {
  SynthConfig synth;
  synth.n_authors = 60;
  synth.first_year = 1990;
  synth.last_year = 2010;
  synth.rate_min = 0.1;
  synth.rate_max = 1.5;
  synth.exponent = 0.3;
  const auto records = synth_corpus(synth, 7);
  const SeriesMap series = build_series(records, 1990, 2010);

  std::int64_t total = 0;
  for (const auto& [author, s] : series) {
    for (std::size_t i = 1; i < s.counts.size(); ++i) {
      CHECK(s.counts[i] >= s.counts[i - 1]);
    }
    CHECK(s.counts.front() >= 0);
    total += s.counts.back();
  }
  CHECK(total == static_cast<std::int64_t>(records.size()));
}

TEST_CASE("select_cohort activity rule") {
  const std::vector<PublicationRecord> records = {
      {"only99", 1999}, {"both", 2000}, {"both", 2005}, {"early", 1995}};
  const SeriesMap series = build_series(records, 1951, 2010);
  CohortSpec spec;
  spec.activity_year = 2000;
  spec.t0 = 1951;
  spec.t1 = 2005;
  spec.t2 = 2010;
  const auto cohort = select_cohort(series, spec);
  REQUIRE(cohort.size() == 1);
  CHECK(cohort[0] == "both");

  CohortSpec bad = spec;
  bad.activity_year = 1900;
  CHECK_THROWS_AS(select_cohort(series, bad), std::invalid_argument);
}

TEST_CASE("make_windows: targets, padding, round trip") {
  const std::vector<PublicationRecord> records = {{"c", 1996}, {"c", 1998},
                                                  {"c", 2001}};
  const SeriesMap series = build_series(records, 1990, 2001);
  const auto samples = make_windows(series, {"c"}, 2000, 12, 2001);
  REQUIRE(samples.size() == 1);
  const WindowSample& w = samples[0];
  REQUIRE(w.input.size() == 12);
  // Window start 1989 precedes the base year; zero-padded on the left.
  CHECK(w.input[0] == 0.0);   // 1989
  CHECK(w.input[6] == 0.0);   // 1995
  CHECK(w.input[7] == 1.0);   // 1996
  CHECK(w.input[9] == 2.0);   // 1998
  CHECK(w.input[11] == 2.0);  // 2000 == h(last_input_year)
  CHECK(w.input[11] == static_cast<double>(series.at("c").at(2000)));
  CHECK(w.target == 3.0);

  // Non-decreasing window property.
  for (int k = 1; k < 12; ++k) CHECK(w.input[k] >= w.input[k - 1]);

  // Constant series: all inputs equal the target.
  const SeriesMap flat = build_series({{"f", 1980}, {"f", 1980}, {"f", 1980}},
                                      1979, 2001);
  const auto flat_samples = make_windows(flat, {"f"}, 2000, 12, 2001);
  REQUIRE(flat_samples.size() == 1);
  CHECK(flat_samples[0].input.minCoeff() == 3.0);
  CHECK(flat_samples[0].input.maxCoeff() == 3.0);
  CHECK(flat_samples[0].target == 3.0);

  // Missing target year: skipped and counted.
  std::size_t skipped = 0;
  CHECK(make_windows(series, {"c"}, 2000, 12, 2005, &skipped).empty());
  CHECK(skipped == 1);
}

TEST_CASE("synth corpus: determinism, planted cohort, rate law") {
  SynthConfig config;
  config.n_authors = 0;
  CHECK(synth_corpus(config, 1).empty());

  config.n_authors = 37;
  config.first_year = 1990;
  config.last_year = 2005;
  config.rate_min = 0.2;
  config.rate_max = 0.6;
  config.force_active_year = 2000;
  const auto records = synth_corpus(config, 5);
  const SeriesMap series = build_series(records, 1990, 2005);
  CohortSpec spec;
  spec.activity_year = 2000;
  spec.t0 = 1990;
  spec.t1 = 2003;
  spec.t2 = 2005;
  CHECK(select_cohort(series, spec).size() == 37);

  // Byte-identical serialization across runs of the same seed.
  std::ostringstream once, twice;
  write_records_csv(once, synth_corpus(config, 5));
  write_records_csv(twice, synth_corpus(config, 5));
  CHECK(once.str() == twice.str());
  std::ostringstream other_seed;
  write_records_csv(other_seed, synth_corpus(config, 6));
  CHECK(once.str() != other_seed.str());

  // Poisson(rate) law at exponent 0: long-run mean within 5%.
  SynthConfig law;
  law.n_authors = 1;
  law.first_year = 1001;
  law.last_year = 2000;
  law.rate_min = 2.0;
  law.rate_max = 2.0;
  law.exponent = 0.0;
  const auto draws = synth_corpus(law, 11);
  CHECK(static_cast<double>(draws.size()) / 1000.0 ==
        doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("series cache round trip") {
  SynthConfig synth;
  synth.n_authors = 25;
  synth.first_year = 1995;
  synth.last_year = 2010;
  synth.rate_min = 0.3;
  synth.rate_max = 1.0;
  const SeriesMap series = build_series(synth_corpus(synth, 3), 1995, 2010);
  std::ostringstream out;
  write_series_cache(out, series);
  std::istringstream in(out.str());
  const SeriesMap loaded = read_series_cache(in);
  REQUIRE(loaded.size() == series.size());
  for (const auto& [author, s] : series) {
    const AuthorSeries& l = loaded.at(author);
    CHECK(l.base_year == s.base_year);
    CHECK(l.counts == s.counts);
  }

  std::istringstream decreasing("a,2000,5\na,2001,4\n");
  CHECK_THROWS_AS(read_series_cache(decreasing), InputError);
  std::istringstream gap("a,2000,1\na,2003,2\n");
  CHECK_THROWS_AS(read_series_cache(gap), InputError);
}
