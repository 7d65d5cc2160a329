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

#ifndef PUBCAST_CORPUS_HPP_
#define PUBCAST_CORPUS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pubcast {

// Recoverable input problems (bad CSV field, malformed XML, unreadable
// file). The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kMinYear = 1900;
constexpr int kMaxYear = 2100;

// One (author, publication) incidence. A paper with k authors appears as
// k records, one per author.
struct PublicationRecord {
  std::string author_id;
  int year = 0;

  friend bool operator==(const PublicationRecord&, const PublicationRecord&) = default;
};

// Cumulative publication counts of one author: counts[t - base_year] is
// the number of publications in years [base_year, t]. Non-decreasing.
struct AuthorSeries {
  std::string author_id;
  int base_year = 0;
  std::vector<std::int64_t> counts;

  int last_year() const { return base_year + static_cast<int>(counts.size()) - 1; }

  // Cumulative count at `year`; 0 before base_year. Querying past the end
  // of the series is a logic error (the future is not a constant).
  std::int64_t at(int year) const {
    if (year < base_year) return 0;
    if (year > last_year()) {
      throw std::out_of_range("AuthorSeries::at: year beyond series end");
    }
    return counts[static_cast<std::size_t>(year - base_year)];
  }
};

using SeriesMap = std::map<std::string, AuthorSeries>;

// Cohort selection plus the train/test year structure around it:
// train on [t0, t1], evaluate on (t1, t2], keep authors active in
// activity_year.
struct CohortSpec {
  int activity_year = 2000;
  int t0 = 1951;
  int t1 = 2013;
  int t2 = 2018;

  bool valid() const {
    return t0 < activity_year && activity_year <= t1 && t1 < t2;
  }
};

// One supervised example for the recurrent predictor: `input` holds the
// cumulative counts of `window_length` consecutive years, `target` the
// count of the year being predicted.
struct WindowSample {
  std::string author_id;
  Eigen::VectorXd input;
  double target = 0.0;
};

enum class RecordFormat { kCsv, kDblpXml };

struct ParseStats {
  std::size_t records = 0;
  std::size_t rejected_year = 0;  // year outside [kMinYear, kMaxYear]
};

// Reads `author_id,year` CSV (optional header) or a dblp XML stream.
// Malformed input throws InputError with a line number; records with an
// out-of-range year are dropped and counted in `stats`.
std::vector<PublicationRecord> parse_records(std::istream& in, RecordFormat format,
                                             ParseStats* stats = nullptr);

void write_records_csv(std::ostream& out, const std::vector<PublicationRecord>& records);

struct BuildStats {
  std::size_t dropped_before_t0 = 0;
  std::size_t dropped_after_end = 0;
};

// Cumulative series per author over [t0, t_end]. Records outside the
// span are dropped (counted in `stats`), never an error.
SeriesMap build_series(const std::vector<PublicationRecord>& records, int t0,
                       int t_end, BuildStats* stats = nullptr);

// Authors with at least one publication in spec.activity_year. An empty
// cohort is legal; a warning is printed to stderr.
std::vector<std::string> select_cohort(const SeriesMap& series, const CohortSpec& spec);

// Training windows: input years [last_input_year - window_length + 1,
// last_input_year], target h(target_year). Years before the series base
// contribute 0 (the cumulative count before first activity). Authors
// whose series ends before target_year are skipped and counted.
std::vector<WindowSample> make_windows(const SeriesMap& series,
                                       const std::vector<std::string>& cohort,
                                       int last_input_year, int window_length,
                                       int target_year,
                                       std::size_t* skipped = nullptr);

// Input window for one author (no target); same padding rule.
Eigen::VectorXd input_window(const AuthorSeries& series, int last_input_year,
                             int window_length);

// Synthetic corpus: each author draws a latent rate uniform in
// [rate_min, rate_max]; the annual publication count is
// Poisson(rate * (1 + h)^exponent) with h the cumulative count so far.
// With force_active_year != 0, every author gets at least one
// publication in that year, so cohort sizes can be planted exactly.
struct SynthConfig {
  std::int64_t n_authors = 100;
  int first_year = 1984;
  int last_year = 2013;
  double rate_min = 0.1;
  double rate_max = 0.1;
  double exponent = 0.0;
  int force_active_year = 0;
};

std::vector<PublicationRecord> synth_corpus(const SynthConfig& config,
                                            std::uint64_t seed);

// Series cache: `author_id,year,cumulative_count` rows sorted by
// (author_id, year), one row per year of each series.
void write_series_cache(std::ostream& out, const SeriesMap& series);
SeriesMap read_series_cache(std::istream& in);

}  // namespace pubcast

#endif  // PUBCAST_CORPUS_HPP_
