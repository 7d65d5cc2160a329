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

#include "pubcast/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "pubcast/stochastic.hpp"

namespace pubcast {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool parse_int(std::string_view s, int& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

// ---------------------------------------------------------------------------
// CSV records

std::vector<PublicationRecord> parse_csv(std::istream& in, ParseStats* stats) {
  std::vector<PublicationRecord> records;
  std::string raw;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (first && line == "author_id,year") {
      first = false;
      continue;
    }
    first = false;
    // Split on the last comma: author ids are opaque and may contain commas.
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) fail_line(lineno, "expected 'author_id,year'");
    std::string author = trim(line.substr(0, comma));
    std::string year_text = trim(line.substr(comma + 1));
    int year = 0;
    if (author.empty()) fail_line(lineno, "empty author_id");
    if (!parse_int(year_text, year)) fail_line(lineno, "bad year '" + year_text + "'");
    if (year < kMinYear || year > kMaxYear) {
      if (stats) ++stats->rejected_year;
      continue;
    }
    records.push_back({std::move(author), year});
  }
  return records;
}

// ---------------------------------------------------------------------------
// dblp XML, streaming

const char* const kPublicationTags[] = {"article",      "inproceedings", "proceedings",
                                        "book",         "incollection",  "phdthesis",
                                        "mastersthesis"};

bool is_publication_tag(const std::string& name) {
  for (const char* tag : kPublicationTags) {
    if (name == tag) return true;
  }
  return false;
}

// Decode the five predefined XML entities. Anything else (dblp's ISO
// accents, numeric references) is kept verbatim: author ids are opaque,
// only their consistency matters.
std::string decode_entities(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i++];
      continue;
    }
    const std::size_t semi = text.find(';', i);
    const std::string ent = semi == std::string::npos
                                ? std::string()
                                : text.substr(i + 1, semi - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "apos") out += '\'';
    else if (ent == "quot") out += '"';
    else {
      out += text[i++];
      continue;
    }
    i = semi + 1;
  }
  return out;
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = !out.empty();
    } else {
      if (in_space) out += ' ';
      in_space = false;
      out += c;
    }
  }
  return out;
}

class DblpScanner {
 public:
  DblpScanner(std::istream& in, ParseStats* stats)
      : buf_(in.rdbuf()), stats_(stats) {}

  std::vector<PublicationRecord> run() {
    char c;
    while (get(c)) {
      if (c == '<') {
        handle_markup();
      } else {
        if (!capture_.empty()) capture_.back() += c;
      }
    }
    if (!stack_.empty()) {
      fail_line(line_, "unexpected end of input inside <" + stack_.back() + ">");
    }
    return std::move(records_);
  }

 private:
  // Reads through the stream buffer directly; full dumps run to
  // gigabytes and the per-character istream path is several times
  // slower.
  bool get(char& c) {
    const int ch = buf_->sbumpc();
    if (ch == std::char_traits<char>::eof()) return false;
    c = static_cast<char>(ch);
    if (c == '\n') ++line_;
    return true;
  }

  char require() {
    char c;
    if (!get(c)) fail_line(line_, "unexpected end of input in markup");
    return c;
  }

  void skip_until(const std::string& suffix) {
    std::string window;
    for (;;) {
      window += require();
      if (window.size() > suffix.size()) window.erase(0, 1);
      if (window == suffix) return;
    }
  }

  void handle_markup() {
    char c = require();
    if (c == '?') {  // processing instruction
      skip_until("?>");
      return;
    }
    if (c == '!') {  // comment, CDATA, or DOCTYPE
      std::string head;
      for (int i = 0; i < 7 && head != "--" && head != "[CDATA["; ++i) {
        const char ch = require();
        if (ch == '>') return;  // short declaration, already closed
        head += ch;
        if (head == "--") break;
      }
      if (head == "--") {
        skip_until("-->");
      } else if (head == "[CDATA[") {
        skip_until("]]>");
      } else {
        // DOCTYPE; may contain an internal subset in brackets.
        int depth = 1;
        for (char d = head.empty() ? require() : head.back();;) {
          if (d == '<') ++depth;
          if (d == '>' && --depth == 0) break;
          d = require();
        }
      }
      return;
    }
    if (c == '/') {
      std::string name;
      while ((c = require()) != '>') {
        if (!std::isspace(static_cast<unsigned char>(c))) name += c;
      }
      close_element(name);
      return;
    }
    // Opening tag: read the name, skip attributes (quote-aware, so '>'
    // inside an attribute value does not end the tag), note self-closing.
    std::string name(1, c);
    bool self_closing = false;
    bool in_name = true;
    char quote = 0;
    char prev = c;
    for (;;) {
      c = require();
      if (quote != 0) {
        if (c == quote) quote = 0;
        prev = c;
        continue;
      }
      if (c == '"' || c == '\'') {
        quote = c;
        in_name = false;
        prev = c;
        continue;
      }
      if (c == '>') break;
      if (in_name && (std::isspace(static_cast<unsigned char>(c)) || c == '/')) {
        in_name = false;
      }
      if (in_name) name += c;
      prev = c;
    }
    if (prev == '/') self_closing = true;
    open_element(name);
    if (self_closing) close_element(name);
  }

  void open_element(const std::string& name) {
    stack_.push_back(name);
    capture_.push_back(std::string());
    if (is_publication_tag(name)) {
      authors_.clear();
      year_text_.clear();
      pub_depth_ = stack_.size();
      pub_line_ = line_;
    }
  }

  void close_element(const std::string& name) {
    if (stack_.empty() || stack_.back() != name) {
      fail_line(line_, "mismatched closing tag </" + name + ">");
    }
    const std::string text = capture_.back();
    stack_.pop_back();
    capture_.pop_back();

    if (pub_depth_ > 0 && stack_.size() == pub_depth_) {
      // Direct child of the current publication element.
      if (name == "author") {
        std::string author = collapse_whitespace(decode_entities(text));
        if (author.empty()) fail_line(line_, "empty <author> element");
        authors_.push_back(std::move(author));
      } else if (name == "year") {
        year_text_ = trim(text);
      }
      return;
    }
    if (pub_depth_ > 0 && stack_.size() == pub_depth_ - 1) {
      flush_publication(name);
      pub_depth_ = 0;
    }
  }

  void flush_publication(const std::string& name) {
    if (!is_publication_tag(name)) return;
    if (year_text_.empty()) {
      // dblp carries a few records without a year; they cannot be placed
      // on the time axis, so their incidences are rejected and counted.
      if (stats_) stats_->rejected_year += authors_.size();
      return;
    }
    int year = 0;
    if (!parse_int(year_text_, year)) {
      fail_line(pub_line_, "bad <year> '" + year_text_ + "' in <" + name + ">");
    }
    if (year < kMinYear || year > kMaxYear) {
      if (stats_) stats_->rejected_year += authors_.size();
      return;
    }
    for (const std::string& author : authors_) {
      records_.push_back({author, year});
    }
  }

  std::streambuf* buf_;
  ParseStats* stats_;
  std::size_t line_ = 1;
  std::vector<std::string> stack_;
  std::vector<std::string> capture_;
  std::vector<std::string> authors_;
  std::string year_text_;
  std::size_t pub_depth_ = 0;   // stack depth of the open publication element
  std::size_t pub_line_ = 0;
  std::vector<PublicationRecord> records_;
};

}  // namespace

std::vector<PublicationRecord> parse_records(std::istream& in, RecordFormat format,
                                             ParseStats* stats) {
  std::vector<PublicationRecord> records =
      format == RecordFormat::kCsv ? parse_csv(in, stats) : DblpScanner(in, stats).run();
  if (stats) stats->records = records.size();
  return records;
}

void write_records_csv(std::ostream& out, const std::vector<PublicationRecord>& records) {
  out << "author_id,year\n";
  for (const PublicationRecord& r : records) {
    out << r.author_id << ',' << r.year << '\n';
  }
}

SeriesMap build_series(const std::vector<PublicationRecord>& records, int t0,
                       int t_end, BuildStats* stats) {
  if (t0 > t_end) throw std::invalid_argument("build_series: t0 > t_end");
  const std::size_t n_years = static_cast<std::size_t>(t_end - t0 + 1);

  std::unordered_map<std::string, std::vector<std::int64_t>> annual;
  for (const PublicationRecord& r : records) {
    if (r.year < t0) {
      if (stats) ++stats->dropped_before_t0;
      continue;
    }
    if (r.year > t_end) {
      if (stats) ++stats->dropped_after_end;
      continue;
    }
    auto [it, inserted] = annual.try_emplace(r.author_id);
    if (inserted) it->second.assign(n_years, 0);
    ++it->second[static_cast<std::size_t>(r.year - t0)];
  }

  SeriesMap out;
  for (auto& [author, years] : annual) {
    AuthorSeries series;
    series.author_id = author;
    series.base_year = t0;
    series.counts.resize(n_years);
    std::int64_t running = 0;
    for (std::size_t i = 0; i < n_years; ++i) {
      running += years[i];
      series.counts[i] = running;
    }
    out.emplace(author, std::move(series));
  }
  return out;
}

std::vector<std::string> select_cohort(const SeriesMap& series, const CohortSpec& spec) {
  if (!spec.valid()) {
    throw std::invalid_argument("cohort spec requires t0 < activity_year <= t1 < t2");
  }
  std::vector<std::string> cohort;
  for (const auto& [author, s] : series) {
    if (spec.activity_year > s.last_year()) continue;
    const std::int64_t before =
        spec.activity_year - 1 < s.base_year ? 0 : s.at(spec.activity_year - 1);
    if (s.at(spec.activity_year) - before >= 1) cohort.push_back(author);
  }
  if (cohort.empty()) {
    std::cerr << "warning: cohort for activity year " << spec.activity_year
              << " is empty\n";
  }
  return cohort;
}

Eigen::VectorXd input_window(const AuthorSeries& series, int last_input_year,
                             int window_length) {
  if (last_input_year > series.last_year()) {
    throw std::out_of_range("input window extends beyond series end");
  }
  Eigen::VectorXd window(window_length);
  for (int k = 0; k < window_length; ++k) {
    const int year = last_input_year - window_length + 1 + k;
    window[k] = year < series.base_year ? 0.0 : static_cast<double>(series.at(year));
  }
  return window;
}

std::vector<WindowSample> make_windows(const SeriesMap& series,
                                       const std::vector<std::string>& cohort,
                                       int last_input_year, int window_length,
                                       int target_year, std::size_t* skipped) {
  if (window_length < 1) throw std::invalid_argument("window_length must be >= 1");
  if (target_year <= last_input_year) {
    throw std::invalid_argument("target year must follow the input window");
  }
  std::vector<WindowSample> samples;
  samples.reserve(cohort.size());
  for (const std::string& author : cohort) {
    const auto it = series.find(author);
    if (it == series.end() || it->second.last_year() < target_year) {
      if (skipped) ++*skipped;
      std::cerr << "warning: skipping " << author << ": no data at target year "
                << target_year << "\n";
      continue;
    }
    WindowSample sample;
    sample.author_id = author;
    sample.input = input_window(it->second, last_input_year, window_length);
    sample.target = static_cast<double>(it->second.at(target_year));
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<PublicationRecord> synth_corpus(const SynthConfig& config,
                                            std::uint64_t seed) {
  if (config.n_authors < 0) throw std::invalid_argument("n_authors must be >= 0");
  if (config.first_year > config.last_year) {
    throw std::invalid_argument("synth: first_year > last_year");
  }
  if (config.rate_min < 0.0 || config.rate_max < config.rate_min) {
    throw std::invalid_argument("synth: need 0 <= rate_min <= rate_max");
  }
  std::vector<PublicationRecord> records;
  const std::uint64_t tag = fnv1a64("synth");
  for (std::int64_t a = 0; a < config.n_authors; ++a) {
    RngStream rng(seed, tag, static_cast<std::uint64_t>(a));
    const double rate =
        config.rate_min + rng.next_unit() * (config.rate_max - config.rate_min);
    char name[24];
    std::snprintf(name, sizeof name, "a%06lld", static_cast<long long>(a + 1));
    std::int64_t h = 0;
    for (int year = config.first_year; year <= config.last_year; ++year) {
      const double lambda = rate * std::pow(1.0 + static_cast<double>(h),
                                            config.exponent);
      std::int64_t k = poisson_sample(lambda, rng);
      if (year == config.force_active_year && k == 0) k = 1;
      h += k;
      for (std::int64_t i = 0; i < k; ++i) records.push_back({name, year});
    }
  }
  return records;
}

void write_series_cache(std::ostream& out, const SeriesMap& series) {
  out << "author_id,year,cumulative_count\n";
  for (const auto& [author, s] : series) {
    for (std::size_t i = 0; i < s.counts.size(); ++i) {
      out << author << ',' << (s.base_year + static_cast<int>(i)) << ','
          << s.counts[i] << '\n';
    }
  }
}

SeriesMap read_series_cache(std::istream& in) {
  SeriesMap out;
  std::string raw;
  std::size_t lineno = 0;
  AuthorSeries* current = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (lineno == 1 && line == "author_id,year,cumulative_count") continue;
    const std::size_t c2 = line.rfind(',');
    const std::size_t c1 = c2 == std::string::npos ? c2 : line.rfind(',', c2 - 1);
    if (c1 == std::string::npos) fail_line(lineno, "expected 'author_id,year,count'");
    const std::string author = line.substr(0, c1);
    int year = 0, dummy = 0;
    std::int64_t count = 0;
    if (!parse_int(line.substr(c1 + 1, c2 - c1 - 1), year)) {
      fail_line(lineno, "bad year");
    }
    {
      const std::string count_text = line.substr(c2 + 1);
      if (!parse_int(count_text, dummy) || dummy < 0) fail_line(lineno, "bad count");
      count = dummy;
    }
    if (author.empty()) fail_line(lineno, "empty author_id");

    if (current == nullptr || current->author_id != author) {
      auto [it, inserted] = out.try_emplace(author);
      if (!inserted) fail_line(lineno, "cache rows for '" + author + "' not contiguous");
      current = &it->second;
      current->author_id = author;
      current->base_year = year;
    } else if (year != current->last_year() + 1) {
      fail_line(lineno, "cache years for '" + author + "' not consecutive");
    }
    if (!current->counts.empty() && count < current->counts.back()) {
      fail_line(lineno, "cumulative count decreases for '" + author + "'");
    }
    current->counts.push_back(count);
  }
  return out;
}

}  // namespace pubcast
