#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>
#include <zlib.h>

#include "pyramids/common.hpp"
#include "pyramids/date.hpp"

namespace pyr {

enum class Gender : std::uint8_t { female = 0, male = 1, unassigned = 2 };

inline const char* to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    default: return "unassigned";
  }
}

inline std::optional<Gender> gender_from_string(std::string_view s) {
  if (s == "female" || s == "F" || s == "f") return Gender::female;
  if (s == "male" || s == "M" || s == "m") return Gender::male;
  if (s == "unassigned") return Gender::unassigned;
  return std::nullopt;
}

struct Authorship {
  std::string author_id;
  std::string full_name;
  std::vector<std::string> countries;  // ISO 3166-1 alpha-2, may be empty
};

struct PublicationRecord {
  std::string work_id;
  std::string work_type;
  Date date;
  std::vector<Authorship> authorships;
};

struct IngestConfig {
  int t_min = 1950;
  int t_max = 2023;
  std::vector<std::string> work_types = {"article"};

  bool type_allowed(std::string_view t) const {
    return std::find(work_types.begin(), work_types.end(), t) !=
           work_types.end();
  }
};

struct ParseStats {
  std::uint64_t accepted = 0;
  std::uint64_t dropped_window = 0;
  std::uint64_t dropped_type = 0;
  std::uint64_t malformed = 0;
  std::vector<std::uint64_t> malformed_lines;  // 1-based, capped

  static constexpr std::size_t kMaxReportedLines = 100;

  void note_malformed(std::uint64_t line_no) {
    ++malformed;
    if (malformed_lines.size() < kMaxReportedLines)
      malformed_lines.push_back(line_no);
  }

  void merge(const ParseStats& other, std::uint64_t line_offset) {
    accepted += other.accepted;
    dropped_window += other.dropped_window;
    dropped_type += other.dropped_type;
    malformed += other.malformed;
    for (auto ln : other.malformed_lines)
      if (malformed_lines.size() < kMaxReportedLines)
        malformed_lines.push_back(ln + line_offset);
  }
};

namespace detail {

inline bool parse_record_json(std::string_view line, PublicationRecord& out) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  auto id = j.find("id");
  auto date = j.find("publication_date");
  auto auths = j.find("authorships");
  if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty())
    return false;
  if (date == j.end() || !date->is_string()) return false;
  auto d = Date::parse(date->get_ref<const std::string&>());
  if (!d) return false;
  if (auths == j.end() || !auths->is_array()) return false;

  out.work_id = id->get<std::string>();
  out.work_type = j.value("type", "");
  out.date = *d;
  out.authorships.clear();
  for (const auto& a : *auths) {
    if (!a.is_object()) return false;
    auto aid = a.find("author_id");
    if (aid == a.end() || !aid->is_string() ||
        aid->get_ref<const std::string&>().empty())
      return false;
    Authorship au;
    au.author_id = aid->get<std::string>();
    au.full_name = a.value("author_name", "");
    if (auto c = a.find("countries"); c != a.end() && c->is_array())
      for (const auto& cc : *c)
        if (cc.is_string()) au.countries.push_back(cc.get<std::string>());
    out.authorships.push_back(std::move(au));
  }
  return true;
}

inline bool is_header_line(std::string_view line) {
  // Cheap pre-check so ordinary records never pay a parse here.
  return line.find("\"format\"") != std::string_view::npos;
}

// Throws on an invalid header marker; returns true if the line was a header.
inline bool check_header_line(std::string_view line) {
  if (!is_header_line(line)) return false;
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("format")) return false;
  if (j["format"] != "pyr-records" || j.value("version", 0) != 1)
    throw Error("unsupported record stream header: " + std::string(line));
  return true;
}

}  // namespace detail

// Canonical single-line serialization of the documented field subset.
inline std::string serialize_record(const PublicationRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.work_id;
  j["type"] = r.work_type;
  j["publication_date"] = r.date.to_string();
  auto& arr = j["authorships"] = nlohmann::ordered_json::array();
  for (const auto& a : r.authorships) {
    nlohmann::ordered_json ja;
    ja["author_id"] = a.author_id;
    ja["author_name"] = a.full_name;
    ja["countries"] = a.countries;
    arr.push_back(std::move(ja));
  }
  return j.dump();
}

// Parses a buffer of line-delimited records, invoking fn for each accepted
// record. Line numbers in stats are 1-based relative to the buffer.
template <typename Fn>
void parse_publications(std::string_view buf, const IngestConfig& cfg,
                        ParseStats& stats, Fn&& fn, bool first_shard = true) {
  std::uint64_t line_no = 0;
  std::size_t pos = 0;
  PublicationRecord rec;
  while (pos < buf.size()) {
    std::size_t nl = buf.find('\n', pos);
    std::string_view line = buf.substr(pos, nl == std::string_view::npos
                                                ? std::string_view::npos
                                                : nl - pos);
    pos = nl == std::string_view::npos ? buf.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (first_shard && line_no == 1 && detail::check_header_line(line))
      continue;
    if (!detail::parse_record_json(line, rec)) {
      stats.note_malformed(line_no);
      continue;
    }
    if (!cfg.type_allowed(rec.work_type)) {
      ++stats.dropped_type;
      continue;
    }
    int y = rec.date.year();
    if (y < cfg.t_min || y > cfg.t_max) {
      ++stats.dropped_window;
      continue;
    }
    ++stats.accepted;
    fn(rec);
  }
}

inline std::vector<PublicationRecord> parse_publications(
    std::string_view buf, const IngestConfig& cfg, ParseStats& stats) {
  std::vector<PublicationRecord> out;
  parse_publications(buf, cfg, stats,
                     [&](const PublicationRecord& r) { out.push_back(r); });
  return out;
}

struct AuthorCareer {
  std::string author_id;
  std::string full_name;  // most frequent form, ties broken lexicographically
  std::vector<Date> publication_dates;  // sorted nondecreasing, deduped per work
  std::vector<std::pair<std::string, std::uint32_t>> country_frequencies;
  std::vector<std::string> assigned_countries;  // argmax set, sorted
  Gender gender = Gender::unassigned;
  // Multi-country authors are assigned independently under each country's
  // model; analyses for a country use that country's assignment.
  std::vector<std::pair<std::string, Gender>> gender_by_country;

  Gender gender_for(std::string_view country) const {
    for (const auto& [c, g] : gender_by_country)
      if (c == country) return g;
    return gender;
  }

  bool excluded_no_country() const { return assigned_countries.empty(); }

  bool affiliated_with(std::string_view country) const {
    return std::find(assigned_countries.begin(), assigned_countries.end(),
                     country) != assigned_countries.end();
  }
};

// Argmax set over country frequencies. Empty input -> empty set (author is
// excluded downstream).
inline std::vector<std::string> assign_countries(
    const std::vector<std::pair<std::string, std::uint32_t>>& freq) {
  std::vector<std::string> out;
  std::uint32_t best = 0;
  for (const auto& [c, n] : freq) best = std::max(best, n);
  for (const auto& [c, n] : freq)
    if (n == best && best > 0) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

struct CareerBuilder {
  // (work_id hash, date) pairs; deduped on finalize.
  std::vector<std::pair<std::uint64_t, Date>> pubs;
  std::vector<std::pair<std::string, std::uint32_t>> names;
  std::vector<std::pair<std::string, std::uint32_t>> countries;

  static void bump(std::vector<std::pair<std::string, std::uint32_t>>& v,
                   const std::string& key, std::uint32_t by = 1) {
    for (auto& [k, n] : v)
      if (k == key) {
        n += by;
        return;
      }
    v.emplace_back(key, by);
  }

  void add(const PublicationRecord& rec, const Authorship& a) {
    pubs.emplace_back(fnv1a(rec.work_id), rec.date);
    if (!a.full_name.empty()) bump(names, a.full_name);
    for (const auto& c : a.countries) bump(countries, c);
  }

  void merge(CareerBuilder&& other) {
    pubs.insert(pubs.end(), other.pubs.begin(), other.pubs.end());
    for (auto& [k, n] : other.names) bump(names, k, n);
    for (auto& [k, n] : other.countries) bump(countries, k, n);
  }

  AuthorCareer finalize(std::string author_id) && {
    AuthorCareer c;
    c.author_id = std::move(author_id);
    std::sort(pubs.begin(), pubs.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    pubs.erase(std::unique(pubs.begin(), pubs.end(),
                           [](const auto& a, const auto& b) {
                             return a.first == b.first;
                           }),
               pubs.end());
    c.publication_dates.reserve(pubs.size());
    for (const auto& [h, d] : pubs) c.publication_dates.push_back(d);
    std::sort(c.publication_dates.begin(), c.publication_dates.end());
    // Most frequent name, ties toward the lexicographically smaller form.
    std::uint32_t best = 0;
    for (const auto& [name, n] : names)
      if (n > best || (n == best && (c.full_name.empty() || name < c.full_name))) {
        best = n;
        c.full_name = name;
      }
    std::sort(countries.begin(), countries.end());
    c.country_frequencies = std::move(countries);
    c.assigned_countries = assign_countries(c.country_frequencies);
    return c;
  }
};

using BuilderMap = std::unordered_map<std::string, CareerBuilder>;

inline void accumulate(BuilderMap& m, const PublicationRecord& rec) {
  for (const auto& a : rec.authorships) m[a.author_id].add(rec, a);
}

}  // namespace detail

// Finalized career table: careers sorted by author_id, plus a lookup index.
class CareerTable {
 public:
  CareerTable() = default;

  explicit CareerTable(std::vector<AuthorCareer> careers)
      : careers_(std::move(careers)) {
    std::sort(careers_.begin(), careers_.end(),
              [](const auto& a, const auto& b) {
                return a.author_id < b.author_id;
              });
    rebuild_index();
  }

  const std::vector<AuthorCareer>& careers() const { return careers_; }
  std::vector<AuthorCareer>& careers() { return careers_; }

  const AuthorCareer* find(std::string_view author_id) const {
    auto it = index_.find(std::string(author_id));
    return it == index_.end() ? nullptr : &careers_[it->second];
  }

  AuthorCareer* find(std::string_view author_id) {
    auto it = index_.find(std::string(author_id));
    return it == index_.end() ? nullptr : &careers_[it->second];
  }

  std::size_t size() const { return careers_.size(); }

  ParseStats stats;

 private:
  std::vector<AuthorCareer> careers_;
  std::unordered_map<std::string, std::size_t> index_;

  void rebuild_index() {
    index_.clear();
    index_.reserve(careers_.size());
    for (std::size_t i = 0; i < careers_.size(); ++i)
      index_[careers_[i].author_id] = i;
  }
};

inline CareerTable build_careers(const std::vector<PublicationRecord>& records) {
  detail::BuilderMap m;
  for (const auto& r : records) detail::accumulate(m, r);
  std::vector<AuthorCareer> careers;
  careers.reserve(m.size());
  for (auto& [id, b] : m) careers.push_back(std::move(b).finalize(id));
  return CareerTable(std::move(careers));
}

namespace detail {

// Shard boundaries at line starts. Returns n+1 offsets.
inline std::vector<std::size_t> shard_offsets(std::string_view buf,
                                              unsigned shards) {
  std::vector<std::size_t> off{0};
  for (unsigned i = 1; i < shards; ++i) {
    std::size_t guess = buf.size() * i / shards;
    std::size_t nl = buf.find('\n', guess);
    off.push_back(nl == std::string_view::npos ? buf.size() : nl + 1);
  }
  off.push_back(buf.size());
  std::sort(off.begin(), off.end());
  return off;
}

inline bool has_gz_suffix(std::string_view path) {
  return path.size() > 3 && path.substr(path.size() - 3) == ".gz";
}

inline std::string read_maybe_gzip(const std::string& path) {
  if (!has_gz_suffix(path)) return read_file(path);
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, n);
  bool bad = n < 0;
  gzclose(f);
  if (bad) throw Error("gzip read error in " + path);
  return out;
}

}  // namespace detail

// Shard-parallel parse + aggregate over one or more files. Per-shard partial
// tables are merged in shard order, so the result does not depend on thread
// scheduling.
inline CareerTable build_career_table(const std::vector<std::string>& paths,
                                      const IngestConfig& cfg,
                                      unsigned n_threads = 1) {
  if (n_threads == 0) n_threads = 1;
  detail::BuilderMap merged;
  ParseStats total_stats;
  std::uint64_t line_offset = 0;

  for (const auto& path : paths) {
    std::string buf = detail::read_maybe_gzip(path);
    auto offsets = detail::shard_offsets(buf, n_threads);
    unsigned shards = static_cast<unsigned>(offsets.size()) - 1;

    std::vector<detail::BuilderMap> partials(shards);
    std::vector<ParseStats> stats(shards);
    std::vector<std::uint64_t> lines(shards, 0);

    auto work = [&](unsigned s) {
      std::string_view span(buf.data() + offsets[s],
                            offsets[s + 1] - offsets[s]);
      for (char ch : span)
        if (ch == '\n') ++lines[s];
      if (!span.empty() && span.back() != '\n') ++lines[s];
      parse_publications(
          span, cfg, stats[s],
          [&](const PublicationRecord& r) {
            detail::accumulate(partials[s], r);
          },
          /*first_shard=*/s == 0);
    };

    if (shards == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (unsigned s = 0; s < shards; ++s) threads.emplace_back(work, s);
      for (auto& t : threads) t.join();
    }

    for (unsigned s = 0; s < shards; ++s) {
      total_stats.merge(stats[s], line_offset);
      line_offset += lines[s];
      for (auto& [id, b] : partials[s]) merged[id].merge(std::move(b));
      partials[s].clear();
    }
  }

  std::vector<AuthorCareer> careers;
  careers.reserve(merged.size());
  for (auto& [id, b] : merged) careers.push_back(std::move(b).finalize(id));
  CareerTable table(std::move(careers));
  table.stats = total_stats;
  return table;
}

}  // namespace pyr
