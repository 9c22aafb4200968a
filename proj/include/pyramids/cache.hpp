#pragma once

// Columnar career cache: magic "PYR1", version byte, then length-prefixed
// sections. All integers little-endian.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pyramids/common.hpp"
#include "pyramids/ingest.hpp"

static_assert(std::endian::native == std::endian::little,
              "cache format assumes a little-endian host");

namespace pyr {

namespace detail {

class ByteWriter {
 public:
  explicit ByteWriter(std::string& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void put_str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.append(s.data(), s.size());
  }

 private:
  std::string& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view buf) : buf_(buf) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_str() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(buf_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == buf_.size(); }

  void seek(std::size_t p) { pos_ = p; }

 private:
  std::string_view buf_;
  std::size_t pos_ = 0;

  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw Error("truncated cache file");
  }
};

constexpr std::uint32_t kSectionStats = 1;
constexpr std::uint32_t kSectionCareers = 2;

}  // namespace detail

inline constexpr char kCareerCacheMagic[4] = {'P', 'Y', 'R', '1'};
inline constexpr std::uint8_t kCareerCacheVersion = 1;

inline void save_career_cache(const CareerTable& table,
                              const std::string& path) {
  std::string out;
  out.append(kCareerCacheMagic, 4);
  out.push_back(static_cast<char>(kCareerCacheVersion));
  detail::ByteWriter w(out);

  auto begin_section = [&](std::uint32_t id) {
    w.put(id);
    w.put<std::uint64_t>(0);  // patched below
    return out.size();
  };
  auto end_section = [&](std::size_t payload_start) {
    std::uint64_t len = out.size() - payload_start;
    std::memcpy(out.data() + payload_start - 8, &len, 8);
  };

  {
    auto s = begin_section(detail::kSectionStats);
    const auto& st = table.stats;
    w.put(st.accepted);
    w.put(st.dropped_window);
    w.put(st.dropped_type);
    w.put(st.malformed);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(st.malformed_lines.size()));
    for (auto ln : st.malformed_lines) w.put(ln);
    end_section(s);
  }
  {
    auto s = begin_section(detail::kSectionCareers);
    w.put<std::uint64_t>(table.size());
    for (const auto& c : table.careers()) {
      w.put_str(c.author_id);
      w.put_str(c.full_name);
      w.put(static_cast<std::uint8_t>(c.gender));
      w.put<std::uint32_t>(static_cast<std::uint32_t>(c.gender_by_country.size()));
      for (const auto& [cc, g] : c.gender_by_country) {
        w.put_str(cc);
        w.put(static_cast<std::uint8_t>(g));
      }
      w.put<std::uint32_t>(static_cast<std::uint32_t>(c.publication_dates.size()));
      for (Date d : c.publication_dates) w.put(d.days());
      w.put<std::uint32_t>(static_cast<std::uint32_t>(c.country_frequencies.size()));
      for (const auto& [cc, n] : c.country_frequencies) {
        w.put_str(cc);
        w.put(n);
      }
    }
    end_section(s);
  }
  write_file(path, out);
}

inline CareerTable load_career_cache(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() < 5 || std::memcmp(buf.data(), kCareerCacheMagic, 4) != 0)
    throw Error("not a career cache file: " + path);
  if (static_cast<std::uint8_t>(buf[4]) != kCareerCacheVersion)
    throw Error("unsupported career cache version in " + path);

  detail::ByteReader r(buf);
  r.seek(5);
  ParseStats stats;
  std::vector<AuthorCareer> careers;
  while (!r.at_end()) {
    auto id = r.get<std::uint32_t>();
    auto len = r.get<std::uint64_t>();
    std::size_t end = r.pos() + len;
    if (id == detail::kSectionStats) {
      stats.accepted = r.get<std::uint64_t>();
      stats.dropped_window = r.get<std::uint64_t>();
      stats.dropped_type = r.get<std::uint64_t>();
      stats.malformed = r.get<std::uint64_t>();
      auto n = r.get<std::uint32_t>();
      for (std::uint32_t i = 0; i < n; ++i)
        stats.malformed_lines.push_back(r.get<std::uint64_t>());
    } else if (id == detail::kSectionCareers) {
      auto count = r.get<std::uint64_t>();
      careers.reserve(count);
      for (std::uint64_t i = 0; i < count; ++i) {
        AuthorCareer c;
        c.author_id = r.get_str();
        c.full_name = r.get_str();
        c.gender = static_cast<Gender>(r.get<std::uint8_t>());
        auto ng = r.get<std::uint32_t>();
        for (std::uint32_t k = 0; k < ng; ++k) {
          auto cc = r.get_str();
          auto g = static_cast<Gender>(r.get<std::uint8_t>());
          c.gender_by_country.emplace_back(std::move(cc), g);
        }
        auto nd = r.get<std::uint32_t>();
        c.publication_dates.reserve(nd);
        for (std::uint32_t k = 0; k < nd; ++k)
          c.publication_dates.emplace_back(r.get<std::int32_t>());
        auto nc = r.get<std::uint32_t>();
        for (std::uint32_t k = 0; k < nc; ++k) {
          auto cc = r.get_str();
          auto n = r.get<std::uint32_t>();
          c.country_frequencies.emplace_back(std::move(cc), n);
        }
        c.assigned_countries = assign_countries(c.country_frequencies);
        careers.push_back(std::move(c));
      }
    }
    r.seek(end);  // unknown sections are skipped
  }
  CareerTable table(std::move(careers));
  table.stats = stats;
  return table;
}

inline void export_careers_csv(const CareerTable& table,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "author_id,full_name,gender,n_pubs,first_date,last_date,countries\n";
  for (const auto& c : table.careers()) {
    out << c.author_id << ',' << c.full_name << ',' << to_string(c.gender)
        << ',' << c.publication_dates.size() << ',';
    if (!c.publication_dates.empty())
      out << c.publication_dates.front().to_string() << ','
          << c.publication_dates.back().to_string();
    else
      out << ',';
    out << ',';
    for (std::size_t i = 0; i < c.assigned_countries.size(); ++i) {
      if (i) out << ';';
      out << c.assigned_countries[i];
    }
    out << '\n';
  }
}

}  // namespace pyr
