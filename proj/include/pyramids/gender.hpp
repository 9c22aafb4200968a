#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pyramids/cache.hpp"
#include "pyramids/common.hpp"
#include "pyramids/ingest.hpp"
#include "pyramids/rng.hpp"

namespace pyr {

// ---------------------------------------------------------------------------
// Name normalization

namespace detail {

inline std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    char32_t cp;
    std::size_t len;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1f;
      len = 2;
    } else if ((c >> 4) == 0xe) {
      cp = c & 0x0f;
      len = 3;
    } else if ((c >> 3) == 0x1e) {
      cp = c & 0x07;
      len = 4;
    } else {  // invalid byte: substitute
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(0xFFFD);
      break;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = s[i + k];
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void utf8_encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

// Compatibility fold + lowercase for one codepoint. Covers ASCII, Latin-1,
// Latin Extended-A, Greek, Cyrillic, fullwidth forms, and the Latin
// ligatures; sufficient for name data in Latin-script corpora.
inline void fold_codepoint(char32_t cp, std::vector<char32_t>& out) {
  if (cp < 0x80) {
    out.push_back(cp >= 'A' && cp <= 'Z' ? cp + 0x20 : cp);
    return;
  }
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {  // Latin-1 uppercase
    out.push_back(cp + 0x20);
    return;
  }
  if (cp >= 0x100 && cp <= 0x137) {  // Latin Extended-A, even = uppercase
    out.push_back(cp % 2 == 0 ? cp + 1 : cp);
    return;
  }
  if (cp >= 0x139 && cp <= 0x148) {  // odd = uppercase in this span
    out.push_back(cp % 2 == 1 ? cp + 1 : cp);
    return;
  }
  if (cp >= 0x14A && cp <= 0x177) {
    out.push_back(cp % 2 == 0 ? cp + 1 : cp);
    return;
  }
  if (cp == 0x178) {  // capital Y with diaeresis
    out.push_back(0xFF);
    return;
  }
  if (cp >= 0x179 && cp <= 0x17E) {
    out.push_back(cp % 2 == 1 ? cp + 1 : cp);
    return;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) {  // Greek uppercase
    out.push_back(cp + 0x20);
    return;
  }
  if (cp >= 0x410 && cp <= 0x42F) {  // Cyrillic uppercase
    out.push_back(cp + 0x20);
    return;
  }
  if (cp == 0x401) {  // YO
    out.push_back(0x451);
    return;
  }
  if (cp == 0x3000) {  // ideographic space
    out.push_back(U' ');
    return;
  }
  if (cp >= 0xFF01 && cp <= 0xFF5E) {  // fullwidth ASCII block
    fold_codepoint(cp - 0xFEE0, out);
    return;
  }
  switch (cp) {  // Latin ligatures
    case 0xFB00: out.insert(out.end(), {U'f', U'f'}); return;
    case 0xFB01: out.insert(out.end(), {U'f', U'i'}); return;
    case 0xFB02: out.insert(out.end(), {U'f', U'l'}); return;
    case 0xFB03: out.insert(out.end(), {U'f', U'f', U'i'}); return;
    case 0xFB04: out.insert(out.end(), {U'f', U'f', U'l'}); return;
    case 0xFB05:
    case 0xFB06: out.insert(out.end(), {U's', U't'}); return;
    default: out.push_back(cp);
  }
}

inline std::vector<char32_t> fold_string(std::string_view s) {
  std::vector<char32_t> out;
  for (char32_t cp : utf8_decode(s)) fold_codepoint(cp, out);
  return out;
}

inline std::string encode(std::span<const char32_t> cps) {
  std::string out;
  for (char32_t cp : cps) utf8_encode(cp, out);
  return out;
}

}  // namespace detail

// Lowercased, compatibility-folded first whitespace-separated token of a
// full name. Empty result means the name is unusable.
inline std::string normalize_first_name(std::string_view full_name) {
  auto folded = detail::fold_string(full_name);
  auto is_space = [](char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == 0xA0;
  };
  std::size_t start = 0;
  while (start < folded.size() && is_space(folded[start])) ++start;
  std::size_t end = start;
  while (end < folded.size() && !is_space(folded[end])) ++end;
  return detail::encode(std::span(folded).subspan(start, end - start));
}

// ---------------------------------------------------------------------------
// Corpus

enum class Split : std::uint8_t { train = 0, validation = 1, test = 2 };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    default: return "test";
  }
}

struct NameEntry {
  std::string first_name;  // normalized on load
  Gender gender = Gender::unassigned;
  std::string country;
  Split split = Split::train;
};

struct NameCorpus {
  std::vector<NameEntry> entries;
  std::string source_tag;

  NameCorpus subset(Split s) const {
    NameCorpus out;
    out.source_tag = source_tag;
    for (const auto& e : entries)
      if (e.split == s) out.entries.push_back(e);
    return out;
  }

  NameCorpus subset(const std::string& country) const {
    NameCorpus out;
    out.source_tag = source_tag;
    for (const auto& e : entries)
      if (e.country == country) out.entries.push_back(e);
    return out;
  }

  NameCorpus subset(const std::string& country, Split s) const {
    NameCorpus out;
    out.source_tag = source_tag;
    for (const auto& e : entries)
      if (e.country == country && e.split == s) out.entries.push_back(e);
    return out;
  }

  std::pair<std::size_t, std::size_t> gender_counts() const {
    std::size_t f = 0, m = 0;
    for (const auto& e : entries) (e.gender == Gender::female ? f : m) += 1;
    return {f, m};
  }
};

inline NameCorpus load_name_corpus(const std::string& path,
                                   std::string source_tag = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "first_name,gender,country,split")
    throw Error(path + ": expected header first_name,gender,country,split");
  NameCorpus corpus;
  corpus.source_tag = std::move(source_tag);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 4)
      throw Error(path + ": bad row at line " + std::to_string(line_no));
    NameEntry e;
    e.first_name = normalize_first_name(f[0]);
    if (e.first_name.empty())
      throw Error(path + ": unusable name at line " + std::to_string(line_no));
    auto g = gender_from_string(f[1]);
    if (!g || *g == Gender::unassigned)
      throw Error(path + ": bad gender at line " + std::to_string(line_no));
    e.gender = *g;
    e.country = f[2];
    if (f[3] == "train")
      e.split = Split::train;
    else if (f[3] == "validation")
      e.split = Split::validation;
    else if (f[3] == "test")
      e.split = Split::test;
    else
      throw Error(path + ": bad split at line " + std::to_string(line_no));
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

inline void save_name_corpus(const NameCorpus& corpus,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "first_name,gender,country,split\n";
  for (const auto& e : corpus.entries)
    out << e.first_name << ',' << to_string(e.gender) << ',' << e.country
        << ',' << to_string(e.split) << '\n';
}

// Per-country gender-balanced validation/test splits; remaining entries go
// to train. Deterministic given the seed.
inline NameCorpus split_corpus(const NameCorpus& input,
                               std::size_t val_per_gender,
                               std::size_t test_per_gender,
                               std::uint64_t seed) {
  std::map<std::pair<std::string, Gender>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < input.entries.size(); ++i) {
    const auto& e = input.entries[i];
    groups[{e.country, e.gender}].push_back(i);
  }
  NameCorpus out = input;
  Rng master(seed);
  std::uint64_t group_key = 0;
  for (auto& [key, idx] : groups) {
    Rng rng = master.fork(group_key++);
    shuffle(idx, rng);
    if (idx.size() < val_per_gender + test_per_gender)
      throw Error("split_corpus: too few entries for " + key.first + "/" +
                  std::string(to_string(key.second)));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Split s = i < val_per_gender                     ? Split::validation
                : i < val_per_gender + test_per_gender ? Split::test
                                                       : Split::train;
      out.entries[idx[i]].split = s;
    }
  }
  return out;
}

// Majority class randomly reduced until minority/majority >= min_ratio.
inline NameCorpus downsample_majority(const NameCorpus& input,
                                      double min_ratio = 0.2,
                                      std::uint64_t seed = 0) {
  auto [f, m] = input.gender_counts();
  if (f == 0 || m == 0)
    throw Error("downsample_majority: both genders required");
  std::size_t minority = std::min(f, m), majority = std::max(f, m);
  if (static_cast<double>(minority) / static_cast<double>(majority) >=
      min_ratio)
    return input;
  Gender maj_gender = f > m ? Gender::female : Gender::male;
  // Largest majority size keeping the ratio satisfied; the epsilon absorbs
  // binary rounding of ratios like 0.2.
  auto target = static_cast<std::size_t>(
      std::floor(static_cast<double>(minority) / min_ratio * (1.0 + 1e-9)));
  std::vector<std::size_t> maj_idx;
  for (std::size_t i = 0; i < input.entries.size(); ++i)
    if (input.entries[i].gender == maj_gender) maj_idx.push_back(i);
  Rng rng(seed);
  shuffle(maj_idx, rng);
  maj_idx.resize(target);
  std::vector<bool> keep(input.entries.size(), false);
  for (std::size_t i = 0; i < input.entries.size(); ++i)
    if (input.entries[i].gender != maj_gender) keep[i] = true;
  for (std::size_t i : maj_idx) keep[i] = true;
  NameCorpus out;
  out.source_tag = input.source_tag;
  for (std::size_t i = 0; i < input.entries.size(); ++i)
    if (keep[i]) out.entries.push_back(input.entries[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Feature space: character n-grams (n = 1..max_n) with TF-IDF weights

struct FeatureSpace {
  std::vector<std::string> ngrams;  // sorted; index = feature id
  std::vector<double> idf;
  std::uint32_t max_n = 0;
  std::unordered_map<std::string, std::uint32_t> index;

  void rebuild_index() {
    index.clear();
    index.reserve(ngrams.size());
    for (std::uint32_t i = 0; i < ngrams.size(); ++i) index[ngrams[i]] = i;
  }

  std::size_t size() const { return ngrams.size(); }

  // Raw n-gram counts of a normalized name, by feature id. Unseen n-grams
  // contribute nothing.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> features(
      std::string_view name) const {
    auto cps = detail::utf8_decode(name);
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    std::string key;
    for (std::size_t n = 1; n <= max_n && n <= cps.size(); ++n)
      for (std::size_t i = 0; i + n <= cps.size(); ++i) {
        key.clear();
        for (std::size_t k = 0; k < n; ++k)
          detail::utf8_encode(cps[i + k], key);
        auto it = index.find(key);
        if (it != index.end()) ++counts[it->second];
      }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out(counts.begin(),
                                                             counts.end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Vocabulary and IDF from the training names. max_n is the length in
// codepoints of the longest training name; IDF = ln((1+N)/(1+df)) + 1 with
// names as documents.
inline std::shared_ptr<const FeatureSpace> build_feature_space(
    const NameCorpus& train) {
  if (train.entries.empty())
    throw Error("build_feature_space: empty training corpus");
  auto fs = std::make_shared<FeatureSpace>();
  std::map<std::string, std::uint64_t> df;  // ordered -> deterministic ids
  for (const auto& e : train.entries) {
    auto cps = detail::utf8_decode(e.first_name);
    fs->max_n = std::max<std::uint32_t>(
        fs->max_n, static_cast<std::uint32_t>(cps.size()));
    std::set<std::string> seen;
    std::string key;
    for (std::size_t n = 1; n <= cps.size(); ++n)
      for (std::size_t i = 0; i + n <= cps.size(); ++i) {
        key.clear();
        for (std::size_t k = 0; k < n; ++k)
          detail::utf8_encode(cps[i + k], key);
        seen.insert(key);
      }
    for (const auto& g : seen) ++df[g];
  }
  const double n_docs = static_cast<double>(train.entries.size());
  fs->ngrams.reserve(df.size());
  fs->idf.reserve(df.size());
  for (const auto& [g, d] : df) {
    fs->ngrams.push_back(g);
    fs->idf.push_back(std::log((1.0 + n_docs) / (1.0 + d)) + 1.0);
  }
  fs->rebuild_index();
  return fs;
}

// ---------------------------------------------------------------------------
// Complement Naive Bayes

struct Prediction {
  Gender gender = Gender::unassigned;
  double posterior = 0.5;  // of the predicted class, >= 0.5
};

struct GenderModel {
  std::string country;
  double alpha = 1.0;
  double theta = 0.9;
  std::shared_ptr<const FeatureSpace> feature_space;
  // Per class, the negated complement log-probabilities, indexed by feature.
  std::vector<double> weight_female;
  std::vector<double> weight_male;
  std::uint64_t n_train_female = 0;
  std::uint64_t n_train_male = 0;
  bool downsampled = false;

  std::optional<Prediction> predict(std::string_view first_name) const {
    if (first_name.empty()) return std::nullopt;
    double jf = 0.0, jm = 0.0;
    for (auto [i, tf] : feature_space->features(first_name)) {
      double x = tf * feature_space->idf[i];
      jf += x * weight_female[i];
      jm += x * weight_male[i];
    }
    double hi = std::max(jf, jm);
    double ef = std::exp(jf - hi), em = std::exp(jm - hi);
    Prediction p;
    // Exact ties (e.g. a name of only unseen n-grams) resolve to female,
    // the alphabetically first class.
    p.gender = jf >= jm ? Gender::female : Gender::male;
    p.posterior = (p.gender == Gender::female ? ef : em) / (ef + em);
    return p;
  }

  double male_posterior(std::string_view first_name) const {
    auto p = predict(first_name);
    if (!p) throw Error("male_posterior: unusable name");
    return p->gender == Gender::male ? p->posterior : 1.0 - p->posterior;
  }
};

// Trains a CNB model with class-balanced sample weights. Per-class TF sums
// are accumulated as integers, so the result is independent of row order.
inline GenderModel train_cnb(const NameCorpus& train,
                             std::shared_ptr<const FeatureSpace> fs,
                             double alpha) {
  if (!(alpha > 0.0)) throw Error("train_cnb: alpha must be positive");
  auto [n_f, n_m] = train.gender_counts();
  if (n_f == 0 || n_m == 0)
    throw Error("train_cnb: both genders required in training data");

  const std::size_t v = fs->size();
  std::vector<std::uint64_t> tf_sum_f(v, 0), tf_sum_m(v, 0);
  for (const auto& e : train.entries) {
    auto& sums = e.gender == Gender::female ? tf_sum_f : tf_sum_m;
    for (auto [i, tf] : fs->features(e.first_name)) sums[i] += tf;
  }

  const double n_total = static_cast<double>(n_f + n_m);
  const double w_f = n_total / (2.0 * static_cast<double>(n_f));
  const double w_m = n_total / (2.0 * static_cast<double>(n_m));

  GenderModel model;
  model.alpha = alpha;
  model.feature_space = fs;
  model.n_train_female = n_f;
  model.n_train_male = n_m;
  model.weight_female.resize(v);
  model.weight_male.resize(v);

  // Complement counts: class statistics come from the other class.
  double total_f = 0.0, total_m = 0.0;  // complement-count totals
  for (std::size_t i = 0; i < v; ++i) {
    total_f += w_m * fs->idf[i] * static_cast<double>(tf_sum_m[i]) + alpha;
    total_m += w_f * fs->idf[i] * static_cast<double>(tf_sum_f[i]) + alpha;
  }
  for (std::size_t i = 0; i < v; ++i) {
    double comp_f = w_m * fs->idf[i] * static_cast<double>(tf_sum_m[i]) + alpha;
    double comp_m = w_f * fs->idf[i] * static_cast<double>(tf_sum_f[i]) + alpha;
    model.weight_female[i] = std::log(total_f) - std::log(comp_f);
    model.weight_male[i] = std::log(total_m) - std::log(comp_m);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation

// Rank-based ROC AUC with midrank handling of ties; equivalent to the
// trapezoidal rule on the ROC curve.
inline double roc_auc(std::vector<std::pair<double, bool>> scored) {
  std::size_t n_pos = 0;
  for (const auto& [s, pos] : scored) n_pos += pos;
  std::size_t n_neg = scored.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error("roc_auc: needs both classes");
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second) rank_sum_pos += midrank;
    i = j;
  }
  return (rank_sum_pos -
          0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct EvalReport {
  double roc_auc = 0.0;
  double f1_assigned_male_positive = 0.0;
  double assignment_rate = 0.0;
  std::size_t n_evaluated = 0;
};

namespace detail {

// F1 (male positive) over the subset with posterior >= theta; empty subset
// scores 0.
inline double assigned_f1(const GenderModel& model, const NameCorpus& data,
                          double theta, std::size_t* n_assigned = nullptr) {
  std::size_t tp = 0, fp = 0, fn = 0, assigned = 0;
  for (const auto& e : data.entries) {
    auto p = model.predict(e.first_name);
    if (!p || p->posterior < theta) continue;
    ++assigned;
    bool pred_male = p->gender == Gender::male;
    bool true_male = e.gender == Gender::male;
    if (pred_male && true_male)
      ++tp;
    else if (pred_male && !true_male)
      ++fp;
    else if (!pred_male && true_male)
      ++fn;
  }
  if (n_assigned) *n_assigned = assigned;
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace detail

inline double validation_auc(const GenderModel& model,
                             const NameCorpus& data) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(data.entries.size());
  for (const auto& e : data.entries)
    scored.emplace_back(model.male_posterior(e.first_name),
                        e.gender == Gender::male);
  return roc_auc(std::move(scored));
}

inline EvalReport evaluate(const GenderModel& model, double theta,
                           const NameCorpus& test) {
  EvalReport r;
  r.n_evaluated = test.entries.size();
  r.roc_auc = validation_auc(model, test);  // throws on single-class input
  std::size_t assigned = 0;
  r.f1_assigned_male_positive = detail::assigned_f1(model, test, theta,
                                                    &assigned);
  r.assignment_rate = test.entries.empty()
                          ? 0.0
                          : static_cast<double>(assigned) /
                                static_cast<double>(test.entries.size());
  return r;
}

inline const std::vector<double>& alpha_grid() {
  static const std::vector<double> grid = {0.001, 0.01, 0.1, 1.0, 10.0};
  return grid;
}

// 0.90..0.99 by 0.01, 0.991..0.999 by 0.001, 0.9991..0.9999 by 0.0001.
inline std::vector<double> theta_grid() {
  std::vector<double> grid;
  for (int i = 9000; i <= 9900; i += 100) grid.push_back(i / 10000.0);
  for (int i = 9910; i <= 9990; i += 10) grid.push_back(i / 10000.0);
  for (int i = 9991; i <= 9999; i += 1) grid.push_back(i / 10000.0);
  return grid;
}

struct AlphaTuning {
  double alpha = 1.0;
  double auc = 0.0;
  GenderModel model;
};

// Grid search maximizing validation ROC AUC; ties break toward larger alpha.
inline AlphaTuning tune_alpha(const NameCorpus& train,
                              const NameCorpus& validation,
                              std::shared_ptr<const FeatureSpace> fs) {
  AlphaTuning best;
  bool have = false;
  for (double alpha : alpha_grid()) {
    GenderModel model = train_cnb(train, fs, alpha);
    double auc = validation_auc(model, validation);
    if (!have || auc >= best.auc) {
      best = {alpha, auc, std::move(model)};
      have = true;
    }
  }
  return best;
}

// Smallest grid threshold reaching F1 >= 0.9 on each validation set
// independently (0.9999 fallback), combined by max.
inline double tune_threshold(const GenderModel& model,
                             const NameCorpus& validation_a,
                             const NameCorpus& validation_b,
                             double target_f1 = 0.9) {
  auto grid = theta_grid();
  auto smallest = [&](const NameCorpus& val) {
    for (double theta : grid)
      if (detail::assigned_f1(model, val, theta) >= target_f1) return theta;
    return grid.back();
  };
  return std::max(smallest(validation_a), smallest(validation_b));
}

// Reliability gate: AUC at least 0.8 on both validation families.
inline bool passes_auc_gate(const GenderModel& model, const NameCorpus& val_a,
                            const NameCorpus& val_b, double min_auc = 0.8) {
  return validation_auc(model, val_a) >= min_auc &&
         validation_auc(model, val_b) >= min_auc;
}

// ---------------------------------------------------------------------------
// Assignment

enum class AssignOutcome : std::uint8_t {
  assigned,
  below_threshold,
  unusable_name,
  no_model,
};

struct Assignment {
  Gender gender = Gender::unassigned;
  AssignOutcome outcome = AssignOutcome::no_model;
  double posterior = 0.0;
};

inline Assignment assign_gender(const GenderModel& model,
                                const AuthorCareer& career) {
  Assignment a;
  std::string name = normalize_first_name(career.full_name);
  if (name.empty()) {
    a.outcome = AssignOutcome::unusable_name;
    return a;
  }
  auto p = model.predict(name);
  if (!p) {
    a.outcome = AssignOutcome::unusable_name;
    return a;
  }
  a.posterior = p->posterior;
  if (p->posterior >= model.theta) {  // inclusive bound
    a.gender = p->gender;
    a.outcome = AssignOutcome::assigned;
  } else {
    a.outcome = AssignOutcome::below_threshold;
  }
  return a;
}

// Assigns gender per (author, assigned country) under each country's model.
// The career's plain gender field is set when every per-country assignment
// agrees, and left unassigned otherwise.
inline void assign_genders(CareerTable& table,
                           const std::map<std::string, GenderModel>& models) {
  for (auto& c : table.careers()) {
    c.gender_by_country.clear();
    std::set<Gender> seen;
    for (const auto& country : c.assigned_countries) {
      auto it = models.find(country);
      Gender g = Gender::unassigned;
      if (it != models.end()) g = assign_gender(it->second, c).gender;
      c.gender_by_country.emplace_back(country, g);
      seen.insert(g);
    }
    c.gender = seen.size() == 1 ? *seen.begin() : Gender::unassigned;
  }
}

// ---------------------------------------------------------------------------
// Persistence: magic "PYRG", version byte, then the model payload

inline constexpr char kGenderModelMagic[4] = {'P', 'Y', 'R', 'G'};
inline constexpr std::uint8_t kGenderModelVersion = 1;

inline void save_gender_model(const GenderModel& model,
                              const std::string& path) {
  std::string out;
  out.append(kGenderModelMagic, 4);
  out.push_back(static_cast<char>(kGenderModelVersion));
  detail::ByteWriter w(out);
  w.put_str(model.country);
  w.put(model.alpha);
  w.put(model.theta);
  w.put(model.n_train_female);
  w.put(model.n_train_male);
  w.put(static_cast<std::uint8_t>(model.downsampled));
  const auto& fs = *model.feature_space;
  w.put(fs.max_n);
  w.put<std::uint64_t>(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    w.put_str(fs.ngrams[i]);
    w.put(fs.idf[i]);
    w.put(model.weight_female[i]);
    w.put(model.weight_male[i]);
  }
  write_file(path, out);

  std::ofstream sidecar(path + ".txt");
  sidecar << "country: " << model.country << "\n"
          << "alpha: " << model.alpha << "\n"
          << "theta: " << model.theta << "\n"
          << "train_female: " << model.n_train_female << "\n"
          << "train_male: " << model.n_train_male << "\n"
          << "downsampled: " << (model.downsampled ? "yes" : "no") << "\n"
          << "vocabulary: " << fs.size() << "\n"
          << "max_ngram: " << fs.max_n << "\n";
}

inline GenderModel load_gender_model(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() < 5 || std::memcmp(buf.data(), kGenderModelMagic, 4) != 0)
    throw Error("not a gender model file: " + path);
  if (static_cast<std::uint8_t>(buf[4]) != kGenderModelVersion)
    throw Error("unsupported gender model version in " + path);
  detail::ByteReader r(buf);
  r.seek(5);
  GenderModel model;
  model.country = r.get_str();
  model.alpha = r.get<double>();
  model.theta = r.get<double>();
  model.n_train_female = r.get<std::uint64_t>();
  model.n_train_male = r.get<std::uint64_t>();
  model.downsampled = r.get<std::uint8_t>() != 0;
  auto fs = std::make_shared<FeatureSpace>();
  fs->max_n = r.get<std::uint32_t>();
  auto v = r.get<std::uint64_t>();
  fs->ngrams.reserve(v);
  fs->idf.reserve(v);
  model.weight_female.reserve(v);
  model.weight_male.reserve(v);
  for (std::uint64_t i = 0; i < v; ++i) {
    fs->ngrams.push_back(r.get_str());
    fs->idf.push_back(r.get<double>());
    model.weight_female.push_back(r.get<double>());
    model.weight_male.push_back(r.get<double>());
  }
  fs->rebuild_index();
  model.feature_space = std::move(fs);
  return model;
}

}  // namespace pyr
