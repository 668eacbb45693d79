#pragma once

#include "topigen/category_graph.hpp"

#include <fstream>
#include <optional>
#include <string>
#include <string_view>

namespace topigen {

namespace detail {

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline bool is_blank_or_comment(std::string_view line) {
  std::size_t i = line.find_first_not_of(" \t");
  return i == std::string_view::npos || line[i] == '#';
}

/// Splits an edge/label line on a single tab. Throws ParseError on any other
/// field count.
inline std::pair<std::string_view, std::string_view> split_tsv(
    std::string_view line, const std::string& path, std::size_t lineno) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw ParseError(path, lineno, "expected 2 tab-separated fields, got 1");
  }
  if (line.find('\t', tab + 1) != std::string_view::npos) {
    throw ParseError(path, lineno, "expected 2 tab-separated fields, got more");
  }
  std::string_view a = line.substr(0, tab);
  std::string_view b = line.substr(tab + 1);
  if (a.empty() || b.empty()) {
    throw ParseError(path, lineno, "empty field");
  }
  return {a, b};
}

inline void check_id_field(std::string_view id, const std::string& path,
                           std::size_t lineno) {
  if (id.find_first_of(" \r\n") != std::string_view::npos) {
    throw ParseError(path, lineno,
                     "node id contains whitespace: '" + std::string(id) + "'");
  }
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    fn(strip_cr(line), lineno);
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
}

// --- N-Triples subset ------------------------------------------------------

struct NtTerm {
  enum class Type { iri, blank, literal } type = Type::iri;
  std::string value;  // IRI without angle brackets; blank label; raw literal
};

struct NtOutcome {
  bool blank_line = false;
  bool ok = false;
  bool have_predicate = false;
  NtTerm subject, predicate, object;
  std::string error;
};

class NtScanner {
public:
  explicit NtScanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }

  bool at_comment() {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == '#';
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  bool consume(char ch) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  /// Parses one term; returns an error message on failure, empty on success.
  std::string parse_term(NtTerm& out) {
    skip_ws();
    if (pos_ >= s_.size()) return "unexpected end of line";
    const char c = s_[pos_];
    if (c == '<') {
      const std::size_t close = s_.find('>', pos_ + 1);
      if (close == std::string_view::npos) return "unterminated IRI";
      out.type = NtTerm::Type::iri;
      out.value = std::string(s_.substr(pos_ + 1, close - pos_ - 1));
      if (out.value.empty()) return "empty IRI";
      if (out.value.find_first_of(" \t") != std::string::npos) {
        return "whitespace inside IRI";
      }
      pos_ = close + 1;
      return {};
    }
    if (c == '_' && pos_ + 1 < s_.size() && s_[pos_ + 1] == ':') {
      std::size_t end = pos_ + 2;
      while (end < s_.size() && s_[end] != ' ' && s_[end] != '\t') ++end;
      if (end == pos_ + 2) return "empty blank node label";
      out.type = NtTerm::Type::blank;
      out.value = std::string(s_.substr(pos_, end - pos_));
      pos_ = end;
      return {};
    }
    if (c == '"') {
      std::size_t i = pos_ + 1;
      bool closed = false;
      while (i < s_.size()) {
        if (s_[i] == '\\') {
          i += 2;
          continue;
        }
        if (s_[i] == '"') {
          closed = true;
          break;
        }
        ++i;
      }
      if (!closed) return "unterminated literal";
      std::size_t end = i + 1;
      // Optional language tag or datatype IRI; scanned, not interpreted.
      if (end < s_.size() && s_[end] == '@') {
        ++end;
        while (end < s_.size() && s_[end] != ' ' && s_[end] != '\t' &&
               s_[end] != '.') {
          ++end;
        }
      } else if (end + 1 < s_.size() && s_[end] == '^' && s_[end + 1] == '^') {
        end += 2;
        if (end >= s_.size() || s_[end] != '<') return "malformed datatype IRI";
        const std::size_t close = s_.find('>', end + 1);
        if (close == std::string_view::npos) return "unterminated datatype IRI";
        end = close + 1;
      }
      out.type = NtTerm::Type::literal;
      out.value = std::string(s_.substr(pos_, end - pos_));
      pos_ = end;
      return {};
    }
    return std::string("unexpected character '") + c + "'";
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

/// Parses one N-Triples line far enough to classify it. Never throws: the
/// caller decides whether a malformed line is a hard error (retained
/// predicate) or a counted warning (anything else).
inline NtOutcome parse_nt_line(std::string_view line) {
  NtOutcome out;
  NtScanner sc(line);
  if (sc.at_end() || sc.at_comment()) {
    out.blank_line = true;
    return out;
  }
  if (std::string err = sc.parse_term(out.subject); !err.empty()) {
    out.error = "bad subject: " + err;
    return out;
  }
  if (out.subject.type == NtTerm::Type::literal) {
    out.error = "literal subject";
    return out;
  }
  if (std::string err = sc.parse_term(out.predicate); !err.empty()) {
    out.error = "bad predicate: " + err;
    return out;
  }
  if (out.predicate.type != NtTerm::Type::iri) {
    out.error = "predicate must be an IRI";
    return out;
  }
  out.have_predicate = true;
  if (std::string err = sc.parse_term(out.object); !err.empty()) {
    out.error = "bad object: " + err;
    return out;
  }
  if (!sc.consume('.')) {
    out.error = "missing terminal '.'";
    return out;
  }
  if (!sc.at_end() && !sc.at_comment()) {
    out.error = "trailing content after '.'";
    return out;
  }
  out.ok = true;
  return out;
}

inline bool is_subject_predicate(const NtTerm& p) {
  return p.type == NtTerm::Type::iri &&
         std::string_view(p.value).ends_with("/terms/subject");
}

inline bool is_broader_predicate(const NtTerm& p) {
  return p.type == NtTerm::Type::iri &&
         std::string_view(p.value).ends_with("/core#broader");
}

}  // namespace detail

/// Loads a graph from tab-separated edge dumps: each line `<child>\t<parent>`,
/// `#` comment lines and blank lines skipped. The optional labels file holds
/// `<id>\t<label>` lines.
inline CategoryGraph ingest_tsv(
    const std::filesystem::path& subject_path,
    const std::filesystem::path& broader_path,
    const std::optional<std::filesystem::path>& labels_path = std::nullopt,
    IngestStats* stats = nullptr) {
  GraphBuilder builder;
  detail::for_each_line(subject_path, [&](std::string_view line, std::size_t n) {
    if (detail::is_blank_or_comment(line)) return;
    auto [child, parent] = detail::split_tsv(line, subject_path.string(), n);
    detail::check_id_field(child, subject_path.string(), n);
    detail::check_id_field(parent, subject_path.string(), n);
    builder.add_subject_edge(std::string(child), std::string(parent));
  });
  detail::for_each_line(broader_path, [&](std::string_view line, std::size_t n) {
    if (detail::is_blank_or_comment(line)) return;
    auto [child, parent] = detail::split_tsv(line, broader_path.string(), n);
    detail::check_id_field(child, broader_path.string(), n);
    detail::check_id_field(parent, broader_path.string(), n);
    builder.add_broader_edge(std::string(child), std::string(parent));
  });
  if (labels_path) {
    detail::for_each_line(*labels_path, [&](std::string_view line, std::size_t n) {
      if (detail::is_blank_or_comment(line)) return;
      auto [id, label] = detail::split_tsv(line, labels_path->string(), n);
      detail::check_id_field(id, labels_path->string(), n);
      builder.set_label(std::string(id), std::string(label));
    });
  }
  return builder.finalize(stats);
}

/// Loads a graph from an N-Triples file, consuming only triples whose
/// predicate IRI ends in `/terms/subject` or `/core#broader`. Everything else
/// is skipped and counted. IRIs are kept verbatim (minus angle brackets) as
/// node ids. Malformed lines are a hard error only when they carry a retained
/// predicate; otherwise they bump the invalid_skipped counter.
inline CategoryGraph ingest_ntriples_subset(const std::filesystem::path& path,
                                            IngestStats* stats = nullptr) {
  GraphBuilder builder;
  std::uint64_t skipped = 0;
  std::uint64_t invalid = 0;
  detail::for_each_line(path, [&](std::string_view line, std::size_t n) {
    detail::NtOutcome t = detail::parse_nt_line(line);
    if (t.blank_line) return;
    const bool retained = t.have_predicate && (detail::is_subject_predicate(t.predicate) ||
                                               detail::is_broader_predicate(t.predicate));
    if (!t.ok) {
      if (retained) throw ParseError(path.string(), n, t.error);
      ++invalid;
      return;
    }
    if (!retained) {
      ++skipped;
      return;
    }
    if (t.subject.type != detail::NtTerm::Type::iri) {
      throw ParseError(path.string(), n, "edge subject must be an IRI");
    }
    if (t.object.type != detail::NtTerm::Type::iri) {
      throw ParseError(path.string(), n, "edge object must be an IRI");
    }
    if (detail::is_subject_predicate(t.predicate)) {
      builder.add_subject_edge(t.subject.value, t.object.value);
    } else {
      builder.add_broader_edge(t.subject.value, t.object.value);
    }
  });
  CategoryGraph g = builder.finalize(stats);
  if (stats) {
    stats->triples_skipped = skipped;
    stats->invalid_skipped = invalid;
  }
  return g;
}

}  // namespace topigen
