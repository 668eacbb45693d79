#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace topigen {

inline constexpr std::string_view kVersion = "0.1.0";

/// A node identifier: an IRI or a compact curie such as "dbr:Pearl".
using NodeId = std::string;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be opened, read, written, or renamed.
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed input line in an edge dump. Carries file name and line number.
class ParseError : public Error {
public:
  ParseError(std::string path, std::size_t line, const std::string& msg)
      : Error(path + ":" + std::to_string(line) + ": " + msg),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

private:
  std::string path_;
  std::size_t line_;
};

/// A node would have to be both an article and a category.
class ClassificationError : public Error {
public:
  using Error::Error;
};

/// JSON-lines record violating the expected schema.
class SchemaError : public Error {
public:
  SchemaError(std::string path, std::size_t line, const std::string& msg)
      : Error(path + ":" + std::to_string(line) + ": " + msg),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

private:
  std::string path_;
  std::size_t line_;
};

/// Invalid configuration value (m < 1, kappa <= 0, k < 1, bad CLI flag combos).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// File is not a graph index at all (bad magic, truncation, corrupt counts).
class IndexFormatError : public Error {
public:
  using Error::Error;
};

/// File is a graph index written by an incompatible format version.
class IndexVersionError : public Error {
public:
  using Error::Error;
};

/// Network-level failure talking to the annotation service.
class TransportError : public Error {
public:
  using Error::Error;
};

/// The annotation service answered with something unparseable.
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// Inputs that must agree with each other do not (e.g. a cluster referencing
/// a topic that is missing from the profile it was derived from).
class IntegrityError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

/// Display fallback for nodes without a stored label: the substring after the
/// last '/' or ':' with underscores turned into spaces. "dbc:Precious_stones"
/// becomes "Precious stones".
inline std::string local_name(const NodeId& id) {
  const std::size_t cut = id.find_last_of("/:");
  std::string name;
  if (cut == std::string::npos || cut + 1 >= id.size()) {
    name = id;
  } else {
    name = id.substr(cut + 1);
  }
  for (char& ch : name) {
    if (ch == '_') ch = ' ';
  }
  return name;
}

/// ASCII-only lower-casing; locale-independent by construction.
inline std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return ss.str();
}

/// Writes via a sibling .tmp file and renames into place, so a failed run
/// never leaves a partial file at the target path.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error while writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

}  // namespace topigen
