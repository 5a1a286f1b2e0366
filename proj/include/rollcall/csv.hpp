#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rollcall/errors.hpp"

namespace rollcall {

// Minimal RFC-4180 subset: comma separator, double-quote escaping, LF or CRLF.

inline std::vector<std::string> split_csv_line(const std::string& line, size_t lineno,
                                               const std::string& where) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty())
        throw ParseError(where + ":" + std::to_string(lineno) + ": stray quote");
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(where + ":" + std::to_string(lineno) + ": unterminated quote");
  out.push_back(cur);
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  size_t lineno = 0;

  explicit CsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw ParseError(path + ": cannot open");
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields = split_csv_line(line, lineno, path);
    return true;
  }

  void expect_header(const std::vector<std::string>& want) {
    std::vector<std::string> got;
    if (!next(got) || got != want) {
      std::string w;
      for (size_t i = 0; i < want.size(); ++i) w += (i ? "," : "") + want[i];
      throw ParseError(path + ":1: expected header '" + w + "'");
    }
  }
};

}  // namespace rollcall
