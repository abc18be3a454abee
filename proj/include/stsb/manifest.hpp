// stsb/manifest.hpp

// Copyright 2026  The stsb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef STSB_MANIFEST_HPP
#define STSB_MANIFEST_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stsb/error.hpp"
#include "stsb/types.hpp"

namespace stsb {

inline constexpr const char *kManifestHeader = "path,speaker_id,block_id,word_id,intelligibility";

struct ManifestRow {
  std::string path;  // as written; relative paths resolve against the manifest's directory
  UtteranceMeta meta;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

inline std::vector<ManifestRow> parse_manifest(std::istream &in, const std::string &name = "manifest") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Format, name + " is empty");
  line = detail::strip_cr(line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  require(line == kManifestHeader, ErrorKind::Format,
          name + ": expected header '" + kManifestHeader + "'");
  std::vector<ManifestRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 5, ErrorKind::Format,
            name + ":" + std::to_string(lineno) + ": expected 5 fields");
    auto g = parse_intelligibility(f[4]);
    require(g.has_value(), ErrorKind::Format,
            name + ":" + std::to_string(lineno) + ": intelligibility must be one of VL,L,M,H,CTL");
    rows.push_back({f[0], {f[1], f[2], f[3], *g}});
  }
  return rows;
}

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  return parse_manifest(in, path.string());
}

inline std::string format_manifest(const std::vector<ManifestRow> &rows) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto &r : rows)
    out << detail::csv_field(r.path) << ',' << detail::csv_field(r.meta.speaker_id) << ','
        << detail::csv_field(r.meta.block_id) << ',' << detail::csv_field(r.meta.word_id) << ','
        << to_string(r.meta.intelligibility) << '\n';
  return out.str();
}

inline void write_manifest(const std::filesystem::path &path, const std::vector<ManifestRow> &rows) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << format_manifest(rows);
}

inline std::filesystem::path resolve_row_path(const std::filesystem::path &manifest_path,
                                              const ManifestRow &row) {
  std::filesystem::path p(row.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace stsb

#endif  // STSB_MANIFEST_HPP
