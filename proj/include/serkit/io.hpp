#pragma once

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "serkit/eval.hpp"
#include "serkit/types.hpp"

namespace serkit::io {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  require(res.ec == std::errc() && res.ptr == last, ErrorKind::BadInput, "not a number: '" + s + "' (" + where + ")");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::BadInput, "'" + path + "' is empty");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto row = split_csv_line(line);
    require(row.size() == t.header.size(), ErrorKind::BadInput,
            path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

/// Sorted distinct label strings, or the given class list after checking
/// every label belongs to it.
inline std::vector<int> encode_labels(const std::vector<std::string>& names, std::vector<std::string>& classes) {
  if (classes.empty()) {
    const std::set<std::string> distinct(names.begin(), names.end());
    classes.assign(distinct.begin(), distinct.end());
  }
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < classes.size(); ++c) index[classes[c]] = static_cast<int>(c);
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    const auto it = index.find(n);
    require(it != index.end(), ErrorKind::BadInput, "unknown class label '" + n + "'");
    out.push_back(it->second);
  }
  return out;
}

// Feature matrices: one row per sample, trailing speaker and label columns.

inline void write_features(const std::string& path, const FeatureMatrix& fm) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < fm.dims(); ++j)
    out << csv_field(j < static_cast<Eigen::Index>(fm.feature_names.size()) ? fm.feature_names[static_cast<std::size_t>(j)]
                                                                           : "f" + std::to_string(j))
        << ',';
  out << "speaker,label\n";
  for (Eigen::Index i = 0; i < fm.samples(); ++i) {
    for (Eigen::Index j = 0; j < fm.dims(); ++j) out << format_double(fm.X(i, j)) << ',';
    const auto r = static_cast<std::size_t>(i);
    out << csv_field(r < fm.speakers.size() ? fm.speakers[r] : "") << ','
        << csv_field(fm.class_names[static_cast<std::size_t>(fm.labels[r])]) << '\n';
  }
}

inline FeatureMatrix read_features(const std::string& path, std::vector<std::string> class_names = {}) {
  const auto t = read_csv(path);
  const auto n = t.header.size();
  require(n >= 3 && t.header[n - 2] == "speaker" && t.header[n - 1] == "label", ErrorKind::BadInput,
          "'" + path + "' must end with speaker,label columns and hold at least one feature");
  require(!t.rows.empty(), ErrorKind::BadInput, "'" + path + "' has no rows");
  FeatureMatrix fm;
  fm.feature_names.assign(t.header.begin(), t.header.end() - 2);
  fm.X.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(n - 2));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j + 2 < n; ++j)
      fm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_double(t.rows[i][j], path + " row " + std::to_string(i + 1));
    fm.speakers.push_back(t.rows[i][n - 2]);
    names.push_back(t.rows[i][n - 1]);
  }
  fm.class_names = std::move(class_names);
  fm.labels = encode_labels(names, fm.class_names);
  return fm;
}

// Frame-level features: leading utterance id, then one row per frame.

struct Utterance {
  std::string id, speaker, label;
  FrameFeatures frames;
};

inline void write_frames(const std::string& path, const std::vector<Utterance>& utts) {
  require(!utts.empty(), ErrorKind::BadInput, "no utterances to write");
  const auto& labels = utts.front().frames.dim_labels;
  auto out = open_out(path);
  out << "utt";
  for (Eigen::Index d = 0; d < utts.front().frames.dims(); ++d)
    out << ',' << csv_field(d < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(d)]
                                                                         : "d" + std::to_string(d));
  out << ",speaker,label\n";
  for (const auto& u : utts) {
    require(u.frames.dims() == utts.front().frames.dims(), ErrorKind::BadInput, "utterances differ in dimension");
    for (Eigen::Index t = 0; t < u.frames.frames(); ++t) {
      out << csv_field(u.id);
      for (Eigen::Index d = 0; d < u.frames.dims(); ++d) out << ',' << format_double(u.frames.values(d, t));
      out << ',' << csv_field(u.speaker) << ',' << csv_field(u.label) << '\n';
    }
  }
}

/// Groups consecutive-or-not rows by utterance id, keeping first-appearance order.
inline std::vector<Utterance> read_frames(const std::string& path) {
  const auto t = read_csv(path);
  const auto n = t.header.size();
  require(n >= 4 && t.header.front() == "utt" && t.header[n - 2] == "speaker" && t.header[n - 1] == "label",
          ErrorKind::BadInput, "'" + path + "' must have columns utt,<features...>,speaker,label");
  const std::vector<std::string> dim_labels(t.header.begin() + 1, t.header.end() - 2);
  std::vector<Utterance> utts;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::vector<double>>> columns;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    auto [it, inserted] = index.try_emplace(row[0], utts.size());
    if (inserted) {
      utts.push_back({row[0], row[n - 2], row[n - 1], {}});
      columns.emplace_back();
    }
    auto& u = utts[it->second];
    require(u.speaker == row[n - 2] && u.label == row[n - 1], ErrorKind::BadInput,
            "utterance '" + u.id + "' changes speaker or label between frames");
    std::vector<double> frame(dim_labels.size());
    for (std::size_t d = 0; d < dim_labels.size(); ++d)
      frame[d] = parse_double(row[d + 1], path + " row " + std::to_string(i + 1));
    columns[it->second].push_back(std::move(frame));
  }
  for (std::size_t k = 0; k < utts.size(); ++k) {
    auto& ff = utts[k].frames;
    ff.dim_labels = dim_labels;
    ff.values.resize(static_cast<Eigen::Index>(dim_labels.size()), static_cast<Eigen::Index>(columns[k].size()));
    for (std::size_t t2 = 0; t2 < columns[k].size(); ++t2)
      for (std::size_t d = 0; d < dim_labels.size(); ++d)
        ff.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t2)) = columns[k][t2][d];
  }
  return utts;
}

// Manifests ----------------------------------------------------------------------------

struct ManifestEntry {
  std::string path, speaker;
  int label = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;

  std::vector<std::string> speakers() const {
    std::vector<std::string> s;
    for (const auto& e : entries) s.push_back(e.speaker);
    return s;
  }
};

/// Reads `path,speaker,label`; relative audio paths resolve against the
/// manifest's directory.
inline Manifest read_manifest(const std::string& path) {
  CsvTable t;
  try {
    t = read_csv(path);
  } catch (const Error& e) {
    throw Error(e.kind() == ErrorKind::Io ? ErrorKind::Io : ErrorKind::BadManifest, e.what());
  }
  const auto pc = t.column("path"), sc = t.column("speaker"), lc = t.column("label");
  require(pc >= 0 && sc >= 0 && lc >= 0, ErrorKind::BadManifest, "manifest header must contain path,speaker,label");
  require(!t.rows.empty(), ErrorKind::BadManifest, "manifest has no entries");
  const auto base = std::filesystem::path(path).parent_path();
  Manifest m;
  std::vector<std::string> names;
  for (const auto& row : t.rows) {
    require(!row[static_cast<std::size_t>(sc)].empty(), ErrorKind::BadManifest, "empty speaker id in manifest");
    require(!row[static_cast<std::size_t>(lc)].empty(), ErrorKind::BadManifest, "empty label in manifest");
    std::filesystem::path p = row[static_cast<std::size_t>(pc)];
    if (p.is_relative()) p = base / p;
    m.entries.push_back({p.lexically_normal().string(), row[static_cast<std::size_t>(sc)], 0});
    names.push_back(row[static_cast<std::size_t>(lc)]);
  }
  const auto labels = encode_labels(names, m.class_names);
  for (std::size_t i = 0; i < labels.size(); ++i) m.entries[i].label = labels[i];
  return m;
}

// JSON -------------------------------------------------------------------------------

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, "'" + path + "': " + e.what());
  }
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline nlohmann::json report_to_json(const eval::EvalReport& r, const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["samples"] = r.samples;
  j["war"] = round4(r.war);
  j["uar"] = round4(r.uar);
  j["gmean"] = round4(r.gmean);
  j["ir"] = round4(r.ir);
  j["classes"] = class_names;
  nlohmann::json conf = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) row.push_back(static_cast<long long>(r.confusion(i, k)));
    conf.push_back(std::move(row));
  }
  j["confusion"] = std::move(conf);
  nlohmann::json recalls = nlohmann::json::array();
  for (double v : r.recalls) recalls.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(round4(v)));
  j["recalls"] = std::move(recalls);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [key, value] : r.per_pair_errors) {
    auto name = [&](int c) { return static_cast<std::size_t>(c) < class_names.size() ? class_names[static_cast<std::size_t>(c)] : std::to_string(c); };
    pairs.push_back({{"true", name(key.first)},
                     {"predicted", name(key.second)},
                     {"error", value ? nlohmann::json(round4(*value)) : nlohmann::json("undefined")}});
  }
  j["per_pair_errors"] = std::move(pairs);
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace serkit::io
