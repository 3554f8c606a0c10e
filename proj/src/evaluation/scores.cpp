#include "mcpad/evaluation/scores.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"

namespace mcpad::evaluation {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

// Embedding values are float32; parsing straight to float keeps the round trip exact.
float parse_float(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const float v = std::stof(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

std::string fmt(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

void write_meta(std::ostream& out, const ScoreRow& r) {
  if (r.sample_id.find_first_of(",\n") != std::string::npos) {
    throw EvaluationError("sample id contains a separator: " + r.sample_id);
  }
  out << r.sample_id << ',' << dataset::label_name(r.label) << ',';
  if (r.attack_type) out << dataset::attack_type_name(*r.attack_type);
}

ScoreRow read_meta(const std::vector<std::string>& f, const std::string& where) {
  ScoreRow r;
  r.sample_id = f[0];
  const auto label = dataset::parse_label(f[1]);
  if (!label) throw ParseError(where + ": bad label '" + f[1] + "'");
  r.label = *label;
  if (!f[2].empty()) {
    r.attack_type = dataset::parse_attack_type(f[2]);
    if (!r.attack_type) throw ParseError(where + ": bad attack_type '" + f[2] + "'");
  }
  if ((r.label == Label::Attack) != r.attack_type.has_value()) {
    throw ParseError(where + ": attack_type must be set iff label is attack");
  }
  return r;
}

}  // namespace

std::string scores_to_csv(const ScoreFile& scores) {
  std::ostringstream out;
  out << "sample_id,label,attack_type,score\n";
  for (const auto& r : scores.rows) {
    if (!std::isfinite(r.score)) throw EvaluationError("non-finite score for " + r.sample_id);
    write_meta(out, r);
    out << ',' << fmt(r.score, 17) << '\n';
  }
  return out.str();
}

ScoreFile scores_from_csv(const std::string& text, const std::string& fold) {
  ScoreFile sf;
  sf.fold = fold;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line) != std::vector<std::string>{"sample_id", "label", "attack_type", "score"}) {
    throw ParseError("score file: bad header");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    const std::string where = "score file line " + std::to_string(lineno);
    if (f.size() != 4) throw ParseError(where + ": expected 4 fields");
    ScoreRow r = read_meta(f, where);
    r.score = parse_double(f[3], where);
    if (!std::isfinite(r.score)) throw ParseError(where + ": non-finite score");
    sf.rows.push_back(std::move(r));
  }
  return sf;
}

void save_scores(const std::string& path, const ScoreFile& scores) {
  binio::write_file(path, scores_to_csv(scores));
}

ScoreFile load_scores(const std::string& path, const std::string& fold) {
  return scores_from_csv(binio::read_file(path), fold);
}

void save_embeddings(const std::string& path, const EmbeddingTable& table) {
  if (static_cast<Eigen::Index>(table.meta.size()) != table.features.rows()) {
    throw EvaluationError("embedding table rows and metadata differ");
  }
  std::ostringstream out;
  out << "sample_id,label,attack_type";
  for (int k = 0; k < table.dim(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < table.meta.size(); ++i) {
    write_meta(out, table.meta[i]);
    for (int k = 0; k < table.dim(); ++k) {
      out << ',' << fmt(table.features(static_cast<Eigen::Index>(i), k), 9);
    }
    out << '\n';
  }
  binio::write_file(path, out.str());
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::istringstream in(binio::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty embedding file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label" ||
      header[2] != "attack_type") {
    throw ParseError(path + ": bad header");
  }
  const std::size_t dim = header.size() - 3;
  std::vector<ScoreRow> meta;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    const std::string where = path + " line " + std::to_string(lineno);
    if (f.size() != dim + 3) throw ParseError(where + ": wrong field count");
    meta.push_back(read_meta(f, where));
    for (std::size_t k = 0; k < dim; ++k) values.push_back(parse_float(f[k + 3], where));
  }
  EmbeddingTable t;
  t.meta = std::move(meta);
  t.features.resize(static_cast<Eigen::Index>(t.meta.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < t.meta.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      t.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * dim + k];
    }
  }
  return t;
}

}  // namespace mcpad::evaluation
