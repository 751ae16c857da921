#include "zoflat/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace zoflat {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------- LIBSVM parsing ----------

namespace {

bool parse_full_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size();
}

bool parse_full_int(const std::string& tok, long& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtol(begin, &end, 10);
  return end == begin + tok.size();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;  // blank line

    double label = 0.0;
    if (!parse_full_double(toks[0], label) || !std::isfinite(label)) {
      throw ParseError(lineno, "label '" + toks[0] + "' is not a finite number");
    }

    SparseRow row;
    long prev_index = 0;  // 1-based; entries must exceed this
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const std::string& tok = toks[t];
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos) {
        throw ParseError(lineno, "expected index:value, got '" + tok + "'");
      }
      long index = 0;
      if (!parse_full_int(tok.substr(0, colon), index)) {
        throw ParseError(lineno, "index '" + tok.substr(0, colon) + "' is not an integer");
      }
      if (index < 1) {
        throw ParseError(lineno, "index " + std::to_string(index) + " is below 1");
      }
      if (index <= prev_index) {
        throw ParseError(lineno, "index " + std::to_string(index) +
                                     " does not increase (previous " +
                                     std::to_string(prev_index) + ")");
      }
      double value = 0.0;
      if (!parse_full_double(tok.substr(colon + 1), value) || !std::isfinite(value)) {
        throw ParseError(lineno, "value '" + tok.substr(colon + 1) + "' is not a finite number");
      }
      row.entries.emplace_back(static_cast<int>(index - 1), value);
      prev_index = index;
      ds.max_index = std::max(ds.max_index, static_cast<int>(index - 1));
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  return ds;
}

Dataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_libsvm(in);
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out += format_double(ds.labels[i]);
    for (const auto& [index, value] : ds.rows[i].entries) {
      out += ' ';
      out += std::to_string(index + 1);
      out += ':';
      out += format_double(value);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> normalize_labels(const std::vector<double>& labels, LabelMode mode) {
  std::set<double> distinct(labels.begin(), labels.end());
  if (distinct.size() != 2) {
    throw std::invalid_argument("normalize_labels: need exactly 2 distinct labels, got " +
                                std::to_string(distinct.size()));
  }
  const double lo = *distinct.begin();
  const double lo_to = mode == LabelMode::kSvm ? -1.0 : 0.0;
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = labels[i] == lo ? lo_to : 1.0;
  }
  return out;
}

// ---------- Synthetic data ----------

SyntheticData synth_dataset(RngStream& rng, std::size_t n, int d, double margin) {
  if (n < 2) throw std::invalid_argument("synth_dataset: n must be >= 2");
  if (d < 1) throw std::invalid_argument("synth_dataset: d must be >= 1");
  if (margin < 0.0) throw std::invalid_argument("synth_dataset: margin must be >= 0");

  Vec w = rng.gaussian_vector(d);
  const double wn = norm2(w);
  if (wn > 0.0) scale(w, 1.0 / wn);
  else w[0] = 1.0;  // astronomically unlikely; keep w a unit vector

  SyntheticData out;
  out.data.max_index = d - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (i % 2 == 0) ? 1.0 : -1.0;
    Vec a = rng.gaussian_vector(d);
    const double along = dot(w, a);
    const double target = s * (margin + std::fabs(rng.next_gaussian()));
    // replace the component along w so that s * w'a = margin + |N(0,1)|
    axpy(target - along, w, a);

    SparseRow row;
    row.entries.reserve(d);
    for (int j = 0; j < d; ++j) row.entries.emplace_back(j, a[j]);
    out.data.rows.push_back(std::move(row));
    out.data.labels.push_back(s);
  }
  // w separates at functional margin >= margin; rescale so margins reach 1
  out.separator = margin > 0.0 ? scaled(w, 1.0 / margin) : w;
  return out;
}

// ---------- Random feature map ----------

RandomFeatureMap::RandomFeatureMap(std::uint64_t seed, std::size_t out_dim,
                                   std::size_t in_dim)
    : seed_(seed), out_dim_(out_dim), in_dim_(in_dim) {
  if (out_dim == 0 || in_dim == 0) {
    throw std::invalid_argument("RandomFeatureMap: dimensions must be >= 1");
  }
  RngStream stream(seed, stream_id::kFeatureMap);
  w_.resize(out_dim_ * in_dim_);
  stream.fill_gaussian(w_);  // row-major, row by row
}

FeatureMatrix RandomFeatureMap::apply(const Dataset& ds) const {
  if (ds.max_index >= static_cast<int>(in_dim_)) {
    throw std::invalid_argument("RandomFeatureMap::apply: dataset has index " +
                                std::to_string(ds.max_index) + " but map input dim is " +
                                std::to_string(in_dim_));
  }
  FeatureMatrix m;
  m.n = ds.n();
  m.dim = out_dim_;
  m.values.assign(m.n * m.dim, 0.0);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double* out_row = m.row(i);
    for (const auto& [index, value] : ds.rows[i].entries) {
      const double* col = w_.data() + index;  // stride in_dim_ down the rows
      for (std::size_t r = 0; r < out_dim_; ++r) {
        out_row[r] += col[r * in_dim_] * value;
      }
    }
  }
  return m;
}

void write_features_csv(const FeatureMatrix& m, std::ostream& out) {
  for (std::size_t j = 0; j < m.dim; ++j) {
    if (j) out << ',';
    out << 'f' << j;
  }
  out << '\n';
  for (std::size_t i = 0; i < m.n; ++i) {
    const double* row = m.row(i);
    for (std::size_t j = 0; j < m.dim; ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

}  // namespace zoflat
