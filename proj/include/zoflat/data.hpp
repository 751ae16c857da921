#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zoflat/rng.hpp"
#include "zoflat/vec.hpp"

namespace zoflat {

// One sparse sample: (index, value) pairs with strictly increasing 0-based
// indices. Files use the LIBSVM convention (1-based); the shift happens at
// parse/serialize time only.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;
};

struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;  // as parsed; normalize_labels maps to a model alphabet
  int max_index = -1;          // largest 0-based index seen; -1 when no entries

  std::size_t n() const { return rows.size(); }
  int raw_dim() const { return max_index + 1; }
};

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}
  int line;
};

// Grammar per line: label (ws index ":" value)*, indices 1-based strictly
// increasing. Blank lines are ignored. Violations throw ParseError with the
// 1-based line number.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_file(const std::string& path);

// Canonical form: minimal round-trippable floats (17 significant digits),
// single spaces, LF endings. parse(serialize(ds)) == ds exactly.
std::string serialize_libsvm(const Dataset& ds);

enum class LabelMode { kSvm, kLogistic };

// Pure relabeling: the dataset must carry exactly two distinct label values;
// the smaller maps to -1 (SVM) or 0 (logistic), the larger to +1 or 1.
std::vector<double> normalize_labels(const std::vector<double>& labels, LabelMode mode);

struct SyntheticData {
  Dataset data;
  Vec separator;  // x* with label * (x*'a) >= 1 for every row when margin > 0
};

// Gaussian features split against a random unit separator w; row i gets the
// alternating label s_i = +/-1 and its component along w is forced to
// s_i * (margin + |N(0,1)|), so the functional margin is at least `margin`
// and both classes are always populated for n >= 2.
SyntheticData synth_dataset(RngStream& rng, std::size_t n, int d, double margin);

struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // row-major n x dim

  double* row(std::size_t i) { return values.data() + i * dim; }
  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

// phi(a) = W a with W entries ~ N(0,1), filled row by row from
// (seed, stream_id::kFeatureMap) so the matrix is reconstructible from the
// seed alone and never needs to be persisted.
class RandomFeatureMap {
 public:
  RandomFeatureMap(std::uint64_t seed, std::size_t out_dim, std::size_t in_dim);

  std::size_t out_dim() const { return out_dim_; }
  std::size_t in_dim() const { return in_dim_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& matrix() const { return w_; }

  FeatureMatrix apply(const Dataset& ds) const;

 private:
  std::uint64_t seed_;
  std::size_t out_dim_, in_dim_;
  std::vector<double> w_;  // row-major out_dim x in_dim
};

// Debugging aid: header f0..f{dim-1}, comma separated, LF endings, full
// float precision.
void write_features_csv(const FeatureMatrix& m, std::ostream& out);

// Shortest decimal form that round-trips the double (printf %.17g).
std::string format_double(double v);

}  // namespace zoflat
