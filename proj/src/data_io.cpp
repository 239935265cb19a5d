#include "dualkpca/data_io.hpp"

#include "dualkpca/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace dualkpca {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  template <class T>
  void value(T v) {
    bytes(&v, sizeof(v));
  }
};

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

Dataset::Dataset(DenseRows values, std::optional<std::vector<double>> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  const auto& v = std::get<DenseRows>(values_);
  n_ = static_cast<std::size_t>(v.rows());
  d_ = static_cast<std::size_t>(v.cols());
  if (n_ == 0 || d_ == 0) throw DataError("empty dataset");
  if (labels_ && labels_->size() != n_) throw DataError("label count does not match rows");
}

Dataset::Dataset(SparseRows values, std::optional<std::vector<double>> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  auto& v = std::get<SparseRows>(values_);
  v.makeCompressed();
  n_ = static_cast<std::size_t>(v.rows());
  d_ = static_cast<std::size_t>(v.cols());
  if (n_ == 0 || d_ == 0) throw DataError("empty dataset");
  if (labels_ && labels_->size() != n_) throw DataError("label count does not match rows");
}

const DenseRows& Dataset::dense() const {
  if (is_sparse()) throw DataError("dataset is sparse");
  return std::get<DenseRows>(values_);
}

const SparseRows& Dataset::sparse() const {
  if (!is_sparse()) throw DataError("dataset is dense");
  return std::get<SparseRows>(values_);
}

DenseRows Dataset::to_dense() const {
  if (is_sparse()) return DenseRows(sparse());
  return dense();
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  std::optional<std::vector<double>> lab;
  if (labels_) {
    lab.emplace();
    for (auto r : rows) lab->push_back(labels_->at(r));
  }
  if (is_sparse()) {
    const auto& s = sparse();
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (SparseRows::InnerIterator it(s, static_cast<Eigen::Index>(rows[k])); it; ++it)
        trip.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), it.value());
    }
    SparseRows out(static_cast<Eigen::Index>(rows.size()), s.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return Dataset(std::move(out), std::move(lab));
  }
  const auto& m = dense();
  DenseRows out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows.at(k)));
  return Dataset(std::move(out), std::move(lab));
}

std::uint64_t Dataset::fingerprint() const {
  Fnv1a f;
  f.value<std::uint64_t>(n_);
  f.value<std::uint64_t>(d_);
  if (is_sparse()) {
    const auto& s = sparse();
    for (Eigen::Index r = 0; r < s.outerSize(); ++r)
      for (SparseRows::InnerIterator it(s, r); it; ++it) {
        if (it.value() == 0.0) continue;
        f.value<std::uint64_t>(static_cast<std::uint64_t>(r));
        f.value<std::uint64_t>(static_cast<std::uint64_t>(it.col()));
        f.value(it.value());
      }
  } else {
    const auto& m = dense();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) == 0.0) continue;
        f.value<std::uint64_t>(static_cast<std::uint64_t>(r));
        f.value<std::uint64_t>(static_cast<std::uint64_t>(c));
        f.value(m(r, c));
      }
  }
  return f.h;
}

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> d_override) {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t lineno = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = trim(body.substr(0, hash));
    if (body.empty()) continue;

    std::istringstream tokens{std::string(body)};
    std::string tok;
    tokens >> tok;
    auto label = to_double(tok);
    if (!label) throw ParseError("malformed label '" + tok + "'", lineno);
    labels.push_back(*label);

    std::size_t prev = 0;
    while (tokens >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("malformed token '" + tok + "'", lineno);
      std::size_t idx = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || p != tok.data() + colon || idx == 0)
        throw ParseError("malformed index in '" + tok + "'", lineno);
      auto val = to_double(std::string_view(tok).substr(colon + 1));
      if (!val) throw ParseError("non-numeric value in '" + tok + "'", lineno);
      if (idx <= prev) throw ParseError("non-ascending index " + std::to_string(idx), lineno);
      if (d_override && idx > *d_override)
        throw ParseError("index " + std::to_string(idx) + " exceeds dimension", lineno);
      prev = idx;
      max_index = std::max(max_index, idx);
      trip.emplace_back(static_cast<int>(row), static_cast<int>(idx - 1), *val);
    }
    ++row;
  }
  if (row == 0) throw DataError("empty dataset");
  std::size_t d = d_override.value_or(max_index);
  if (d == 0) throw DataError("dataset has no features");
  SparseRows m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  m.setFromTriplets(trip.begin(), trip.end());
  return Dataset(std::move(m), std::move(labels));
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<std::size_t> d_override) {
  auto in = open_or_throw(path);
  return parse_libsvm(in, d_override);
}

void serialize_libsvm(const Dataset& data, std::ostream& out) {
  out << std::setprecision(17);
  const auto& labels = data.labels();
  auto emit = [&](std::size_t r, auto&& entries) {
    out << (labels ? (*labels)[r] : 0.0);
    entries();
    out << '\n';
  };
  if (data.is_sparse()) {
    const auto& s = data.sparse();
    for (Eigen::Index r = 0; r < s.outerSize(); ++r)
      emit(static_cast<std::size_t>(r), [&] {
        for (SparseRows::InnerIterator it(s, r); it; ++it) out << ' ' << it.col() + 1 << ':' << it.value();
      });
  } else {
    const auto& m = data.dense();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      emit(static_cast<std::size_t>(r), [&] {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          if (m(r, c) != 0.0) out << ' ' << c + 1 << ':' << m(r, c);
      });
  }
}

Dataset parse_csv(std::istream& in, std::optional<std::string> label_column) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (rows.empty() && header.empty()) {
      bool numeric = std::all_of(cells.begin(), cells.end(), [](auto c) { return to_double(c).has_value(); });
      if (!numeric) {
        for (auto c : cells) header.emplace_back(trim(c));
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError("ragged row: expected " + std::to_string(width) + " cells, got " +
                           std::to_string(cells.size()),
                       lineno);
    std::vector<double> values;
    values.reserve(cells.size());
    for (auto c : cells) {
      auto v = to_double(c);
      if (!v) throw ParseError("non-numeric cell '" + std::string(trim(c)) + "'", lineno);
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("empty dataset");

  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it != header.end()) {
      label_idx = static_cast<std::size_t>(it - header.begin());
    } else {
      std::size_t idx = 0;
      auto [p, ec] = std::from_chars(label_column->data(), label_column->data() + label_column->size(), idx);
      if (ec != std::errc() || p != label_column->data() + label_column->size() || idx >= width)
        throw DataError("unknown label column '" + *label_column + "'");
      label_idx = idx;
    }
  }
  std::size_t d = width - (label_idx ? 1 : 0);
  if (d == 0) throw DataError("dataset has no features");
  DenseRows m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  std::optional<std::vector<double>> labels;
  if (label_idx) labels.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index c = 0;
    for (std::size_t k = 0; k < width; ++k) {
      if (label_idx && k == *label_idx) {
        labels->push_back(rows[r][k]);
        continue;
      }
      m(static_cast<Eigen::Index>(r), c++) = rows[r][k];
    }
  }
  return Dataset(std::move(m), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, std::optional<std::string> label_column) {
  auto in = open_or_throw(path);
  return parse_csv(in, std::move(label_column));
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  auto data = parse_csv(in);
  return data.dense();
}

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out, const std::string& column_prefix) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c) buf << (c ? "," : "") << column_prefix << c + 1;
  buf << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) buf << ',';
      buf << m(r, c);
    }
    buf << '\n';
  }
  out << buf.str();
}

Dataset gen_synth_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw UsageError("gen_synth_gaussian: n and d must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseRows x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = normal(rng);
  return Dataset(std::move(x));
}

Dataset gen_iris_like(std::uint64_t seed, std::size_t per_class) {
  if (per_class == 0) throw UsageError("gen_iris_like: per_class must be positive");
  // Sepal length, sepal width, petal length, petal width.
  static constexpr double kMean[3][4] = {
      {5.006, 3.428, 1.462, 0.246}, {5.936, 2.770, 4.260, 1.326}, {6.588, 2.974, 5.552, 2.026}};
  static constexpr double kStd[3][4] = {
      {0.352, 0.379, 0.174, 0.105}, {0.516, 0.314, 0.470, 0.198}, {0.636, 0.322, 0.552, 0.275}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto m = static_cast<Eigen::Index>(per_class);
  DenseRows x(3 * m, 4);
  std::vector<double> labels(static_cast<std::size_t>(3 * m));
  for (int k = 0; k < 3; ++k)
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index r = k * m + i;
      for (int c = 0; c < 4; ++c) x(r, c) = std::max(0.05, kMean[k][c] + kStd[k][c] * normal(rng));
      labels[static_cast<std::size_t>(r)] = k;
    }
  return Dataset(std::move(x), std::move(labels));
}

Eigen::MatrixXd random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) a(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Eigen::MatrixXd gen_controlled_spectrum_gram(std::size_t n, double c, std::uint64_t seed) {
  if (n == 0) throw UsageError("gen_controlled_spectrum_gram: n must be positive");
  if (!(c >= 0.0)) throw UsageError("gen_controlled_spectrum_gram: c must be nonnegative");
  const auto dim = static_cast<Eigen::Index>(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col)
    for (Eigen::Index r = 0; r < dim; ++r) x(r, col) = normal(rng);
  // Separate stream for U so that changing c never changes the noise.
  Eigen::MatrixXd u = random_orthogonal(n, seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd diag(dim);
  for (Eigen::Index i = 0; i < dim; ++i) diag(i) = std::exp(-c * static_cast<double>(i + 1));
  Eigen::MatrixXd g = u * diag.asDiagonal() * u.transpose();
  g += 0.01 * (x + x.transpose());
  // Exact symmetry: mirror the upper triangle.
  g.triangularView<Eigen::StrictlyLower>() = g.transpose();
  return g;
}

Contamination contaminate(const Dataset& data, double omega, double tau, std::uint64_t seed) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw UsageError("contaminate: omega must lie in [0,1]");
  if (!(tau > 0.0)) throw UsageError("contaminate: tau must be positive");
  const std::size_t n = data.n();
  const auto count = static_cast<std::size_t>(std::floor(omega * static_cast<double>(n)));

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::size_t> rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(rows.begin(), rows.end());

  std::normal_distribution<double> noise(0.0, tau);
  std::vector<double> mult(count);
  for (auto& b : mult) b = noise(rng);

  if (data.is_sparse()) {
    SparseRows s = data.sparse();
    for (std::size_t k = 0; k < count; ++k)
      for (SparseRows::InnerIterator it(s, static_cast<Eigen::Index>(rows[k])); it; ++it)
        it.valueRef() *= mult[k];
    return {Dataset(std::move(s), data.labels()), std::move(rows), std::move(mult)};
  }
  DenseRows m = data.dense();
  for (std::size_t k = 0; k < count; ++k) m.row(static_cast<Eigen::Index>(rows[k])) *= mult[k];
  return {Dataset(std::move(m), data.labels()), std::move(rows), std::move(mult)};
}

Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("train_test_split: test fraction must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::map<double, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < data.n(); ++i)
    strata[data.labels() ? (*data.labels())[i] : 0.0].push_back(i);

  Split split;
  for (auto& [label, members] : strata) {
    std::shuffle(members.begin(), members.end(), rng);
    auto n_test = static_cast<std::size_t>(std::round(test_fraction * static_cast<double>(members.size())));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (split.train.empty() || split.test.empty()) throw DataError("split produced an empty side");
  return split;
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& format,
                     std::optional<std::string> label_column) {
  if (format == "libsvm") return load_libsvm(path);
  if (format == "csv") return load_csv(path, std::move(label_column));
  throw UsageError("unsupported dataset format '" + format + "'");
}

}  // namespace dualkpca
