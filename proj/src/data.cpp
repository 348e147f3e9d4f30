#include "distrack/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "distrack/error.hpp"

namespace distrack {

double ElementStream::max_weight() const {
  return weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
}

double ElementStream::total_weight() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

void RowStream::push(const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (dim == 0) dim = static_cast<std::size_t>(r.size());
  require(static_cast<std::size_t>(r.size()) == dim, "row dimension mismatch");
  values.insert(values.end(), r.data(), r.data() + r.size());
}

double RowStream::max_norm_sq() const {
  double b = 0.0;
  for (std::size_t i = 0; i < size(); ++i) b = std::max(b, row(i).squaredNorm());
  return b;
}

std::size_t RowStream::light_rows() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (row(i).squaredNorm() < 1.0) ++n;
  return n;
}

Eigen::MatrixXd RowStream::to_matrix() const {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < size(); ++i) a.row(static_cast<Eigen::Index>(i)) = row(i).transpose();
  return a;
}

// ---------------------------------------------------------------- Zipf

void validate(const ZipfConfig& cfg) {
  require(cfg.universe >= 1, "zipf universe must be at least 1");
  require(cfg.universe <= 100'000'000, "zipf universe too large");
  require(cfg.skew > 0.0 && std::isfinite(cfg.skew), "zipf skew must be positive");
  require(cfg.beta >= 1.0 && std::isfinite(cfg.beta), "beta must be at least 1");
}

namespace {

std::vector<double> zipf_cdf(std::size_t universe, double skew) {
  std::vector<double> cdf(universe);
  double acc = 0.0;
  for (std::size_t k = 1; k <= universe; ++k) {
    acc += std::pow(static_cast<double>(k), -skew);
    cdf[k - 1] = acc;
  }
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

double zipf_probability(std::size_t k, std::size_t universe, double skew) {
  require(k >= 1 && k <= universe, "element outside zipf universe");
  double z = 0.0;
  for (std::size_t i = universe; i >= 1; --i) z += std::pow(static_cast<double>(i), -skew);
  return std::pow(static_cast<double>(k), -skew) / z;
}

ElementStream gen_zipfian(const ZipfConfig& cfg) {
  validate(cfg);
  const auto cdf = zipf_cdf(cfg.universe, cfg.skew);
  Rng rng(mix_seed(cfg.seed, 1));
  ElementStream s;
  s.elements.reserve(cfg.n);
  s.weights.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double u = uniform_open01(rng);
    const auto k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const double w = 1.0 + (cfg.beta - 1.0) * uniform_open01(rng);
    s.push(static_cast<ElementId>(std::min(k, cfg.universe - 1) + 1), std::min(w, cfg.beta));
  }
  return s;
}

// ---------------------------------------------------------------- matrices

std::string_view to_string(MatrixKind k) {
  switch (k) {
    case MatrixKind::LowRank: return "lowrank";
    case MatrixKind::HighRank: return "highrank";
    case MatrixKind::Arc: return "arc";
  }
  return "?";
}

MatrixKind parse_matrix_kind(std::string_view name) {
  if (name == "lowrank") return MatrixKind::LowRank;
  if (name == "highrank") return MatrixKind::HighRank;
  if (name == "arc") return MatrixKind::Arc;
  fail(ErrorCode::InvalidArgument, "unknown matrix kind '" + std::string(name) + "'");
}

void validate(const MatrixSynthConfig& cfg) {
  require(cfg.dim >= 1, "matrix dimension must be positive");
  require(cfg.kind != MatrixKind::Arc || cfg.dim >= 2, "arc matrices need dimension >= 2");
  require(cfg.kind != MatrixKind::LowRank || (cfg.rank >= 1 && cfg.rank <= cfg.dim),
          "rank must lie in [1, d]");
  require(cfg.noise >= 0.0 && std::isfinite(cfg.noise), "noise must be non-negative");
  require(cfg.arc_degrees >= 0.0 && cfg.arc_degrees <= 90.0, "arc must lie in [0, 90] degrees");
}

RowStream synth_matrix(const MatrixSynthConfig& cfg) {
  validate(cfg);
  Rng rng(mix_seed(cfg.seed, 2));
  std::normal_distribution<double> gauss;
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  RowStream s;
  s.dim = cfg.dim;
  s.values.reserve(cfg.n * cfg.dim);
  Eigen::VectorXd row(d);

  switch (cfg.kind) {
    case MatrixKind::LowRank: {
      const auto k = static_cast<Eigen::Index>(cfg.rank);
      Eigen::MatrixXd g(d, k);
      for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = gauss(rng);
      const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                                    Eigen::MatrixXd::Identity(d, k);
      Eigen::VectorXd scale(k);
      for (Eigen::Index j = 0; j < k; ++j) scale(j) = 2.0 / std::sqrt(1.0 + 0.25 * static_cast<double>(j));
      Eigen::VectorXd coef(k);
      for (std::size_t n = 0; n < cfg.n; ++n) {
        for (Eigen::Index j = 0; j < k; ++j) coef(j) = scale(j) * gauss(rng);
        row.noalias() = basis * coef;
        for (Eigen::Index i = 0; i < d; ++i) row(i) += cfg.noise * gauss(rng);
        s.push(row);
      }
      break;
    }
    case MatrixKind::HighRank: {
      Eigen::VectorXd scale(d);
      for (Eigen::Index i = 0; i < d; ++i)
        scale(i) = 1.0 / std::sqrt(1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(d));
      for (std::size_t n = 0; n < cfg.n; ++n) {
        for (Eigen::Index i = 0; i < d; ++i) row(i) = scale(i) * gauss(rng);
        s.push(row);
      }
      break;
    }
    case MatrixKind::Arc: {
      const double half = cfg.arc_degrees * std::numbers::pi / 360.0;
      for (std::size_t n = 0; n < cfg.n; ++n) {
        const double theta = std::numbers::pi / 4.0 + half * (2.0 * uniform_open01(rng) - 1.0);
        const double norm = std::sqrt(1.0 + 9.0 * uniform_open01(rng));
        row.setZero();
        row(0) = norm * std::cos(theta);
        row(1) = norm * std::sin(theta);
        for (Eigen::Index i = 2; i < d; ++i) row(i) = cfg.noise * gauss(rng);
        s.push(row);
      }
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view f) {
  while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
  while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  return f;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorCode::Parse, source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view f, const std::string& source, std::size_t line) {
  f = trim(f);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
    parse_error(source, line, "non-numeric field '" + std::string(f) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view f, const std::string& source, std::size_t line,
                         const char* what) {
  f = trim(f);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
    parse_error(source, line, std::string("bad ") + what + " '" + std::string(f) + "'");
  return v;
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

ElementStream read_element_csv(std::istream& in, const CsvOptions& opts, const std::string& source) {
  ElementStream s;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && opts.header) continue;
    if (blank(line)) continue;
    auto fields = split_fields(line);
    if (!opts.columns.empty()) {
      std::vector<std::string_view> picked;
      for (std::size_t c : opts.columns) {
        if (c >= fields.size()) parse_error(source, lineno, "column " + std::to_string(c) + " missing");
        picked.push_back(fields[c]);
      }
      fields.swap(picked);
    }
    if (fields.size() < 2 || fields.size() > 3)
      parse_error(source, lineno, "expected element,weight[,site], got " + std::to_string(fields.size()) + " fields");
    if (width == 0) width = fields.size();
    if (fields.size() != width) parse_error(source, lineno, "ragged row");
    const ElementId e = parse_uint(fields[0], source, lineno, "element id");
    const double w = parse_double(fields[1], source, lineno);
    if (!(w > 0.0)) parse_error(source, lineno, "weight must be positive");
    s.push(e, w);
    if (width == 3) {
      const auto site = parse_uint(fields[2], source, lineno, "site id");
      if (site >= kCoordinator) parse_error(source, lineno, "site id out of range");
      s.site_hints.push_back(static_cast<SiteId>(site));
    }
  }
  if (in.bad()) fail(ErrorCode::Io, source + ": read error");
  return s;
}

RowStream read_matrix_csv(std::istream& in, const CsvOptions& opts, const std::string& source) {
  RowStream s;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && opts.header) continue;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    row.clear();
    if (opts.columns.empty()) {
      for (auto f : fields) row.push_back(parse_double(f, source, lineno));
    } else {
      for (std::size_t c : opts.columns) {
        if (c >= fields.size()) parse_error(source, lineno, "column " + std::to_string(c) + " missing");
        row.push_back(parse_double(fields[c], source, lineno));
      }
    }
    if (s.dim == 0) s.dim = row.size();
    if (row.size() != s.dim)
      parse_error(source, lineno, "ragged row: " + std::to_string(row.size()) + " fields, expected " +
                                      std::to_string(s.dim));
    s.values.insert(s.values.end(), row.begin(), row.end());
  }
  if (in.bad()) fail(ErrorCode::Io, source + ": read error");
  return s;
}

ElementStream load_element_csv(const std::string& path, const CsvOptions& opts) {
  auto in = open_input(path);
  return read_element_csv(in, opts, path);
}

RowStream load_matrix_csv(const std::string& path, const CsvOptions& opts) {
  auto in = open_input(path);
  return read_matrix_csv(in, opts, path);
}

void write_csv(const ElementStream& s, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << s.elements[i] << ',';
    auto r = std::to_chars(buf, buf + sizeof buf, s.weights[i]);
    out.write(buf, r.ptr - buf);
    if (s.has_site_hints()) out << ',' << s.site_hints[i];
    out << '\n';
  }
}

void write_csv(const RowStream& s, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.dim; ++j) {
      if (j) out << ',';
      auto r = std::to_chars(buf, buf + sizeof buf, s.values[i * s.dim + j]);
      out.write(buf, r.ptr - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------- binary

namespace {

constexpr char kMagic[4] = {'D', 'T', 'S', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) fail(ErrorCode::Parse, path + ": truncated stream file");
  return v;
}

template <class T>
std::vector<T> get_vec(std::istream& in, const std::string& path) {
  const auto n = get<std::uint64_t>(in, path);
  if (n > (std::uint64_t{1} << 36)) fail(ErrorCode::Parse, path + ": implausible array length");
  std::vector<T> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
    fail(ErrorCode::Parse, path + ": truncated stream file");
  return v;
}

bool has_magic(const std::string& path) {
  auto in = open_input(path, std::ios::binary);
  char m[4] = {};
  in.read(m, 4);
  return in.gcount() == 4 && std::memcmp(m, kMagic, 4) == 0;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void save_binary(const Stream& s, const std::string& path) {
  auto out = open_output(path, std::ios::binary);
  out.write(kMagic, 4);
  if (const auto* e = std::get_if<ElementStream>(&s)) {
    put<std::uint8_t>(out, 0);
    put_vec(out, e->elements);
    put_vec(out, e->weights);
    put_vec(out, e->site_hints);
  } else {
    const auto& r = std::get<RowStream>(s);
    put<std::uint8_t>(out, 1);
    put<std::uint64_t>(out, r.dim);
    put_vec(out, r.values);
    put_vec(out, r.site_hints);
  }
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

Stream load_binary(const std::string& path) {
  auto in = open_input(path, std::ios::binary);
  char m[4] = {};
  in.read(m, 4);
  if (in.gcount() != 4 || std::memcmp(m, kMagic, 4) != 0)
    fail(ErrorCode::Parse, path + ": not a stream file");
  const auto kind = get<std::uint8_t>(in, path);
  if (kind == 0) {
    ElementStream e;
    e.elements = get_vec<ElementId>(in, path);
    e.weights = get_vec<double>(in, path);
    e.site_hints = get_vec<SiteId>(in, path);
    if (e.weights.size() != e.elements.size() ||
        (!e.site_hints.empty() && e.site_hints.size() != e.elements.size()))
      fail(ErrorCode::Parse, path + ": inconsistent array lengths");
    return e;
  }
  if (kind == 1) {
    RowStream r;
    r.dim = get<std::uint64_t>(in, path);
    r.values = get_vec<double>(in, path);
    r.site_hints = get_vec<SiteId>(in, path);
    if ((r.dim == 0 && !r.values.empty()) || (r.dim && r.values.size() % r.dim) ||
        (!r.site_hints.empty() && r.site_hints.size() != r.size()))
      fail(ErrorCode::Parse, path + ": inconsistent array lengths");
    return r;
  }
  fail(ErrorCode::Parse, path + ": unknown stream kind");
}

Stream load_stream(const std::string& path, bool rows, const CsvOptions& opts) {
  if (has_magic(path)) {
    Stream s = load_binary(path);
    if (rows != std::holds_alternative<RowStream>(s))
      fail(ErrorCode::InvalidArgument,
           path + ": holds " + (rows ? "an element" : "a row") + " stream");
    return s;
  }
  if (rows) return load_matrix_csv(path, opts);
  return load_element_csv(path, opts);
}

void save_stream(const Stream& s, const std::string& path) {
  if (ends_with(path, ".bin") || ends_with(path, ".dts")) {
    save_binary(s, path);
    return;
  }
  auto out = open_output(path);
  std::visit([&](const auto& x) { write_csv(x, out); }, s);
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

std::size_t stream_size(const Stream& s) {
  return std::visit([](const auto& x) { return x.size(); }, s);
}

}  // namespace distrack
