#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "distrack/common.hpp"

namespace distrack {

/// Weighted element stream, stored column-wise. Arrival index n is position + 1.
struct ElementStream {
  std::vector<ElementId> elements;
  std::vector<double> weights;
  std::vector<SiteId> site_hints;  // empty, or one per tuple

  std::size_t size() const { return elements.size(); }
  bool has_site_hints() const { return !site_hints.empty(); }
  void push(ElementId e, double w) {
    elements.push_back(e);
    weights.push_back(w);
  }
  double max_weight() const;
  double total_weight() const;
};

/// Row stream of fixed dimension, stored row-major in one buffer.
struct RowStream {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<SiteId> site_hints;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  bool has_site_hints() const { return !site_hints.empty(); }
  Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const {
    return {values.data() + i * dim, static_cast<Eigen::Index>(dim)};
  }
  void push(const Eigen::Ref<const Eigen::VectorXd>& r);
  /// Largest squared row norm seen (the stream's empirical beta).
  double max_norm_sq() const;
  /// Rows with squared norm below 1; accepted but outside the [1, beta] model.
  std::size_t light_rows() const;
  Eigen::MatrixXd to_matrix() const;
};

using Stream = std::variant<ElementStream, RowStream>;

struct ZipfConfig {
  std::size_t n = 100000;
  std::size_t universe = 10000;
  double skew = 2.0;
  double beta = 1000.0;
  std::uint64_t seed = 1;
};

void validate(const ZipfConfig& cfg);

/// Element k in [1, u] with probability proportional to k^-skew, weight
/// uniform in [1, beta], both redrawn per tuple.
ElementStream gen_zipfian(const ZipfConfig& cfg);

/// Normalized Zipf mass of element k.
double zipf_probability(std::size_t k, std::size_t universe, double skew);

enum class MatrixKind { LowRank, HighRank, Arc };

std::string_view to_string(MatrixKind k);
MatrixKind parse_matrix_kind(std::string_view name);

struct MatrixSynthConfig {
  MatrixKind kind = MatrixKind::LowRank;
  std::size_t n = 50000;
  std::size_t dim = 44;
  std::size_t rank = 20;
  double noise = 0.1;
  double arc_degrees = 30.0;  // Arc only: spread of row directions around 45 degrees
  std::uint64_t seed = 1;
};

void validate(const MatrixSynthConfig& cfg);

/// LowRank: random combinations of `rank` fixed orthonormal directions plus
/// isotropic Gaussian noise. HighRank: Gaussian rows with a slowly decaying
/// full spectrum. Arc: rows in the (e1, e2) plane whose directions stay
/// within an arc centred on the diagonal; squared norms in [1, 10].
RowStream synth_matrix(const MatrixSynthConfig& cfg);

struct CsvOptions {
  bool header = false;
  std::vector<std::size_t> columns;  // empty keeps every column
};

/// Lines of `element,weight[,site]`.
ElementStream load_element_csv(const std::string& path, const CsvOptions& opts = {});
/// One row per line; dimension fixed by the first data line.
RowStream load_matrix_csv(const std::string& path, const CsvOptions& opts = {});

ElementStream read_element_csv(std::istream& in, const CsvOptions& opts = {},
                               const std::string& source = "<stream>");
RowStream read_matrix_csv(std::istream& in, const CsvOptions& opts = {},
                          const std::string& source = "<stream>");

void write_csv(const ElementStream& s, std::ostream& out);
void write_csv(const RowStream& s, std::ostream& out);

/// Binary stream file: "DTS1", kind byte (0 elements, 1 rows), little-endian
/// payload.
void save_binary(const Stream& s, const std::string& path);
Stream load_binary(const std::string& path);

/// Loads a stream file, binary if it starts with the magic, CSV otherwise.
/// `rows` selects the CSV flavour.
Stream load_stream(const std::string& path, bool rows, const CsvOptions& opts = {});
void save_stream(const Stream& s, const std::string& path);

std::size_t stream_size(const Stream& s);

}  // namespace distrack
