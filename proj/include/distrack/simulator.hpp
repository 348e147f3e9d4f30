#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "distrack/data.hpp"
#include "distrack/evaluation.hpp"
#include "distrack/hh_protocols.hpp"
#include "distrack/matrix_protocols.hpp"

namespace distrack {

enum class Assignment { Uniform, RoundRobin, SiteHint };

std::string_view to_string(Assignment a);
Assignment parse_assignment(std::string_view name);

struct SimConfig {
  std::string protocol = "p2";
  std::size_t sites = 50;
  double eps = 1e-3;
  double phi = 0.05;
  double beta = 1000.0;
  Assignment assignment = Assignment::Uniform;
  std::size_t query_every = 0;  // 0: no periodic queries
  bool query_at_end = true;
  std::uint64_t seed = 1;
  std::size_t repetitions = 1;
  /// Run the HH protocol at eps/6 so the classification rule's premises hold
  /// with the requested eps.
  bool strict = false;
  std::size_t sample_size = 0;  // P3/MP3; 0 = default for eps
  std::size_t p4_copies = 1;
  EstimateRule estimator = EstimateRule::DropMinimum;  // P3wor/MP3wor
};

void validate(const SimConfig& cfg);
bool is_matrix_protocol(std::string_view name);

/// Message tallies. `up_units` counts site-to-coordinator messages, a summary
/// counting one per entry it carries; `msg` adds every broadcast as m messages.
struct Tally {
  std::size_t up_messages = 0;
  std::size_t up_units = 0;
  std::size_t broadcasts = 0;
  std::size_t msg = 0;
  std::size_t scalars = 0;
  std::size_t slots = 0;
  std::map<std::string, std::size_t> by_kind;

  std::size_t kind(const std::string& k) const {
    auto it = by_kind.find(k);
    return it == by_kind.end() ? 0 : it->second;
  }
};

struct QueryRow {
  std::size_t n = 0;  // tuples processed
  // heavy hitters
  double recall = 0.0;
  double precision = 0.0;
  double err = 0.0;
  double err_w = 0.0;
  double within_eps = 0.0;
  std::size_t true_count = 0;
  std::size_t returned_count = 0;
  // matrices
  double cov_err = 0.0;
  std::size_t sketch_rows = 0;
  // both
  double total = 0.0;           // W or |A|_F^2
  double total_estimate = 0.0;  // coordinator's W-hat / F-hat
  std::size_t msg = 0;
  std::size_t rounds = 0;
};

struct RunReport {
  SimConfig config;
  bool matrix = false;
  std::size_t stream_size = 0;
  std::size_t dim = 0;
  double protocol_eps = 0.0;
  std::size_t sample_size = 0;
  std::size_t dropped_rows = 0;
  std::size_t light_rows = 0;
  double empirical_beta = 0.0;
  std::vector<QueryRow> queries;
  Tally tally;
  std::size_t rounds = 0;
  double wall_seconds = 0.0;
};

struct HHHooks {
  /// Called after each tuple once all of its messages and broadcasts are
  /// delivered.
  std::function<void(std::size_t n, const HHProtocolInstance&, const ExactHHOracle&, const Tally&)>
      after_tuple;
};

struct MatrixHooks {
  std::function<void(std::size_t n, const MProtocolInstance&, const CovarianceAccumulator&,
                     const Tally&)>
      after_tuple;
};

RunReport run_hh(const SimConfig& cfg, const ElementStream& stream, const HHHooks* hooks = nullptr);
RunReport run_matrix(const SimConfig& cfg, const RowStream& stream,
                     const MatrixHooks* hooks = nullptr);
/// Dispatches on the protocol; errors if it does not match the stream type.
RunReport run_sim(const SimConfig& cfg, const Stream& stream);

enum class SweepAxis { Eps, Sites, Beta };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view name);

/// Produces the stream for one sweep cell (regenerated when beta varies).
using StreamSource = std::function<std::shared_ptr<const Stream>(const SimConfig&)>;

struct SweepCell {
  double value = 0.0;
  std::size_t repetition = 0;
  RunReport report;
};

/// One run per value per repetition; repetition r uses seed + r. Runs execute
/// on up to `threads` worker threads; results keep (value, repetition) order.
std::vector<SweepCell> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                             const StreamSource& source, std::size_t threads = 1);

/// Source that hands out the same stream for every cell.
StreamSource fixed_source(std::shared_ptr<const Stream> stream);

}  // namespace distrack
