#include "distrack/simulator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "distrack/error.hpp"

namespace distrack {

std::string_view to_string(Assignment a) {
  switch (a) {
    case Assignment::Uniform: return "uniform";
    case Assignment::RoundRobin: return "round-robin";
    case Assignment::SiteHint: return "site-hint";
  }
  return "?";
}

Assignment parse_assignment(std::string_view name) {
  if (name == "uniform") return Assignment::Uniform;
  if (name == "round-robin" || name == "rr") return Assignment::RoundRobin;
  if (name == "site-hint" || name == "hint") return Assignment::SiteHint;
  fail(ErrorCode::InvalidArgument, "unknown site assignment '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Eps: return "eps";
    case SweepAxis::Sites: return "sites";
    case SweepAxis::Beta: return "beta";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "eps") return SweepAxis::Eps;
  if (name == "sites" || name == "m") return SweepAxis::Sites;
  if (name == "beta") return SweepAxis::Beta;
  fail(ErrorCode::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

bool is_matrix_protocol(std::string_view name) { return name.substr(0, 2) == "mp"; }

void validate(const SimConfig& cfg) {
  require(cfg.sites >= 1, "site count m must be at least 1");
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "eps must lie in (0,1)");
  require(cfg.phi > 0.0 && cfg.phi < 1.0, "phi must lie in (0,1)");
  require(cfg.beta >= 1.0 && std::isfinite(cfg.beta), "beta must be at least 1");
  require(cfg.repetitions >= 1, "repetitions must be at least 1");
  require(cfg.p4_copies >= 1, "p4 copies must be at least 1");
  if (is_matrix_protocol(cfg.protocol))
    parse_matrix_protocol(cfg.protocol);
  else
    parse_hh_protocol(cfg.protocol);
}

namespace {

using Clock = std::chrono::steady_clock;

template <class Msg>
void count_up(Tally& t, const Msg& m) {
  t.up_units += m.units();
  t.msg += m.units();
  t.scalars += m.scalar_size();
  t.slots += m.slots();
  if (m.continues) return;
  ++t.up_messages;
  ++t.by_kind[std::string(to_string(m.kind))];
}

template <class Msg>
void count_broadcast(Tally& t, const Msg& b, std::size_t sites) {
  ++t.broadcasts;
  t.msg += sites;
  t.scalars += b.scalar_size() * sites;
  ++t.by_kind[std::string(to_string(b.kind))];
}

class SiteChooser {
 public:
  SiteChooser(const SimConfig& cfg, const std::vector<SiteId>& hints, std::size_t n)
      : policy_(cfg.assignment), sites_(cfg.sites), hints_(hints), rng_(mix_seed(cfg.seed, 7)) {
    if (policy_ == Assignment::SiteHint) {
      if (hints.size() != n) fail(ErrorCode::InvalidArgument, "stream carries no site hints");
      for (SiteId s : hints)
        if (s >= sites_)
          fail(ErrorCode::InvalidArgument, "site hint " + std::to_string(s) + " >= m");
    }
  }

  std::size_t next(std::size_t i) {
    switch (policy_) {
      case Assignment::RoundRobin: return i % sites_;
      case Assignment::SiteHint: return hints_[i];
      case Assignment::Uniform: break;
    }
    return static_cast<std::size_t>(rng_() % sites_);
  }

 private:
  Assignment policy_;
  std::size_t sites_;
  const std::vector<SiteId>& hints_;
  Rng rng_;
};

bool query_due(const SimConfig& cfg, std::size_t n, std::size_t total) {
  if (cfg.query_every && n % cfg.query_every == 0) return true;
  return cfg.query_at_end && n == total;
}

}  // namespace

RunReport run_hh(const SimConfig& cfg, const ElementStream& stream, const HHHooks* hooks) {
  validate(cfg);
  if (is_matrix_protocol(cfg.protocol))
    fail(ErrorCode::InvalidArgument, "protocol " + cfg.protocol + " needs a row stream");
  require(stream.size() > 0, "stream is empty");
  const auto start = Clock::now();

  HHParams params;
  params.eps = cfg.strict ? cfg.eps / 6.0 : cfg.eps;
  params.sites = cfg.sites;
  params.beta = cfg.beta;
  params.sample_size = cfg.sample_size;
  params.p4_copies = cfg.p4_copies;
  params.estimator = cfg.estimator;
  auto inst = make_hh_protocol(parse_hh_protocol(cfg.protocol), params, cfg.seed);

  RunReport rep;
  rep.config = cfg;
  rep.stream_size = stream.size();
  rep.protocol_eps = inst.params.eps;
  rep.sample_size = inst.params.sample_size;
  rep.empirical_beta = stream.max_weight();

  ExactHHOracle oracle;
  SiteChooser chooser(cfg, stream.site_hints, stream.size());
  std::vector<HHMessage> up;
  std::vector<HHMessage> down;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const ElementId e = stream.elements[i];
    const double w = stream.weights[i];
    up.clear();
    inst.sites[chooser.next(i)]->ingest(e, w, up);
    oracle.add(e, w);
    for (const auto& m : up) {
      count_up(rep.tally, m);
      down.clear();
      inst.coordinator->receive(m, down);
      for (const auto& b : down) {
        count_broadcast(rep.tally, b, cfg.sites);
        for (auto& s : inst.sites) s->apply_broadcast(b);
      }
    }
    const std::size_t n = i + 1;
    if (hooks && hooks->after_tuple) hooks->after_tuple(n, inst, oracle, rep.tally);
    if (!query_due(cfg, n, stream.size())) continue;

    const HHEstimates est = inst.coordinator->estimates();
    const auto returned = hh_query(est, cfg.phi, cfg.eps);
    const auto q = hh_quality(oracle, returned, cfg.phi, cfg.eps, [&](ElementId x) { return est.of(x); });
    QueryRow row;
    row.n = n;
    row.recall = q.recall;
    row.precision = q.precision;
    row.err = q.err;
    row.err_w = q.err_w;
    row.within_eps = q.within_eps;
    row.true_count = q.true_count;
    row.returned_count = q.returned_count;
    row.total = oracle.total();
    row.total_estimate = est.total;
    row.msg = rep.tally.msg;
    row.rounds = inst.coordinator->rounds();
    rep.queries.push_back(row);
  }
  rep.rounds = inst.coordinator->rounds();
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return rep;
}

RunReport run_matrix(const SimConfig& cfg, const RowStream& stream, const MatrixHooks* hooks) {
  validate(cfg);
  if (!is_matrix_protocol(cfg.protocol))
    fail(ErrorCode::InvalidArgument, "protocol " + cfg.protocol + " needs an element stream");
  require(stream.size() > 0 && stream.dim > 0, "stream is empty");
  const auto start = Clock::now();

  MParams params;
  params.eps = cfg.eps;
  params.sites = cfg.sites;
  params.dim = stream.dim;
  params.sample_size = cfg.sample_size;
  params.estimator = cfg.estimator;
  auto inst = make_matrix_protocol(parse_matrix_protocol(cfg.protocol), params, cfg.seed);

  RunReport rep;
  rep.config = cfg;
  rep.matrix = true;
  rep.stream_size = stream.size();
  rep.dim = stream.dim;
  rep.protocol_eps = inst.params.eps;
  rep.sample_size = inst.params.sample_size;

  CovarianceAccumulator acc(stream.dim);
  SiteChooser chooser(cfg, stream.site_hints, stream.size());
  std::vector<MMessage> up;
  std::vector<MMessage> down;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto row = stream.row(i);
    const double norm_sq = row.squaredNorm();
    rep.empirical_beta = std::max(rep.empirical_beta, norm_sq);
    if (norm_sq < 1.0) ++rep.light_rows;
    up.clear();
    if (!inst.sites[chooser.next(i)]->ingest(row, up)) ++rep.dropped_rows;
    acc.add_row(row);
    for (const auto& m : up) {
      count_up(rep.tally, m);
      down.clear();
      inst.coordinator->receive(m, down);
      for (const auto& b : down) {
        count_broadcast(rep.tally, b, cfg.sites);
        for (auto& s : inst.sites) s->apply_broadcast(b);
      }
    }
    const std::size_t n = i + 1;
    if (hooks && hooks->after_tuple) hooks->after_tuple(n, inst, acc, rep.tally);
    if (!query_due(cfg, n, stream.size())) continue;

    QueryRow q;
    q.n = n;
    q.cov_err = acc.frob_sq() > 0.0 ? matrix_quality_gram(acc, inst.coordinator->query_gram()) : 0.0;
    q.sketch_rows = static_cast<std::size_t>(inst.coordinator->query().rows());
    q.total = acc.frob_sq();
    q.total_estimate = inst.coordinator->norm_estimate();
    q.msg = rep.tally.msg;
    q.rounds = inst.coordinator->rounds();
    rep.queries.push_back(q);
  }
  rep.rounds = inst.coordinator->rounds();
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return rep;
}

RunReport run_sim(const SimConfig& cfg, const Stream& stream) {
  if (const auto* e = std::get_if<ElementStream>(&stream)) return run_hh(cfg, *e);
  return run_matrix(cfg, std::get<RowStream>(stream));
}

StreamSource fixed_source(std::shared_ptr<const Stream> stream) {
  return [stream](const SimConfig&) { return stream; };
}

std::vector<SweepCell> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                             const StreamSource& source, std::size_t threads) {
  require(!values.empty(), "sweep needs at least one value");
  require(static_cast<bool>(source), "sweep needs a stream source");
  validate(base);

  std::vector<SweepCell> cells;
  std::vector<SimConfig> configs;
  for (double v : values) {
    for (std::size_t r = 0; r < base.repetitions; ++r) {
      SimConfig c = base;
      c.repetitions = 1;
      c.seed = base.seed + r;
      switch (axis) {
        case SweepAxis::Eps: c.eps = v; break;
        case SweepAxis::Sites:
          require(v >= 1.0 && v == std::floor(v), "site counts must be positive integers");
          c.sites = static_cast<std::size_t>(v);
          break;
        case SweepAxis::Beta: c.beta = v; break;
      }
      validate(c);
      configs.push_back(c);
      cells.push_back({v, r, {}});
    }
  }

  std::mutex source_lock;
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_lock;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < configs.size();) {
      try {
        std::shared_ptr<const Stream> s;
        {
          std::lock_guard<std::mutex> g(source_lock);
          s = source(configs[k]);
        }
        if (!s) fail(ErrorCode::State, "stream source returned nothing");
        cells[k].report = run_sim(configs[k], *s);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, configs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return cells;
}

}  // namespace distrack
