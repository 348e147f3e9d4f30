#include "distrack/distrack.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "distrack/data.hpp"
#include "distrack/error.hpp"
#include "distrack/freq_sketch.hpp"
#include "distrack/matrix_sketch.hpp"
#include "distrack/report.hpp"
#include "distrack/simulator.hpp"
#include "distrack/version.hpp"

struct dt_stream {
  distrack::Stream value;
};

struct dt_generator {
  distrack::ZipfConfig zipf;
};

struct dt_config {
  distrack::SimConfig sim;
  std::size_t threads = 1;
  distrack::ReportMeta meta;
};

struct dt_report {
  bool is_sweep = false;
  distrack::RunReport run;
  std::vector<distrack::SweepCell> cells;
  distrack::SweepAxis axis = distrack::SweepAxis::Eps;
  distrack::ReportMeta meta;
};

struct dt_mg {
  distrack::WeightedMG sketch;
};

struct dt_fd {
  distrack::FDSketch sketch;
};

namespace {

thread_local std::string last_error;

dt_status to_status(distrack::ErrorCode c) {
  switch (c) {
    case distrack::ErrorCode::InvalidArgument: return DT_ERR_INVALID_ARGUMENT;
    case distrack::ErrorCode::Io: return DT_ERR_IO;
    case distrack::ErrorCode::Parse: return DT_ERR_PARSE;
    case distrack::ErrorCode::Protocol: return DT_ERR_PROTOCOL;
    case distrack::ErrorCode::State: return DT_ERR_STATE;
  }
  return DT_ERR_INTERNAL;
}

struct NullArg {
  const char* what;
};

template <class T>
T& deref(T* p, const char* what) {
  if (!p) throw NullArg{what};
  return *p;
}

template <class F>
dt_status checked(F&& f) {
  try {
    last_error.clear();
    f();
    return DT_OK;
  } catch (const NullArg& e) {
    last_error = std::string("null argument: ") + e.what;
    return DT_ERR_NULL;
  } catch (const distrack::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DT_ERR_NOMEM;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return DT_ERR_INTERNAL;
  }
}


char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string_view trimmed(const char* v) {
  std::string_view s(v);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

double parse_real(const std::string& key, const char* v) {
  const auto s = trimmed(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    distrack::fail(distrack::ErrorCode::InvalidArgument, key + ": '" + std::string(v) + "' is not a number");
  return x;
}

std::uint64_t parse_count(const std::string& key, const char* v) {
  const auto s = trimmed(v);
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    distrack::fail(distrack::ErrorCode::InvalidArgument,
                   key + ": '" + std::string(v) + "' is not a non-negative integer");
  return x;
}

bool parse_flag(const std::string& key, const char* v) {
  const auto s = trimmed(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  distrack::fail(distrack::ErrorCode::InvalidArgument, key + ": '" + std::string(v) + "' is not a boolean");
}

std::vector<std::size_t> parse_columns(const char* spec) {
  std::vector<std::size_t> out;
  if (!spec || !*spec) return out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<std::size_t>(parse_count("columns", item.c_str())));
  return out;
}

const distrack::QueryRow& final_query(const distrack::RunReport& r) {
  if (r.queries.empty()) distrack::fail(distrack::ErrorCode::State, "run recorded no queries");
  return r.queries.back();
}

double metric(const distrack::QueryRow& q, std::string_view name) {
  if (name == "n") return static_cast<double>(q.n);
  if (name == "recall") return q.recall;
  if (name == "precision") return q.precision;
  if (name == "err") return q.err;
  if (name == "err_w") return q.err_w;
  if (name == "within_eps") return q.within_eps;
  if (name == "cov_err") return q.cov_err;
  if (name == "total") return q.total;
  if (name == "total_estimate") return q.total_estimate;
  if (name == "msg") return static_cast<double>(q.msg);
  if (name == "rounds") return static_cast<double>(q.rounds);
  if (name == "true_count") return static_cast<double>(q.true_count);
  if (name == "returned_count") return static_cast<double>(q.returned_count);
  if (name == "sketch_rows") return static_cast<double>(q.sketch_rows);
  distrack::fail(distrack::ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::uint64_t tally(const distrack::RunReport& r, std::string_view name) {
  const auto& t = r.tally;
  if (name == "up_messages") return t.up_messages;
  if (name == "up_units") return t.up_units;
  if (name == "broadcasts") return t.broadcasts;
  if (name == "msg") return t.msg;
  if (name == "scalars") return t.scalars;
  if (name == "slots") return t.slots;
  if (name == "rounds") return r.rounds;
  if (name.substr(0, 5) == "kind:") return t.kind(std::string(name.substr(5)));
  distrack::fail(distrack::ErrorCode::InvalidArgument, "unknown tally '" + std::string(name) + "'");
}

}  // namespace

extern "C" {

const char* dt_version(void) { return distrack::kVersion; }

const char* dt_last_error(void) { return last_error.c_str(); }

const char* dt_status_name(dt_status s) {
  switch (s) {
    case DT_OK: return "ok";
    case DT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DT_ERR_IO: return "i/o error";
    case DT_ERR_PARSE: return "parse error";
    case DT_ERR_PROTOCOL: return "protocol violation";
    case DT_ERR_STATE: return "invalid state";
    case DT_ERR_NULL: return "null argument";
    case DT_ERR_NOMEM: return "out of memory";
    case DT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void dt_string_free(char* s) { std::free(s); }

// ---- streams

dt_status dt_stream_gen_zipf(uint64_t n, uint64_t universe, double skew, double beta, uint64_t seed,
                             dt_stream** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    distrack::ZipfConfig cfg{n, universe, skew, beta, seed};
    slot = new dt_stream{distrack::gen_zipfian(cfg)};
  });
}

dt_status dt_stream_gen_matrix(const char* kind, uint64_t n, uint64_t dim, uint64_t rank, double noise,
                               double arc_degrees, uint64_t seed, dt_stream** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    distrack::MatrixSynthConfig cfg;
    cfg.kind = distrack::parse_matrix_kind(&deref(kind, "kind"));
    cfg.n = n;
    cfg.dim = dim;
    cfg.rank = rank;
    cfg.noise = noise;
    cfg.arc_degrees = arc_degrees;
    cfg.seed = seed;
    slot = new dt_stream{distrack::synth_matrix(cfg)};
  });
}

dt_status dt_stream_from_elements(const uint64_t* elements, const double* weights, uint64_t n,
                                  dt_stream** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    if (n) {
      deref(elements, "elements");
      deref(weights, "weights");
    }
    distrack::ElementStream s;
    for (uint64_t i = 0; i < n; ++i) {
      distrack::require(weights[i] > 0.0 && std::isfinite(weights[i]), "weights must be positive");
      s.push(elements[i], weights[i]);
    }
    slot = new dt_stream{std::move(s)};
  });
}

dt_status dt_stream_from_rows(const double* values, uint64_t n, uint64_t dim, dt_stream** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    distrack::require(dim >= 1, "dimension must be positive");
    if (n) deref(values, "values");
    distrack::RowStream s;
    s.dim = dim;
    s.values.assign(values, values + n * dim);
    for (double v : s.values) distrack::require(std::isfinite(v), "rows must be finite");
    slot = new dt_stream{std::move(s)};
  });
}

dt_status dt_stream_load(const char* path, int rows, int header, const char* columns, dt_stream** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    distrack::CsvOptions opts;
    opts.header = header != 0;
    opts.columns = parse_columns(columns);
    slot = new dt_stream{distrack::load_stream(&deref(path, "path"), rows != 0, opts)};
  });
}

dt_status dt_stream_save(const dt_stream* s, const char* path) {
  return checked([&] {
    const auto& st = deref(s, "stream");
    deref(path, "path");
    const std::string p = path;
    if (p == "-") {
      std::visit([](const auto& x) { distrack::write_csv(x, std::cout); }, st.value);
      std::cout.flush();
      if (!std::cout) distrack::fail(distrack::ErrorCode::Io, "write to stdout failed");
      return;
    }
    distrack::save_stream(st.value, p);
  });
}

dt_status dt_stream_info(const dt_stream* s, int* is_rows, uint64_t* size, uint64_t* dim, double* max_weight) {
  return checked([&] {
    const auto& st = deref(s, "stream");
    const auto* rows = std::get_if<distrack::RowStream>(&st.value);
    if (is_rows) *is_rows = rows ? 1 : 0;
    if (size) *size = distrack::stream_size(st.value);
    if (dim) *dim = rows ? rows->dim : 0;
    if (max_weight)
      *max_weight = rows ? rows->max_norm_sq() : std::get<distrack::ElementStream>(st.value).max_weight();
  });
}

void dt_stream_free(dt_stream* s) { delete s; }

dt_status dt_generator_zipf(uint64_t n, uint64_t universe, double skew, uint64_t seed, dt_generator** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    distrack::ZipfConfig cfg{n, universe, skew, 1000.0, seed};
    distrack::validate(cfg);
    slot = new dt_generator{cfg};
  });
}

void dt_generator_free(dt_generator* g) { delete g; }

// ---- configuration

dt_status dt_config_create(dt_config** out) {
  return checked([&] { deref(out, "out") = new dt_config{}; });
}

dt_status dt_config_set(dt_config* c, const char* key, const char* value) {
  return checked([&] {
    auto& cfg = deref(c, "config");
    deref(key, "key");
    const std::string k = key;
    deref(value, "value");
    auto& s = cfg.sim;
    if (k.rfind("meta.", 0) == 0) {
      const std::string name = k.substr(5);
      for (auto& [mk, mv] : cfg.meta)
        if (mk == name) {
          mv = value;
          return;
        }
      cfg.meta.emplace_back(name, value);
    } else if (k == "protocol") {
      s.protocol = value;
    } else if (k == "sites") {
      s.sites = parse_count(k, value);
    } else if (k == "eps") {
      s.eps = parse_real(k, value);
    } else if (k == "phi") {
      s.phi = parse_real(k, value);
    } else if (k == "beta") {
      s.beta = parse_real(k, value);
    } else if (k == "assignment") {
      s.assignment = distrack::parse_assignment(value);
    } else if (k == "query_every") {
      s.query_every = parse_count(k, value);
    } else if (k == "query_at_end") {
      s.query_at_end = parse_flag(k, value);
    } else if (k == "seed") {
      s.seed = parse_count(k, value);
    } else if (k == "repetitions") {
      s.repetitions = parse_count(k, value);
    } else if (k == "strict") {
      s.strict = parse_flag(k, value);
    } else if (k == "sample_size") {
      s.sample_size = parse_count(k, value);
    } else if (k == "p4_copies") {
      s.p4_copies = parse_count(k, value);
    } else if (k == "estimator") {
      s.estimator = distrack::parse_estimate_rule(value);
    } else if (k == "threads") {
      cfg.threads = parse_count(k, value);
    } else {
      distrack::fail(distrack::ErrorCode::InvalidArgument, "unknown config key '" + k + "'");
    }
  });
}

dt_status dt_config_validate(const dt_config* c) {
  return checked([&] { distrack::validate(deref(c, "config").sim); });
}

void dt_config_free(dt_config* c) { delete c; }

// ---- simulation

dt_status dt_run(const dt_config* c, const dt_stream* s, dt_report** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    const auto& cfg = deref(c, "config");
    const auto& st = deref(s, "stream");
    auto r = std::make_unique<dt_report>();
    r->run = distrack::run_sim(cfg.sim, st.value);
    r->meta = cfg.meta;
    slot = r.release();
  });
}

dt_status dt_sweep(const dt_config* c, const char* axis, const double* values, size_t count,
                   const dt_stream* stream, const dt_generator* generator, dt_report** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    const auto& cfg = deref(c, "config");
    const auto ax = distrack::parse_sweep_axis(&deref(axis, "axis"));
    distrack::require(count > 0, "sweep needs at least one value");
    deref(values, "values");
    distrack::require((stream == nullptr) != (generator == nullptr),
                      "sweep needs exactly one of a stream or a generator");
    distrack::require(!(ax == distrack::SweepAxis::Beta && stream),
                      "a beta sweep regenerates its stream; pass a generator");

    distrack::StreamSource source;
    if (stream) {
      auto shared = std::make_shared<const distrack::Stream>(stream->value);
      source = distrack::fixed_source(shared);
    } else {
      // Stream for repetition r uses the generator seed + r; cached per (beta, r).
      const distrack::ZipfConfig base = generator->zipf;
      const std::uint64_t base_seed = cfg.sim.seed;
      auto cache = std::make_shared<std::map<std::pair<double, std::uint64_t>,
                                             std::shared_ptr<const distrack::Stream>>>();
      source = [base, base_seed, cache](const distrack::SimConfig& sc) {
        const std::uint64_t rep = sc.seed - base_seed;
        auto& entry = (*cache)[{sc.beta, rep}];
        if (!entry) {
          distrack::ZipfConfig z = base;
          z.beta = sc.beta;
          z.seed = base.seed + rep;
          entry = std::make_shared<const distrack::Stream>(distrack::gen_zipfian(z));
        }
        return entry;
      };
    }
    auto r = std::make_unique<dt_report>();
    r->is_sweep = true;
    r->axis = ax;
    r->meta = cfg.meta;
    r->cells = distrack::sweep(cfg.sim, ax, std::vector<double>(values, values + count), source, cfg.threads);
    slot = r.release();
  });
}

dt_status dt_report_csv(const dt_report* r, char** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    const auto& rep = deref(r, "report");
    std::ostringstream os;
    if (rep.is_sweep)
      distrack::write_sweep_csv(rep.cells, rep.axis, os, rep.meta);
    else
      distrack::write_run_csv(rep.run, os, rep.meta);
    slot = dup_string(os.str());
  });
}

dt_status dt_report_json(const dt_report* r, char** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    const auto& rep = deref(r, "report");
    slot = dup_string(rep.is_sweep ? distrack::sweep_json(rep.cells, rep.axis, rep.meta)
                                   : distrack::run_json(rep.run, rep.meta));
  });
}

dt_status dt_report_rows(const dt_report* r, size_t* out) {
  return checked([&] {
    const auto& rep = deref(r, "report");
    deref(out, "out") = rep.is_sweep ? rep.cells.size() : rep.run.queries.size();
  });
}

dt_status dt_report_metric(const dt_report* r, size_t row, const char* name, double* out) {
  return checked([&] {
    const auto& rep = deref(r, "report");
    auto& slot = deref(out, "out");
    const char* n = &deref(name, "name");
    if (rep.is_sweep) {
      distrack::require(row < rep.cells.size(), "row index out of range");
      slot = metric(final_query(rep.cells[row].report), n);
    } else {
      distrack::require(row < rep.run.queries.size(), "row index out of range");
      slot = metric(rep.run.queries[row], n);
    }
  });
}

dt_status dt_report_tally(const dt_report* r, size_t row, const char* name, uint64_t* out) {
  return checked([&] {
    const auto& rep = deref(r, "report");
    auto& slot = deref(out, "out");
    const char* n = &deref(name, "name");
    if (rep.is_sweep) {
      distrack::require(row < rep.cells.size(), "row index out of range");
      slot = tally(rep.cells[row].report, n);
    } else {
      slot = tally(rep.run, n);
    }
  });
}

void dt_report_free(dt_report* r) { delete r; }

dt_status dt_oracle_csv(const dt_stream* s, double phi, char** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    const auto& st = deref(s, "stream");
    distrack::require(phi > 0.0 && phi < 1.0, "phi must lie in (0,1)");
    const auto* e = std::get_if<distrack::ElementStream>(&st.value);
    distrack::require(e != nullptr, "oracle needs an element stream");
    distrack::ExactHHOracle oracle;
    for (std::size_t i = 0; i < e->size(); ++i) oracle.add(e->elements[i], e->weights[i]);
    std::ostringstream os;
    distrack::write_oracle_csv(oracle, phi, os);
    slot = dup_string(os.str());
  });
}

// ---- sketches

dt_status dt_mg_create(uint64_t capacity, dt_mg** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    slot = new dt_mg{distrack::WeightedMG(capacity)};
  });
}

dt_status dt_mg_update(dt_mg* mg, uint64_t element, double weight) {
  return checked([&] { deref(mg, "sketch").sketch.update(element, weight); });
}

dt_status dt_mg_merge(dt_mg* into, const dt_mg* other) {
  return checked([&] { deref(into, "into").sketch.merge_in(deref(other, "other").sketch); });
}

dt_status dt_mg_estimate(const dt_mg* mg, uint64_t element, double* out) {
  return checked([&] { deref(out, "out") = deref(mg, "sketch").sketch.estimate(element); });
}

dt_status dt_mg_size(const dt_mg* mg, uint64_t* out) {
  return checked([&] { deref(out, "out") = deref(mg, "sketch").sketch.size(); });
}

void dt_mg_free(dt_mg* mg) { delete mg; }

dt_status dt_fd_create(uint64_t ell, uint64_t dim, dt_fd** out) {
  return checked([&] {
    auto& slot = deref(out, "out");
    slot = new dt_fd{distrack::FDSketch(ell, dim)};
  });
}

dt_status dt_fd_update(dt_fd* fd, const double* row, uint64_t dim) {
  return checked([&] {
    auto& f = deref(fd, "sketch");
    deref(row, "row");
    if (dim != f.sketch.dim())
      distrack::fail(distrack::ErrorCode::InvalidArgument, "row dimension does not match the sketch");
    f.sketch.update(Eigen::Map<const Eigen::VectorXd>(row, static_cast<Eigen::Index>(dim)));
  });
}

dt_status dt_fd_rows(const dt_fd* fd, uint64_t* out) {
  return checked([&] { deref(out, "out") = deref(fd, "sketch").sketch.rows(); });
}

dt_status dt_fd_matrix(const dt_fd* fd, double* buf, size_t capacity) {
  return checked([&] {
    const auto& f = deref(fd, "sketch");
    const Eigen::MatrixXd m = f.sketch.matrix();
    distrack::require(static_cast<size_t>(m.size()) <= capacity, "buffer too small");
    if (m.size()) deref(buf, "buf");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) buf[i * m.cols() + j] = m(i, j);
  });
}

void dt_fd_free(dt_fd* fd) { delete fd; }

}  // extern "C"
