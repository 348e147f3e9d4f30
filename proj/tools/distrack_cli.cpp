// Command-line front end: stream generation, simulation runs, sweeps, oracle.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distrack/distrack.h"

namespace fs = std::filesystem;

namespace {

// Exit codes: 1 usage (CLI11 parse errors use their own nonzero codes),
// 2 invalid value, 3 I/O, 4 malformed input, 5 anything else.
struct Failure {
  int code;
  std::string message;
};

int exit_code(dt_status s) {
  switch (s) {
    case DT_ERR_INVALID_ARGUMENT: return 2;
    case DT_ERR_IO: return 3;
    case DT_ERR_PARSE: return 4;
    default: return 5;
  }
}

void check(dt_status s, const std::string& context = "") {
  if (s == DT_OK) return;
  std::string msg = dt_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{exit_code(s), msg};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Stream = Handle<dt_stream, dt_stream_free>;
using Config = Handle<dt_config, dt_config_free>;
using Report = Handle<dt_report, dt_report_free>;
using Generator = Handle<dt_generator, dt_generator_free>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { dt_string_free(p); }
};

// Relative paths land under DISTRACK_OUT_DIR when it is set.
std::string resolve_output(const std::string& path, const std::string& fallback_name) {
  const char* dir = std::getenv("DISTRACK_OUT_DIR");
  if (path == "-") return path;
  if (path.empty()) {
    if (!dir || !*dir) return "-";
    return (fs::path(dir) / fallback_name).string();
  }
  if (dir && *dir && fs::path(path).is_relative()) return (fs::path(dir) / path).string();
  return path;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Failure{3, "write to stdout failed"};
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{3, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw Failure{3, "write to '" + path + "' failed"};
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct RunOptions {
  std::string protocol;
  double eps = 1e-3;
  long long sites = 50;
  double phi = 0.05;
  double beta = 1000.0;
  std::string assignment = "uniform";
  unsigned long long seed = 1;
  unsigned long long query_every = 0;
  bool no_final_query = false;
  bool strict = false;
  unsigned long long sample_size = 0;
  std::string estimator = "drop-min";
  unsigned long long p4_copies = 1;
  unsigned long long repetitions = 1;
  unsigned long long threads = 1;
  std::string input;
  bool header = false;
  std::string columns;
  std::string out;
  std::string json;
};

void add_run_flags(CLI::App* cmd, RunOptions& o, bool hh) {
  cmd->add_option("--protocol", o.protocol, hh ? "p1 | p2 | p3wor | p3wr | p4"
                                                 : "mp1 | mp2 | mp2-bounded | mp3wor | mp3wr | mp4");
  cmd->add_option("--eps", o.eps, "error parameter, in (0,1)");
  cmd->add_option("--sites", o.sites, "number of sites m");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--assignment", o.assignment, "uniform | round-robin | site-hint");
  cmd->add_option("--query-every", o.query_every, "also query every k tuples");
  cmd->add_flag("--no-final-query", o.no_final_query, "skip the end-of-stream query");
  cmd->add_option("--sample-size", o.sample_size, "sample size s for sampling protocols (0 = default)");
  cmd->add_option("--estimator", o.estimator, "p3wor/mp3wor estimate: drop-min | fixed-size");
  cmd->add_option("--input", o.input, "stream file (CSV or binary)");
  cmd->add_flag("--header", o.header, "skip the first CSV line");
  cmd->add_option("--columns", o.columns, "comma list of 0-based CSV columns to keep");
  cmd->add_option("--out", o.out, "CSV output path (default stdout)");
  cmd->add_option("--json", o.json, "also write a JSON summary here");
  if (hh) {
    cmd->add_option("--phi", o.phi, "heavy-hitter threshold, in (0,1)");
    cmd->add_option("--beta", o.beta, "upper bound on item weights");
    cmd->add_flag("--strict", o.strict, "run at eps/6 so the classification guarantee holds");
    cmd->add_option("--p4-copies", o.p4_copies, "independent P4 copies (median estimate)");
  }
}

void set(dt_config* c, const char* key, const std::string& value) {
  check(dt_config_set(c, key, value.c_str()));
}

void fill_config(dt_config* c, const RunOptions& o, const std::string& command) {
  if (o.sites < 1) throw Failure{2, "--sites must be at least 1 (got " + std::to_string(o.sites) + ")"};
  if (!(o.eps > 0.0 && o.eps < 1.0)) throw Failure{2, "--eps must lie in (0,1) (got " + format_value(o.eps) + ")"};
  if (!(o.phi > 0.0 && o.phi < 1.0)) throw Failure{2, "--phi must lie in (0,1) (got " + format_value(o.phi) + ")"};
  if (!(o.beta >= 1.0)) throw Failure{2, "--beta must be at least 1 (got " + format_value(o.beta) + ")"};
  set(c, "protocol", o.protocol);
  set(c, "eps", format_value(o.eps));
  set(c, "sites", std::to_string(o.sites));
  set(c, "phi", format_value(o.phi));
  set(c, "beta", format_value(o.beta));
  set(c, "assignment", o.assignment);
  set(c, "seed", std::to_string(o.seed));
  set(c, "query_every", std::to_string(o.query_every));
  set(c, "query_at_end", o.no_final_query ? "0" : "1");
  set(c, "strict", o.strict ? "1" : "0");
  set(c, "sample_size", std::to_string(o.sample_size));
  set(c, "estimator", o.estimator);
  set(c, "p4_copies", std::to_string(o.p4_copies));
  set(c, "repetitions", std::to_string(o.repetitions));
  set(c, "threads", std::to_string(o.threads));
  set(c, "meta.command", command);
  if (!o.input.empty()) set(c, "meta.input", o.input);
  if (!o.columns.empty()) set(c, "meta.columns", o.columns);
  check(dt_config_validate(c));
}

void load_input(const RunOptions& o, bool rows, Stream& s) {
  if (o.input.empty()) throw Failure{2, "--input is required"};
  check(dt_stream_load(o.input.c_str(), rows ? 1 : 0, o.header ? 1 : 0,
                       o.columns.empty() ? nullptr : o.columns.c_str(), &s.p),
        o.input);
}

void emit_report(const dt_report* r, const RunOptions& o, const std::string& name) {
  OwnedString csv;
  check(dt_report_csv(r, &csv.p));
  write_text(resolve_output(o.out, name + ".csv"), csv.p);
  if (!o.json.empty()) {
    OwnedString js;
    check(dt_report_json(r, &js.p));
    write_text(resolve_output(o.json, name + ".json"), std::string(js.p) + "\n");
  }
}

void run(const RunOptions& o, bool rows, const std::string& command) {
  Config c;
  check(dt_config_create(&c.p));
  fill_config(c.p, o, command);
  Stream s;
  load_input(o, rows, s);
  Report r;
  check(dt_run(c.p, s.p, &r.p));
  emit_report(r.p, o, command + "-" + o.protocol);
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{2, "--values: '" + item + "' is not a number"};
    }
  }
  if (out.empty()) throw Failure{2, "--values needs at least one value"};
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed weighted heavy-hitter and matrix tracking simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dt_version());

  // gen-zipf
  unsigned long long zn = 100000, zu = 10000, zseed = 1;
  double zskew = 2.0, zbeta = 1000.0;
  std::string zout;
  auto* gz = app.add_subcommand("gen-zipf", "generate a weighted Zipfian element stream");
  gz->add_option("--n", zn, "number of tuples");
  gz->add_option("--universe", zu, "universe size u");
  gz->add_option("--skew", zskew, "Zipf skew");
  gz->add_option("--beta", zbeta, "weights uniform in [1, beta]");
  gz->add_option("--seed", zseed, "random seed");
  gz->add_option("--out", zout, "output file (.bin/.dts binary, otherwise CSV; default stdout)");

  // gen-matrix
  std::string mkind = "lowrank", mout;
  unsigned long long mn = 50000, md = 44, mrank = 20, mseed = 1;
  double mnoise = 0.1, marc = 30.0;
  auto* gm = app.add_subcommand("gen-matrix", "generate a synthetic row stream");
  gm->add_option("--kind", mkind, "lowrank | highrank | arc");
  gm->add_option("--n", mn, "number of rows");
  gm->add_option("--dim", md, "row dimension d");
  gm->add_option("--rank", mrank, "rank of the lowrank signal");
  gm->add_option("--noise", mnoise, "Gaussian noise scale");
  gm->add_option("--arc", marc, "arc kind: angular spread in degrees");
  gm->add_option("--seed", mseed, "random seed");
  gm->add_option("--out", mout, "output file (.bin/.dts binary, otherwise CSV; default stdout)");

  RunOptions hh;
  hh.protocol = "p2";
  auto* rh = app.add_subcommand("run-hh", "run a heavy-hitter protocol over an element stream");
  add_run_flags(rh, hh, true);

  RunOptions mx;
  mx.protocol = "mp2";
  mx.eps = 0.1;
  auto* rm = app.add_subcommand("run-matrix", "run a matrix protocol over a row stream");
  add_run_flags(rm, mx, false);

  RunOptions sw;
  sw.protocol = "p2";
  std::string axis = "eps", values;
  unsigned long long gen_n = 0, gen_u = 10000, gen_seed = 1;
  double gen_skew = 2.0;
  auto* sp = app.add_subcommand("sweep", "run one protocol across values of eps, sites or beta");
  add_run_flags(sp, sw, true);
  sp->add_option("--axis", axis, "eps | sites | beta");
  sp->add_option("--values", values, "comma-separated axis values")->required();
  sp->add_option("--repetitions", sw.repetitions, "runs per value (seeds seed, seed+1, ...)");
  sp->add_option("--threads", sw.threads, "parallel runs");
  sp->add_option("--gen-n", gen_n, "generate Zipf streams of this length instead of --input");
  sp->add_option("--gen-universe", gen_u, "generated stream universe");
  sp->add_option("--skew", gen_skew, "generated stream skew");
  sp->add_option("--gen-seed", gen_seed, "generated stream seed (plus repetition index)");

  std::string oin, oout;
  double ophi = 0.05;
  bool oheader = false;
  auto* oc = app.add_subcommand("oracle", "list the exact heavy hitters of an element stream");
  oc->add_option("--input", oin, "element stream file")->required();
  oc->add_option("--phi", ophi, "threshold, in (0,1)");
  oc->add_flag("--header", oheader, "skip the first CSV line");
  oc->add_option("--out", oout, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gz->parsed()) {
      Stream s;
      check(dt_stream_gen_zipf(zn, zu, zskew, zbeta, zseed, &s.p));
      check(dt_stream_save(s.p, resolve_output(zout, "zipf.csv").c_str()));
    } else if (gm->parsed()) {
      Stream s;
      check(dt_stream_gen_matrix(mkind.c_str(), mn, md, mrank, mnoise, marc, mseed, &s.p));
      check(dt_stream_save(s.p, resolve_output(mout, "matrix-" + mkind + ".csv").c_str()));
    } else if (rh->parsed()) {
      run(hh, false, "run-hh");
    } else if (rm->parsed()) {
      run(mx, true, "run-matrix");
    } else if (sp->parsed()) {
      const bool rows = sw.protocol.rfind("mp", 0) == 0;
      const auto vals = parse_values(values);
      Config c;
      check(dt_config_create(&c.p));
      fill_config(c.p, sw, "sweep");
      set(c.p, "meta.values", values);
      Stream s;
      Generator g;
      if (gen_n > 0) {
        if (rows) throw Failure{2, "--gen-n generates element streams only; use --input for matrix sweeps"};
        check(dt_generator_zipf(gen_n, gen_u, gen_skew, gen_seed, &g.p));
        set(c.p, "meta.generator", "zipf n=" + std::to_string(gen_n) + " u=" + std::to_string(gen_u) +
                                       " skew=" + format_value(gen_skew) + " seed=" + std::to_string(gen_seed));
      } else {
        load_input(sw, rows, s);
      }
      Report r;
      check(dt_sweep(c.p, axis.c_str(), vals.data(), vals.size(), s.p, g.p, &r.p));
      emit_report(r.p, sw, "sweep-" + sw.protocol + "-" + axis);
    } else if (oc->parsed()) {
      if (!(ophi > 0.0 && ophi < 1.0)) throw Failure{2, "--phi must lie in (0,1) (got " + format_value(ophi) + ")"};
      Stream s;
      check(dt_stream_load(oin.c_str(), 0, oheader ? 1 : 0, nullptr, &s.p), oin);
      OwnedString csv;
      check(dt_oracle_csv(s.p, ophi, &csv.p));
      write_text(resolve_output(oout, "oracle.csv"), csv.p);
    }
  } catch (const Failure& f) {
    std::cerr << "distrack: error: " << f.message << '\n';
    return f.code;
  }
  return 0;
}
