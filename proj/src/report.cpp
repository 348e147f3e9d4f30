#include "distrack/report.hpp"

#include <charconv>
#include <ostream>

#include "json.hpp"

#include "distrack/version.hpp"

namespace distrack {

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

using nlohmann::json;

void config_header(const SimConfig& c, std::ostream& out) {
  out << "# distrack=" << kVersion << '\n'
      << "# protocol=" << c.protocol << '\n'
      << "# sites=" << c.sites << '\n'
      << "# eps=" << format_number(c.eps) << '\n'
      << "# phi=" << format_number(c.phi) << '\n'
      << "# beta=" << format_number(c.beta) << '\n'
      << "# assignment=" << to_string(c.assignment) << '\n'
      << "# query_every=" << c.query_every << '\n'
      << "# query_at_end=" << (c.query_at_end ? 1 : 0) << '\n'
      << "# seed=" << c.seed << '\n'
      << "# repetitions=" << c.repetitions << '\n'
      << "# strict=" << (c.strict ? 1 : 0) << '\n'
      << "# p4_copies=" << c.p4_copies << '\n'
      << "# estimator=" << to_string(c.estimator) << '\n';
}

void meta_header(const ReportMeta& meta, std::ostream& out) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

const char* kHHColumns =
    "protocol,seed,n,recall,precision,err,err_w,within_eps,true_count,returned_count,"
    "total,total_estimate,msg,rounds";
const char* kMatrixColumns =
    "protocol,seed,n,err,sketch_rows,total,total_estimate,msg,rounds";
const char* kRunColumns = "up_messages,up_units,broadcasts,msg_total,scalars,slots";

void query_fields(const RunReport& r, const QueryRow& q, std::ostream& out) {
  out << r.config.protocol << ',' << r.config.seed << ',' << q.n << ',';
  if (r.matrix) {
    out << format_number(q.cov_err) << ',' << q.sketch_rows << ',';
  } else {
    out << format_number(q.recall) << ',' << format_number(q.precision) << ','
        << format_number(q.err) << ',' << format_number(q.err_w) << ','
        << format_number(q.within_eps) << ',' << q.true_count << ',' << q.returned_count << ',';
  }
  out << format_number(q.total) << ',' << format_number(q.total_estimate) << ',' << q.msg << ','
      << q.rounds;
}

void run_fields(const RunReport& r, std::ostream& out) {
  const Tally& t = r.tally;
  out << t.up_messages << ',' << t.up_units << ',' << t.broadcasts << ',' << t.msg << ','
      << t.scalars << ',' << t.slots;
}

json tally_json(const Tally& t) {
  json by_kind = json::object();
  for (const auto& [k, v] : t.by_kind) by_kind[k] = v;
  return {{"up_messages", t.up_messages}, {"up_units", t.up_units}, {"broadcasts", t.broadcasts},
          {"msg", t.msg},                 {"scalars", t.scalars},   {"slots", t.slots},
          {"by_kind", by_kind}};
}

json config_json(const SimConfig& c) {
  return {{"protocol", c.protocol},
          {"sites", c.sites},
          {"eps", c.eps},
          {"phi", c.phi},
          {"beta", c.beta},
          {"assignment", std::string(to_string(c.assignment))},
          {"query_every", c.query_every},
          {"query_at_end", c.query_at_end},
          {"seed", c.seed},
          {"repetitions", c.repetitions},
          {"strict", c.strict},
          {"sample_size", c.sample_size},
          {"p4_copies", c.p4_copies},
          {"estimator", std::string(to_string(c.estimator))}};
}

json query_json(const RunReport& r, const QueryRow& q) {
  json j = {{"n", q.n},
            {"total", q.total},
            {"total_estimate", q.total_estimate},
            {"msg", q.msg},
            {"rounds", q.rounds}};
  if (r.matrix) {
    j["cov_err"] = q.cov_err;
    j["sketch_rows"] = q.sketch_rows;
  } else {
    j["recall"] = q.recall;
    j["precision"] = q.precision;
    j["err"] = q.err;
    j["err_w"] = q.err_w;
    j["within_eps"] = q.within_eps;
    j["true_count"] = q.true_count;
    j["returned_count"] = q.returned_count;
  }
  return j;
}

json report_json(const RunReport& r) {
  json queries = json::array();
  for (const auto& q : r.queries) queries.push_back(query_json(r, q));
  return {{"config", config_json(r.config)},
          {"kind", r.matrix ? "matrix" : "heavy_hitters"},
          {"stream_size", r.stream_size},
          {"dim", r.dim},
          {"protocol_eps", r.protocol_eps},
          {"sample_size", r.sample_size},
          {"empirical_beta", r.empirical_beta},
          {"dropped_rows", r.dropped_rows},
          {"light_rows", r.light_rows},
          {"rounds", r.rounds},
          {"tally", tally_json(r.tally)},
          {"queries", queries},
          {"wall_seconds", r.wall_seconds}};
}

json meta_json(const ReportMeta& meta) {
  json j = json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

}  // namespace

void write_run_csv(const RunReport& r, std::ostream& out, const ReportMeta& meta) {
  config_header(r.config, out);
  out << "# stream_size=" << r.stream_size << '\n';
  if (r.matrix) out << "# dim=" << r.dim << '\n';
  out << "# protocol_eps=" << format_number(r.protocol_eps) << '\n'
      << "# sample_size=" << r.sample_size << '\n'
      << "# empirical_beta=" << format_number(r.empirical_beta) << '\n';
  if (r.matrix) out << "# dropped_rows=" << r.dropped_rows << "\n# light_rows=" << r.light_rows << '\n';
  meta_header(meta, out);
  out << (r.matrix ? kMatrixColumns : kHHColumns) << ',' << kRunColumns << '\n';
  for (const auto& q : r.queries) {
    query_fields(r, q, out);
    out << ',';
    run_fields(r, out);
    out << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepCell>& cells, SweepAxis axis, std::ostream& out,
                     const ReportMeta& meta) {
  if (cells.empty()) return;
  const RunReport& first = cells.front().report;
  config_header(first.config, out);
  out << "# axis=" << to_string(axis) << '\n' << "# stream_size=" << first.stream_size << '\n';
  if (first.matrix) out << "# dim=" << first.dim << '\n';
  meta_header(meta, out);
  out << "axis,value,repetition,sites,eps,beta,protocol_eps,sample_size,"
      << (first.matrix ? kMatrixColumns : kHHColumns) << ',' << kRunColumns << '\n';
  for (const auto& c : cells) {
    const RunReport& r = c.report;
    if (r.queries.empty()) continue;
    out << to_string(axis) << ',' << format_number(c.value) << ',' << c.repetition << ','
        << r.config.sites << ',' << format_number(r.config.eps) << ','
        << format_number(r.config.beta) << ',' << format_number(r.protocol_eps) << ','
        << r.sample_size << ',';
    query_fields(r, r.queries.back(), out);
    out << ',';
    run_fields(r, out);
    out << '\n';
  }
}

std::string run_json(const RunReport& r, const ReportMeta& meta) {
  json j = report_json(r);
  j["meta"] = meta_json(meta);
  return j.dump(2);
}

std::string sweep_json(const std::vector<SweepCell>& cells, SweepAxis axis, const ReportMeta& meta) {
  json runs = json::array();
  for (const auto& c : cells) {
    json j = report_json(c.report);
    j["value"] = c.value;
    j["repetition"] = c.repetition;
    runs.push_back(std::move(j));
  }
  return json{{"axis", std::string(to_string(axis))}, {"meta", meta_json(meta)}, {"runs", runs}}.dump(2);
}

void write_oracle_csv(const ExactHHOracle& oracle, double phi, std::ostream& out,
                      const ReportMeta& meta) {
  out << "# phi=" << format_number(phi) << '\n'
      << "# total=" << format_number(oracle.total()) << '\n'
      << "# distinct=" << oracle.distinct() << '\n';
  meta_header(meta, out);
  out << "element,weight,fraction\n";
  for (const auto& [e, f] : oracle.heavy_hitters(phi))
    out << e << ',' << format_number(f) << ',' << format_number(f / oracle.total()) << '\n';
}

}  // namespace distrack
