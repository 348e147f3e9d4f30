#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "distrack/simulator.hpp"

namespace distrack {

/// Extra `# key=value` lines for the CSV header (input path, generator, ...).
using ReportMeta = std::vector<std::pair<std::string, std::string>>;

/// Tidy CSV, one row per query. Starts with `# key=value` lines echoing the
/// full configuration. Contains no timing, so reruns are byte-identical.
void write_run_csv(const RunReport& r, std::ostream& out, const ReportMeta& meta = {});

/// One row per (value, repetition) using each run's final query.
void write_sweep_csv(const std::vector<SweepCell>& cells, SweepAxis axis, std::ostream& out,
                     const ReportMeta& meta = {});

/// JSON summary of a run, including wall time.
std::string run_json(const RunReport& r, const ReportMeta& meta = {});
std::string sweep_json(const std::vector<SweepCell>& cells, SweepAxis axis, const ReportMeta& meta = {});

/// Exact heavy hitters of a stream as CSV: element,weight,fraction.
void write_oracle_csv(const ExactHHOracle& oracle, double phi, std::ostream& out,
                      const ReportMeta& meta = {});

std::string format_number(double v);

}  // namespace distrack
