#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlim/fatou.hpp"
#include "mlim/gallery.hpp"

namespace mlim {

// ---------------------------------------------------------------- scenario documents

struct AtomDoc {
  XReal at = 0.0;
  double weight = 0.0;
  friend bool operator==(const AtomDoc&, const AtomDoc&) = default;
};

struct DensityCellDoc {
  XReal lo = 0.0;
  XReal hi = 0.0;
  double density = 0.0;
  friend bool operator==(const DensityCellDoc&, const DensityCellDoc&) = default;
};

/// Named CDF from the registry; the only entry is "exp2" (density 2^-s on [0, inf)).
struct SegmentDoc {
  std::string cdf;
  friend bool operator==(const SegmentDoc&, const SegmentDoc&) = default;
};

struct MeasureDoc {
  std::vector<AtomDoc> atoms;
  std::vector<DensityCellDoc> cells;
  std::vector<SegmentDoc> segments;
  friend bool operator==(const MeasureDoc&, const MeasureDoc&) = default;
};

/// value on [lo, hi): c0 + c1 * exp(rate * s).
struct FnCellDoc {
  XReal lo = 0.0;
  XReal hi = 0.0;
  XReal c0 = 0.0;
  double c1 = 0.0;
  double rate = 0.0;
  friend bool operator==(const FnCellDoc&, const FnCellDoc&) = default;
};

struct PointDoc {
  XReal at = 0.0;
  XReal value = 0.0;
  friend bool operator==(const PointDoc&, const PointDoc&) = default;
};

struct FnDoc {
  std::vector<FnCellDoc> cells;
  XReal fill = 0.0;
  std::vector<PointDoc> points;
  friend bool operator==(const FnDoc&, const FnDoc&) = default;
};

/// Reference to a gallery fixture; its pieces are rebuilt with the
/// document's n_max and K_grid.
struct BuilderRef {
  std::string name;
  friend bool operator==(const BuilderRef&, const BuilderRef&) = default;
};

/// Either one entry reused for every n or exactly n_max entries.
template <class T>
struct PerN {
  std::optional<T> constant;
  std::vector<T> per_n;
  friend bool operator==(const PerN&, const PerN&) = default;
};

struct FnSeqDoc {
  PerN<FnDoc> fns;
  std::optional<FnDoc> liminf_certificate;
  std::optional<FnDoc> limsup_certificate;
  friend bool operator==(const FnSeqDoc&, const FnSeqDoc&) = default;
};

struct ScheduleDoc {
  std::vector<std::size_t> N;
  std::vector<double> delta;
  friend bool operator==(const ScheduleDoc&, const ScheduleDoc&) = default;
};

struct SpaceDoc {
  XReal lo = 0.0;
  XReal hi = 1.0;
  friend bool operator==(const SpaceDoc&, const SpaceDoc&) = default;
};

/// Overrides on top of the builder's (or the library's) tolerances.
struct ToleranceDoc {
  std::optional<double> gap;
  std::optional<double> ui;
  std::optional<double> stab;
  std::optional<double> epi;
  std::optional<double> eps;
  friend bool operator==(const ToleranceDoc&, const ToleranceDoc&) = default;
};

/// space and n_max may be omitted when a builder supplies them.
struct ScenarioDoc {
  std::string name;
  std::optional<SpaceDoc> space;
  std::optional<std::size_t> n_max;
  std::variant<BuilderRef, PerN<MeasureDoc>> measures;
  std::optional<std::variant<BuilderRef, MeasureDoc>> limit_measure;  // required for explicit measures
  std::variant<BuilderRef, FnSeqDoc> functions;
  std::optional<std::variant<BuilderRef, FnSeqDoc>> g_functions;
  std::optional<std::variant<BuilderRef, FnDoc>> limit_function;
  std::optional<std::vector<double>> K_grid;
  std::optional<ScheduleDoc> schedule;
  std::optional<std::vector<double>> epi_grid;
  ToleranceDoc tolerances;
  std::vector<std::string> checks;
  std::optional<CertificateKind> certificate;

  friend bool operator==(const ScenarioDoc&, const ScenarioDoc&) = default;
};

/// Every accepted check name, in report order.
const std::vector<std::string>& check_names();

/// Parses and validates. Syntax errors carry line and column; schema errors
/// carry the path of the offending field. Throws ScenarioError.
ScenarioDoc parse_scenario(const std::string& text);

/// Canonical JSON for a document; parse_scenario(emit_scenario(d)) == d.
std::string emit_scenario(const ScenarioDoc& doc);

/// Resolves builders and explicit lists. Throws ScenarioError.
Scenario to_scenario(const ScenarioDoc& doc);

// ---------------------------------------------------------------- reports

enum class Verdict { holds, violated, inconclusive, error };

std::string to_string(Verdict v);

struct TaggedNumber {
  XReal value = 0.0;
  Certainty certainty = Certainty::exact;
};

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  std::map<std::string, TaggedNumber> numbers;
  std::map<std::string, std::string> details;
  std::vector<std::string> notes;
  std::string error;
};

struct CurveFile {
  std::string name;  // file name inside the curves directory
  std::string csv;
};

struct ReportDoc {
  std::string tool_version;
  std::string scenario;
  std::string scenario_hash;
  std::size_t n_max = 0;
  std::vector<CheckResult> checks;
  std::vector<CurveFile> curves;
};

/// FNV-1a 64 of the canonical scenario JSON, as 16 hex digits.
std::string scenario_hash(const ScenarioDoc& doc);

/// Runs doc.checks (in check_names() order). Module errors become "error"
/// verdicts; scenario resolution errors make every requested check an error.
ReportDoc run_checks(const ScenarioDoc& doc);

/// Canonical JSON: sorted keys, %.17g numbers, infinities as strings.
std::string emit_report(const ReportDoc& r);

/// 0 when every verdict holds, 2 when some verdict is violated, 1 on any error.
int exit_code(const ReportDoc& r);

/// Canonical JSON for gallery conformance runs.
std::string emit_conformance(const std::vector<ConformanceReport>& runs);

/// 0 when every entry passes, 2 on a mismatch, 1 when a quantity could not be computed.
int exit_code(const std::vector<ConformanceReport>& runs);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Writes every curve of the report into `dir` (created when missing).
void emit_curves(const ReportDoc& r, const std::filesystem::path& dir);

/// %.17g for finite values; "inf" / "-inf" otherwise.
std::string format_number(double x);

}  // namespace mlim
