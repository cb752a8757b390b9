#include "mlim/scenario_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "mlim/errors.hpp"
#include "mlim/gallery.hpp"
#include "mlim/uniform.hpp"

#ifndef MLIM_VERSION
#define MLIM_VERSION "0.0.0"
#endif

namespace mlim {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------- reading

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }
std::string field_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ScenarioError(field_path(path, key), "unknown field");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(field_path(path, key), "missing required field");
  return *it;
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

XReal read_xreal(const json& j, const std::string& path) {
  if (j.is_number()) return XReal(j.get<double>());
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text == "inf" || text == "+inf" || text == "-inf") return parse_xreal(text);
    throw ScenarioError(path, "expected a number, \"inf\" or \"-inf\", got \"" + text + "\"");
  }
  throw ScenarioError(path, "expected a number");
}

double read_finite(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path, "expected a finite number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ScenarioError(path, "expected a finite number");
  return v;
}

double read_nonneg(const json& j, const std::string& path) {
  const double v = read_finite(j, path);
  if (v < 0) throw ScenarioError(path, "must be nonnegative");
  return v;
}

double read_positive(const json& j, const std::string& path) {
  const double v = read_finite(j, path);
  if (!(v > 0)) throw ScenarioError(path, "must be positive");
  return v;
}

std::size_t read_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ScenarioError(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError(path, "expected a string");
  return j.get<std::string>();
}

const json& read_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioError(path, "expected an array");
  return j;
}

std::string span_text(XReal lo, XReal hi) { return "[" + to_string(lo) + ", " + to_string(hi) + ")"; }

/// Cells given as (lo, hi) spans must be nonempty, ascending and disjoint.
template <class Cell>
void check_cells(const std::vector<Cell>& cells, const std::string& path) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!(cells[i].lo < cells[i].hi))
      throw ScenarioError(index_path(path, i), "empty cell " + span_text(cells[i].lo, cells[i].hi));
    if (i == 0) continue;
    const auto& prev = cells[i - 1];
    if (cells[i].lo < prev.hi) {
      if (cells[i].lo < prev.lo)
        throw ScenarioError(index_path(path, i), "cells must be listed in ascending order");
      throw ScenarioError(path, "cell #" + std::to_string(i - 1) + " " + span_text(prev.lo, prev.hi) + " overlaps cell #" +
                                    std::to_string(i) + " " + span_text(cells[i].lo, cells[i].hi));
    }
  }
}

MeasureDoc read_measure(const json& j, const std::string& path) {
  expect_object(j, path, {"atoms", "cells", "segments"});
  MeasureDoc m;
  if (const json* atoms = optional_field(j, "atoms")) {
    const auto p = field_path(path, "atoms");
    for (std::size_t i = 0; i < read_array(*atoms, p).size(); ++i) {
      const auto ap = index_path(p, i);
      const json& a = (*atoms)[i];
      expect_object(a, ap, {"at", "weight"});
      m.atoms.push_back({read_finite(require(a, ap, "at"), field_path(ap, "at")),
                         read_nonneg(require(a, ap, "weight"), field_path(ap, "weight"))});
    }
  }
  if (const json* cells = optional_field(j, "cells")) {
    const auto p = field_path(path, "cells");
    for (std::size_t i = 0; i < read_array(*cells, p).size(); ++i) {
      const auto cp = index_path(p, i);
      const json& c = (*cells)[i];
      expect_object(c, cp, {"lo", "hi", "density"});
      DensityCellDoc d{read_finite(require(c, cp, "lo"), field_path(cp, "lo")),
                       read_finite(require(c, cp, "hi"), field_path(cp, "hi")),
                       read_nonneg(require(c, cp, "density"), field_path(cp, "density"))};
      m.cells.push_back(d);
    }
    check_cells(m.cells, p);
  }
  if (const json* segs = optional_field(j, "segments")) {
    const auto p = field_path(path, "segments");
    for (std::size_t i = 0; i < read_array(*segs, p).size(); ++i) {
      const auto sp = index_path(p, i);
      const json& s = (*segs)[i];
      expect_object(s, sp, {"cdf"});
      const auto name = read_string(require(s, sp, "cdf"), field_path(sp, "cdf"));
      if (name != "exp2") throw ScenarioError(field_path(sp, "cdf"), "unknown CDF '" + name + "'");
      m.segments.push_back({name});
    }
  }
  return m;
}

FnDoc read_fn(const json& j, const std::string& path) {
  expect_object(j, path, {"cells", "fill", "points"});
  FnDoc f;
  if (const json* cells = optional_field(j, "cells")) {
    const auto p = field_path(path, "cells");
    for (std::size_t i = 0; i < read_array(*cells, p).size(); ++i) {
      const auto cp = index_path(p, i);
      const json& c = (*cells)[i];
      expect_object(c, cp, {"lo", "hi", "value", "c1", "rate"});
      FnCellDoc d;
      d.lo = read_xreal(require(c, cp, "lo"), field_path(cp, "lo"));
      d.hi = read_xreal(require(c, cp, "hi"), field_path(cp, "hi"));
      d.c0 = read_xreal(require(c, cp, "value"), field_path(cp, "value"));
      if (const json* c1 = optional_field(c, "c1")) d.c1 = read_finite(*c1, field_path(cp, "c1"));
      if (const json* rate = optional_field(c, "rate")) d.rate = read_finite(*rate, field_path(cp, "rate"));
      if (d.c1 != 0.0 && !d.c0.is_finite())
        throw ScenarioError(field_path(cp, "value"), "an exponential cell needs a finite value");
      f.cells.push_back(d);
    }
    check_cells(f.cells, p);
  }
  if (const json* fill = optional_field(j, "fill")) f.fill = read_xreal(*fill, field_path(path, "fill"));
  if (const json* points = optional_field(j, "points")) {
    const auto p = field_path(path, "points");
    for (std::size_t i = 0; i < read_array(*points, p).size(); ++i) {
      const auto pp = index_path(p, i);
      const json& pt = (*points)[i];
      expect_object(pt, pp, {"at", "value"});
      f.points.push_back({read_finite(require(pt, pp, "at"), field_path(pp, "at")),
                          read_xreal(require(pt, pp, "value"), field_path(pp, "value"))});
    }
  }
  return f;
}

BuilderRef read_builder(const json& j, const std::string& path) {
  const auto p = field_path(path, "builder");
  const auto name = read_string(j, p);
  if (!has_fixture(name)) throw ScenarioError(p, "unknown builder '" + name + "'");
  return {name};
}

template <class T, class Reader>
PerN<T> read_per_n(const json& j, const std::string& path, Reader reader) {
  PerN<T> out;
  const json* constant = optional_field(j, "constant");
  const json* per_n = optional_field(j, "per_n");
  if ((constant == nullptr) == (per_n == nullptr))
    throw ScenarioError(path, "give exactly one of 'constant' and 'per_n'");
  if (constant) out.constant = reader(*constant, field_path(path, "constant"));
  if (per_n) {
    const auto p = field_path(path, "per_n");
    for (std::size_t i = 0; i < read_array(*per_n, p).size(); ++i) out.per_n.push_back(reader((*per_n)[i], index_path(p, i)));
    if (out.per_n.empty()) throw ScenarioError(p, "must not be empty");
  }
  return out;
}

std::variant<BuilderRef, PerN<MeasureDoc>> read_measures(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("builder")) {
    expect_object(j, path, {"builder"});
    return read_builder(j["builder"], path);
  }
  expect_object(j, path, {"constant", "per_n"});
  return read_per_n<MeasureDoc>(j, path, read_measure);
}

std::variant<BuilderRef, FnSeqDoc> read_fn_seq(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("builder")) {
    expect_object(j, path, {"builder"});
    return read_builder(j["builder"], path);
  }
  expect_object(j, path, {"constant", "per_n", "liminf_certificate", "limsup_certificate"});
  FnSeqDoc d;
  d.fns = read_per_n<FnDoc>(j, path, read_fn);
  if (const json* c = optional_field(j, "liminf_certificate"))
    d.liminf_certificate = read_fn(*c, field_path(path, "liminf_certificate"));
  if (const json* c = optional_field(j, "limsup_certificate"))
    d.limsup_certificate = read_fn(*c, field_path(path, "limsup_certificate"));
  return d;
}

template <class Doc, class Reader>
std::variant<BuilderRef, Doc> read_single(const json& j, const std::string& path, Reader reader) {
  if (j.is_object() && j.contains("builder")) {
    expect_object(j, path, {"builder"});
    return read_builder(j["builder"], path);
  }
  return reader(j, path);
}

std::vector<double> read_grid(const json& j, const std::string& path, bool positive) {
  std::vector<double> out;
  for (std::size_t i = 0; i < read_array(j, path).size(); ++i)
    out.push_back(positive ? read_positive(j[i], index_path(path, i)) : read_finite(j[i], index_path(path, i)));
  if (out.empty()) throw ScenarioError(path, "must not be empty");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i - 1] < out[i])) throw ScenarioError(index_path(path, i), "values must be strictly increasing");
  return out;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------- canonical JSON

void dump_string(const std::string& s, std::string& out) {
  out += json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

void dump(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_string(key, out);
        out += ": ";
        dump(value, out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x) : "\"" + format_number(x) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string canonical(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

json number(XReal x) {
  if (x.is_finite()) return x.value();
  return x.is_pos_inf() ? "inf" : "-inf";
}

json to_json(const MeasureDoc& m) {
  json j = json::object();
  if (!m.atoms.empty()) {
    j["atoms"] = json::array();
    for (const auto& a : m.atoms) j["atoms"].push_back({{"at", number(a.at)}, {"weight", a.weight}});
  }
  if (!m.cells.empty()) {
    j["cells"] = json::array();
    for (const auto& c : m.cells) j["cells"].push_back({{"lo", number(c.lo)}, {"hi", number(c.hi)}, {"density", c.density}});
  }
  if (!m.segments.empty()) {
    j["segments"] = json::array();
    for (const auto& s : m.segments) j["segments"].push_back({{"cdf", s.cdf}});
  }
  return j;
}

json to_json(const FnDoc& f) {
  json j = json::object();
  if (!f.cells.empty()) {
    j["cells"] = json::array();
    for (const auto& c : f.cells) {
      json cell{{"lo", number(c.lo)}, {"hi", number(c.hi)}, {"value", number(c.c0)}};
      if (c.c1 != 0.0) cell["c1"] = c.c1;
      if (c.rate != 0.0) cell["rate"] = c.rate;
      j["cells"].push_back(cell);
    }
  }
  if (!(f.fill == XReal(0.0))) j["fill"] = number(f.fill);
  if (!f.points.empty()) {
    j["points"] = json::array();
    for (const auto& p : f.points) j["points"].push_back({{"at", number(p.at)}, {"value", number(p.value)}});
  }
  return j;
}

json builder_json(const BuilderRef& b) { return {{"builder", b.name}}; }

template <class T>
json per_n_json(const PerN<T>& p) {
  if (p.constant) return {{"constant", to_json(*p.constant)}};
  json arr = json::array();
  for (const auto& x : p.per_n) arr.push_back(to_json(x));
  return {{"per_n", arr}};
}

json to_json(const FnSeqDoc& d) {
  json j = per_n_json(d.fns);
  if (d.liminf_certificate) j["liminf_certificate"] = to_json(*d.liminf_certificate);
  if (d.limsup_certificate) j["limsup_certificate"] = to_json(*d.limsup_certificate);
  return j;
}

template <class Doc>
json either_json(const std::variant<BuilderRef, Doc>& v) {
  if (const auto* b = std::get_if<BuilderRef>(&v)) return builder_json(*b);
  if constexpr (requires(const Doc& d) { per_n_json(d); })
    return per_n_json(std::get<Doc>(v));
  else
    return to_json(std::get<Doc>(v));
}

// ---------------------------------------------------------------- resolution

PiecewiseFn realize(const FnDoc& d, const Interval& domain, const std::string& path) {
  std::vector<double> breaks;
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < d.cells.size(); ++i) {
    const auto& c = d.cells[i];
    const double lo = c.lo.value();
    const double hi = c.hi.value();
    if (lo < domain.lo || hi > domain.hi)
      throw ScenarioError(index_path(field_path(path, "cells"), i), "cell lies outside the space");
    if (!breaks.empty() && lo > breaks.back()) {
      pieces.push_back(Piece::constant(d.fill));
      breaks.push_back(lo);
    }
    if (breaks.empty()) breaks.push_back(lo);
    pieces.push_back(c.c1 == 0.0 ? Piece::constant(c.c0) : Piece::exponential(c.c0.value(), c.c1, c.rate));
    breaks.push_back(hi);
  }
  std::vector<PointValue> points;
  for (const auto& p : d.points) points.push_back({p.at.value(), p.value});
  try {
    return PiecewiseFn(domain, std::move(breaks), std::move(pieces), d.fill, std::move(points));
  } catch (const Error& e) {
    throw ScenarioError(path, e.what());
  }
}

FiniteMeasure realize(const MeasureDoc& d, const Interval& domain, const std::string& path) {
  std::vector<Atom> atoms;
  for (const auto& a : d.atoms) atoms.push_back({a.at.value(), a.weight});
  std::vector<DensityCell> cells;
  for (const auto& c : d.cells) cells.push_back({c.lo.value(), c.hi.value(), c.density});
  std::vector<AnalyticSegment> segments;
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    if (domain.lo > 0.0 || domain.hi < std::numeric_limits<double>::infinity())
      throw ScenarioError(index_path(field_path(path, "segments"), i), "exp2 needs the space [0, inf)");
    segments.push_back(AnalyticSegment::exp2());
  }
  try {
    return FiniteMeasure(domain, std::move(atoms), std::move(cells), std::move(segments));
  } catch (const Error& e) {
    throw ScenarioError(path, e.what());
  }
}

template <class T>
const T& nth(const PerN<T>& p, std::size_t n) {
  return p.constant ? *p.constant : p.per_n[n - 1];
}

template <class T>
void check_length(const PerN<T>& p, std::size_t n_max, const std::string& path) {
  if (!p.constant && p.per_n.size() != n_max)
    throw ScenarioError(field_path(path, "per_n"), "has " + std::to_string(p.per_n.size()) + " entries, n_max is " +
                                                       std::to_string(n_max));
}

FnSequence realize(const FnSeqDoc& d, const Interval& domain, std::size_t n_max, const std::string& path) {
  check_length(d.fns, n_max, path);
  // Realize eagerly so that errors carry the right path.
  std::vector<PiecewiseFn> fns;
  for (std::size_t n = 1; n <= (d.fns.constant ? 1 : n_max); ++n)
    fns.push_back(realize(nth(d.fns, n), domain,
                          d.fns.constant ? field_path(path, "constant") : index_path(field_path(path, "per_n"), n - 1)));
  const bool constant = d.fns.constant.has_value();
  FnSequence seq(domain, n_max, [fns = std::move(fns), constant](std::size_t n) { return constant ? fns[0] : fns[n - 1]; });
  if (d.liminf_certificate)
    seq.liminf_certificate = realize(*d.liminf_certificate, domain, field_path(path, "liminf_certificate"));
  if (d.limsup_certificate)
    seq.limsup_certificate = realize(*d.limsup_certificate, domain, field_path(path, "limsup_certificate"));
  return seq;
}

std::optional<std::string> referenced_builder(const ScenarioDoc& doc) {
  std::optional<std::string> name;
  auto visit = [&](const BuilderRef& b, const char* path) {
    if (name && *name != b.name) throw ScenarioError(path, "all builder references must name the same fixture");
    name = b.name;
  };
  if (const auto* b = std::get_if<BuilderRef>(&doc.measures)) visit(*b, "measures");
  if (const auto* b = std::get_if<BuilderRef>(&doc.functions)) visit(*b, "functions");
  if (doc.g_functions)
    if (const auto* b = std::get_if<BuilderRef>(&*doc.g_functions)) visit(*b, "g_functions");
  if (doc.limit_measure)
    if (const auto* b = std::get_if<BuilderRef>(&*doc.limit_measure)) visit(*b, "limit_measure");
  if (doc.limit_function)
    if (const auto* b = std::get_if<BuilderRef>(&*doc.limit_function)) visit(*b, "limit_function");
  return name;
}

// ---------------------------------------------------------------- checks

void put(CheckResult& r, const std::string& key, XReal v, Certainty c) { r.numbers[key] = {v, c}; }

Certainty worst(Certainty a, Certainty b) {
  return a == Certainty::exact && b == Certainty::exact ? Certainty::exact : Certainty::window_truncated;
}

Verdict from(Conclusion c) {
  switch (c) {
    case Conclusion::holds: return Verdict::holds;
    case Conclusion::violated: return Verdict::violated;
    case Conclusion::inconclusive: return Verdict::inconclusive;
  }
  return Verdict::inconclusive;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "scenario" : out;
}

struct CheckContext {
  const Scenario& sc;
  ReportDoc& report;
  std::optional<TailCurve> negative_curve;
  std::optional<UniformReport> uniform;

  const TailCurve& curve() {
    if (!negative_curve) {
      const auto neg = sc.f.mapped([](const PiecewiseFn& x) { return part(x, PartSign::negative); });
      negative_curve = tail_curve(neg, sc.measures, sc.K_grid, sc.window_start(), 8, sc.tol.stab);
      report.curves.push_back({safe_name(sc.name) + ".tail_negative.csv", negative_curve->to_csv()});
    }
    return *negative_curve;
  }

  const UniformReport& uniform_report_once() {
    if (!uniform) {
      uniform = uniform_report(sc);
      report.curves.push_back({safe_name(sc.name) + ".uniform_gap.csv", uniform->to_csv()});
    }
    return *uniform;
  }
};

void ui_check(CheckContext& ctx, CheckResult& r, UiKind kind) {
  const auto& curve = ctx.curve();
  const auto v = verdict(curve, kind, ctx.sc.tol.ui);
  r.verdict = v.passes ? Verdict::holds : Verdict::violated;
  const Certainty c = kind == UiKind::ui || v.stabilized ? Certainty::exact : Certainty::window_truncated;
  const auto& agg = kind == UiKind::ui ? curve.sup : curve.limsup_window;
  put(r, "tail_at_K_max", agg.back(), c);
  if (v.K_star) put(r, "K_star", *v.K_star, c);
  r.details["applies_to"] = "negative parts";
  r.details["window_start"] = std::to_string(v.window_start);
  if (kind == UiKind::aui && !v.stabilized && v.passes) r.notes.push_back("windowed limsup has not stabilized");
}

void shift_check(CheckContext& ctx, CheckResult& r) {
  const auto& sc = ctx.sc;
  const auto neg = sc.f.mapped([](const PiecewiseFn& x) { return part(x, PartSign::negative); });
  const auto N = shift_search(neg, sc.measures, sc.tol.ui, sc.K_grid.back(), sc.n_max - 1);
  r.verdict = N ? Verdict::holds : Verdict::violated;
  if (N) put(r, "N", static_cast<double>(*N), Certainty::window_truncated);
  r.details["found"] = yes_no(N.has_value());
  r.details["K_max"] = format_number(sc.K_grid.back());
}

void gap_numbers(CheckResult& r, const GapReport& g) {
  put(r, "lhs", g.lhs, g.lhs_certainty);
  put(r, "rhs", g.rhs, g.rhs_certainty);
  put(r, "gap", g.gap, worst(g.lhs_certainty, g.rhs_certainty));
  r.details["lhs_method"] = g.lhs_method;
  if (g.aui_negative_part) r.details["aui_negative_part"] = yes_no(g.aui_negative_part->passes);
  if (g.weak) r.details["weak_convergence_certified"] = yes_no(g.weak->certified);
  if (g.degenerate) r.details["degenerate"] = "true";
  r.notes.insert(r.notes.end(), g.notes.begin(), g.notes.end());
  r.verdict = from(g.conclusion);
  if (g.theorem_contradiction) {
    r.verdict = Verdict::error;
    r.error = "violation with every hypothesis certified; the scenario or its certificates are inconsistent";
  }
}

void minorant_numbers(CheckResult& r, const MinorantReport& m) {
  put(r, "lhs", m.lhs, m.lhs_certainty);
  put(r, "rhs", m.rhs, m.rhs_certainty);
  r.details["dominance"] = yes_no(m.dominance);
  if (m.dominance_index) r.details["dominance_index"] = std::to_string(*m.dominance_index);
  if (m.dominance_witness) r.details["dominance_witness"] = to_string(*m.dominance_witness);
  r.details["finite"] = yes_no(m.finite);
  r.details["inequality"] = yes_no(m.inequality);
  r.verdict = from(m.conclusion);
}

void uniform_numbers(CheckContext& ctx, CheckResult& r, bool dct) {
  const auto& u = ctx.uniform_report_once();
  const auto& gaps = dct ? u.sup_gap : u.inf_gap;
  put(r, dct ? "sup_gap_last" : "inf_gap_last", gaps.back(), Certainty::window_truncated);
  put(r, dct ? "cond_i_dct_last" : "cond_i_last", (dct ? u.cond_i_dct : u.cond_i).back(), Certainty::window_truncated);
  put(r, "cond_ii_last", u.cond_ii.back(), Certainty::window_truncated);
  put(r, "tv_last", u.tv.back(), Certainty::window_truncated);
  r.details["gap_trend"] = to_string(dct ? u.dct_trend : u.fatou_trend);
  r.details["cond_i_trend"] = to_string(dct ? u.cond_i_dct_trend : u.cond_i_trend);
  r.details["tv_trend"] = to_string(u.tv_trend);
  r.details["consistency"] = to_string(dct ? u.dct_consistency : u.fatou_consistency);
  r.notes.insert(r.notes.end(), u.notes.begin(), u.notes.end());
  r.verdict = from(dct ? u.uniform_dct : u.uniform_fatou);
  if (u.fixture_bug) {
    r.verdict = Verdict::error;
    r.error = "observed trends contradict the characterization; the scenario is inconsistent";
  }
}

void weak_gap_check(CheckContext& ctx, CheckResult& r) {
  const auto& sc = ctx.sc;
  const auto bank = sc.bank.empty() ? default_bank(sc.domain) : sc.bank;
  const auto w = weak_gap_bank(sc.measures, sc.limit_measure, bank, sc.certificate, sc.tol.gap);
  put(r, "gap_last", w.gaps.back(), Certainty::window_truncated);
  const auto trend = classify_trend(w.gaps, 1, sc.window_start(), sc.tol.gap);
  r.details["basis"] = to_string(w.basis);
  r.details["certified"] = yes_no(w.certified);
  r.details["bank_trend"] = to_string(trend);
  if (w.tv_trend) r.details["tv_trend"] = to_string(*w.tv_trend);
  if (w.certified)
    r.verdict = Verdict::holds;
  else if (trend == Trend::persistent)
    r.verdict = Verdict::violated;
  else
    r.verdict = Verdict::inconclusive;
}

void run_one(CheckContext& ctx, CheckResult& r) {
  const auto& sc = ctx.sc;
  const std::string& name = r.name;
  if (name == "ui") return ui_check(ctx, r, UiKind::ui);
  if (name == "aui") return ui_check(ctx, r, UiKind::aui);
  if (name == "shift") return shift_check(ctx, r);
  if (name == "fatou") return gap_numbers(r, fatou_report(sc));
  if (name == "minorant") return minorant_numbers(r, minorant_check(sc));
  if (name == "weakened_minorant") return minorant_numbers(r, weakened_minorant_probe(sc));
  if (name == "majorant") {
    const auto m = majorant_check(sc);
    put(r, "lhs", m.lhs, m.lhs_certainty);
    put(r, "rhs", m.rhs, m.rhs_certainty);
    r.details["dominance"] = yes_no(m.dominance);
    if (m.dominance_index) r.details["dominance_index"] = std::to_string(*m.dominance_index);
    r.details["finite"] = yes_no(m.finite);
    r.details["inequality"] = yes_no(m.inequality);
    r.verdict = from(m.conclusion);
    return;
  }
  if (name == "dct") {
    const auto d = dct_report(sc);
    gap_numbers(r, d.gap);
    put(r, "rhs_limsup", d.rhs_limsup, d.gap.rhs_certainty);
    put(r, "exception_mass", d.existence.exception_mass,
        d.existence.mass_exact ? Certainty::exact : Certainty::window_truncated);
    r.details["equality"] = yes_no(d.equality);
    r.details["sufficient"] = yes_no(d.sufficient);
    r.details["limit_exists"] = yes_no(d.limit_exists);
    if (d.aui_absolute) r.details["aui_absolute"] = yes_no(d.aui_absolute->passes);
    return;
  }
  if (name == "uniform_fatou") return uniform_numbers(ctx, r, false);
  if (name == "uniform_dct") return uniform_numbers(ctx, r, true);
  if (name == "weak_gap") return weak_gap_check(ctx, r);
  throw InvalidArgument("unknown check '" + name + "'");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- public API

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"ui",       "aui",      "shift",         "fatou",       "minorant",
                                              "weakened_minorant", "majorant", "dct", "uniform_fatou", "uniform_dct",
                                              "weak_gap"};
  return names;
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ScenarioDoc parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ScenarioError("", "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                e.what());
  }
  expect_object(j, "",
                {"name", "space", "n_max", "measures", "limit_measure", "functions", "g_functions", "limit_function",
                 "K_grid", "schedule", "epi_grid", "tolerances", "checks", "convergence_certificate"});
  ScenarioDoc d;
  d.name = read_string(require(j, "", "name"), "name");
  if (const json* space = optional_field(j, "space")) {
    expect_object(*space, "space", {"lo", "hi"});
    SpaceDoc s{read_xreal(require(*space, "space", "lo"), "space.lo"), read_xreal(require(*space, "space", "hi"), "space.hi")};
    if (!(s.lo < s.hi)) throw ScenarioError("space", "lo must be below hi");
    d.space = s;
  }
  if (const json* n = optional_field(j, "n_max")) {
    d.n_max = read_count(*n, "n_max");
    if (*d.n_max == 0) throw ScenarioError("n_max", "must be positive");
  }
  d.measures = read_measures(require(j, "", "measures"), "measures");
  if (const json* m = optional_field(j, "limit_measure"))
    d.limit_measure = read_single<MeasureDoc>(*m, "limit_measure", read_measure);
  d.functions = read_fn_seq(require(j, "", "functions"), "functions");
  if (const json* g = optional_field(j, "g_functions")) d.g_functions = read_fn_seq(*g, "g_functions");
  if (const json* f = optional_field(j, "limit_function"))
    d.limit_function = read_single<FnDoc>(*f, "limit_function", read_fn);
  if (const json* k = optional_field(j, "K_grid")) d.K_grid = read_grid(*k, "K_grid", true);
  if (const json* e = optional_field(j, "epi_grid")) d.epi_grid = read_grid(*e, "epi_grid", false);
  if (const json* s = optional_field(j, "schedule")) {
    expect_object(*s, "schedule", {"N", "delta"});
    ScheduleDoc sd;
    const json& N = read_array(require(*s, "schedule", "N"), "schedule.N");
    for (std::size_t i = 0; i < N.size(); ++i) sd.N.push_back(read_count(N[i], index_path("schedule.N", i)));
    const json& delta = read_array(require(*s, "schedule", "delta"), "schedule.delta");
    for (std::size_t i = 0; i < delta.size(); ++i) sd.delta.push_back(read_positive(delta[i], index_path("schedule.delta", i)));
    if (sd.N.empty() || sd.N.size() != sd.delta.size())
      throw ScenarioError("schedule", "N and delta must be nonempty and of equal length");
    d.schedule = sd;
  }
  if (const json* t = optional_field(j, "tolerances")) {
    expect_object(*t, "tolerances", {"gap", "ui", "stab", "epi", "eps"});
    auto get = [&](const char* key, std::optional<double>& slot) {
      if (const json* v = optional_field(*t, key)) slot = read_positive(*v, field_path("tolerances", key));
    };
    get("gap", d.tolerances.gap);
    get("ui", d.tolerances.ui);
    get("stab", d.tolerances.stab);
    get("epi", d.tolerances.epi);
    get("eps", d.tolerances.eps);
  }
  if (const json* c = optional_field(j, "checks")) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < read_array(*c, "checks").size(); ++i) {
      const auto p = index_path("checks", i);
      const auto name = read_string((*c)[i], p);
      const auto& names = check_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) throw ScenarioError(p, "unknown check '" + name + "'");
      if (!seen.insert(name).second) throw ScenarioError(p, "duplicate check '" + name + "'");
      d.checks.push_back(name);
    }
  }
  if (const json* c = optional_field(j, "convergence_certificate")) {
    expect_object(*c, "convergence_certificate", {"kind"});
    const auto kind = read_string(require(*c, "convergence_certificate", "kind"), "convergence_certificate.kind");
    if (kind == "tv")
      d.certificate = CertificateKind::tv;
    else if (kind == "builder")
      d.certificate = CertificateKind::builder;
    else if (kind == "none")
      d.certificate = CertificateKind::none;
    else
      throw ScenarioError("convergence_certificate.kind", "expected tv, builder or none");
  }
  const auto builder = referenced_builder(d);
  if (!builder) {
    if (!d.space) throw ScenarioError("space", "missing required field (no builder supplies it)");
    if (!d.n_max) throw ScenarioError("n_max", "missing required field (no builder supplies it)");
    if (!d.limit_measure) throw ScenarioError("limit_measure", "missing required field (no builder supplies it)");
  }
  if (d.n_max) {
    if (const auto* m = std::get_if<PerN<MeasureDoc>>(&d.measures)) check_length(*m, *d.n_max, "measures");
    if (const auto* f = std::get_if<FnSeqDoc>(&d.functions)) check_length(f->fns, *d.n_max, "functions");
    if (d.g_functions)
      if (const auto* g = std::get_if<FnSeqDoc>(&*d.g_functions)) check_length(g->fns, *d.n_max, "g_functions");
  }
  return d;
}

std::string emit_scenario(const ScenarioDoc& d) {
  json j = json::object();
  j["name"] = d.name;
  if (d.space) j["space"] = {{"lo", number(d.space->lo)}, {"hi", number(d.space->hi)}};
  if (d.n_max) j["n_max"] = *d.n_max;
  j["measures"] = either_json(d.measures);
  if (d.limit_measure) j["limit_measure"] = either_json(*d.limit_measure);
  j["functions"] = either_json(d.functions);
  if (d.g_functions) j["g_functions"] = either_json(*d.g_functions);
  if (d.limit_function) j["limit_function"] = either_json(*d.limit_function);
  if (d.K_grid) j["K_grid"] = *d.K_grid;
  if (d.epi_grid) j["epi_grid"] = *d.epi_grid;
  if (d.schedule) j["schedule"] = {{"N", d.schedule->N}, {"delta", d.schedule->delta}};
  json tol = json::object();
  if (d.tolerances.gap) tol["gap"] = *d.tolerances.gap;
  if (d.tolerances.ui) tol["ui"] = *d.tolerances.ui;
  if (d.tolerances.stab) tol["stab"] = *d.tolerances.stab;
  if (d.tolerances.epi) tol["epi"] = *d.tolerances.epi;
  if (d.tolerances.eps) tol["eps"] = *d.tolerances.eps;
  if (!tol.empty()) j["tolerances"] = tol;
  j["checks"] = d.checks;
  if (d.certificate) j["convergence_certificate"] = {{"kind", to_string(*d.certificate)}};
  return canonical(j);
}

Scenario to_scenario(const ScenarioDoc& doc) {
  const auto builder = referenced_builder(doc);
  std::optional<Scenario> fixture;
  if (builder) {
    FixtureParams params;
    params.n_max = doc.n_max;
    params.K_grid = doc.K_grid;
    try {
      fixture = build_fixture(*builder, params);
    } catch (const Error& e) {
      throw ScenarioError("n_max", e.what());
    }
  }
  Scenario sc;
  sc.name = doc.name;
  sc.domain = doc.space ? Interval{doc.space->lo.value(), doc.space->hi.value()} : fixture->domain;
  if (fixture && !(fixture->domain == sc.domain))
    throw ScenarioError("space", "does not match the space of builder '" + *builder + "'");
  sc.n_max = doc.n_max ? *doc.n_max : fixture->n_max;

  if (const auto* m = std::get_if<PerN<MeasureDoc>>(&doc.measures)) {
    check_length(*m, sc.n_max, "measures");
    std::vector<FiniteMeasure> ms;
    for (std::size_t n = 1; n <= (m->constant ? 1 : sc.n_max); ++n)
      ms.push_back(realize(nth(*m, n), sc.domain,
                           m->constant ? std::string("measures.constant") : index_path("measures.per_n", n - 1)));
    const bool constant = m->constant.has_value();
    sc.measures = MeasureSequence(sc.domain, sc.n_max,
                                  [ms = std::move(ms), constant](std::size_t n) { return constant ? ms[0] : ms[n - 1]; });
  } else {
    sc.measures = fixture->measures;
  }
  if (!doc.limit_measure || std::holds_alternative<BuilderRef>(*doc.limit_measure))
    sc.limit_measure = fixture->limit_measure;
  else
    sc.limit_measure = realize(std::get<MeasureDoc>(*doc.limit_measure), sc.domain, "limit_measure");

  if (const auto* f = std::get_if<FnSeqDoc>(&doc.functions))
    sc.f = realize(*f, sc.domain, sc.n_max, "functions");
  else
    sc.f = fixture->f;
  if (doc.g_functions) {
    if (const auto* g = std::get_if<FnSeqDoc>(&*doc.g_functions)) {
      sc.g = realize(*g, sc.domain, sc.n_max, "g_functions");
    } else {
      if (!fixture->g) throw ScenarioError("g_functions", "builder '" + *builder + "' has no g sequence");
      sc.g = fixture->g;
    }
  }
  if (doc.limit_function) {
    if (const auto* f = std::get_if<FnDoc>(&*doc.limit_function))
      sc.limit_function = realize(*f, sc.domain, "limit_function");
    else
      sc.limit_function = fixture->limit_function;
  } else if (fixture && std::holds_alternative<BuilderRef>(doc.functions)) {
    sc.limit_function = fixture->limit_function;
  }

  sc.K_grid = doc.K_grid ? *doc.K_grid : (fixture ? fixture->K_grid : default_k_grid());
  sc.epi_grid = doc.epi_grid.value_or(std::vector<double>{});
  if (doc.schedule) {
    sc.schedule.N = doc.schedule->N;
    sc.schedule.delta = doc.schedule->delta;
    sc.schedule.n_max = sc.n_max;
  } else {
    sc.schedule = EpiSchedule::standard(sc.n_max);
  }
  try {
    sc.schedule.validate();
  } catch (const Error& e) {
    throw ScenarioError("schedule", e.what());
  }
  sc.tol = fixture ? fixture->tol : Tolerances{};
  if (doc.tolerances.gap) sc.tol.gap = *doc.tolerances.gap;
  if (doc.tolerances.ui) sc.tol.ui = *doc.tolerances.ui;
  if (doc.tolerances.stab) sc.tol.stab = *doc.tolerances.stab;
  if (doc.tolerances.epi) sc.tol.epi = *doc.tolerances.epi;
  if (doc.tolerances.eps) sc.tol.eps = *doc.tolerances.eps;
  if (doc.certificate)
    sc.certificate = *doc.certificate;
  else if (fixture && std::holds_alternative<BuilderRef>(doc.measures))
    sc.certificate = fixture->certificate;
  if (sc.certificate == CertificateKind::builder && !(fixture && std::holds_alternative<BuilderRef>(doc.measures)))
    throw ScenarioError("convergence_certificate.kind", "'builder' needs builder-supplied measures");
  try {
    sc.validate();
  } catch (const Error& e) {
    throw ScenarioError("", e.what());
  }
  return sc;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::error: return "error";
  }
  return "error";
}

std::string scenario_hash(const ScenarioDoc& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(emit_scenario(doc)));
  return buf;
}

ReportDoc run_checks(const ScenarioDoc& doc) {
  ReportDoc r;
  r.tool_version = MLIM_VERSION;
  r.scenario = doc.name;
  r.scenario_hash = scenario_hash(doc);
  std::vector<std::string> requested;
  for (const auto& name : check_names())
    if (std::find(doc.checks.begin(), doc.checks.end(), name) != doc.checks.end()) requested.push_back(name);

  std::optional<Scenario> sc;
  std::string setup_error;
  try {
    sc = to_scenario(doc);
    r.n_max = sc->n_max;
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  std::optional<CheckContext> ctx;
  if (sc) ctx.emplace(CheckContext{*sc, r, std::nullopt, std::nullopt});
  for (const auto& name : requested) {
    CheckResult res;
    res.name = name;
    if (!sc) {
      res.verdict = Verdict::error;
      res.error = setup_error;
    } else {
      try {
        run_one(*ctx, res);
      } catch (const std::exception& e) {
        res = CheckResult{};
        res.name = name;
        res.verdict = Verdict::error;
        res.error = e.what();
      }
    }
    r.checks.push_back(std::move(res));
  }
  return r;
}

std::string emit_report(const ReportDoc& r) {
  json j = json::object();
  j["tool"] = "measure-limits";
  j["tool_version"] = r.tool_version;
  j["scenario"] = r.scenario;
  j["scenario_hash"] = r.scenario_hash;
  j["n_max"] = r.n_max;
  json checks = json::object();
  for (const auto& c : r.checks) {
    json numbers = json::object();
    for (const auto& [key, n] : c.numbers) numbers[key] = {{"value", number(n.value)}, {"certainty", to_string(n.certainty)}};
    json entry{{"verdict", to_string(c.verdict)}, {"numbers", numbers}, {"details", c.details}, {"notes", c.notes}};
    if (!c.error.empty()) entry["error"] = c.error;
    checks[c.name] = entry;
  }
  j["checks"] = checks;
  json curves = json::array();
  for (const auto& c : r.curves) curves.push_back(c.name);
  j["curves"] = curves;
  return canonical(j);
}

int exit_code(const ReportDoc& r) {
  bool violated = false;
  for (const auto& c : r.checks) {
    if (c.verdict == Verdict::error) return 1;
    violated = violated || c.verdict == Verdict::violated;
  }
  return violated ? 2 : 0;
}

std::string emit_conformance(const std::vector<ConformanceReport>& runs) {
  auto quantity = [](const Quantity& q) -> json {
    if (const auto* x = std::get_if<XReal>(&q)) return number(*x);
    if (const auto* b = std::get_if<bool>(&q)) return *b;
    return std::get<std::string>(q);
  };
  json fixtures = json::object();
  for (const auto& run : runs) {
    json entries = json::array();
    for (const auto& e : run.entries) {
      json entry{{"quantity", e.expected.id},
                 {"expected", quantity(e.expected.value)},
                 {"tol", e.expected.tol},
                 {"provenance", e.expected.provenance},
                 {"pass", e.pass}};
      entry["computed"] = e.computed ? quantity(*e.computed) : json(nullptr);
      if (!e.error.empty()) entry["error"] = e.error;
      entries.push_back(entry);
    }
    fixtures[run.fixture] = {{"n_max", run.n_max}, {"failures", run.failures}, {"entries", entries}};
  }
  return canonical({{"tool", "measure-limits"}, {"tool_version", MLIM_VERSION}, {"fixtures", fixtures}});
}

int exit_code(const std::vector<ConformanceReport>& runs) {
  bool failed = false;
  for (const auto& run : runs)
    for (const auto& e : run.entries) {
      if (!e.error.empty()) return 1;
      failed = failed || !e.pass;
    }
  return failed ? 2 : 0;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void emit_curves(const ReportDoc& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : r.curves) write_atomic(dir / c.name, c.csv);
}

}  // namespace mlim
