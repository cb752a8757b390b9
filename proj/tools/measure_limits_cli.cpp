// measure-limits: run scenario checks and the fixture gallery.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mlim/errors.hpp"
#include "mlim/gallery.hpp"
#include "mlim/parallel.hpp"
#include "mlim/scenario_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void deliver(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    mlim::write_atomic(out, text);
}

int run_check(const std::string& file, const std::optional<std::string>& checks, const std::string& out,
              const std::string& curves_dir, std::optional<double> tol, std::optional<std::size_t> nmax) {
  mlim::ScenarioDoc doc = mlim::parse_scenario(read_file(file));
  if (checks) {
    doc.checks.clear();
    for (const auto& c : split_commas(*checks)) {
      const auto& names = mlim::check_names();
      if (std::find(names.begin(), names.end(), c) == names.end()) throw mlim::ScenarioError("--checks", "unknown check '" + c + "'");
      if (std::find(doc.checks.begin(), doc.checks.end(), c) == doc.checks.end()) doc.checks.push_back(c);
    }
  }
  if (tol) doc.tolerances.gap = doc.tolerances.ui = doc.tolerances.epi = *tol;
  if (nmax) doc.n_max = *nmax;
  const auto report = mlim::run_checks(doc);
  deliver(mlim::emit_report(report), out);
  if (!curves_dir.empty()) mlim::emit_curves(report, curves_dir);
  for (const auto& c : report.checks) {
    std::cerr << c.name << ": " << mlim::to_string(c.verdict);
    if (!c.error.empty()) std::cerr << " (" << c.error << ")";
    std::cerr << "\n";
  }
  return mlim::exit_code(report);
}

int run_gallery(const std::string& id, const std::string& out) {
  std::vector<std::string> ids = id == "all" ? mlim::fixture_ids() : std::vector<std::string>{id};
  for (const auto& i : ids)
    if (!mlim::has_fixture(i)) throw mlim::InvalidArgument("unknown fixture '" + i + "'");
  std::vector<mlim::ConformanceReport> runs(ids.size());
  mlim::parallel_for(ids.size(), [&](std::size_t k) { runs[k] = mlim::run_fixture(ids[k]); });
  deliver(mlim::emit_conformance(runs), out);
  for (const auto& r : runs) {
    std::cerr << r.fixture << ": " << (r.entries.size() - r.failures) << "/" << r.entries.size() << " pass\n";
    for (const auto& e : r.entries)
      if (!e.pass)
        std::cerr << "  " << e.expected.id << ": expected " << mlim::to_string(e.expected.value) << ", got "
                  << (e.computed ? mlim::to_string(*e.computed) : e.error) << "\n";
  }
  return mlim::exit_code(runs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of limit theorems for integrals against converging measures"};
  app.set_version_flag("--version", std::string(MLIM_VERSION));
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check", "Run the checks of a scenario file");
  std::string file;
  std::optional<std::string> checks;
  std::string out;
  std::string curves_dir;
  std::optional<double> tol;
  std::optional<std::size_t> nmax;
  check->add_option("scenario", file, "Scenario JSON file")->required();
  check->add_option("--checks", checks, "Comma-separated checks, replacing the file's list");
  check->add_option("--out", out, "Report path (default: stdout)");
  check->add_option("--curves-dir", curves_dir, "Directory for CSV curves");
  check->add_option("--tol", tol, "Decision tolerance for gaps, tails and epi-limits")->check(CLI::PositiveNumber);
  check->add_option("--nmax", nmax, "Override n_max")->check(CLI::PositiveNumber);

  auto* gallery = app.add_subcommand("gallery", "Built-in fixtures");
  gallery->require_subcommand(1);
  auto* run = gallery->add_subcommand("run", "Compare fixtures against their expected tables");
  std::string fixture;
  std::string gallery_out;
  run->add_option("id", fixture, "Fixture id or 'all'")->required();
  run->add_option("--out", gallery_out, "Report path (default: stdout)");
  auto* list = gallery->add_subcommand("list", "List fixture ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return run_check(file, checks, out, curves_dir, tol, nmax);
    if (*run) return run_gallery(fixture, gallery_out);
    if (*list) {
      for (const auto& id : mlim::fixture_ids()) std::cout << id << "\t" << mlim::fixture_description(id) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
