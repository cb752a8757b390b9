#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlim/fatou.hpp"

namespace mlim {

struct FixtureParams {
  std::optional<std::size_t> n_max{};
  std::optional<std::vector<double>> K_grid{};
};

/// Registered fixture ids, in listing order.
std::vector<std::string> fixture_ids();
std::string fixture_description(const std::string& id);
bool has_fixture(const std::string& id);

/// Throws InvalidArgument for an unknown id or parameters beyond the
/// fixture's memory budget.
Scenario build_fixture(const std::string& id, const FixtureParams& params = {});

/// Steps of the truncated staircase: cells i = 1..kStaircaseSteps carry -i,
/// one residual cell carries -(kStaircaseSteps + 2) and has the exact
/// remainder mass.
inline constexpr int kStaircaseSteps = 50;

/// Upper bound on what the truncation changes in any tail integral.
double staircase_residual();

using Quantity = std::variant<XReal, bool, std::string>;

std::string to_string(const Quantity& q);

struct ExpectedValue {
  std::string id;
  Quantity value;
  double tol = 0.0;
  std::string provenance;
};

struct ConformanceEntry {
  ExpectedValue expected;
  std::optional<Quantity> computed;
  std::string error;
  bool pass = false;
};

struct ConformanceReport {
  std::string fixture;
  std::size_t n_max = 0;
  std::vector<ConformanceEntry> entries;
  std::size_t failures = 0;
};

std::vector<ExpectedValue> expected_table(const std::string& id, const Scenario& sc);

/// Builds the fixture, computes every quantity of its expected table and
/// compares.
ConformanceReport run_fixture(const std::string& id, const FixtureParams& params = {});

}  // namespace mlim
