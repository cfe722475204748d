#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsigma/error.hpp"

namespace gridsigma::grid {

enum class BusKind { slack, pv, pq };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::pq;
  double p_load = 0.0;  // pu
  double q_load = 0.0;  // pu
  double g_shunt = 0.0;  // pu at 1.0 pu voltage
  double b_shunt = 0.0;
  double v_mag_init = 1.0;  // pu
  double v_ang_init = 0.0;  // rad

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;  // total line charging
  double tap = 1.0;  // off-nominal ratio at the "from" side
  double shift = 0.0;  // rad
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;
  double p_set = 0.0;
  double v_set = 1.0;
  double q_min = 0.0;
  double q_max = 0.0;

  bool operator==(const Generator&) const = default;
};

/// Bus/branch/generator model with every quantity in per-unit on base_mva.
struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;

  bool operator==(const GridCase&) const = default;

  /// Ordinal of the bus with external id `id`; throws DomainError if absent.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const;

  /// Throws DomainError naming the first violated invariant.
  void validate() const;
};

/// Parses MATPOWER-style text (mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch).
/// Errors are ParseError with the offending line number.
GridCase parse_case(std::string_view text);

/// Inverse of parse_case: parse_case(serialize_case(c)) == c for valid c.
std::string serialize_case(const GridCase& grid_case);

/// The standard IEEE 14-bus case (MATPOWER case14 data).
GridCase builtin_ieee14();
std::string_view ieee14_case_text();

// ---------------------------------------------------------------------------
// AC power flow

struct PowerFlowSolution {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
  std::vector<double> p_inj;  // net injection, generation minus load
  std::vector<double> q_inj;
  std::vector<double> p_flow_from;
  std::vector<double> q_flow_from;
  std::vector<double> p_flow_to;
  std::vector<double> q_flow_to;
  int iterations = 0;
  double max_mismatch = 0.0;

  bool operator==(const PowerFlowSolution&) const = default;
};

class ConvergenceError : public DomainError {
 public:
  ConvergenceError(int iterations, double mismatch);
  double final_mismatch() const noexcept { return mismatch_; }

 private:
  double mismatch_;
};

class SingularJacobianError : public DomainError {
 public:
  explicit SingularJacobianError(int iteration);
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 20;
  /// PV->PQ switching on generator reactive limits. Off unless requested.
  bool enforce_q_limits = false;
};

/// Polar-form Newton-Raphson starting from the case's stored voltages (PV and
/// slack magnitudes start at their generator set points). `load_scale`
/// multiplies each bus's p_load and q_load.
PowerFlowSolution solve_newton(const GridCase& grid_case,
                               std::span<const double> load_scale,
                               const SolverOptions& options = {});

/// Sum over in-service branches of (P_from + P_to) plus bus shunt conductance
/// consumption; equals the sum of net injections at a converged solution.
double active_losses(const GridCase& grid_case, const PowerFlowSolution& sol);

// ---------------------------------------------------------------------------
// Measurement layout

enum class SensorKind { p_inj, q_inj, p_flow, q_flow, v_mag };

struct SensorEntry {
  std::string name;
  SensorKind kind = SensorKind::p_inj;
  std::size_t index = 0;  // bus ordinal or branch ordinal

  bool operator==(const SensorEntry&) const = default;
};

struct FeatureLayout {
  std::vector<SensorEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  std::optional<std::size_t> find(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const FeatureLayout&) const = default;
};

/// P_<bus>, Q_<bus>, Pf_<branch>, Qf_<branch> in that order (68 sensors on
/// IEEE 14-bus); with include_voltage, V_<bus> rows are appended.
FeatureLayout default_layout(const GridCase& grid_case, bool include_voltage = false);

std::string_view sensor_kind_tag(SensorKind kind);

std::vector<double> extract_features(const PowerFlowSolution& sol,
                                     const FeatureLayout& layout);

}  // namespace gridsigma::grid
