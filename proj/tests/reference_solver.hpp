#pragma once

// Gauss-Seidel power flow with its own admittance assembly, used to
// cross-check the Newton solver.

#include <complex>
#include <span>
#include <vector>

#include "gridsigma/grid.hpp"

namespace testsupport {

struct GsResult {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
  int sweeps = 0;
  bool converged = false;
};

inline GsResult gauss_seidel(const gridsigma::grid::GridCase& c, std::span<const double> load_scale,
                             double tol = 1e-13, int max_sweeps = 200000) {
  using cd = std::complex<double>;
  using gridsigma::grid::BusKind;
  const std::size_t n = c.buses.size();
  std::vector<std::vector<cd>> y(n, std::vector<cd>(n, cd{}));
  auto idx = [&](int id) {
    for (std::size_t i = 0; i < n; ++i) {
      if (c.buses[i].id == id) return i;
    }
    return n;
  };
  for (const auto& br : c.branches) {
    if (!br.in_service) continue;
    const std::size_t f = idx(br.from);
    const std::size_t t = idx(br.to);
    const cd series = 1.0 / cd(br.r, br.x);
    const cd half_b(0.0, br.b_charging / 2.0);
    const cd a = std::polar(br.tap, br.shift);
    y[f][f] += (series + half_b) / (br.tap * br.tap);
    y[t][t] += series + half_b;
    y[f][t] -= series / std::conj(a);
    y[t][f] -= series / a;
  }
  for (std::size_t i = 0; i < n; ++i) y[i][i] += cd(c.buses[i].g_shunt, c.buses[i].b_shunt);

  std::vector<double> p_spec(n, 0.0);
  std::vector<double> q_spec(n, 0.0);
  std::vector<double> v_set(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    p_spec[i] = -c.buses[i].p_load * load_scale[i];
    q_spec[i] = -c.buses[i].q_load * load_scale[i];
    v_set[i] = c.buses[i].v_mag_init;
  }
  for (const auto& g : c.gens) {
    const std::size_t i = idx(g.bus);
    p_spec[i] += g.p_set;
    v_set[i] = g.v_set;
  }

  std::vector<cd> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool fixed_mag = c.buses[i].kind != BusKind::pq;
    v[i] = std::polar(fixed_mag ? v_set[i] : 1.0, c.buses[i].kind == BusKind::slack ? c.buses[i].v_ang_init : 0.0);
  }

  GsResult r;
  constexpr double kAccel = 1.6;
  for (r.sweeps = 1; r.sweeps <= max_sweeps; ++r.sweeps) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c.buses[i].kind == BusKind::slack) continue;
      cd sum{};
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) sum += y[i][k] * v[k];
      }
      double q = q_spec[i];
      if (c.buses[i].kind == BusKind::pv) q = -std::imag(std::conj(v[i]) * (sum + y[i][i] * v[i]));
      cd next = (cd(p_spec[i], -q) / std::conj(v[i]) - sum) / y[i][i];
      if (c.buses[i].kind == BusKind::pv) {
        next = std::polar(v_set[i], std::arg(next));
      } else {
        next = v[i] + kAccel * (next - v[i]);
      }
      change = std::max(change, std::abs(next - v[i]));
      v[i] = next;
    }
    if (change < tol) {
      r.converged = true;
      break;
    }
  }
  for (const auto& vi : v) {
    r.v_mag.push_back(std::abs(vi));
    r.v_ang.push_back(std::arg(vi));
  }
  return r;
}

}  // namespace testsupport
