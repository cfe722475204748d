#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "gridsigma/grid.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::grid {
namespace {

using cd = std::complex<double>;

struct BranchAdmittance {
  cd ff, ft, tf, tt;
};

// Pi-model with the off-nominal transformer on the "from" side.
BranchAdmittance branch_admittance(const Branch& br) {
  const cd ys = 1.0 / cd(br.r, br.x);
  const cd half_charging(0.0, br.b_charging / 2.0);
  const cd t = std::polar(br.tap, br.shift);
  return {
      (ys + half_charging) / (br.tap * br.tap),
      -ys / std::conj(t),
      -ys / t,
      ys + half_charging,
  };
}

Eigen::MatrixXcd build_ybus(const GridCase& c, const std::vector<std::size_t>& from_idx,
                            const std::vector<std::size_t>& to_idx) {
  const auto n = static_cast<Eigen::Index>(c.buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (!br.in_service) continue;
    const auto a = branch_admittance(br);
    const auto f = static_cast<Eigen::Index>(from_idx[k]);
    const auto t = static_cast<Eigen::Index>(to_idx[k]);
    y(f, f) += a.ff;
    y(f, t) += a.ft;
    y(t, f) += a.tf;
    y(t, t) += a.tt;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = c.buses[static_cast<std::size_t>(i)];
    y(i, i) += cd(b.g_shunt, b.b_shunt);
  }
  return y;
}

struct NewtonResult {
  Eigen::VectorXcd v;
  int iterations = 0;
  double mismatch = 0.0;
};

// Solves for the given bus classification; `kinds` may differ from the case
// when reactive limits switch PV buses to PQ.
NewtonResult newton(const Eigen::MatrixXcd& y, const std::vector<BusKind>& kinds,
                    const Eigen::VectorXcd& s_spec, Eigen::VectorXd vm, Eigen::VectorXd va,
                    const SolverOptions& opt) {
  std::vector<Eigen::Index> pvpq;
  std::vector<Eigen::Index> pq;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] != BusKind::slack) pvpq.push_back(static_cast<Eigen::Index>(i));
    if (kinds[i] == BusKind::pq) pq.push_back(static_cast<Eigen::Index>(i));
  }
  const auto npvpq = static_cast<Eigen::Index>(pvpq.size());
  const auto npq = static_cast<Eigen::Index>(pq.size());
  const Eigen::Index dim = npvpq + npq;

  Eigen::VectorXcd v(vm.size());
  auto assemble = [&] {
    for (Eigen::Index i = 0; i < vm.size(); ++i) v(i) = std::polar(vm(i), va(i));
  };
  assemble();

  Eigen::VectorXd f(dim);
  auto mismatch = [&] {
    const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate()) - s_spec;
    for (Eigen::Index k = 0; k < npvpq; ++k) f(k) = s(pvpq[static_cast<std::size_t>(k)]).real();
    for (Eigen::Index k = 0; k < npq; ++k) f(npvpq + k) = s(pq[static_cast<std::size_t>(k)]).imag();
    return dim == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  };

  double norm = mismatch();
  int it = 0;
  while (norm > opt.tol) {
    if (it >= opt.max_iter) throw ConvergenceError(it, norm);

    const Eigen::VectorXcd ibus = y * v;
    const Eigen::VectorXcd vnorm = v.cwiseQuotient(v.cwiseAbs().cast<cd>());
    // dS/dVm = diag(V) conj(Y diag(Vnorm)) + conj(diag(I)) diag(Vnorm)
    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
    const Eigen::MatrixXcd ds_dvm =
        v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate() +
        Eigen::MatrixXcd(ibus.conjugate().asDiagonal()) * vnorm.asDiagonal();
    Eigen::MatrixXcd tmp = -(y * v.asDiagonal());
    tmp.diagonal() += ibus;
    const Eigen::MatrixXcd ds_dva = cd(0.0, 1.0) * (v.asDiagonal() * tmp.conjugate());

    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index r = 0; r < npvpq; ++r) {
      const auto br = pvpq[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < npvpq; ++c) jac(r, c) = ds_dva(br, pvpq[static_cast<std::size_t>(c)]).real();
      for (Eigen::Index c = 0; c < npq; ++c) jac(r, npvpq + c) = ds_dvm(br, pq[static_cast<std::size_t>(c)]).real();
    }
    for (Eigen::Index r = 0; r < npq; ++r) {
      const auto br = pq[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < npvpq; ++c) jac(npvpq + r, c) = ds_dva(br, pvpq[static_cast<std::size_t>(c)]).imag();
      for (Eigen::Index c = 0; c < npq; ++c) jac(npvpq + r, npvpq + c) = ds_dvm(br, pq[static_cast<std::size_t>(c)]).imag();
    }

    ++it;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw SingularJacobianError(it);
    const Eigen::VectorXd dx = lu.solve(-f);
    if (!dx.allFinite()) throw SingularJacobianError(it);

    for (Eigen::Index k = 0; k < npvpq; ++k) va(pvpq[static_cast<std::size_t>(k)]) += dx(k);
    for (Eigen::Index k = 0; k < npq; ++k) vm(pq[static_cast<std::size_t>(k)]) += dx(npvpq + k);
    assemble();
    norm = mismatch();
    if (!std::isfinite(norm)) throw ConvergenceError(it, norm);
  }
  return {v, it, norm};
}

}  // namespace

ConvergenceError::ConvergenceError(int iterations, double mismatch)
    : DomainError("power flow did not converge after " + std::to_string(iterations) +
                  " iterations (max mismatch " + text::exact(mismatch) + " pu)"),
      mismatch_(mismatch) {}

SingularJacobianError::SingularJacobianError(int iteration)
    : DomainError("singular Jacobian at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

PowerFlowSolution solve_newton(const GridCase& c, std::span<const double> load_scale,
                               const SolverOptions& opt) {
  c.validate();
  const std::size_t n = c.buses.size();
  if (load_scale.size() != n) {
    throw DomainError("load_scale has " + std::to_string(load_scale.size()) +
                      " entries for " + std::to_string(n) + " buses");
  }
  if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");

  std::vector<std::size_t> from_idx(c.branches.size());
  std::vector<std::size_t> to_idx(c.branches.size());
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    from_idx[k] = c.bus_index(c.branches[k].from);
    to_idx[k] = c.bus_index(c.branches[k].to);
  }
  const Eigen::MatrixXcd y = build_ybus(c, from_idx, to_idx);

  std::vector<BusKind> kinds(n);
  Eigen::VectorXcd s_spec = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd vm(static_cast<Eigen::Index>(n));
  Eigen::VectorXd va(static_cast<Eigen::Index>(n));
  std::vector<bool> has_gen(n, false);
  std::vector<double> q_max(n, 0.0);
  std::vector<double> q_min(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = c.buses[i];
    const auto ei = static_cast<Eigen::Index>(i);
    kinds[i] = b.kind;
    s_spec(ei) = -cd(b.p_load * load_scale[i], b.q_load * load_scale[i]);
    vm(ei) = b.v_mag_init;
    va(ei) = b.v_ang_init;
  }
  for (const auto& g : c.gens) {
    const std::size_t i = c.bus_index(g.bus);
    const auto ei = static_cast<Eigen::Index>(i);
    s_spec(ei) += g.p_set;
    if (!has_gen[i] && c.buses[i].kind != BusKind::pq) vm(ei) = g.v_set;
    has_gen[i] = true;
    q_max[i] += g.q_max;
    q_min[i] += g.q_min;
  }

  NewtonResult res = newton(y, kinds, s_spec, vm, va, opt);
  if (opt.enforce_q_limits) {
    int total_iterations = res.iterations;
    for (std::size_t round = 0; round < n; ++round) {
      const Eigen::VectorXcd s = res.v.cwiseProduct((y * res.v).conjugate());
      bool switched = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (kinds[i] != BusKind::pv) continue;
        const auto ei = static_cast<Eigen::Index>(i);
        const double q_load = c.buses[i].q_load * load_scale[i];
        const double q_gen = s(ei).imag() + q_load;
        if (q_gen > q_max[i] || q_gen < q_min[i]) {
          kinds[i] = BusKind::pq;
          s_spec(ei) = cd(s_spec(ei).real(), (q_gen > q_max[i] ? q_max[i] : q_min[i]) - q_load);
          switched = true;
        }
      }
      if (!switched) break;
      Eigen::VectorXd vm2 = res.v.cwiseAbs();
      Eigen::VectorXd va2 = res.v.unaryExpr([](cd z) { return std::arg(z); }).real();
      res = newton(y, kinds, s_spec, vm2, va2, opt);
      total_iterations += res.iterations;
    }
    res.iterations = total_iterations;
  }

  PowerFlowSolution sol;
  sol.iterations = res.iterations;
  sol.max_mismatch = res.mismatch;
  const Eigen::VectorXcd s = res.v.cwiseProduct((y * res.v).conjugate());
  for (std::size_t i = 0; i < n; ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    sol.v_mag.push_back(std::abs(res.v(ei)));
    sol.v_ang.push_back(std::arg(res.v(ei)));
    sol.p_inj.push_back(s(ei).real());
    sol.q_inj.push_back(s(ei).imag());
  }
  // Keep the exact set points where the solver held them fixed.
  const std::size_t slack = c.slack_index();
  sol.v_mag[slack] = vm(static_cast<Eigen::Index>(slack));
  sol.v_ang[slack] = va(static_cast<Eigen::Index>(slack));

  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (!br.in_service) {
      sol.p_flow_from.push_back(0.0);
      sol.q_flow_from.push_back(0.0);
      sol.p_flow_to.push_back(0.0);
      sol.q_flow_to.push_back(0.0);
      continue;
    }
    const auto a = branch_admittance(br);
    const cd vf = res.v(static_cast<Eigen::Index>(from_idx[k]));
    const cd vt = res.v(static_cast<Eigen::Index>(to_idx[k]));
    const cd sf = vf * std::conj(a.ff * vf + a.ft * vt);
    const cd st = vt * std::conj(a.tf * vf + a.tt * vt);
    sol.p_flow_from.push_back(sf.real());
    sol.q_flow_from.push_back(sf.imag());
    sol.p_flow_to.push_back(st.real());
    sol.q_flow_to.push_back(st.imag());
  }
  return sol;
}

double active_losses(const GridCase& c, const PowerFlowSolution& sol) {
  double total = 0.0;
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    if (c.branches[k].in_service) total += sol.p_flow_from[k] + sol.p_flow_to[k];
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    total += c.buses[i].g_shunt * sol.v_mag[i] * sol.v_mag[i];
  }
  return total;
}

}  // namespace gridsigma::grid
