#include "pfreq/ricciflow.hpp"

#include "pfreq/analytic_basis.hpp"
#include "pfreq/eigensolver.hpp"
#include "pfreq/error.hpp"
#include "pfreq/frequency.hpp"
#include "pfreq/io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pfreq {

namespace {

constexpr double kEightPi = 8.0 * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

class SpectralBackground final : public ConformalBackground {
 public:
  SpectralBackground(double radius, int band, int subdivision)
      : radius_(radius),
        band_(band),
        subdivision_(subdivision),
        geometry_(Geometry::round_sphere(radius, subdivision)),
        basis_(std::make_shared<SphereHarmonicBasis>(radius, band)) {
    if (band < 1) throw ParameterError("spectral background needs band >= 1");
    const auto k = static_cast<Eigen::Index>(basis_->size());
    const int n_theta = 2 * band + 2;
    const Quadrature q = sphere_quadrature(radius, n_theta, 2 * n_theta);
    const auto nq = static_cast<Eigen::Index>(q.size());
    weights_ = q.weights;
    nodes_ = q.points;
    phi_.resize(k, nq);
    grad_.resize(3 * nq, k);
    Eigen::VectorXd v(k);
    Eigen::Matrix3Xd g(3, k);
    for (Eigen::Index j = 0; j < nq; ++j) {
      basis_->evaluate(q.points[static_cast<std::size_t>(j)], basis_->size(), v, &g);
      phi_.col(j) = v;
      grad_.middleRows(3 * j, 3) = g;
    }
    grad_t_ = grad_.transpose();
    sample_phi_ = basis_->sample(geometry_.positions(), basis_->size());
    lam_ = basis_->eigenvalues();
    r0_ = Eigen::VectorXd::Constant(nq, 2.0 / (radius * radius));
  }

  std::string name() const override { return "spectral-sphere"; }
  nlohmann::json to_json() const override {
    return {{"kind", name()}, {"radius", radius_}, {"band", band_}, {"subdivision", subdivision_}};
  }
  const Geometry& geometry() const override { return geometry_; }
  Eigen::Index dof() const override { return lam_.size(); }
  double stiffest_mode() const override { return lam_.maxCoeff(); }
  double spectral_gap() const override { return lam_[1]; }

  Eigen::VectorXd state_from(const ScalarField& f) const override {
    if (f.size() != geometry_.sample_count()) throw ParameterError("field length does not match the background samples");
    if (f.has_exact()) {
      Eigen::VectorXd nodes(weights_.size());
      for (Eigen::Index j = 0; j < nodes.size(); ++j) nodes[j] = f.exact(nodes_[static_cast<std::size_t>(j)]);
      return project(nodes);
    }
    return sample_phi_.transpose().colPivHouseholderQr().solve(f.values);
  }

  ScalarField sample(const Eigen::VectorXd& state) const override {
    ScalarField f;
    f.values = sample_phi_.transpose() * state;
    f.exact = [b = basis_, c = state](const Vec3& p) {
      Eigen::VectorXd v(c.size());
      b->evaluate(p, static_cast<std::size_t>(c.size()), v);
      return v.dot(c);
    };
    return f;
  }

  ScalarField sample_curvature(const Eigen::VectorXd& u) const override {
    const double r0 = 2.0 / (radius_ * radius_);
    auto eval = [b = basis_, c = u, lc = Eigen::VectorXd(-lam_.cwiseProduct(u)), r0](const Vec3& p) {
      Eigen::VectorXd v(c.size());
      b->evaluate(p, static_cast<std::size_t>(c.size()), v);
      return std::exp(-2.0 * v.dot(c)) * (r0 - 2.0 * v.dot(lc));
    };
    ScalarField f;
    f.values.resize(static_cast<Eigen::Index>(geometry_.sample_count()));
    const Eigen::VectorXd uv = sample_phi_.transpose() * u;
    const Eigen::VectorXd lv = sample_phi_.transpose() * (-lam_.cwiseProduct(u));
    f.values = ((-2.0 * uv).array().exp() * (r0 - 2.0 * lv.array())).matrix();
    f.exact = std::move(eval);
    return f;
  }

  const Eigen::VectorXd& node_weights() const override { return weights_; }
  Eigen::VectorXd node_values(const Eigen::VectorXd& state) const override { return phi_.transpose() * state; }
  Eigen::VectorXd laplacian(const Eigen::VectorXd& state) const override { return -lam_.cwiseProduct(state); }
  Eigen::VectorXd node_laplacian(const Eigen::VectorXd& nodes) const override {
    return node_values(laplacian(project(nodes)));
  }
  Eigen::VectorXd project(const Eigen::VectorXd& nodes) const override {
    return phi_ * weights_.cwiseProduct(nodes);
  }
  const Eigen::VectorXd& background_curvature() const override { return r0_; }

  Eigen::VectorXd heat_step(const Eigen::VectorXd& u_mid, const Eigen::VectorXd& v, double ds) const override {
    const Eigen::VectorXd w = weights_.cwiseProduct((2.0 * node_values(u_mid)).array().exp().matrix());
    const Eigen::MatrixXd mg = phi_ * w.asDiagonal() * phi_.transpose();
    Eigen::MatrixXd a = mg;
    a.diagonal() += 0.5 * ds * lam_;
    const Eigen::VectorXd rhs = mg * v - 0.5 * ds * lam_.cwiseProduct(v);
    return a.ldlt().solve(rhs);
  }

  std::pair<double, double> weighted_forms(const Eigen::VectorXd& u, const Eigen::VectorXd& weight_nodes,
                                           const Eigen::VectorXd& v) const override {
    const Eigen::VectorXd g = grad_ * v;
    const Eigen::VectorXd vals = node_values(v);
    const Eigen::VectorXd e2u = (2.0 * node_values(u)).array().exp();
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
      num += weights_[j] * weight_nodes[j] * g.segment<3>(3 * j).squaredNorm();
      den += weights_[j] * weight_nodes[j] * e2u[j] * vals[j] * vals[j];
    }
    return {num, den};
  }

  double weighted_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& weight_nodes) const override {
    const Eigen::VectorXd w = weights_.cwiseProduct(weight_nodes);
    if (w.minCoeff() < 0.0) throw DomainError("weighted_gap: weight must be nonnegative");
    Eigen::VectorXd w3(3 * w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) w3.segment<3>(3 * j).setConstant(std::sqrt(w[j]));
    const Eigen::VectorXd wm = w.cwiseProduct((2.0 * node_values(u)).array().exp().matrix()).cwiseSqrt();
    // Symmetric rank-k products; only the lower triangles are filled and read.
    const Eigen::Index n = phi_.rows();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    k.selfadjointView<Eigen::Lower>().rankUpdate(grad_t_ * w3.asDiagonal());
    m.selfadjointView<Eigen::Lower>().rankUpdate(phi_ * wm.asDiagonal());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("weighted eigenproblem failed");
    return es.eigenvalues()[1];
  }

 private:
  double radius_;
  int band_;
  int subdivision_;
  Geometry geometry_;
  std::shared_ptr<const SphereHarmonicBasis> basis_;
  Eigen::VectorXd weights_;
  std::vector<Vec3> nodes_;
  Eigen::MatrixXd phi_;         // modes x nodes
  Eigen::MatrixXd grad_;        // 3 nodes x modes
  Eigen::MatrixXd grad_t_;      // modes x 3 nodes
  Eigen::MatrixXd sample_phi_;  // modes x samples
  Eigen::VectorXd lam_;
  Eigen::VectorXd r0_;
};

class MeshBackground final : public ConformalBackground {
 public:
  explicit MeshBackground(const Geometry& g0) : geometry_(g0) {
    if (!g0.has_mesh()) throw ParameterError("mesh background needs a triangulated geometry");
    if (g0.topology().euler_characteristic != 2) throw ParameterError("Ricci flow background must be a topological sphere");
    const OperatorPair ops = mesh_operators(g0, MassKind::Lumped);
    stiffness_ = ops.stiffness;
    mass_ = ops.mass.diagonal();
    r0_ = 2.0 * angle_defects(g0.mesh()).cwiseQuotient(mass_);
    double bound = 0.0;
    for (Eigen::Index c = 0; c < stiffness_.outerSize(); ++c) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(stiffness_, c); it; ++it) row += std::abs(it.value());
      bound = std::max(bound, row / mass_[c]);
    }
    lambda_max_ = bound;
    gap_ = smallest_eigenpairs(stiffness_, ops.mass, 2).values[1];
  }

  std::string name() const override { return "mesh-sphere"; }
  nlohmann::json to_json() const override {
    return {{"kind", name()}, {"vertices", geometry_.sample_count()}, {"faces", geometry_.mesh().triangles.size()}};
  }
  const Geometry& geometry() const override { return geometry_; }
  Eigen::Index dof() const override { return mass_.size(); }
  double stiffest_mode() const override { return lambda_max_; }
  double spectral_gap() const override { return gap_; }

  Eigen::VectorXd state_from(const ScalarField& f) const override {
    if (f.size() != geometry_.sample_count()) throw ParameterError("field length does not match the background samples");
    return f.values;
  }
  ScalarField sample(const Eigen::VectorXd& state) const override {
    ScalarField f;
    f.values = state;
    return f;
  }
  ScalarField sample_curvature(const Eigen::VectorXd& u) const override {
    ScalarField f;
    f.values = scalar_curvature(*this, u);
    return f;
  }

  const Eigen::VectorXd& node_weights() const override { return mass_; }
  Eigen::VectorXd node_values(const Eigen::VectorXd& state) const override { return state; }
  Eigen::VectorXd laplacian(const Eigen::VectorXd& state) const override {
    return -(stiffness_ * state).cwiseQuotient(mass_);
  }
  Eigen::VectorXd node_laplacian(const Eigen::VectorXd& nodes) const override { return laplacian(nodes); }
  Eigen::VectorXd project(const Eigen::VectorXd& nodes) const override { return nodes; }
  const Eigen::VectorXd& background_curvature() const override { return r0_; }

  Eigen::VectorXd heat_step(const Eigen::VectorXd& u_mid, const Eigen::VectorXd& v, double ds) const override {
    const Eigen::VectorXd mg = mass_.cwiseProduct((2.0 * u_mid).array().exp().matrix());
    SparseMatrix a = 0.5 * ds * stiffness_;
    for (Eigen::Index i = 0; i < mg.size(); ++i) a.coeffRef(i, i) += mg[i];
    Eigen::SimplicialLDLT<SparseMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw SolverError("Crank-Nicolson factorization failed");
    const Eigen::VectorXd rhs = mg.cwiseProduct(v) - 0.5 * ds * (stiffness_ * v);
    return solver.solve(rhs);
  }

  std::pair<double, double> weighted_forms(const Eigen::VectorXd& u, const Eigen::VectorXd& weight_nodes,
                                           const Eigen::VectorXd& v) const override {
    const SparseMatrix k = weighted_stiffness(geometry_.mesh(), weight_nodes);
    const double num = v.dot(k * v);
    const double den =
        (mass_.array() * weight_nodes.array() * (2.0 * u).array().exp() * v.array().square()).sum();
    return {num, den};
  }

  double weighted_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& weight_nodes) const override {
    const SparseMatrix k = weighted_stiffness(geometry_.mesh(), weight_nodes);
    const Eigen::VectorXd m = mass_.cwiseProduct(weight_nodes).cwiseProduct((2.0 * u).array().exp().matrix());
    SparseMatrix md(m.size(), m.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < m.size(); ++i) trip.emplace_back(i, i, m[i]);
    md.setFromTriplets(trip.begin(), trip.end());
    return smallest_eigenpairs(k, md, 2).values[1];
  }

 private:
  Geometry geometry_;
  SparseMatrix stiffness_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd r0_;
  double lambda_max_ = 0.0;
  double gap_ = 0.0;
};

Eigen::VectorXd flow_rate(const ConformalBackground& bg, const Eigen::VectorXd& u) {
  return -0.5 * bg.project(scalar_curvature(bg, u));
}

}  // namespace

std::shared_ptr<const ConformalBackground> spectral_background(double radius, int band, int subdivision) {
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
  return std::make_shared<SpectralBackground>(radius, band, subdivision);
}

std::shared_ptr<const ConformalBackground> mesh_background(const Geometry& g0) {
  return std::make_shared<MeshBackground>(g0);
}

Eigen::VectorXd scalar_curvature(const ConformalBackground& bg, const Eigen::VectorXd& u) {
  const Eigen::VectorXd un = bg.node_values(u);
  const Eigen::VectorXd lap = bg.node_values(bg.laplacian(u));
  return ((-2.0 * un).array().exp() * (bg.background_curvature() - 2.0 * lap).array()).matrix();
}

double FlowState::total_curvature() const {
  const Eigen::VectorXd e2u = (2.0 * background->node_values(u)).array().exp();
  return (background->node_weights().array() * curvature.array() * e2u.array()).sum();
}

double FlowState::area() const {
  return background->node_weights().dot((2.0 * background->node_values(u)).array().exp().matrix());
}

double FlowState::cache_error() const {
  return (scalar_curvature(*background, u) - curvature).cwiseAbs().maxCoeff();
}

FlowState init_flow(std::shared_ptr<const ConformalBackground> bg, const ScalarField& u_init) {
  if (!bg) throw ParameterError("missing conformal background");
  FlowState s;
  s.background = bg;
  s.u = bg->state_from(u_init);
  s.t = 0.0;
  s.curvature = scalar_curvature(*bg, s.u);
  if (!(s.min_curvature() > 0.0)) {
    throw DomainError("init_flow: initial metric must have positive scalar curvature (min R = " +
                      fmt(s.min_curvature()) + ")");
  }
  return s;
}

double max_stable_step(const FlowState& s) {
  const double e2u_max = (-2.0 * s.background->node_values(s.u)).array().exp().maxCoeff();
  return 2.78 / (s.background->stiffest_mode() * e2u_max + s.max_curvature());
}

double extinction_estimate(const FlowState& s) { return s.t + s.area() / kEightPi; }

FlowState step_flow(const FlowState& s, double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) throw ParameterError("step_flow: dt must be finite and non-negative");
  if (dt == 0.0) return s;
  const double limit = max_stable_step(s);
  if (dt > limit) {
    throw FlowError("step_flow: dt = " + fmt(dt) + " exceeds the stability limit at t = " + fmt(s.t) +
                    "; use dt <= " + fmt(limit));
  }
  const double t_ext = extinction_estimate(s);
  const double margin = std::max(20.0 * dt, 0.05 * t_ext);
  if (s.t + dt > t_ext - margin) {
    throw FlowError("step_flow: t + dt = " + fmt(s.t + dt) + " is too close to the estimated extinction time " +
                    fmt(t_ext) + " (curvature blows up)");
  }
  const ConformalBackground& bg = *s.background;
  const Eigen::VectorXd k1 = flow_rate(bg, s.u);
  const Eigen::VectorXd k2 = flow_rate(bg, s.u + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = flow_rate(bg, s.u + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = flow_rate(bg, s.u + dt * k3);
  FlowState next;
  next.background = s.background;
  next.t = s.t + dt;
  next.u = s.u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.curvature = scalar_curvature(bg, next.u);
  if (!next.curvature.allFinite() || !(next.min_curvature() > 0.0)) {
    throw FlowError("step_flow: scalar curvature lost positivity at t = " + fmt(next.t) +
                    " (min R = " + fmt(next.curvature.minCoeff()) + ")");
  }
  return next;
}

double FlowTrajectory::max_measure_residual() const {
  double m = 0.0;
  for (double r : measure_residual) m = std::max(m, r);
  return m;
}

nlohmann::json FlowTrajectory::summary() const {
  const FlowState& last = states.back();
  return {{"background", last.background->to_json()},
          {"t_start", states.front().t},
          {"t_end", last.t},
          {"steps", steps.size()},
          {"dt", steps.empty() ? 0.0 : steps.front()},
          {"max_gauss_bonnet_drift", max_gauss_bonnet_drift},
          {"max_measure_residual", max_measure_residual()},
          {"final_min_R", last.min_curvature()},
          {"final_max_R", last.max_curvature()}};
}

FlowTrajectory run_flow(const FlowState& s0, double t_end, double dt) {
  if (!(dt > 0.0)) throw ParameterError("run_flow: dt must be positive");
  if (!(t_end >= s0.t)) throw ParameterError("run_flow: t_end precedes the initial time");
  const double t_ext = extinction_estimate(s0);
  if (t_end > t_ext - std::max(20.0 * dt, 0.05 * t_ext)) {
    throw FlowError("step_flow: requested t_end = " + fmt(t_end) + " reaches the estimated extinction time " +
                    fmt(t_ext));
  }
  const auto n = static_cast<std::size_t>(std::max(0.0, std::ceil((t_end - s0.t) / dt - 1e-9)));
  const double h = n ? (t_end - s0.t) / static_cast<double>(n) : 0.0;

  FlowTrajectory traj;
  traj.states.reserve(n + 1);
  traj.states.push_back(s0);
  auto record = [&](const FlowState& s, double step) {
    StepDiagnostics d;
    d.t = s.t;
    d.dt = step;
    d.gauss_bonnet_drift = std::abs(s.total_curvature() - kEightPi) / kEightPi;
    d.min_curvature = s.min_curvature();
    d.max_curvature = s.max_curvature();
    traj.max_gauss_bonnet_drift = std::max(traj.max_gauss_bonnet_drift, d.gauss_bonnet_drift);
    traj.diagnostics.push_back(d);
  };
  record(s0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    FlowState next = step_flow(traj.states.back(), h);
    if (i + 1 == n) next.t = t_end;
    record(next, h);
    traj.steps.push_back(h);
    traj.states.push_back(std::move(next));
  }

  // d/dt (R e^{2u}) = Lap0 R at interior times.
  const ConformalBackground& bg = *s0.background;
  const Eigen::VectorXd& w = bg.node_weights();
  auto measure = [&](const FlowState& s) {
    return Eigen::VectorXd(s.curvature.array() * (2.0 * bg.node_values(s.u)).array().exp());
  };
  auto wnorm = [&](const Eigen::VectorXd& x) { return std::sqrt(w.dot(x.cwiseAbs2())); };
  for (std::size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const Eigen::VectorXd dm = (measure(traj.states[i + 1]) - measure(traj.states[i - 1])) / (2.0 * h);
    const Eigen::VectorXd lap = bg.node_laplacian(traj.states[i].curvature);
    const double scale = wnorm(lap);
    const double err = wnorm(dm - lap);
    traj.measure_residual.push_back(scale > 1e-10 * wnorm(traj.states[i].curvature) ? err / scale : err);
  }
  return traj;
}

BackwardHeatSolution backward_heat_along_flow(const FlowTrajectory& traj, const ScalarField& v_end, int substeps) {
  if (traj.states.empty()) throw ParameterError("empty trajectory");
  if (substeps < 1) throw ParameterError("substeps must be at least 1");
  const ConformalBackground& bg = *traj.states.front().background;
  const std::size_t n = traj.states.size();
  BackwardHeatSolution sol;
  sol.times.resize(n);
  sol.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.times[i] = traj.states[i].t;

  Eigen::VectorXd v = bg.state_from(v_end);
  {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(bg.node_weights().size());
    const auto [num, den] = bg.weighted_forms(traj.states.back().u, ones, v);
    if (!(num > 1e-20 * bg.spectral_gap() * den)) {
      throw ParameterError("backward_heat_along_flow: v_end is constant; a nonconstant solution is required");
    }
  }
  if (substeps > 1) sol.notice = "heat substeps use the conformal factor interpolated linearly between flow states";
  sol.values[n - 1] = v;
  for (std::size_t i = n - 1; i > 0; --i) {
    const Eigen::VectorXd& u_hi = traj.states[i].u;
    const Eigen::VectorXd& u_lo = traj.states[i - 1].u;
    const double ds = (traj.states[i].t - traj.states[i - 1].t) / substeps;
    for (int k = 0; k < substeps; ++k) {
      const double f = (k + 0.5) / substeps;
      v = bg.heat_step(u_hi + f * (u_lo - u_hi), v, ds);
    }
    sol.values[i - 1] = v;
  }
  return sol;
}

nlohmann::json JTrace::summary() const {
  return {{"rows", rows.size()},
          {"J", j_verdict},
          {"t_lambda_R", t_lambda_verdict},
          {"den_identity_error", den_identity_error}};
}

JTrace j_trace(const FlowTrajectory& traj, const BackwardHeatSolution& v, double tol, int stride, Execution exec) {
  if (stride < 1) throw ParameterError("stride must be at least 1");
  if (v.values.size() != traj.states.size()) throw ParameterError("solution does not match the trajectory");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.states.size(); i += static_cast<std::size_t>(stride)) idx.push_back(i);
  JTrace out;
  out.rows.resize(idx.size());
  std::vector<std::string> errors(idx.size());
  parallel_for(exec, idx.size(), [&](std::size_t r) {
    const FlowState& s = traj.states[idx[r]];
    const auto& bg = *s.background;
    const auto [num, den] = bg.weighted_forms(s.u, s.curvature, v.values[idx[r]]);
    if (!(den > 0.0)) {
      errors[r] = "j_trace: denominator int v^2 R dmu is not positive at t = " + fmt(s.t);
      return;
    }
    JRow& row = out.rows[r];
    row.t = s.t;
    row.num = num;
    row.den = den;
    row.J = s.t * num / den;
    row.lambda_r = bg.weighted_gap(s.u, s.curvature);
    row.t_lambda_r = s.t * row.lambda_r;
  });
  for (const auto& e : errors)
    if (!e.empty()) throw DomainError(e);

  std::vector<double> t, j, tl;
  for (const auto& r : out.rows) {
    t.push_back(r.t);
    j.push_back(r.J);
    tl.push_back(r.t_lambda_r);
  }
  out.j_verdict = monotonicity_verdict(t, j, "J", tol).to_json();
  out.t_lambda_verdict = monotonicity_verdict(t, tl, "t_lambda_R", tol).to_json();
  // Integrated form over row pairs: den(t2) - den(t0) against the three-point
  // quadrature of 2 num, exact for quadratics on uneven spacing.
  for (std::size_t r = 1; r + 1 < out.rows.size(); ++r) {
    const JRow& a = out.rows[r - 1];
    const JRow& b = out.rows[r];
    const JRow& c = out.rows[r + 1];
    const double h0 = b.t - a.t;
    const double h1 = c.t - b.t;
    if (!(h0 > 0.0) || !(h1 > 0.0)) continue;
    const double integral = (h0 + h1) / 6.0 *
                            ((2.0 - h1 / h0) * 2.0 * a.num + (h0 + h1) * (h0 + h1) / (h0 * h1) * 2.0 * b.num +
                             (2.0 - h0 / h1) * 2.0 * c.num);
    const double err = std::abs((c.den - a.den) - integral) / std::max(std::abs(integral), 1e-300);
    out.den_identity_error = std::max(out.den_identity_error, err);
  }
  return out;
}

double lambda_R(const FlowState& s, double weight_scale) {
  if (!(s.min_curvature() > 0.0)) throw DomainError("lambda_R requires positive scalar curvature");
  if (!(weight_scale > 0.0)) throw ParameterError("weight scale must be positive");
  return s.background->weighted_gap(s.u, weight_scale * s.curvature);
}

nlohmann::json checkpoint_json(const FlowState& s, const nlohmann::json& diagnostics) {
  return {{"format", "pfreq-flow-checkpoint"},
          {"background", s.background->to_json()},
          {"t", s.t},
          {"u", std::vector<double>(s.u.data(), s.u.data() + s.u.size())},
          {"diagnostics", diagnostics}};
}

void save_checkpoint(const FlowState& s, const std::string& path, const nlohmann::json& diagnostics) {
  write_file_atomic(path, checkpoint_json(s, diagnostics).dump(1) + "\n");
}

FlowState state_from_checkpoint(std::shared_ptr<const ConformalBackground> bg, const nlohmann::json& j) {
  if (!bg) throw ParameterError("missing conformal background");
  if (j.value("format", "") != "pfreq-flow-checkpoint") throw ParseError("not a flow checkpoint");
  if (j.at("background") != bg->to_json()) throw ParameterError("checkpoint was written for a different background");
  const auto u = j.at("u").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(u.size()) != bg->dof()) throw ParseError("checkpoint state has the wrong length");
  FlowState s;
  s.background = std::move(bg);
  s.u = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  s.t = j.at("t").get<double>();
  s.curvature = scalar_curvature(*s.background, s.u);
  return s;
}

FlowState load_checkpoint(std::shared_ptr<const ConformalBackground> bg, const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint ") + path + ": " + e.what());
  }
  return state_from_checkpoint(std::move(bg), j);
}

}  // namespace pfreq
