#include "pfreq/frequency.hpp"

#include "pfreq/error.hpp"
#include "pfreq/harnack.hpp"
#include "pfreq/heat_kernel_models.hpp"
#include "pfreq/spherical_harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pfreq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Quadratures resolve Gaussian factors down to exp(-kResolve).
constexpr double kResolve = 40.0;

void validate_times(const std::vector<double>& times, double horizon) {
  if (!(horizon > 0.0)) throw ParameterError("horizon T must be positive");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || times[i] > horizon * (1.0 + 1e-12)) {
      throw ParameterError("time grid must lie in (0, T]; got t = " + std::to_string(times[i]));
    }
    if (i > 0 && !(times[i] > times[i - 1])) throw ParameterError("time grid must be strictly increasing");
  }
}

double periodic_offset(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return std::min(r, period - r);
}

}  // namespace

/// Retained modes sampled on a basepoint-adapted quadrature.
struct FrequencyEvaluator::Analytic {
  GeometryKind kind = GeometryKind::FlatTorus;
  Eigen::VectorXd lambda;  // retained eigenvalues
  Eigen::VectorXd coeff;   // retained coefficients
  Eigen::MatrixXd phi;     // K x Q
  Eigen::MatrixXd grad[3];
  Eigen::MatrixXd hess[3];  // xx, xy, yy in a local orthonormal frame
  bool with_hessian = false;
  Eigen::VectorXd weights;
  Eigen::VectorXd dist2;
  // torus grid anchored at the basepoint
  int nx = 0, ny = 0;
  double lx = 0, ly = 0;
  // sphere rings around the basepoint
  Eigen::VectorXd ring_cos;
  int n_phi = 0;
  double radius = 0;

  Eigen::VectorXd kernel(double t) const {
    Eigen::VectorXd h(weights.size());
    if (kind == GeometryKind::FlatTorus) {
      const bool images = t < torus_image_crossover(lx, ly);
      Eigen::VectorXd kx(nx), ky(ny);
      for (int i = 0; i < nx; ++i) kx[i] = periodic_heat_kernel(i * lx / nx, lx, t, images).value;
      for (int j = 0; j < ny; ++j) ky[j] = periodic_heat_kernel(j * ly / ny, ly, t, images).value;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) h[i * ny + j] = kx[i] * ky[j];
    } else {
      const SphereKernelSeries series(radius, t);
      for (Eigen::Index i = 0; i < ring_cos.size(); ++i) {
        const double v = series.at_cosine(ring_cos[i]);
        h.segment(i * n_phi, n_phi).setConstant(v);
      }
    }
    return h;
  }
};

FrequencyEvaluator::FrequencyEvaluator(FrequencyConfig cfg, Execution exec) : cfg_(std::move(cfg)) {
  const Geometry& g = cfg_.geometry;
  if (!cfg_.basis) throw ParameterError("frequency evaluation needs a spectral basis");
  const SpectralBasis& basis = *cfg_.basis;
  if (cfg_.u0.size() != g.sample_count()) throw ParameterError("initial data length does not match the geometry");
  if (cfg_.basepoint < 0 || static_cast<std::size_t>(cfg_.basepoint) >= g.sample_count()) {
    throw ParameterError("basepoint index out of range");
  }
  if (cfg_.times.empty()) throw ParameterError("time grid is empty");
  validate_times(cfg_.times, cfg_.horizon);
  if (basis.modal() && !g.is_analytic()) throw ParameterError("modal basis on a mesh geometry");
  if (!basis.modal() && !g.has_mesh()) throw ParameterError("nodal frequency pipeline needs a triangulated geometry");

  coeff_ = basis.coefficients(cfg_.u0);
  projection_residual_ = pfreq::projection_residual(basis, cfg_.u0);

  // Energy in the truncated space; the constant mode carries none.
  const Eigen::VectorXd& lam = basis.eigenvalues;
  const double energy = (lam.array() * coeff_.array().square()).sum();
  const double gap = lam.size() > 1 ? lam[1] : 1.0;
  constant_ = !(energy > 1e-20 * gap * coeff_.squaredNorm());
  raw_scale_ = constant_ ? 1.0 : std::sqrt(energy);
  if (cfg_.normalize && !constant_) coeff_ /= raw_scale_;

  // a0 = sup |u0| + |grad u0| + |Hess u0| of the (normalized) data.
  {
    const ScalarField u = basis.synthesize(coeff_);
    HessianOptions opt;
    opt.exec = exec;
    opt.log = false;
    const auto jets = local_jets(u, g, opt);
    for (std::size_t i = 0; i < jets.size(); ++i) {
      if (!jets[i].reliable) continue;
      const double v = std::abs(u.values[static_cast<Eigen::Index>(i)]) + jets[i].gradient.norm() + jets[i].hessian.norm();
      a0_ = std::max(a0_, v);
    }
  }

  const double t_min = cfg_.times.front();

  if (!basis.modal()) {
    face_grad_ = face_gradient(g.mesh());
    distance_sq_ = geodesic_distance(g, cfg_.basepoint).values.array().square();
    return;
  }

  auto a = std::make_shared<Analytic>();
  a->kind = g.kind();
  std::vector<Eigen::Index> keep;
  const double cmax = coeff_.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < coeff_.size(); ++k) {
    if (std::abs(coeff_[k]) > 1e-15 * cmax) keep.push_back(k);
  }
  const auto kcount = static_cast<Eigen::Index>(keep.size());
  a->lambda.resize(kcount);
  a->coeff.resize(kcount);
  for (Eigen::Index k = 0; k < kcount; ++k) {
    a->lambda[k] = lam[keep[static_cast<std::size_t>(k)]];
    a->coeff[k] = coeff_[keep[static_cast<std::size_t>(k)]];
  }
  const double top_freq = std::sqrt(std::max(0.0, a->lambda.maxCoeff()));
  const std::size_t full = basis.truncation();
  a->with_hessian = cfg_.with_w;

  const Vec3 o = g.position(static_cast<std::size_t>(cfg_.basepoint));
  std::vector<Vec3> nodes;
  std::vector<std::pair<Vec3, Vec3>> frames;
  const AnalyticModel model = g.analytic();

  if (g.kind() == GeometryKind::FlatTorus) {
    a->lx = g.period_x();
    a->ly = g.period_y();
    const double reach = std::sqrt(kResolve / t_min) + 2.0 * top_freq;
    a->nx = std::max(32, static_cast<int>(std::ceil(a->lx / (2 * std::numbers::pi) * reach)) + 8);
    a->ny = std::max(32, static_cast<int>(std::ceil(a->ly / (2 * std::numbers::pi) * reach)) + 8);
    const double hx = a->lx / a->nx, hy = a->ly / a->ny;
    a->weights = Eigen::VectorXd::Constant(a->nx * a->ny, hx * hy);
    a->dist2.resize(a->nx * a->ny);
    for (int i = 0; i < a->nx; ++i) {
      for (int j = 0; j < a->ny; ++j) {
        nodes.emplace_back(o.x() + i * hx, o.y() + j * hy, 0.0);
        frames.emplace_back(Vec3::UnitX(), Vec3::UnitY());
        const double dx = periodic_offset(i * hx, a->lx), dy = periodic_offset(j * hy, a->ly);
        a->dist2[i * a->ny + j] = dx * dx + dy * dy;
      }
    }
  } else {
    a->radius = g.radius();
    const double r = a->radius;
    const int band = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * top_freq * top_freq * r * r)) / 2.0));
    const double kernel_band = r * std::sqrt(kResolve / t_min) + 4.0;
    const int n_theta = static_cast<int>(std::ceil((kernel_band + 2.0 * band + 8.0) / 2.0)) + 2;
    a->n_phi = 4 * band + 8;
    Eigen::VectorXd z, w;
    gauss_legendre(n_theta, z, w);
    a->ring_cos = z;
    const Vec3 pole = o.normalized();
    const auto [e1, e2] = tangent_basis(pole);
    const double dphi = 2 * std::numbers::pi / a->n_phi;
    a->weights.resize(n_theta * a->n_phi);
    a->dist2.resize(n_theta * a->n_phi);
    for (int i = 0; i < n_theta; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
      const double d = r * std::acos(std::clamp(z[i], -1.0, 1.0));
      for (int k = 0; k < a->n_phi; ++k) {
        const double phi = k * dphi;
        const Vec3 p = r * (s * std::cos(phi) * e1 + s * std::sin(phi) * e2 + z[i] * pole);
        nodes.push_back(p);
        frames.push_back(model.frame_at(p));
        a->weights[i * a->n_phi + k] = w[i] * dphi * r * r;
        a->dist2[i * a->n_phi + k] = d * d;
      }
    }
  }

  const auto q = static_cast<Eigen::Index>(nodes.size());
  a->phi.resize(kcount, q);
  for (auto& m : a->grad) m.resize(kcount, q);
  if (a->with_hessian)
    for (auto& m : a->hess) m.resize(kcount, q);
  const double scale = g.kind() == GeometryKind::FlatTorus
                           ? std::min(g.period_x(), g.period_y()) / (2 * std::numbers::pi)
                           : g.radius();
  const double step = 1e-3 * scale;
  const std::shared_ptr<const AnalyticBasis> modes = basis.modes;

  parallel_for(exec, nodes.size(), [&](std::size_t jn) {
    const auto j = static_cast<Eigen::Index>(jn);
    Eigen::VectorXd v(static_cast<Eigen::Index>(full));
    Eigen::Matrix3Xd gr(3, static_cast<Eigen::Index>(full));
    modes->evaluate(nodes[jn], full, v, &gr);
    for (Eigen::Index k = 0; k < kcount; ++k) {
      const Eigen::Index src = keep[static_cast<std::size_t>(k)];
      a->phi(k, j) = v[src];
      for (int c = 0; c < 3; ++c) a->grad[c](k, j) = gr(c, src);
    }
    if (!a->with_hessian) return;
    // Central differences in geodesic normal coordinates.
    const auto& [f1, f2] = frames[jn];
    auto at = [&](double s1, double s2) {
      Eigen::VectorXd out(static_cast<Eigen::Index>(full));
      modes->evaluate(model.geodesic_step(nodes[jn], step * (s1 * f1 + s2 * f2)), full, out);
      return out;
    };
    const Eigen::VectorXd pp = at(1, 1), pm = at(1, -1), mp = at(-1, 1), mm = at(-1, -1);
    const Eigen::VectorXd xp = at(1, 0), xm = at(-1, 0), yp = at(0, 1), ym = at(0, -1);
    const double h2 = step * step;
    for (Eigen::Index k = 0; k < kcount; ++k) {
      const Eigen::Index s = keep[static_cast<std::size_t>(k)];
      a->hess[0](k, j) = (xp[s] - 2 * v[s] + xm[s]) / h2;
      a->hess[1](k, j) = (pp[s] - pm[s] - mp[s] + mm[s]) / (4 * h2);
      a->hess[2](k, j) = (yp[s] - 2 * v[s] + ym[s]) / h2;
    }
  });
  analytic_ = std::move(a);
}

bool FrequencyEvaluator::has_w() const { return analytic_ && analytic_->with_hessian; }

std::string FrequencyEvaluator::pipeline() const {
  if (!analytic_) return "mesh-spectral";
  return analytic_->kind == GeometryKind::FlatTorus ? "torus-quadrature" : "sphere-quadrature";
}

std::size_t FrequencyEvaluator::quadrature_size() const {
  return analytic_ ? static_cast<std::size_t>(analytic_->weights.size()) : cfg_.geometry.sample_count();
}

FrequencySample FrequencyEvaluator::evaluate(double t, Execution exec) const {
  if (!(t > 0.0)) throw DomainError("frequency integrals need t > 0");
  const double tau = cfg_.horizon - t;
  if (tau < -1e-12 * cfg_.horizon) throw ParameterError("t exceeds the horizon T");
  FrequencySample s;
  s.t = t;
  s.W = kNaN;

  if (analytic_) {
    const Analytic& a = *analytic_;
    const Eigen::VectorXd c = (a.coeff.array() * (-a.lambda.array() * std::max(tau, 0.0)).exp()).matrix();
    const Eigen::VectorXd hw = a.kernel(t).cwiseProduct(a.weights);
    const Eigen::VectorXd u = a.phi.transpose() * c;
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(u.size());
    for (const auto& gm : a.grad) g2 += (gm.transpose() * c).cwiseAbs2();
    s.Z = hw.dot(u.cwiseAbs2());
    s.D = hw.dot(g2);
    s.weighted_distance = hw.dot(g2.cwiseProduct(a.dist2));
    if (a.with_hessian) {
      const Eigen::VectorXd xx = a.hess[0].transpose() * c;
      const Eigen::VectorXd xy = a.hess[1].transpose() * c;
      const Eigen::VectorXd yy = a.hess[2].transpose() * c;
      s.W = hw.dot((xx.cwiseAbs2() + 2 * xy.cwiseAbs2() + yy.cwiseAbs2()).eval());
    }
    return s;
  }

  const SpectralBasis& basis = *cfg_.basis;
  const Geometry& g = cfg_.geometry;
  const Eigen::VectorXd c = (coeff_.array() * (-basis.eigenvalues.array() * std::max(tau, 0.0)).exp()).matrix();
  const Eigen::VectorXd u = basis.eigenfields * c;
  const HeatKernelField h = g.kind() == GeometryKind::Mesh ? heat_kernel(g, &basis, cfg_.basepoint, t, exec)
                                                           : spectral_heat_kernel(basis, cfg_.basepoint, t, exec);
  const Eigen::VectorXd& hv = h.field.values;
  s.Z = g.lumped_mass().dot(hv.cwiseProduct(u.cwiseAbs2()));
  s.D = weighted_dirichlet(g.mesh(), face_grad_, hv, u, u);
  s.weighted_distance = weighted_dirichlet(g.mesh(), face_grad_, hv.cwiseProduct(distance_sq_), u, u);
  return s;
}

std::vector<double> Trace::column(const std::string& name) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (name == "t") out.push_back(r.t);
    else if (name == "Z") out.push_back(r.Z);
    else if (name == "D") out.push_back(r.D);
    else if (name == "I") out.push_back(r.I);
    else if (name == "N") out.push_back(r.N);
    else if (name == "W") out.push_back(r.W);
    else throw ParameterError("unknown trace column '" + name + "'");
  }
  return out;
}

std::vector<std::string> Trace::columns() const {
  std::vector<std::string> c{"t", "Z", "D", "I", "N"};
  if (has_w) c.emplace_back("W");
  return c;
}

FrequencySample compute_ZD(const FrequencyConfig& cfg, double t) {
  FrequencyConfig one = cfg;
  one.times = {t};
  return FrequencyEvaluator(std::move(one)).evaluate(t);
}

Trace frequency_trace(const FrequencyEvaluator& ev, Execution exec) {
  const auto& times = ev.config().times;
  Trace trace;
  trace.has_w = ev.has_w();
  trace.rows.resize(times.size());
  std::vector<std::string> errors(times.size());
  parallel_for(exec, times.size(), [&](std::size_t i) {
    try {
      const FrequencySample s = ev.evaluate(times[i]);
      TraceRow& r = trace.rows[i];
      r.t = s.t;
      r.Z = s.Z;
      r.D = s.D;
      r.I = s.t * s.D / s.Z;
      r.N = std::exp(std::sqrt(s.t)) * r.I;
      r.W = s.W;
      if (!(s.Z > 0.0)) errors[i] = "Z(t) is not positive at t = " + std::to_string(s.t);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (e.empty()) continue;
    if (e.find("increase N") != std::string::npos) throw TruncationError(e);
    throw DomainError(e);
  }
  const auto& cfg = ev.config();
  trace.provenance = {{"geometry", cfg.geometry.to_json()},
                      {"pipeline", ev.pipeline()},
                      {"basepoint", cfg.basepoint},
                      {"horizon", cfg.horizon},
                      {"truncation", cfg.basis->truncation()},
                      {"quadrature_nodes", ev.quadrature_size()},
                      {"raw_scale", ev.raw_scale()},
                      {"normalized", cfg.normalize && !ev.constant_data()},
                      {"constant_data", ev.constant_data()},
                      {"a0", ev.a0()},
                      {"projection_residual", ev.projection_residual()}};
  return trace;
}

Trace frequency_trace(const FrequencyConfig& cfg, Execution exec) {
  return frequency_trace(FrequencyEvaluator(cfg, exec), exec);
}

nlohmann::json MonotonicityVerdict::to_json() const {
  return {{"quantity", quantity},   {"pass", pass},
          {"t_min", t_min},         {"t_star", t_star},
          {"prefix_rows", prefix_rows}, {"worst_relative_drop", worst_violation},
          {"tolerance", tolerance}};
}

MonotonicityVerdict monotonicity_verdict(const std::vector<double>& times, const std::vector<double>& values,
                                         const std::string& quantity, double tol) {
  if (times.size() != values.size()) throw ParameterError("times and values differ in length");
  MonotonicityVerdict v;
  v.quantity = quantity;
  v.tolerance = tol;
  if (times.empty()) return v;
  v.t_min = times.front();
  v.t_star = times.back();
  v.prefix_rows = times.size();
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double drop = values[i] - values[i + 1];
    const double scale = std::abs(values[i]);
    if (drop > tol * scale) {
      if (v.pass) {
        v.pass = false;
        v.t_star = times[i];
        v.prefix_rows = i + 1;
      }
    }
    if (drop > 0) {
      const double rel = scale > 0 ? drop / scale : std::numeric_limits<double>::infinity();
      v.worst_violation = std::max(v.worst_violation, rel);
    }
  }
  return v;
}

MonotonicityVerdict monotonicity_verdict(const Trace& trace, TraceQuantity q, double tol, double curvature_bound,
                                         int dimension) {
  const auto t = trace.column("t");
  switch (q) {
    case TraceQuantity::I:
      return monotonicity_verdict(t, trace.column("I"), "I", tol);
    case TraceQuantity::N:
      return monotonicity_verdict(t, trace.column("N"), "N", tol);
    case TraceQuantity::D:
      return monotonicity_verdict(t, trace.column("D"), "D", tol);
    case TraceQuantity::ScaledD: {
      const double k = std::max(0.0, curvature_bound);
      auto d = trace.column("D");
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= std::exp(2.0 * (dimension - 1) * k * t[i]);
      return monotonicity_verdict(t, d, "exp(2(m-1)Kt)D", tol);
    }
  }
  throw ParameterError("unknown trace quantity");
}

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json j = {{"checked", checked},
                      {"max_relative_error", max_relative_error},
                      {"at_time", at_time},
                      {"d_monotone", d_monotone.to_json()}};
  if (!notice.empty()) j["notice"] = notice;
  return j;
}

IdentityReport check_ZD_identities(const Trace& trace, double curvature_lower_bound, double tol, int dimension) {
  IdentityReport r;
  const double k = std::max(0.0, -curvature_lower_bound);
  r.d_monotone = k > 0 ? monotonicity_verdict(trace, TraceQuantity::ScaledD, tol, k, dimension)
                       : monotonicity_verdict(trace, TraceQuantity::D, tol);
  const auto& rows = trace.rows;
  if (rows.size() < 3) {
    r.notice = "fewer than three rows; derivative identity not evaluated";
    return r;
  }
  const double h = rows[1].t - rows[0].t;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    if (std::abs((rows[i + 1].t - rows[i].t) - h) > 1e-9 * h) {
      r.notice = "non-uniform time grid; derivative identity not evaluated";
      return r;
    }
  }
  r.checked = true;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double dz = (rows[i + 1].Z - rows[i - 1].Z) / (2 * h);
    const double denom = std::max(2 * std::abs(rows[i].D), 1e-14 * std::abs(rows[i].Z) / h);
    const double err = std::abs(dz - 2 * rows[i].D) / denom;
    if (err > r.max_relative_error) {
      r.max_relative_error = err;
      r.at_time = rows[i].t;
    }
  }
  return r;
}

WeightedDistanceReport weighted_distance_check(const FrequencyEvaluator& ev, double t) {
  const FrequencySample s = ev.evaluate(t);
  WeightedDistanceReport r;
  r.t = t;
  r.D = s.D;
  r.lhs = s.weighted_distance / std::sqrt(t);
  r.ratio = s.D > 0 ? r.lhs / s.D : (r.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.pass = r.lhs <= 1.5 * s.D;
  return r;
}

nlohmann::json WeightedDistanceScan::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) rows_j.push_back({{"t", r.t}, {"lhs", r.lhs}, {"D", r.D}, {"ratio", r.ratio}, {"pass", r.pass}});
  return {{"factor", 1.5},
          {"largest_passing_prefix_t", largest_passing_prefix_t},
          {"largest_passing_t", largest_passing_t},
          {"rows", rows_j}};
}

WeightedDistanceScan weighted_distance_scan(const FrequencyEvaluator& ev, const std::vector<double>& times, Execution exec) {
  WeightedDistanceScan scan;
  scan.rows.resize(times.size());
  parallel_for(exec, times.size(), [&](std::size_t i) { scan.rows[i] = weighted_distance_check(ev, times[i]); });
  bool prefix = true;
  for (const auto& r : scan.rows) {
    prefix = prefix && r.pass;
    if (prefix) scan.largest_passing_prefix_t = r.t;
    if (r.pass) scan.largest_passing_t = std::max(scan.largest_passing_t, r.t);
  }
  return scan;
}

nlohmann::json VanishingOrderReport::to_json() const {
  return {{"t0", t0},           {"C_t0", c_t0}, {"worst_ratio", worst_ratio},
          {"at_time", at_time}, {"tolerance", tolerance}, {"pass", pass}};
}

VanishingOrderReport vanishing_order_bound(const Trace& trace, double t0, double tol) {
  const auto it = std::find_if(trace.rows.begin(), trace.rows.end(),
                               [&](const TraceRow& r) { return std::abs(r.t - t0) <= 1e-12 * std::max(1.0, t0); });
  if (it == trace.rows.end()) throw ParameterError("t0 = " + std::to_string(t0) + " is not a grid time of the trace");
  VanishingOrderReport r;
  r.t0 = t0;
  r.tolerance = tol;
  r.c_t0 = std::exp(std::sqrt(t0)) * t0 * it->D / it->Z;
  r.worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) {
    if (row.t > it->t) break;
    const double bound = it->Z * std::pow(row.t / t0, 2.0 * r.c_t0);
    const double ratio = row.Z / bound;
    if (ratio < r.worst_ratio) {
      r.worst_ratio = ratio;
      r.at_time = row.t;
    }
  }
  r.pass = r.worst_ratio >= 1.0 - tol;
  return r;
}

nlohmann::json DLowerFit::to_json() const {
  nlohmann::json j = {{"feasible", feasible}, {"c", c},       {"C", big_c},
                      {"gamma", gamma},       {"C_M", c_m},   {"rms_residual", rms_residual},
                      {"rows_used", rows_used}};
  if (!notice.empty()) j["notice"] = notice;
  return j;
}

DLowerFit d_lower_bound_diagnostic(const Trace& trace, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  std::vector<double> t, y;
  for (const auto& r : trace.rows) {
    if (r.D > 0) {
      t.push_back(r.t);
      y.push_back(std::log(r.D));
    }
  }
  DLowerFit best;
  best.rows_used = t.size();
  if (t.size() < 3) {
    best.notice = "fewer than three rows with D > 0";
    return best;
  }
  const auto n = static_cast<Eigen::Index>(t.size());
  double best_rms = std::numeric_limits<double>::infinity();
  for (int step = 1; step <= 40; ++step) {
    const double gamma = 0.05 * step;
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = -std::pow(t[static_cast<std::size_t>(i)], -gamma);
      b[i] = y[static_cast<std::size_t>(i)];
    }
    Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
    if (x[1] < 0) x = {b.mean() - 0.0, 0.0};
    // Shift the intercept down until the fit is a lower bound.
    const Eigen::VectorXd resid = b - a * x;
    x[0] += std::min(0.0, resid.minCoeff());
    const double rms = std::sqrt((b - a * x).squaredNorm() / static_cast<double>(n));
    if (rms < best_rms) {
      best_rms = rms;
      best.feasible = true;
      best.c = std::exp(x[0]);
      best.big_c = x[1];
      best.gamma = gamma;
      best.c_m = gamma / eps;
      best.rms_residual = rms;
    }
  }
  return best;
}

std::vector<double> time_grid(double t_min, double t_max, std::size_t count, bool log_spaced) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) throw ParameterError("invalid time grid specification");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    t[i] = log_spaced ? t_min * std::pow(t_max / t_min, s) : t_min + s * (t_max - t_min);
  }
  t.back() = t_max;
  return t;
}

}  // namespace pfreq
