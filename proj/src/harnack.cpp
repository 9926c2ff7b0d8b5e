#include "pfreq/harnack.hpp"

#include "pfreq/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace pfreq {

namespace {

double min_eig(const Eigen::Matrix2d& a) {
  const double mean = 0.5 * (a(0, 0) + a(1, 1));
  const double half = 0.5 * (a(0, 0) - a(1, 1));
  const double off = 0.5 * (a(0, 1) + a(1, 0));
  return mean - std::hypot(half, off);
}

std::pair<Vec3, Vec3> rotated(const std::pair<Vec3, Vec3>& f, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * f.first + s * f.second, -s * f.first + c * f.second};
}

void require_positive(const ScalarField& f, const char* what) {
  if (f.values.size() == 0) throw ParameterError(std::string(what) + ": empty field");
  Eigen::Index arg = 0;
  const double low = f.values.minCoeff(&arg);
  if (!(low > 0.0)) {
    std::ostringstream msg;
    msg << what << ": field must be positive, found " << low << " at sample " << arg;
    throw DomainError(msg.str());
  }
}

// Central differences in geodesic normal coordinates around sample i.
LocalJet normal_coordinate_jet(const ScalarField& f, const AnalyticModel& model, const Vec3& p,
                               const std::pair<Vec3, Vec3>& frame, double h, bool take_log) {
  auto eval = [&](double a, double b) {
    const double v = f.exact(model.geodesic_step(p, a * frame.first + b * frame.second));
    if (!take_log) return v;
    if (!(v > 0.0)) throw DomainError("log of a non-positive value inside a difference stencil");
    return std::log(v);
  };
  const double c = eval(0, 0);
  const double xp = eval(h, 0), xm = eval(-h, 0), yp = eval(0, h), ym = eval(0, -h);
  const double pp = eval(h, h), pm = eval(h, -h), mp = eval(-h, h), mm = eval(-h, -h);
  LocalJet jet;
  jet.gradient = {(xp - xm) / (2 * h), (yp - ym) / (2 * h)};
  jet.hessian(0, 0) = (xp - 2 * c + xm) / (h * h);
  jet.hessian(1, 1) = (yp - 2 * c + ym) / (h * h);
  jet.hessian(0, 1) = jet.hessian(1, 0) = (pp - pm - mp + mm) / (4 * h * h);
  return jet;
}

std::vector<std::vector<int>> two_rings(const Geometry& g) {
  const auto& nb = g.neighbors();
  std::vector<std::vector<int>> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    std::set<int> ring(nb[i].begin(), nb[i].end());
    for (int j : nb[i]) ring.insert(nb[static_cast<std::size_t>(j)].begin(), nb[static_cast<std::size_t>(j)].end());
    ring.erase(static_cast<int>(i));
    out[i].assign(ring.begin(), ring.end());
  }
  return out;
}

}  // namespace

Eigen::VectorXd TensorField::min_eigenvalues() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) out[static_cast<Eigen::Index>(i)] = min_eig(tensors[i]);
  return out;
}

std::size_t TensorField::unreliable_count() const {
  return static_cast<std::size_t>(std::count(reliable.begin(), reliable.end(), std::uint8_t{0}));
}

TensorField& TensorField::add_identity(const Eigen::VectorXd& scale) {
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i].diagonal().array() += scale[static_cast<Eigen::Index>(i)];
  return *this;
}

TensorField& TensorField::add_identity(double scale) {
  for (auto& t : tensors) t.diagonal().array() += scale;
  return *this;
}

std::vector<LocalJet> local_jets(const ScalarField& f, const Geometry& g, const HessianOptions& opt, std::string* method,
                                 std::vector<std::pair<Vec3, Vec3>>* frames_out) {
  const std::size_t n = g.sample_count();
  if (f.size() != n) throw ParameterError("field length does not match the geometry sample count");
  if (!opt.frame_angles.empty() && opt.frame_angles.size() != n) {
    throw ParameterError("frame rotation list must have one angle per sample");
  }
  // Jets are computed in the default frames and rotated at the end, so the
  // result is exactly covariant under frame changes.
  std::vector<std::pair<Vec3, Vec3>> frames(n);
  for (std::size_t i = 0; i < n; ++i) frames[i] = g.frame(i);
  std::vector<LocalJet> jets(n);

  if (g.is_analytic() && f.has_exact()) {
    const AnalyticModel model = g.analytic();
    const double scale =
        g.kind() == GeometryKind::RoundSphere ? g.radius() : std::min(g.period_x(), g.period_y()) / (2.0 * std::numbers::pi);
    const double h = opt.step * scale;
    if (method) *method = "normal-coordinate-fd";
    parallel_for(opt.exec, n, [&](std::size_t i) {
      jets[i] = normal_coordinate_jet(f, model, g.position(i), frames[i], h, opt.log);
    });
  } else if (g.kind() == GeometryKind::FlatTorus) {
    const int nx = g.grid_nx(), ny = g.grid_ny();
    const double hx = g.period_x() / nx, hy = g.period_y() / ny;
    Eigen::VectorXd v = opt.log ? Eigen::VectorXd(f.values.array().log()) : f.values;
    auto at = [&](int i, int j) { return v[((i + nx) % nx) * ny + (j + ny) % ny]; };
    if (method) *method = "grid-fd";
    parallel_for(opt.exec, n, [&](std::size_t k) {
      const int i = static_cast<int>(k) / ny, j = static_cast<int>(k) % ny;
      Eigen::Matrix2d hess;
      hess(0, 0) = (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (hx * hx);
      hess(1, 1) = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (hy * hy);
      hess(0, 1) = hess(1, 0) =
          (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * hx * hy);
      const Eigen::Vector2d grad((at(i + 1, j) - at(i - 1, j)) / (2 * hx), (at(i, j + 1) - at(i, j - 1)) / (2 * hy));
      jets[k].hessian = hess;
      jets[k].gradient = grad;
    });
  } else {
    if (!g.has_mesh()) throw ParameterError("no differentiation scheme for this field");
    const auto rings = two_rings(g);
    Eigen::VectorXd v = opt.log ? Eigen::VectorXd(f.values.array().log()) : f.values;
    if (method) *method = "two-ring-fit";
    parallel_for(opt.exec, n, [&](std::size_t i) {
      const auto& ring = rings[i];
      const Vec3& p = g.position(i);
      const auto& [e1, e2] = frames[i];
      Eigen::MatrixXd a(static_cast<Eigen::Index>(ring.size()), 5);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(ring.size()));
      for (std::size_t k = 0; k < ring.size(); ++k) {
        const Vec3 d = g.position(static_cast<std::size_t>(ring[k])) - p;
        const double x = d.dot(e1), y = d.dot(e2);
        a.row(static_cast<Eigen::Index>(k)) << x, y, 0.5 * x * x, x * y, 0.5 * y * y;
        rhs[static_cast<Eigen::Index>(k)] = v[ring[k]] - v[static_cast<Eigen::Index>(i)];
      }
      LocalJet jet;
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
      if (qr.rank() < 5 || g.neighbors()[i].size() < 5) jet.reliable = false;
      if (qr.rank() == 5) {
        const Eigen::VectorXd c = qr.solve(rhs);
        jet.gradient = c.head<2>();
        jet.hessian << c[2], c[3], c[3], c[4];
      }
      jets[i] = jet;
    });
  }
  if (!opt.frame_angles.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::cos(opt.frame_angles[i]), s = std::sin(opt.frame_angles[i]);
      Eigen::Matrix2d q;
      q << c, -s, s, c;
      jets[i].hessian = q.transpose() * jets[i].hessian * q;
      jets[i].gradient = q.transpose() * jets[i].gradient;
      frames[i] = rotated(frames[i], opt.frame_angles[i]);
    }
  }
  if (frames_out) *frames_out = std::move(frames);
  return jets;
}

TensorField hessian_log(const ScalarField& f, const Geometry& g, const HessianOptions& opt) {
  require_positive(f, "hessian_log");
  HessianOptions o = opt;
  o.log = true;
  TensorField out;
  const auto jets = local_jets(f, g, o, &out.method, &out.frames);
  out.tensors.resize(jets.size());
  out.reliable.resize(jets.size());
  for (std::size_t i = 0; i < jets.size(); ++i) {
    out.tensors[i] = jets[i].hessian;
    out.reliable[i] = jets[i].reliable ? 1 : 0;
  }
  return out;
}

TensorField harnack_tensor(const HeatKernelField& h, const Geometry& g, const HessianOptions& opt) {
  if (!(h.t > 0.0)) throw DomainError("Harnack tensor requires t > 0");
  TensorField out = hessian_log(h.field, g, opt);
  out.add_identity(1.0 / (2.0 * h.t));
  return out;
}

nlohmann::json PositivityVerdict::to_json() const {
  return {{"min_eig", min_eigenvalue}, {"argmin", argmin},         {"violations", violations},
          {"unreliable", unreliable},  {"tol", tolerance},         {"pass", pass}};
}

PositivityVerdict check_positivity(const TensorField& t, const Eigen::VectorXd& lower, double tol) {
  if (lower.size() != 0 && static_cast<std::size_t>(lower.size()) != t.size()) {
    throw ParameterError("deficit field length does not match the tensor field");
  }
  if (lower.size() != 0 && lower.minCoeff() < 0.0) throw ParameterError("deficit field must be non-negative");
  PositivityVerdict v;
  v.tolerance = tol;
  v.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.reliable.empty() && !t.reliable[i]) {
      ++v.unreliable;
      continue;
    }
    const double e = min_eig(t.tensors[i]) + (lower.size() ? lower[static_cast<Eigen::Index>(i)] : 0.0);
    if (e < v.min_eigenvalue) {
      v.min_eigenvalue = e;
      v.argmin = static_cast<int>(i);
    }
    if (e < -tol) ++v.violations;
  }
  v.pass = v.violations == 0;
  return v;
}

std::string_view to_string(BoundForm form) {
  switch (form) {
    case BoundForm::UpperKernel:
      return "upper-kernel";
    case BoundForm::LowerKernel:
      return "lower-kernel";
    case BoundForm::Gradient:
      return "gradient";
    case BoundForm::BOfA:
      return "B-of-A";
  }
  return "unknown";
}

KernelSamples sample_kernels(const Geometry& g, const SpectralBasis* basis, int source, const std::vector<double>& times,
                             bool with_gradient, Execution exec) {
  if (times.empty()) throw ParameterError("kernel sample grid has no times");
  KernelSamples s;
  s.times = times;
  s.distance = geodesic_distance(g, source).values;
  s.weights = g.lumped_mass();
  s.curvature_bound = std::max(0.0, -g.curvature_lower_bound());
  for (double t : times) {
    const HeatKernelField h = heat_kernel(g, basis, source, t, exec);
    s.values.push_back(h.field.values);
    if (!with_gradient) continue;
    Eigen::VectorXd gsq(h.field.values.size());
    if (h.gradient) {
      parallel_for(exec, g.sample_count(), [&](std::size_t i) {
        gsq[static_cast<Eigen::Index>(i)] = h.gradient(g.position(i)).squaredNorm();
      });
    } else {
      HessianOptions opt;
      opt.exec = exec;
      opt.log = false;
      const auto jets = local_jets(h.field, g, opt);
      for (std::size_t i = 0; i < jets.size(); ++i) gsq[static_cast<Eigen::Index>(i)] = jets[i].gradient.squaredNorm();
    }
    s.grad_sq.push_back(std::move(gsq));
  }
  std::ostringstream d;
  d << to_string(g.kind()) << ", source " << source;
  s.description = d.str();
  return s;
}

nlohmann::json FittedConstant::to_json() const {
  return {{"form", std::string(to_string(form))},
          {"value", value},
          {"log_value", log_value},
          {"grid", grid},
          {"slack", {{"min", slack_min}, {"median", slack_median}, {"max", slack_max}}},
          {"arg_time", arg_time},
          {"arg_sample", arg_sample},
          {"notice", notice}};
}

FittedConstant fit_bound_constant(const KernelSamples& s, BoundForm form, double b_constant) {
  if (s.times.empty() || s.values.size() != s.times.size()) throw ParameterError("inconsistent kernel sample grid");
  const Eigen::Index n = s.distance.size();
  for (const auto& v : s.values) {
    if (v.size() != n) throw ParameterError("inconsistent kernel sample grid");
    if (!(v.minCoeff() > 0.0)) throw DomainError("kernel bound fit needs positive kernel values on the whole grid");
  }
  if (form == BoundForm::Gradient && s.grad_sq.size() != s.times.size()) {
    throw ParameterError("gradient fit needs sampled kernel gradients");
  }
  if (form == BoundForm::BOfA && !(b_constant > 0.0)) throw ParameterError("B-of-A fit needs a positive B");

  const double m = s.dimension;
  const double k = s.curvature_bound;
  // Tighter side is the max for upper-type bounds and the min for the lower one.
  const bool take_min = form == BoundForm::LowerKernel;
  std::vector<double> scores;
  scores.reserve(s.times.size() * static_cast<std::size_t>(n));
  FittedConstant out;
  out.form = form;
  double best = take_min ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  for (std::size_t ti = 0; ti < s.times.size(); ++ti) {
    const double t = s.times[ti];
    const double mk = (m - 1.0) * k;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = s.values[ti][i];
      const double d2 = s.distance[i] * s.distance[i];
      double score = 0.0;
      switch (form) {
        case BoundForm::UpperKernel:
          score = std::log(h) + 0.5 * m * std::log(t) + d2 / (5.0 * t);
          break;
        case BoundForm::LowerKernel:
          score = std::log(h) + 0.5 * m * std::log(t) + d2 / (4.0 * t) * (1.0 + 2.0 * mk * t) +
                  0.5 * m * std::exp(2.0 * mk * t);
          break;
        case BoundForm::Gradient:
          score = 0.5 * m * std::log(t) + std::log(h) + t * s.grad_sq[ti][i] / ((2.0 + 2.0 * mk * t) * h * h);
          break;
        case BoundForm::BOfA:
          score = m + std::log(b_constant) - 0.5 * m * std::log(t) - std::log(h) - d2 / (4.0 * t) - 0.5 * mk * d2;
          break;
      }
      scores.push_back(score);
      if (take_min ? score < best : score > best) {
        best = score;
        out.arg_time = static_cast<int>(ti);
        out.arg_sample = static_cast<int>(i);
      }
    }
  }
  for (double& sc : scores) sc = take_min ? sc - best : best - sc;
  std::sort(scores.begin(), scores.end());
  out.slack_min = scores.front();
  out.slack_max = scores.back();
  out.slack_median = scores[scores.size() / 2];
  if (form == BoundForm::BOfA) {
    out.value = best;
    out.log_value = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.log_value = best;
    out.value = std::exp(best);
  }
  std::ostringstream grid;
  grid << n << " samples x " << s.times.size() << " times in [" << s.times.front() << ", " << s.times.back() << "]; "
       << s.description;
  out.grid = grid.str();
  if (!std::isfinite(out.value)) out.notice = "fitted constant is not finite on this grid";
  return out;
}

Eigen::VectorXd kernel_harnack_deficit(const Eigen::VectorXd& distance, double t, double eps, double c0) {
  return (eps * (c0 + distance.array().square() / (4.0 * t))).max(0.0).matrix();
}

Eigen::VectorXd general_harnack_deficit(const Eigen::VectorXd& f, double t, double eps, double k, double b, int m) {
  const double coeff = (34.0 / 3.0 + eps) * k + eps;
  const Eigen::ArrayXd a = m + (b / (std::pow(t, 0.5 * m) * f.array())).log();
  return (coeff * a).max(0.0).matrix();
}

FlowHarnackResult surface_flow_harnack(const ScalarField& curvature, const ScalarField& conformal, const Geometry& g0,
                                       double t, double tol, const HessianOptions& opt) {
  if (!(t > 0.0)) throw DomainError("surface Harnack tensor requires flow time t > 0");
  require_positive(curvature, "surface_flow_harnack (scalar curvature)");
  if (conformal.size() != curvature.size()) throw ParameterError("conformal factor and curvature lengths differ");

  HessianOptions lo = opt, uo = opt;
  lo.log = true;
  uo.log = false;
  FlowHarnackResult res;
  const auto jf = local_jets(curvature, g0, lo, &res.tensor.method, &res.tensor.frames);
  const auto ju = local_jets(conformal, g0, uo);
  const std::size_t n = jf.size();
  res.tensor.tensors.resize(n);
  res.tensor.reliable.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& df = jf[i].gradient;
    const Eigen::Vector2d& du = ju[i].gradient;
    const double u = conformal.values[static_cast<Eigen::Index>(i)];
    const double r = curvature.values[static_cast<Eigen::Index>(i)];
    // Levi-Civita connection of e^{2u} g0 in background components, then
    // rescaled into the conformal orthonormal frame.
    Eigen::Matrix2d hess = jf[i].hessian - du * df.transpose() - df * du.transpose();
    hess.diagonal().array() += du.dot(df);
    res.tensor.tensors[i] = std::exp(-2.0 * u) * hess;
    res.tensor.tensors[i].diagonal().array() += 0.5 * (r + 1.0 / t);
    res.tensor.reliable[i] = (jf[i].reliable && ju[i].reliable) ? 1 : 0;
  }
  res.tensor.method += "+conformal";
  res.verdict = check_positivity(res.tensor, Eigen::VectorXd(), tol);
  return res;
}

}  // namespace pfreq
