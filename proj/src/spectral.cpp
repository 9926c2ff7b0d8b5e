#include "pfreq/spectral.hpp"

#include "pfreq/error.hpp"
#include "pfreq/heat_kernel_models.hpp"

#include <cmath>
#include <sstream>

namespace pfreq {

std::string_view to_string(KernelMethod m) {
  switch (m) {
    case KernelMethod::SpectralSeries:
      return "spectral-series";
    case KernelMethod::TorusImageSum:
      return "torus-image-sum";
    case KernelMethod::SphereHarmonicSeries:
      return "sphere-harmonic-series";
  }
  return "unknown";
}

Eigen::VectorXd SpectralBasis::coefficients(const ScalarField& f) const {
  if (f.size() != static_cast<std::size_t>(eigenfields.rows())) {
    throw ParameterError("field length does not match the basis sample count");
  }
  if (modal() && f.has_exact()) {
    const Quadrature q = modes->projection_quadrature();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(eigenvalues.size());
    Eigen::VectorXd phi(eigenvalues.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
      modes->evaluate(q.points[j], truncation(), phi);
      c += q.weights[static_cast<Eigen::Index>(j)] * f.exact(q.points[j]) * phi;
    }
    return c;
  }
  return eigenfields.transpose() * (mass * f.values);
}

ScalarField SpectralBasis::synthesize(const Eigen::VectorXd& coeffs) const {
  ScalarField out;
  out.values = eigenfields * coeffs;
  if (modal()) {
    out.exact = [m = modes, c = coeffs](const Vec3& p) {
      Eigen::VectorXd phi(c.size());
      m->evaluate(p, static_cast<std::size_t>(c.size()), phi);
      return phi.dot(c);
    };
  }
  return out;
}

double SpectralBasis::orthonormality_error() const {
  Eigen::MatrixXd gram;
  if (modal()) {
    const Quadrature q = modes->projection_quadrature();
    const Eigen::MatrixXd phi = modes->sample(q.points, truncation());
    gram = phi * q.weights.asDiagonal() * phi.transpose();
  } else {
    gram = eigenfields.transpose() * (mass * eigenfields);
  }
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

SpectralBasis eigenbasis(const Geometry& g, const OperatorPair& ops, std::size_t n, const EigenOptions& options) {
  if (n < 2) throw ParameterError("eigenbasis needs at least two modes");
  if (n > static_cast<std::size_t>(ops.size())) throw ParameterError("eigenbasis truncation exceeds operator size");
  SpectralBasis b;
  b.points = g.positions();
  if (ops.modal()) {
    b.modes = ops.modes;
    b.eigenvalues = ops.modes->eigenvalues().head(static_cast<Eigen::Index>(n));
    b.eigenfields = ops.modes->sample(b.points, n).transpose();
    b.residuals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    b.mass = SparseMatrix(g.lumped_mass().asDiagonal());
    return b;
  }
  if (static_cast<std::size_t>(ops.size()) != g.sample_count()) {
    throw ParameterError("operator size does not match the geometry sample count");
  }
  const EigenResult r = smallest_eigenpairs(ops.stiffness, ops.mass, static_cast<Eigen::Index>(n), options);
  b.eigenvalues = r.values;
  b.eigenvalues[0] = std::max(0.0, b.eigenvalues[0]);
  b.eigenfields = r.vectors;
  b.residuals = r.residuals;
  b.mass = ops.mass;
  b.krylov_dimension = r.krylov_dimension;
  return b;
}

HeatKernelField spectral_heat_kernel(const SpectralBasis& basis, int source, double t, Execution exec) {
  if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
  const auto ns = basis.eigenfields.rows();
  if (source < 0 || source >= ns) throw ParameterError("kernel source index out of range");
  const Eigen::VectorXd decay = (-t * basis.eigenvalues.array()).exp();
  const Eigen::VectorXd weights = decay.cwiseProduct(basis.eigenfields.row(source).transpose());
  HeatKernelField h;
  h.t = t;
  h.source = source;
  h.source_position = basis.points[static_cast<std::size_t>(source)];
  h.method = KernelMethod::SpectralSeries;
  h.field.values.resize(ns);
  parallel_for(exec, static_cast<std::size_t>(ns), [&](std::size_t i) {
    h.field.values[static_cast<Eigen::Index>(i)] = basis.eigenfields.row(static_cast<Eigen::Index>(i)).dot(weights);
  });
  h.error_estimate = std::exp(-basis.eigenvalues[basis.eigenvalues.size() - 1] * t) *
                     static_cast<double>(basis.truncation());
  if (basis.modal()) {
    h.field.exact = [m = basis.modes, weights](const Vec3& p) {
      Eigen::VectorXd phi(weights.size());
      m->evaluate(p, static_cast<std::size_t>(weights.size()), phi);
      return phi.dot(weights);
    };
    h.gradient = [m = basis.modes, weights](const Vec3& p) {
      Eigen::VectorXd phi(weights.size());
      Eigen::Matrix3Xd grad;
      m->evaluate(p, static_cast<std::size_t>(weights.size()), phi, &grad);
      return Vec3(grad * weights);
    };
  }
  return h;
}

HeatKernelField heat_kernel(const Geometry& g, const SpectralBasis* basis, int source, double t, Execution exec) {
  if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0 (got " + std::to_string(t) + ")");
  if (source < 0 || static_cast<std::size_t>(source) >= g.sample_count()) {
    throw ParameterError("kernel source index out of range");
  }
  const Vec3 o = g.position(static_cast<std::size_t>(source));
  const auto n = g.sample_count();
  HeatKernelField h;
  h.t = t;
  h.source = source;
  h.source_position = o;
  h.field.values.resize(static_cast<Eigen::Index>(n));

  if (g.kind() == GeometryKind::FlatTorus) {
    const AnalyticModel model = g.analytic();
    const bool images = t < torus_image_crossover(model.period_x, model.period_y);
    h.method = images ? KernelMethod::TorusImageSum : KernelMethod::SpectralSeries;
    h.error_estimate = 1e-14;
    parallel_for(exec, n, [&](std::size_t i) {
      h.field.values[static_cast<Eigen::Index>(i)] = torus_heat_kernel(model, g.position(i), o, t);
    });
    h.field.exact = [model, o, t](const Vec3& x) { return torus_heat_kernel(model, x, o, t); };
    h.gradient = [model, o, t](const Vec3& x) {
      Vec3 grad;
      torus_heat_kernel(model, x, o, t, &grad);
      return grad;
    };
    return h;
  }

  if (g.kind() == GeometryKind::RoundSphere) {
    auto series = std::make_shared<const SphereKernelSeries>(g.radius(), t);
    h.method = KernelMethod::SphereHarmonicSeries;
    std::vector<double> err(n, 0.0);
    parallel_for(exec, n, [&](std::size_t i) {
      h.field.values[static_cast<Eigen::Index>(i)] = (*series)(g.position(i), o, nullptr, &err[i]);
    });
    h.error_estimate = *std::max_element(err.begin(), err.end());
    h.field.exact = [series, o](const Vec3& x) { return (*series)(x, o); };
    h.gradient = [series, o](const Vec3& x) {
      Vec3 grad;
      (*series)(x, o, &grad);
      return grad;
    };
    return h;
  }

  if (basis == nullptr) throw ParameterError("mesh heat kernel requires a spectral basis");
  h = spectral_heat_kernel(*basis, source, t, exec);
  if (h.error_estimate > 1e-6) {
    std::ostringstream msg;
    msg << "spectral truncation too coarse at t = " << t << ": tail estimate " << h.error_estimate
        << " exceeds 1e-6; increase N or t";
    throw TruncationError(msg.str());
  }
  const double top = h.field.values.maxCoeff();
  const double low = h.field.values.minCoeff();
  if (low < -1e-8 * top) {
    std::ostringstream msg;
    msg << "heat kernel negative beyond tolerance at t = " << t << ": min " << low << ", max " << top;
    throw TruncationError(msg.str());
  }
  return h;
}

namespace {

ScalarField evolve(const SpectralBasis& basis, const ScalarField& u0, double t) {
  const Eigen::VectorXd c = basis.coefficients(u0);
  return basis.synthesize(c.cwiseProduct((-t * basis.eigenvalues.array()).exp().matrix()));
}

}  // namespace

ScalarField solve_heat(const SpectralBasis& basis, const ScalarField& u0, double t) {
  if (!(t >= 0.0)) throw DomainError("heat solve requires t >= 0");
  return evolve(basis, u0, t);
}

ScalarField reversed_time_solve(const SpectralBasis& basis, const ScalarField& v_final, double s) {
  if (!(s >= 0.0)) throw DomainError("reversed-time solve requires s >= 0");
  return evolve(basis, v_final, s);
}

double projection_residual(const SpectralBasis& basis, const ScalarField& f) {
  const Eigen::VectorXd c = basis.coefficients(f);
  const Eigen::VectorXd r = f.values - basis.eigenfields * c;
  const double fn = f.values.dot(basis.mass * f.values);
  if (fn == 0.0) return 0.0;
  return std::sqrt(std::max(0.0, r.dot(basis.mass * r)) / fn);
}

double dirichlet_energy(const SpectralBasis& basis, const Eigen::VectorXd& coeffs) {
  return coeffs.cwiseAbs2().dot(basis.eigenvalues);
}

}  // namespace pfreq
