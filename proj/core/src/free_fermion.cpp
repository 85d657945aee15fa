#include "spinbus/free_fermion.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <json.hpp>

namespace spinbus {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

double wrap_phase(double phi) {
  double y = std::remainder(phi, 2.0 * pi);
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

Eigen::VectorXcd phase_vector(const Eigen::VectorXd& e, double t, double sign) {
  Eigen::VectorXcd v(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    double phi = sign * e(k) * t;
    v(k) = cd(std::cos(phi), std::sin(phi));
  }
  return v;
}

}  // namespace

QuadraticForm build_quadratic(const ChainSpec& spec, bool with_probe) {
  validate(spec);
  if (spec.model != ModelKind::xy)
    throw ConfigError("the free-fermion engine handles xy chains only");
  const int m = total_sites(spec, with_probe);
  QuadraticForm form;
  form.a = Eigen::MatrixXd::Zero(m, m);
  form.b = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) form.a(k, k) = 2.0 * spec.h;
  for (int k = 0; k + 1 < m; ++k) {
    form.a(k, k + 1) = spec.j;
    form.a(k + 1, k) = spec.j;
    form.b(k, k + 1) = spec.j * spec.gamma;
    form.b(k + 1, k) = -spec.j * spec.gamma;
  }
  return form;
}

FermionDiag diagonalize(const QuadraticForm& form) {
  Eigen::MatrixXd ab = form.a - form.b;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(ab, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw EngineError("singular value decomposition of A - B did not converge");
  FermionDiag d;
  d.e = svd.singularValues();
  Eigen::MatrixXd alpha = svd.matrixU().transpose();
  Eigen::MatrixXd beta = svd.matrixV().transpose();
  d.p = 0.5 * (alpha + beta);
  d.q = 0.5 * (alpha - beta);
  return d;
}

FermionDiagCheck check_diag(const QuadraticForm& form, const FermionDiag& d) {
  const int m = d.sites();
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  FermionDiagCheck c;
  c.canonical = std::max(
      (d.p * d.p.transpose() + d.q * d.q.transpose() - eye).cwiseAbs().maxCoeff(),
      (d.p * d.q.transpose() + d.q * d.p.transpose()).cwiseAbs().maxCoeff());
  Eigen::MatrixXd alpha = d.alpha(), beta = d.beta();
  c.orthogonality =
      std::max((alpha * alpha.transpose() - eye).cwiseAbs().maxCoeff(),
               (beta * beta.transpose() - eye).cwiseAbs().maxCoeff());
  c.reconstruction =
      (form.a - form.b - alpha.transpose() * d.e.asDiagonal() * beta).cwiseAbs().maxCoeff();
  return c;
}

Propagator propagate(const FermionDiag& d, double t) {
  if (t < 0.0) throw EngineError("propagation time must be nonnegative");
  Eigen::MatrixXcd pc = d.p.cast<cd>();
  Eigen::MatrixXcd qc = d.q.cast<cd>();
  Eigen::VectorXcd em = phase_vector(d.e, t, -1.0);
  Eigen::VectorXcd ep = phase_vector(d.e, t, +1.0);
  Propagator prop;
  prop.t = t;
  prop.u = pc.transpose() * em.asDiagonal() * pc + qc.transpose() * ep.asDiagonal() * qc;
  prop.w = pc.transpose() * em.asDiagonal() * qc + qc.transpose() * ep.asDiagonal() * pc;
  return prop;
}

PropagatorRow propagate_last_row(const FermionDiag& d, double t) {
  const int m = d.sites();
  Eigen::VectorXcd em = phase_vector(d.e, t, -1.0);
  Eigen::VectorXcd ep = phase_vector(d.e, t, +1.0);
  // U_{Nn} = sum_k P_kn e^{-itE_k} P_kN + Q_kn e^{+itE_k} Q_kN, and W likewise
  // with the site-n matrix swapped
  Eigen::VectorXcd fw = em.cwiseProduct(d.p.col(m - 1).cast<cd>());
  Eigen::VectorXcd bw = ep.cwiseProduct(d.q.col(m - 1).cast<cd>());
  PropagatorRow row;
  row.t = t;
  row.u = d.p.transpose().cast<cd>() * fw + d.q.transpose().cast<cd>() * bw;
  row.w = d.q.transpose().cast<cd>() * fw + d.p.transpose().cast<cd>() * bw;
  return row;
}

std::complex<double> transfer_amplitude(const FermionDiag& d, double t) {
  const int m = d.sites();
  cd u = 0.0;
  for (int k = 0; k < m; ++k) {
    double phi = d.e(k) * t;
    cd em(std::cos(phi), -std::sin(phi));
    u += d.p(k, m - 1) * em * d.p(k, 0) + d.q(k, m - 1) * std::conj(em) * d.q(k, 0);
  }
  return u;
}

std::complex<double> pair_amplitude(const FermionDiag& d, double t) {
  const int m = d.sites();
  cd w = 0.0;
  for (int k = 0; k < m; ++k) {
    double phi = d.e(k) * t;
    cd em(std::cos(phi), -std::sin(phi));
    w += d.p(k, m - 1) * em * d.q(k, 0) + d.q(k, m - 1) * std::conj(em) * d.p(k, 0);
  }
  return w;
}

double interference_term(const PropagatorRow& row, const CorrelatorSet& corr) {
  const int n = corr.n();
  if (row.u.size() != n + 1)
    throw EngineError("propagator row and correlators disagree on the chain length");
  Eigen::VectorXcd us = row.u.segment(1, n);
  Eigen::VectorXcd ws = row.w.segment(1, n);
  cd a = (us.adjoint() * corr.cdag * us)(0, 0) + (ws.adjoint() * corr.cexc * ws)(0, 0) +
         (us.adjoint() * corr.fdag * ws)(0, 0) + (ws.adjoint() * corr.fann * us)(0, 0);
  if (std::abs(a.imag()) > 1e-8)
    throw EngineError("interference term has imaginary residual " +
                      std::to_string(a.imag()) + "; correlator construction is broken");
  return a.real();
}

ChannelSnapshot snapshot(const PropagatorRow& row, const CorrelatorSet& corr, int parity) {
  ChannelSnapshot s;
  s.t = row.t;
  s.parity = parity & 1;
  cd u0 = row.u(0);
  cd w0 = row.w(0);
  s.u = std::abs(u0);
  s.w = std::abs(w0);
  s.phi_u = wrap_phase(std::arg(u0) + s.parity * pi);
  s.phi_w = wrap_phase(-std::arg(w0) + (s.parity + 1) * pi);
  s.a = interference_term(row, corr);
  if (s.u * s.u + s.a < -1e-9 || s.u * s.u + s.a > 1.0 + 1e-9 ||
      s.w * s.w + s.a < -1e-9 || s.w * s.w + s.a > 1.0 + 1e-9)
    throw EngineError("snapshot violates positivity bounds: u^2+a or w^2+a outside [0,1]");
  return s;
}

ChannelSnapshot snapshot(const FermionDiag& d, const CorrelatorSet& corr, int parity,
                         double t) {
  return snapshot(propagate_last_row(d, t), corr, parity);
}

BlochVector bloch_map(const BlochVector& n, const ChannelSnapshot& s) {
  validate(n);
  const double cu = std::cos(s.phi_u), su = std::sin(s.phi_u);
  const double cw = std::cos(s.phi_w), sw = std::sin(s.phi_w);
  BlochVector out;
  out.x = (s.u * cu + s.w * cw) * n.x + (s.u * su + s.w * sw) * n.y;
  out.y = (-s.u * su + s.w * sw) * n.x + (s.u * cu - s.w * cw) * n.y;
  out.z = n.z * (s.u * s.u - s.w * s.w) + s.u * s.u + s.w * s.w + 2.0 * s.a - 1.0;
  validate(out);
  return out;
}

ChoiMatrix choi_xy(const ChannelSnapshot& s) {
  const double u2 = s.u * s.u, w2 = s.w * s.w;
  ChoiMatrix c;
  c.m(0, 0) = u2 + s.a;
  c.m(1, 1) = 1.0 - u2 - s.a;
  c.m(2, 2) = w2 + s.a;
  c.m(3, 3) = 1.0 - w2 - s.a;
  c.m(0, 3) = s.u * cd(std::cos(s.phi_u), std::sin(s.phi_u));
  c.m(3, 0) = std::conj(c.m(0, 3));
  c.m(1, 2) = s.w * cd(std::cos(s.phi_w), std::sin(s.phi_w));
  c.m(2, 1) = std::conj(c.m(1, 2));
  require_valid_choi(c, 1e-9);
  return c;
}

double oaf_xy(const ChannelSnapshot& s) {
  return 0.5 + std::abs(s.u * s.u - s.w * s.w) / 6.0 + std::max(s.u, s.w) / 3.0;
}

Eigen::Matrix2cd optimal_rotation_xy(const ChannelSnapshot& s) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  if (s.u >= s.w) {
    r(0, 0) = std::polar(1.0, -s.phi_u / 2.0);
    r(1, 1) = std::polar(1.0, s.phi_u / 2.0);
  } else {
    // e^{i pi sx/2} e^{i phi_w sz/2} = i sx * diag(e^{i phi_w/2}, e^{-i phi_w/2})
    r(0, 1) = cd(0, 1) * std::polar(1.0, -s.phi_w / 2.0);
    r(1, 0) = cd(0, 1) * std::polar(1.0, s.phi_w / 2.0);
  }
  return r;
}

double concurrence_xy(const ChannelSnapshot& s) {
  auto chat = [&](double x, double y) {
    double p = std::max(0.0, y * y + s.a) * std::max(0.0, 1.0 - x * x - s.a);
    return x - std::sqrt(p);
  };
  return std::max({0.0, chat(s.u, s.w), chat(s.w, s.u)});
}

XxModes xx_exact_modes(int n, double j, double h) {
  const int m = n + 1;
  XxModes modes;
  modes.e.resize(m);
  modes.p.resize(m, m);
  const double norm = std::sqrt(2.0 / (n + 2));
  for (int k = 0; k < m; ++k) {
    modes.e(k) = 2.0 * j * std::cos(pi * (k + 1) / (n + 2)) + 2.0 * h;
    for (int l = 0; l < m; ++l)
      modes.p(k, l) = norm * std::sin(pi * (k + 1) * (l + 1) / (n + 2));
  }
  return modes;
}

double xx_asymptotic_u(int n, double j, double t) {
  const double b = 2.0 * j * t;
  return std::abs(std::cyl_bessel_j(n, b) + 2.0 * std::cyl_bessel_j(n + 2, b) +
                  std::cyl_bessel_j(n + 4, b));
}

XxPeak xx_peak_estimate(int n, double j) {
  XxPeak peak;
  peak.t_star = (n + 1.019 * std::cbrt(n / 2.0)) / (2.0 * j);
  peak.u_star = 2.700 / std::cbrt(static_cast<double>(n)) - 4.804 / n;
  return peak;
}

std::string propagator_to_json(const Propagator& prop) {
  auto dump = [](const Eigen::MatrixXcd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        row.push_back({m(i, j).real(), m(i, j).imag()});
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json out;
  out["t"] = prop.t;
  out["u"] = dump(prop.u);
  out["w"] = dump(prop.w);
  return out.dump();
}

}  // namespace spinbus
