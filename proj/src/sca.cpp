#include "hyfi/sca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "hyfi/csv.hpp"

namespace hyfi {

Eigen::MatrixXd embed(const Eigen::MatrixXcd& f) {
  Eigen::MatrixXd v(2 * f.rows(), f.cols());
  v.topRows(f.rows()) = f.real();
  v.bottomRows(f.rows()) = f.imag();
  return v;
}

Eigen::MatrixXcd unembed(const Eigen::MatrixXd& v) {
  if (v.rows() % 2 != 0) throw Error("unembed: odd row count");
  const Eigen::Index m = v.rows() / 2;
  Eigen::MatrixXcd f(m, v.cols());
  f.real() = v.topRows(m);
  f.imag() = v.bottomRows(m);
  return f;
}

Eigen::MatrixXd link_matrix(const Eigen::VectorXcd& g) {
  const Eigen::Index m = g.size();
  Eigen::MatrixXd b(2, 2 * m);
  b.row(0) << g.real().transpose(), g.imag().transpose();
  b.row(1) << -g.imag().transpose(), g.real().transpose();
  return b;
}

Eigen::MatrixXd link_matrix(const Eigen::VectorXd& g) { return g.transpose(); }

// ---------------------------------------------------------------------------
// LinkSurrogate
// ---------------------------------------------------------------------------

namespace {

double kx(Tech t) { return t == Tech::WiFi ? 1.0 : kE; }
double ky(Tech t) { return t == Tech::WiFi ? 1.0 : 2.0 * kPi; }

// D = 1 - (y / (x + y))^2 written without cancellation.
double dispersion_xy(double x, double y) {
  const double z = x + y;
  return x * (x + 2.0 * y) / (z * z);
}

}  // namespace

LinkSurrogate::LinkSurrogate(Tech tech, Eigen::MatrixXd link, int user, const Eigen::MatrixXd& v_t)
    : tech_(tech), link_(std::move(link)), user_(user) {
  if (link_.cols() != v_t.rows()) throw Error("LinkSurrogate: link / iterate dimension mismatch");
  if (user < 0 || user >= v_t.cols()) throw Error("LinkSurrogate: user index out of range");
  a_t_ = link_ * v_t;
  x_t_ = kappa_x() * a_t_.col(user).squaredNorm();
  double interf = 0.0;
  for (int j = 0; j < a_t_.cols(); ++j) {
    if (j != user) interf += a_t_.col(j).squaredNorm();
  }
  y_t_ = kappa_y() * (interf + 1.0);
  active_ = !link_.isZero() && x_t_ > 0;
  if (active_) {
    const double d = dispersion_t();
    beta_ = 0.5 / std::sqrt(d);
    alpha_ = 0.5 * std::sqrt(d) + beta_;
  }
}

double LinkSurrogate::kappa_x() const { return kx(tech_); }
double LinkSurrogate::kappa_y() const { return ky(tech_); }
double LinkSurrogate::shannon_t() const { return std::log1p(x_t_ / y_t_); }
double LinkSurrogate::dispersion_t() const { return dispersion_xy(x_t_, y_t_); }

double LinkSurrogate::signal(const Eigen::MatrixXd& v) const {
  return kappa_x() * (link_ * v.col(user_)).squaredNorm();
}

double LinkSurrogate::interference(const Eigen::MatrixXd& v) const {
  double s = 0.0;
  for (int j = 0; j < v.cols(); ++j) {
    if (j != user_) s += (link_ * v.col(j)).squaredNorm();
  }
  return kappa_y() * (s + 1.0);
}

double LinkSurrogate::shannon(const Eigen::MatrixXd& v) const {
  return std::log1p(signal(v) / interference(v));
}

double LinkSurrogate::sqrt_dispersion(const Eigen::MatrixXd& v) const {
  return std::sqrt(dispersion_xy(signal(v), interference(v)));
}

double LinkSurrogate::interference_minorant(const Eigen::MatrixXd& v) const {
  double s = 0.0;
  for (int j = 0; j < v.cols(); ++j) {
    if (j == user_) continue;
    const Eigen::VectorXd a = link_ * v.col(j);
    s += 2.0 * a_t_.col(j).dot(a) - a_t_.col(j).squaredNorm();
  }
  return kappa_y() * (s + 1.0);
}

double LinkSurrogate::shannon_bound(const Eigen::MatrixXd& v) const {
  if (!active_) return 0.0;
  const double g = gamma_t();
  const Eigen::VectorXd a = link_ * v.col(user_);
  return std::log1p(g) - g + 2.0 * kappa_x() * a_t_.col(user_).dot(a) / y_t_ -
         g / a_t() * (signal(v) + interference(v));
}

double LinkSurrogate::dispersion_bound(const Eigen::MatrixXd& v) const {
  if (!active_) return 0.0;
  const double y = interference(v);
  return alpha_ - beta_ * (c1() * interference_minorant(v) - c2() * (signal(v) + y) - c3() * y * y);
}

Eigen::MatrixXd LinkSurrogate::shannon_bound_gradient(const Eigen::MatrixXd& v) const {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  if (!active_) return grad;
  const double ratio = gamma_t() / a_t();
  for (int j = 0; j < v.cols(); ++j) {
    const Eigen::VectorXd a = link_ * v.col(j);
    if (j == user_) {
      grad.col(j) = link_.transpose() *
                    (2.0 * kappa_x() / y_t_ * a_t_.col(j) - ratio * 2.0 * kappa_x() * a);
    } else {
      grad.col(j) = -ratio * 2.0 * kappa_y() * (link_.transpose() * a);
    }
  }
  return grad;
}

Eigen::MatrixXd LinkSurrogate::dispersion_bound_gradient(const Eigen::MatrixXd& v) const {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  if (!active_) return grad;
  const double y = interference(v);
  for (int j = 0; j < v.cols(); ++j) {
    const Eigen::VectorXd a = link_ * v.col(j);
    if (j == user_) {
      grad.col(j) = beta_ * c2() * 2.0 * kappa_x() * (link_.transpose() * a);
    } else {
      const Eigen::VectorXd d_tau = 2.0 * kappa_y() * (link_.transpose() * a_t_.col(j));
      const Eigen::VectorXd d_y = 2.0 * kappa_y() * (link_.transpose() * a);
      grad.col(j) = -beta_ * c1() * d_tau + beta_ * c2() * d_y + beta_ * c3() * 2.0 * y * d_y;
    }
  }
  return grad;
}

double LinkSurrogate::rate_bound(const Eigen::MatrixXd& v, const SliceParams& slice, double bw) const {
  if (!active_) return 0.0;
  double r = shannon_bound(v);
  if (slice.finite_blocklength()) {
    const double chi = inverse_q(slice.error_prob) / std::sqrt(static_cast<double>(slice.blocklength(bw)));
    r -= chi * std::sqrt(dispersion_factor(tech_)) * dispersion_bound(v);
  }
  return bandwidth_factor(tech_) * bw * r;
}

TrustRegionStatus trust_region_status(const LinkSurrogate& link, const Eigen::MatrixXd& v, bool fbl,
                                      double delta_pos) {
  TrustRegionStatus s;
  const int k = link.user();
  const Eigen::VectorXd a = link.link() * v.col(k);
  s.positivity = 2.0 * link.amplitudes().col(k).dot(a) - a.squaredNorm() - delta_pos;
  if (fbl) {
    const double z = link.signal(v) + link.interference(v);
    s.sum_bound = 2.0 * link.a_t() - z;
    s.minorant_bound = 2.0 * link.a_t() / link.y_t() * link.interference_minorant(v) - z;
  } else {
    s.sum_bound = std::numeric_limits<double>::infinity();
    s.minorant_bound = std::numeric_limits<double>::infinity();
  }
  return s;
}

double bilinear_linearization(double phi_t, double psi_t, double phi, double psi) {
  return phi_t * psi_t + psi_t * (phi - phi_t) + phi_t * (psi - psi_t);
}

ExpansionPoint make_expansion(const SystemModel& model, const PrecodingState& state) {
  ExpansionPoint e;
  e.wifi_v = embed(state.wifi);
  const double sw = std::sqrt(model.wifi_noise);
  for (int k = 0; k < model.num_users(); ++k) {
    e.wifi.emplace_back(Tech::WiFi, link_matrix(Eigen::VectorXcd(model.wifi_channel.col(k) / sw)), k, e.wifi_v);
  }
  if (model.has_lifi()) {
    e.lifi_v = state.lifi;
    const double sl = std::sqrt(model.lifi_noise);
    for (int k = 0; k < model.num_users(); ++k) {
      e.lifi.emplace_back(Tech::LiFi, link_matrix(Eigen::VectorXd(model.lifi_channel.col(k) / sl)), k, e.lifi_v);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Subproblem assembly
// ---------------------------------------------------------------------------

namespace {

// Maps one technology's precoder block onto program variables: v_j[i] lives at
// offset + j * dim + i and the physical (embedded) precoder is scale * v.
struct TechBlock {
  int offset = -1;
  int dim = 0;
  double scale = 0.0;
  double efficiency = 1.0;

  bool on() const { return offset >= 0; }
  int index(int j, int i) const { return offset + j * dim + i; }
};

double rms_column_norm(const Eigen::MatrixXd& v) {
  return v.cols() ? std::sqrt(v.squaredNorm() / static_cast<double>(v.cols())) : 0.0;
}

TechBlock add_block(ConvexProgram& p, const Eigen::MatrixXd& v_t, double efficiency) {
  TechBlock b;
  b.scale = rms_column_norm(v_t);
  if (!(b.scale > 0)) return b;
  b.dim = static_cast<int>(v_t.rows());
  b.offset = p.num_vars;
  b.efficiency = efficiency;
  for (int i = 0; i < v_t.size(); ++i) p.add_variable();
  return b;
}

// coef * (w . a_kj) where a_kj = B (scale v_j).
LinearExpr dot_amplitude(const TechBlock& tb, const Eigen::MatrixXd& link, int j, const Eigen::VectorXd& w,
                         double coef) {
  LinearExpr e;
  const Eigen::RowVectorXd row = coef * tb.scale * (w.transpose() * link);
  for (int i = 0; i < tb.dim; ++i) e.add(tb.index(j, i), row(i));
  return e;
}

// coef * a_kj[r].
LinearExpr amplitude(const TechBlock& tb, const Eigen::MatrixXd& link, int j, int r, double coef) {
  LinearExpr e;
  for (int i = 0; i < tb.dim; ++i) e.add(tb.index(j, i), coef * tb.scale * link(r, i));
  return e;
}

LinearExpr var(int index, double coef = 1.0) {
  LinearExpr e;
  e.add(index, coef);
  return e;
}

// Rotated cone ||u||^2 <= w written as ||(2u, w - 1)|| <= w + 1.
void add_rotated(ConvexProgram& p, std::vector<LinearExpr> u, const LinearExpr& w) {
  ConeConstraint c;
  for (auto& e : u) {
    LinearExpr twice;
    twice.add(e, 2.0);
    c.args.push_back(std::move(twice));
  }
  LinearExpr wm = w;
  wm += -1.0;
  c.args.push_back(std::move(wm));
  c.bound = w;
  c.bound += 1.0;
  p.add_cone(std::move(c));
}

// Adds the epigraph variable q with (X' + Y') / A <= q and returns its index.
int add_sum_epigraph(ConvexProgram& p, const TechBlock& tb, const LinkSurrogate& ls, int k_users) {
  const int q = p.add_variable();
  const double a = ls.a_t();
  const int d = static_cast<int>(ls.link().rows());
  std::vector<LinearExpr> u;
  for (int j = 0; j < k_users; ++j) {
    const double c = std::sqrt((j == ls.user() ? ls.kappa_x() : ls.kappa_y()) / a);
    for (int r = 0; r < d; ++r) u.push_back(amplitude(tb, ls.link(), j, r, c));
  }
  LinearExpr w = var(q);
  w += -ls.kappa_y() / a;
  add_rotated(p, std::move(u), w);
  return q;
}

// Surrogate rate of one link (nats/s) as an affine expression of program
// variables; adds the epigraph and trust-region constraints it needs.
LinearExpr add_link_rate(ConvexProgram& p, const TechBlock& tb, const LinkSurrogate& ls, const SliceParams& slice,
                         double bandwidth, double delta_pos, int k_users) {
  const int k = ls.user();
  const double g = ls.gamma_t();
  const double yt = ls.y_t();
  const Eigen::VectorXd akk = ls.amplitudes().col(k);

  const int q = add_sum_epigraph(p, tb, ls, k_users);
  LinearExpr s(std::log1p(g) - g);
  s.add(dot_amplitude(tb, ls.link(), k, akk, 2.0 * ls.kappa_x() / yt));
  s.add(q, -g);

  // Positivity trust region: ||a||^2 <= 2 a_t . a - delta (ball around a_t).
  {
    const double n2 = akk.squaredNorm();
    std::vector<LinearExpr> u;
    for (int r = 0; r < akk.size(); ++r) u.push_back(amplitude(tb, ls.link(), k, r, 1.0 / std::sqrt(n2)));
    LinearExpr w = dot_amplitude(tb, ls.link(), k, akk, 2.0 / n2);
    w += -delta_pos / n2;
    add_rotated(p, std::move(u), w);
  }

  LinearExpr rate;
  const double pre = bandwidth_factor(ls.tech()) * bandwidth;
  rate.add(s, pre);
  if (!slice.finite_blocklength()) return rate;

  const int d = static_cast<int>(ls.link().rows());
  // y >= Y'/Y'^t and u >= y^2.
  const int y = p.add_variable();
  const int uu = p.add_variable();
  {
    std::vector<LinearExpr> u;
    const double c = std::sqrt(ls.kappa_y() / yt);
    for (int j = 0; j < k_users; ++j) {
      if (j == k) continue;
      for (int r = 0; r < d; ++r) u.push_back(amplitude(tb, ls.link(), j, r, c));
    }
    LinearExpr w = var(y);
    w += -ls.kappa_y() / yt;
    add_rotated(p, std::move(u), w);
    add_rotated(p, {var(y)}, var(uu));
  }
  // tau_hat = tau' / Y'^t.
  LinearExpr tau(ls.kappa_y() / yt);
  for (int j = 0; j < k_users; ++j) {
    if (j == k) continue;
    const Eigen::VectorXd aj = ls.amplitudes().col(j);
    tau.add(dot_amplitude(tb, ls.link(), j, aj, 2.0 * ls.kappa_y() / yt));
    tau += -ls.kappa_y() / yt * aj.squaredNorm();
  }
  const double r2 = (yt / ls.a_t()) * (yt / ls.a_t());
  LinearExpr sqrt_d(ls.alpha());
  sqrt_d.add(q, 2.0 * ls.beta() * r2);
  sqrt_d.add(uu, ls.beta() * r2);
  sqrt_d.add(tau, -4.0 * ls.beta() * r2);
  const double chi = inverse_q(slice.error_prob) / std::sqrt(static_cast<double>(slice.blocklength(bandwidth)));
  rate.add(sqrt_d, -pre * chi * std::sqrt(dispersion_factor(ls.tech())));

  // Trust regions of the dispersion bound: X'+Y' <= 2A and X'+Y' <= 2 (A/Y'^t) tau'.
  p.add_less_equal(var(q), 2.0);
  LinearExpr c = var(q);
  c.add(tau, -2.0);
  p.add_less_equal(std::move(c));
  return rate;
}

}  // namespace

PrecodingState Subproblem::decode(const Eigen::VectorXd& x) const {
  PrecodingState s;
  Eigen::MatrixXd vw = Eigen::MatrixXd::Zero(2 * num_antennas, num_users);
  if (wifi_offset >= 0) {
    for (int j = 0; j < num_users; ++j) {
      vw.col(j) = wifi_scale * x.segment(wifi_offset + j * 2 * num_antennas, 2 * num_antennas);
    }
  }
  s.wifi = unembed(vw);
  s.lifi = Eigen::MatrixXd::Zero(num_leds, num_leds ? num_users : 0);
  if (lifi_offset >= 0) {
    for (int j = 0; j < num_users; ++j) s.lifi.col(j) = lifi_scale * x.segment(lifi_offset + j * num_leds, num_leds);
  }
  s.phi = phi_scale * x(phi_index);
  s.psi = psi_scale * x(psi_index);
  return s;
}

Subproblem assemble_subproblem(const SystemModel& model, const PrecodingState& state,
                               const ExpansionPoint& expansion, const ScaOptions& options) {
  const int k_users = model.num_users();
  if (state.wifi.rows() != model.num_antennas() || state.wifi.cols() != k_users) {
    throw Error("assemble_subproblem: WiFi precoder dimensions mismatch");
  }
  if (state.lifi.rows() != model.num_leds()) throw Error("assemble_subproblem: LiFi precoder dimensions mismatch");
  if (!(state.psi > 0)) throw Error("assemble_subproblem: psi_t must be > 0");
  const double rho0 = state.phi * state.psi;
  if (!(rho0 > 0)) throw Error("assemble_subproblem: sum rate at the expansion point must be > 0");

  Subproblem sp;
  sp.num_users = k_users;
  sp.num_antennas = model.num_antennas();
  sp.num_leds = model.num_leds();
  ConvexProgram& p = sp.program;

  const TechBlock wb = add_block(p, expansion.wifi_v, model.wifi_efficiency);
  TechBlock lb;
  if (model.has_lifi()) lb = add_block(p, expansion.lifi_v, model.lifi_efficiency);
  sp.wifi_offset = wb.offset;
  sp.wifi_scale = wb.scale;
  sp.lifi_offset = lb.offset;
  sp.lifi_scale = lb.scale;
  sp.phi_index = p.add_variable();
  sp.psi_index = p.add_variable();
  sp.base_variable_count = p.num_vars;
  sp.phi_scale = state.phi;
  sp.psi_scale = state.psi;
  p.objective(sp.phi_index) = 1.0;

  // Rates.
  LinearExpr sum_rate;
  std::vector<LinearExpr> user_rate(k_users);
  auto add_tech = [&](const TechBlock& tb, const std::vector<LinkSurrogate>& links) {
    if (!tb.on()) return;
    for (const auto& ls : links) {
      if (!ls.active()) continue;
      const auto& slice = model.slices[ls.user()];
      LinearExpr r = add_link_rate(p, tb, ls, slice, model.bandwidth(ls.tech()), options.delta_pos, k_users);
      sum_rate.add(r);
      user_rate[ls.user()].add(r);
    }
  };
  add_tech(wb, expansion.wifi);
  add_tech(lb, expansion.lifi);

  // Fractional objective: sum R_bar >= linearized phi * psi, normalized by rho0.
  {
    LinearExpr c6 = var(sp.phi_index);
    c6.add(sp.psi_index, 1.0);
    c6 += -1.0;
    c6.add(sum_rate, -1.0 / rho0);
    c6.compress();
    p.add_less_equal(std::move(c6));
  }
  // Rate floors with a small relative margin so the true rate clears R_min.
  for (int k = 0; k < k_users; ++k) {
    const double rmin = model.slices[k].rate_min;
    if (!(rmin > 0)) continue;
    const double scale = std::max(rmin, rho0 / k_users);
    LinearExpr c1;
    c1.add(user_rate[k], -1.0 / scale);
    c1 += rmin * (1.0 + 1e-7) / scale;
    c1.compress();
    p.add_less_equal(std::move(c1));
  }
  // Power: psi_t * ||z||^2 <= psi_t psi' and P <= P_max.
  {
    std::vector<LinearExpr> z;
    for (const TechBlock* tb : std::initializer_list<const TechBlock*>{&wb, &lb}) {
      if (!tb->on()) continue;
      const double c = tb->scale / std::sqrt(tb->efficiency * state.psi);
      for (int i = 0; i < tb->dim * k_users; ++i) z.push_back(var(tb->offset + i, c));
    }
    // P <= P_max, written as ||eps z|| <= 1 so the constant stays O(1).
    const double eps = std::sqrt(state.psi / model.max_power_w);
    ConeConstraint c2;
    for (const auto& e : z) {
      LinearExpr scaled;
      scaled.add(e, eps);
      c2.args.push_back(std::move(scaled));
    }
    c2.bound = LinearExpr(1.0);
    p.add_cone(std::move(c2));
    add_rotated(p, std::move(z), var(sp.psi_index));
  }
  // LED drive bound: sum_k |f_lk| <= bound via |.| slacks.
  if (lb.on()) {
    for (int l = 0; l < model.num_leds(); ++l) {
      LinearExpr row;
      for (int k = 0; k < k_users; ++k) {
        const int t = p.add_variable();
        LinearExpr up = var(lb.index(k, l));
        up.add(t, -1.0);
        p.add_less_equal(std::move(up));
        LinearExpr down = var(lb.index(k, l), -1.0);
        down.add(t, -1.0);
        p.add_less_equal(std::move(down));
        row.add(t, 1.0);
      }
      p.add_less_equal(std::move(row), model.led_bound / lb.scale);
    }
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Initial point
// ---------------------------------------------------------------------------

namespace {

std::vector<LinkSurrogate> tech_links(const SystemModel& model, Tech tech, const Eigen::MatrixXd& v) {
  std::vector<LinkSurrogate> links;
  for (int k = 0; k < model.num_users(); ++k) {
    if (tech == Tech::WiFi) {
      links.emplace_back(tech, link_matrix(Eigen::VectorXcd(model.wifi_channel.col(k) / std::sqrt(model.wifi_noise))),
                         k, v);
    } else {
      links.emplace_back(tech, link_matrix(Eigen::VectorXd(model.lifi_channel.col(k) / std::sqrt(model.lifi_noise))),
                         k, v);
    }
  }
  return links;
}

bool channel_nonzero(const SystemModel& model, Tech tech, int k) {
  return tech == Tech::WiFi ? !model.wifi_channel.col(k).isZero() : !model.lifi_channel.col(k).isZero();
}

double min_shannon(const std::vector<LinkSurrogate>& links, const std::vector<int>& users, const Eigen::MatrixXd& v) {
  double m = std::numeric_limits<double>::infinity();
  for (int k : users) m = std::min(m, links[k].shannon(v));
  return m;
}

// Max-min Shannon SCA for one technology under a power budget (and the LED
// bound for LiFi). Returns the embedded precoder.
Eigen::MatrixXd maxmin_tech(const SystemModel& model, Tech tech, double budget, const ScaOptions& opt) {
  const int k_users = model.num_users();
  const int dim = tech == Tech::WiFi ? 2 * model.num_antennas() : model.num_leds();
  const double eta = model.efficiency(tech);
  std::vector<int> users;
  for (int k = 0; k < k_users; ++k) {
    if (channel_nonzero(model, tech, k)) users.push_back(k);
  }
  if (users.empty() || !(budget > 0)) return Eigen::MatrixXd::Zero(dim, k_users);

  std::mt19937_64 rng(opt.init_seed * 2 + (tech == Tech::WiFi ? 0 : 1));
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v(dim, k_users);
  for (int j = 0; j < k_users; ++j) {
    for (int i = 0; i < dim; ++i) v(i, j) = normal(rng);
  }
  v *= std::sqrt(budget * eta / v.squaredNorm());
  if (tech == Tech::LiFi) {
    const double worst = v.cwiseAbs().rowwise().sum().maxCoeff();
    if (worst > model.led_bound) v *= model.led_bound / worst;
  }

  double best = min_shannon(tech_links(model, tech, v), users, v);
  for (int it = 0; it < opt.init_max_iters; ++it) {
    const auto links = tech_links(model, tech, v);
    ConvexProgram p;
    TechBlock tb = add_block(p, v, eta);
    const int t = p.add_variable();
    p.objective(t) = 1.0;
    for (int k : users) {
      const auto& ls = links[k];
      if (!ls.active()) continue;
      const double g = ls.gamma_t();
      const int q = add_sum_epigraph(p, tb, ls, k_users);
      LinearExpr s(std::log1p(g) - g);
      s.add(dot_amplitude(tb, ls.link(), k, ls.amplitudes().col(k), 2.0 * ls.kappa_x() / ls.y_t()));
      s.add(q, -g);
      LinearExpr c = var(t);
      c.add(s, -1.0);
      c.compress();
      p.add_less_equal(std::move(c));
    }
    ConeConstraint power;
    for (int i = 0; i < dim * k_users; ++i) power.args.push_back(var(tb.offset + i, tb.scale / std::sqrt(eta)));
    power.bound = LinearExpr(std::sqrt(budget));
    p.add_cone(std::move(power));
    if (tech == Tech::LiFi) {
      for (int l = 0; l < dim; ++l) {
        LinearExpr row;
        for (int k = 0; k < k_users; ++k) {
          const int a = p.add_variable();
          LinearExpr up = var(tb.index(k, l));
          up.add(a, -1.0);
          p.add_less_equal(std::move(up));
          LinearExpr down = var(tb.index(k, l), -1.0);
          down.add(a, -1.0);
          p.add_less_equal(std::move(down));
          row.add(a, 1.0);
        }
        p.add_less_equal(std::move(row), model.led_bound / tb.scale);
      }
    }
    const SolveResult r = solve(p, opt.solver);
    if (r.status == SolveStatus::Infeasible || r.status == SolveStatus::Unbounded || r.x.size() == 0 ||
        !r.x.allFinite()) {
      break;
    }
    Eigen::MatrixXd next(dim, k_users);
    for (int j = 0; j < k_users; ++j) next.col(j) = tb.scale * r.x.segment(tb.index(j, 0), dim);
    // Clip tiny solver overshoot of the budgets.
    const double pw = next.squaredNorm() / eta;
    if (pw > budget) next *= std::sqrt(budget / pw);
    if (tech == Tech::LiFi) {
      const double worst = next.cwiseAbs().rowwise().sum().maxCoeff();
      if (worst > model.led_bound) next *= model.led_bound / worst;
    }
    const double value = min_shannon(tech_links(model, tech, next), users, next);
    if (!(value > best)) break;
    const double gain = (value - best) / std::max(std::abs(best), 1e-300);
    v = next;
    best = value;
    if (gain < opt.rel_tol) break;
  }
  return v;
}

}  // namespace

PrecodingState initial_point(const SystemModel& model, const ScaOptions& options) {
  model.validate();
  const double share = model.has_lifi() ? options.wifi_power_share : 1.0;
  if (!(share >= 0 && share <= 1)) throw Error("initial_point: WiFi power share must lie in [0, 1]");
  PrecodingState s;
  s.wifi = unembed(maxmin_tech(model, Tech::WiFi, share * model.max_power_w, options));
  s.lifi = model.has_lifi() ? maxmin_tech(model, Tech::LiFi, (1.0 - share) * model.max_power_w, options)
                            : Eigen::MatrixXd(0, 0);
  const Evaluation ev = evaluate(model, s.wifi, s.lifi);
  for (int k = 0; k < model.num_users(); ++k) {
    if (!(ev.rates[k].total() > 0)) {
      throw Error("initial_point: user " + std::to_string(k) + " has no positive rate at the initial point");
    }
  }
  s.psi = ev.power.total_w();
  s.phi = ev.ee;
  return s;
}

PrecodingState power_backoff(const SystemModel& model, const PrecodingState& state) {
  const bool wifi_on = !state.wifi.isZero();
  const bool lifi_on = state.lifi.size() > 0 && !state.lifi.isZero();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  auto score = [&](double cw, double cl) {
    const Evaluation ev = evaluate(model, cw * state.wifi, cl * state.lifi, 0.0);
    if (!ev.ee_defined || !ev.rates_ok) return neg_inf;
    return ev.ee;
  };
  std::vector<double> grid{0.0};
  for (int k = 0; k <= 100; ++k) grid.push_back(std::pow(10.0, -k / 10.0));
  const std::vector<double> wifi_grid = wifi_on ? grid : std::vector<double>{0.0};
  const std::vector<double> lifi_grid = lifi_on ? grid : std::vector<double>{0.0};

  double best = neg_inf;
  double bw = 1.0;
  double bl = lifi_on ? 1.0 : 0.0;
  for (double cw : wifi_grid) {
    for (double cl : lifi_grid) {
      const double v = score(cw, cl);
      if (v > best) {
        best = v;
        bw = cw;
        bl = cl;
      }
    }
  }
  if (best == neg_inf) throw Error("power_backoff: rate floors are not met even at the initial point");

  // Golden-section refinement of each factor on a log scale around the grid optimum.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int round = 0; round < 3; ++round) {
    for (int coord = 0; coord < 2; ++coord) {
      double& c = coord == 0 ? bw : bl;
      if (c == 0.0) continue;
      double lo = std::log10(c) - 0.1;
      double hi = std::min(0.0, std::log10(c) + 0.1);
      auto eval_at = [&](double e) {
        const double trial = std::pow(10.0, e);
        return coord == 0 ? score(trial, bl) : score(bw, trial);
      };
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      double f1 = eval_at(x1);
      double f2 = eval_at(x2);
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        if (f1 > best) {
          best = f1;
          c = std::pow(10.0, x1);
        }
        if (f2 > best) {
          best = f2;
          c = std::pow(10.0, x2);
        }
        if (f1 >= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = eval_at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = eval_at(x2);
        }
      }
    }
  }
  PrecodingState out = state;
  out.wifi = bw * state.wifi;
  out.lifi = bl * state.lifi;
  const Evaluation ev = evaluate(model, out.wifi, out.lifi, 0.0);
  out.phi = ev.ee;
  out.psi = ev.power.total_w();
  return out;
}

// ---------------------------------------------------------------------------
// Outer loop
// ---------------------------------------------------------------------------

namespace {

TraceRow trace_row(int iter, const PrecodingState& s, const Evaluation& ev, std::string status, double ms) {
  TraceRow r;
  r.iter = iter;
  r.phi = s.phi;
  r.psi = s.psi;
  r.sum_rate = ev.sum_rate;
  r.p_wifi = ev.power.wifi_w;
  r.p_lifi = ev.power.lifi_w;
  r.status = std::move(status);
  r.wall_ms = ms;
  return r;
}

}  // namespace

ScaResult optimize_from(const SystemModel& model, PrecodingState start, const ScaOptions& options) {
  model.validate();
  ScaResult res;
  Evaluation ev = evaluate(model, start.wifi, start.lifi);
  if (!ev.feasible() || !ev.ee_defined || !(ev.sum_rate > 0)) {
    throw Error("optimize_ee: starting point violates the rate, power or LED constraints");
  }
  start.phi = ev.ee;
  start.psi = ev.power.total_w();
  start.iteration = 0;
  res.state = start;
  res.trace.push_back(trace_row(0, start, ev, "initial", 0.0));

  for (int t = 1; t <= options.max_iters; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExpansionPoint expansion = make_expansion(model, res.state);
    const Subproblem sub = assemble_subproblem(model, res.state, expansion, options);
    const SolveResult sol = solve(sub.program, options.solver);
    if (sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded || sol.x.size() == 0 ||
        !sol.x.allFinite()) {
      res.diagnostic = std::string("subproblem ") + to_string(sol.status) + " at iteration " + std::to_string(t);
      break;
    }
    PrecodingState cand = sub.decode(sol.x);
    const Evaluation cev = evaluate(model, cand.wifi, cand.lifi);
    if (!cev.feasible() || !cev.ee_defined) {
      res.diagnostic = "iterate " + std::to_string(t) + " rejected: constraint violation (" + to_string(sol.status) + ")";
      break;
    }
    if (!(cev.ee >= res.state.phi)) {
      // No ascent within solver accuracy: the previous iterate is a fixed point.
      res.converged = true;
      res.plateau_iteration = t;
      res.diagnostic = "no further ascent at iteration " + std::to_string(t);
      break;
    }
    const double gain = (cev.ee - res.state.phi) / res.state.phi;
    cand.phi = cev.ee;
    cand.psi = cev.power.total_w();
    cand.iteration = t;
    res.state = cand;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.trace.push_back(trace_row(t, cand, cev, to_string(sol.status), ms));
    if (gain < options.rel_tol) {
      res.converged = true;
      res.plateau_iteration = t;
      break;
    }
  }
  if (!res.converged && res.diagnostic.empty()) res.diagnostic = "iteration limit reached";
  return res;
}

ScaResult optimize_ee(const SystemModel& model, const ScaOptions& options) {
  PrecodingState s = initial_point(model, options);
  if (options.power_backoff) s = power_backoff(model, s);
  return optimize_from(model, std::move(s), options);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, bool include_timing) {
  std::vector<std::string> header{"iter", "phi", "psi", "sum_rate_nats", "p_wifi_w", "p_lifi_w", "solver_status"};
  if (include_timing) header.push_back("wall_ms");
  CsvWriter csv(out, header);
  for (const auto& r : trace) {
    if (include_timing) csv.row(r.iter, r.phi, r.psi, r.sum_rate, r.p_wifi, r.p_lifi, r.status, r.wall_ms);
    else csv.row(r.iter, r.phi, r.psi, r.sum_rate, r.p_wifi, r.p_lifi, r.status);
  }
}

}  // namespace hyfi
