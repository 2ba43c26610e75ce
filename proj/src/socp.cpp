#include "hyfi/socp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <cstdio>
#include <ostream>

namespace hyfi {

LinearExpr& LinearExpr::add(const LinearExpr& other, double scale) {
  for (const auto& [i, c] : other.terms) add(i, c * scale);
  constant += other.constant * scale;
  return *this;
}

double LinearExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(i);
  return v;
}

void LinearExpr::compress() {
  std::map<int, double> merged;
  for (const auto& [i, c] : terms) merged[i] += c;
  terms.clear();
  for (const auto& [i, c] : merged) {
    if (c != 0.0) terms.emplace_back(i, c);
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::NumericalError: return "numerical_error";
  }
  return "?";
}

namespace {

void check_expr(const LinearExpr& e, int n, const char* what) {
  for (const auto& [i, c] : e.terms) {
    if (i < 0 || i >= n) throw Error(std::string("program: variable index out of range in ") + what);
    if (!std::isfinite(c)) throw Error(std::string("program: non-finite coefficient in ") + what);
  }
  if (!std::isfinite(e.constant)) throw Error(std::string("program: non-finite constant in ") + what);
}

}  // namespace

void ConvexProgram::validate() const {
  if (num_vars <= 0) throw Error("program: no variables");
  if (objective.size() != num_vars) throw Error("program: objective size mismatch");
  if (!objective.allFinite()) throw Error("program: non-finite objective");
  if ((lower.size() != 0 && lower.size() != num_vars) || upper.size() != lower.size()) {
    throw Error("program: bound vector size mismatch");
  }
  bool has_bound = false;
  for (int i = 0; i < lower.size(); ++i) {
    if (std::isfinite(lower(i)) || std::isfinite(upper(i))) has_bound = true;
    if (lower(i) > upper(i)) throw Error("program: lower bound above upper bound");
  }
  if (num_constraints() == 0 && !has_bound) throw Error("program: at least one constraint required");
  for (const auto& e : linear) check_expr(e, num_vars, "linear constraint");
  for (const auto& e : equalities) check_expr(e, num_vars, "equality constraint");
  for (const auto& c : cones) {
    if (c.args.empty()) throw Error("program: cone constraint without arguments");
    check_expr(c.bound, num_vars, "cone bound");
    for (const auto& a : c.args) check_expr(a, num_vars, "cone argument");
  }
}

double max_violation(const ConvexProgram& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (const auto& e : p.linear) worst = std::max(worst, e.eval(x));
  for (const auto& e : p.equalities) worst = std::max(worst, std::abs(e.eval(x)));
  for (const auto& c : p.cones) {
    double sq = 0.0;
    for (const auto& a : c.args) {
      const double v = a.eval(x);
      sq += v * v;
    }
    worst = std::max(worst, std::sqrt(sq) - c.bound.eval(x));
  }
  for (int i = 0; i < p.lower.size(); ++i) {
    if (std::isfinite(p.lower(i))) worst = std::max(worst, p.lower(i) - x(i));
    if (std::isfinite(p.upper(i))) worst = std::max(worst, x(i) - p.upper(i));
  }
  return worst;
}

void write_program(std::ostream& out, const ConvexProgram& p) {
  auto expr = [&out](const LinearExpr& e) {
    out << e.constant;
    for (const auto& [i, c] : e.terms) out << ' ' << i << ':' << c;
  };
  out.precision(17);
  out << "socp " << p.num_vars << '\n';
  out << "max";
  for (int i = 0; i < p.num_vars; ++i) {
    if (p.objective(i) != 0.0) out << ' ' << i << ':' << p.objective(i);
  }
  out << '\n';
  for (const auto& e : p.linear) {
    out << "le ";
    expr(e);
    out << '\n';
  }
  for (const auto& e : p.equalities) {
    out << "eq ";
    expr(e);
    out << '\n';
  }
  for (const auto& c : p.cones) {
    out << "soc " << c.args.size() << '\n' << "  t ";
    expr(c.bound);
    out << '\n';
    for (const auto& a : c.args) {
      out << "  x ";
      expr(a);
      out << '\n';
    }
  }
  for (int i = 0; i < p.lower.size(); ++i) {
    if (std::isfinite(p.lower(i)) || std::isfinite(p.upper(i))) {
      out << "bound " << i << ' ' << p.lower(i) << ' ' << p.upper(i) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Interior-point solver on the standard form
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K
// with K a product of nonnegative rays and second-order cones.
// ---------------------------------------------------------------------------
namespace {

struct Block {
  bool soc = false;
  int offset = 0;
  int dim = 1;
  std::vector<int> cols;
  Eigen::MatrixXd g;  // dim x cols.size()
  Eigen::VectorXd h;
};

struct Scaling {
  double eta = 1.0;       // orthant: sqrt(s/z); soc: eta
  Eigen::VectorXd wbar;   // soc only
};

using Vec = Eigen::VectorXd;

class ConeSet {
 public:
  std::vector<Block> blocks;
  int m = 0;
  int degree = 0;

  void add(Block b) {
    b.offset = m;
    m += b.dim;
    degree += 1;
    blocks.push_back(std::move(b));
  }

  Vec mul_g(const Vec& x) const {
    Vec out(m);
    for (const auto& b : blocks) {
      Vec xs(b.cols.size());
      for (std::size_t i = 0; i < b.cols.size(); ++i) xs(i) = x(b.cols[i]);
      out.segment(b.offset, b.dim) = b.g * xs;
    }
    return out;
  }

  Vec mul_gt(const Vec& z, int n) const {
    Vec out = Vec::Zero(n);
    for (const auto& b : blocks) {
      const Vec t = b.g.transpose() * z.segment(b.offset, b.dim);
      for (std::size_t i = 0; i < b.cols.size(); ++i) out(b.cols[i]) += t(i);
    }
    return out;
  }

  Vec h() const {
    Vec out(m);
    for (const auto& b : blocks) out.segment(b.offset, b.dim) = b.h;
    return out;
  }

  Vec identity() const {
    Vec e = Vec::Zero(m);
    for (const auto& b : blocks) e(b.offset) = 1.0;
    return e;
  }
};

double soc_residual(const Eigen::Ref<const Vec>& u) {
  return (u(0) - u.tail(u.size() - 1).norm()) * (u(0) + u.tail(u.size() - 1).norm());
}

// W v for one block.
void apply_w(const Block& b, const Scaling& sc, const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) {
  if (!b.soc) {
    out(0) = sc.eta * v(0);
    return;
  }
  const int n1 = b.dim - 1;
  const double w0 = sc.wbar(0);
  const auto w1 = sc.wbar.tail(n1);
  const double w1v1 = w1.dot(v.tail(n1));
  out(0) = sc.eta * (w0 * v(0) + w1v1);
  out.tail(n1) = sc.eta * (v.tail(n1) + (v(0) + w1v1 / (1.0 + w0)) * w1);
}

void apply_winv(const Block& b, const Scaling& sc, const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) {
  if (!b.soc) {
    out(0) = v(0) / sc.eta;
    return;
  }
  const int n1 = b.dim - 1;
  const double w0 = sc.wbar(0);
  const auto w1 = sc.wbar.tail(n1);
  const double w1v1 = w1.dot(v.tail(n1));
  out(0) = (w0 * v(0) - w1v1) / sc.eta;
  out.tail(n1) = (v.tail(n1) + (-v(0) + w1v1 / (1.0 + w0)) * w1) / sc.eta;
}

// u o v (Jordan product).
void jordan(const Block& b, const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& v, Eigen::Ref<Vec> out) {
  if (!b.soc) {
    out(0) = u(0) * v(0);
    return;
  }
  const int n1 = b.dim - 1;
  out(0) = u.dot(v);
  out.tail(n1) = u(0) * v.tail(n1) + v(0) * u.tail(n1);
}

// Solve lambda o x = d.
void jordan_div(const Block& b, const Eigen::Ref<const Vec>& lam, const Eigen::Ref<const Vec>& d,
                Eigen::Ref<Vec> out) {
  if (!b.soc) {
    out(0) = d(0) / lam(0);
    return;
  }
  const int n1 = b.dim - 1;
  const double l0 = lam(0);
  const auto l1 = lam.tail(n1);
  const double det = soc_residual(lam);
  const double x0 = (l0 * d(0) - l1.dot(d.tail(n1))) / det;
  out(0) = x0;
  out.tail(n1) = (d.tail(n1) - x0 * l1) / l0;
}

// Largest alpha with u + alpha du in the cone (capped at `cap`).
double max_step(const Block& b, const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& du, double cap) {
  if (!b.soc) {
    if (du(0) < 0) return std::min(cap, -u(0) / du(0));
    return cap;
  }
  const int n1 = b.dim - 1;
  const double a = du(0) * du(0) - du.tail(n1).squaredNorm();
  const double bb = u(0) * du(0) - u.tail(n1).dot(du.tail(n1));
  const double c = std::max(0.0, soc_residual(u));
  double alpha = cap;
  // Roots of a t^2 + 2 bb t + c = 0; first positive root where the residual vanishes.
  if (std::abs(a) < 1e-300) {
    if (bb < 0) alpha = std::min(alpha, -c / (2.0 * bb));
  } else {
    const double disc = bb * bb - a * c;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      // Numerically stable roots.
      const double q = -(bb + std::copysign(sq, bb));
      double r1 = q / a;
      double r2 = (q != 0.0) ? c / q : std::numeric_limits<double>::infinity();
      for (double r : {r1, r2}) {
        if (r > 0) alpha = std::min(alpha, r);
      }
    }
  }
  // The scalar part must stay nonnegative as well.
  if (du(0) < 0) alpha = std::min(alpha, -u(0) / du(0));
  return std::max(0.0, alpha);
}

class KktSolver {
 public:
  KktSolver(const ConeSet& cones, const Eigen::MatrixXd& a, int n) : cones_(cones), a_(a), n_(n) {}

  void factor(const std::vector<Scaling>& scalings) {
    scalings_ = &scalings;
    h_ = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t bi = 0; bi < cones_.blocks.size(); ++bi) {
      const Block& b = cones_.blocks[bi];
      Eigen::MatrixXd wg(b.dim, b.cols.size());
      for (int c = 0; c < wg.cols(); ++c) apply_winv(b, scalings[bi], b.g.col(c), wg.col(c));
      const Eigen::MatrixXd local = wg.transpose() * wg;
      for (std::size_t i = 0; i < b.cols.size(); ++i) {
        for (std::size_t j = 0; j < b.cols.size(); ++j) h_(b.cols[i], b.cols[j]) += local(i, j);
      }
    }
    const double scale = std::max(1.0, h_.diagonal().cwiseAbs().maxCoeff());
    reg_ = 1e-13 * scale;
    const int p = static_cast<int>(a_.rows());
    if (p == 0) {
      Eigen::MatrixXd hr = h_;
      hr.diagonal().array() += reg_;
      llt_.compute(hr);
      use_lu_ = llt_.info() != Eigen::Success;
      if (use_lu_) lu_.compute(hr);
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n_ + p, n_ + p);
      kkt.topLeftCorner(n_, n_) = h_;
      kkt.topLeftCorner(n_, n_).diagonal().array() += reg_;
      kkt.topRightCorner(n_, p) = a_.transpose();
      kkt.bottomLeftCorner(p, n_) = a_;
      kkt.bottomRightCorner(p, p).diagonal().array() = -reg_;
      use_lu_ = true;
      lu_.compute(kkt);
    }
  }

  // Solves [0 A' G'; A 0 0; G 0 -W^2] [x; y; z] = [r1; r2; r3] with
  // iterative refinement on the full system.
  void solve(const Vec& r1, const Vec& r2, const Vec& r3, Vec& x, Vec& y, Vec& z) const {
    reduced_path(r1, r2, r3, x, y, z);
    const double scale = std::max({1.0, r1.norm(), r2.norm(), r3.norm()});
    for (int it = 0; it < 3; ++it) {
      Vec e1 = r1 - cones_.mul_gt(z, n_);
      Vec e2 = r2;
      if (a_.rows()) {
        e1 -= a_.transpose() * y;
        e2 -= a_ * x;
      }
      Vec e3 = r3 - cones_.mul_g(x) + w2(z);
      const double err = std::max({e1.norm(), e2.norm(), e3.norm()});
      if (err <= 1e-14 * scale) break;
      Vec dx, dy, dz;
      reduced_path(e1, e2, e3, dx, dy, dz);
      x += dx;
      y += dy;
      z += dz;
    }
  }

 private:
  void reduced_path(const Vec& r1, const Vec& r2, const Vec& r3, Vec& x, Vec& y, Vec& z) const {
    const int p = static_cast<int>(a_.rows());
    Vec rhs(n_ + p);
    rhs << r1 + cones_.mul_gt(winv2(r3), n_), r2;
    Vec sol = reduced_solve(rhs);
    Vec res = rhs - apply_reduced(sol);
    sol += reduced_solve(res);
    x = sol.head(n_);
    y = sol.tail(p);
    z = winv2(cones_.mul_g(x) - r3);
  }

  Vec w2(const Vec& v) const {
    Vec out(v.size());
    Vec tmp;
    for (std::size_t bi = 0; bi < cones_.blocks.size(); ++bi) {
      const Block& b = cones_.blocks[bi];
      tmp.resize(b.dim);
      apply_w(b, (*scalings_)[bi], v.segment(b.offset, b.dim), tmp);
      apply_w(b, (*scalings_)[bi], tmp, out.segment(b.offset, b.dim));
    }
    return out;
  }

  Vec winv2(const Vec& v) const {
    Vec out(v.size());
    Vec tmp;
    for (std::size_t bi = 0; bi < cones_.blocks.size(); ++bi) {
      const Block& b = cones_.blocks[bi];
      tmp.resize(b.dim);
      apply_winv(b, (*scalings_)[bi], v.segment(b.offset, b.dim), tmp);
      apply_winv(b, (*scalings_)[bi], tmp, out.segment(b.offset, b.dim));
    }
    return out;
  }

  Vec apply_reduced(const Vec& sol) const {
    const int p = static_cast<int>(a_.rows());
    Vec out(n_ + p);
    out.head(n_) = h_ * sol.head(n_);
    if (p) {
      out.head(n_) += a_.transpose() * sol.tail(p);
      out.tail(p) = a_ * sol.head(n_);
    }
    return out;
  }

  Vec reduced_solve(const Vec& rhs) const {
    if (use_lu_) return lu_.solve(rhs);
    return llt_.solve(rhs);
  }

  const ConeSet& cones_;
  const Eigen::MatrixXd& a_;
  int n_;
  const std::vector<Scaling>* scalings_ = nullptr;
  Eigen::MatrixXd h_;
  double reg_ = 0.0;
  bool use_lu_ = false;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Block make_block(const std::vector<const LinearExpr*>& rows, const std::vector<double>& signs, bool soc) {
  // s_i = h_i - g_i x; rows given as affine forms r_i(x) with s_i = sign_i * r_i(x).
  Block b;
  b.soc = soc;
  b.dim = static_cast<int>(rows.size());
  std::map<int, int> col_index;
  for (const auto* r : rows) {
    for (const auto& [i, c] : r->terms) {
      if (!col_index.count(i)) {
        const int pos = static_cast<int>(col_index.size());
        col_index[i] = pos;
      }
    }
  }
  // Stable column order: ascending variable index.
  int pos = 0;
  for (auto& [i, slot] : col_index) {
    slot = pos++;
    b.cols.push_back(i);
  }
  b.g = Eigen::MatrixXd::Zero(b.dim, b.cols.size());
  b.h = Vec::Zero(b.dim);
  for (int r = 0; r < b.dim; ++r) {
    for (const auto& [i, c] : rows[r]->terms) b.g(r, col_index[i]) -= signs[r] * c;
    b.h(r) = signs[r] * rows[r]->constant;
  }
  return b;
}

Scaling nt_scaling(const Block& b, const Eigen::Ref<const Vec>& s, const Eigen::Ref<const Vec>& z) {
  Scaling sc;
  if (!b.soc) {
    sc.eta = std::sqrt(s(0) / z(0));
    return sc;
  }
  const double sres = soc_residual(s);
  const double zres = soc_residual(z);
  const Vec sb = s / std::sqrt(sres);
  const Vec zb = z / std::sqrt(zres);
  const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
  sc.wbar.resize(b.dim);
  sc.wbar(0) = (sb(0) + zb(0)) / (2.0 * gamma);
  sc.wbar.tail(b.dim - 1) = (sb.tail(b.dim - 1) - zb.tail(b.dim - 1)) / (2.0 * gamma);
  sc.eta = std::pow(sres / zres, 0.25);
  return sc;
}

// Shift v into the interior of the cone (used by the initial point).
void shift_interior(const ConeSet& cones, Vec& v) {
  double alpha = -std::numeric_limits<double>::infinity();
  for (const auto& b : cones.blocks) {
    if (!b.soc) {
      alpha = std::max(alpha, -v(b.offset));
    } else {
      alpha = std::max(alpha, v.segment(b.offset + 1, b.dim - 1).norm() - v(b.offset));
    }
  }
  if (alpha >= -1e-8) v += (1.0 + std::max(alpha, 0.0)) * cones.identity();
}

}  // namespace

SolveResult solve(const ConvexProgram& program, const SolveOptions& opt) {
  program.validate();
  const int n = program.num_vars;

  ConeSet cones;
  std::vector<const LinearExpr*> rows;
  std::vector<double> signs;
  // expr(x) <= 0  ->  s = -expr(x) >= 0.
  for (const auto& e : program.linear) cones.add(make_block({&e}, {-1.0}, false));
  std::vector<LinearExpr> bound_rows;
  for (int i = 0; i < program.lower.size(); ++i) {
    if (std::isfinite(program.lower(i))) {
      LinearExpr e(program.lower(i));
      e.add(i, -1.0);
      bound_rows.push_back(e);
    }
    if (std::isfinite(program.upper(i))) {
      LinearExpr e(-program.upper(i));
      e.add(i, 1.0);
      bound_rows.push_back(e);
    }
  }
  for (const auto& e : bound_rows) cones.add(make_block({&e}, {-1.0}, false));
  for (const auto& c : program.cones) {
    rows.clear();
    signs.clear();
    rows.push_back(&c.bound);
    for (const auto& a : c.args) rows.push_back(&a);
    signs.assign(rows.size(), 1.0);
    cones.add(make_block(rows, signs, true));
  }

  const int p = static_cast<int>(program.equalities.size());
  Eigen::MatrixXd amat = Eigen::MatrixXd::Zero(p, n);
  Vec bvec = Vec::Zero(p);
  for (int r = 0; r < p; ++r) {
    for (const auto& [i, c] : program.equalities[r].terms) amat(r, i) += c;
    bvec(r) = -program.equalities[r].constant;
  }
  const Vec c = -program.objective;
  const Vec hvec = cones.h();
  const int m = cones.m;

  SolveResult result;
  result.x = Vec::Zero(n);

  std::vector<Scaling> scalings(cones.blocks.size());
  for (std::size_t bi = 0; bi < cones.blocks.size(); ++bi) {
    if (cones.blocks[bi].soc) {
      scalings[bi].wbar = Vec::Zero(cones.blocks[bi].dim);
      scalings[bi].wbar(0) = 1.0;
    }
  }
  KktSolver kkt(cones, amat, n);
  kkt.factor(scalings);

  Vec x, y, z, s;
  {
    Vec xt, yt, zt;
    kkt.solve(Vec::Zero(n), bvec, hvec, xt, yt, zt);
    x = xt;
    s = -zt;
    kkt.solve(-c, Vec::Zero(p), Vec::Zero(m), xt, yt, zt);
    y = yt;
    z = zt;
    shift_interior(cones, s);
    shift_interior(cones, z);
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double bnorm = std::max(1.0, bvec.size() ? bvec.norm() : 0.0);
  const double hnorm = std::max(1.0, hvec.norm());
  const double cnorm = std::max(1.0, c.norm());

  auto blockwise = [&](auto&& fn) {
    for (std::size_t bi = 0; bi < cones.blocks.size(); ++bi) fn(bi, cones.blocks[bi]);
  };

  Vec lambda(m), ds(m), tmp(m), tmp2(m);
  Vec x1, y1, z1, x2, y2, z2;
  double best_merit = std::numeric_limits<double>::infinity();
  Vec best_x = x;

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    result.iterations = iter;
    const Vec gx = cones.mul_g(x);
    const Vec gtz = cones.mul_gt(z, n);
    const Vec aty = p ? Vec(amat.transpose() * y) : Vec::Zero(n);
    const Vec ax = p ? Vec(amat * x) : Vec::Zero(0);
    const Vec rx = aty + gtz + c * tau;
    const Vec ry = p ? Vec(ax - bvec * tau) : Vec::Zero(0);
    const Vec rz = s + gx - hvec * tau;
    const double cx = c.dot(x);
    const double by = p ? bvec.dot(y) : 0.0;
    const double hz = hvec.dot(z);
    const double rtau = kappa + cx + by + hz;
    const double sz = s.dot(z);
    const double mu = (sz + tau * kappa) / (cones.degree + 1);

    const double pres = std::max(p ? ry.norm() / bnorm : 0.0, rz.norm() / hnorm) / tau;
    const double dres = rx.norm() / cnorm / tau;
    const double pcost = cx / tau;
    const double dcost = -(hz + by) / tau;
    const double gap = sz / (tau * tau);
    const double relgap = gap / std::max(1.0, std::abs(pcost));
    result.gap = gap;
    result.primal_residual = pres;
    result.dual_residual = dres;

    if (opt.verbose) std::fprintf(stderr, "%d pres %.3e dres %.3e gap %.3e tau %.3e kappa %.3e pcost %.6e\n", iter, pres, dres, gap, tau, kappa, pcost);
    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) {
      result.status = SolveStatus::NumericalError;
      result.x = best_x;
      result.objective = program.objective.dot(result.x);
      return result;
    }
    const double merit = std::max({pres, dres, std::min(gap, relgap)});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x / tau;
    }
    if (pres < opt.feastol && dres < opt.feastol && (gap < opt.abstol || relgap < opt.reltol)) {
      result.status = SolveStatus::Optimal;
      result.x = x / tau;
      result.objective = program.objective.dot(result.x);
      (void)dcost;
      return result;
    }
    // Certificates of infeasibility.
    if (hz + by < 0) {
      const double resid = (aty + gtz).norm();
      if (resid <= opt.feastol * (-(hz + by)) && tau < kappa) {
        result.status = SolveStatus::Infeasible;
        result.x = best_x;
        return result;
      }
    }
    if (cx < 0) {
      const double resid = std::max(p ? ax.norm() : 0.0, (gx + s).norm());
      if (resid <= opt.feastol * (-cx) && tau < kappa) {
        result.status = SolveStatus::Unbounded;
        result.x = x / tau;
        return result;
      }
    }
    if (iter == opt.max_iter) break;

    // Scaling at the current point.
    blockwise([&](std::size_t bi, const Block& b) {
      scalings[bi] = nt_scaling(b, s.segment(b.offset, b.dim), z.segment(b.offset, b.dim));
      apply_w(b, scalings[bi], z.segment(b.offset, b.dim), lambda.segment(b.offset, b.dim));
    });
    kkt.factor(scalings);
    kkt.solve(-c, bvec, hvec, x1, y1, z1);
    const double denom_base = c.dot(x1) + (p ? bvec.dot(y1) : 0.0) + hvec.dot(z1) - kappa / tau;

    Vec dsa, dza;
    double dtau_a = 0.0, dkappa_a = 0.0;
    double sigma = 0.0;
    Vec dx, dy, dz, dsv;
    double dtau = 0.0, dkappa = 0.0;

    for (int pass = 0; pass < 2; ++pass) {
      const bool affine = pass == 0;
      const double keep = affine ? 1.0 : 1.0 - sigma;
      // ds = -lambda o lambda + sigma mu e - (W^-1 dsa) o (W dza)
      blockwise([&](std::size_t bi, const Block& b) {
        auto seg = ds.segment(b.offset, b.dim);
        jordan(b, lambda.segment(b.offset, b.dim), lambda.segment(b.offset, b.dim), seg);
        seg = -seg;
        if (!affine) {
          seg(0) += sigma * mu;
          Vec u(b.dim), v(b.dim), uv(b.dim);
          apply_winv(b, scalings[bi], dsa.segment(b.offset, b.dim), u);
          apply_w(b, scalings[bi], dza.segment(b.offset, b.dim), v);
          jordan(b, u, v, uv);
          seg -= uv;
        }
      });
      double dk = -tau * kappa;
      if (!affine) dk += sigma * mu - dtau_a * dkappa_a;

      // tmp = W (lambda \ ds)
      blockwise([&](std::size_t bi, const Block& b) {
        Vec q(b.dim);
        jordan_div(b, lambda.segment(b.offset, b.dim), ds.segment(b.offset, b.dim), q);
        apply_w(b, scalings[bi], q, tmp.segment(b.offset, b.dim));
      });
      kkt.solve(-keep * rx, p ? Vec(-keep * ry) : Vec::Zero(0), -keep * rz - tmp, x2, y2, z2);
      const double num = -keep * rtau - dk / tau - c.dot(x2) - (p ? bvec.dot(y2) : 0.0) - hvec.dot(z2);
      dtau = num / denom_base;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2 + dtau * z1;
      // ds = W (lambda \ ds - W dz)
      dsv.resize(m);
      blockwise([&](std::size_t bi, const Block& b) {
        Vec q(b.dim), wdz(b.dim);
        jordan_div(b, lambda.segment(b.offset, b.dim), ds.segment(b.offset, b.dim), q);
        apply_w(b, scalings[bi], dz.segment(b.offset, b.dim), wdz);
        apply_w(b, scalings[bi], q - wdz, dsv.segment(b.offset, b.dim));
      });
      dkappa = (dk - kappa * dtau) / tau;

      double alpha = affine ? 1.0 : 1.0 / 0.99;
      const double cap = alpha;
      blockwise([&](std::size_t, const Block& b) {
        alpha = std::min(alpha, max_step(b, s.segment(b.offset, b.dim), dsv.segment(b.offset, b.dim), cap));
        alpha = std::min(alpha, max_step(b, z.segment(b.offset, b.dim), dz.segment(b.offset, b.dim), cap));
      });
      if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
      if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);

      if (affine) {
        dsa = dsv;
        dza = dz;
        dtau_a = dtau;
        dkappa_a = dkappa;
        sigma = std::clamp(std::pow(1.0 - alpha, 3), 1e-6, 1.0);
      } else {
        const double step = std::min(1.0, 0.99 * alpha);
        if (!(step > 0)) {
          result.status = SolveStatus::NumericalError;
          result.x = best_x;
          result.objective = program.objective.dot(result.x);
          return result;
        }
        x += step * dx;
        y += step * dy;
        z += step * dz;
        s += step * dsv;
        tau += step * dtau;
        kappa += step * dkappa;
      }
    }
  }
  result.status = SolveStatus::MaxIter;
  result.x = best_x;
  result.objective = program.objective.dot(result.x);
  return result;
}

}  // namespace hyfi
