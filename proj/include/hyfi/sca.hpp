#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyfi/socp.hpp"
#include "hyfi/system.hpp"

namespace hyfi {

// ---------------------------------------------------------------------------
// Real embedding. A complex M x K precoder becomes a 2M x K real matrix
// [Re F; Im F]; LiFi precoders are already real.
// ---------------------------------------------------------------------------
Eigen::MatrixXd embed(const Eigen::MatrixXcd& f);
Eigen::MatrixXcd unembed(const Eigen::MatrixXd& v);

/// Real matrix B with B * embed(f) = (Re, Im) of g^H f (2 x 2M).
Eigen::MatrixXd link_matrix(const Eigen::VectorXcd& g);
/// Real matrix B with B * f = g^T f (1 x L).
Eigen::MatrixXd link_matrix(const Eigen::VectorXd& g);

/// Convex surrogates of one user's link on one technology, expanded at the
/// iterate V^t. Quantities are in noise units. LiFi uses the scaled forms
/// X' = e X and Y' = 2 pi Y so both technologies share one algebra:
///   S = ln(1 + X'/Y'),  D = 1 - (Y' / (X' + Y'))^2.
class LinkSurrogate {
 public:
  LinkSurrogate() = default;
  /// `link`: d x n matrix mapping a precoder column to the received amplitude
  /// (already divided by the noise standard deviation). `v_t`: n x K iterate.
  LinkSurrogate(Tech tech, Eigen::MatrixXd link, int user, const Eigen::MatrixXd& v_t);

  Tech tech() const { return tech_; }
  int user() const { return user_; }
  /// False when the channel is identically zero or the expansion point carries
  /// no signal; such links contribute nothing and get no surrogate terms.
  bool active() const { return active_; }
  const Eigen::MatrixXd& link() const { return link_; }
  /// d x K received amplitudes at the expansion point.
  const Eigen::MatrixXd& amplitudes() const { return a_t_; }

  double kappa_x() const;
  double kappa_y() const;
  double x_t() const { return x_t_; }
  double y_t() const { return y_t_; }
  double a_t() const { return x_t_ + y_t_; }
  double gamma_t() const { return x_t_ / y_t_; }  // effective SINR
  double shannon_t() const;
  double dispersion_t() const;
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// Dispersion bound coefficients on tau', (X'+Y') and Y'^2.
  double c1() const { return 4.0 * y_t_ / (a_t() * a_t()); }
  double c2() const { return 2.0 * y_t_ * y_t_ / (a_t() * a_t() * a_t()); }
  double c3() const { return 1.0 / (a_t() * a_t()); }

  // Exact quantities at an arbitrary iterate V (n x K).
  double signal(const Eigen::MatrixXd& v) const;        // X'
  double interference(const Eigen::MatrixXd& v) const;  // Y' (noise included)
  double shannon(const Eigen::MatrixXd& v) const;
  double sqrt_dispersion(const Eigen::MatrixXd& v) const;

  /// Affine minorant tau' of Y', tight at V^t.
  double interference_minorant(const Eigen::MatrixXd& v) const;
  /// Concave lower bound of S, tight at V^t.
  double shannon_bound(const Eigen::MatrixXd& v) const;
  /// Convex upper bound of sqrt(D), tight at V^t; valid inside the trust region.
  double dispersion_bound(const Eigen::MatrixXd& v) const;
  /// Gradients with respect to V (n x K).
  Eigen::MatrixXd shannon_bound_gradient(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd dispersion_bound_gradient(const Eigen::MatrixXd& v) const;

  /// Surrogate rate in nats/s: omega BW (S_bar - chi sqrt(df) sqrtD_bar) for
  /// finite-blocklength slices, omega BW S_bar otherwise.
  double rate_bound(const Eigen::MatrixXd& v, const SliceParams& slice, double bandwidth_hz) const;

 private:
  Tech tech_ = Tech::WiFi;
  Eigen::MatrixXd link_;
  int user_ = 0;
  bool active_ = false;
  Eigen::MatrixXd a_t_;
  double x_t_ = 0.0;
  double y_t_ = 1.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

/// Slack of each trust-region condition at V (all >= 0 means inside).
struct TrustRegionStatus {
  double positivity = 0.0;   // 2 Re{a_t^* a} - |a|^2 - delta_pos
  double sum_bound = 0.0;    // 2 (X'^t + Y'^t) - (X' + Y')
  double minorant_bound = 0.0;  // 2 (A / Y'^t) tau' - (X' + Y')
  bool inside() const { return positivity >= 0 && sum_bound >= 0 && minorant_bound >= 0; }
};

/// Evaluates the trust-region conditions. `fbl` selects whether the two
/// dispersion conditions apply (they are reported as +inf otherwise).
TrustRegionStatus trust_region_status(const LinkSurrogate& link, const Eigen::MatrixXd& v, bool fbl,
                                      double delta_pos);

/// phi_t psi_t + psi_t (phi - phi_t) + phi_t (psi - psi_t).
double bilinear_linearization(double phi_t, double psi_t, double phi, double psi);

struct PrecodingState {
  Eigen::MatrixXcd wifi;  // M x K
  Eigen::MatrixXd lifi;   // L x K
  double phi = 0.0;       // EE at the iterate, nats/J
  double psi = 0.0;       // total power at the iterate, W
  int iteration = 0;
};

/// Per-user link surrogates of both technologies at one iterate.
struct ExpansionPoint {
  Eigen::MatrixXd wifi_v;  // embedded WiFi iterate, 2M x K
  Eigen::MatrixXd lifi_v;  // L x K
  std::vector<LinkSurrogate> wifi;
  std::vector<LinkSurrogate> lifi;  // empty for WiFi-only systems
};

ExpansionPoint make_expansion(const SystemModel& model, const PrecodingState& state);

struct ScaOptions {
  double rel_tol = 1e-4;
  int max_iters = 50;
  double delta_pos = 1e-8;     // positivity margin, noise units
  double wifi_power_share = 0.5;  // share of P_max for the WiFi part of the initial point
  int init_max_iters = 30;
  std::uint64_t init_seed = 1;
  bool power_backoff = true;
  SolveOptions solver;
};

/// The convex subproblem of one outer iteration and how to read its solution.
struct Subproblem {
  ConvexProgram program;
  double wifi_scale = 0.0;  // embedded WiFi precoder = wifi_scale * v
  double lifi_scale = 0.0;
  int wifi_offset = -1;     // -1 when the technology is switched off
  int lifi_offset = -1;
  int phi_index = 0;
  int psi_index = 0;
  double phi_scale = 1.0;   // phi = phi_scale * x[phi_index]
  double psi_scale = 1.0;
  int base_variable_count = 0;  // precoder reals + phi + psi
  int num_users = 0;
  int num_antennas = 0;
  int num_leds = 0;

  PrecodingState decode(const Eigen::VectorXd& x) const;
};

/// Builds the convex subproblem around `state`. Variables are scaled per
/// technology so the iterate has unit RMS column norm; phi and psi are
/// normalized by their expansion values.
Subproblem assemble_subproblem(const SystemModel& model, const PrecodingState& state,
                               const ExpansionPoint& expansion, const ScaOptions& options);

/// Max-min Shannon-surrogate iteration per technology from a random feasible
/// start (WiFi budget share * P_max, LiFi the rest, LED bound enforced).
PrecodingState initial_point(const SystemModel& model, const ScaOptions& options);

/// Scales the WiFi and LiFi parts of `state` by independent factors in [0, 1]
/// to maximize the true EE subject to the true rate floors.
PrecodingState power_backoff(const SystemModel& model, const PrecodingState& state);

struct TraceRow {
  int iter = 0;
  double phi = 0.0;
  double psi = 0.0;
  double sum_rate = 0.0;
  double p_wifi = 0.0;
  double p_lifi = 0.0;
  std::string status;
  double wall_ms = 0.0;
};

struct ScaResult {
  PrecodingState state;
  std::vector<TraceRow> trace;
  bool converged = false;
  int plateau_iteration = -1;  // first iteration whose relative gain fell below rel_tol
  std::string diagnostic;
};

ScaResult optimize_ee(const SystemModel& model, const ScaOptions& options = {});
/// Runs the outer loop from a given feasible starting state.
ScaResult optimize_from(const SystemModel& model, PrecodingState start, const ScaOptions& options = {});

/// Header iter,phi,psi,sum_rate_nats,p_wifi_w,p_lifi_w,solver_status[,wall_ms].
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, bool include_timing);

}  // namespace hyfi
