#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dk/grid.hpp"
#include "dk/kernels.hpp"
#include "dk/solver.hpp"

namespace dk {

/// Values of rho below -kEntropyNegativeTolerance make entropy() throw;
/// smaller undershoots are treated as 0.
inline constexpr double kEntropyNegativeTolerance = 1e-10;

/// Psi(xi) = xi log xi - xi with Psi(0) = 0.
double psi_entropy(double xi);

/// int Psi(rho).  Throws std::domain_error when min rho < -1e-10.
double entropy(const RealField& rho);
/// int rho log rho, same domain rules as entropy().
double rho_log_rho(const RealField& rho);
/// int |grad sqrt(max(rho, 0))|^2 with a spectral gradient.
double dissipation(const RealField& rho);
/// int |grad rho|^2 with a spectral gradient.
double gradient_energy(const RealField& rho);

/// (int |rho|^m)^(1/m) for each m.
std::map<double, double> lm_norms(const RealField& rho, std::span<const double> ms);
double l1_distance(const RealField& a, const RealField& b);

struct L1Series {
  std::vector<double> times;
  std::vector<double> values;
  double sup() const;
};

/// L1 distance at every common snapshot time; throws GridMismatch when the
/// snapshot times differ.
L1Series l1_series(const TrajectoryRecord& a, const TrajectoryRecord& b);

/// int int |chi_1 - chi_2|^2 dxi dx with chi_i = 1{0 < xi < rho_i}, the xi
/// axis cut into `bins` equal bins on (0, xi_max] and chi sampled at bin
/// centres.  xi_max defaults to the larger maximum of the two fields.
/// Differs from the L1 distance by at most one bin width per point.
double kinetic_distance(const RealField& rho1, const RealField& rho2, int bins,
                        std::optional<double> xi_max = std::nullopt);

/// Histogram in xi of the measure delta(xi - rho) |grad rho|^2 dx dt.
///
/// Bin 0 collects xi <= 2^-(levels+1), negative values included.  Bins
/// 1..levels+1 are (2^-(m+1), 2^-m] for m = levels..0, so every window
/// (beta/2, beta] with beta = 2^-m is one bin.  Above 1 the bins are
/// (M, M+1] and are added as values arrive.
class KineticHistogram {
 public:
  explicit KineticHistogram(int levels = 10);

  /// Adds |grad rho|^2 * dt * h^d at every grid point into the bin of rho(x).
  void add(const RealField& rho, double dt);
  void merge(const KineticHistogram& other);

  int levels() const { return levels_; }
  std::size_t bin_count() const { return weights_.size(); }
  /// Half-open bin (lo, hi]; the first bin has lo = -inf.
  double lo(std::size_t b) const;
  double hi(std::size_t b) const;
  double weight(std::size_t b) const { return weights_[b]; }
  std::size_t bin_of(double xi) const;
  double total() const;

  /// q(T^d x [s,T] x [M, M+1]) for an integer M >= 1.
  double mass_near_infinity(int M) const;
  /// beta^-1 q(T^d x [s,T] x [beta/2, beta]) for beta = 2^-m, 0 <= m <= levels.
  double scaled_mass_near_zero(int m) const;

 private:
  void grow_to(std::size_t bins);

  int levels_;
  std::vector<double> weights_;
};

struct KineticTails {
  std::vector<int> M;
  std::vector<double> infinity_mass;  // q([M, M+1])
  std::vector<double> beta;
  std::vector<double> zero_mass;  // beta^-1 q([beta/2, beta])
};

/// Sums over consecutive snapshots with left-point weights t_{i+1} - t_i;
/// the final snapshot closes the last interval.
KineticHistogram accumulate_kinetic_measure(const TrajectoryRecord& traj, int levels = 10);
/// sum_i (t_{i+1} - t_i) int |grad rho_i|^2 over the same snapshots.
double kinetic_total_reference(const TrajectoryRecord& traj);
/// M = 1 .. max_M and beta = 2^-m, m = 0 .. levels.
KineticTails kinetic_tails(const KineticHistogram& h, int max_M);

struct EntropyReport {
  std::vector<double> times;
  std::vector<double> entropy;      // int Psi(rho)
  std::vector<double> rho_log_rho;  // int rho log rho = int Psi(rho) + mass
  std::vector<double> dissipation;  // int |grad sqrt rho|^2
  std::vector<double> running_sup_entropy;
  std::vector<double> dissipation_integral;  // left-point integral up to each time

  /// sup_t int Psi(rho) + int int |grad sqrt rho|^2 over the run.
  double budget() const;
  bool finite() const;
};

EntropyReport entropy_report(const TrajectoryRecord& traj);

struct GnReport {
  double lhs = 0.0;        // ||grad^j f||_p
  double grad_norm = 0.0;  // ||grad^m f||_r
  double f_norm = 0.0;     // ||f||_q
  double rhs = 0.0;        // grad_norm^alpha f_norm^(1 - alpha)
  /// lhs / rhs; 0 when lhs = 0, infinity when only rhs vanishes.
  double ratio = 0.0;
};

/// Pointwise |grad^j f| (Euclidean / Frobenius norm) for j = 0, 1, 2.
RealField derivative_magnitude(const RealField& f, int j);

/// Both sides of ||grad^j f||_p <= C ||grad^m f||_r^alpha ||f||_q^(1-alpha).
/// Throws std::invalid_argument unless
/// 1/p = j/d + (1/r - m/d) alpha + (1 - alpha)/q within 1e-12 and
/// j/m <= alpha <= 1; j, m in {0, 1, 2}.
GnReport gn_audit(const RealField& f, int j, int m, double p, double q, double r, double alpha);

struct ConvolutionAudit {
  // ||grad f . V * g||_1 against ||grad sqrt f||_2^(d/p+1) ||f||_1^(1/2-d/(2p)) ||V||_p ||g||_1
  double transport_lhs = 0.0;
  double transport_rhs = 0.0;
  double transport_constant = 0.0;
  // ||f (div V) * g||_1 against ||grad sqrt f||_2^(d/q) ||f||_1^(1-d/(2q)) ||div V||_q ||g||_1
  double divergence_lhs = 0.0;
  double divergence_rhs = 0.0;
  double divergence_constant = 0.0;
};

/// Time-frozen kernel-term estimates for nonnegative f, g.  Constants are
/// lhs / rhs, 0 when both vanish.
ConvolutionAudit convolution_estimate_audit(const RealField& f, const RealField& g, const KernelSpec& v,
                                            double p, double q);

}  // namespace dk
