#include "dk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dk/errors.hpp"

namespace dk {
namespace {

constexpr double kPi = std::numbers::pi;

double inverse_or_zero(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

double parse_exponent(const std::string& token) {
  if (token == "inf" || token == "infinity") return kInfinity;
  return std::stod(token);
}

std::string format_exponent(double x) {
  if (std::isinf(x)) return "inf";
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace

void KernelSpec::validate(double tol) const {
  if (static_cast<int>(components.size()) != grid.dim())
    throw GridMismatch("kernel needs one component per axis");
  for (const auto& c : components) {
    require_same_grid(c.grid(), grid, "KernelSpec");
    if (c.conjugate_symmetry_defect() > tol)
      throw std::invalid_argument("kernel coefficients are not conjugate symmetric");
  }
  if (exponents && (exponents->p < 1.0 || exponents->pstar < 1.0))
    throw std::invalid_argument("declared kernel exponents must be >= 1");
}

bool KernelSpec::is_zero() const {
  for (const auto& c : components)
    for (const auto& z : c.coefficients())
      if (z != Complex(0.0)) return false;
  return true;
}

std::string LpsReport::summary() const {
  return std::string("A1 ") + (a1_pass ? "pass" : "fail") + ", A2 " + (a2_pass ? "pass" : "fail");
}

LpsReport check_lps(int d, double p, double pstar, double q, double qstar) {
  for (double e : {p, pstar, q, qstar})
    if (!(e >= 1.0)) throw std::invalid_argument("integrability exponents must be >= 1 or inf");
  LpsReport r;
  r.a1_lhs = d * inverse_or_zero(p) + 2.0 * inverse_or_zero(pstar);
  r.a1_pstar_in_range = pstar >= 2.0;
  r.a1_p_in_range = p > d;
  r.a1_pass = r.a1_lhs <= 1.0 && r.a1_pstar_in_range && r.a1_p_in_range;
  r.a2_lhs = d * inverse_or_zero(2.0 * q) + inverse_or_zero(qstar);
  r.a2_qstar_in_range = qstar >= 1.0;
  r.a2_q_in_range = q > d / 2.0;
  r.a2_pass = r.a2_lhs <= 1.0 && r.a2_qstar_in_range && r.a2_q_in_range;
  return r;
}

LpsReport check_lps(int d, const IntegrabilityClass& e) {
  return check_lps(d, e.p, e.pstar, e.q, e.qstar);
}

KernelSpec biot_savart(const GridSpec& grid, std::optional<int> truncation) {
  if (grid.dim() != 2) throw std::invalid_argument("Biot-Savart kernel requires d = 2");
  const int K = truncation.value_or(grid.dealias_cutoff());
  if (K < 1 || K > grid.n() / 2) throw std::invalid_argument("Biot-Savart truncation must be in [1, n/2]");

  KernelSpec v{grid, {SpectralField(grid), SpectralField(grid)}, IntegrabilityClass{1.5, kInfinity, kInfinity, kInfinity},
               "biot_savart"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    if (grid.is_nyquist(idx[0]) || grid.is_nyquist(idx[1])) continue;
    const auto k = grid.wavevector(i);
    if (k[0] == 0 && k[1] == 0) continue;
    if (std::max(std::abs(k[0]), std::abs(k[1])) > K) continue;
    const double k2 = static_cast<double>(k[0] * k[0] + k[1] * k[1]);
    const double scale = 1.0 / (2.0 * kPi * k2);
    // k^perp = (-k_2, k_1)
    v.components[0][i] = Complex(0.0, -k[1] * scale);
    v.components[1][i] = Complex(0.0, k[0] * scale);
  }
  return v;
}

KernelSpec sine_kernel(const GridSpec& grid, std::span<const int> wavevector,
                       std::span<const double> direction, double amplitude) {
  if (static_cast<int>(wavevector.size()) != grid.dim() || static_cast<int>(direction.size()) != grid.dim())
    throw std::invalid_argument("sine_kernel: wavevector and direction need d entries");
  std::array<int, 3> neg{0, 0, 0};
  bool zero = true;
  for (int a = 0; a < grid.dim(); ++a) {
    neg[a] = -wavevector[a];
    zero = zero && wavevector[a] == 0;
    if (std::abs(wavevector[a]) >= grid.n() / 2)
      throw std::invalid_argument("sine_kernel wavevector outside the resolved band");
  }
  if (zero) throw std::invalid_argument("sine_kernel needs a nonzero wavevector");

  KernelSpec v = zero_kernel(grid);
  v.label = "sine";
  // sin(t) = (e^{it} - e^{-it}) / 2i
  for (int a = 0; a < grid.dim(); ++a) {
    const double amp = amplitude * direction[a];
    v.components[a].at(wavevector) = Complex(0.0, -0.5 * amp);
    v.components[a].at(std::span<const int>(neg.data(), grid.dim())) = Complex(0.0, 0.5 * amp);
  }
  v.exponents = IntegrabilityClass{};
  return v;
}

KernelSpec zero_kernel(const GridSpec& grid) {
  return KernelSpec{grid, std::vector<SpectralField>(grid.dim(), SpectralField(grid)), IntegrabilityClass{}, "zero"};
}

double mollifier_multiplier(std::span<const int> wavevector, double gamma) {
  double k2 = 0.0;
  for (int k : wavevector) k2 += static_cast<double>(k) * k;
  return std::exp(-gamma * gamma * 4.0 * kPi * kPi * k2 / 2.0);
}

KernelSpec mollify(const KernelSpec& v, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mollification scale must be positive");
  KernelSpec out = v;
  const auto& grid = v.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = grid.wavevector(i);
    const double m = mollifier_multiplier(std::span<const int>(k.data(), grid.dim()), gamma);
    for (auto& c : out.components) c[i] *= m;
  }
  out.label = v.label + "_mollified";
  return out;
}

VectorField apply(const KernelSpec& v, const RealField& rho) {
  require_same_grid(v.grid, rho.grid(), "apply");
  return convolve(v.components, rho);
}

SpectralField divergence_of(const KernelSpec& v) {
  return spectral_divergence(v.components);
}

VectorField physical(const KernelSpec& v) {
  std::vector<RealField> comps;
  for (const auto& c : v.components) comps.push_back(inverse(c));
  return VectorField(std::move(comps));
}

std::vector<double> evaluate_at(const KernelSpec& v, std::span<const double> x) {
  const auto& grid = v.grid;
  std::vector<double> out(grid.dim(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = grid.wavevector(i);
    double phase = 0.0;
    for (int a = 0; a < grid.dim(); ++a) phase += k[a] * x[a];
    const Complex e = std::polar(1.0, 2.0 * kPi * phase);
    for (int a = 0; a < grid.dim(); ++a) {
      const Complex c = v.components[a][i];
      if (c != Complex(0.0)) out[a] += (c * e).real();
    }
  }
  return out;
}

// ---------------------------------------------------------- KernelSchedule

KernelSchedule::KernelSchedule(KernelSpec constant) {
  entries_.emplace_back(-kInfinity, std::move(constant));
}

KernelSchedule::KernelSchedule(std::vector<std::pair<double, KernelSpec>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("kernel schedule needs at least one entry");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i].first > entries_[i - 1].first))
      throw std::invalid_argument("kernel schedule times must be strictly increasing");
    require_same_grid(entries_[i].second.grid, entries_[0].second.grid, "KernelSchedule");
  }
}

const KernelSpec& KernelSchedule::at(double t) const {
  if (entries_.empty()) throw std::logic_error("empty kernel schedule");
  auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                             [](double time, const auto& e) { return time < e.first; });
  if (it == entries_.begin()) return entries_.front().second;
  return std::prev(it)->second;
}

KernelSchedule KernelSchedule::mollified(double gamma) const {
  KernelSchedule out;
  for (const auto& [t, v] : entries_) out.entries_.emplace_back(t, mollify(v, gamma));
  return out;
}

// ------------------------------------------------------------- text table

void write_kernel_table(std::ostream& out, const KernelSpec& v) {
  const auto& grid = v.grid;
  out << "# dk kernel table d=" << grid.dim() << " n=" << grid.n() << " label=" << v.label << '\n';
  if (v.exponents) {
    out << "# exponents " << format_exponent(v.exponents->p) << ' ' << format_exponent(v.exponents->pstar) << ' '
        << format_exponent(v.exponents->q) << ' ' << format_exponent(v.exponents->qstar) << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool nonzero = false;
    for (const auto& c : v.components) nonzero = nonzero || c[i] != Complex(0.0);
    if (!nonzero) continue;
    const auto k = grid.wavevector(i);
    for (int a = 0; a < grid.dim(); ++a) out << k[a] << ' ';
    for (int a = 0; a < grid.dim(); ++a) {
      out << v.components[a][i].real() << ' ' << v.components[a][i].imag();
      out << (a + 1 < grid.dim() ? ' ' : '\n');
    }
  }
}

KernelSpec read_kernel_table(std::istream& in, const GridSpec& grid) {
  KernelSpec v = zero_kernel(grid);
  v.exponents.reset();
  v.label = "table";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream s(line);
    if (line[first] == '#') {
      std::string hash, word;
      s >> hash >> word;
      if (word == "exponents") {
        std::string p, ps, q, qs;
        if (!(s >> p >> ps >> q >> qs)) throw std::runtime_error("malformed exponents line in kernel table");
        v.exponents = IntegrabilityClass{parse_exponent(p), parse_exponent(ps), parse_exponent(q), parse_exponent(qs)};
      }
      continue;
    }
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < grid.dim(); ++a)
      if (!(s >> k[a])) throw std::runtime_error("kernel table line " + std::to_string(line_no) + ": bad wavevector");
    for (int a = 0; a < grid.dim(); ++a) {
      double re = 0.0, im = 0.0;
      if (!(s >> re >> im))
        throw std::runtime_error("kernel table line " + std::to_string(line_no) + ": bad coefficient");
      try {
        v.components[a].at(std::span<const int>(k.data(), grid.dim())) = Complex(re, im);
      } catch (const std::out_of_range&) {
        throw std::runtime_error("kernel table line " + std::to_string(line_no) + ": wavevector outside grid");
      }
    }
  }
  v.validate(1e-12);
  return v;
}

}  // namespace dk
