#ifndef EPAC_SPECTRAL_HPP
#define EPAC_SPECTRAL_HPP

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "epac/errors.hpp"
#include "epac/model.hpp"
#include "epac/series.hpp"

namespace epac::spectral {

/// Uniform spatial grid for the one-dimensional eigenproblem.
struct GridSpec {
  double q_lo = -10.0;
  double q_hi = 10.0;
  int n_points = 2001;

  double spacing() const { return (q_hi - q_lo) / static_cast<double>(n_points - 1); }

  std::vector<double> points() const {
    std::vector<double> q(static_cast<std::size_t>(n_points));
    const double h = spacing();
    for (int i = 0; i < n_points; ++i) q[static_cast<std::size_t>(i)] = q_lo + h * i;
    q.back() = q_hi;
    return q;
  }

  void validate() const {
    if (!(q_lo < q_hi)) throw DomainError("grid: q_lo must be below q_hi");
    if (n_points < 3) throw DomainError("grid: need at least 3 points");
  }
};

/// Dense real matrix, row-major. Used for eigenbasis operator elements.
class RealMatrix {
 public:
  RealMatrix() = default;
  explicit RealMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

  int size() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

/// Lowest eigenpairs of a gridded 1D Hamiltonian. Eigenvectors are sampled on
/// the grid and normalized under trapezoidal quadrature.
struct Spectrum {
  std::vector<double> energies;             // ascending
  std::vector<std::vector<double>> states;  // states[n][i]
  GridSpec grid;
  double mass = 1.0;
  double hbar = 1.0;

  int n_states() const { return static_cast<int>(energies.size()); }
};

struct SolveOptions {
  double leak_threshold = 1e-8;  // max |psi| allowed at either grid edge
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Symmetric pentadiagonal Hamiltonian from the 5-point Laplacian stencil.
struct Bands {
  std::vector<double> diag, off1, off2;  // off1[i] = H(i,i+1), off2[i] = H(i,i+2)
};

inline Bands build_hamiltonian(const PolynomialPotential& p, const GridSpec& g) {
  const double h = g.spacing();
  const double t = p.hbar * p.hbar / (2.0 * p.mass);
  const int n = g.n_points;
  Bands b;
  b.diag.resize(static_cast<std::size_t>(n));
  b.off1.assign(static_cast<std::size_t>(n - 1), -t * 4.0 / (3.0 * h * h));
  b.off2.assign(static_cast<std::size_t>(n - 2), t / (12.0 * h * h));
  const auto q = g.points();
  for (int i = 0; i < n; ++i) b.diag[static_cast<std::size_t>(i)] = t * 2.5 / (h * h) + p(q[static_cast<std::size_t>(i)]);
  return b;
}

inline void band_apply(const Bands& b, const std::vector<double>& x, std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double v = b.diag[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    if (i >= 1) v += b.off1[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(i - 1)];
    if (i + 1 < n) v += b.off1[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 1)];
    if (i >= 2) v += b.off2[static_cast<std::size_t>(i - 2)] * x[static_cast<std::size_t>(i - 2)];
    if (i + 2 < n) v += b.off2[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 2)];
    y[static_cast<std::size_t>(i)] = v;
  }
}

inline std::vector<double> band_eigenvalues(const Bands& b, int n_states) {
  const int n = static_cast<int>(b.diag.size());
  const int kd = 2;
  std::vector<double> ab(static_cast<std::size_t>(kd + 1) * n, 0.0);
  // column-major lower band storage: ab[j*(kd+1) + (i-j)] = H(i,j)
  for (int j = 0; j < n; ++j) {
    ab[static_cast<std::size_t>(j) * (kd + 1)] = b.diag[static_cast<std::size_t>(j)];
    if (j + 1 < n) ab[static_cast<std::size_t>(j) * (kd + 1) + 1] = b.off1[static_cast<std::size_t>(j)];
    if (j + 2 < n) ab[static_cast<std::size_t>(j) * (kd + 1) + 2] = b.off2[static_cast<std::size_t>(j)];
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  lapack_int m = 0;
  double qdummy = 0.0, zdummy = 0.0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, kd, ab.data(), kd + 1,
                                         &qdummy, 1, 0.0, 0.0, 1, n_states, abstol, &m, w.data(),
                                         &zdummy, 1, ifail.data());
  if (info != 0 || m != n_states)
    throw ConvergenceError("eigenvalue solve failed (dsbevx info=" + std::to_string(info) + ")");
  w.resize(static_cast<std::size_t>(n_states));
  return w;
}

/// Inverse iteration on the banded Hamiltonian for one eigenvalue.
inline std::vector<double> band_eigenvector(const Bands& b, double energy, double scale,
                                            const std::vector<std::vector<double>>& prev,
                                            bool orthogonalize, std::uint64_t seed) {
  const int n = static_cast<int>(b.diag.size());
  const int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;

  std::vector<double> v(static_cast<std::size_t>(n));
  std::uint64_t s = seed;
  for (auto& x : v) x = (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53) - 0.5;

  std::vector<double> ab;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  double shift = energy;
  for (int attempt = 0; attempt < 4; ++attempt) {
    ab.assign(static_cast<std::size_t>(ldab) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      auto at = [&](int i) -> double& { return ab[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)]; };
      at(j) = b.diag[static_cast<std::size_t>(j)] - shift;
      if (j >= 1) at(j - 1) = b.off1[static_cast<std::size_t>(j - 1)];
      if (j + 1 < n) at(j + 1) = b.off1[static_cast<std::size_t>(j)];
      if (j >= 2) at(j - 2) = b.off2[static_cast<std::size_t>(j - 2)];
      if (j + 2 < n) at(j + 2) = b.off2[static_cast<std::size_t>(j)];
    }
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, ipiv.data());
    if (info == 0) break;
    if (attempt == 3) throw ConvergenceError("banded factorization failed near E=" + std::to_string(energy));
    shift += (attempt + 1) * 1e-12 * scale;
  }

  std::vector<double> hy(static_cast<std::size_t>(n));
  const double tol = 1e-11 * scale;
  for (int iter = 0; iter < 12; ++iter) {
    const lapack_int info =
        LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab, ipiv.data(), v.data(), n);
    if (info != 0) throw ConvergenceError("banded solve failed in inverse iteration");
    if (orthogonalize && !prev.empty()) {
      const auto& u = prev.back();
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= dot * u[static_cast<std::size_t>(i)];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw ConvergenceError("inverse iteration collapsed to zero vector");
    for (auto& x : v) x /= norm;

    band_apply(b, v, hy);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = hy[static_cast<std::size_t>(i)] - energy * v[static_cast<std::size_t>(i)];
      res += r * r;
    }
    if (std::sqrt(res) <= tol) return v;
  }
  throw ConvergenceError("inverse iteration did not converge near E=" + std::to_string(energy));
}

}  // namespace detail

/// Diagonalize H = -(hbar^2/2m) d^2/dq^2 + V(q) on the grid and return the
/// lowest n_states eigenpairs. Eigenvectors are trapezoid-normalized and
/// sign-fixed so the largest-magnitude sample is positive. Throws
/// BoundaryLeakError if a retained state does not decay at the grid edges.
inline Spectrum solve_eigen(const PolynomialPotential& p, const GridSpec& g, int n_states,
                            const SolveOptions& opts = {}) {
  g.validate();
  if (n_states < 1) throw DomainError("solve_eigen: n_states must be positive");
  if (n_states > g.n_points / 10)
    throw DomainError("solve_eigen: n_states must not exceed n_points/10");

  const auto bands = detail::build_hamiltonian(p, g);
  auto energies = detail::band_eigenvalues(bands, n_states);
  for (int k = 0; k + 1 < n_states; ++k)
    if (!(energies[static_cast<std::size_t>(k)] < energies[static_cast<std::size_t>(k + 1)]))
      throw ConvergenceError("eigenvalues are not strictly increasing");

  double scale = 0.0;
  for (double d : bands.diag) scale = std::max(scale, std::abs(d));
  const double span = energies.back() - energies.front() + 1.0;

  Spectrum s;
  s.energies = energies;
  s.grid = g;
  s.mass = p.mass;
  s.hbar = p.hbar;
  s.states.reserve(static_cast<std::size_t>(n_states));

  const double h = g.spacing();
  for (int k = 0; k < n_states; ++k) {
    const bool near_prev = k > 0 && energies[static_cast<std::size_t>(k)] - energies[static_cast<std::size_t>(k - 1)] < 1e-8 * span;
    auto v = detail::band_eigenvector(bands, energies[static_cast<std::size_t>(k)], scale, s.states, near_prev,
                                      0x5eedULL + 0x9e37ULL * static_cast<std::uint64_t>(k));
    // trapezoid normalization (l2 norm minus half the endpoint samples)
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm -= 0.5 * (v.front() * v.front() + v.back() * v.back());
    nrm = std::sqrt(nrm * h);
    int imax = 0;
    for (int i = 0; i < g.n_points; ++i)
      if (std::abs(v[static_cast<std::size_t>(i)]) > std::abs(v[static_cast<std::size_t>(imax)])) imax = i;
    const double sign = v[static_cast<std::size_t>(imax)] < 0.0 ? -1.0 : 1.0;
    for (auto& x : v) x *= sign / nrm;
    s.states.push_back(std::move(v));
  }

  double leak = 0.0;
  for (const auto& v : s.states) leak = std::max({leak, std::abs(v.front()), std::abs(v.back())});
  if (leak > opts.leak_threshold)
    throw BoundaryLeakError("eigenstate leaks at grid boundary (|psi_edge|=" + std::to_string(leak) +
                            "); enlarge the grid");
  return s;
}

/// Throws unless exp(-beta (E_max - E_0)) < 1e-12, i.e. the retained spectrum
/// resolves the thermal tail at this temperature.
inline void require_truncation(const Spectrum& s, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double drop = beta * (s.energies.back() - s.energies.front());
  if (!(std::exp(-drop) < 1e-12))
    throw TruncationError("spectral truncation inadequate at beta=" + std::to_string(beta) +
                          "; request more states");
}

namespace detail {

/// Energies relative to the ground state.
inline std::vector<double> shifted_energies(const Spectrum& s) {
  std::vector<double> e(s.energies.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = s.energies[i] - s.energies.front();
  return e;
}

/// Index one past the last state whose Boltzmann weight exceeds exp(-cut).
inline int weight_cutoff(const std::vector<double>& eshift, double beta, double cut) {
  int m = static_cast<int>(eshift.size());
  while (m > 1 && beta * eshift[static_cast<std::size_t>(m - 1)] > cut) --m;
  return m;
}

}  // namespace detail

/// Z = sum_n exp(-beta E_n). Requires an adequate truncation.
inline double partition_function(const Spectrum& s, double beta) {
  require_truncation(s, beta);
  double z = 0.0;
  for (double e : s.energies) z += std::exp(-beta * e);
  return z;
}

/// log Z, evaluated stably for large beta E_0.
inline double log_partition(const Spectrum& s, double beta) {
  require_truncation(s, beta);
  double acc = 0.0;
  for (double e : s.energies) acc += std::exp(-beta * (e - s.energies.front()));
  return -beta * s.energies.front() + std::log(acc);
}

/// Matrix of <n| q^power |m> under trapezoidal quadrature on the grid.
inline RealMatrix matrix_elements(const Spectrum& s, int power) {
  if (power < 1) throw DomainError("matrix_elements: power must be >= 1");
  const int ns = s.n_states();
  const int np = s.grid.n_points;
  const double h = s.grid.spacing();
  const auto q = s.grid.points();

  // fold the quadrature weights into the states once
  std::vector<std::vector<double>> wpsi(static_cast<std::size_t>(ns));
  for (int n = 0; n < ns; ++n) {
    auto& w = wpsi[static_cast<std::size_t>(n)];
    w = s.states[static_cast<std::size_t>(n)];
    for (auto& x : w) x *= std::sqrt(h);
    w.front() /= std::sqrt(2.0);
    w.back() /= std::sqrt(2.0);
  }
  std::vector<double> qp(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) qp[static_cast<std::size_t>(i)] = std::pow(q[static_cast<std::size_t>(i)], power);

  RealMatrix m(ns);
  for (int a = 0; a < ns; ++a) {
    for (int b = a; b < ns; ++b) {
      double acc = 0.0;
      const auto& u = wpsi[static_cast<std::size_t>(a)];
      const auto& v = wpsi[static_cast<std::size_t>(b)];
      for (int i = 0; i < np; ++i)
        acc += u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)] * qp[static_cast<std::size_t>(i)];
      m(a, b) = acc;
      m(b, a) = acc;
    }
  }
  return m;
}

/// Thermal expectation <q^power> at inverse temperature beta.
inline double thermal_average(const Spectrum& s, int power, double beta) {
  require_truncation(s, beta);
  const auto m = matrix_elements(s, power);
  const auto es = detail::shifted_energies(s);
  double z = 0.0, acc = 0.0;
  for (int j = 0; j < s.n_states(); ++j) {
    const double w = std::exp(-beta * es[static_cast<std::size_t>(j)]);
    z += w;
    acc += w * m(j, j);
  }
  return acc / z;
}

/// <q^n(t) q^n(0)> via the eigenbasis double sum.
inline CorrelationSeries exact_corr(const Spectrum& s, int n, double beta,
                                    const std::vector<double>& times) {
  require_truncation(s, beta);
  const auto m = matrix_elements(s, n);
  const auto es = detail::shifted_energies(s);
  const int ns = s.n_states();
  const int jmax = detail::weight_cutoff(es, beta, 37.0);

  struct Term {
    double amp, freq;
  };
  std::vector<Term> terms;
  double z = 0.0;
  for (int j = 0; j < ns; ++j) z += std::exp(-beta * es[static_cast<std::size_t>(j)]);
  for (int j = 0; j < jmax; ++j) {
    const double wj = std::exp(-beta * es[static_cast<std::size_t>(j)]) / z;
    for (int k = 0; k < ns; ++k) {
      const double a = wj * m(j, k) * m(j, k);
      if (a != 0.0)
        terms.push_back({a, (es[static_cast<std::size_t>(j)] - es[static_cast<std::size_t>(k)]) / s.hbar});
    }
  }

  CorrelationSeries out;
  out.times = times;
  out.values.resize(times.size());
  out.method = "exact";
  out.beta = beta;
  out.order = n;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    double re = 0.0, im = 0.0;
    for (const auto& tm : terms) {
      re += tm.amp * std::cos(tm.freq * t);
      im += tm.amp * std::sin(tm.freq * t);
    }
    out.values[it] = {re, im};
  }
  return out;
}

/// <T q^n(tau) q^n(0)> for tau in [0, beta hbar]; real valued.
inline CorrelationSeries exact_imag_corr(const Spectrum& s, int n, double beta,
                                         const std::vector<double>& taus) {
  require_truncation(s, beta);
  const double bh = beta * s.hbar;
  for (double tau : taus)
    if (tau < 0.0 || tau > bh * (1.0 + 1e-12))
      throw DomainError("exact_imag_corr: tau outside [0, beta hbar]");

  const auto m = matrix_elements(s, n);
  const auto es = detail::shifted_energies(s);
  const int ns = s.n_states();
  const int jmax = detail::weight_cutoff(es, beta, 37.0);
  double z = 0.0;
  for (int j = 0; j < ns; ++j) z += std::exp(-beta * es[static_cast<std::size_t>(j)]);

  CorrelationSeries out;
  out.times = taus;
  out.values.resize(taus.size());
  out.method = "exact-imag";
  out.beta = beta;
  out.order = n;
  for (std::size_t it = 0; it < taus.size(); ++it) {
    const double tau = std::min(taus[it], bh);
    double acc = 0.0;
    for (int j = 0; j < jmax; ++j) {
      for (int k = 0; k < ns; ++k) {
        const double mm = m(j, k) * m(j, k);
        if (mm == 0.0) continue;
        // exp(-(beta - tau/hbar) Ej - (tau/hbar) Ek), both exponents <= 0
        acc += mm * std::exp(-(beta - tau / s.hbar) * es[static_cast<std::size_t>(j)] -
                             (tau / s.hbar) * es[static_cast<std::size_t>(k)]);
      }
    }
    out.values[it] = acc / z;
  }
  return out;
}

/// Kubo-transformed correlator (1/beta) int_0^beta d lambda
/// <q^n(t - i hbar lambda) q^n(0)>, with the lambda integral done per matrix
/// element in closed form. Real valued.
inline CorrelationSeries kubo_corr(const Spectrum& s, int n, double beta,
                                   const std::vector<double>& times) {
  require_truncation(s, beta);
  const auto m = matrix_elements(s, n);
  const auto es = detail::shifted_energies(s);
  const int ns = s.n_states();
  const double span = es.back() + 1.0;
  double z = 0.0;
  for (int j = 0; j < ns; ++j) z += std::exp(-beta * es[static_cast<std::size_t>(j)]);

  struct Term {
    double amp, freq;
  };
  std::vector<Term> terms;
  for (int j = 0; j < ns; ++j) {
    for (int k = 0; k < ns; ++k) {
      const double mm = m(j, k) * m(j, k);
      if (mm == 0.0) continue;
      const double de = es[static_cast<std::size_t>(j)] - es[static_cast<std::size_t>(k)];
      double d;  // exp(-beta Ej) * int_0^beta exp((Ej-Ek) lambda) d lambda
      if (std::abs(de) < 1e-12 * span)
        d = beta * std::exp(-beta * es[static_cast<std::size_t>(j)]);
      else
        d = (std::exp(-beta * es[static_cast<std::size_t>(k)]) -
             std::exp(-beta * es[static_cast<std::size_t>(j)])) /
            de;
      terms.push_back({mm * d / (beta * z), de / s.hbar});
    }
  }

  CorrelationSeries out;
  out.times = times;
  out.values.resize(times.size());
  out.method = "kubo";
  out.beta = beta;
  out.order = n;
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    double re = 0.0;
    for (const auto& tm : terms) re += tm.amp * std::cos(tm.freq * t);
    out.values[it] = re;
  }
  return out;
}

/// Second-order Kubo-transformed correlator of q^2:
///   (2/beta^2) int_0^beta int_0^beta d lambda d eta
///       <q(t - i hbar lambda) q(t - i hbar eta) q^2(0)>
/// via the triple eigen-sum, with both imaginary-shift integrals evaluated in
/// closed form per (j,k,l) including the degenerate-denominator limits.
///
/// The intermediate sum carries exp(+beta E_k) factors, so the k range is
/// capped at beta (E_k - E_0) <= 45 and matrix elements below 1e-9 of the
/// largest are dropped; otherwise quadrature noise on far off-diagonal
/// elements is amplified past any tolerance.
inline CorrelationSeries kubo2_corr(const Spectrum& s, double beta,
                                    const std::vector<double>& times) {
  require_truncation(s, beta);
  const auto m1 = matrix_elements(s, 1);
  const auto m2 = matrix_elements(s, 2);
  const auto es = detail::shifted_energies(s);
  const int ns = s.n_states();
  const double span = es.back() + 1.0;
  const int jmax = detail::weight_cutoff(es, beta, 37.0);
  const int kmax = detail::weight_cutoff(es, beta, 45.0);
  const double thr1 = 1e-9 * m1.max_abs();
  const double thr2 = 1e-9 * m2.max_abs();

  double z = 0.0;
  for (int j = 0; j < ns; ++j) z += std::exp(-beta * es[static_cast<std::size_t>(j)]);

  auto integral = [&](double de) {  // int_0^beta exp(de * u) du
    if (std::abs(de) < 1e-12 * span) return beta;
    return std::expm1(beta * de) / de;
  };

  // c(j,l) = sum_k q_jk q_kl (q^2)_lj exp(-beta Ej) I(Ej-Ek) I(Ek-El)
  RealMatrix c(jmax);
  for (int j = 0; j < jmax; ++j) {
    const double wj = std::exp(-beta * es[static_cast<std::size_t>(j)]);
    for (int l = 0; l < jmax; ++l) {
      if (std::abs(m2(l, j)) < thr2) continue;
      double acc = 0.0;
      for (int k = 0; k < kmax; ++k) {
        if (std::abs(m1(j, k)) < thr1 || std::abs(m1(k, l)) < thr1) continue;
        acc += m1(j, k) * m1(k, l) *
               integral(es[static_cast<std::size_t>(j)] - es[static_cast<std::size_t>(k)]) *
               integral(es[static_cast<std::size_t>(k)] - es[static_cast<std::size_t>(l)]);
      }
      c(j, l) = wj * acc * m2(l, j);
    }
  }

  CorrelationSeries out;
  out.times = times;
  out.values.resize(times.size());
  out.method = "kubo2";
  out.beta = beta;
  out.order = 2;
  const double pref = 2.0 / (beta * beta * z);
  for (std::size_t it = 0; it < times.size(); ++it) {
    const double t = times[it];
    double re = 0.0, im = 0.0;
    for (int j = 0; j < jmax; ++j) {
      for (int l = 0; l < jmax; ++l) {
        if (c(j, l) == 0.0) continue;
        const double ph = (es[static_cast<std::size_t>(j)] - es[static_cast<std::size_t>(l)]) / s.hbar * t;
        re += c(j, l) * std::cos(ph);
        im += c(j, l) * std::sin(ph);
      }
    }
    out.values[it] = {pref * re, pref * im};
  }
  return out;
}

}  // namespace epac::spectral

#endif  // EPAC_SPECTRAL_HPP
