#ifndef EPAC_SERIES_HPP
#define EPAC_SERIES_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "epac/errors.hpp"

namespace epac {

/// A correlation function sampled on a time grid (real time t or imaginary
/// time tau), with metadata identifying how it was produced.
struct CorrelationSeries {
  std::vector<double> times;
  std::vector<std::complex<double>> values;
  std::string method;
  double beta = 0.0;
  int order = 1;  // operator power n in <q^n(t) q^n(0)>

  void validate() const {
    if (times.size() != values.size()) throw DomainError("series: times/values length mismatch");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
      if (!(times[i] < times[i + 1])) throw DomainError("series: times must be strictly increasing");
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw DomainError("series: non-finite value");
  }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  if (n == 1) {
    x[0] = lo;
    return x;
  }
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + h * static_cast<double>(i);
  x.back() = hi;
  return x;
}

}  // namespace epac

#endif  // EPAC_SERIES_HPP
