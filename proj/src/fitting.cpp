#include "spinecho/fitting.hpp"

#include <cmath>
#include <limits>

namespace spinecho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double model_value(FitFamily family, double amplitude, double scale, double x) {
  if (!std::isfinite(scale)) return amplitude;
  if (family == FitFamily::exponential) return amplitude * std::exp(-x / scale);
  return amplitude * std::exp(-x * x / (2.0 * scale * scale));
}

double sse_of(FitFamily family, double amplitude, double scale,
              const std::vector<double>& x, const std::vector<double>& y) {
  double sse = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = model_value(family, amplitude, scale, x[i]) - y[i];
    sse += r * r;
  }
  return sse;
}

FitResult finish(FitFamily family, double amplitude, double scale,
                 const std::vector<double>& x, const std::vector<double>& y) {
  const double sse = sse_of(family, amplitude, scale, x, y);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  const double r2 = sst > 0.0 ? 1.0 - sse / sst : (sse <= 1e-24 ? 1.0 : 0.0);
  return FitResult{family, amplitude, scale, std::sqrt(sse), r2};
}

FitResult fit_decay(FitFamily family, const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
  if (x.size() < 4) throw std::invalid_argument("fit: need at least 4 points");
  for (double v : y) {
    if (!(v > 0.0)) throw std::invalid_argument("fit: non-positive data");
  }

  // log-space initialization: regress log y on u (u = x or x^2)
  const size_t n = x.size();
  double su = 0.0, sl = 0.0, suu = 0.0, sul = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double u = family == FitFamily::exponential ? x[i] : x[i] * x[i];
    const double l = std::log(y[i]);
    su += u;
    sl += l;
    suu += u * u;
    sul += u * l;
  }
  const double det = static_cast<double>(n) * suu - su * su;
  if (std::abs(det) < 1e-300) throw std::invalid_argument("fit: singular system");
  const double slope = (static_cast<double>(n) * sul - su * sl) / det;
  const double intercept = (sl * suu - su * sul) / det;

  if (!(slope < 0.0)) {
    // no decay: infinite-scale sentinel at the data mean
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    return finish(family, mean, kInf, x, y);
  }

  double amplitude = std::exp(intercept);
  double scale = family == FitFamily::exponential ? -1.0 / slope
                                                  : std::sqrt(-1.0 / (2.0 * slope));

  // damped Gauss-Newton refinement in linear space
  double sse = sse_of(family, amplitude, scale, x, y);
  for (int iter = 0; iter < 80; ++iter) {
    // normal equations for parameters (A, s)
    double jaa = 0.0, jas = 0.0, jss = 0.0, ga = 0.0, gs = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double m = model_value(family, amplitude, scale, x[i]);
      const double r = m - y[i];
      const double da = m / amplitude;
      const double ds = family == FitFamily::exponential
                            ? m * x[i] / (scale * scale)
                            : m * x[i] * x[i] / (scale * scale * scale);
      jaa += da * da;
      jas += da * ds;
      jss += ds * ds;
      ga += da * r;
      gs += ds * r;
    }
    const double d = jaa * jss - jas * jas;
    if (!(std::abs(d) > 1e-300)) break;
    const double step_a = -(jss * ga - jas * gs) / d;
    const double step_s = -(jaa * gs - jas * ga) / d;

    double damp = 1.0;
    double next_sse = sse;
    double next_a = amplitude, next_s = scale;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const double cand_a = amplitude + damp * step_a;
      const double cand_s = scale + damp * step_s;
      if (cand_a > 0.0 && cand_s > 0.0) {
        const double cand_sse = sse_of(family, cand_a, cand_s, x, y);
        if (cand_sse <= sse) {
          next_a = cand_a;
          next_s = cand_s;
          next_sse = cand_sse;
          improved = true;
          break;
        }
      }
      damp *= 0.5;
    }
    if (!improved) break;
    const double gain = sse - next_sse;
    amplitude = next_a;
    scale = next_s;
    sse = next_sse;
    if (gain <= 1e-16 * (1.0 + sse)) break;
  }
  return finish(family, amplitude, scale, x, y);
}

}  // namespace

FitResult fit_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_decay(FitFamily::gaussian, x, y);
}

FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
  return fit_decay(FitFamily::exponential, x, y);
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_linear: bad data");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw std::invalid_argument("fit_linear: singular system");
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy * sxx - sx * sxy) / det;
  double sse = 0.0, sst = 0.0;
  const double mean = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = intercept + slope * x[i] - y[i];
    sse += r * r;
    sst += (y[i] - mean) * (y[i] - mean);
  }
  return LinearFit{intercept, slope, std::sqrt(sse), sst > 0.0 ? 1.0 - sse / sst : 1.0};
}

}  // namespace spinecho
