// Copyright (c) 2026 The Engage Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Soft-margin kernel SVM trained by SMO with second-order working-set
// selection, plus Platt scaling for probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/text.hpp"

namespace engage {

enum class Kernel { Linear, Rbf, Poly, Sigmoid };

inline std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::Linear: return "linear";
    case Kernel::Rbf: return "rbf";
    case Kernel::Poly: return "poly";
    case Kernel::Sigmoid: return "sigmoid";
  }
  return "?";
}

inline Kernel parse_kernel(std::string_view s) {
  if (s == "linear") return Kernel::Linear;
  if (s == "rbf") return Kernel::Rbf;
  if (s == "poly") return Kernel::Poly;
  if (s == "sigmoid") return Kernel::Sigmoid;
  fail(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(s) + "'");
}

inline constexpr int kPolyDegree = 3;
inline constexpr double kKernelCoef0 = 1.0;

// Kernel value from x.y and the squared norms of x and y.
inline double kernel_from_dot(Kernel k, double gamma, double dot, double sq_a, double sq_b) {
  switch (k) {
    case Kernel::Linear: return dot;
    case Kernel::Rbf: return std::exp(-gamma * std::max(0.0, sq_a + sq_b - 2 * dot));
    case Kernel::Poly: {
      const double b = gamma * dot + kKernelCoef0;
      return b * b * b;
    }
    case Kernel::Sigmoid: return std::tanh(gamma * dot + kKernelCoef0);
  }
  return 0;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Pairwise dot products of a dataset's rows and its squared norms.
struct Gram {
  std::size_t n = 0;
  std::vector<double> dots;  // n x n
  std::vector<double> sq;

  static Gram of(const Dataset& d) {
    Gram g;
    g.n = d.rows();
    g.dots.assign(g.n * g.n, 0.0);
    g.sq.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = i; j < g.n; ++j) {
        const double v = dot(d.row(i), d.row(j));
        g.dots[i * g.n + j] = v;
        g.dots[j * g.n + i] = v;
      }
      g.sq[i] = g.dots[i * g.n + i];
    }
    return g;
  }

  std::vector<double> kernel(Kernel k, double gamma) const {
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = kernel_from_dot(k, gamma, dots[i * n + j], sq[i], sq[j]);
    }
    return out;
  }
};

struct SmoOptions {
  double tolerance = 1e-3;
  double tau = 1e-12;
  std::size_t max_passes = 10;  // iteration cap = max_passes * n * n
};

struct SmoResult {
  std::vector<double> alpha;
  double rho = 0;
  double residual = 0;  // max KKT violation gap at exit
  std::size_t iterations = 0;
  bool converged = false;
};

// Dual C-SVC: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
inline SmoResult solve_smo(std::span<const double> k, std::span<const double> y, double c, const SmoOptions& opts = {}) {
  const std::size_t n = y.size();
  SmoResult res;
  res.alpha.assign(n, 0.0);
  auto& a = res.alpha;
  std::vector<double> g(n, -1.0);
  auto kk = [&](std::size_t i, std::size_t j) { return k[i * n + j]; };
  const std::size_t cap = std::max<std::size_t>(1, opts.max_passes * n * n);
  for (;;) {
    // Working-set selection using second-order information.
    double gmax = -INFINITY, gmax2 = -INFINITY;
    std::ptrdiff_t wi = -1, wj = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (a[t] < c && -g[t] >= gmax) {
          gmax = -g[t];
          wi = static_cast<std::ptrdiff_t>(t);
        }
      } else if (a[t] > 0 && g[t] >= gmax) {
        gmax = g[t];
        wi = static_cast<std::ptrdiff_t>(t);
      }
    }
    double obj_min = INFINITY;
    if (wi >= 0) {
      const auto i = static_cast<std::size_t>(wi);
      for (std::size_t t = 0; t < n; ++t) {
        const double qit = y[i] * y[t] * kk(i, t);
        if (y[t] > 0) {
          if (a[t] > 0) {
            const double diff = gmax + g[t];
            if (g[t] >= gmax2) gmax2 = g[t];
            if (diff > 0) {
              double quad = kk(i, i) + kk(t, t) - 2.0 * y[i] * qit;
              if (quad <= 0) quad = opts.tau;
              const double obj = -(diff * diff) / quad;
              if (obj <= obj_min) {
                wj = static_cast<std::ptrdiff_t>(t);
                obj_min = obj;
              }
            }
          }
        } else if (a[t] < c) {
          const double diff = gmax - g[t];
          if (-g[t] >= gmax2) gmax2 = -g[t];
          if (diff > 0) {
            double quad = kk(i, i) + kk(t, t) + 2.0 * y[i] * qit;
            if (quad <= 0) quad = opts.tau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              wj = static_cast<std::ptrdiff_t>(t);
              obj_min = obj;
            }
          }
        }
      }
    }
    res.residual = (wi < 0) ? 0.0 : gmax + gmax2;
    if (wi < 0 || wj < 0 || gmax + gmax2 < opts.tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cap) break;
    ++res.iterations;

    const auto i = static_cast<std::size_t>(wi), j = static_cast<std::size_t>(wj);
    const double qij = y[i] * y[j] * kk(i, j);
    const double old_ai = a[i], old_aj = a[j];
    if (y[i] != y[j]) {
      double quad = kk(i, i) + kk(j, j) + 2 * qij;
      if (quad <= 0) quad = opts.tau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = kk(i, i) + kk(j, j) - 2 * qij;
      if (quad <= 0) quad = opts.tau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_ai, dj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      g[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
    }
  }

  // Offset from free vectors, or the midpoint of the feasible interval.
  double ub = INFINITY, lb = -INFINITY, sum = 0;
  std::size_t nfree = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (a[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nfree;
      sum += yg;
    }
  }
  res.rho = nfree > 0 ? sum / static_cast<double>(nfree) : (ub + lb) / 2;
  return res;
}

// Platt's sigmoid P(HI | f) = 1 / (1 + exp(A f + B)), fitted by Newton's
// method with backtracking on regularized targets.
struct PlattParams {
  double a = -1;
  double b = 0;
};

inline double platt_predict(const PlattParams& p, double f) {
  const double z = f * p.a + p.b;
  if (z >= 0) return std::exp(-z) / (1.0 + std::exp(-z));
  return 1.0 / (1 + std::exp(z));
}

inline PlattParams platt_fit(std::span<const double> f, std::span<const double> y, int max_iter = 100) {
  const std::size_t n = f.size();
  double prior1 = 0, prior0 = 0;
  for (double v : y) (v > 0 ? prior1 : prior0) += 1;
  const double hi_t = (prior1 + 1) / (prior1 + 2);
  const double lo_t = 1 / (prior0 + 2);
  const double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = y[i] > 0 ? hi_t : lo_t;
  double a = 0, b = std::log((prior0 + 1) / (prior1 + 1));
  auto objective = [&](double aa, double bb) {
    double fval = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * aa + bb;
      fval += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1) * z + std::log1p(std::exp(z));
    }
    return fval;
  };
  double fval = objective(a, b);
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1;
    while (step >= min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 0.0001 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2;
    }
    if (step < min_step) break;
  }
  return {a, b};
}

enum class GammaKind { Value, Scale, Auto };

struct Gamma {
  GammaKind kind = GammaKind::Scale;
  double value = 0;

  friend bool operator==(const Gamma&, const Gamma&) = default;
};

inline std::string gamma_to_string(const Gamma& g) {
  switch (g.kind) {
    case GammaKind::Scale: return "scale";
    case GammaKind::Auto: return "auto";
    case GammaKind::Value: return text::format_double(g.value);
  }
  return "?";
}

inline Gamma parse_gamma(std::string_view s) {
  if (s == "scale") return {GammaKind::Scale, 0};
  if (s == "auto") return {GammaKind::Auto, 0};
  const auto v = text::parse_double(s);
  if (!v || !(*v > 0)) fail(ErrorCode::InvalidArgument, "bad gamma '" + std::string(s) + "'");
  return {GammaKind::Value, *v};
}

// "scale" = 1 / (F * Var(all training values)); "auto" = 1 / F.
inline double resolve_gamma(const Gamma& g, const Dataset& d) {
  const double f = static_cast<double>(d.cols());
  switch (g.kind) {
    case GammaKind::Value: return g.value;
    case GammaKind::Auto: return 1.0 / f;
    case GammaKind::Scale: {
      double mean = 0;
      for (double v : d.values) mean += v;
      mean /= static_cast<double>(d.values.size());
      double var = 0;
      for (double v : d.values) var += (v - mean) * (v - mean);
      var /= static_cast<double>(d.values.size());
      return var > 0 ? 1.0 / (f * var) : 1.0;
    }
  }
  return 1.0;
}

struct SvmModel {
  Kernel kernel = Kernel::Rbf;
  double gamma = 1;
  double rho = 0;
  PlattParams platt;
  std::size_t dim = 0;
  std::vector<double> support;  // row-major support vectors
  std::vector<double> coef;     // alpha_i * y_i
  std::vector<std::size_t> support_rows;  // training row of each support vector; not persisted
  double residual = 0;
  std::size_t iterations = 0;

  std::size_t support_count() const { return coef.size(); }

  double decision(std::span<const double> x) const {
    const double sx = dot(x, x);
    double s = 0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      const std::span<const double> sv(support.data() + k * dim, dim);
      s += coef[k] * kernel_from_dot(kernel, gamma, dot(sv, x), dot(sv, sv), sx);
    }
    return s - rho;
  }

  double predict(std::span<const double> x) const { return platt_predict(platt, decision(x)); }
};

struct SvmFitOptions {
  SmoOptions smo;
  bool throw_on_nonconvergence = true;
};

inline std::vector<double> svm_targets(const Dataset& d) {
  std::vector<double> y(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) y[i] = d.labels[i] == Label::Hi ? 1.0 : -1.0;
  return y;
}

// Fits from a precomputed Gram of `d`; grid search shares one Gram per fold.
inline SvmModel fit_svm_gram(const Dataset& d, const Gram& gram, double c, Kernel kernel, double gamma,
                             const SvmFitOptions& opts = {}) {
  const std::size_t n = d.rows();
  const std::size_t pos = d.count(Label::Hi);
  if (pos == 0 || pos == n) fail(ErrorCode::DegenerateLabels, "SVM needs both classes");
  const auto y = svm_targets(d);
  const auto k = gram.kernel(kernel, gamma);
  const auto sol = solve_smo(k, y, c, opts.smo);
  if (!sol.converged && opts.throw_on_nonconvergence) {
    fail(ErrorCode::NonConvergence, "SMO stopped after " + std::to_string(sol.iterations) +
                                        " iterations with KKT residual " + text::format_double(sol.residual));
  }
  SvmModel m;
  m.kernel = kernel;
  m.gamma = gamma;
  m.rho = sol.rho;
  m.dim = d.cols();
  m.residual = sol.residual;
  m.iterations = sol.iterations;
  std::vector<double> fvals(n, -sol.rho);
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.alpha[i] <= 0) continue;
    const double ci = sol.alpha[i] * y[i];
    m.coef.push_back(ci);
    m.support_rows.push_back(i);
    const auto r = d.row(i);
    m.support.insert(m.support.end(), r.begin(), r.end());
    for (std::size_t t = 0; t < n; ++t) fvals[t] += ci * k[i * n + t];
  }
  m.platt = platt_fit(fvals, y);
  return m;
}

inline SvmModel fit_svm(const Dataset& d, double c, Kernel kernel, const Gamma& gamma,
                        const SvmFitOptions& opts = {}) {
  return fit_svm_gram(d, Gram::of(d), c, kernel, resolve_gamma(gamma, d), opts);
}

}  // namespace engage
