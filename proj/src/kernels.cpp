#include "declutter/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace declutter::kernels {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma, double truncate) {
  const int r = static_cast<int>(std::ceil(truncate * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_derivative_kernel(double sigma, double truncate) {
  const int r = static_cast<int>(std::ceil(truncate * sigma));
  std::vector<double> k(2 * r + 1);
  double moment = 0.0;
  for (int i = -r; i <= r; ++i) {
    // Correlation kernel: response at x is sum_i k[i] f(x+i), so a positive
    // slope must give a positive response.
    k[i + r] = i * std::exp(-0.5 * i * i / (sigma * sigma));
    moment += i * k[i + r];
  }
  for (double& v : k) v /= moment;
  return k;
}

namespace {

void convolve_rows(const GrayImage& src, std::span<const double> k, GrayImage& dst, bool parallel) {
  const int w = src.width();
  const int h = src.height();
  const int r = static_cast<int>(k.size() / 2);
  const int taps = static_cast<int>(k.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    // Reflect-pad the row once so the tap loop has no border branches.
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    const double* row = &src(0, y);
    for (int x = -r; x < w + r; ++x) padded[x + r] = row[reflect_index(x, w)];
    const double* __restrict in = padded.data();
    double* __restrict out = &dst(0, y);
    for (int x = 0; x < w; ++x) out[x] = 0.0;
    for (int i = 0; i < taps; ++i) {
      const double c = k[i];
      const double* shifted = in + i;
      for (int x = 0; x < w; ++x) out[x] += c * shifted[x];
    }
  }
}

void convolve_cols(const GrayImage& src, std::span<const double> k, GrayImage& dst, bool parallel) {
  const int w = src.width();
  const int h = src.height();
  const int r = static_cast<int>(k.size() / 2);
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    double* __restrict out = &dst(0, y);
    for (int x = 0; x < w; ++x) out[x] = 0.0;
    for (int i = -r; i <= r; ++i) {
      const double* __restrict in = &src(0, reflect_index(y + i, h));
      const double c = k[i + r];
      for (int x = 0; x < w; ++x) out[x] += c * in[x];
    }
  }
}

// Lower envelope of parabolas over one line (squared distances, in place).
void edt_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    while (k >= 0) {
      const int p = v[k];
      const double s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -inf : ((f[q] + double(q) * q) - (f[v[k - 1]] + double(v[k - 1]) * v[k - 1])) /
                               (2.0 * (q - v[k - 1]));
    z[k + 1] = inf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = inf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

GrayImage convolve_separable(const GrayImage& src, std::span<const double> kx, std::span<const double> ky,
                             Exec exec) {
  if (kx.size() % 2 == 0 || ky.size() % 2 == 0) throw std::invalid_argument("kernel length must be odd");
  const bool par = exec == Exec::parallel;
  GrayImage tmp(src.width(), src.height());
  GrayImage out(src.width(), src.height());
  convolve_rows(src, kx, tmp, par);
  convolve_cols(tmp, ky, out, par);
  return out;
}

GrayImage squared_distance(const BinaryMask& obstacles, Exec exec) {
  const int w = obstacles.width();
  const int h = obstacles.height();
  constexpr double inf = std::numeric_limits<double>::infinity();
  GrayImage cols(w, h);
  const bool par = exec == Exec::parallel;

#pragma omp parallel if (par)
  {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
#pragma omp for schedule(static)
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = obstacles(x, y) ? 0.0 : inf;
      edt_1d(f, d, v, z);
      for (int y = 0; y < h; ++y) cols(x, y) = d[y];
    }
  }

  GrayImage out(w, h);
#pragma omp parallel if (par)
  {
    std::vector<double> d(w), z(w + 1);
    std::vector<int> v(w);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      const std::span<const double> f(&cols(0, y), w);
      edt_1d(f, d, v, z);
      for (int x = 0; x < w; ++x) out(x, y) = d[x];
    }
  }
  return out;
}

std::vector<int> nearest_centroid(std::span<const double> xs, std::span<const double> ys,
                                  std::span<const double> cx, std::span<const double> cy, Exec exec) {
  const long n = static_cast<long>(xs.size());
  const int k = static_cast<int>(cx.size());
  std::vector<int> label(xs.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double dx = xs[i] - cx[c];
      const double dy = ys[i] - cy[c];
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    label[i] = best;
  }
  return label;
}

}  // namespace declutter::kernels
