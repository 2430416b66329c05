#include "aeromap/kernels.hpp"

namespace aeromap::kernels {
namespace {

void clip_max_accumulate_scalar(double* agg, const double* mf, std::size_t n, double clip) {
  for (std::size_t i = 0; i < n; ++i) {
    const double clipped = mf[i] < clip ? mf[i] : clip;
    agg[i] = agg[i] > clipped ? agg[i] : clipped;
  }
}

WeightedSums weighted_sums_scalar(const double* z, const double* w, std::size_t n) {
  WeightedSums s;
  for (std::size_t i = 0; i < n; ++i) {
    s.weighted += z[i] * w[i];
    s.total += w[i];
  }
  return s;
}

double sum_scalar(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i];
  return s;
}

CrossSums centered_cross_sums_scalar(const double* xs, const double* ys, std::size_t n,
                                     double mx, double my) {
  CrossSums s;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    s.sxx += dx * dx;
    s.sxy += dx * dy;
  }
  return s;
}

void squared_distances_scalar(const double* xs, const double* ys, std::size_t n, double qx,
                              double qy, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    out[i] = dx * dx + dy * dy;
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{
    Isa::scalar,
    clip_max_accumulate_scalar,
    weighted_sums_scalar,
    sum_scalar,
    centered_cross_sums_scalar,
    squared_distances_scalar,
};
}  // namespace detail

}  // namespace aeromap::kernels
