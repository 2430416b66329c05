#pragma once

// Data-parallel inner loops shared by the fuzzy engine and the wall mapper.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at startup from CPUID; setting
// AEROMAP_FORCE_SCALAR=1 in the environment pins the scalar path.
//
// Elementwise kernels (clip_max_accumulate, squared_distances) are bit-exact
// across variants. Reductions use four interleaved partial sums in the AVX2
// path, so they agree with the scalar path to rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace aeromap::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct WeightedSums {
  double weighted = 0.0;  // sum of z[i] * w[i]
  double total = 0.0;     // sum of w[i]
};

struct CrossSums {
  double sxx = 0.0;  // sum of (x - mx)^2
  double sxy = 0.0;  // sum of (x - mx)(y - my)
};

struct KernelTable {
  Isa isa;
  // agg[i] = max(agg[i], min(mf[i], clip))
  void (*clip_max_accumulate)(double* agg, const double* mf, std::size_t n, double clip);
  WeightedSums (*weighted_sums)(const double* z, const double* w, std::size_t n);
  double (*sum)(const double* v, std::size_t n);
  CrossSums (*centered_cross_sums)(const double* xs, const double* ys, std::size_t n,
                                   double mx, double my);
  // out[i] = (xs[i] - qx)^2 + (ys[i] - qy)^2
  void (*squared_distances)(const double* xs, const double* ys, std::size_t n, double qx,
                            double qy, double* out);
};

bool isa_available(Isa isa);
const KernelTable& table(Isa isa);
// Table selected for this process.
const KernelTable& active();

// Convenience wrappers over active().
void clip_max_accumulate(std::span<double> agg, std::span<const double> mf, double clip);
WeightedSums weighted_sums(std::span<const double> z, std::span<const double> w);
double sum(std::span<const double> v);
CrossSums centered_cross_sums(std::span<const double> xs, std::span<const double> ys,
                              double mx, double my);
void squared_distances(std::span<const double> xs, std::span<const double> ys, double qx,
                       double qy, std::span<double> out);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace aeromap::kernels
