#include <cstdlib>
#include <stdexcept>
#include <string>

#include "aeromap/kernels.hpp"

namespace aeromap::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw std::runtime_error("kernel ISA not available: " + std::string(isa_name(isa)));
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

namespace {

const KernelTable& select() {
  const char* force = std::getenv("AEROMAP_FORCE_SCALAR");
  if (force != nullptr && std::string(force) != "0") return detail::kScalarTable;
  if (isa_available(Isa::avx2)) return table(Isa::avx2);
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

void clip_max_accumulate(std::span<double> agg, std::span<const double> mf, double clip) {
  if (agg.size() != mf.size()) throw std::invalid_argument("clip_max_accumulate: size mismatch");
  active().clip_max_accumulate(agg.data(), mf.data(), agg.size(), clip);
}

WeightedSums weighted_sums(std::span<const double> z, std::span<const double> w) {
  if (z.size() != w.size()) throw std::invalid_argument("weighted_sums: size mismatch");
  return active().weighted_sums(z.data(), w.data(), z.size());
}

double sum(std::span<const double> v) { return active().sum(v.data(), v.size()); }

CrossSums centered_cross_sums(std::span<const double> xs, std::span<const double> ys,
                              double mx, double my) {
  if (xs.size() != ys.size()) throw std::invalid_argument("centered_cross_sums: size mismatch");
  return active().centered_cross_sums(xs.data(), ys.data(), xs.size(), mx, my);
}

void squared_distances(std::span<const double> xs, std::span<const double> ys, double qx,
                       double qy, std::span<double> out) {
  if (xs.size() != ys.size() || out.size() != xs.size()) {
    throw std::invalid_argument("squared_distances: size mismatch");
  }
  active().squared_distances(xs.data(), ys.data(), xs.size(), qx, qy, out.data());
}

}  // namespace aeromap::kernels
