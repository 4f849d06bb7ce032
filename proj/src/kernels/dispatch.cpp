#include <atomic>
#include <cstdlib>
#include <string>

#include "fiesta/core/errors.hpp"
#include "fiesta/kernels/kernels.hpp"

namespace fiesta::kernels {
namespace {

Isa detect_best() {
  if (const char* env = std::getenv("FIESTA_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect_best()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "?";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw InvalidInput(std::string("instruction set not supported: ") + std::string(to_string(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

void fill_student_t(LaneState& lanes, const StudentTConstants& k, std::span<double> out) {
  if (active_isa() == Isa::Avx2) return avx2::fill_student_t(lanes, k, out);
  scalar::fill_student_t(lanes, k, out);
}

void affine(std::span<double> values, double center, double scale) {
  if (active_isa() == Isa::Avx2) return avx2::affine(values, center, scale);
  scalar::affine(values, center, scale);
}

void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                      std::span<std::uint64_t> wins, std::vector<std::size_t>& tied_columns) {
  if (active_isa() == Isa::Avx2) return avx2::count_row_maxima(rows, cols, wins, tied_columns);
  scalar::count_row_maxima(rows, cols, wins, tied_columns);
}

}  // namespace fiesta::kernels
