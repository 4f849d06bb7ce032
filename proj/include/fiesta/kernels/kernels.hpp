#pragma once

// Data-parallel inner loops of the Monte-Carlo belief estimate.
//
// Each kernel has a scalar reference (namespace scalar) and an AVX2 variant
// (namespace avx2).  The variants are bit-identical: the top-level functions
// dispatch to the best instruction set available at runtime without changing
// any result.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fiesta/core/rng.hpp"
#include "fiesta/kernels/math.hpp"

namespace fiesta::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);

// Best supported ISA, unless overridden by set_isa() or by the FIESTA_ISA
// environment variable ("scalar" or "avx2").
Isa active_isa();
// Throws InvalidInput if `isa` is not supported on this CPU.
void set_isa(Isa isa);

inline constexpr std::size_t kLanes = 4;

// Four independent xoshiro256++ generators laid out word-major:
// words[w][l] is state word w of lane l.
struct alignas(32) LaneState {
  std::uint64_t words[4][kLanes];

  // Seeds every lane from fresh draws of `parent`.
  static LaneState from_stream(RngStream& parent);

  std::uint64_t next(std::size_t lane);
};

// Fills `out` with standard Student-t draws.  Output i comes from lane i % 4;
// each lane runs student_t_draw() on its own generator, block by block.  A
// partial final block still advances all four lanes.
void fill_student_t(LaneState& lanes, const StudentTConstants& k, std::span<double> out);

// values[i] = center + scale * values[i]
void affine(std::span<double> values, double center, double scale);

// For every column j < cols, finds the rows holding the maximum of
// rows[*][j].  A unique maximum increments wins[row]; a column whose maximum
// is shared by several rows is appended to tied_columns instead.
void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                      std::span<std::uint64_t> wins, std::vector<std::size_t>& tied_columns);

namespace scalar {
void fill_student_t(LaneState& lanes, const StudentTConstants& k, std::span<double> out);
void affine(std::span<double> values, double center, double scale);
void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                      std::span<std::uint64_t> wins, std::vector<std::size_t>& tied_columns);
}  // namespace scalar

// Callable only when isa_supported(Isa::Avx2).
namespace avx2 {
void fill_student_t(LaneState& lanes, const StudentTConstants& k, std::span<double> out);
void affine(std::span<double> values, double center, double scale);
void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                      std::span<std::uint64_t> wins, std::vector<std::size_t>& tied_columns);
}  // namespace avx2

}  // namespace fiesta::kernels
