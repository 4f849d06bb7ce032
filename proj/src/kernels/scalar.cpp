#include <algorithm>

#include "fiesta/kernels/kernels.hpp"

namespace fiesta::kernels {

LaneState LaneState::from_stream(RngStream& parent) {
  LaneState s{};
  for (std::size_t lane = 0; lane < kLanes; ++lane) {
    const RngStream child = parent.fork();
    for (std::size_t w = 0; w < 4; ++w) s.words[w][lane] = child.state()[w];
  }
  return s;
}

std::uint64_t LaneState::next(std::size_t lane) {
  std::array<std::uint64_t, 4> st{words[0][lane], words[1][lane], words[2][lane], words[3][lane]};
  const std::uint64_t out = xoshiro_next(st);
  for (std::size_t w = 0; w < 4; ++w) words[w][lane] = st[w];
  return out;
}

namespace scalar {

void fill_student_t(LaneState& lanes, const StudentTConstants& k, std::span<double> out) {
  double block[kLanes];
  for (std::size_t base = 0; base < out.size(); base += kLanes) {
    for (std::size_t lane = 0; lane < kLanes; ++lane) {
      auto next = [&] { return lanes.next(lane); };
      block[lane] = student_t_draw(next, k);
    }
    const std::size_t n = std::min(kLanes, out.size() - base);
    std::copy_n(block, n, out.begin() + static_cast<std::ptrdiff_t>(base));
  }
}

void affine(std::span<double> values, double center, double scale) {
  for (double& v : values) v = center + scale * v;
}

void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                      std::span<std::uint64_t> wins, std::vector<std::size_t>& tied_columns) {
  if (rows.empty()) return;
  for (std::size_t j = 0; j < cols; ++j) {
    double best = rows[0][j];
    std::size_t idx = 0;
    bool tie = false;
    for (std::size_t m = 1; m < rows.size(); ++m) {
      const double v = rows[m][j];
      if (v > best) {
        best = v;
        idx = m;
        tie = false;
      } else if (v == best) {
        tie = true;
      }
    }
    if (tie) {
      tied_columns.push_back(j);
    } else {
      ++wins[idx];
    }
  }
}

}  // namespace scalar
}  // namespace fiesta::kernels
