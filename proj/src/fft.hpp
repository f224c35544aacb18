#pragma once

#include <cstddef>
#include <vector>

namespace lqg::detail {

/// In-place 2-D RODFT00 (type-I sine) on a row-major mx-by-my array.
void sine2d(double* data, std::size_t mx, std::size_t my);

/// In-place 2-D transform: RODFT00 along x (rows, size mx), REDFT11 along y (size my).
void sine_cosine4_2d(double* data, std::size_t mx, std::size_t my);

/// In-place 1-D RODFT00.
void sine1d(double* data, std::size_t m);

/// Circular convolution of two row-major nx-by-ny real arrays.
std::vector<double> convolve2d(const std::vector<double>& a, const std::vector<double>& b, std::size_t nx,
                               std::size_t ny);

}  // namespace lqg::detail
