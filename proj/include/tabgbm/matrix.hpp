#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tabgbm {

/// Non-owning view of a row-major N x d matrix.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
};

inline MatrixView make_view(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
    return MatrixView{flat.data(), rows, cols};
}

}  // namespace tabgbm
