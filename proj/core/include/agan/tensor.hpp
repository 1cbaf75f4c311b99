#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace agan {

// Dense row-major (rows x cols) matrix of doubles. Rows are timesteps and
// columns are channels everywhere in this codebase.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<std::size_t>(r) * cols + c];
    }
    double at(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return v[static_cast<std::size_t>(r) * cols + c];
    }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace agan
