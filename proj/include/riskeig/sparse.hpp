#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace riskeig {

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    double diagonal(std::size_t i) const;
    double row_sum(std::size_t i) const;

    std::vector<double> multiply(std::span<const double> x) const;

    Eigen::SparseMatrix<double> to_eigen() const;
};

/// Row-by-row builder: entries of a row may arrive in any order and
/// duplicates are summed.
class CsrBuilder {
public:
    CsrBuilder(std::size_t rows, std::size_t cols);
    void add(std::size_t col, double value);
    void finish_row();
    CsrMatrix build() &&;

private:
    CsrMatrix m_;
    std::vector<std::pair<std::size_t, double>> pending_;
};

}  // namespace riskeig
