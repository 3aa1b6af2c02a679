#include "riskeig/sparse.hpp"

#include <algorithm>

namespace riskeig {

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

double CsrMatrix::diagonal(std::size_t i) const { return at(i, i); }

double CsrMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k];
    return s;
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
    return y;
}

Eigen::SparseMatrix<double> CsrMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            t.emplace_back(static_cast<int>(i), static_cast<int>(col[k]), val[k]);
    Eigen::SparseMatrix<double> m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

CsrBuilder::CsrBuilder(std::size_t rows, std::size_t cols) {
    m_.rows = rows;
    m_.cols = cols;
    m_.row_ptr.reserve(rows + 1);
}

void CsrBuilder::add(std::size_t col, double value) { pending_.emplace_back(col, value); }

void CsrBuilder::finish_row() {
    std::sort(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < pending_.size();) {
        const std::size_t c = pending_[k].first;
        double v = 0.0;
        for (; k < pending_.size() && pending_[k].first == c; ++k) v += pending_[k].second;
        m_.col.push_back(c);
        m_.val.push_back(v);
    }
    pending_.clear();
    m_.row_ptr.push_back(m_.col.size());
}

CsrMatrix CsrBuilder::build() && { return std::move(m_); }

}  // namespace riskeig
