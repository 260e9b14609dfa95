#include "qmarket/agreement_table.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmarket {

AgreementTable::AgreementTable(std::size_t n) : n_(n), q_(n * n, 1.0) {}

AgreementTable AgreementTable::from_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    AgreementTable table(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw std::invalid_argument("agreement table must be square");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rows[i][j];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("agreement table entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") outside [0, 1]");
            }
            if (i == j && v != 1.0) throw std::invalid_argument("agreement table diagonal must be 1");
            if (j < i && v != rows[j][i]) throw std::invalid_argument("agreement table must be symmetric");
            table.q_[i * n + j] = v;
        }
    }
    return table;
}

void AgreementTable::set(std::size_t i, std::size_t j, double value) {
    if (i >= n_ || j >= n_) throw std::out_of_range("agreement table index");
    if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("agreement probability outside [0, 1]");
    if (i == j && value != 1.0) throw std::invalid_argument("agreement table diagonal must be 1");
    q_[i * n_ + j] = value;
    q_[j * n_ + i] = value;
}

std::vector<double> AgreementTable::upper_triangle() const {
    std::vector<double> out;
    out.reserve(pair_count());
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) out.push_back((*this)(i, j));
    return out;
}

AgreementTable AgreementTable::permuted(const std::vector<std::size_t>& perm) const {
    if (perm.size() != n_) throw std::invalid_argument("permutation size mismatch");
    AgreementTable out(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) out.q_[i * n_ + j] = (*this)(perm.at(i), perm.at(j));
    return out;
}

std::vector<std::vector<double>> AgreementTable::rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

}  // namespace qmarket
