#pragma once

#include <cstddef>
#include <vector>

namespace qmarket {

/// Symmetric table of pairwise agreement probabilities among n binary
/// observables: q(i, j) is the probability that observables i and j report
/// the same outcome label. The diagonal is 1.
class AgreementTable {
public:
    /// n observables, all pairs in perfect agreement.
    explicit AgreementTable(std::size_t n);

    /// Builds from a full row-major n x n matrix. Throws std::invalid_argument
    /// unless the matrix is square, symmetric, has a unit diagonal and all
    /// entries in [0, 1].
    static AgreementTable from_matrix(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }

    /// Sets q(i, j) and q(j, i). Throws std::invalid_argument for i == j with
    /// value != 1, or a value outside [0, 1].
    void set(std::size_t i, std::size_t j, double value);

    /// Number of unordered pairs i < j.
    std::size_t pair_count() const { return n_ * (n_ - 1) / 2; }
    /// Off-diagonal entries in lexicographic pair order (0,1), (0,2), ..., (n-2,n-1).
    std::vector<double> upper_triangle() const;

    /// Reorders observables: result(i, j) = this(perm[i], perm[j]).
    AgreementTable permuted(const std::vector<std::size_t>& perm) const;

    std::vector<std::vector<double>> rows() const;

    friend bool operator==(const AgreementTable&, const AgreementTable&) = default;

private:
    std::size_t n_;
    std::vector<double> q_;
};

}  // namespace qmarket
