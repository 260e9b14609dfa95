#pragma once

#include <string>
#include <variant>
#include <vector>

namespace qmarket {

/// Break-point distributions of the elastic, as densities on [-1, 1].
namespace rho {

/// Density 1/2 on [-1, 1]. Reproduces spin-1/2 statistics.
struct Uniform {
    friend bool operator==(const Uniform&, const Uniform&) = default;
};

/// All mass at x0 in (-1, 1): the elastic always breaks at the same point,
/// so every outcome is predetermined by the state.
struct Delta {
    double x0 = 0.0;
    friend bool operator==(const Delta&, const Delta&) = default;
};

/// Density densities[k] on [breakpoints[k], breakpoints[k+1]), zero outside
/// [breakpoints.front(), breakpoints.back()]. Densities are rescaled to
/// unit mass on construction of the owning RhoDistribution.
struct PiecewiseConstant {
    std::vector<double> breakpoints;
    std::vector<double> densities;
    friend bool operator==(const PiecewiseConstant&, const PiecewiseConstant&) = default;
};

/// Normal density N(center, width²) restricted to [-1, 1] and renormalized.
struct TruncatedGaussian {
    double center = 0.0;
    double width = 1.0;
    friend bool operator==(const TruncatedGaussian&, const TruncatedGaussian&) = default;
};

}  // namespace rho

/// Clamp tolerance for CDF arguments slightly outside [-1, 1].
inline constexpr double kRhoDomainTolerance = 1e-9;

/// A normalized density on the elastic coordinate [-1, 1].
///
/// cdf(x) = P(X <= x) is right-continuous; cdf_below(x) = P(X < x) is its
/// left limit. The two differ only at the atom of a Delta distribution.
class RhoDistribution {
public:
    using Variant = std::variant<rho::Uniform, rho::Delta, rho::PiecewiseConstant, rho::TruncatedGaussian>;

    /// Uniform.
    RhoDistribution();
    /// Validates the variant; throws std::invalid_argument if malformed.
    RhoDistribution(Variant v);  // NOLINT(google-explicit-constructor)

    static RhoDistribution uniform() { return RhoDistribution(rho::Uniform{}); }
    static RhoDistribution delta(double x0) { return RhoDistribution(rho::Delta{x0}); }
    static RhoDistribution piecewise(std::vector<double> breakpoints, std::vector<double> densities);
    static RhoDistribution truncated_gaussian(double center, double width);

    const Variant& variant() const { return v_; }
    /// "uniform", "delta", "piecewise" or "truncated_gaussian".
    std::string kind() const;
    bool is_delta() const { return std::holds_alternative<rho::Delta>(v_); }

    /// P(X <= x). Throws std::domain_error when x lies outside [-1, 1] by more
    /// than kRhoDomainTolerance.
    double cdf(double x) const;
    /// P(X < x).
    double cdf_below(double x) const;
    /// Density at x (zero for Delta, which has no density).
    double density(double x) const;
    /// Smallest x with cdf(x) >= p, for p in [0, 1).
    double quantile(double p) const;

    friend bool operator==(const RhoDistribution&, const RhoDistribution&) = default;

private:
    Variant v_;
    // Cumulative mass at each breakpoint (PiecewiseConstant only).
    std::vector<double> cumulative_;
    // Normal-CDF mass below -1 and below 1 (TruncatedGaussian only).
    double gauss_lo_ = 0.0;
    double gauss_hi_ = 0.0;
    bool gauss_upper_tail_ = false;
};

}  // namespace qmarket
