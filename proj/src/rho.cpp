#include "qmarket/rho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace qmarket {

namespace {

double phi_lower(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double phi_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_lower_inv(double p) {
    if (p <= 0.0) return -kInf;
    if (p >= 1.0) return kInf;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double phi_upper_inv(double q) { return -phi_lower_inv(q); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double checked_argument(double x) {
    if (std::isnan(x) || x < -1.0 - kRhoDomainTolerance || x > 1.0 + kRhoDomainTolerance) {
        throw std::domain_error("rho argument outside [-1, 1]: " + std::to_string(x));
    }
    return std::clamp(x, -1.0, 1.0);
}

}  // namespace

RhoDistribution::RhoDistribution() : v_(rho::Uniform{}) {}

RhoDistribution::RhoDistribution(Variant v) : v_(std::move(v)) {
    std::visit(
        overloaded{
            [](const rho::Uniform&) {},
            [](const rho::Delta& d) {
                if (!(d.x0 > -1.0 && d.x0 < 1.0)) {
                    throw std::invalid_argument("delta rho: x0 must lie in (-1, 1)");
                }
            },
            [this](const rho::PiecewiseConstant& pc) {
                const auto& bp = pc.breakpoints;
                if (bp.size() < 2) throw std::invalid_argument("piecewise rho: need at least 2 breakpoints");
                if (pc.densities.size() != bp.size() - 1) {
                    throw std::invalid_argument("piecewise rho: need one density per segment");
                }
                for (std::size_t i = 0; i < bp.size(); ++i) {
                    if (!(bp[i] >= -1.0 && bp[i] <= 1.0)) {
                        throw std::invalid_argument("piecewise rho: breakpoints must lie in [-1, 1]");
                    }
                    if (i > 0 && !(bp[i] > bp[i - 1])) {
                        throw std::invalid_argument("piecewise rho: breakpoints must be strictly ascending");
                    }
                }
                cumulative_.assign(bp.size(), 0.0);
                for (std::size_t k = 0; k < pc.densities.size(); ++k) {
                    const double d = pc.densities[k];
                    if (!(d >= 0.0) || !std::isfinite(d)) {
                        throw std::invalid_argument("piecewise rho: densities must be finite and nonnegative");
                    }
                    cumulative_[k + 1] = cumulative_[k] + d * (bp[k + 1] - bp[k]);
                }
                const double total = cumulative_.back();
                if (!(total > 0.0)) throw std::invalid_argument("piecewise rho: total mass must be positive");
                for (auto& c : cumulative_) c /= total;
                cumulative_.back() = 1.0;
            },
            [this](const rho::TruncatedGaussian& g) {
                if (!(g.width > 0.0) || !std::isfinite(g.width) || !std::isfinite(g.center)) {
                    throw std::invalid_argument("truncated gaussian rho: width must be positive and finite");
                }
                const double a = (-1.0 - g.center) / g.width;
                const double b = (1.0 - g.center) / g.width;
                // Work in whichever tail keeps [-1, 1] away from 1 - tiny: for a
                // center above the interval the standardized points are very
                // negative and the lower tail is the accurate one.
                gauss_upper_tail_ = g.center < 0.0;
                if (gauss_upper_tail_) {
                    gauss_lo_ = phi_upper(a);
                    gauss_hi_ = phi_upper(b);
                } else {
                    gauss_lo_ = phi_lower(a);
                    gauss_hi_ = phi_lower(b);
                }
                const double mass = gauss_upper_tail_ ? gauss_lo_ - gauss_hi_ : gauss_hi_ - gauss_lo_;
                if (!(mass > 0.0)) {
                    throw std::invalid_argument("truncated gaussian rho: no representable mass on [-1, 1]");
                }
            },
        },
        v_);
}

RhoDistribution RhoDistribution::piecewise(std::vector<double> breakpoints, std::vector<double> densities) {
    return RhoDistribution(rho::PiecewiseConstant{std::move(breakpoints), std::move(densities)});
}

RhoDistribution RhoDistribution::truncated_gaussian(double center, double width) {
    return RhoDistribution(rho::TruncatedGaussian{center, width});
}

std::string RhoDistribution::kind() const {
    return std::visit(overloaded{
                          [](const rho::Uniform&) { return std::string("uniform"); },
                          [](const rho::Delta&) { return std::string("delta"); },
                          [](const rho::PiecewiseConstant&) { return std::string("piecewise"); },
                          [](const rho::TruncatedGaussian&) { return std::string("truncated_gaussian"); },
                      },
                      v_);
}

double RhoDistribution::cdf(double x) const {
    x = checked_argument(x);
    return std::visit(
        overloaded{
            [&](const rho::Uniform&) { return 0.5 * (x + 1.0); },
            [&](const rho::Delta& d) { return x >= d.x0 ? 1.0 : 0.0; },
            [&](const rho::PiecewiseConstant& pc) {
                const auto& bp = pc.breakpoints;
                if (x < bp.front()) return 0.0;
                if (x >= bp.back()) return 1.0;
                const auto k = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), x) - bp.begin()) - 1;
                const double seg = cumulative_[k + 1] - cumulative_[k];
                const double frac = (x - bp[k]) / (bp[k + 1] - bp[k]);
                return std::min(cumulative_[k + 1], cumulative_[k] + seg * frac);
            },
            [&](const rho::TruncatedGaussian& g) {
                if (x <= -1.0) return 0.0;
                if (x >= 1.0) return 1.0;
                const double z = (x - g.center) / g.width;
                const double value = gauss_upper_tail_ ? (gauss_lo_ - phi_upper(z)) / (gauss_lo_ - gauss_hi_)
                                                       : (phi_lower(z) - gauss_lo_) / (gauss_hi_ - gauss_lo_);
                return std::clamp(value, 0.0, 1.0);
            },
        },
        v_);
}

double RhoDistribution::cdf_below(double x) const {
    if (const auto* d = std::get_if<rho::Delta>(&v_)) {
        x = checked_argument(x);
        return x > d->x0 ? 1.0 : 0.0;
    }
    return cdf(x);
}

double RhoDistribution::density(double x) const {
    x = checked_argument(x);
    return std::visit(overloaded{
                          [](const rho::Uniform&) { return 0.5; },
                          [](const rho::Delta&) { return 0.0; },
                          [&](const rho::PiecewiseConstant& pc) {
                              const auto& bp = pc.breakpoints;
                              if (x < bp.front() || x > bp.back()) return 0.0;
                              auto k = static_cast<std::size_t>(
                                           std::upper_bound(bp.begin(), bp.end(), x) - bp.begin());
                              k = std::min(k, bp.size() - 1) - 1;
                              return (cumulative_[k + 1] - cumulative_[k]) / (bp[k + 1] - bp[k]);
                          },
                          [&](const rho::TruncatedGaussian& g) {
                              const double z = (x - g.center) / g.width;
                              const double mass = std::abs(gauss_hi_ - gauss_lo_);
                              return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * g.width * mass);
                          },
                      },
                      v_);
}

double RhoDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("rho quantile: p must lie in [0, 1)");
    return std::visit(
        overloaded{
            [&](const rho::Uniform&) { return 2.0 * p - 1.0; },
            [&](const rho::Delta& d) { return d.x0; },
            [&](const rho::PiecewiseConstant& pc) {
                const auto& bp = pc.breakpoints;
                // First segment whose upper cumulative mass exceeds p; it has
                // positive mass, so the division below is safe.
                const auto k =
                    static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), p) -
                                             cumulative_.begin()) -
                    1;
                const double seg = cumulative_[k + 1] - cumulative_[k];
                const double x = bp[k] + (p - cumulative_[k]) / seg * (bp[k + 1] - bp[k]);
                return std::clamp(x, bp[k], bp[k + 1]);
            },
            [&](const rho::TruncatedGaussian& g) {
                double z;
                if (gauss_upper_tail_) {
                    z = phi_upper_inv(gauss_lo_ - p * (gauss_lo_ - gauss_hi_));
                } else {
                    z = phi_lower_inv(gauss_lo_ + p * (gauss_hi_ - gauss_lo_));
                }
                return std::clamp(g.center + g.width * z, -1.0, 1.0);
            },
        },
        v_);
}

}  // namespace qmarket
