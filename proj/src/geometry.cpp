#include "qmarket/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmarket {

namespace {

struct Vec {
    double x, y, z;
};

Vec to_vec(const UnitVector3& u) { return {u.x(), u.y(), u.z()}; }

Vec cross(const Vec& a, const Vec& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

}  // namespace

UnitVector3 UnitVector3::normalized(double x, double y, double z) {
    const double norm = std::hypot(x, y, z);
    if (!std::isfinite(norm) || norm == 0.0) {
        throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    }
    return UnitVector3(x / norm, y / norm, z / norm);
}

UnitVector3 UnitVector3::from_polar(double theta, double phi) {
    const double s = std::sin(theta);
    return normalized(s * std::cos(phi), s * std::sin(phi), std::cos(theta));
}

double UnitVector3::polar_angle() const { return std::acos(std::clamp(z_, -1.0, 1.0)); }

UnitVector3 UnitVector3::operator-() const { return UnitVector3(-x_, -y_, -z_); }

double dot(const UnitVector3& a, const UnitVector3& b) {
    // Exact for a state measured along its own axis, so eigenstates stay
    // eigenstates despite normalization rounding.
    if (a == b) return 1.0;
    if (a == -b) return -1.0;
    const double d = a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
    return std::clamp(d, -1.0, 1.0);
}

double angle_between(const UnitVector3& a, const UnitVector3& b) {
    // atan2 form keeps precision near 0 and π where acos(dot) does not.
    const Vec c = cross(to_vec(a), to_vec(b));
    return std::atan2(std::hypot(c.x, c.y, c.z), dot(a, b));
}

bool approx_equal(const UnitVector3& a, const UnitVector3& b, double tol) {
    return std::abs(a.x() - b.x()) <= tol && std::abs(a.y() - b.y()) <= tol &&
           std::abs(a.z() - b.z()) <= tol;
}

UnitVector3 any_orthogonal(const UnitVector3& v) {
    // Cross with the coordinate axis least aligned with v.
    const double ax = std::abs(v.x()), ay = std::abs(v.y()), az = std::abs(v.z());
    Vec axis{0.0, 0.0, 0.0};
    if (ax <= ay && ax <= az) {
        axis.x = 1.0;
    } else if (ay <= az) {
        axis.y = 1.0;
    } else {
        axis.z = 1.0;
    }
    const Vec c = cross(to_vec(v), axis);
    return UnitVector3::normalized(c.x, c.y, c.z);
}

UnitVector3 rotate_toward(const UnitVector3& from, const UnitVector3& toward, double angle) {
    const double d = dot(from, toward);
    const Vec f = to_vec(from);
    const Vec t = to_vec(toward);
    Vec w{t.x - d * f.x, t.y - d * f.y, t.z - d * f.z};
    const double wn = std::hypot(w.x, w.y, w.z);
    UnitVector3 perp;
    if (wn < 1e-12) {
        perp = any_orthogonal(from);
    } else {
        perp = UnitVector3::normalized(w.x, w.y, w.z);
    }
    const double c = std::cos(angle), s = std::sin(angle);
    return UnitVector3::normalized(c * f.x + s * perp.x(), c * f.y + s * perp.y(),
                                   c * f.z + s * perp.z());
}

UnitVector3 sample_uniform(CounterRng& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return UnitVector3::normalized(r * std::cos(phi), r * std::sin(phi), z);
}

UnitVector3 rotate_random_axis(const UnitVector3& v, double angle, CounterRng& rng) {
    if (angle == 0.0) return v;
    // Random unit vector in the tangent plane at v, built from a fixed
    // orthonormal frame so the draw costs a single uniform.
    const UnitVector3 e1 = any_orthogonal(v);
    const Vec c = cross(to_vec(v), to_vec(e1));
    const double psi = 2.0 * std::numbers::pi * rng.uniform();
    const double cp = std::cos(psi), sp = std::sin(psi);
    const UnitVector3 tangent = UnitVector3::normalized(cp * e1.x() + sp * c.x, cp * e1.y() + sp * c.y,
                                                        cp * e1.z() + sp * c.z);
    const double ca = std::cos(angle), sa = std::sin(angle);
    return UnitVector3::normalized(ca * v.x() + sa * tangent.x(), ca * v.y() + sa * tangent.y(),
                                   ca * v.z() + sa * tangent.z());
}

}  // namespace qmarket
