#pragma once

#include <array>

#include "qmarket/random.hpp"

namespace qmarket {

/// A point on the unit sphere. Used both for states of the sphere model
/// (where the particle sits) and for measurement directions (where the
/// elastic is anchored).
class UnitVector3 {
public:
    /// North pole (0, 0, 1).
    UnitVector3() = default;

    /// Normalizes (x, y, z). Throws std::invalid_argument for a zero or
    /// non-finite vector.
    static UnitVector3 normalized(double x, double y, double z);

    /// (sin θ cos φ, sin θ sin φ, cos θ).
    static UnitVector3 from_polar(double theta, double phi);

    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    std::array<double, 3> components() const { return {x_, y_, z_}; }

    /// Polar angle to +z, in [0, π].
    double polar_angle() const;

    UnitVector3 operator-() const;

    friend bool operator==(const UnitVector3&, const UnitVector3&) = default;

private:
    UnitVector3(double x, double y, double z) : x_(x), y_(y), z_(z) {}

    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 1.0;
};

/// Dot product clamped to [-1, 1].
double dot(const UnitVector3& a, const UnitVector3& b);

/// Angle between two directions, in [0, π].
double angle_between(const UnitVector3& a, const UnitVector3& b);

/// True when the two vectors differ by at most `tol` in every component.
bool approx_equal(const UnitVector3& a, const UnitVector3& b, double tol = 1e-12);

/// Some unit vector orthogonal to v.
UnitVector3 any_orthogonal(const UnitVector3& v);

/// Rotates `from` by `angle` inside the plane spanned by `from` and
/// `toward`. If the two are (anti)parallel an arbitrary orthogonal plane is
/// used.
UnitVector3 rotate_toward(const UnitVector3& from, const UnitVector3& toward, double angle);

/// Uniformly distributed point on the sphere (Archimedes: z ~ U[-1, 1]).
UnitVector3 sample_uniform(CounterRng& rng);

/// Rotates v by exactly `angle` about an axis orthogonal to v drawn
/// uniformly at random. The result lies at angular distance `angle` from v.
UnitVector3 rotate_random_axis(const UnitVector3& v, double angle, CounterRng& rng);

}  // namespace qmarket
