#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mdir {

using Index = std::uint32_t;
using Complex = std::complex<double>;
using Vec2 = std::array<double, 2>;

inline constexpr double kDefaultTol = 1e-10;

/// Malformed or out-of-contract input: bad files, invalid ids, bad parameters.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation's mathematical precondition does not hold (e.g. a kernel
/// failing the maximum-principle check, a field that is not subinvariant).
class precondition_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed object broke an invariant it is supposed to satisfy.
class invariant_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An iteration stopped at its cap before reaching the requested tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

} // namespace mdir
