#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace plds {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

// 2x2 real matrix, row-major.
struct Mat2 {
    double a = 0.0, b = 0.0;
    double c = 0.0, d = 0.0;

    double trace() const { return a + d; }
    double det() const { return a * d - b * c; }
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}
inline Mat2 operator+(const Mat2& m, const Mat2& n) {
    return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
}
inline Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }

inline Mat2 identity2() { return {1.0, 0.0, 0.0, 1.0}; }

enum class ErrorKind {
    SlopeMismatch,
    NonMonotone,
    BadSign,
    DegenerateLine,
    ToleranceExhausted,
    NoSolution,
    NonReturning,
    OpenTrajectory,
    NotSaddle,
    NoRoot,
    NoSignChange,
    GeometryError,
    OffSection,
    BadRange,
    ConfigError,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

// Default tolerances; overridable from the CLI config.
struct Tolerances {
    double crossing = 1e-12;    // |x - bound| at a sewing crossing
    double fixedpoint = 1e-10;  // fixed-point refinement on the return map
    double center = 1e-6;       // |f(S)-S|/(1+S) identity threshold
    double corner = 1e-9;       // relative corner-coincidence detection
};

}  // namespace plds
