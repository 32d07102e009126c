#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bcz {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Two values from distinct quadratic fields met in one operation.
struct FieldMismatchError : std::runtime_error {
  explicit FieldMismatchError(const std::string& w) : std::runtime_error(w) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& w) : std::runtime_error(w) {}
};

Int floor_rat(const Rational& r);
Int ceil_rat(const Rational& r);
double to_double(const Rational& r);
Rational rational_of_double(double x);
Rational parse_rational(const std::string& text);
std::int64_t to_int64(const Int& v);

/// Element a + b*sqrt(d) of the real quadratic field Q(sqrt(d)).
/// d = 0 encodes a plain rational (then b = 0 by canonical form).
/// Every predicate (sign, comparison, floor) is decided exactly;
/// doubles appear only in to_double().
class QuadVal {
 public:
  QuadVal() : d_(0) {}
  QuadVal(long long n) : a_(n), d_(0) {}  // NOLINT: implicit by design
  QuadVal(Rational a) : a_(std::move(a)), d_(0) {}
  QuadVal(Rational a, Rational b, int d);

  const Rational& ra() const { return a_; }
  const Rational& rb() const { return b_; }
  int field() const { return d_; }
  bool is_rational() const { return d_ == 0; }

  int sign() const;
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  friend QuadVal operator+(const QuadVal& u, const QuadVal& v);
  friend QuadVal operator-(const QuadVal& u, const QuadVal& v);
  friend QuadVal operator*(const QuadVal& u, const QuadVal& v);
  friend QuadVal operator/(const QuadVal& u, const QuadVal& v);
  QuadVal operator-() const;

  QuadVal& operator+=(const QuadVal& v) { return *this = *this + v; }
  QuadVal& operator-=(const QuadVal& v) { return *this = *this - v; }
  QuadVal& operator*=(const QuadVal& v) { return *this = *this * v; }
  QuadVal& operator/=(const QuadVal& v) { return *this = *this / v; }

 private:
  Rational a_;
  Rational b_;
  int d_;
};

/// Exact three-way comparison; throws FieldMismatchError on mixed tags.
int quad_cmp(const QuadVal& u, const QuadVal& v);

inline bool operator==(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) == 0; }
inline bool operator!=(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) != 0; }
inline bool operator<(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) < 0; }
inline bool operator<=(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) <= 0; }
inline bool operator>(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) > 0; }
inline bool operator>=(const QuadVal& u, const QuadVal& v) { return quad_cmp(u, v) >= 0; }

Int floor_q(const QuadVal& v);
Int ceil_q(const QuadVal& v);
double to_double(const QuadVal& v);
QuadVal abs_q(const QuadVal& v);
std::string to_exact_string(const QuadVal& v);

struct Vec2 {
  QuadVal x, y;
};

inline bool vec_eq(const Vec2& u, const Vec2& v) { return u.x == v.x && u.y == v.y; }
inline Vec2 vec_neg(const Vec2& v) { return {-v.x, -v.y}; }

/// 2x2 matrix over a quadratic field; group elements have det exactly 1.
struct Mat2 {
  QuadVal e11, e12, e21, e22;
};

Mat2 mat_identity();
Mat2 mat_mul(const Mat2& m, const Mat2& n);
Vec2 mat_apply(const Mat2& m, const Vec2& v);
QuadVal mat_det(const Mat2& m);
Mat2 mat_inverse(const Mat2& m);
Mat2 mat_neg(const Mat2& m);
bool mat_eq(const Mat2& m, const Mat2& n);

/// [[1, alpha], [0, 1]] -- the horizontal parabolic.
Mat2 parabolic_mat(const QuadVal& alpha);
/// [[1, 0], [-r, 1]] -- unstable horocycle at time r.
Mat2 horocycle_mat(const QuadVal& r);
/// [[s, t], [0, 1/s]].
Mat2 upper_mat(const QuadVal& s, const QuadVal& t);
/// diag(a, 1/a).
Mat2 diag_mat(const QuadVal& a);

}  // namespace bcz
