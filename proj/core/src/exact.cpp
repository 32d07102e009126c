#include "bcz/exact.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace bcz {

Int floor_rat(const Rational& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  Int q = num / den;  // truncates toward zero
  if (num < 0 && q * den != num) --q;
  return q;
}

Int ceil_rat(const Rational& r) { return -floor_rat(-r); }

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational rational_of_double(double x) {
  if (!std::isfinite(x)) throw DomainError("rational_of_double: non-finite input");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
  // 53 doublings make the mantissa integral.
  Int num = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  Rational r(num);
  if (exp > 0) {
    r *= Rational(Int(1) << exp);
  } else if (exp < 0) {
    r /= Rational(Int(1) << (-exp));
  }
  return r;
}

Rational parse_rational(const std::string& text) {
  std::string s = text;
  // trim
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw DomainError("parse_rational: empty string");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) throw DomainError("parse_rational: zero denominator");
      return Rational(num) / Rational(den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string head = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      bool neg = !head.empty() && head[0] == '-';
      if (!head.empty() && (head[0] == '+' || head[0] == '-')) head.erase(head.begin());
      Int ipart = head.empty() ? Int(0) : Int(head);
      Int fpart = frac.empty() ? Int(0) : Int(frac);
      Int scale = 1;
      for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
      Rational r = Rational(ipart) + Rational(fpart) / Rational(scale);
      return neg ? -r : r;
    }
    return Rational(Int(s));
  } catch (const std::exception&) {
    throw DomainError("parse_rational: cannot parse '" + text + "'");
  }
}

std::int64_t to_int64(const Int& v) {
  static const Int kMax = std::numeric_limits<std::int64_t>::max();
  static const Int kMin = std::numeric_limits<std::int64_t>::min();
  if (v > kMax || v < kMin) throw DomainError("to_int64: out of range");
  return v.convert_to<std::int64_t>();
}

QuadVal::QuadVal(Rational a, Rational b, int d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (d_ < 0) throw DomainError("QuadVal: negative field tag");
  if (b_.is_zero()) {
    d_ = 0;
  } else if (d_ == 0) {
    throw DomainError("QuadVal: nonzero sqrt part with rational tag");
  }
}

int QuadVal::sign() const {
  int sa = a_.sign();
  if (d_ == 0) return sa;
  int sb = b_.sign();
  if (sa == 0) return sb;
  if (sb == 0) return sa;
  if (sa > 0 && sb > 0) return 1;
  if (sa < 0 && sb < 0) return -1;
  // Opposite signs: compare a^2 against b^2 d. For square-free d > 1 the
  // two magnitudes can never coincide, but equality is handled anyway.
  Rational lhs = a_ * a_;
  Rational rhs = b_ * b_ * Rational(d_);
  int c = lhs.compare(rhs);
  return sa > 0 ? c : -c;
}

namespace {

int join_field(const QuadVal& u, const QuadVal& v) {
  if (u.field() == v.field()) return u.field();
  if (u.field() == 0) return v.field();
  if (v.field() == 0) return u.field();
  throw FieldMismatchError("incompatible quadratic fields: sqrt(" + std::to_string(u.field()) +
                           ") vs sqrt(" + std::to_string(v.field()) + ")");
}

}  // namespace

QuadVal operator+(const QuadVal& u, const QuadVal& v) {
  int d = join_field(u, v);
  return QuadVal(u.ra() + v.ra(), u.rb() + v.rb(), d);
}

QuadVal operator-(const QuadVal& u, const QuadVal& v) {
  int d = join_field(u, v);
  return QuadVal(u.ra() - v.ra(), u.rb() - v.rb(), d);
}

QuadVal operator*(const QuadVal& u, const QuadVal& v) {
  int d = join_field(u, v);
  Rational a = u.ra() * v.ra() + u.rb() * v.rb() * Rational(d);
  Rational b = u.ra() * v.rb() + u.rb() * v.ra();
  return QuadVal(std::move(a), std::move(b), d);
}

QuadVal operator/(const QuadVal& u, const QuadVal& v) {
  int d = join_field(u, v);
  if (v.is_zero()) throw DomainError("QuadVal division by zero");
  // 1/(a + b sqrt d) = (a - b sqrt d) / (a^2 - b^2 d)
  Rational norm = v.ra() * v.ra() - v.rb() * v.rb() * Rational(d);
  if (norm.is_zero()) throw DomainError("QuadVal division: zero field norm");
  QuadVal conj(v.ra() / norm, -v.rb() / norm, v.rb().is_zero() ? 0 : d);
  return u * conj;
}

QuadVal QuadVal::operator-() const {
  QuadVal r;
  r.a_ = -a_;
  r.b_ = -b_;
  r.d_ = d_;
  return r;
}

int quad_cmp(const QuadVal& u, const QuadVal& v) { return (u - v).sign(); }

Int floor_q(const QuadVal& v) {
  if (v.is_rational()) return floor_rat(v.ra());
  double guess = to_double(v);
  if (std::abs(guess) > 4.0e15) throw DomainError("floor_q: magnitude out of range");
  Int n = static_cast<long long>(std::floor(guess));
  while (quad_cmp(v, QuadVal(Rational(n))) < 0) --n;
  while (quad_cmp(v, QuadVal(Rational(n + 1))) >= 0) ++n;
  return n;
}

Int ceil_q(const QuadVal& v) { return -floor_q(-v); }

double to_double(const QuadVal& v) {
  double r = to_double(v.ra());
  if (!v.is_rational()) r += to_double(v.rb()) * std::sqrt(static_cast<double>(v.field()));
  return r;
}

QuadVal abs_q(const QuadVal& v) { return v.sign() < 0 ? -v : v; }

namespace {

std::string rat_str(const Rational& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) != 1) os << "/" << boost::multiprecision::denominator(r);
  return os.str();
}

}  // namespace

std::string to_exact_string(const QuadVal& v) {
  if (v.is_rational()) return rat_str(v.ra());
  std::string out;
  bool have_a = !v.ra().is_zero();
  if (have_a) out += rat_str(v.ra());
  if (v.rb().sign() > 0 && have_a) out += "+";
  if (v.rb() == Rational(-1)) {
    out += "-";
  } else if (v.rb() != Rational(1)) {
    out += rat_str(v.rb()) + "*";
  }
  out += "sqrt(" + std::to_string(v.field()) + ")";
  return out;
}

Mat2 mat_identity() { return {QuadVal(1), QuadVal(0), QuadVal(0), QuadVal(1)}; }

Mat2 mat_mul(const Mat2& m, const Mat2& n) {
  return {m.e11 * n.e11 + m.e12 * n.e21, m.e11 * n.e12 + m.e12 * n.e22,
          m.e21 * n.e11 + m.e22 * n.e21, m.e21 * n.e12 + m.e22 * n.e22};
}

Vec2 mat_apply(const Mat2& m, const Vec2& v) {
  return {m.e11 * v.x + m.e12 * v.y, m.e21 * v.x + m.e22 * v.y};
}

QuadVal mat_det(const Mat2& m) { return m.e11 * m.e22 - m.e12 * m.e21; }

Mat2 mat_inverse(const Mat2& m) {
  QuadVal det = mat_det(m);
  if (det.is_zero()) throw DomainError("mat_inverse: singular matrix");
  return {m.e22 / det, -m.e12 / det, -m.e21 / det, m.e11 / det};
}

Mat2 mat_neg(const Mat2& m) { return {-m.e11, -m.e12, -m.e21, -m.e22}; }

bool mat_eq(const Mat2& m, const Mat2& n) {
  return m.e11 == n.e11 && m.e12 == n.e12 && m.e21 == n.e21 && m.e22 == n.e22;
}

Mat2 parabolic_mat(const QuadVal& alpha) { return {QuadVal(1), alpha, QuadVal(0), QuadVal(1)}; }

Mat2 horocycle_mat(const QuadVal& r) { return {QuadVal(1), QuadVal(0), -r, QuadVal(1)}; }

Mat2 upper_mat(const QuadVal& s, const QuadVal& t) {
  return {s, t, QuadVal(0), QuadVal(1) / s};
}

Mat2 diag_mat(const QuadVal& a) { return {a, QuadVal(0), QuadVal(0), QuadVal(1) / a}; }

}  // namespace bcz
