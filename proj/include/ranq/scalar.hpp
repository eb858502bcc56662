// Exact arithmetic over Q(t), the field of rational functions in one
// formal variable t.  t stands in for 2*pi*i so that all monodromy
// exponentials stay exact; no floating point anywhere.
#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace ranq {

using Rat = mpq_class;

Rat rat(long num, long den = 1);
std::string rat_str(const Rat& r);

// Dense univariate polynomial over Q, coefficients low degree first,
// no trailing zeros (zero polynomial = empty coefficient vector).
class Poly {
public:
    Poly() = default;
    Poly(Rat constant);
    explicit Poly(std::vector<Rat> coeffs);

    static Poly variable();  // t

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
    const Rat& coeff(int k) const;
    const std::vector<Rat>& coeffs() const { return c_; }
    Rat leading() const;

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    bool operator==(const Poly& o) const { return c_ == o.c_; }

    // Euclidean division; o must be nonzero.
    static void divmod(const Poly& a, const Poly& b, Poly& q, Poly& r);
    static Poly gcd(const Poly& a, const Poly& b);  // monic normal form

    Poly monic() const;
    std::string str() const;  // integer-coefficient content pulled out by Scalar

private:
    void trim();
    std::vector<Rat> c_;
};

// Element of Q(t) in canonical form: denominator monic, gcd(num, den) = 1.
// Zero is 0/1.  Equality of canonical forms is coefficient-wise equality.
class Scalar {
public:
    Scalar() : num_(), den_(Rat(1)) {}
    Scalar(long v) : num_(Rat(v)), den_(Rat(1)) {}
    Scalar(const Rat& v) : num_(v), den_(Rat(1)) {}
    Scalar(Poly num, Poly den);

    static Scalar tau();                     // t
    static Scalar of(long num, long den);    // rational constant

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const;
    bool is_rational_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }
    Rat rational_value() const;  // requires is_rational_constant()

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    Scalar operator-() const;
    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator/(const Scalar& o) const;  // throws on division by zero
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
    Scalar& operator/=(const Scalar& o) { return *this = *this / o; }
    bool operator==(const Scalar& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    Scalar inverse() const;

    // Substitute t := 0 (constant term of the rational function).  Defined
    // whenever the denominator does not vanish at 0.
    Scalar at_tau_zero() const;

    // Serialization: "p(t)/q(t)" with integer coefficients, e.g. "(3*t^2+2)/6".
    std::string str() const;
    static Scalar parse(const std::string& s);  // exact round-trip of str()

private:
    void normalize();
    Poly num_, den_;
};

Scalar operator*(long a, const Scalar& s);

}  // namespace ranq
