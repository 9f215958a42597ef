#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cdgl {

// Arbitrary-precision signed integer, little-endian base 2^32 magnitude.
// Only the operations the rational layer needs.
class BigInt {
public:
    BigInt() = default;
    BigInt(long long v);
    static BigInt from_decimal(const std::string& digits);

    bool is_zero() const { return sign_ == 0; }
    bool is_negative() const { return sign_ < 0; }
    int sign() const { return sign_; }

    BigInt operator-() const;
    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;
    BigInt operator/(const BigInt& o) const;  // truncated quotient
    BigInt operator%(const BigInt& o) const;  // remainder, sign of dividend

    bool operator==(const BigInt& o) const;
    bool operator!=(const BigInt& o) const { return !(*this == o); }
    bool operator<(const BigInt& o) const;
    bool operator<=(const BigInt& o) const { return *this < o || *this == o; }
    bool operator>(const BigInt& o) const { return o < *this; }
    bool operator>=(const BigInt& o) const { return o <= *this; }

    static BigInt gcd(BigInt a, BigInt b);

    std::string to_string() const;
    double to_double() const;
    // Exact value of an IEEE double with integral value |v| < 2^63 not required;
    // used via Rational::from_double only.
    bool fits_longlong(long long& out) const;

    size_t hash() const;

private:
    int sign_ = 0;                  // -1, 0, +1
    std::vector<uint32_t> mag_;     // empty iff sign_ == 0

    void trim();
    static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static std::vector<uint32_t> mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);
    static void divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                           std::vector<uint32_t>& q, std::vector<uint32_t>& r);
    static std::vector<uint32_t> shl_mag(const std::vector<uint32_t>& a, size_t bits);
    size_t bit_length() const;
    friend class Rational;
};

// Exact rational number, always reduced, denominator > 0.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den);
    static Rational from_longs(long long num, long long den) { return Rational(BigInt(num), BigInt(den)); }

    // Accepts "123", "-4/5", "1.25"; throws std::invalid_argument otherwise.
    static Rational parse(const std::string& text);
    // Exact conversion of a finite double.
    static Rational from_double(double v);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_negative() const { return num_.is_negative(); }
    bool is_integer() const;

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;  // throws on division by zero

    bool operator==(const Rational& o) const;
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const;
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    std::string to_string() const;  // "3", "-4/5"
    double to_double() const;
    size_t hash() const;

private:
    BigInt num_, den_;
    void normalize();
};

}  // namespace cdgl
