#include "core/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cdgl {

BigInt::BigInt(long long v) {
    if (v == 0) return;
    sign_ = v < 0 ? -1 : 1;
    unsigned long long m = v < 0 ? 0ULL - static_cast<unsigned long long>(v) : static_cast<unsigned long long>(v);
    while (m != 0) {
        mag_.push_back(static_cast<uint32_t>(m & 0xffffffffULL));
        m >>= 32;
    }
}

void BigInt::trim() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) sign_ = 0;
}

int BigInt::cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

std::vector<uint32_t> BigInt::add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> r;
    r.reserve(std::max(a.size(), b.size()) + 1);
    uint64_t carry = 0;
    for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        uint64_t s = carry;
        if (i < a.size()) s += a[i];
        if (i < b.size()) s += b[i];
        r.push_back(static_cast<uint32_t>(s & 0xffffffffULL));
        carry = s >> 32;
    }
    if (carry) r.push_back(static_cast<uint32_t>(carry));
    return r;
}

// requires a >= b
std::vector<uint32_t> BigInt::sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> r;
    r.reserve(a.size());
    int64_t borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        int64_t s = static_cast<int64_t>(a[i]) - borrow - (i < b.size() ? static_cast<int64_t>(b[i]) : 0);
        if (s < 0) {
            s += (1LL << 32);
            borrow = 1;
        } else {
            borrow = 0;
        }
        r.push_back(static_cast<uint32_t>(s));
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<uint32_t> BigInt::mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<uint32_t> r(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        uint64_t carry = 0;
        for (size_t j = 0; j < b.size(); ++j) {
            uint64_t cur = static_cast<uint64_t>(a[i]) * b[j] + r[i + j] + carry;
            r[i + j] = static_cast<uint32_t>(cur & 0xffffffffULL);
            carry = cur >> 32;
        }
        size_t k = i + b.size();
        while (carry) {
            uint64_t cur = r[k] + carry;
            r[k] = static_cast<uint32_t>(cur & 0xffffffffULL);
            carry = cur >> 32;
            ++k;
        }
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<uint32_t> BigInt::shl_mag(const std::vector<uint32_t>& a, size_t bits) {
    if (a.empty()) return {};
    size_t words = bits / 32, rem = bits % 32;
    std::vector<uint32_t> r(words, 0);
    uint32_t carry = 0;
    for (uint32_t w : a) {
        if (rem == 0) {
            r.push_back(w);
        } else {
            r.push_back((w << rem) | carry);
            carry = static_cast<uint32_t>(static_cast<uint64_t>(w) >> (32 - rem));
        }
    }
    if (rem != 0 && carry) r.push_back(carry);
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

size_t BigInt::bit_length() const {
    if (mag_.empty()) return 0;
    size_t bits = (mag_.size() - 1) * 32;
    uint32_t top = mag_.back();
    while (top) {
        ++bits;
        top >>= 1;
    }
    return bits;
}

// Plain shift-and-subtract long division; fine at desk scale.
void BigInt::divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                        std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
    q.clear();
    r = a;
    if (cmp_mag(a, b) < 0) {
        q.clear();
        return;
    }
    BigInt ta, tb;
    ta.mag_ = a;
    tb.mag_ = b;
    size_t shift = ta.bit_length() - tb.bit_length();
    std::vector<uint32_t> cur = shl_mag(b, shift);
    q.assign(shift / 32 + 1, 0);
    for (size_t i = shift + 1; i-- > 0;) {
        if (cmp_mag(r, cur) >= 0) {
            r = sub_mag(r, cur);
            q[i / 32] |= (1u << (i % 32));
        }
        // shift cur right by one bit
        uint32_t carry = 0;
        for (size_t j = cur.size(); j-- > 0;) {
            uint32_t nc = cur[j] & 1u;
            cur[j] = (cur[j] >> 1) | (carry << 31);
            carry = nc;
        }
        while (!cur.empty() && cur.back() == 0) cur.pop_back();
    }
    while (!q.empty() && q.back() == 0) q.pop_back();
}

BigInt BigInt::operator-() const {
    BigInt r = *this;
    r.sign_ = -r.sign_;
    return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
    if (sign_ == 0) return o;
    if (o.sign_ == 0) return *this;
    BigInt r;
    if (sign_ == o.sign_) {
        r.sign_ = sign_;
        r.mag_ = add_mag(mag_, o.mag_);
    } else {
        int c = cmp_mag(mag_, o.mag_);
        if (c == 0) return BigInt();
        if (c > 0) {
            r.sign_ = sign_;
            r.mag_ = sub_mag(mag_, o.mag_);
        } else {
            r.sign_ = o.sign_;
            r.mag_ = sub_mag(o.mag_, mag_);
        }
    }
    r.trim();
    return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
    BigInt r;
    if (sign_ == 0 || o.sign_ == 0) return r;
    r.sign_ = sign_ * o.sign_;
    r.mag_ = mul_mag(mag_, o.mag_);
    r.trim();
    return r;
}

BigInt BigInt::operator/(const BigInt& o) const {
    if (o.sign_ == 0) throw std::domain_error("BigInt: division by zero");
    if (sign_ == 0) return BigInt();
    BigInt q;
    std::vector<uint32_t> qm, rm;
    divmod_mag(mag_, o.mag_, qm, rm);
    q.mag_ = qm;
    q.sign_ = qm.empty() ? 0 : sign_ * o.sign_;
    return q;
}

BigInt BigInt::operator%(const BigInt& o) const {
    if (o.sign_ == 0) throw std::domain_error("BigInt: division by zero");
    if (sign_ == 0) return BigInt();
    BigInt r;
    std::vector<uint32_t> qm, rm;
    divmod_mag(mag_, o.mag_, qm, rm);
    r.mag_ = rm;
    r.sign_ = rm.empty() ? 0 : sign_;
    return r;
}

bool BigInt::operator==(const BigInt& o) const { return sign_ == o.sign_ && mag_ == o.mag_; }

bool BigInt::operator<(const BigInt& o) const {
    if (sign_ != o.sign_) return sign_ < o.sign_;
    int c = cmp_mag(mag_, o.mag_);
    return sign_ >= 0 ? c < 0 : c > 0;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
    a.sign_ = a.mag_.empty() ? 0 : 1;
    b.sign_ = b.mag_.empty() ? 0 : 1;
    while (!b.is_zero()) {
        BigInt t = a % b;
        a = b;
        b = t;
    }
    return a.is_zero() ? BigInt(0) : a;
}

BigInt BigInt::from_decimal(const std::string& digits) {
    BigInt r;
    for (char c : digits) {
        if (c < '0' || c > '9') throw std::invalid_argument("BigInt: bad digit");
        r = r * BigInt(10) + BigInt(c - '0');
    }
    return r;
}

std::string BigInt::to_string() const {
    if (sign_ == 0) return "0";
    std::vector<uint32_t> chunks;
    BigInt cur = *this;
    cur.sign_ = 1;
    BigInt billion(1000000000LL);
    while (!cur.is_zero()) {
        BigInt rem = cur % billion;
        cur = cur / billion;
        chunks.push_back(rem.mag_.empty() ? 0 : rem.mag_[0]);
    }
    std::string s = sign_ < 0 ? "-" : "";
    s += std::to_string(chunks.back());
    for (size_t i = chunks.size() - 1; i-- > 0;) {
        std::string part = std::to_string(chunks[i]);
        s += std::string(9 - part.size(), '0') + part;
    }
    return s;
}

double BigInt::to_double() const {
    double r = 0;
    for (size_t i = mag_.size(); i-- > 0;) r = r * 4294967296.0 + mag_[i];
    return sign_ < 0 ? -r : r;
}

bool BigInt::fits_longlong(long long& out) const {
    if (mag_.size() > 2) return false;
    unsigned long long m = 0;
    if (mag_.size() >= 1) m = mag_[0];
    if (mag_.size() == 2) m |= static_cast<unsigned long long>(mag_[1]) << 32;
    if (sign_ >= 0) {
        if (m > 0x7fffffffffffffffULL) return false;
        out = static_cast<long long>(m);
    } else {
        if (m > 0x8000000000000000ULL) return false;
        out = -static_cast<long long>(m - 1) - 1;
    }
    return true;
}

size_t BigInt::hash() const {
    size_t h = static_cast<size_t>(sign_ + 2);
    for (uint32_t w : mag_) h = h * 1000003u + w;
    return h;
}

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    normalize();
}

void Rational::normalize() {
    if (den_.is_negative()) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_.is_zero()) {
        den_ = BigInt(1);
        return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    if (!(g == BigInt(1))) {
        num_ = num_ / g;
        den_ = den_ / g;
    }
}

Rational Rational::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("Rational: empty literal");
    size_t pos = 0;
    bool neg = false;
    if (text[pos] == '-') {
        neg = true;
        ++pos;
    }
    size_t slash = text.find('/', pos);
    size_t dot = text.find('.', pos);
    Rational r;
    if (slash != std::string::npos) {
        r = Rational(BigInt::from_decimal(text.substr(pos, slash - pos)),
                     BigInt::from_decimal(text.substr(slash + 1)));
    } else if (dot != std::string::npos) {
        std::string ip = text.substr(pos, dot - pos), fp = text.substr(dot + 1);
        if (fp.empty()) throw std::invalid_argument("Rational: bad literal");
        BigInt den(1);
        for (size_t i = 0; i < fp.size(); ++i) den = den * BigInt(10);
        r = Rational(BigInt::from_decimal(ip) * den + BigInt::from_decimal(fp), den);
    } else {
        r = Rational(BigInt::from_decimal(text.substr(pos)), BigInt(1));
    }
    return neg ? -r : r;
}

Rational Rational::from_double(double v) {
    if (!std::isfinite(v)) throw std::domain_error("Rational: non-finite double");
    if (v == 0.0) return Rational(0);
    int exp;
    double m = std::frexp(v, &exp);  // v = m * 2^exp, 0.5 <= |m| < 1
    // 53 doublings make the mantissa integral
    long long mant = static_cast<long long>(std::ldexp(m, 53));
    exp -= 53;
    BigInt num(mant), den(1);
    if (exp >= 0) {
        for (int i = 0; i < exp; ++i) num = num * BigInt(2);
    } else {
        for (int i = 0; i < -exp; ++i) den = den * BigInt(2);
    }
    return Rational(num, den);
}

bool Rational::is_integer() const { return den_ == BigInt(1); }

Rational Rational::operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator*(const Rational& o) const { return Rational(num_ * o.num_, den_ * o.den_); }

Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(num_ * o.den_, den_ * o.num_);
}

bool Rational::operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }

bool Rational::operator<(const Rational& o) const { return num_ * o.den_ < o.num_ * den_; }

bool Rational::operator<=(const Rational& o) const { return *this < o || *this == o; }

std::string Rational::to_string() const {
    if (is_integer()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
}

double Rational::to_double() const { return num_.to_double() / den_.to_double(); }

size_t Rational::hash() const { return num_.hash() * 31 + den_.hash(); }

}  // namespace cdgl
