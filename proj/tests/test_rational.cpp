#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/rational.hpp"

using namespace cdgl;

TEST_CASE("bigint basic arithmetic") {
    CHECK(BigInt(0).to_string() == "0");
    CHECK((BigInt(123456789) * BigInt(987654321)).to_string() == "121932631112635269");
    CHECK((BigInt(-5) + BigInt(3)).to_string() == "-2");
    CHECK((BigInt(1000000000000LL) / BigInt(7)).to_string() == "142857142857");
    CHECK((BigInt(1000000000000LL) % BigInt(7)).to_string() == "1");
    CHECK(BigInt::gcd(BigInt(48), BigInt(-36)) == BigInt(12));
    CHECK(BigInt(-7) < BigInt(3));
    CHECK(BigInt(3) < BigInt(7));
}

TEST_CASE("bigint agrees with native arithmetic on random values") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        long long a = static_cast<long long>(rng() % 2000001) - 1000000;
        long long b = static_cast<long long>(rng() % 2000001) - 1000000;
        CHECK((BigInt(a) + BigInt(b)).to_string() == std::to_string(a + b));
        CHECK((BigInt(a) * BigInt(b)).to_string() == std::to_string(a * b));
        if (b != 0) {
            CHECK((BigInt(a) / BigInt(b)).to_string() == std::to_string(a / b));
            CHECK((BigInt(a) % BigInt(b)).to_string() == std::to_string(a % b));
        }
    }
}

TEST_CASE("rational normalization and parsing") {
    CHECK(Rational::from_longs(2, 4) == Rational::from_longs(1, 2));
    CHECK(Rational::from_longs(-2, -4) == Rational::from_longs(1, 2));
    CHECK(Rational::from_longs(2, -4).to_string() == "-1/2");
    CHECK(Rational::parse("1.25") == Rational::from_longs(5, 4));
    CHECK(Rational::parse("-3/9") == Rational::from_longs(-1, 3));
    CHECK(Rational::parse("42").to_string() == "42");
    CHECK_THROWS(Rational::parse("1.") );
    CHECK_THROWS((void)Rational(BigInt(1), BigInt(0)));
}

TEST_CASE("rational field laws on random values") {
    std::mt19937_64 rng(11);
    auto rnd = [&] {
        long long n = static_cast<long long>(rng() % 199) - 99;
        long long d = static_cast<long long>(rng() % 98) + 1;
        return Rational::from_longs(n, d);
    };
    for (int i = 0; i < 2000; ++i) {
        Rational a = rnd(), b = rnd(), c = rnd();
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a - a == Rational(0));
        if (!b.is_zero()) CHECK(a / b * b == a);
        CHECK((a < b) == !(b <= a));
    }
}

TEST_CASE("exact double round trip") {
    for (double v : {0.5, -0.125, 3.0, 1e-9, 123456.75}) {
        Rational r = Rational::from_double(v);
        CHECK(r.to_double() == v);
    }
}
