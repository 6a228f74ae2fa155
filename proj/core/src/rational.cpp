#include "schrodclass/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace schrodclass {

namespace {

__extension__ typedef __int128 i128;

std::int64_t narrow(i128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min() + 1) {
        throw std::overflow_error("rational arithmetic overflow");
    }
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 r = a % b;
        a = b;
        b = r;
    }
    return a;
}

Rational make(i128 num, i128 den) {
    if (den == 0) throw std::domain_error("division by zero");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational::reduced(narrow(num), narrow(den));
}

std::optional<std::int64_t> integer_root(std::int64_t v, std::int64_t q) {
    if (v < 0) {
        if (q % 2 == 0) return std::nullopt;
        auto r = integer_root(-v, q);
        if (!r) return std::nullopt;
        return -*r;
    }
    if (v == 0 || v == 1) return v;
    auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / static_cast<double>(q))));
    for (std::int64_t c = std::max<std::int64_t>(0, guess - 1); c <= guess + 1; ++c) {
        i128 p = 1;
        bool over = false;
        for (std::int64_t k = 0; k < q; ++k) {
            p *= c;
            if (p > v) { over = true; break; }
        }
        if (!over && p == v) return c;
    }
    return std::nullopt;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    *this = make(num, den);
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::int64_t Rational::floor() const noexcept {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

Rational Rational::operator-() const {
    return make(-static_cast<i128>(num_), den_);
}

Rational& Rational::operator+=(const Rational& o) {
    *this = make(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_,
                 static_cast<i128>(den_) * o.den_);
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    *this = make(static_cast<i128>(num_) * o.den_ - static_cast<i128>(o.num_) * den_,
                 static_cast<i128>(den_) * o.den_);
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    *this = make(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.num_ == 0) throw std::domain_error("division by zero");
    *this = make(static_cast<i128>(num_) * o.den_, static_cast<i128>(den_) * o.num_);
    return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational Rational::pow(std::int64_t e) const {
    if (e == 0) return Rational(1);
    Rational base = e < 0 ? Rational(1) / *this : *this;
    std::int64_t n = e < 0 ? -e : e;
    Rational result(1);
    while (n > 0) {
        if (n & 1) result *= base;
        n >>= 1;
        if (n > 0) base *= base;
    }
    return result;
}

std::optional<Rational> Rational::exact_root(std::int64_t q) const {
    if (q <= 0) return std::nullopt;
    if (q == 1) return *this;
    auto n = integer_root(num_, q);
    auto d = integer_root(den_, q);
    if (!n || !d) return std::nullopt;
    return Rational(*n, *d);
}

std::optional<Rational> Rational::from_double(double value, std::int64_t max_den, double tol) {
    if (!std::isfinite(value) || std::abs(value) > 1e12) return std::nullopt;
    // Continued-fraction convergents.
    double x = value;
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        double a_d = std::floor(x);
        auto a = static_cast<std::int64_t>(a_d);
        std::int64_t h2 = a * h1 + h0;
        std::int64_t k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - value) <= tol * std::max(1.0, std::abs(value))) {
            return Rational(h1, k1);
        }
        double frac = x - a_d;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    if (k1 != 0 && std::abs(static_cast<double>(h1) / static_cast<double>(k1) - value) <= tol * std::max(1.0, std::abs(value))) {
        return Rational(h1, k1);
    }
    return std::nullopt;
}

CRational& CRational::operator*=(const CRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = r;
    im = i;
    return *this;
}

CRational& CRational::operator/=(const CRational& o) {
    Rational d = o.re * o.re + o.im * o.im;
    if (d.is_zero()) throw std::domain_error("division by zero");
    Rational r = (re * o.re + im * o.im) / d;
    Rational i = (im * o.re - re * o.im) / d;
    re = r;
    im = i;
    return *this;
}

CRational CRational::pow(std::int64_t e) const {
    if (e == 0) return CRational(1);
    CRational base = e < 0 ? CRational(1) / *this : *this;
    std::int64_t n = e < 0 ? -e : e;
    CRational result(1);
    while (n > 0) {
        if (n & 1) result *= base;
        n >>= 1;
        if (n > 0) base *= base;
    }
    return result;
}

std::string CRational::to_string() const {
    if (im.is_zero()) return re.to_string();
    std::string imag = im.is_one() ? "i" : (im == Rational(-1) ? "-i" : im.to_string() + "*i");
    if (re.is_zero()) return imag;
    return re.to_string() + (im.sign() > 0 ? "+" : "") + imag;
}

std::strong_ordering compare(const CRational& a, const CRational& b) noexcept {
    if (auto c = a.re <=> b.re; c != 0) return c;
    return a.im <=> b.im;
}

}  // namespace schrodclass
