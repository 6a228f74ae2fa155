#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>

namespace schrodclass {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Always stored in lowest terms with a positive denominator. Arithmetic is
/// performed in 128-bit intermediates; results that do not fit throw
/// std::overflow_error.
class Rational {
public:
    constexpr Rational() noexcept = default;
    Rational(std::int64_t num) noexcept : num_(num), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    bool is_zero() const noexcept { return num_ == 0; }
    bool is_one() const noexcept { return num_ == 1 && den_ == 1; }
    bool is_integer() const noexcept { return den_ == 1; }
    int sign() const noexcept { return (num_ > 0) - (num_ < 0); }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const;

    /// Largest integer not greater than this value.
    std::int64_t floor() const noexcept;

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    /// Integer power; negative exponents invert.
    Rational pow(std::int64_t e) const;

    /// Exact p/q-th root if it exists in the rationals.
    std::optional<Rational> exact_root(std::int64_t q) const;

    /// Best rational approximation with denominator at most max_den, accepted
    /// only if it reproduces value within tol.
    static std::optional<Rational> from_double(double value, std::int64_t max_den = 10000,
                                               double tol = 1e-9);

    /// Builds from an already reduced pair with positive denominator.
    static Rational reduced(std::int64_t num, std::int64_t den) noexcept {
        Rational r;
        r.num_ = num;
        r.den_ = den;
        return r;
    }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Complex number with exact rational real and imaginary parts.
struct CRational {
    Rational re;
    Rational im;

    CRational() = default;
    CRational(Rational r) : re(r) {}  // NOLINT(implicit)
    CRational(std::int64_t r) : re(r) {}  // NOLINT(implicit)
    CRational(Rational r, Rational i) : re(r), im(i) {}

    static CRational imag_unit() { return {Rational(0), Rational(1)}; }

    bool is_zero() const noexcept { return re.is_zero() && im.is_zero(); }
    bool is_one() const noexcept { return re.is_one() && im.is_zero(); }
    bool is_real() const noexcept { return im.is_zero(); }

    CRational conj() const { return {re, -im}; }
    CRational operator-() const { return {-re, -im}; }
    CRational& operator+=(const CRational& o) { re += o.re; im += o.im; return *this; }
    CRational& operator-=(const CRational& o) { re -= o.re; im -= o.im; return *this; }
    CRational& operator*=(const CRational& o);
    CRational& operator/=(const CRational& o);

    friend CRational operator+(CRational a, const CRational& b) { return a += b; }
    friend CRational operator-(CRational a, const CRational& b) { return a -= b; }
    friend CRational operator*(CRational a, const CRational& b) { return a *= b; }
    friend CRational operator/(CRational a, const CRational& b) { return a /= b; }
    friend bool operator==(const CRational& a, const CRational& b) noexcept = default;

    CRational pow(std::int64_t e) const;
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
    std::string to_string() const;
};

std::strong_ordering compare(const CRational& a, const CRational& b) noexcept;

}  // namespace schrodclass
