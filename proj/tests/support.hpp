#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "schrodclass/equiv.hpp"
#include "schrodclass/expr.hpp"
#include "schrodclass/field.hpp"

namespace schrodclass::testsupport {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    bool coin() { return integer(0, 1) == 1; }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

    /// Nonzero small rational p/q.
    Rational rational(int max_num = 3, int max_den = 3) {
        int p = 0;
        while (p == 0) p = integer(-max_num, max_num);
        return Rational(p, integer(1, max_den));
    }

    /// Polynomial in t of degree <= deg with small rational coefficients.
    Expr poly_t(int deg) {
        Expr out;
        for (int k = 0; k <= deg; ++k) {
            if (coin()) out += Expr(rational()) * pow(Expr::t(), Rational(k));
        }
        return out;
    }

    /// Real t-function: polynomial, optionally times exp, sin or cos of t.
    Expr t_function() {
        Expr p = poly_t(2);
        switch (integer(0, 4)) {
            case 0: return p + Expr(rational()) * sym::exp(Expr::t());
            case 1: return p + Expr(rational()) * sym::sin(Expr::t());
            case 2: return p + Expr(rational()) * sym::cos(Expr::t());
            default: return p;
        }
    }

    StructuredField z_free_field(bool polynomial_only = false) {
        StructuredField q;
        auto pick = [&] { return polynomial_only ? poly_t(integer(0, 3)) : t_function(); };
        q.tau = pick();
        q.chi = pick();
        q.sigma = pick();
        q.rho = pick();
        return q;
    }

    /// Elementary-factor composition with rational-coefficient parameters;
    /// T is affine so that every factor is invertible in the grammar.
    EquivTransform elementary(TInterval dom = {}) {
        EquivTransform g;
        int factors = integer(1, 3);
        for (int k = 0; k < factors; ++k) {
            EquivTransform f;
            switch (integer(0, 4)) {
                case 0: f = EquivTransform::time(Expr(rational()) * Expr::t() + Expr(rational())); break;
                case 1: f = EquivTransform::shift(poly_t(2)); break;
                case 2: f = EquivTransform::phase(poly_t(2)); break;
                case 3: f = EquivTransform::amplitude(poly_t(2)); break;
                default: f = EquivTransform::space_reflection(); break;
            }
            g = compose(g, f, dom);
        }
        return g;
    }

    /// Random potential from families the classifier splits exactly.
    Expr potential() {
        const Expr t = Expr::t();
        const Expr x = Expr::x();
        const Expr i = Expr::i();
        Expr c = Expr(rational());
        switch (integer(0, 11)) {
            case 0: return Expr(rational()) * pow(x, Rational(3)) + poly_t(1) * x;
            case 1: return c * sym::exp(x) + Expr(rational());
            case 2: return c * sym::sin(x);
            case 3: return c * pow(x, Rational(-2));
            case 4: return c * i * pow(x, Rational(-2));
            case 5: return i * poly_t(2) * x;
            case 6: return Expr(Rational(1, 4)) * x * x + i * c * x;
            case 7: return Expr(Rational(-1, 4)) * x * x + i * c * x;
            case 8: return i * c * x + poly_t(1);
            case 9: return poly_t(1) * x * x + poly_t(1) * x + poly_t(1);
            case 10: return c * pow(x, Rational(4)) + Expr(rational()) * t;
            default: return c * sym::exp(x) + poly_t(1) * x;
        }
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

/// Bracket of the expanded vector fields tau dt + xi dx + F psi dpsi + c.c.
inline CoefficientForm coefficient_bracket(const StructuredField& a, const StructuredField& b) {
    CoefficientForm fa = coefficient_form(a);
    CoefficientForm fb = coefficient_form(b);
    auto apply = [](const CoefficientForm& f, const Expr& e) {
        return f.tau * diff(e, Var::t) + f.xi * diff(e, Var::x);
    };
    CoefficientForm out;
    out.tau = apply(fa, fb.tau) - apply(fb, fa.tau);
    out.xi = apply(fa, fb.xi) - apply(fb, fa.xi);
    out.multiplier = apply(fa, fb.multiplier) - apply(fb, fa.multiplier);
    return out;
}

/// Closed-form commutator agrees with the coefficient-level bracket.
inline bool bracket_consistent(const StructuredField& a, const StructuredField& b) {
    CoefficientForm closed = coefficient_form(commutator(a, b));
    CoefficientForm direct = coefficient_bracket(a, b);
    return is_zero(closed.tau - direct.tau) && is_zero(closed.xi - direct.xi) &&
           is_zero(closed.multiplier - direct.multiplier);
}

inline StructuredField jacobi_sum(const StructuredField& a, const StructuredField& b, const StructuredField& c) {
    return commutator(commutator(a, b), c) + commutator(commutator(b, c), a) + commutator(commutator(c, a), b);
}

inline bool is_zero_field(const StructuredField& q) {
    return same_field(q, StructuredField{});
}

}  // namespace schrodclass::testsupport
