#include <cmath>
#include <random>

#include "expr_internal.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

using cd = std::complex<double>;

cd checked(cd v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SingularityError("non-finite value");
    return v;
}

cd ipow(cd b, std::int64_t n) {
    if (n < 0) {
        if (b == cd(0.0, 0.0)) throw SingularityError("division by zero");
        return cd(1.0, 0.0) / ipow(b, -n);
    }
    cd r(1.0, 0.0);
    while (n > 0) {
        if (n & 1) r *= b;
        n >>= 1;
        if (n > 0) b *= b;
    }
    return r;
}

cd eval_pow(cd b, const Rational& q) {
    if (q.is_integer()) return ipow(b, q.num());
    if (b == cd(0.0, 0.0)) {
        if (q.sign() > 0) return cd(0.0, 0.0);
        throw SingularityError("division by zero");
    }
    if (b.imag() == 0.0) {
        b = cd(b.real(), 0.0);
        if (b.real() > 0.0) return cd(std::pow(b.real(), q.to_double()), 0.0);
    }
    return std::pow(b, q.to_double());
}

cd eval_rec(const Expr& e, double t, double x) {
    switch (e.kind()) {
        case Expr::Kind::Const: return e.value().to_complex();
        case Expr::Kind::Var: return cd(e.var() == Var::t ? t : x, 0.0);
        case Expr::Kind::Add: {
            cd s(0.0, 0.0);
            for (const auto& a : e.args()) s += eval_rec(a, t, x);
            return s;
        }
        case Expr::Kind::Mul: {
            cd p(1.0, 0.0);
            for (const auto& a : e.args()) p *= eval_rec(a, t, x);
            return p;
        }
        case Expr::Kind::Pow: return checked(eval_pow(eval_rec(e.args()[0], t, x), e.exponent()));
        case Expr::Kind::Conj: return std::conj(eval_rec(e.args()[0], t, x));
        case Expr::Kind::Func: {
            cd u = eval_rec(e.args()[0], t, x);
            switch (e.func()) {
                case Func::exp: return checked(std::exp(u));
                case Func::sin: return checked(std::sin(u));
                case Func::cos: return checked(std::cos(u));
                case Func::tan: {
                    if (std::abs(std::cos(u)) == 0.0) throw SingularityError("tan pole");
                    return checked(std::tan(u));
                }
                case Func::atan: return checked(std::atan(u));
                case Func::ln:
                    if (u.imag() == 0.0 && u.real() <= 0.0) throw SingularityError("ln of nonpositive value");
                    return checked(std::log(u));
                case Func::abs: return cd(std::abs(u), 0.0);
                case Func::sgn:
                    if (u.real() == 0.0) throw SingularityError("sgn at zero");
                    return cd(u.real() > 0.0 ? 1.0 : -1.0, 0.0);
            }
        }
    }
    return cd(0.0, 0.0);
}

// Sum of magnitudes of the top-level terms; sets the scale for the zero test.
double term_scale(const Expr& e, double t, double x) {
    if (e.kind() != Expr::Kind::Add) return std::abs(eval_rec(e, t, x));
    double s = 0.0;
    for (const auto& a : e.args()) s += std::abs(eval_rec(a, t, x));
    return s;
}

bool is_laurent_polynomial(const Expr& e) {
    for (const auto& term : terms(e)) {
        for (const auto& f : term.factors) {
            if (f.atom.kind() != Expr::Kind::Var || !f.exponent.is_integer()) return false;
        }
    }
    return true;
}

}  // namespace

std::complex<double> eval(const Expr& e, double t, double x) {
    return checked(eval_rec(e, t, x));
}

ZeroTest zero_test(const Expr& e, const ProbeBox& box) {
    Expr n = normalize(e);
    if (n.is_zero_exact()) return {true, Certainty::Exact};
    if (is_laurent_polynomial(n)) return {false, Certainty::Exact};
    std::mt19937_64 rng(probe_seed());
    std::uniform_real_distribution<double> ut(box.t_lo, box.t_hi);
    std::uniform_real_distribution<double> ux(box.x_lo, box.x_hi);
    int valid = 0;
    int attempts = 0;
    const int max_attempts = box.probes * 20;
    while (valid < box.probes && attempts < max_attempts) {
        ++attempts;
        double t = ut(rng);
        double x = ux(rng);
        try {
            cd v = eval(n, t, x);
            double scale = std::max(1.0, term_scale(n, t, x));
            if (std::abs(v) > box.tolerance * scale) return {false, Certainty::Probabilistic};
            ++valid;
        } catch (const SingularityError&) {
            continue;
        }
    }
    if (valid < box.probes) throw InconclusiveError("not enough nonsingular probe points");
    return {true, Certainty::Probabilistic};
}

bool is_zero(const Expr& e, const ProbeBox& box) {
    return zero_test(e, box).zero;
}

}  // namespace schrodclass
