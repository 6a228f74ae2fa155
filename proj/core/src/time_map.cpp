#include <cmath>

#include <Eigen/Dense>

#include "expr_internal.hpp"
#include "schrodclass/equiv.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

constexpr int kSamples = 17;

double sample_point(TInterval dom, int k) {
    return dom.lo + (dom.hi - dom.lo) * k / (kSamples - 1);
}

// +1 or -1 if e is real and of constant sign at the sample points, else 0.
int constant_sign(const Expr& e, TInterval dom) {
    int s = 0;
    for (int k = 0; k < kSamples; ++k) {
        std::complex<double> v;
        try {
            v = eval(e, sample_point(dom, k), 0.0);
        } catch (const SingularityError&) {
            return 0;
        }
        if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v)) || v.real() == 0.0) return 0;
        int sk = v.real() > 0 ? 1 : -1;
        if (s != 0 && sk != s) return 0;
        s = sk;
    }
    return s;
}

double real_eval(const Expr& e, double t) {
    return eval(e, t, 0.0).real();
}

bool check_inverse(const Expr& T, const Expr& S, TInterval dom) {
    for (int k = 0; k < kSamples; ++k) {
        double t = sample_point(dom, k);
        try {
            double y = real_eval(T, t);
            std::complex<double> back = eval(S, y, 0.0);
            if (std::abs(back - std::complex<double>(t, 0.0)) > 1e-9 * std::max(1.0, std::abs(t))) return false;
        } catch (const SingularityError&) {
            return false;
        }
    }
    return true;
}

std::optional<Expr> mobius_inverse(const Expr& T, TInterval dom) {
    // T (a3 t + a2) = a1 t + a0, null vector of the sampled system.
    Eigen::MatrixXd A(kSamples, 4);
    for (int k = 0; k < kSamples; ++k) {
        double t = sample_point(dom, k);
        double y;
        try {
            y = real_eval(T, t);
        } catch (const SingularityError&) {
            return std::nullopt;
        }
        A(k, 0) = t;
        A(k, 1) = 1.0;
        A(k, 2) = -y * t;
        A(k, 3) = -y;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s(3) > 1e-9 * s(0) || s(2) < 1e-6 * s(0)) return std::nullopt;
    Eigen::Vector4d v = svd.matrixV().col(3);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v /= v(big);
    Rational a[4];
    for (int k = 0; k < 4; ++k) {
        auto r = Rational::from_double(v(k), 10000, 1e-9);
        if (!r) return std::nullopt;
        a[k] = *r;
    }
    Expr t = Expr::t();
    Expr a1(a[0]), a0(a[1]), a3(a[2]), a2(a[3]);
    ProbeBox box;
    box.t_lo = dom.lo;
    box.t_hi = dom.hi;
    if (!is_zero(T * (a3 * t + a2) - (a1 * t + a0), box)) return std::nullopt;
    if ((a[0] * a[3] - a[1] * a[2]).is_zero()) return std::nullopt;
    return (a2 * t - a0) / (a1 - a3 * t);
}

// Solves f(t) = y for t, where f is normalized and y is an expression in the new time.
std::optional<Expr> solve_for_t(const Expr& f, const Expr& y, TInterval dom, int depth) {
    if (depth > 12) return std::nullopt;
    if (f.kind() == Expr::Kind::Var && f.var() == Var::t) return y;
    Expr constant;
    std::optional<Term> dep;
    for (const auto& term : terms(f)) {
        if (!depends_on(from_term(term), Var::t)) {
            constant += from_term(term);
        } else {
            if (dep) return std::nullopt;
            dep = term;
        }
    }
    if (!dep) return std::nullopt;
    Term scale{dep->coeff, {}};
    std::optional<Factor> inner;
    for (const auto& fac : dep->factors) {
        if (!depends_on(fac.atom, Var::t)) {
            scale.factors.push_back(fac);
        } else {
            if (inner) return std::nullopt;
            inner = fac;
        }
    }
    Expr rhs = (y - constant) / from_term(scale);
    const Expr& atom = inner->atom;
    const Rational& e = inner->exponent;
    if (!e.is_one()) {
        int s = constant_sign(atom, dom);
        if (s == 0) return std::nullopt;
        Rational inv = Rational(1) / e;
        if (s > 0) {
            rhs = pow(rhs, inv);
        } else {
            if (!e.is_integer()) return std::nullopt;
            rhs = e.num() % 2 == 0 ? -pow(rhs, inv) : -pow(-rhs, inv);
        }
    }
    switch (atom.kind()) {
        case Expr::Kind::Var: return atom.var() == Var::t ? std::optional<Expr>(rhs) : std::nullopt;
        case Expr::Kind::Add: return solve_for_t(atom, rhs, dom, depth + 1);
        case Expr::Kind::Func: {
            const Expr& arg = atom.args()[0];
            switch (atom.func()) {
                case Func::exp: return solve_for_t(arg, sym::ln(rhs), dom, depth + 1);
                case Func::ln: return solve_for_t(arg, sym::exp(rhs), dom, depth + 1);
                case Func::atan: return solve_for_t(arg, sym::tan(rhs), dom, depth + 1);
                case Func::tan: return solve_for_t(arg, sym::atan(rhs), dom, depth + 1);
                case Func::abs: {
                    int s = constant_sign(arg, dom);
                    if (s == 0) return std::nullopt;
                    return solve_for_t(arg, Expr(s) * rhs, dom, depth + 1);
                }
                default: return std::nullopt;
            }
        }
        default: return std::nullopt;
    }
}

}  // namespace

const char* status_name(MapStatus s) noexcept {
    return s == MapStatus::Exact ? "exact" : "numeric-only";
}

Expr resolve_signs(const Expr& e, TInterval dom, bool keep_abs) {
    auto pass = [&](const Expr& in, bool abs_too) {
        return map_functions(in, [&](Func f, const Expr& arg) -> std::optional<Expr> {
            if ((f != Func::sgn && (!abs_too || f != Func::abs)) || depends_on(arg, Var::x) ||
                !depends_on(arg, Var::t)) {
                return std::nullopt;
            }
            int s = constant_sign(arg, dom);
            if (s == 0) return std::nullopt;
            if (f == Func::sgn) return Expr(s);
            return Expr(s) * arg;
        });
    };
    // Fractional powers of the unfolded arguments reintroduce sgn factors.
    Expr out = pass(e, !keep_abs);
    for (int k = 0; k < 4; ++k) {
        Expr next = pass(out, false);
        if (identical(next, out)) break;
        out = next;
    }
    return out;
}

int eps_prime(const EquivTransform& g, TInterval dom) {
    int s = constant_sign(diff(g.T, Var::t), dom);
    if (s == 0) throw PreconditionError("sgn(T_t) is not constant on the working interval");
    return s;
}

TInterval image_interval(const EquivTransform& g, TInterval dom) {
    double a = real_eval(g.T, dom.lo);
    double b = real_eval(g.T, dom.hi);
    return a < b ? TInterval{a, b} : TInterval{b, a};
}

std::optional<Expr> invert_time_map(const Expr& T, TInterval dom) {
    Expr Tr = resolve_signs(T, dom);
    if (Tr.kind() == Expr::Kind::Var && Tr.var() == Var::t) return Expr::t();
    if (auto m = mobius_inverse(Tr, dom)) {
        if (check_inverse(Tr, *m, dom)) return m;
    }
    if (auto s = solve_for_t(Tr, Expr::t(), dom, 0)) {
        if (check_inverse(Tr, *s, dom)) return s;
    }
    return std::nullopt;
}

double invert_time_numeric(const Expr& T, TInterval dom, double value) {
    double lo = dom.lo;
    double hi = dom.hi;
    double flo = real_eval(T, lo) - value;
    double fhi = real_eval(T, hi) - value;
    double scale = std::max(1.0, std::abs(value));
    if (std::abs(flo) <= 1e-14 * scale) return lo;
    if (std::abs(fhi) <= 1e-14 * scale) return hi;
    if ((flo > 0) == (fhi > 0)) throw PreconditionError("value outside the image of the working interval");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = real_eval(T, mid) - value;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace schrodclass
