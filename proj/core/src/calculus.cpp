#include <algorithm>
#include <array>

#include "expr_internal.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

Expr diff_atom(const Expr& a, Var v);

Expr diff_normal(const Expr& e, Var v) {
    if (!depends_on(e, v)) return Expr();
    Expr result;
    for (const auto& term : terms(e)) {
        for (std::size_t k = 0; k < term.factors.size(); ++k) {
            const Factor& f = term.factors[k];
            if (!depends_on(f.atom, v)) continue;
            Term rest{term.coeff * CRational(f.exponent), {}};
            for (std::size_t j = 0; j < term.factors.size(); ++j) {
                if (j == k) continue;
                rest.factors.push_back(term.factors[j]);
            }
            Expr part = from_term(rest) * pow(f.atom, f.exponent - Rational(1)) * diff_atom(f.atom, v);
            result += part;
        }
    }
    return result;
}

Expr diff_atom(const Expr& a, Var v) {
    switch (a.kind()) {
        case Expr::Kind::Var: return a.var() == v ? Expr(1) : Expr();
        case Expr::Kind::Const: return Expr();
        case Expr::Kind::Conj: return sym::conj(diff_normal(a.args()[0], v));
        case Expr::Kind::Func: {
            const Expr& u = a.args()[0];
            Expr du = diff_normal(u, v);
            if (du.is_zero_exact()) return Expr();
            switch (a.func()) {
                case Func::exp: return a * du;
                case Func::sin: return sym::cos(u) * du;
                case Func::cos: return -sym::sin(u) * du;
                case Func::tan: return (Expr(1) + a * a) * du;
                case Func::atan: return du / (Expr(1) + u * u);
                case Func::ln: return du / u;
                case Func::sgn: return Expr();
                case Func::abs:
                    if (is_real(u)) return sym::sgn(u) * du;
                    return (sym::conj(u) * du + u * sym::conj(du)) / (Expr(2) * a);
            }
            return Expr();
        }
        default: return diff_normal(a, v);
    }
}

Expr rebuild(const Expr& e, const std::function<Expr(const Expr&)>& leaf) {
    switch (e.kind()) {
        case Expr::Kind::Const: return e;
        case Expr::Kind::Var: return leaf(e);
        case Expr::Kind::Add:
        case Expr::Kind::Mul: {
            std::vector<Expr> args;
            args.reserve(e.args().size());
            for (const auto& a : e.args()) args.push_back(rebuild(a, leaf));
            return e.kind() == Expr::Kind::Add ? Expr::raw_sum(std::move(args)) : Expr::raw_product(std::move(args));
        }
        case Expr::Kind::Pow: return Expr::raw_power(rebuild(e.args()[0], leaf), e.exponent());
        case Expr::Kind::Func: return Expr::raw_function(e.func(), rebuild(e.args()[0], leaf));
        case Expr::Kind::Conj: return Expr::raw_conj(rebuild(e.args()[0], leaf));
    }
    return e;
}

Expr map_raw(const Expr& e, const std::function<std::optional<Expr>(Func, const Expr&)>& fn) {
    switch (e.kind()) {
        case Expr::Kind::Const:
        case Expr::Kind::Var: return e;
        case Expr::Kind::Add:
        case Expr::Kind::Mul: {
            std::vector<Expr> args;
            for (const auto& a : e.args()) args.push_back(map_raw(a, fn));
            return e.kind() == Expr::Kind::Add ? Expr::raw_sum(std::move(args)) : Expr::raw_product(std::move(args));
        }
        case Expr::Kind::Pow: return Expr::raw_power(map_raw(e.args()[0], fn), e.exponent());
        case Expr::Kind::Conj: return Expr::raw_conj(map_raw(e.args()[0], fn));
        case Expr::Kind::Func: {
            Expr arg = normalize(map_raw(e.args()[0], fn));
            if (auto r = fn(e.func(), arg)) return *r;
            return Expr::raw_function(e.func(), arg);
        }
    }
    return e;
}

// ---- integration ----

Expr tvar() { return Expr::t(); }

bool is_t_atom(const Expr& a) { return a.kind() == Expr::Kind::Var && a.var() == Var::t; }

bool is_abs_t(const Expr& a, Func f) {
    return a.kind() == Expr::Kind::Func && a.func() == f && is_t_atom(a.args()[0]);
}

// Coefficients (c0, c1, c2) of a t-polynomial of degree <= 2 with t-free coefficients.
std::optional<std::array<Expr, 3>> quadratic_coeffs(const Expr& q) {
    std::array<Expr, 3> c{};
    for (const auto& term : terms(q)) {
        int deg = 0;
        Term rest{term.coeff, {}};
        for (const auto& f : term.factors) {
            if (is_t_atom(f.atom)) {
                if (!f.exponent.is_integer() || f.exponent.num() < 0 || f.exponent.num() > 2) return std::nullopt;
                deg = static_cast<int>(f.exponent.num());
            } else if (depends_on(f.atom, Var::t)) {
                return std::nullopt;
            } else {
                rest.factors.push_back(f);
            }
        }
        c[deg] += from_term(rest);
    }
    return c;
}

Expr integrate_poly_trig(int n, Func f, const Expr& arg, const Expr& k) {
    Expr tn = pow(tvar(), Rational(n));
    switch (f) {
        case Func::exp: {
            Expr head = tn * sym::exp(arg) / k;
            if (n == 0) return head;
            return head - Expr(n) / k * integrate_poly_trig(n - 1, f, arg, k);
        }
        case Func::sin: {
            Expr head = -tn * sym::cos(arg) / k;
            if (n == 0) return head;
            return head + Expr(n) / k * integrate_poly_trig(n - 1, Func::cos, arg, k);
        }
        case Func::cos: {
            Expr head = tn * sym::sin(arg) / k;
            if (n == 0) return head;
            return head - Expr(n) / k * integrate_poly_trig(n - 1, Func::sin, arg, k);
        }
        default: break;
    }
    throw NotRepresentableError("unsupported integrand");
}

Expr integrate_qpow(const std::array<Expr, 3>& c, const Expr& q, const Rational& p) {
    const Expr& beta = c[1];
    const Expr& alpha = c[2];
    if (p == Rational(-1)) {
        if (alpha.is_zero_exact()) return sym::ln(sym::abs(q)) / beta;
        Expr disc = Expr(4) * alpha * c[0] - beta * beta;
        auto dc = disc.as_constant();
        if (!dc || !dc->is_real() || dc->re.sign() <= 0) throw NotRepresentableError("no antiderivative in grammar");
        Expr root = pow(disc, Rational(1, 2));
        return Expr(2) / root * sym::atan((Expr(2) * alpha * tvar() + beta) / root);
    }
    if (alpha.is_zero_exact()) return pow(q, p + Rational(1)) / (beta * Expr(p + Rational(1)));
    if (p == Rational(-3, 2)) {
        Expr disc = Expr(4) * alpha * c[0] - beta * beta;
        if (disc.is_zero_exact()) throw NotRepresentableError("degenerate quadratic");
        return Expr(2) * (Expr(2) * alpha * tvar() + beta) / (disc * pow(q, Rational(1, 2)));
    }
    throw NotRepresentableError("no antiderivative in grammar");
}

Expr integrate_term(const Term& term) {
    Term outside{term.coeff, {}};
    std::vector<Factor> inside;
    for (const auto& f : term.factors) {
        if (depends_on(f.atom, Var::t)) inside.push_back(f);
        else outside.factors.push_back(f);
    }
    Expr k0 = from_term(outside);
    Expr t = tvar();
    if (inside.empty()) return k0 * t;

    Rational n(0);
    bool has_t = false;
    std::vector<Factor> other;
    for (const auto& f : inside) {
        if (is_t_atom(f.atom)) {
            n = f.exponent;
            has_t = true;
        } else {
            other.push_back(f);
        }
    }
    if (other.empty()) {
        if (n == Rational(-1)) return k0 * sym::ln(sym::abs(t));
        return k0 * pow(t, n + Rational(1)) / Expr(n + Rational(1));
    }
    // |t|^a sgn(t)^s, with an integer power of t folded in as |t|^n sgn(t)^n
    bool all_abs = std::all_of(other.begin(), other.end(), [](const Factor& f) {
        return is_abs_t(f.atom, Func::abs) || is_abs_t(f.atom, Func::sgn);
    });
    if (all_abs && (!has_t || n.is_integer())) {
        Rational a = has_t ? n : Rational(0);
        Rational sg = has_t ? n : Rational(0);
        for (const auto& f : other) {
            if (f.atom.func() == Func::abs) a = a + f.exponent;
            else sg = sg + f.exponent;
        }
        Expr at = sym::abs(t);
        if (a == Rational(-1)) return k0 * pow(sym::sgn(t), sg - Rational(1)) * sym::ln(at);
        return k0 * pow(sym::sgn(t), sg + Rational(1)) * pow(at, a + Rational(1)) / Expr(a + Rational(1));
    }
    if (other.size() == 1 && other[0].exponent.is_one() && n.is_integer() && n.sign() >= 0 &&
        other[0].atom.kind() == Expr::Kind::Func) {
        Func f = other[0].atom.func();
        const Expr& arg = other[0].atom.args()[0];
        if (f == Func::exp || f == Func::sin || f == Func::cos) {
            Expr k = diff(arg, Var::t);
            if (!depends_on(k, Var::t) && !k.is_zero_exact()) {
                return k0 * integrate_poly_trig(static_cast<int>(n.num()), f, arg, k);
            }
        }
        if (f == Func::ln && n != Rational(-1)) {
            Expr darg = diff(arg, Var::t);
            Expr ratio = darg * t / arg;
            if (auto rc = ratio.as_constant()) {
                // d ln(arg) = (r/t) dt, arg ~ |t|^r
                Rational m = n + Rational(1);
                Expr tm = pow(t, m);
                return k0 * (tm / Expr(m) * other[0].atom - Expr(*rc) * tm / Expr(m * m));
            }
        }
    }
    if (other.size() == 1 && (other[0].atom.kind() == Expr::Kind::Add) && n.is_integer() &&
        (n.is_zero() || n.is_one())) {
        const Expr& q = other[0].atom;
        Rational p = other[0].exponent;
        if (auto c = quadratic_coeffs(q)) {
            const Expr& beta = (*c)[1];
            const Expr& alpha = (*c)[2];
            if (n.is_zero()) return k0 * integrate_qpow(*c, q, p);
            if (alpha.is_zero_exact()) {
                // t = (q - c0)/beta
                Term tq{CRational(1), {Factor{q, p + Rational(1)}}};
                Term t0{CRational(1), {Factor{q, p}}};
                return k0 / beta * (integrate_term(tq) - (*c)[0] * integrate_term(t0));
            }
            Expr qprime_part = p == Rational(-1) ? sym::ln(sym::abs(q)) : pow(q, p + Rational(1)) / Expr(p + Rational(1));
            Expr rest = beta.is_zero_exact() ? Expr() : beta * integrate_qpow(*c, q, p);
            return k0 / (Expr(2) * alpha) * (qprime_part - rest);
        }
    }
    throw NotRepresentableError("no antiderivative in grammar for term " + to_string(from_term(term)));
}

}  // namespace

Expr diff(const Expr& e, Var v, int order) {
    Expr r = normalize(e);
    for (int k = 0; k < order; ++k) r = diff_normal(r, v);
    return r;
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) {
    return normalize(rebuild(e, [&](const Expr& leaf) { return leaf.var() == v ? replacement : leaf; }));
}

Expr substitute(const Expr& e, const Expr& t_repl, const Expr& x_repl) {
    return normalize(rebuild(e, [&](const Expr& leaf) { return leaf.var() == Var::t ? t_repl : x_repl; }));
}

Expr map_functions(const Expr& e, const std::function<std::optional<Expr>(Func, const Expr&)>& fn) {
    return normalize(map_raw(e, fn));
}

Expr integrate_t(const Expr& e) {
    Expr result;
    for (const auto& term : terms(e)) result += integrate_term(term);
    Expr check = diff(result, Var::t) - normalize(e);
    if (!is_zero(check)) throw NotRepresentableError("antiderivative verification failed for " + to_string(e));
    return result;
}

}  // namespace schrodclass
