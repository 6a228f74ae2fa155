// Normal form: a sum of monomials coeff * prod atom^q. Atoms are variables,
// function nodes with normalized arguments, conj nodes that could not be
// pushed down, and compound bases (sums, products, constants) carrying a
// non-integer or negative exponent.
#include <algorithm>

#include "expr_internal.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass::detail {

namespace {

const CRational kOne(1);
const CRational kI = CRational::imag_unit();

Rational mod2(const Rational& q) {
    Rational half = q / Rational(2);
    return q - Rational(2 * half.floor());
}

Poly constant_poly(const CRational& c) {
    Poly p;
    if (!c.is_zero()) p.emplace(Monomial{}, c);
    return p;
}

Poly atom_poly(const Expr& atom, const Rational& q = Rational(1)) {
    Poly p;
    p.emplace(Monomial{Factor{atom, q}}, kOne);
    return p;
}

Expr const_atom(const CRational& v) {
    Node n;
    n.kind = Expr::Kind::Const;
    n.value = v;
    n.normal = true;
    return make_node(std::move(n));
}

Expr conj_atom(const Expr& normal_arg) {
    Node n;
    n.kind = Expr::Kind::Conj;
    n.args = {normal_arg};
    n.normal = true;
    return make_node(std::move(n));
}

Expr factor_node(const Factor& f) {
    if (f.exponent.is_one()) return f.atom;
    Node n;
    n.kind = Expr::Kind::Pow;
    n.exponent = f.exponent;
    n.args = {f.atom};
    n.normal = true;
    return make_node(std::move(n));
}

Factor read_factor(const Expr& e) {
    if (e.kind() == Expr::Kind::Pow) return Factor{e.args()[0], e.exponent()};
    return Factor{e, Rational(1)};
}

std::pair<Monomial, CRational> read_term(const Expr& e) {
    if (e.kind() == Expr::Kind::Const) return {Monomial{}, e.value()};
    Monomial m;
    CRational c(1);
    if (e.kind() == Expr::Kind::Mul) {
        for (const auto& a : e.args()) {
            if (a.kind() == Expr::Kind::Const) {
                c *= a.value();
            } else {
                m.push_back(read_factor(a));
            }
        }
    } else {
        m.push_back(read_factor(e));
    }
    return {std::move(m), c};
}

Poly read_normal(const Expr& e) {
    Poly p;
    if (e.kind() == Expr::Kind::Add) {
        for (const auto& a : e.args()) {
            auto [m, c] = read_term(a);
            p.emplace(std::move(m), c);
        }
    } else {
        auto [m, c] = read_term(e);
        if (!c.is_zero()) p.emplace(std::move(m), c);
    }
    return p;
}

bool leading_negative(const Poly& p) {
    if (p.empty()) return false;
    const CRational& c = p.begin()->second;
    return c.re.sign() < 0 || (c.re.is_zero() && c.im.sign() < 0);
}

// n = r^d * s, extracting small prime powers only.
std::pair<std::int64_t, std::int64_t> extract_power(std::int64_t n, std::int64_t d) {
    std::int64_t r = 1;
    std::int64_t s = 1;
    for (std::int64_t p = 2; p <= 100000 && p * p <= n; ++p) {
        int k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        for (int j = 0; j < k / d; ++j) r *= p;
        for (int j = 0; j < k % d; ++j) s *= p;
    }
    if (n > 1) {
        if (d == 1) r *= n; else s *= n;
    }
    return {r, s};
}

Poly pow_poly(const Poly& p, const Rational& q);
Poly func_poly(Func f, const Expr& arg);
Poly conj_poly(const Poly& p);
bool struct_real(const Poly& p);
bool atom_real(const Expr& a);
SignInfo sign_atom(const Expr& a);
SignInfo sign_poly(const Poly& p);

bool is_nonneg(SignInfo s) { return s != SignInfo::Unknown; }

void merge_factors(Monomial& fs) {
    std::sort(fs.begin(), fs.end(), [](const Factor& a, const Factor& b) { return compare(a.atom, b.atom) < 0; });
    Monomial out;
    for (auto& f : fs) {
        if (!out.empty() && compare(out.back().atom, f.atom) == 0) {
            out.back().exponent += f.exponent;
        } else {
            out.push_back(f);
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Factor& f) { return f.exponent.is_zero(); }), out.end());
    fs = std::move(out);
}

bool is_var_func(const Expr& a, Func f, Var v) {
    return a.kind() == Expr::Kind::Func && a.func() == f && a.args()[0].kind() == Expr::Kind::Var &&
           a.args()[0].var() == v;
}

// Rewrites u^k |u|^e sgn(u)^s as u^E or |u|^E sgn(u)^S. Returns true if changed.
bool canon_var(Monomial& fs, Var v) {
    int iu = -1, ia = -1, is = -1;
    for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
        const Expr& a = fs[k].atom;
        if (a.kind() == Expr::Kind::Var && a.var() == v) iu = k;
        else if (is_var_func(a, Func::abs, v)) ia = k;
        else if (is_var_func(a, Func::sgn, v)) is = k;
    }
    if (ia < 0 && is < 0) return false;
    Rational k = iu >= 0 ? fs[iu].exponent : Rational(0);
    Rational e = ia >= 0 ? fs[ia].exponent : Rational(0);
    Rational s = is >= 0 ? fs[is].exponent : Rational(0);
    if (!k.is_integer() || !s.is_integer()) return false;
    Rational E = k + e;
    std::int64_t S = ((k.num() + s.num()) % 2 + 2) % 2;
    Monomial repl;
    Expr u = Expr::variable(v);
    if (E.is_integer() && ((E.num() % 2 + 2) % 2) == S) {
        if (!E.is_zero()) repl.push_back(Factor{u, E});
    } else {
        if (!E.is_zero()) repl.push_back(Factor{atom_func(Func::abs, u), E});
        if (S == 1) repl.push_back(Factor{atom_func(Func::sgn, u), Rational(1)});
    }
    Monomial old;
    for (int idx : {iu, ia, is}) {
        if (idx >= 0) old.push_back(fs[idx]);
    }
    merge_factors(old);
    merge_factors(repl);
    bool same = old.size() == repl.size();
    for (std::size_t j = 0; same && j < old.size(); ++j) {
        same = compare(old[j].atom, repl[j].atom) == 0 && old[j].exponent == repl[j].exponent;
    }
    if (same) return false;
    Monomial out;
    for (int j = 0; j < static_cast<int>(fs.size()); ++j) {
        if (j != iu && j != ia && j != is) out.push_back(fs[j]);
    }
    for (auto& f : repl) out.push_back(f);
    fs = std::move(out);
    return true;
}

Poly canon(CRational c, Monomial fs) {
    if (c.is_zero()) return {};
    for (int iter = 0; iter < 32; ++iter) {
        merge_factors(fs);
        bool changed = false;
        Monomial out;
        std::vector<Poly> pending;
        Poly expsum;
        int exp_count = 0;
        bool exp_changed = false;
        for (const auto& [a, q] : fs) {
            switch (a.kind()) {
                case Expr::Kind::Const: {
                    const CRational& v = a.value();
                    if (q.is_integer()) {
                        c *= v.pow(q.num());
                        changed = true;
                    } else if (v.is_real() && v.re.sign() > 0) {
                        const Rational& r = v.re;
                        if (r.is_integer() && r > Rational(1) && q > Rational(0) && q < Rational(1)) {
                            auto [root, rest] = extract_power(r.num(), q.den());
                            if (root != 1) {
                                c *= Rational(root).pow(q.num());
                                if (rest != 1) out.push_back(Factor{const_atom(CRational(rest)), q});
                                changed = true;
                            } else {
                                out.push_back(Factor{a, q});
                            }
                        } else {
                            std::int64_t fl = q.floor();
                            Rational f = q - Rational(fl);
                            c *= r.pow(fl);
                            if (r.num() != 1) out.push_back(Factor{const_atom(CRational(r.num())), f});
                            if (r.den() != 1) {
                                out.push_back(Factor{const_atom(CRational(r.den())), Rational(1) - f});
                                c /= CRational(r.den());
                            }
                            changed = true;
                        }
                    } else if (v.is_real() && v.re == Rational(-1)) {
                        Rational m = mod2(q);
                        if (m.is_zero()) {
                            changed = true;
                        } else if (m == Rational(1)) {
                            c = -c;
                            changed = true;
                        } else if (m == Rational(1, 2)) {
                            c *= kI;
                            changed = true;
                        } else if (m == Rational(3, 2)) {
                            c *= -kI;
                            changed = true;
                        } else {
                            if (m != q) changed = true;
                            out.push_back(Factor{a, m});
                        }
                    } else if (v.is_real()) {
                        out.push_back(Factor{const_atom(CRational(-v.re)), q});
                        out.push_back(Factor{const_atom(CRational(-1)), q});
                        changed = true;
                    } else {
                        out.push_back(Factor{a, q});
                    }
                    break;
                }
                case Expr::Kind::Add:
                    if (q.is_integer() && q.sign() > 0) {
                        pending.push_back(pow_poly(read_normal(a), q));
                        changed = true;
                    } else {
                        out.push_back(Factor{a, q});
                    }
                    break;
                case Expr::Kind::Mul:
                case Expr::Kind::Pow:
                    if (q.is_integer()) {
                        pending.push_back(pow_poly(read_normal(a), q));
                        changed = true;
                    } else {
                        out.push_back(Factor{a, q});
                    }
                    break;
                case Expr::Kind::Func:
                    if (a.func() == Func::exp && (q.is_integer() || struct_real(read_normal(a.args()[0])))) {
                        expsum = poly_add(std::move(expsum), poly_scale(read_normal(a.args()[0]), CRational(q)));
                        ++exp_count;
                        if (!q.is_one()) exp_changed = true;
                        break;
                    }
                    if (a.func() == Func::sgn) {
                        Rational m = mod2(q);
                        if (m.is_zero()) {
                            changed = true;
                            break;
                        }
                        if (m != q) changed = true;
                        out.push_back(Factor{a, m});
                        break;
                    }
                    out.push_back(Factor{a, q});
                    break;
                default:
                    out.push_back(Factor{a, q});
                    break;
            }
        }
        if (exp_count > 0) {
            if (exp_count > 1) exp_changed = true;
            Poly rest;
            for (const auto& [m, k] : expsum) {
                if (m.size() == 1 && m[0].exponent.is_one() && m[0].atom.kind() == Expr::Kind::Func &&
                    m[0].atom.func() == Func::ln && k.is_real() &&
                    is_nonneg(sign_poly(read_normal(m[0].atom.args()[0])))) {
                    pending.push_back(pow_poly(read_normal(m[0].atom.args()[0]), k.re));
                    exp_changed = true;
                } else {
                    rest.emplace(m, k);
                }
            }
            if (!rest.empty()) out.push_back(Factor{atom_func(Func::exp, from_poly(rest)), Rational(1)});
            else exp_changed = true;
        }
        if (exp_changed) changed = true;
        if (canon_var(out, Var::t)) changed = true;
        if (canon_var(out, Var::x)) changed = true;
        if (!pending.empty()) {
            Poly result;
            result.emplace(Monomial{}, c);
            Poly base = std::move(result);
            Poly tail;
            merge_factors(out);
            tail.emplace(out, kOne);
            base = poly_mul(base, tail);
            for (const auto& pp : pending) base = poly_mul(base, pp);
            return base;
        }
        fs = std::move(out);
        if (!changed) break;
    }
    merge_factors(fs);
    Poly p;
    p.emplace(std::move(fs), c);
    return p;
}

bool factor_real(const Factor& f) {
    if (f.exponent.is_integer()) return atom_real(f.atom);
    return is_nonneg(sign_atom(f.atom));
}

bool struct_real(const Poly& p) {
    for (const auto& [m, c] : p) {
        if (!c.is_real()) return false;
        for (const auto& f : m) {
            if (!factor_real(f)) return false;
        }
    }
    return true;
}

bool atom_real(const Expr& a) {
    switch (a.kind()) {
        case Expr::Kind::Var: return true;
        case Expr::Kind::Const: return a.value().is_real();
        case Expr::Kind::Conj: return false;
        case Expr::Kind::Func:
            switch (a.func()) {
                case Func::abs:
                case Func::sgn: return true;
                case Func::ln: return is_nonneg(sign_poly(read_normal(a.args()[0])));
                default: return struct_real(read_normal(a.args()[0]));
            }
        default: return struct_real(read_normal(a));
    }
}

SignInfo sign_atom(const Expr& a) {
    switch (a.kind()) {
        case Expr::Kind::Const:
            return a.value().is_real() && a.value().re.sign() > 0 ? SignInfo::Positive : SignInfo::Unknown;
        case Expr::Kind::Func:
            if (a.func() == Func::abs) return SignInfo::NonNegative;
            if (a.func() == Func::exp && struct_real(read_normal(a.args()[0]))) return SignInfo::Positive;
            return SignInfo::Unknown;
        case Expr::Kind::Add:
        case Expr::Kind::Mul:
        case Expr::Kind::Pow: return sign_poly(read_normal(a));
        default: return SignInfo::Unknown;
    }
}

SignInfo sign_factor(const Factor& f) {
    SignInfo s = sign_atom(f.atom);
    if (s != SignInfo::Unknown) return s;
    if (f.exponent.is_integer() && f.exponent.num() % 2 == 0 && atom_real(f.atom)) return SignInfo::NonNegative;
    return SignInfo::Unknown;
}

SignInfo sign_poly(const Poly& p) {
    if (p.empty()) return SignInfo::NonNegative;
    // c2 v^2 + c1 v + c0 with c2 > 0 and negative discriminant
    {
        Rational c[3];
        bool quad = true;
        std::optional<Var> var;
        for (const auto& [m, k] : p) {
            if (!k.is_real() || m.size() > 1) {
                quad = false;
                break;
            }
            int deg = 0;
            if (m.size() == 1) {
                const Factor& f = m[0];
                if (f.atom.kind() != Expr::Kind::Var || !f.exponent.is_integer() || f.exponent.num() < 1 ||
                    f.exponent.num() > 2 || (var && *var != f.atom.var())) {
                    quad = false;
                    break;
                }
                var = f.atom.var();
                deg = static_cast<int>(f.exponent.num());
            }
            c[deg] = k.re;
        }
        if (quad && c[2].sign() > 0 && (c[1] * c[1] - Rational(4) * c[2] * c[0]).sign() < 0) {
            return SignInfo::Positive;
        }
    }
    bool positive_const = false;
    bool all_positive = true;
    for (const auto& [m, c] : p) {
        if (!c.is_real() || c.re.sign() <= 0) return SignInfo::Unknown;
        if (m.empty()) positive_const = true;
        for (const auto& f : m) {
            SignInfo s = sign_factor(f);
            if (s == SignInfo::Unknown) return SignInfo::Unknown;
            if (s != SignInfo::Positive) all_positive = false;
        }
    }
    if (positive_const || (p.size() == 1 && all_positive)) return SignInfo::Positive;
    return SignInfo::NonNegative;
}

Poly pow_poly(const Poly& p, const Rational& q) {
    if (q.is_zero()) return constant_poly(kOne);
    if (p.empty()) {
        if (q.sign() > 0) return {};
        throw SingularityError("zero raised to a nonpositive power");
    }
    if (p.size() == 1) {
        const auto& [m, c] = *p.begin();
        if (q.is_integer()) {
            Monomial fs = m;
            for (auto& f : fs) f.exponent *= q;
            return canon(c.pow(q.num()), std::move(fs));
        }
        Monomial out;
        Monomial rest;
        CRational rc(1);
        if (c.is_real() && c.re.sign() > 0) {
            if (!c.is_one()) out.push_back(Factor{const_atom(c), q});
        } else if (c.is_real()) {
            if (c.re != Rational(-1)) out.push_back(Factor{const_atom(CRational(-c.re)), q});
            rc = CRational(-1);
        } else {
            rc = c;
        }
        for (const auto& f : m) {
            if (is_nonneg(sign_atom(f.atom))) {
                out.push_back(Factor{f.atom, f.exponent * q});
            } else if (f.exponent.is_integer() && atom_real(f.atom)) {
                Poly ab = func_poly(Func::abs, f.atom);
                if (ab.size() == 1 && ab.begin()->first.size() == 1 && ab.begin()->second.is_one()) {
                    const Factor& af = ab.begin()->first[0];
                    out.push_back(Factor{af.atom, af.exponent * f.exponent * q});
                } else {
                    rest.push_back(f);
                    continue;
                }
                if (f.exponent.num() % 2 != 0) rest.push_back(Factor{atom_func(Func::sgn, f.atom), Rational(1)});
            } else {
                rest.push_back(f);
            }
        }
        if (rest.empty()) {
            if (!rc.is_one()) out.push_back(Factor{const_atom(rc), q});
        } else if (rest.size() == 1 && rc.is_one() &&
                   (rest[0].exponent.is_one() ||
                    (rest[0].atom.kind() == Expr::Kind::Var && rest[0].exponent > Rational(0) &&
                     rest[0].exponent < Rational(1)))) {
            out.push_back(Factor{rest[0].atom, rest[0].exponent * q});
        } else {
            Poly base;
            merge_factors(rest);
            base.emplace(rest, rc);
            out.push_back(Factor{from_poly(base), q});
        }
        return canon(kOne, std::move(out));
    }
    if (q.is_integer() && q.sign() > 0 && q.num() <= 12) {
        Poly r = p;
        for (std::int64_t k = 1; k < q.num(); ++k) r = poly_mul(r, p);
        return r;
    }
    CRational c0 = p.begin()->second;
    if (q.is_integer()) {
        Poly unit = poly_scale(p, CRational(1) / c0);
        return canon(c0.pow(q.num()), Monomial{Factor{from_poly(unit), q}});
    }
    if (c0.is_real()) {
        Rational mag = c0.re.abs();
        Poly unit = poly_scale(p, CRational(Rational(1) / mag));
        Monomial fs{Factor{from_poly(unit), q}};
        if (!mag.is_one()) fs.push_back(Factor{const_atom(CRational(mag)), q});
        return canon(kOne, std::move(fs));
    }
    return canon(kOne, Monomial{Factor{from_poly(p), q}});
}

Poly ln_const(const Rational& r) {
    Poly out;
    auto add_int = [&](std::int64_t n, const CRational& sign) {
        std::int64_t m = n;
        for (std::int64_t pr = 2; pr <= 100000 && pr * pr <= m; ++pr) {
            int k = 0;
            while (m % pr == 0) {
                m /= pr;
                ++k;
            }
            if (k > 0) out = poly_add(std::move(out), poly_scale(atom_poly(atom_func(Func::ln, const_atom(CRational(pr)))), sign * CRational(k)));
        }
        if (m > 1) out = poly_add(std::move(out), poly_scale(atom_poly(atom_func(Func::ln, const_atom(CRational(m)))), sign));
    };
    add_int(r.num(), CRational(1));
    add_int(r.den(), CRational(-1));
    return out;
}

Poly ln_poly(const Expr& arg) {
    Poly p = read_normal(arg);
    if (p.empty()) throw SingularityError("ln(0)");
    if (p.size() == 1) {
        const auto& [m, c] = *p.begin();
        if (m.empty() && c.is_real() && c.re.sign() > 0) return ln_const(c.re);
        Poly result;
        Monomial rest;
        CRational rc(1);
        if (c.is_real() && c.re.sign() > 0) {
            result = ln_const(c.re);
        } else {
            rc = c;
        }
        bool single = m.size() == 1 && m[0].exponent.is_one() && rc.is_one();
        for (const auto& f : m) {
            const Expr& a = f.atom;
            if (a.kind() == Expr::Kind::Func && a.func() == Func::exp && struct_real(read_normal(a.args()[0]))) {
                result = poly_add(std::move(result), poly_scale(read_normal(a.args()[0]), CRational(f.exponent)));
            } else if (!single && is_nonneg(sign_atom(a))) {
                Poly la;
                if (a.kind() == Expr::Kind::Const) la = ln_const(a.value().re);
                else if (a.kind() == Expr::Kind::Add) la = ln_poly(a);
                else la = atom_poly(atom_func(Func::ln, a));
                result = poly_add(std::move(result), poly_scale(la, CRational(f.exponent)));
            } else {
                rest.push_back(f);
            }
        }
        if (rest.empty() && rc.is_one()) return result;
        Poly rp;
        rp.emplace(rest, rc);
        return poly_add(std::move(result), atom_poly(atom_func(Func::ln, from_poly(rp))));
    }
    const CRational& c0 = p.begin()->second;
    if (c0.is_real() && c0.re.sign() > 0 && !c0.is_one()) {
        Poly unit = poly_scale(p, CRational(1) / c0);
        return poly_add(ln_const(c0.re), atom_poly(atom_func(Func::ln, from_poly(unit))));
    }
    return atom_poly(atom_func(Func::ln, arg));
}

Poly abs_poly(const Expr& arg);

Poly abs_atom(const Expr& a) {
    switch (a.kind()) {
        case Expr::Kind::Var: return atom_poly(atom_func(Func::abs, a));
        case Expr::Kind::Const: {
            const CRational& v = a.value();
            if (v.is_real()) return constant_poly(CRational(v.re.abs()));
            return pow_poly(constant_poly(CRational(v.re * v.re + v.im * v.im)), Rational(1, 2));
        }
        case Expr::Kind::Conj: return abs_poly(a.args()[0]);
        case Expr::Kind::Func:
            switch (a.func()) {
                case Func::abs: return atom_poly(a);
                case Func::sgn: return constant_poly(kOne);
                case Func::exp: {
                    Poly arg = read_normal(a.args()[0]);
                    Poly re_arg = poly_scale(poly_add(arg, conj_poly(arg)), CRational(Rational(1, 2)));
                    return func_poly(Func::exp, from_poly(re_arg));
                }
                default:
                    return atom_poly(atom_func(Func::abs, a));
            }
        default: return abs_poly(a);
    }
}

Poly abs_poly(const Expr& arg) {
    Poly p = read_normal(arg);
    if (p.empty()) return {};
    if (p.size() == 1) {
        const auto& [m, c] = *p.begin();
        Poly result = abs_atom(const_atom(c));
        for (const auto& f : m) {
            if (is_nonneg(sign_atom(f.atom))) {
                result = poly_mul(result, atom_poly(f.atom, f.exponent));
            } else {
                result = poly_mul(result, pow_poly(abs_atom(f.atom), f.exponent));
            }
        }
        return result;
    }
    if (is_nonneg(sign_poly(p))) return p;
    const CRational& c0 = p.begin()->second;
    if (c0.is_real()) {
        Poly unit = poly_scale(p, CRational(1) / c0);
        if (leading_negative(unit)) unit = poly_scale(unit, CRational(-1));
        return poly_scale(atom_poly(atom_func(Func::abs, from_poly(unit))), CRational(c0.re.abs()));
    }
    return atom_poly(atom_func(Func::abs, arg));
}

Poly sgn_poly(const Expr& arg) {
    Poly p = read_normal(arg);
    if (p.empty()) return {};
    if (p.size() == 1) {
        const auto& [m, c] = *p.begin();
        if (!c.is_real()) return atom_poly(atom_func(Func::sgn, arg));
        Poly result = constant_poly(CRational(c.re.sign()));
        for (const auto& f : m) {
            if (is_nonneg(sign_atom(f.atom))) continue;
            if (!f.exponent.is_integer() || !atom_real(f.atom)) {
                Poly unit;
                unit.emplace(m, kOne);
                return poly_mul(constant_poly(CRational(c.re.sign())), atom_poly(atom_func(Func::sgn, from_poly(unit))));
            }
            Poly s;
            const Expr& a = f.atom;
            if (a.kind() == Expr::Kind::Func && a.func() == Func::sgn) s = atom_poly(a);
            else if (a.kind() == Expr::Kind::Add || a.kind() == Expr::Kind::Mul || a.kind() == Expr::Kind::Pow) s = sgn_poly(a);
            else if (a.kind() == Expr::Kind::Const) s = constant_poly(CRational(a.value().re.sign()));
            else s = atom_poly(atom_func(Func::sgn, a));
            result = poly_mul(result, pow_poly(s, f.exponent));
        }
        return result;
    }
    if (is_nonneg(sign_poly(p))) return constant_poly(kOne);
    const CRational& c0 = p.begin()->second;
    if (c0.is_real()) {
        Poly unit = poly_scale(p, CRational(Rational(1) / c0.re.abs()));
        if (leading_negative(unit)) {
            unit = poly_scale(unit, CRational(-1));
            return poly_scale(atom_poly(atom_func(Func::sgn, from_poly(unit))), CRational(-1));
        }
        return atom_poly(atom_func(Func::sgn, from_poly(unit)));
    }
    return atom_poly(atom_func(Func::sgn, arg));
}

Poly odd_even(Func f, const Expr& arg, bool odd) {
    Poly p = read_normal(arg);
    if (p.empty()) return odd ? Poly{} : constant_poly(kOne);
    if (leading_negative(p)) {
        Poly neg = poly_scale(p, CRational(-1));
        Poly r = atom_poly(atom_func(f, from_poly(neg)));
        return odd ? poly_scale(r, CRational(-1)) : r;
    }
    return atom_poly(atom_func(f, arg));
}

Poly func_poly(Func f, const Expr& arg) {
    switch (f) {
        case Func::exp:
            if (read_normal(arg).empty()) return constant_poly(kOne);
            return canon(kOne, Monomial{Factor{atom_func(Func::exp, arg), Rational(1)}});
        case Func::sin: return odd_even(f, arg, true);
        case Func::tan: return odd_even(f, arg, true);
        case Func::atan: return odd_even(f, arg, true);
        case Func::cos: return odd_even(f, arg, false);
        case Func::ln: return ln_poly(arg);
        case Func::abs: return abs_poly(arg);
        case Func::sgn: return sgn_poly(arg);
    }
    return {};
}

Poly conj_atom_poly(const Expr& a) {
    switch (a.kind()) {
        case Expr::Kind::Var: return atom_poly(a);
        case Expr::Kind::Const: return constant_poly(a.value().conj());
        case Expr::Kind::Conj: return read_normal(a.args()[0]);
        case Expr::Kind::Func:
            switch (a.func()) {
                case Func::abs:
                case Func::sgn: return atom_poly(a);
                case Func::ln:
                    if (is_nonneg(sign_poly(read_normal(a.args()[0])))) return atom_poly(a);
                    return atom_poly(conj_atom(a));
                default:
                    return func_poly(a.func(), from_poly(conj_poly(read_normal(a.args()[0]))));
            }
        default: return conj_poly(read_normal(a));
    }
}

Poly conj_factor(const Factor& f) {
    if (is_nonneg(sign_atom(f.atom))) return atom_poly(f.atom, f.exponent);
    if (f.exponent.is_integer()) return pow_poly(conj_atom_poly(f.atom), f.exponent);
    if (f.atom.kind() == Expr::Kind::Const && f.atom.value() == CRational(-1)) {
        return canon(kOne, Monomial{Factor{f.atom, -f.exponent}});
    }
    return atom_poly(conj_atom(factor_node(f)));
}

Poly conj_poly(const Poly& p) {
    Poly result;
    for (const auto& [m, c] : p) {
        Poly term = constant_poly(c.conj());
        for (const auto& f : m) term = poly_mul(term, conj_factor(f));
        result = poly_add(std::move(result), term);
    }
    return result;
}

Poly norm(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Const: return constant_poly(e.value());
        case Expr::Kind::Var: return atom_poly(atom_var(e.var()));
        case Expr::Kind::Add: {
            Poly r;
            for (const auto& a : e.args()) r = poly_add(std::move(r), to_poly(a));
            return r;
        }
        case Expr::Kind::Mul: {
            Poly r = constant_poly(kOne);
            for (const auto& a : e.args()) {
                r = poly_mul(r, to_poly(a));
                if (r.empty()) break;
            }
            return r;
        }
        case Expr::Kind::Pow: return pow_poly(to_poly(e.args()[0]), e.exponent());
        case Expr::Kind::Func: return func_poly(e.func(), from_poly(to_poly(e.args()[0])));
        case Expr::Kind::Conj: return conj_poly(to_poly(e.args()[0]));
    }
    return {};
}

}  // namespace

int compare_monomial(const Monomial& a, const Monomial& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) {
        int c = compare(a[k].atom, b[k].atom);
        if (c != 0) return c;
        if (a[k].exponent != b[k].exponent) return a[k].exponent < b[k].exponent ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

Poly to_poly(const Expr& e) {
    if (e.is_normal()) return read_normal(e);
    return norm(e);
}

Expr from_poly(const Poly& p) {
    if (p.empty()) return Expr();
    std::vector<Expr> term_nodes;
    for (const auto& [m, c] : p) {
        if (m.empty()) {
            term_nodes.push_back(const_atom(c));
            continue;
        }
        if (c.is_one() && m.size() == 1) {
            term_nodes.push_back(factor_node(m[0]));
            continue;
        }
        Node n;
        n.kind = Expr::Kind::Mul;
        n.normal = true;
        if (!c.is_one()) n.args.push_back(const_atom(c));
        for (const auto& f : m) n.args.push_back(factor_node(f));
        term_nodes.push_back(make_node(std::move(n)));
    }
    if (term_nodes.size() == 1) return term_nodes[0];
    Node n;
    n.kind = Expr::Kind::Add;
    n.normal = true;
    n.args = std::move(term_nodes);
    return make_node(std::move(n));
}

Poly poly_add(Poly a, const Poly& b) {
    for (const auto& [m, c] : b) {
        auto it = a.find(m);
        if (it == a.end()) {
            a.emplace(m, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) a.erase(it);
        }
    }
    return a;
}

Poly poly_scale(const Poly& a, const CRational& c) {
    Poly r;
    if (c.is_zero()) return r;
    for (const auto& [m, k] : a) r.emplace(m, k * c);
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a) {
        for (const auto& [mb, cb] : b) {
            Monomial fs = ma;
            fs.insert(fs.end(), mb.begin(), mb.end());
            bool plain = true;
            for (const auto& f : fs) {
                if (f.atom.kind() != Expr::Kind::Var) {
                    plain = false;
                    break;
                }
                if (!f.exponent.is_integer()) {
                    plain = false;
                    break;
                }
            }
            if (plain) {
                merge_factors(fs);
                r = poly_add(std::move(r), Poly{{fs, ca * cb}});
            } else {
                r = poly_add(std::move(r), canon(ca * cb, std::move(fs)));
            }
        }
    }
    return r;
}

Expr atom_var(Var v) {
    Node n;
    n.kind = Expr::Kind::Var;
    n.var = v;
    n.normal = true;
    return make_node(std::move(n));
}

Expr atom_func(Func f, const Expr& normal_arg) {
    Node n;
    n.kind = Expr::Kind::Func;
    n.func = f;
    n.args = {normal_arg};
    n.normal = true;
    return make_node(std::move(n));
}

bool is_compound_atom(const Expr& atom) {
    switch (atom.kind()) {
        case Expr::Kind::Add:
        case Expr::Kind::Mul:
        case Expr::Kind::Pow:
        case Expr::Kind::Const: return true;
        default: return false;
    }
}

}  // namespace schrodclass::detail

namespace schrodclass {

bool is_real(const Expr& e) {
    detail::Poly p = detail::to_poly(e);
    if (detail::struct_real(p)) return true;
    return detail::poly_add(p, detail::poly_scale(detail::conj_poly(p), CRational(-1))).empty();
}

SignInfo known_sign(const Expr& e) {
    return detail::sign_poly(detail::to_poly(e));
}

}  // namespace schrodclass
