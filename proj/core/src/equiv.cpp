#include <cmath>

#include "expr_internal.hpp"
#include "schrodclass/equiv.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

const Expr& tv() {
    static const Expr t = Expr::t();
    return t;
}

const Expr& xv() {
    static const Expr x = Expr::x();
    return x;
}

Expr dt(const Expr& e, int order = 1) {
    return diff(e, Var::t, order);
}

Expr at(const Expr& e, const Expr& s) {
    return substitute(e, Var::t, s);
}

ProbeBox box_on(TInterval dom) {
    ProbeBox box;
    box.t_lo = dom.lo;
    box.t_hi = dom.hi;
    return box;
}

TInterval reflected(TInterval dom) {
    return {-dom.hi, -dom.lo};
}

// Re-expresses a field of the old variables (t, x) in the new ones.
Expr to_new_variables(const Expr& e, const EquivTransform& g, int ep, const Expr& S, TInterval dom) {
    Expr abs_tt = Expr(ep) * dt(g.T);
    Expr x_old = Expr(g.eps) * (xv() - at(g.X0, S)) * pow(at(abs_tt, S), Rational(-1, 2));
    return resolve_signs(substitute(e, S, x_old), image_interval(g, dom));
}

// Exact constant for a numeric value of the form q or q*sqrt(p).
std::optional<Expr> recognize_real(double v) {
    if (auto q = Rational::from_double(v, 10000, 1e-11)) return Expr(*q);
    for (int p : {2, 3, 5, 6, 7}) {
        if (auto q = Rational::from_double(v / std::sqrt(double(p)), 10000, 1e-11)) {
            return Expr(*q) * pow(Expr(p), Rational(1, 2));
        }
    }
    return std::nullopt;
}

// Rewrites a polynomial in x coefficientwise, t-independent coefficients in closed form.
Expr simplify_constant_coefficients(const Expr& e, TInterval dom) {
    ProbeBox box = box_on(dom);
    constexpr int kMaxDegree = 4;
    try {
        if (!is_zero(diff(e, Var::x, kMaxDegree + 1), box)) return e;
        Expr out;
        Expr dk = e;
        double factorial = 1.0;
        double t0 = 0.5 * (dom.lo + dom.hi);
        for (int k = 0; k <= kMaxDegree; ++k) {
            if (k > 0) {
                dk = diff(dk, Var::x);
                factorial *= k;
            }
            Expr ck = substitute(dk, Var::x, Expr());
            if (ck.is_zero_exact()) continue;
            Expr coeff = ck / Expr(static_cast<std::int64_t>(factorial));
            if (is_zero(diff(ck, Var::t), box)) {
                std::complex<double> v = eval(ck, t0, 0.0) / factorial;
                auto re = recognize_real(v.real());
                auto im = recognize_real(v.imag());
                if (re && im) coeff = *re + Expr::i() * *im;
            }
            out += coeff * pow(xv(), Rational(k));
        }
        if (is_zero(out - e, box)) return out;
    } catch (const std::exception&) {
    }
    return e;
}

Expr argument_of(const CRational& c) {
    const Expr quarter_pi = sym::atan(Expr(1));
    if (c.im.is_zero()) return c.re.sign() > 0 ? Expr() : Expr(4) * quarter_pi;
    if (c.re.is_zero()) return Expr(c.im.sign() * 2) * quarter_pi;
    Expr base = sym::atan(Expr(c.im / c.re));
    if (c.re.sign() > 0) return base;
    return base + Expr(c.im.sign() * 4) * quarter_pi;
}

}  // namespace

EquivTransform EquivTransform::identity() {
    return {};
}

EquivTransform EquivTransform::time(const Expr& T) {
    EquivTransform g;
    g.T = T;
    return g;
}

EquivTransform EquivTransform::shift(const Expr& X0) {
    EquivTransform g;
    g.X0 = X0;
    return g;
}

EquivTransform EquivTransform::phase(const Expr& Sigma) {
    EquivTransform g;
    g.Sigma = Sigma;
    return g;
}

EquivTransform EquivTransform::amplitude(const Expr& Upsilon) {
    EquivTransform g;
    g.Upsilon = Upsilon;
    return g;
}

EquivTransform EquivTransform::space_reflection() {
    EquivTransform g;
    g.eps = -1;
    return g;
}

EquivTransform EquivTransform::wigner() {
    return time(-Expr::t());
}

Expr SubclassEquivTransform::T() const {
    return (Expr(a1) * tv() + Expr(a0)) / (Expr(a3) * tv() + Expr(a2));
}

Rational SubclassEquivTransform::det() const {
    return a1 * a2 - a0 * a3;
}

std::complex<double> TransformedPotential::eval(double t_new, double x_new) const {
    if (potential) return schrodclass::eval(*potential, t_new, x_new);
    double t = invert_time_numeric(g.T, domain, t_new);
    double tt = std::abs(schrodclass::eval(dt(g.T), t, 0.0).real());
    double x0 = schrodclass::eval(g.X0, t, 0.0).real();
    double x = g.eps * (x_new - x0) / std::sqrt(tt);
    return schrodclass::eval(source_form, t, x);
}

TransformedPotential transform_potential(const Expr& V, const EquivTransform& g, TInterval dom) {
    int ep = eps_prime(g, dom);
    Expr Tt = dt(g.T);
    Expr Ttt = dt(g.T, 2);
    Expr Tttt = dt(g.T, 3);
    Expr abs_tt = Expr(ep) * Tt;
    Expr X0t = dt(g.X0);
    Expr Vh = ep < 0 ? sym::conj(V) : V;
    Expr i = Expr::i();
    Expr x = xv();
    Expr W = Vh / abs_tt +
             (Expr(2) * Tttt * Tt - Expr(3) * Ttt * Ttt) / (Expr(16 * ep) * pow(Tt, Rational(3))) * x * x +
             Expr(g.eps * ep) / (Expr(2) * pow(abs_tt, Rational(1, 2))) * dt(X0t / Tt) * x -
             (i * Ttt + X0t * X0t) / (Expr(4) * Tt * Tt) + (dt(g.Sigma) - i * dt(g.Upsilon)) / Tt;
    TransformedPotential out;
    out.source_form = resolve_signs(W, dom);
    out.g = g;
    out.domain = dom;
    if (auto S = invert_time_map(g.T, dom)) {
        out.potential =
            simplify_constant_coefficients(to_new_variables(out.source_form, g, ep, *S, dom), image_interval(g, dom));
        out.status = MapStatus::Exact;
    } else {
        out.status = MapStatus::NumericOnly;
    }
    return out;
}

Expr solution_multiplier(const EquivTransform& g, TInterval dom) {
    int ep = eps_prime(g, dom);
    Expr abs_tt = Expr(ep) * dt(g.T);
    Expr i = Expr::i();
    Expr x = xv();
    Expr phase = i / Expr(8) * dt(g.T, 2) / abs_tt * x * x +
                 i / Expr(2) * Expr(g.eps * ep) * dt(g.X0) * pow(abs_tt, Rational(-1, 2)) * x + i * g.Sigma +
                 g.Upsilon;
    return resolve_signs(sym::exp(phase), dom);
}

Expr solution_residual(const Expr& psi, const Expr& V) {
    return Expr::i() * diff(psi, Var::t) + diff(psi, Var::x, 2) + V * psi;
}

Expr transform_solution(const AdmissibleTransform& adm, const Expr& psi, const Expr& V, TInterval dom) {
    if (!adm.Phi.is_zero_exact() && !is_zero(solution_residual(adm.Phi, V), box_on(dom))) {
        throw PreconditionError("Phi does not solve the source equation");
    }
    const EquivTransform& g = adm.base;
    int ep = eps_prime(g, dom);
    Expr sum = psi + adm.Phi;
    if (ep < 0) sum = sym::conj(sum);
    Expr full = resolve_signs(solution_multiplier(g, dom) * sum, dom);
    auto S = invert_time_map(g.T, dom);
    if (!S) throw NotRepresentableError("time map has no inverse in the grammar");
    return to_new_variables(full, g, ep, *S, dom);
}

EquivTransform compose(const EquivTransform& g1, const EquivTransform& g2, TInterval dom) {
    int ep1 = eps_prime(g1, dom);
    (void)ep1;
    TInterval dom2 = image_interval(g1, dom);
    int ep2 = eps_prime(g2, dom2);
    const Expr& T1 = g1.T;
    Expr abs_t2 = Expr(ep2) * dt(g2.T);
    Expr a2 = dt(g2.T, 2) / (Expr(8) * abs_t2);
    Expr b2 = Expr(g2.eps * ep2) * dt(g2.X0) / (Expr(2) * pow(abs_t2, Rational(1, 2)));
    auto on = [&](const Expr& e) { return resolve_signs(at(resolve_signs(e, dom2), T1), dom); };
    EquivTransform g;
    g.T = on(g2.T);
    g.eps = g1.eps * g2.eps;
    g.X0 = resolve_signs(Expr(g2.eps) * pow(on(abs_t2), Rational(1, 2)) * g1.X0 + on(g2.X0), dom);
    g.Sigma = resolve_signs(on(a2) * g1.X0 * g1.X0 + on(b2) * g1.X0 + on(g2.Sigma) + Expr(ep2) * g1.Sigma, dom);
    g.Upsilon = resolve_signs(on(g2.Upsilon) + g1.Upsilon, dom);
    return g;
}

EquivTransform inverse(const EquivTransform& g, TInterval dom) {
    int ep = eps_prime(g, dom);
    auto S = invert_time_map(g.T, dom);
    if (!S) throw NotRepresentableError("time map has no inverse in the grammar");
    TInterval img = image_interval(g, dom);
    Expr abs_st = Expr(ep) * dt(*S);
    Expr x0s = at(g.X0, *S);
    EquivTransform r;
    r.T = *S;
    r.eps = g.eps;
    r.X0 = resolve_signs(-Expr(g.eps) * pow(abs_st, Rational(1, 2)) * x0s, img);
    Expr a = dt(*S, 2) / (Expr(8) * abs_st);
    Expr b = Expr(g.eps * ep) * dt(r.X0) / (Expr(2) * pow(abs_st, Rational(1, 2)));
    r.Sigma = resolve_signs(-(a * x0s * x0s + b * x0s + Expr(ep) * at(g.Sigma, *S)), img);
    r.Upsilon = resolve_signs(-at(g.Upsilon, *S), img);
    return r;
}

StructuredField pushforward(const EquivTransform& g_in, const StructuredField& q_in, TInterval dom) {
    if (q_in.has_z()) throw PreconditionError("pushforward requires a Z-free field");
    EquivTransform g = g_in;
    StructuredField q = q_in;
    TInterval d = dom;
    if (eps_prime(g, d) < 0) {
        // g = g' o W with g' = g o W acting on the reflected interval.
        Expr mt = -tv();
        q = StructuredField{-at(q.tau, mt), at(q.chi, mt), -at(q.sigma, mt), at(q.rho, mt), std::nullopt};
        d = reflected(d);
        g = compose(EquivTransform::wigner(), g, d);
    }
    if (g.eps < 0) {
        q.chi = -q.chi;
        g = compose(EquivTransform::space_reflection(), g, d);
    }
    Expr Tt = dt(g.T);
    Expr Xb = resolve_signs(g.X0 * pow(Tt, Rational(-1, 2)), d);
    Expr Sb = resolve_signs(g.Sigma - dt(g.T, 2) * Xb * Xb / (Expr(8) * Tt), d);
    const Expr& tau = q.tau;
    // I_*(Upsilon), M_*(Sigma bar)
    q.rho = q.rho + tau * dt(g.Upsilon);
    q.sigma = q.sigma + tau * dt(Sb);
    // G_*(X bar)
    Expr Xt = dt(Xb);
    Expr sigma_g = dt(tau, 2) * Xb * Xb / Expr(8) - dt(tau) * Xb * Xt / Expr(4) - tau * Xb * dt(Xb, 2) / Expr(2) +
                   (q.chi * Xt - dt(q.chi) * Xb) / Expr(2);
    q.chi = q.chi + tau * Xt - dt(tau) * Xb / Expr(2);
    q.sigma = q.sigma + sigma_g;
    // D_*(T)
    auto S = invert_time_map(g.T, d);
    if (!S) throw NotRepresentableError("time map has no inverse in the grammar");
    TInterval img = image_interval(g, d);
    auto fin = [&](const Expr& e) { return resolve_signs(at(resolve_signs(e, d), *S), img); };
    StructuredField out;
    out.tau = fin(Tt * tau);
    out.chi = fin(pow(Tt, Rational(1, 2)) * q.chi);
    out.sigma = fin(q.sigma);
    out.rho = fin(q.rho);
    return out;
}

Expr transform_gamma(const Expr& gamma, const SubclassEquivTransform& g, TInterval dom) {
    Rational det = g.det();
    if (det.is_zero()) throw PreconditionError("degenerate Mobius map");
    int ep = det.sign();
    Expr den = Expr(g.a3) * tv() + Expr(g.a2);
    // |T_t|^{-3/2} = |det|^{-3/2} |a3 t + a2|^3
    Expr factor = resolve_signs(Expr(g.eps * ep) * pow(Expr(det.abs()), Rational(-3, 2)) *
                                    pow(sym::abs(den), Rational(3)),
                                dom);
    Expr S = (Expr(g.a2) * tv() - Expr(g.a0)) / (Expr(g.a1) - Expr(g.a3) * tv());
    EquivTransform full = EquivTransform::time(g.T());
    return resolve_signs(at(factor * gamma, S), image_interval(full, dom), true);
}

EquivTransform to_equiv(const SubclassEquivTransform& g, const Expr& gamma, TInterval dom) {
    Rational det = g.det();
    if (det.is_zero()) throw PreconditionError("degenerate Mobius map");
    EquivTransform r;
    r.T = g.T();
    r.eps = g.eps;
    r.X0 = Expr(g.b1) * r.T + Expr(g.b0);
    Expr den = Expr(g.a3) * tv() + Expr(g.a2);
    Expr abs_tt = resolve_signs(Expr(det.abs()) * pow(sym::abs(den), Rational(-2)), dom);
    Rational mod2 = g.c.re * g.c.re + g.c.im * g.c.im;
    if (mod2.is_zero()) throw PreconditionError("c must be nonzero");
    r.Sigma = Expr(g.b1 * g.b1 / Rational(4)) * r.T + argument_of(g.c);
    Expr integrand = resolve_signs(gamma * r.X0 * pow(abs_tt, Rational(-1, 2)), dom);
    Expr integral = integrand.is_zero_exact() ? Expr() : integrate_t(integrand);
    r.Upsilon = resolve_signs(-sym::ln(abs_tt) / Expr(4) - Expr(g.eps) * integral + sym::ln(Expr(mod2)) / Expr(2),
                              dom);
    return r;
}

FactoredAdmissible factor_admissible(const AdmissibleTransform& adm, const Expr& V) {
    if (!adm.Phi.is_zero_exact() && !is_zero(solution_residual(adm.Phi, V))) {
        throw PreconditionError("Phi does not solve the source equation");
    }
    FactoredAdmissible out;
    out.superposition.base = EquivTransform::identity();
    out.superposition.Phi = adm.Phi;
    out.equivalence = adm.base;
    return out;
}

Expr equiv_generator_action(GeneratorKind kind, const Expr& param, const Expr& V) {
    Expr x = xv();
    Expr i = Expr::i();
    switch (kind) {
        case GeneratorKind::D:
            return -(dt(param) * V - dt(param, 3) * x * x / Expr(8) - i * dt(param, 2) / Expr(4)) -
                   param * diff(V, Var::t) - dt(param) * x * diff(V, Var::x) / Expr(2);
        case GeneratorKind::G: return dt(param, 2) * x / Expr(2) - param * diff(V, Var::x);
        case GeneratorKind::M: return dt(param);
        case GeneratorKind::I: return -i * dt(param);
    }
    return Expr();
}

std::string to_string(const EquivTransform& g) {
    return "T=" + to_string(g.T) + ", X0=" + to_string(g.X0) + ", Sigma=" + to_string(g.Sigma) +
           ", Upsilon=" + to_string(g.Upsilon) + ", eps=" + std::to_string(g.eps);
}

}  // namespace schrodclass
