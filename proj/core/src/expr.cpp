#include "expr_internal.hpp"

#include <cstdlib>

namespace schrodclass {

const char* func_name(Func f) noexcept {
    switch (f) {
        case Func::exp: return "exp";
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::tan: return "tan";
        case Func::atan: return "atan";
        case Func::ln: return "ln";
        case Func::abs: return "abs";
        case Func::sgn: return "sgn";
    }
    return "?";
}

Expr make_node(Node n) {
    return Expr(std::make_shared<const Node>(std::move(n)));
}

namespace {

Expr const_node(const CRational& c) {
    Node n;
    n.kind = Expr::Kind::Const;
    n.value = c;
    n.normal = true;
    return make_node(std::move(n));
}

const Expr& zero_node() {
    static const Expr z = const_node(CRational());
    return z;
}

}  // namespace

Expr::Expr() : Expr(zero_node()) {}
Expr::Expr(const CRational& c) : Expr(c.is_zero() ? zero_node() : const_node(c)) {}
Expr::Expr(const Rational& c) : Expr(CRational(c)) {}
Expr::Expr(std::int64_t c) : Expr(CRational(c)) {}
Expr::Expr(int c) : Expr(CRational(static_cast<std::int64_t>(c))) {}

Expr Expr::t() {
    static const Expr v = detail::atom_var(Var::t);
    return v;
}

Expr Expr::x() {
    static const Expr v = detail::atom_var(Var::x);
    return v;
}

Expr Expr::i() {
    static const Expr v = const_node(CRational::imag_unit());
    return v;
}

Expr Expr::variable(Var v) { return v == Var::t ? t() : x(); }

Expr Expr::raw_sum(std::vector<Expr> terms) {
    Node n;
    n.kind = Kind::Add;
    n.args = std::move(terms);
    return make_node(std::move(n));
}

Expr Expr::raw_product(std::vector<Expr> factors) {
    Node n;
    n.kind = Kind::Mul;
    n.args = std::move(factors);
    return make_node(std::move(n));
}

Expr Expr::raw_power(Expr base, Rational exponent) {
    Node n;
    n.kind = Kind::Pow;
    n.exponent = exponent;
    n.args = {std::move(base)};
    return make_node(std::move(n));
}

Expr Expr::raw_function(Func f, Expr arg) {
    Node n;
    n.kind = Kind::Func;
    n.func = f;
    n.args = {std::move(arg)};
    return make_node(std::move(n));
}

Expr Expr::raw_conj(Expr arg) {
    Node n;
    n.kind = Kind::Conj;
    n.args = {std::move(arg)};
    return make_node(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }
const CRational& Expr::value() const noexcept { return node_->value; }
Var Expr::var() const noexcept { return node_->var; }
Func Expr::func() const noexcept { return node_->func; }
const Rational& Expr::exponent() const noexcept { return node_->exponent; }
const std::vector<Expr>& Expr::args() const noexcept { return node_->args; }
bool Expr::is_normal() const noexcept { return node_->normal; }

std::optional<CRational> Expr::as_constant() const {
    Expr n = normalize(*this);
    if (n.kind() == Kind::Const) return n.value();
    return std::nullopt;
}

bool Expr::is_zero_exact() const {
    auto c = as_constant();
    return c && c->is_zero();
}

int compare(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return 0;
    if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
        case Expr::Kind::Const: {
            auto c = schrodclass::compare(a.value(), b.value());
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        }
        case Expr::Kind::Var:
            if (a.var() == b.var()) return 0;
            return a.var() < b.var() ? -1 : 1;
        case Expr::Kind::Func:
            if (a.func() != b.func()) return a.func() < b.func() ? -1 : 1;
            return compare(a.args()[0], b.args()[0]);
        case Expr::Kind::Conj:
            return compare(a.args()[0], b.args()[0]);
        case Expr::Kind::Pow: {
            int c = compare(a.args()[0], b.args()[0]);
            if (c != 0) return c;
            if (a.exponent() == b.exponent()) return 0;
            return a.exponent() < b.exponent() ? -1 : 1;
        }
        case Expr::Kind::Add:
        case Expr::Kind::Mul: {
            const auto& x = a.args();
            const auto& y = b.args();
            std::size_t n = std::min(x.size(), y.size());
            for (std::size_t k = 0; k < n; ++k) {
                int c = compare(x[k], y[k]);
                if (c != 0) return c;
            }
            if (x.size() == y.size()) return 0;
            return x.size() < y.size() ? -1 : 1;
        }
    }
    return 0;
}

Expr normalize(const Expr& e) {
    if (e.is_normal()) return e;
    return detail::from_poly(detail::to_poly(e));
}

Expr operator+(const Expr& a, const Expr& b) {
    return detail::from_poly(detail::poly_add(detail::to_poly(a), detail::to_poly(b)));
}

Expr operator-(const Expr& a, const Expr& b) {
    return detail::from_poly(detail::poly_add(detail::to_poly(a), detail::poly_scale(detail::to_poly(b), CRational(-1))));
}

Expr operator*(const Expr& a, const Expr& b) {
    return detail::from_poly(detail::poly_mul(detail::to_poly(a), detail::to_poly(b)));
}

Expr operator/(const Expr& a, const Expr& b) {
    return a * pow(b, Rational(-1));
}

Expr operator-(const Expr& a) {
    return detail::from_poly(detail::poly_scale(detail::to_poly(a), CRational(-1)));
}

Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, const Rational& exponent) {
    return normalize(Expr::raw_power(base, exponent));
}

namespace sym {
Expr apply(Func f, const Expr& a) { return normalize(Expr::raw_function(f, a)); }
Expr exp(const Expr& a) { return apply(Func::exp, a); }
Expr sin(const Expr& a) { return apply(Func::sin, a); }
Expr cos(const Expr& a) { return apply(Func::cos, a); }
Expr tan(const Expr& a) { return apply(Func::tan, a); }
Expr atan(const Expr& a) { return apply(Func::atan, a); }
Expr ln(const Expr& a) { return apply(Func::ln, a); }
Expr abs(const Expr& a) { return apply(Func::abs, a); }
Expr sgn(const Expr& a) { return apply(Func::sgn, a); }
Expr conj(const Expr& a) { return normalize(Expr::raw_conj(a)); }
}  // namespace sym

std::vector<Term> terms(const Expr& e) {
    std::vector<Term> out;
    for (const auto& [mono, c] : detail::to_poly(e)) out.push_back(Term{c, mono});
    return out;
}

Expr from_term(const Term& term) {
    detail::Poly p;
    if (!term.coeff.is_zero()) p.emplace(term.factors, term.coeff);
    return detail::from_poly(p);
}

bool depends_on(const Expr& e, Var v) {
    switch (e.kind()) {
        case Expr::Kind::Const: return false;
        case Expr::Kind::Var: return e.var() == v;
        default:
            for (const auto& a : e.args()) {
                if (depends_on(a, v)) return true;
            }
            return false;
    }
}

Expr re(const Expr& e) { return (e + sym::conj(e)) * Expr(Rational(1, 2)); }
Expr im(const Expr& e) { return (e - sym::conj(e)) * Expr(CRational(Rational(0), Rational(-1, 2))); }

std::uint64_t probe_seed() {
    static const std::uint64_t seed = [] {
        const char* env = std::getenv("SCHRODCLASS_SEED");
        if (env != nullptr && *env != '\0') {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end != nullptr && *end == '\0') return static_cast<std::uint64_t>(v);
        }
        return static_cast<std::uint64_t>(0x5C0D5EEDULL);
    }();
    return seed;
}

}  // namespace schrodclass
