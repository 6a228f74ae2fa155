#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schrodclass/rational.hpp"

namespace schrodclass {

enum class Var : std::uint8_t { t, x };
enum class Func : std::uint8_t { exp, sin, cos, tan, atan, ln, abs, sgn };

const char* func_name(Func f) noexcept;

struct Node;

/// Immutable complex-valued expression in the real variables t and x.
///
/// Raw trees come from parse() and the static builders. Arithmetic operators
/// and the functions in namespace sym always return normalized trees.
class Expr {
public:
    enum class Kind : std::uint8_t { Const, Var, Add, Mul, Pow, Func, Conj };

    Expr();
    Expr(const CRational& c);  // NOLINT(implicit)
    Expr(const Rational& c);   // NOLINT(implicit)
    Expr(std::int64_t c);      // NOLINT(implicit)
    Expr(int c);               // NOLINT(implicit)

    static Expr t();
    static Expr x();
    static Expr i();
    static Expr variable(Var v);

    // Raw constructors; no simplification.
    static Expr raw_sum(std::vector<Expr> terms);
    static Expr raw_product(std::vector<Expr> factors);
    static Expr raw_power(Expr base, Rational exponent);
    static Expr raw_function(Func f, Expr arg);
    static Expr raw_conj(Expr arg);

    Kind kind() const noexcept;
    const CRational& value() const noexcept;
    Var var() const noexcept;
    Func func() const noexcept;
    const Rational& exponent() const noexcept;
    const std::vector<Expr>& args() const noexcept;
    bool is_normal() const noexcept;

    /// Constant value if this normalizes to a constant.
    std::optional<CRational> as_constant() const;
    bool is_zero_exact() const;

    const Node* node() const noexcept { return node_.get(); }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
    friend Expr make_node(Node n);
};

Expr make_node(Node n);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);
Expr pow(const Expr& base, const Rational& exponent);

namespace sym {
Expr exp(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr atan(const Expr& a);
Expr ln(const Expr& a);
Expr abs(const Expr& a);
Expr sgn(const Expr& a);
Expr conj(const Expr& a);
Expr apply(Func f, const Expr& a);
}  // namespace sym

Expr normalize(const Expr& e);

/// Total order on trees; 0 means structurally identical.
int compare(const Expr& a, const Expr& b);
inline bool identical(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

/// One monomial of a normalized expression: coeff * prod atom^exponent.
struct Factor {
    Expr atom;
    Rational exponent;
};
struct Term {
    CRational coeff;
    std::vector<Factor> factors;
};
std::vector<Term> terms(const Expr& e);
Expr from_term(const Term& term);

bool depends_on(const Expr& e, Var v);
bool is_real(const Expr& e);
Expr re(const Expr& e);
Expr im(const Expr& e);

enum class SignInfo : std::uint8_t { Positive, NonNegative, Unknown };
/// Conservative sign information valid for all real t, x where e is defined.
SignInfo known_sign(const Expr& e);

Expr diff(const Expr& e, Var v, int order = 1);
Expr substitute(const Expr& e, Var v, const Expr& replacement);
/// Simultaneous substitution t -> t_repl, x -> x_repl.
Expr substitute(const Expr& e, const Expr& t_repl, const Expr& x_repl);

/// Rewrites every function node bottom-up; the callback returns a
/// replacement or nullopt to keep the node.
Expr map_functions(const Expr& e, const std::function<std::optional<Expr>(Func, const Expr&)>& fn);

/// Antiderivative in t with zero integration constant.
/// Throws NotRepresentableError when no supported rule applies.
Expr integrate_t(const Expr& e);

std::complex<double> eval(const Expr& e, double t, double x);

std::string to_string(const Expr& e);
Expr parse(std::string_view text);

struct ProbeBox {
    double t_lo = -2.0, t_hi = 2.0;
    double x_lo = -2.0, x_hi = 2.0;
    int probes = 32;
    double tolerance = 1e-10;
};

enum class Certainty : std::uint8_t { Exact, Probabilistic };

struct ZeroTest {
    bool zero = false;
    Certainty certainty = Certainty::Exact;
};

/// Throws InconclusiveError if not enough nonsingular probe points exist.
ZeroTest zero_test(const Expr& e, const ProbeBox& box = {});
bool is_zero(const Expr& e, const ProbeBox& box = {});

/// Seed for all probe generators; SCHRODCLASS_SEED overrides the default.
std::uint64_t probe_seed();

}  // namespace schrodclass
