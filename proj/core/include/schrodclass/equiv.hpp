#pragma once

#include <complex>
#include <optional>
#include <string>

#include "schrodclass/expr.hpp"
#include "schrodclass/field.hpp"

namespace schrodclass {

/// Working t-interval on which sgn(T_t) is constant.
struct TInterval {
    double lo = 0.5;
    double hi = 2.0;
};

/// t~ = T, x~ = eps |T_t|^{1/2} x + X0,
/// psi~ = exp(i/8 T_tt/|T_t| x^2 + i/2 eps eps' X0_t/|T_t|^{1/2} x + i Sigma + Upsilon) psi^,
/// where psi^ = conj(psi) when T_t < 0.
struct EquivTransform {
    Expr T = Expr::t();
    Expr X0;
    Expr Sigma;
    Expr Upsilon;
    int eps = 1;

    static EquivTransform identity();
    static EquivTransform time(const Expr& T);
    static EquivTransform shift(const Expr& X0);
    static EquivTransform phase(const Expr& Sigma);
    static EquivTransform amplitude(const Expr& Upsilon);
    static EquivTransform space_reflection();
    static EquivTransform wigner();
};

struct AdmissibleTransform {
    EquivTransform base;
    Expr Phi;
};

/// Mobius-parameterized transformation of the subclass V = i gamma(t) x.
struct SubclassEquivTransform {
    Rational a0{0}, a1{1}, a2{1}, a3{0};
    Rational b0{0}, b1{0};
    CRational c{Rational(1)};
    int eps = 1;

    Expr T() const;
    Rational det() const;
};

enum class MapStatus { Exact, NumericOnly };

const char* status_name(MapStatus s) noexcept;

/// sgn(T_t) on the interval; throws PreconditionError if it is not constant.
int eps_prime(const EquivTransform& g, TInterval dom = {});

/// T(dom), ordered.
TInterval image_interval(const EquivTransform& g, TInterval dom = {});

/// Replaces sgn (and abs, unless keep_abs) of x-free arguments by their
/// constant sign on the interval.
Expr resolve_signs(const Expr& e, TInterval dom, bool keep_abs = false);

/// S with T(S(s)) = s on the image interval, when representable.
std::optional<Expr> invert_time_map(const Expr& T, TInterval dom = {});

/// Solves T(t) = value for t in the interval by bisection.
double invert_time_numeric(const Expr& T, TInterval dom, double value);

struct TransformedPotential {
    MapStatus status = MapStatus::Exact;
    std::optional<Expr> potential;  // in the new variables, when exact
    Expr source_form;                // the same field written in the old variables
    EquivTransform g;
    TInterval domain;

    std::complex<double> eval(double t_new, double x_new) const;
};

TransformedPotential transform_potential(const Expr& V, const EquivTransform& g, TInterval dom = {});

/// Multiplier exp(...) of the solution map, in the old variables.
Expr solution_multiplier(const EquivTransform& g, TInterval dom = {});

/// Residual i Phi_t + Phi_xx + V Phi.
Expr solution_residual(const Expr& psi, const Expr& V);

/// psi~ in the new variables. Throws PreconditionError if Phi does not solve
/// the source equation and NotRepresentableError if T cannot be inverted.
Expr transform_solution(const AdmissibleTransform& adm, const Expr& psi, const Expr& V, TInterval dom = {});

/// Transformation acting as g1 followed by g2; dom is the interval of g1.
EquivTransform compose(const EquivTransform& g1, const EquivTransform& g2, TInterval dom = {});

/// Throws NotRepresentableError when T has no inverse in the grammar.
EquivTransform inverse(const EquivTransform& g, TInterval dom = {});

/// Pushforward of a Z-free field through the elementary decomposition of g.
StructuredField pushforward(const EquivTransform& g, const StructuredField& q, TInterval dom = {});

Expr transform_gamma(const Expr& gamma, const SubclassEquivTransform& g, TInterval dom = {});

/// Full transformation for the subclass member with the given gamma.
EquivTransform to_equiv(const SubclassEquivTransform& g, const Expr& gamma, TInterval dom = {});

struct FactoredAdmissible {
    AdmissibleTransform superposition;
    EquivTransform equivalence;
};

FactoredAdmissible factor_admissible(const AdmissibleTransform& adm, const Expr& V);

enum class GeneratorKind { D, G, M, I };

Expr equiv_generator_action(GeneratorKind kind, const Expr& param, const Expr& V);

std::string to_string(const EquivTransform& g);

}  // namespace schrodclass
