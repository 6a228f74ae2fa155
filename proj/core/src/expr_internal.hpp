#pragma once

#include <map>
#include <vector>

#include "schrodclass/expr.hpp"

namespace schrodclass {

struct Node {
    Expr::Kind kind = Expr::Kind::Const;
    CRational value;
    Var var = Var::t;
    Func func = Func::exp;
    Rational exponent;
    std::vector<Expr> args;
    bool normal = false;
};

namespace detail {

using Monomial = std::vector<Factor>;

int compare_monomial(const Monomial& a, const Monomial& b);

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const { return compare_monomial(a, b) < 0; }
};

using Poly = std::map<Monomial, CRational, MonoLess>;

Poly to_poly(const Expr& e);
Expr from_poly(const Poly& p);

Poly poly_add(Poly a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const CRational& c);

// Builders for normal-form atoms.
Expr atom_var(Var v);
Expr atom_func(Func f, const Expr& normal_arg);

bool is_compound_atom(const Expr& atom);

}  // namespace detail
}  // namespace schrodclass
