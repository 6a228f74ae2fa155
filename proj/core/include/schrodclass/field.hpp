#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "schrodclass/expr.hpp"

namespace schrodclass {

/// Q = D(tau) + G(chi) + sigma*M + rho*I + Z(eta0).
///
/// D(tau) = tau dt + tau_t x/2 dx + tau_tt x^2/8 M,
/// G(chi) = chi dx + chi_t x/2 M, M = i psi dpsi + c.c., I = psi dpsi + c.c.
struct StructuredField {
    Expr tau;
    Expr chi;
    Expr sigma;
    Expr rho;
    std::optional<Expr> eta0;

    static StructuredField D(const Expr& tau);
    static StructuredField G(const Expr& chi);
    static StructuredField M(const Expr& sigma = Expr(1));
    static StructuredField I(const Expr& rho = Expr(1));
    static StructuredField Z(const Expr& eta0);

    bool has_z() const;
};

StructuredField operator+(const StructuredField& a, const StructuredField& b);
StructuredField operator-(const StructuredField& a, const StructuredField& b);
StructuredField operator*(const Expr& scalar, const StructuredField& q);

/// Componentwise symbolic equality (via is_zero on differences).
bool same_field(const StructuredField& a, const StructuredField& b);

/// Closed-form bracket of two fields of the span.
StructuredField commutator(const StructuredField& a, const StructuredField& b);

/// Action of Q on the inhomogeneous part, [Q, Z(zeta)] = Z(act(Q, zeta)).
Expr z_action(const StructuredField& q, const Expr& zeta);

struct CoefficientForm {
    Expr tau;
    Expr xi;
    Expr multiplier;  // eta = multiplier * psi + eta0
    Expr eta0;
};

CoefficientForm coefficient_form(const StructuredField& q);

struct SpanRank {
    int dim = 0;
    Certainty certainty = Certainty::Exact;
    /// Ratio of the smallest retained to the largest discarded singular value
    /// of the sampled evaluation matrix (infinity if nothing was discarded).
    double gap = 0.0;
};

/// Rank over the reals of a list of vectors of expressions.
SpanRank expr_rank(const std::vector<std::vector<Expr>>& rows, double t_lo = 0.5, double t_hi = 2.0);

SpanRank span_dimension(const std::vector<StructuredField>& span, double t_lo = 0.5, double t_hi = 2.0);

struct KInvariants {
    int k1 = 0;
    int k2 = 0;
    Certainty certainty = Certainty::Exact;
};

/// Requires M and I in the span; throws PreconditionError otherwise.
KInvariants k_invariants(const std::vector<StructuredField>& span, double t_lo = 0.5, double t_hi = 2.0);

enum class JordanType { Hyperbolic, Elliptic, Nilpotent, Zero };

const char* jordan_name(JordanType j) noexcept;

using Matrix2 = std::array<std::array<Rational, 2>, 2>;

struct AdjointResult {
    Matrix2 matrix;      // [P0, Q_p] = sum_q a_pq Q_q + a_p3 M + a_p4 I
    JordanType type = JordanType::Zero;
    Matrix2 canonical;   // normalized real Jordan form
};

AdjointResult adjoint_gpart(const StructuredField& p0, const StructuredField& q1, const StructuredField& q2);

/// Constant real coefficients c with target = sum c_k basis_k, verified
/// symbolically; nullopt if no such combination exists.
std::optional<std::vector<Rational>> constant_combination(const StructuredField& target,
                                                          const std::vector<StructuredField>& basis);

std::string to_string(const StructuredField& q);

}  // namespace schrodclass
