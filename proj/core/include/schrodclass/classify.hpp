#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "schrodclass/equiv.hpp"
#include "schrodclass/expr.hpp"
#include "schrodclass/field.hpp"

namespace schrodclass {

/// tau V_t + (tau_t x/2 + chi) V_x + tau_t V - tau_ttt x^2/8 - chi_tt x/2 - sigma_t + i rho_t + i tau_tt/4.
Expr classifying_residual(const Expr& V, const StructuredField& q);

/// Linear row over the state (tau, tau_t, tau_tt, chi, chi_t, sigma, rho).
using StateRow = std::array<Expr, 7>;

enum StateIndex { kTau = 0, kTauT, kTauTT, kChi, kChiT, kSigma, kRho };

struct DeterminingSystem {
    StateRow tau_ttt;
    StateRow chi_tt;
    StateRow sigma_t;
    StateRow rho_t;
    std::vector<StateRow> constraints;

    /// A(t) with state' = A(t) state.
    std::array<std::array<double, 7>, 7> matrix(double t) const;
};

/// Throws UnsplittableError when V does not separate into t- and x-factors.
DeterminingSystem split_determining(const Expr& V);

struct NumericAlgebra {
    int dim = 0;
    int k1 = 0;
    int k2 = 0;
    /// Ratio of the smallest retained to the largest discarded singular value.
    double gap = 0.0;
    /// Real Jordan type of the adjoint action on the G-part when k1 = 1, k2 = 2.
    std::optional<JordanType> jordan;
};

/// Oracle for the dimension of the essential algebra: fundamental matrix of
/// the canonical ODE system with x-sampled splitting.
NumericAlgebra numeric_algebra(const Expr& V, TInterval iv = {0.5, 1.5});

int numeric_dimension(const Expr& V, TInterval iv = {0.5, 1.5});

struct EssentialAlgebra {
    std::vector<StructuredField> basis;  // M, I first
    bool complete = true;
    Certainty certainty = Certainty::Exact;
};

EssentialAlgebra essential_algebra(const Expr& V, TInterval iv = {0.5, 1.5});

enum class ReportStatus { Exact, Probabilistic, NumericOnly };

const char* status_name(ReportStatus s) noexcept;

struct ClassificationReport {
    int table = 1;
    std::string case_id;
    int k1 = 0;
    int k2 = 0;
    int dim_ess = 0;
    std::vector<StructuredField> basis;
    std::optional<Expr> canonical_potential;
    std::optional<EquivTransform> mapping;
    bool maximal = true;
    std::optional<std::string> violated_condition;
    ReportStatus status = ReportStatus::Exact;
    std::optional<SubclassEquivTransform> subclass_mapping;
    std::vector<std::string> notes;
};

ClassificationReport classify_full(const Expr& V, TInterval iv = {0.5, 1.5});

ClassificationReport classify_subclass(const Expr& gamma, TInterval iv = {0.5, 1.5});

/// Throws PreconditionError for non-real V.
ClassificationReport classify_real(const Expr& V, TInterval iv = {0.5, 1.5});

struct GFieldNormalization {
    EquivTransform g;
    StructuredField result;
};

/// For Q = G(chi) + sigma M + rho I with chi nonvanishing on the interval.
/// Throws NotRepresentableError when the required quadratures leave the grammar.
GFieldNormalization normalize_gfield(const StructuredField& q, TInterval iv = {0.5, 2.0});

/// G(t) + rho2 I with rho2 = int t rho1_t dt.
StructuredField extend_g1_to_gt(const Expr& rho1);

/// Fit V = b2 x^2 + b1 x + b0 + c (x + a)^(-2) with t-independent constants.
struct QuadraticPoleFit {
    Rational a{0};
    Rational b2{0};
    CRational b1, b0, c;
};

std::optional<QuadraticPoleFit> fit_quadratic_pole(const Expr& V);

/// Coefficients (c0, c1, c2) when |gamma|^(-2/3) is a quadratic polynomial.
std::optional<std::array<Rational, 3>> gamma_quadratic(const Expr& gamma, TInterval iv = {0.5, 1.5});

}  // namespace schrodclass
