#include <gtest/gtest.h>

#include "schrodclass/errors.hpp"
#include "schrodclass/field.hpp"
#include "schrodclass/fixtures.hpp"
#include "support.hpp"

using namespace schrodclass;
using schrodclass::testsupport::Rng;
using SF = StructuredField;

namespace {

Expr p(const char* s) { return parse(s); }

std::vector<SF> generators() {
    std::vector<SF> out;
    for (int k = 0; k <= 3; ++k) {
        Expr tk = pow(Expr::t(), Rational(k));
        out.push_back(SF::D(tk));
        out.push_back(SF::G(tk));
        out.push_back(SF::M(tk));
        out.push_back(SF::I(tk));
    }
    return out;
}

}  // namespace

TEST(Commutator, Examples) {
    EXPECT_TRUE(same_field(commutator(SF::D(p("1")), SF::D(p("t"))), SF::D(p("1"))));
    EXPECT_TRUE(same_field(commutator(SF::G(p("1")), SF::G(p("t"))), SF::M(p("1/2"))));
    EXPECT_TRUE(testsupport::is_zero_field(commutator(SF::M(), SF::I())));
    EXPECT_TRUE(same_field(commutator(SF::D(p("t")), SF::G(p("1"))), SF::G(p("-1/2"))));
}

TEST(Commutator, ZActions) {
    // [M, Z(zeta)] = Z(-i zeta), [I, Z(zeta)] = Z(-zeta)
    Expr zeta = p("exp(i*x - i*t)");
    SF m = commutator(SF::M(), SF::Z(zeta));
    ASSERT_TRUE(m.eta0.has_value());
    EXPECT_TRUE(is_zero(*m.eta0 + Expr::i() * zeta));
    SF i = commutator(SF::I(), SF::Z(zeta));
    ASSERT_TRUE(i.eta0.has_value());
    EXPECT_TRUE(is_zero(*i.eta0 + zeta));
}

TEST(Commutator, AntisymmetryAndClosure) {
    Rng rng(21);
    for (int n = 0; n < 30; ++n) {
        SF a = rng.z_free_field(), b = rng.z_free_field();
        SF ab = commutator(a, b);
        EXPECT_FALSE(ab.has_z());
        EXPECT_TRUE(testsupport::is_zero_field(ab + commutator(b, a)));
    }
}

TEST(Commutator, MatchesCoefficientBracket) {
    Rng rng(22);
    for (int n = 0; n < 20; ++n) {
        SF a = rng.z_free_field(), b = rng.z_free_field();
        EXPECT_TRUE(testsupport::bracket_consistent(a, b)) << to_string(a) << " , " << to_string(b);
    }
}

TEST(Commutator, JacobiOnGenerators) {
    auto gens = generators();
    for (std::size_t a = 0; a < gens.size(); a += 3) {
        for (std::size_t b = 1; b < gens.size(); b += 2) {
            for (std::size_t c = 2; c < gens.size(); c += 5) {
                EXPECT_TRUE(testsupport::is_zero_field(testsupport::jacobi_sum(gens[a], gens[b], gens[c])));
            }
        }
    }
}

TEST(CoefficientForm, Examples) {
    CoefficientForm d = coefficient_form(SF::D(p("t^2")));
    EXPECT_TRUE(is_zero(d.xi - p("t*x")));
    EXPECT_TRUE(is_zero(d.multiplier - p("i*x^2/4")));
    CoefficientForm g = coefficient_form(SF::G(p("1")));
    EXPECT_TRUE(is_zero(g.xi - p("1")));
    EXPECT_TRUE(g.multiplier.is_zero_exact());
    CoefficientForm m = coefficient_form(SF::M());
    EXPECT_TRUE(m.xi.is_zero_exact());
    EXPECT_TRUE(is_zero(m.multiplier - p("i")));
}

TEST(SpanDimension, Examples) {
    EXPECT_EQ(span_dimension({SF::M(), SF::I()}).dim, 2);
    EXPECT_EQ(span_dimension({SF::G(p("1")), SF::G(p("t")), SF::M()}).dim, 3);
    const auto& free = fixture_case(1, "6");
    EXPECT_EQ(span_dimension(free.basis(free.instances[0])).dim, 7);
    EXPECT_EQ(span_dimension({SF::G(p("t")), SF::G(p("2*t")), SF::M()}).dim, 2);
}

TEST(KInvariants, TableRows) {
    EXPECT_EQ(k_invariants({SF::M(), SF::I()}).k1, 0);
    EXPECT_EQ(k_invariants({SF::M(), SF::I()}).k2, 0);
    for (const auto& table : table_fixtures()) {
        for (const auto& c : table.cases) {
            for (const auto& inst : c.instances) {
                KInvariants k = k_invariants(c.basis(inst));
                EXPECT_EQ(k.k1, c.k1) << "table " << table.table << " case " << c.case_id;
                EXPECT_EQ(k.k2, c.k2) << "table " << table.table << " case " << c.case_id;
            }
        }
    }
}

TEST(KInvariants, RequiresKernel) {
    EXPECT_THROW(k_invariants({SF::M(), SF::D(p("1"))}), PreconditionError);
}

TEST(Adjoint, JordanTypes) {
    EXPECT_EQ(adjoint_gpart(SF::D(p("1")), SF::G(p("exp(t)")), SF::G(p("exp(-t)"))).type, JordanType::Hyperbolic);
    EXPECT_EQ(adjoint_gpart(SF::D(p("1")), SF::G(p("cos(t)")), SF::G(p("sin(t)"))).type, JordanType::Elliptic);
    EXPECT_EQ(adjoint_gpart(SF::D(p("1")), SF::G(p("1")), SF::G(p("t"))).type, JordanType::Nilpotent);
}

TEST(Adjoint, HyperbolicMatrix) {
    AdjointResult r = adjoint_gpart(SF::D(p("1")), SF::G(p("exp(t)")), SF::G(p("exp(-t)")));
    EXPECT_EQ(r.matrix[0][0], Rational(1));
    EXPECT_EQ(r.matrix[1][1], Rational(-1));
    EXPECT_EQ(r.matrix[0][1], Rational(0));
}

TEST(Adjoint, BracketOutsideSpanThrows) {
    EXPECT_THROW(adjoint_gpart(SF::D(p("t")), SF::G(p("exp(t)")), SF::G(p("exp(-t)"))), std::exception);
}
