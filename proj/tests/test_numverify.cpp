#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "schrodclass/errors.hpp"
#include "schrodclass/numverify.hpp"

using namespace schrodclass;
using SF = StructuredField;

namespace {

Expr p(const char* s) { return parse(s); }

const char* kGaussian = "(1 + 4*i*t)^(-1/2)*exp(0 - (x - 1/2)^2/(1 + 4*i*t))";

Grid small_grid() {
    Grid g;
    g.x_min = -8.0;
    g.x_max = 8.0;
    g.n_x = 201;
    g.t0 = 0.0;
    g.t1 = 0.25;
    g.n_t = 101;
    return g;
}

double l2_error(const NumericSolution& a, const NumericSolution& b) {
    double worst = 0.0;
    for (int n = 0; n < a.grid.n_t; ++n) {
        double sum = 0.0;
        for (int j = 0; j < a.grid.n_x; ++j) sum += std::norm(a.at(n, j) - b.at(n, j));
        worst = std::max(worst, std::sqrt(sum * a.grid.dx()));
    }
    return worst;
}

double l2_norm(const NumericSolution& s, int n) {
    double sum = 0.0;
    for (int j = 0; j < s.grid.n_x; ++j) sum += std::norm(s.at(n, j));
    return std::sqrt(sum * s.grid.dx());
}

}  // namespace

TEST(Grid, Validation) {
    Grid g;
    EXPECT_NO_THROW(g.validate());
    g.n_x = 8;
    EXPECT_THROW(g.validate(), PreconditionError);
    g = Grid{};
    g.x_max = g.x_min;
    EXPECT_THROW(g.validate(), PreconditionError);
    g = Grid{};
    g.t1 = g.t0;
    EXPECT_THROW(g.validate(), PreconditionError);
}

TEST(Grid, RefinedHalvesSteps) {
    Grid g = small_grid();
    Grid r = g.refined();
    EXPECT_EQ(r.n_x, 2 * g.n_x - 1);
    EXPECT_EQ(r.n_t, 2 * g.n_t - 1);
    EXPECT_NEAR(r.dx(), g.dx() / 2, 1e-15);
    EXPECT_NEAR(r.dt(), g.dt() / 2, 1e-15);
}

TEST(CrankNicolson, FreeGaussianConvergesAtSecondOrder) {
    Grid g = small_grid();
    Expr psi = p(kGaussian);
    double e1 = l2_error(crank_nicolson(p("0"), psi, g), sample_solution(psi, p("0"), g));
    Grid r = g.refined();
    double e2 = l2_error(crank_nicolson(p("0"), psi, r), sample_solution(psi, p("0"), r));
    EXPECT_LT(e1, 1e-2);
    EXPECT_GT(e1 / e2, 3.2);
    EXPECT_LT(e1 / e2, 4.8);
}

TEST(CrankNicolson, ConstantStaysConstantInTheInterior) {
    Grid g = small_grid();
    g.x_min = -40.0;
    g.x_max = 40.0;
    g.n_x = 801;
    g.t1 = 0.05;
    NumericSolution s = crank_nicolson(p("0"), p("1"), g);
    int mid = g.n_x / 2;
    for (int j = mid - 50; j <= mid + 50; ++j) EXPECT_LT(std::abs(s.at(g.n_t - 1, j) - 1.0), 1e-6);
}

TEST(CrankNicolson, NormConservedForRealPotential) {
    Grid g = small_grid();
    NumericSolution s = crank_nicolson(p("x^2/10 + sin(t)"), p("exp(0 - x^2)*exp(i*x)"), g);
    double n0 = l2_norm(s, 0);
    for (int n = 0; n < g.n_t; ++n) EXPECT_LE(std::abs(l2_norm(s, n) - n0) / n0, 1e-8 * g.n_t);
}

TEST(CrankNicolson, RejectsSingularGridPoint) {
    Grid g = small_grid();
    g.x_min = -1.0;
    g.x_max = 1.0;
    g.n_x = 21;
    EXPECT_THROW(crank_nicolson(p("x^(-2)"), p("exp(0 - x^2)"), g), SingularityError);
}

TEST(EquationResidual, ExactGaussianAtSecondOrder) {
    Grid g = small_grid();
    Expr psi = p(kGaussian);
    double r1 = equation_residual(sample_solution(psi, p("0"), g), p("0"));
    double r2 = equation_residual(sample_solution(psi, p("0"), g.refined()), p("0"));
    EXPECT_GT(r1 / r2, 3.2);
    EXPECT_LT(r1 / r2, 4.8);
}

TEST(EquationResidual, ZeroAndNoise) {
    Grid g = small_grid();
    NumericSolution zero = sample_solution(p("0"), p("0"), g);
    EXPECT_EQ(equation_residual(zero, p("0")), 0.0);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> d;
    NumericSolution noise = zero;
    for (auto& v : noise.values) v = {d(gen), d(gen)};
    EXPECT_GT(equation_residual(noise, p("0")), 1.0 / (g.dx() * g.dx()));
}

TEST(EquationResidual, CallableAgreesWithExpression) {
    Grid g = small_grid();
    NumericSolution s = crank_nicolson(p("x/3"), p("exp(0 - x^2)"), g);
    PotentialFn fn = [](double, double x) { return cplx(x / 3.0, 0.0); };
    EXPECT_NEAR(equation_residual(s, fn), equation_residual(s, p("x/3")), 1e-12);
}

TEST(InvarianceResidual, IdentityFieldReproducesEquation) {
    Grid g = small_grid();
    NumericSolution s = crank_nicolson(p("x/3"), p("exp(0 - x^2)"), g);
    EXPECT_NEAR(invariance_residual(p("x/3"), SF::I(), s), equation_residual(s, p("x/3")), 1e-9);
}

TEST(InvarianceResidual, GalileanFieldOnExactGaussian) {
    Grid g = small_grid();
    Expr psi = p(kGaussian);
    double r1 = invariance_residual(p("0"), SF::G(p("1")), sample_solution(psi, p("0"), g));
    double r2 = invariance_residual(p("0"), SF::G(p("1")), sample_solution(psi, p("0"), g.refined()));
    EXPECT_GT(r1 / r2, 3.2);
    EXPECT_LT(r1 / r2, 4.8);
}

TEST(InvarianceResidual, InverseSquareConformalField) {
    Grid g{1.0, 13.0, 201, 0.0, 0.25, 101};
    Expr V = p("x^(-2)");
    Expr init = p("exp(0 - (x - 7)^2)");
    SF q = SF::D(p("t^2")) - p("t/2") * SF::I();
    double r1 = invariance_residual(V, q, crank_nicolson(V, init, g));
    double r2 = invariance_residual(V, q, crank_nicolson(V, init, g.refined()));
    EXPECT_GT(r1 / r2, 3.2);
    EXPECT_LT(r1 / r2, 4.8);
    SF bad = q + p("t/10") * SF::I();
    EXPECT_GT(invariance_residual(V, bad, crank_nicolson(V, init, g.refined())), 10 * r2);
}

TEST(VerifyMap, IdentityLeavesResidualUnchanged) {
    Grid g = small_grid();
    NumericSolution s = crank_nicolson(p("0"), p("exp(0 - x^2)"), g);
    MapCheck m = verify_map({EquivTransform::identity(), Expr()}, p("0"), s);
    EXPECT_NEAR(m.residual_after, m.residual_before, 1e-12 * std::max(1.0, m.residual_before));
}

TEST(VerifyMap, GalileanBoostOfExactGaussian) {
    Grid g = small_grid();
    EquivTransform boost = EquivTransform::shift(p("t"));
    boost.Sigma = p("t/4");
    AdmissibleTransform adm{boost, Expr()};
    Expr psi = p(kGaussian);
    MapCheck c = verify_map(adm, p("0"), sample_solution(psi, p("0"), g));
    MapCheck f = verify_map(adm, p("0"), sample_solution(psi, p("0"), g.refined()));
    EXPECT_GT(c.residual_after / f.residual_after, 3.2);
    EXPECT_LT(c.residual_after / f.residual_after, 4.8);
}

TEST(VerifyMap, ScalingOfInverseSquare) {
    Grid g{1.0, 13.0, 201, 0.0, 0.25, 101};
    Expr V = p("x^(-2)");
    Expr init = p("exp(0 - (x - 7)^2)");
    AdmissibleTransform adm{EquivTransform::time(p("2*t")), Expr()};
    MapCheck c = verify_map(adm, V, crank_nicolson(V, init, g));
    MapCheck f = verify_map(adm, V, crank_nicolson(V, init, g.refined()));
    EXPECT_LE(f.residual_after, 5 * f.residual_before);
    EXPECT_GT(c.residual_after / f.residual_after, 3.2);
    EXPECT_LT(c.residual_after / f.residual_after, 4.8);
}

TEST(Export, CsvRows) {
    Grid g{0.0, 1.0, 16, 0.0, 1.0, 16};
    NumericSolution s = sample_solution(p("x + i*t"), p("0"), g);
    std::ostringstream out;
    write_csv(s, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,x,re,im");
    int rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    EXPECT_EQ(rows, 16 * 16);
    EXPECT_EQ(last, "1,1,1,1");
}

TEST(Export, BinaryRoundTripAndHeader) {
    Grid g{-1.0, 2.0, 17, 0.5, 1.0, 19};
    NumericSolution s = sample_solution(p("exp(i*x*t) + x^2"), p("0"), g);
    std::ostringstream out;
    write_binary(s, out);
    std::string bytes = out.str();
    ASSERT_EQ(bytes.size(), 4 + 4 + 6 * 8 + 16u * 17 * 19);
    EXPECT_EQ(bytes.substr(0, 4), "SCNS");
    std::uint32_t version;
    std::memcpy(&version, bytes.data() + 4, 4);
    EXPECT_EQ(version, 1u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
    double x_min;
    std::memcpy(&x_min, bytes.data() + 8, 8);
    EXPECT_EQ(x_min, -1.0);
    std::istringstream in(bytes);
    NumericSolution back = read_binary(in);
    EXPECT_EQ(back.grid.n_x, 17);
    EXPECT_EQ(back.grid.n_t, 19);
    EXPECT_EQ(back.grid.t0, 0.5);
    EXPECT_EQ(back.values, s.values);
}

TEST(Export, BinaryRejectsBadMagic) {
    std::istringstream in(std::string("XXXX\1\0\0\0", 8));
    EXPECT_ANY_THROW(read_binary(in));
}

TEST(Convergence, StudyOnFreeEquation) {
    Grid g = small_grid();
    ConvergenceStudy st = convergence_study(p("0"), {SF::G(p("t")), SF::D(p("t"))}, {"G(t)", "D(t)"},
                                            p("exp(0 - x^2)"), g, std::nullopt, 2);
    EXPECT_TRUE(st.passed());
    EXPECT_EQ(st.fields.size(), 2u);
    EXPECT_FALSE(st.map.has_value());
}

TEST(Convergence, RowCriterion) {
    EXPECT_TRUE((ConvergenceRow{"a", 4.0, 1.0}).second_order());
    EXPECT_FALSE((ConvergenceRow{"a", 2.0, 1.0}).second_order());
    EXPECT_TRUE((ConvergenceRow{"a", 1e-12, 1e-12}).second_order());
}
