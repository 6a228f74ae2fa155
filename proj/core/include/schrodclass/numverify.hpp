#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "schrodclass/equiv.hpp"
#include "schrodclass/expr.hpp"
#include "schrodclass/field.hpp"

namespace schrodclass {

using cplx = std::complex<double>;

/// Uniform space-time grid; values are indexed (time, space).
struct Grid {
    double x_min = -6.0;
    double x_max = 6.0;
    int n_x = 256;
    double t0 = 0.0;
    double t1 = 0.5;
    int n_t = 1024;

    double dx() const { return (x_max - x_min) / (n_x - 1); }
    double dt() const { return (t1 - t0) / (n_t - 1); }
    double x(int j) const { return x_min + j * dx(); }
    double t(int n) const { return t0 + n * dt(); }
    /// Throws PreconditionError on invalid sizes or spacings.
    void validate() const;
    /// Same extent with both steps halved.
    Grid refined() const;
};

struct NumericSolution {
    Grid grid;
    std::vector<cplx> values;
    Expr potential;

    cplx& at(int n, int j) { return values[static_cast<std::size_t>(n) * grid.n_x + j]; }
    const cplx& at(int n, int j) const { return values[static_cast<std::size_t>(n) * grid.n_x + j]; }
};

using PotentialFn = std::function<cplx(double t, double x)>;

/// Trapezoidal scheme with V at the half step and homogeneous Dirichlet boundaries.
NumericSolution crank_nicolson(const Expr& V, const Expr& initial, const Grid& grid);
NumericSolution crank_nicolson(const Expr& V, const std::vector<cplx>& initial, const Grid& grid);

/// Closed-form field sampled on the grid.
NumericSolution sample_solution(const Expr& psi, const Expr& V, const Grid& grid);

/// max |i D_t psi + D_xx psi + V psi| over interior points, central differences.
double equation_residual(const NumericSolution& sol, const Expr& V);
double equation_residual(const NumericSolution& sol, const PotentialFn& V);

/// Residual of the invariance criterion: the characteristic
/// W = F psi - tau i (psi_xx + V psi) - xi psi_x must again solve the equation.
double invariance_residual(const Expr& V, const StructuredField& Q, const NumericSolution& sol);

struct MapCheck {
    double residual_before = 0.0;
    double residual_after = 0.0;
    NumericSolution image;
};

/// Image of a numeric solution under an admissible transformation. The image
/// x-nodes are the source nodes mapped at the first time, trimmed to the part
/// covered by the source domain at every time.
NumericSolution transform_numeric(const AdmissibleTransform& adm, const NumericSolution& sol, TInterval dom);

/// Throws PreconditionError when the image grid does not fit in the source domain.
MapCheck verify_map(const AdmissibleTransform& adm, const Expr& V, const NumericSolution& sol);

/// Rows "t,x,re,im" with 17 significant digits.
void write_csv(const NumericSolution& sol, std::ostream& out);

/// "SCNS", u32 version, grid record (f64 x_min, f64 x_max, u64 n_x, f64 t0,
/// f64 t1, u64 n_t), then row-major (re, im) f64 pairs, all little-endian.
void write_binary(const NumericSolution& sol, std::ostream& out);
NumericSolution read_binary(std::istream& in);

/// Residuals on a grid and on its refinement.
struct ConvergenceRow {
    std::string label;
    double coarse = 0.0;
    double fine = 0.0;

    double ratio() const { return coarse / fine; }
    /// Ratio inside [lo, hi], or both residuals below the floor.
    bool second_order(double lo = 3.2, double hi = 4.8, double floor = 1e-10) const;
};

struct ConvergenceStudy {
    ConvergenceRow equation;
    std::vector<ConvergenceRow> fields;
    std::optional<ConvergenceRow> map;
    bool passed() const;
};

/// Solves on grid and grid.refined(), then evaluates invariance residuals of
/// every field and, when given, the residual after the map. jobs > 1 runs the
/// independent evaluations concurrently.
ConvergenceStudy convergence_study(const Expr& V, const std::vector<StructuredField>& fields,
                                   const std::vector<std::string>& labels, const Expr& initial, const Grid& grid,
                                   const std::optional<AdmissibleTransform>& map = std::nullopt, int jobs = 1);

}  // namespace schrodclass
