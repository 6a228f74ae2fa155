#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <future>
#include <istream>
#include <ostream>

#include "schrodclass/errors.hpp"
#include "schrodclass/numverify.hpp"

namespace schrodclass {

namespace {

const cplx kI(0.0, 1.0);

void check_finite(cplx v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SingularityError(std::string("non-finite ") + what);
}

// V sampled on the grid; one row when V does not depend on t.
class GridPotential {
public:
    GridPotential(const Expr& V, const Grid& g, bool half_steps = false) : grid_(g) {
        t_free_ = !depends_on(V, Var::t);
        const int rows = t_free_ ? 1 : (half_steps ? g.n_t - 1 : g.n_t);
        values_.resize(static_cast<std::size_t>(rows) * g.n_x);
        for (int n = 0; n < rows; ++n) {
            double t = half_steps ? g.t(n) + 0.5 * g.dt() : g.t(n);
            for (int j = 0; j < g.n_x; ++j) {
                cplx v = eval(V, t, g.x(j));
                check_finite(v, "potential");
                values_[static_cast<std::size_t>(n) * g.n_x + j] = v;
            }
        }
    }
    cplx operator()(int n, int j) const {
        return values_[static_cast<std::size_t>(t_free_ ? 0 : n) * grid_.n_x + j];
    }

private:
    Grid grid_;
    bool t_free_ = false;
    std::vector<cplx> values_;
};

// Solves the tridiagonal system with constant off-diagonal c in place.
void thomas(std::vector<cplx>& diag, cplx off, std::vector<cplx>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t k = 1; k < n; ++k) {
        cplx m = off / diag[k - 1];
        diag[k] -= m * off;
        rhs[k] -= m * rhs[k - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - off * rhs[k + 1]) / diag[k];
}

template <class Pot>
double residual_core(const NumericSolution& sol, const Pot& V) {
    const Grid& g = sol.grid;
    const double idt = 1.0 / (2.0 * g.dt());
    const double idx2 = 1.0 / (g.dx() * g.dx());
    double worst = 0.0;
    for (int n = 1; n + 1 < g.n_t; ++n) {
        for (int j = 1; j + 1 < g.n_x; ++j) {
            cplx psi_t = (sol.at(n + 1, j) - sol.at(n - 1, j)) * idt;
            cplx psi_xx = (sol.at(n, j + 1) - 2.0 * sol.at(n, j) + sol.at(n, j - 1)) * idx2;
            worst = std::max(worst, std::abs(kI * psi_t + psi_xx + V(n, j) * sol.at(n, j)));
        }
    }
    return worst;
}

constexpr int kStencil = 8;

// Lagrange weights on nodes 0..kStencil-1 at fractional position s.
std::array<double, kStencil> lagrange(double s) {
    std::array<double, kStencil> w{};
    for (int a = 0; a < kStencil; ++a) {
        double v = 1.0;
        for (int b = 0; b < kStencil; ++b) {
            if (b != a) v *= (s - b) / double(a - b);
        }
        w[a] = v;
    }
    return w;
}

int stencil_start(double pos, int n) {
    int k = static_cast<int>(std::floor(pos)) - (kStencil / 2 - 1);
    return std::clamp(k, 0, n - kStencil);
}

cplx interpolate(const NumericSolution& sol, double t, double x) {
    const Grid& g = sol.grid;
    double pt = (t - g.t0) / g.dt();
    double px = (x - g.x_min) / g.dx();
    // Snap positions that coincide with grid lines up to roundoff.
    if (std::abs(pt - std::round(pt)) < 1e-9) pt = std::round(pt);
    if (std::abs(px - std::round(px)) < 1e-9) px = std::round(px);
    int nt = stencil_start(pt, g.n_t);
    int jx = stencil_start(px, g.n_x);
    auto wt = lagrange(pt - nt);
    auto wx = lagrange(px - jx);
    cplx out = 0.0;
    for (int a = 0; a < kStencil; ++a) {
        if (wt[a] == 0.0) continue;
        cplx row = 0.0;
        for (int b = 0; b < kStencil; ++b) row += wx[b] * sol.at(nt + a, jx + b);
        out += wt[a] * row;
    }
    return out;
}

double real_at(const Expr& e, double t) {
    return eval(e, t, 0.0).real();
}

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size())) throw PreconditionError("truncated solution dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T v;
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
}

constexpr std::uint32_t kDumpVersion = 1;

}  // namespace

void Grid::validate() const {
    if (n_x < 16 || n_t < 16) throw PreconditionError("grid needs at least 16 points per axis");
    if (!(x_max > x_min)) throw PreconditionError("x_max must exceed x_min");
    if (t1 == t0) throw PreconditionError("time interval must be nonempty");
}

Grid Grid::refined() const {
    Grid g = *this;
    g.n_x = 2 * n_x - 1;
    g.n_t = 2 * n_t - 1;
    return g;
}

NumericSolution crank_nicolson(const Expr& V, const Expr& initial, const Grid& grid) {
    grid.validate();
    std::vector<cplx> psi0(grid.n_x);
    for (int j = 0; j < grid.n_x; ++j) psi0[j] = eval(initial, grid.t0, grid.x(j));
    return crank_nicolson(V, psi0, grid);
}

NumericSolution crank_nicolson(const Expr& V, const std::vector<cplx>& initial, const Grid& grid) {
    grid.validate();
    if (static_cast<int>(initial.size()) != grid.n_x) throw PreconditionError("initial data size mismatch");
    NumericSolution sol{grid, std::vector<cplx>(static_cast<std::size_t>(grid.n_t) * grid.n_x), V};
    GridPotential pot(V, grid, true);
    for (int j = 0; j < grid.n_x; ++j) sol.at(0, j) = initial[j];
    sol.at(0, 0) = 0.0;
    sol.at(0, grid.n_x - 1) = 0.0;
    // psi_t = i (psi_xx + V psi)
    const int m = grid.n_x - 2;
    const double h = grid.dt();
    const double idx2 = 1.0 / (grid.dx() * grid.dx());
    const cplx off = -0.5 * h * kI * idx2;
    std::vector<cplx> diag(m), rhs(m);
    for (int n = 0; n + 1 < grid.n_t; ++n) {
        for (int k = 0; k < m; ++k) {
            int j = k + 1;
            cplx a = kI * (-2.0 * idx2 + pot(n, j));
            diag[k] = 1.0 - 0.5 * h * a;
            cplx lap = (sol.at(n, j + 1) - 2.0 * sol.at(n, j) + sol.at(n, j - 1)) * idx2;
            rhs[k] = sol.at(n, j) + 0.5 * h * kI * (lap + pot(n, j) * sol.at(n, j));
        }
        thomas(diag, off, rhs);
        for (int k = 0; k < m; ++k) {
            check_finite(rhs[k], "solution");
            sol.at(n + 1, k + 1) = rhs[k];
        }
    }
    return sol;
}

NumericSolution sample_solution(const Expr& psi, const Expr& V, const Grid& grid) {
    grid.validate();
    NumericSolution sol{grid, std::vector<cplx>(static_cast<std::size_t>(grid.n_t) * grid.n_x), V};
    for (int n = 0; n < grid.n_t; ++n) {
        for (int j = 0; j < grid.n_x; ++j) sol.at(n, j) = eval(psi, grid.t(n), grid.x(j));
    }
    return sol;
}

double equation_residual(const NumericSolution& sol, const Expr& V) {
    GridPotential pot(V, sol.grid);
    return residual_core(sol, pot);
}

double equation_residual(const NumericSolution& sol, const PotentialFn& V) {
    const Grid& g = sol.grid;
    return residual_core(sol, [&](int n, int j) { return V(g.t(n), g.x(j)); });
}

double invariance_residual(const Expr& V, const StructuredField& Q, const NumericSolution& sol) {
    const Grid& g = sol.grid;
    GridPotential pot(V, g);
    std::array<Expr, 7> coeff{Q.tau,          diff(Q.tau, Var::t), diff(Q.tau, Var::t, 2), Q.chi,
                              diff(Q.chi, Var::t), Q.sigma,        Q.rho};
    for (const auto& c : coeff) {
        if (depends_on(c, Var::x)) throw PreconditionError("field coefficients must not depend on x");
    }
    const Expr eta0 = Q.eta0.value_or(Expr());
    const double idx = 1.0 / (2.0 * g.dx());
    const double idx2 = 1.0 / (g.dx() * g.dx());
    // W on columns 1 .. n_x-2
    std::vector<cplx> W(static_cast<std::size_t>(g.n_t) * g.n_x, 0.0);
    auto w = [&](int n, int j) -> cplx& { return W[static_cast<std::size_t>(n) * g.n_x + j]; };
    for (int n = 0; n < g.n_t; ++n) {
        double t = g.t(n);
        std::array<double, 7> c{};
        for (int k = 0; k < 7; ++k) c[k] = coeff[k].is_zero_exact() ? 0.0 : real_at(coeff[k], t);
        const double tau = c[0], tau_t = c[1], tau_tt = c[2], chi = c[3], chi_t = c[4], sigma = c[5], rho = c[6];
        for (int j = 1; j + 1 < g.n_x; ++j) {
            double x = g.x(j);
            cplx psi = sol.at(n, j);
            cplx psi_x = (sol.at(n, j + 1) - sol.at(n, j - 1)) * idx;
            cplx psi_xx = (sol.at(n, j + 1) - 2.0 * psi + sol.at(n, j - 1)) * idx2;
            cplx F = kI * (tau_tt * x * x / 8.0 + chi_t * x / 2.0 + sigma) + rho;
            double xi = 0.5 * tau_t * x + chi;
            cplx val = F * psi - tau * kI * (psi_xx + pot(n, j) * psi) - xi * psi_x;
            if (!eta0.is_zero_exact()) val += eval(eta0, t, x);
            w(n, j) = val;
        }
    }
    const double idt = 1.0 / (2.0 * g.dt());
    double worst = 0.0;
    for (int n = 1; n + 1 < g.n_t; ++n) {
        for (int j = 2; j + 2 < g.n_x; ++j) {
            cplx w_t = (w(n + 1, j) - w(n - 1, j)) * idt;
            cplx w_xx = (w(n, j + 1) - 2.0 * w(n, j) + w(n, j - 1)) * idx2;
            worst = std::max(worst, std::abs(kI * w_t + w_xx + pot(n, j) * w(n, j)));
        }
    }
    return worst;
}

NumericSolution transform_numeric(const AdmissibleTransform& adm, const NumericSolution& sol, TInterval dom) {
    const EquivTransform& g = adm.base;
    const Grid& src = sol.grid;
    const int ep = eps_prime(g, dom);
    const Expr Tt = diff(g.T, Var::t);

    // Image x-range covered by the source domain at every time.
    const double margin = 2.0 * src.dx();
    double lo = -INFINITY, hi = INFINITY;
    for (int n = 0; n < src.n_t; ++n) {
        double t = src.t(n);
        double s = std::sqrt(std::abs(real_at(Tt, t)));
        double x0 = real_at(g.X0, t);
        double a = g.eps * s * (src.x_min + margin) + x0;
        double b = g.eps * s * (src.x_max - margin) + x0;
        lo = std::max(lo, std::min(a, b));
        hi = std::min(hi, std::max(a, b));
    }
    if (!(hi > lo)) throw PreconditionError("image grid does not fit inside the source domain");
    TInterval img = image_interval(g, {src.t0, src.t1});
    // Image nodes are the source nodes mapped at the first time, so that maps
    // with constant scaling and shift need no spatial interpolation.
    const double s0 = std::sqrt(std::abs(real_at(Tt, src.t0)));
    const double x00 = real_at(g.X0, src.t0);
    std::vector<double> nodes;
    for (int j = 0; j < src.n_x; ++j) {
        double y = g.eps * s0 * src.x(j) + x00;
        if (y >= lo && y <= hi) nodes.push_back(y);
    }
    if (nodes.size() < 16) throw PreconditionError("image grid does not fit inside the source domain");
    std::sort(nodes.begin(), nodes.end());
    double t_first = real_at(g.T, src.t0);
    if (std::abs(t_first - img.lo) > std::abs(t_first - img.hi)) std::swap(img.lo, img.hi);
    Grid out_grid{nodes.front(), nodes.back(), static_cast<int>(nodes.size()), img.lo, img.hi, src.n_t};
    NumericSolution out{out_grid, std::vector<cplx>(static_cast<std::size_t>(out_grid.n_t) * out_grid.n_x), Expr()};
    const Expr mult = solution_multiplier(g, dom);
    for (int n = 0; n < out_grid.n_t; ++n) {
        double t = invert_time_numeric(g.T, dom, out_grid.t(n));
        double s = std::sqrt(std::abs(real_at(Tt, t)));
        double x0 = real_at(g.X0, t);
        for (int j = 0; j < out_grid.n_x; ++j) {
            double x = g.eps * (out_grid.x(j) - x0) / s;
            cplx psi = interpolate(sol, t, x);
            if (!adm.Phi.is_zero_exact()) psi += eval(adm.Phi, t, x);
            if (ep < 0) psi = std::conj(psi);
            out.at(n, j) = eval(mult, t, x) * psi;
        }
    }
    return out;
}

MapCheck verify_map(const AdmissibleTransform& adm, const Expr& V, const NumericSolution& sol) {
    TInterval dom{std::min(sol.grid.t0, sol.grid.t1), std::max(sol.grid.t0, sol.grid.t1)};
    MapCheck out;
    out.residual_before = equation_residual(sol, V);
    out.image = transform_numeric(adm, sol, dom);
    TransformedPotential tp = transform_potential(V, adm.base, dom);
    if (tp.potential) {
        out.image.potential = *tp.potential;
        out.residual_after = equation_residual(out.image, *tp.potential);
    } else {
        out.residual_after = equation_residual(out.image, [&](double t, double x) { return tp.eval(t, x); });
    }
    return out;
}

void write_csv(const NumericSolution& sol, std::ostream& out) {
    const Grid& g = sol.grid;
    char line[128];
    out << "t,x,re,im\n";
    for (int n = 0; n < g.n_t; ++n) {
        for (int j = 0; j < g.n_x; ++j) {
            const cplx& v = sol.at(n, j);
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", g.t(n), g.x(j), v.real(), v.imag());
            out << line;
        }
    }
}

void write_binary(const NumericSolution& sol, std::ostream& out) {
    const Grid& g = sol.grid;
    out.write("SCNS", 4);
    put<std::uint32_t>(out, kDumpVersion);
    put<double>(out, g.x_min);
    put<double>(out, g.x_max);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(g.n_x));
    put<double>(out, g.t0);
    put<double>(out, g.t1);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(g.n_t));
    for (const auto& v : sol.values) {
        put<double>(out, v.real());
        put<double>(out, v.imag());
    }
}

NumericSolution read_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SCNS", 4) != 0) throw PreconditionError("not a solution dump");
    if (get<std::uint32_t>(in) != kDumpVersion) throw PreconditionError("unsupported dump version");
    NumericSolution sol;
    sol.grid.x_min = get<double>(in);
    sol.grid.x_max = get<double>(in);
    sol.grid.n_x = static_cast<int>(get<std::uint64_t>(in));
    sol.grid.t0 = get<double>(in);
    sol.grid.t1 = get<double>(in);
    sol.grid.n_t = static_cast<int>(get<std::uint64_t>(in));
    sol.grid.validate();
    sol.values.resize(static_cast<std::size_t>(sol.grid.n_t) * sol.grid.n_x);
    for (auto& v : sol.values) {
        double re = get<double>(in);
        double im = get<double>(in);
        v = cplx(re, im);
    }
    return sol;
}

bool ConvergenceRow::second_order(double lo, double hi, double floor) const {
    if (coarse < floor && fine < floor) return true;
    double r = ratio();
    return r >= lo && r <= hi;
}

bool ConvergenceStudy::passed() const {
    if (!equation.second_order()) return false;
    for (const auto& f : fields) {
        if (!f.second_order()) return false;
    }
    return !map || map->second_order();
}

ConvergenceStudy convergence_study(const Expr& V, const std::vector<StructuredField>& fields,
                                   const std::vector<std::string>& labels, const Expr& initial, const Grid& grid,
                                   const std::optional<AdmissibleTransform>& map, int jobs) {
    if (labels.size() != fields.size()) throw PreconditionError("one label per field required");
    const auto policy = jobs > 1 ? std::launch::async : std::launch::deferred;
    auto coarse_f = std::async(policy, [&] { return crank_nicolson(V, initial, grid); });
    auto fine_f = std::async(policy, [&] { return crank_nicolson(V, initial, grid.refined()); });
    const NumericSolution coarse = coarse_f.get();
    const NumericSolution fine = fine_f.get();

    ConvergenceStudy out;
    out.equation = {"equation", equation_residual(coarse, V), equation_residual(fine, V)};
    std::vector<std::future<ConvergenceRow>> rows;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        rows.push_back(std::async(policy, [&, k] {
            return ConvergenceRow{labels[k], invariance_residual(V, fields[k], coarse),
                                  invariance_residual(V, fields[k], fine)};
        }));
    }
    std::future<ConvergenceRow> map_row;
    if (map) {
        map_row = std::async(policy, [&] {
            return ConvergenceRow{"map", verify_map(*map, V, coarse).residual_after,
                                  verify_map(*map, V, fine).residual_after};
        });
    }
    for (auto& r : rows) out.fields.push_back(r.get());
    if (map) out.map = map_row.get();
    return out;
}

}  // namespace schrodclass
