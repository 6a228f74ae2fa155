#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "expr_internal.hpp"
#include "schrodclass/classify.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

const Expr& tv() {
    static const Expr t = Expr::t();
    return t;
}

const Expr& xv() {
    static const Expr x = Expr::x();
    return x;
}

// Local chart used for all zero tests of the classification.
ProbeBox chart(TInterval iv) {
    ProbeBox box;
    box.t_lo = iv.lo;
    box.t_hi = iv.hi;
    box.x_lo = 0.3;
    box.x_hi = 2.9;
    return box;
}

struct ZeroCheck {
    bool zero = false;
    Certainty certainty = Certainty::Exact;
};

ZeroCheck check_zero(const Expr& e, const ProbeBox& box) {
    if (e.is_zero_exact()) return {true, Certainty::Exact};
    try {
        ZeroTest z = zero_test(e, box);
        return {z.zero, z.certainty};
    } catch (const InconclusiveError&) {
        return {false, Certainty::Probabilistic};
    }
}

bool zero_on(const Expr& e, TInterval iv) {
    return check_zero(e, chart(iv)).zero;
}

void merge(Certainty& acc, Certainty c) {
    if (c == Certainty::Probabilistic) acc = Certainty::Probabilistic;
}

double midpoint(TInterval iv) {
    return 0.5 * (iv.lo + iv.hi);
}

// +1/-1 when e is real with constant sign on the interval, 0 otherwise.
int sign_on(const Expr& e, TInterval iv) {
    int s = 0;
    for (int k = 0; k <= 16; ++k) {
        double t = iv.lo + (iv.hi - iv.lo) * k / 16.0;
        std::complex<double> v;
        try {
            v = eval(e, t, 1.0);
        } catch (const SingularityError&) {
            return 0;
        }
        if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v)) || v.real() == 0.0) return 0;
        int sk = v.real() > 0 ? 1 : -1;
        if (s != 0 && sk != s) return 0;
        s = sk;
    }
    return s;
}

Expr integrate_on(const Expr& e, TInterval iv) {
    if (e.is_zero_exact()) return Expr();
    try {
        return integrate_t(e);
    } catch (const NotRepresentableError&) {
        return integrate_t(resolve_signs(e, iv));
    }
}

// Value of an x-independent expression; x = 0 drops the cancelling x-terms.
Expr x_free_value(const Expr& e, TInterval iv) {
    try {
        Expr r = substitute(e, Var::x, Expr());
        std::complex<double> a = eval(r, midpoint(iv), 0.0);
        std::complex<double> b = eval(e, midpoint(iv), 1.0);
        if (std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b))) return r;
    } catch (const std::exception&) {
    }
    return substitute(e, Var::x, Expr(1));
}

// Candidate fields for the ansatz.
struct Candidates {
    std::vector<Expr> taus;
    std::vector<Expr> chis;
};

Candidates candidates(const Expr& V, TInterval iv) {
    Candidates c{{Expr(1), tv(), tv() * tv()}, {Expr(1), tv()}};
    std::optional<Rational> b2;
    if (auto fit = fit_quadratic_pole(V)) {
        b2 = fit->b2;
    } else if (zero_on(diff(V, Var::x, 3), iv)) {
        Expr v2 = diff(V, Var::x, 2) / Expr(2);
        if (!zero_on(diff(v2, Var::t), iv)) return c;
        b2 = Rational::from_double(eval(v2, midpoint(iv), 1.0).real(), 10000, 1e-11);
    }
    if (!b2) return c;
    // forced chi equations: chi_tt = 4 b2 chi + (terms in tau)
    c.chis.insert(c.chis.end(), {tv() * tv(), pow(tv(), Rational(3))});
    if (b2->is_zero()) return c;
    // chi_tt = 4 b2 chi, tau_ttt = 16 b2 tau_t
    Expr lam = Expr(2) * pow(Expr(b2->abs()), Rational(1, 2));
    Expr lt = lam * tv();
    if (b2->sign() > 0) {
        c.chis.insert(c.chis.end(), {sym::exp(lt), sym::exp(-lt), sym::exp(Expr(2) * lt), sym::exp(Expr(-2) * lt)});
        c.taus.insert(c.taus.end(), {sym::exp(Expr(2) * lt), sym::exp(Expr(-2) * lt)});
    } else {
        c.chis.insert(c.chis.end(), {sym::cos(lt), sym::sin(lt), sym::cos(Expr(2) * lt), sym::sin(Expr(2) * lt)});
        c.taus.insert(c.taus.end(), {sym::cos(Expr(2) * lt), sym::sin(Expr(2) * lt)});
    }
    return c;
}

// Rows of a null space in reduced echelon form.
Eigen::MatrixXd echelon(Eigen::MatrixXd N) {
    Eigen::MatrixXd R = N.transpose();
    const Eigen::Index m = R.rows();
    const Eigen::Index n = R.cols();
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < n && row < m; ++col) {
        Eigen::Index piv = row;
        R.col(col).segment(row, m - row).cwiseAbs().maxCoeff(&piv);
        piv += row;
        if (std::abs(R(piv, col)) < 1e-9) continue;
        R.row(row).swap(R.row(piv));
        R.row(row) /= R(row, col);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r != row) R.row(r) -= R(r, col) * R.row(row);
        }
        ++row;
    }
    return R;
}

bool is_tau_free(const StructuredField& q, TInterval iv) {
    return zero_on(q.tau, iv);
}

bool is_chi_free(const StructuredField& q, TInterval iv) {
    return zero_on(q.chi, iv);
}

// ---- shape matching and footnotes ----

const char* const kFootnote1 = "V satisfies the classifying condition for a field outside <M, I>";
const char* const kFootnote2 = "gamma = c3*|c2*t^2 + c1*t + c0|^(-3/2)";
const char* const kFootnote3 = "V = b2*x^2 + b1*x + b0 + c*(x + a)^(-2) with c*Im(b1) = 0";
const char* const kFootnoteReal2 = "V = b2*x^2 + b1*x + b0 + c*(x + a)^(-2) with real constants";

// "4a", "4b", "4c", "5", "6" when V has the literal table form.
std::optional<std::string> table1_literal_case(const Expr& V, const std::optional<QuadraticPoleFit>& fit) {
    if (V.is_zero_exact()) return "6";
    if (!fit) return std::nullopt;
    if (!fit->c.is_zero()) {
        if (fit->a.is_zero() && fit->b2.is_zero() && fit->b1.is_zero() && fit->b0.is_zero()) return "5";
        return std::nullopt;
    }
    if (!fit->b0.is_zero() || !fit->b1.re.is_zero() || fit->b1.im.is_zero()) return std::nullopt;
    if (fit->b2 == Rational(1, 4)) return "4a";
    if (fit->b2 == Rational(-1, 4)) return "4b";
    if (fit->b2.is_zero()) return "4c";
    return std::nullopt;
}

bool gamma_shape(const Expr& V, TInterval iv) {
    Expr Vx = diff(V, Var::x);
    return zero_on(V - xv() * Vx, iv) && zero_on(diff(Vx, Var::x), iv) && zero_on(re(Vx), iv) &&
           !zero_on(V, iv);
}

bool in_quadratic_pole_family(const std::optional<QuadraticPoleFit>& fit, bool real_constants) {
    if (!fit) return false;
    if (real_constants) return fit->b1.is_real() && fit->b0.is_real() && fit->c.is_real();
    return fit->c.is_zero() || fit->b1.im.is_zero();
}

// ---- canonical mappings ----

struct Mapped {
    EquivTransform g;
    Expr potential;
};

// exp(k ln u) -> u^k for u positive on the interval.
Expr fold_exp_ln(const Expr& e, TInterval iv) {
    return map_functions(e, [&](Func f, const Expr& arg) -> std::optional<Expr> {
        if (f != Func::exp) return std::nullopt;
        auto ts = terms(arg);
        if (ts.size() != 1 || ts[0].factors.size() != 1 || !ts[0].coeff.is_real()) return std::nullopt;
        const Factor& fac = ts[0].factors[0];
        if (!fac.exponent.is_one() || fac.atom.kind() != Expr::Kind::Func || fac.atom.func() != Func::ln) {
            return std::nullopt;
        }
        const Expr& u = fac.atom.args()[0];
        if (sign_on(u, iv) <= 0) return std::nullopt;
        return pow(u, ts[0].coeff.re);
    });
}

// Appends the phase/amplitude gauge removing the x-free part of the image.
std::optional<Mapped> gauge_remainder(const Expr& V, const EquivTransform& g, TInterval iv) {
    TransformedPotential tp = transform_potential(V, g, iv);
    if (!tp.potential) return std::nullopt;
    TInterval img = image_interval(g, iv);
    Expr r;
    for (const auto& term : terms(*tp.potential)) {
        Expr e = from_term(term);
        if (!depends_on(e, Var::x)) r += e;
    }
    r = fold_exp_ln(r, img);
    EquivTransform out = g;
    if (!r.is_zero_exact()) {
        EquivTransform gauge;
        gauge.Sigma = -integrate_on(re(r), img);
        gauge.Upsilon = integrate_on(im(r), img);
        out = compose(g, gauge, iv);
    }
    TransformedPotential fin = transform_potential(V, out, iv);
    if (!fin.potential) return std::nullopt;
    return Mapped{out, *fin.potential};
}

Rational center_of(TInterval iv) {
    return Rational::from_double(midpoint(iv), 100, 0.5).value_or(Rational(1));
}

// Time map sending b2 x^2 (in a shifted frame) to zero.
std::optional<EquivTransform> quadratic_time_map(const Rational& b2, TInterval iv) {
    if (b2.is_zero()) return EquivTransform::identity();
    Expr k = pow(Expr(b2.abs()), Rational(1, 2));
    Expr s = tv() - Expr(center_of(iv));
    if (b2.sign() > 0) return EquivTransform::time(sym::exp(Expr(4) * k * s));
    Expr w = Expr(2) * k;
    double wv = 2.0 * std::sqrt(b2.abs().to_double());
    double reach = std::max(std::abs(iv.lo - center_of(iv).to_double()), std::abs(iv.hi - center_of(iv).to_double()));
    if (wv * reach >= 1.5) return std::nullopt;
    return EquivTransform::time(sym::tan(w * s) / w);
}

std::optional<Mapped> map_to_target(const Expr& V, const EquivTransform& g, const Expr& target, TInterval iv) {
    try {
        auto m = gauge_remainder(V, g, iv);
        if (!m) return std::nullopt;
        TInterval img = image_interval(m->g, iv);
        if (!zero_on(m->potential - target, img)) return std::nullopt;
        return Mapped{m->g, target};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Cases 5 and 6: b2 x^2 + b1 x + b0 + c (x + a)^(-2) to c x^(-2).
std::optional<Mapped> map_to_free_or_pole(const Expr& V, const QuadraticPoleFit& fit, TInterval iv) {
    EquivTransform first;
    if (!fit.c.is_zero()) {
        first = EquivTransform::shift(Expr(fit.a));
    } else if (!fit.b2.is_zero()) {
        if (!fit.b1.is_real()) return std::nullopt;
        first = EquivTransform::shift(Expr(fit.b1.re / (Rational(2) * fit.b2)));
    } else {
        if (!fit.b1.is_real()) return std::nullopt;
        first = EquivTransform::shift(Expr(-fit.b1.re) * tv() * tv());
    }
    auto second = quadratic_time_map(fit.b2, iv);
    if (!second) return std::nullopt;
    try {
        EquivTransform g = compose(first, *second, iv);
        Expr target = fit.c.is_zero() ? Expr() : Expr(fit.c) * pow(xv(), Rational(-2));
        return map_to_target(V, g, target, iv);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// q or q*sqrt(p) for small p.
std::optional<Expr> recognize_constant(double v) {
    if (auto q = Rational::from_double(v, 10000, 1e-11)) return Expr(*q);
    for (int p : {2, 3, 5, 6, 7}) {
        if (auto q = Rational::from_double(v / std::sqrt(double(p)), 10000, 1e-11)) {
            return Expr(*q) * pow(Expr(p), Rational(1, 2));
        }
    }
    return std::nullopt;
}

// Cases 4a-4c: b2 x^2 + b1 x + b0 with Im b1 != 0 to s/4 x^2 + i b x, b > 0.
std::optional<Mapped> map_to_case4(const Expr& V, const QuadraticPoleFit& fit, TInterval iv) {
    if (!fit.c.is_zero() || fit.b1.im.is_zero()) return std::nullopt;
    const Rational beta = fit.b1.im;
    EquivTransform first;
    Expr k;
    Expr b;
    int quarter = 0;
    if (fit.b2.is_zero()) {
        first = EquivTransform::shift(Expr(-fit.b1.re) * tv() * tv());
        k = pow(Expr(beta.abs()), Rational(2, 3));
        b = Expr(1);
    } else {
        first = EquivTransform::shift(Expr(fit.b1.re / (Rational(2) * fit.b2)));
        k = Expr(2) * pow(Expr(fit.b2.abs()), Rational(1, 2));
        b = Expr(beta.abs()) * pow(Expr(Rational(4) * fit.b2.abs()), Rational(-3, 4));
        if (auto r = recognize_constant(beta.abs().to_double() * std::pow(4.0 * fit.b2.abs().to_double(), -0.75))) {
            b = *r;
        }
        quarter = fit.b2.sign();
    }
    EquivTransform scale = EquivTransform::time(k * tv());
    if (beta.sign() < 0) scale.eps = -1;
    try {
        EquivTransform g = compose(first, scale, iv);
        Expr target = Expr(Rational(quarter, 4)) * xv() * xv() + Expr::i() * b * xv();
        return map_to_target(V, g, target, iv);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

ReportStatus status_from(Certainty c) {
    return c == Certainty::Exact ? ReportStatus::Exact : ReportStatus::Probabilistic;
}

// Case id of Table 1 from the invariants.
std::string table1_case(int k1, int k2, std::optional<JordanType> jordan) {
    if (k1 == 0 && k2 == 0) return "1";
    if (k1 == 0 && k2 == 2) return "2";
    if (k1 == 1 && k2 == 0) return "3";
    if (k1 == 1 && k2 == 2) {
        if (!jordan) return "4";
        if (*jordan == JordanType::Hyperbolic) return "4a";
        if (*jordan == JordanType::Elliptic) return "4b";
        return "4c";
    }
    if (k1 == 3 && k2 == 0) return "5";
    if (k1 == 3 && k2 == 2) return "6";
    return "unknown";
}

struct Invariants {
    int dim = 0;
    int k1 = 0;
    int k2 = 0;
    std::optional<JordanType> jordan;
    EssentialAlgebra algebra;
    ReportStatus status = ReportStatus::Exact;
    std::vector<std::string> notes;
};

std::optional<JordanType> symbolic_jordan(const std::vector<StructuredField>& basis, TInterval iv) {
    std::optional<StructuredField> p0;
    std::vector<StructuredField> qs;
    for (const auto& q : basis) {
        if (!is_tau_free(q, iv)) {
            if (p0) return std::nullopt;
            p0 = q;
        } else if (!is_chi_free(q, iv)) {
            qs.push_back(q);
        }
    }
    if (!p0 || qs.size() != 2) return std::nullopt;
    try {
        return adjoint_gpart(*p0, qs[0], qs[1]).type;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Invariants invariants_of(const Expr& V, TInterval iv) {
    Invariants out;
    bool splittable = true;
    try {
        split_determining(V);
    } catch (const UnsplittableError&) {
        splittable = false;
        out.notes.push_back("potential outside the symbolically splittable family");
    }
    out.algebra = essential_algebra(V, iv);
    std::optional<NumericAlgebra> num;
    try {
        num = numeric_algebra(V, iv);
    } catch (const std::exception& e) {
        out.notes.push_back(std::string("numeric oracle failed: ") + e.what());
    }
    const int sym_dim = static_cast<int>(out.algebra.basis.size());
    bool symbolic = splittable && out.algebra.complete && (!num || num->dim == sym_dim);
    if (symbolic) {
        try {
            KInvariants k = k_invariants(out.algebra.basis, iv.lo, iv.hi);
            out.dim = sym_dim;
            out.k1 = k.k1;
            out.k2 = k.k2;
            Certainty c = out.algebra.certainty;
            merge(c, k.certainty);
            out.status = status_from(c);
            if (out.k1 == 1 && out.k2 == 2) {
                out.jordan = symbolic_jordan(out.algebra.basis, iv);
                if (!out.jordan && num) out.jordan = num->jordan;
            }
            if (num && (num->k1 != out.k1 || num->k2 != out.k2)) {
                out.notes.push_back("numeric k-invariants disagree with the symbolic basis");
            }
            return out;
        } catch (const std::exception& e) {
            out.notes.push_back(std::string("symbolic invariants failed: ") + e.what());
        }
    }
    if (!num) throw SingularityError("neither the symbolic nor the numeric classification succeeded");
    if (sym_dim != num->dim) out.notes.push_back("ansatz basis incomplete; invariants from the numeric oracle");
    out.dim = num->dim;
    out.k1 = num->k1;
    out.k2 = num->k2;
    out.jordan = num->jordan;
    out.status = ReportStatus::NumericOnly;
    return out;
}

}  // namespace

const char* status_name(ReportStatus s) noexcept {
    switch (s) {
        case ReportStatus::Exact: return "exact";
        case ReportStatus::Probabilistic: return "probabilistic";
        case ReportStatus::NumericOnly: return "numeric-only";
    }
    return "exact";
}

EssentialAlgebra essential_algebra(const Expr& V_in, TInterval iv) {
    const Expr V = normalize(V_in);
    EssentialAlgebra out;
    out.basis = {StructuredField::M(), StructuredField::I()};
    const ProbeBox box = chart(iv);
    Candidates cand = candidates(V, iv);
    std::vector<StructuredField> fields;
    for (const auto& tau : cand.taus) fields.push_back(StructuredField::D(tau));
    for (const auto& chi : cand.chis) fields.push_back(StructuredField::G(chi));
    const int n = static_cast<int>(fields.size());
    std::vector<Expr> dx;
    for (const auto& f : fields) dx.push_back(diff(classifying_residual(V, f), Var::x));

    // Sampled linear conditions d/dx R0 = 0 on the coefficients.
    std::mt19937_64 rng(probe_seed() ^ 0x5eedULL);
    std::uniform_real_distribution<double> ut(box.t_lo, box.t_hi), ux(box.x_lo, box.x_hi);
    std::vector<Eigen::RowVectorXd> rows;
    const int wanted = 3 * n + 12;
    for (int attempt = 0; attempt < 8 * wanted && static_cast<int>(rows.size()) < 2 * wanted; ++attempt) {
        double t = ut(rng), x = ux(rng);
        Eigen::RowVectorXd re_row(n), im_row(n);
        try {
            for (int k = 0; k < n; ++k) {
                std::complex<double> v = eval(dx[k], t, x);
                re_row(k) = v.real();
                im_row(k) = v.imag();
            }
        } catch (const SingularityError&) {
            continue;
        }
        rows.push_back(re_row);
        rows.push_back(im_row);
    }
    Eigen::MatrixXd A(rows.size(), n);
    for (std::size_t r = 0; r < rows.size(); ++r) A.row(r) = rows[r];
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        double s = A.row(r).norm();
        if (s > 0) A.row(r) /= s;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    while (rank < s.size() && s(rank) > 1e-9 * std::max(1.0, s(0))) ++rank;
    if (n - rank == 0) return out;
    Eigen::MatrixXd R = echelon(svd.matrixV().rightCols(n - rank));

    for (Eigen::Index r = 0; r < R.rows(); ++r) {
        StructuredField q;
        bool ok = true;
        for (int k = 0; k < n; ++k) {
            if (std::abs(R(r, k)) < 1e-10) continue;
            auto c = Rational::from_double(R(r, k), 1000, 1e-7);
            if (!c) {
                ok = false;
                break;
            }
            q = q + Expr(*c) * fields[k];
        }
        if (!ok) {
            out.complete = false;
            continue;
        }
        Expr R0 = classifying_residual(V, q);
        ZeroCheck xfree = check_zero(diff(R0, Var::x), box);
        if (!xfree.zero) {
            out.complete = false;
            continue;
        }
        merge(out.certainty, xfree.certainty);
        // sigma_t - i rho_t = R0
        Expr r0 = x_free_value(R0, iv);
        try {
            q.sigma = integrate_on(re(r0), iv);
            q.rho = -integrate_on(im(r0), iv);
        } catch (const NotRepresentableError&) {
            out.complete = false;
            continue;
        }
        ZeroCheck full = check_zero(classifying_residual(V, q), box);
        if (!full.zero) {
            out.complete = false;
            continue;
        }
        merge(out.certainty, full.certainty);
        out.basis.push_back(q);
    }
    return out;
}

std::optional<QuadraticPoleFit> fit_quadratic_pole(const Expr& V_in) {
    const Expr V = normalize(V_in);
    TInterval iv{0.5, 1.5};
    if (!zero_on(diff(V, Var::t), iv)) return std::nullopt;
    // Pole location from the normal form.
    std::optional<Rational> a;
    bool ok = true;
    auto note_pole = [&](const Rational& p) {
        if (a && !(*a == p)) ok = false;
        a = p;
    };
    for (const auto& term : terms(V)) {
        for (const auto& f : term.factors) {
            if (f.exponent.sign() >= 0 || !depends_on(f.atom, Var::x)) continue;
            // atom = alpha (x + a)^m, a = p^(m-1)(0) / p^(m)(0)
            int m = 1;
            while (m <= 6 && !diff(f.atom, Var::x, m + 1).is_zero_exact()) ++m;
            if (m > 6) {
                ok = false;
                continue;
            }
            auto top = diff(f.atom, Var::x, m).as_constant();
            auto below = substitute(diff(f.atom, Var::x, m - 1), Var::x, Expr()).as_constant();
            if (!top || !below || top->is_zero() || !top->is_real() || !below->is_real()) {
                ok = false;
                continue;
            }
            note_pole(below->re / top->re);
        }
    }
    if (!ok) return std::nullopt;
    QuadraticPoleFit fit;
    fit.a = a.value_or(Rational(0));
    const double av = fit.a.to_double();
    // Least squares on b2, b1, b0, c (complex) at x-samples.
    std::vector<double> xs;
    for (int j = 0; j < 24; ++j) xs.push_back(0.37 + 2.5 * j / 23.0);
    const int nc = a ? 4 : 3;
    Eigen::MatrixXcd M(xs.size(), nc);
    Eigen::VectorXcd y(xs.size());
    int used = 0;
    for (double x : xs) {
        if (a && std::abs(x + av) < 0.05) continue;
        try {
            y(used) = eval(V, 1.0, x);
        } catch (const SingularityError&) {
            continue;
        }
        M(used, 0) = x * x;
        M(used, 1) = x;
        M(used, 2) = 1.0;
        if (a) M(used, 3) = 1.0 / ((x + av) * (x + av));
        ++used;
    }
    if (used < nc + 4) return std::nullopt;
    Eigen::VectorXcd sol = M.topRows(used).colPivHouseholderQr().solve(y.head(used));
    auto rat = [](std::complex<double> v) -> std::optional<CRational> {
        auto r = Rational::from_double(v.real(), 10000, 1e-9);
        auto i = Rational::from_double(v.imag(), 10000, 1e-9);
        if (!r || !i) return std::nullopt;
        return CRational(*r, *i);
    };
    auto b2 = rat(sol(0)), b1 = rat(sol(1)), b0 = rat(sol(2));
    std::optional<CRational> c = a ? rat(sol(3)) : std::optional<CRational>(CRational());
    if (!b2 || !b1 || !b0 || !c || !b2->is_real()) return std::nullopt;
    fit.b2 = b2->re;
    fit.b1 = *b1;
    fit.b0 = *b0;
    fit.c = *c;
    if (fit.c.is_zero()) fit.a = Rational(0);
    Expr model = Expr(fit.b2) * xv() * xv() + Expr(fit.b1) * xv() + Expr(fit.b0) +
                 Expr(fit.c) * pow(xv() + Expr(fit.a), Rational(-2));
    if (!zero_on(model - V, iv)) return std::nullopt;
    return fit;
}

std::optional<std::array<Rational, 3>> gamma_quadratic(const Expr& gamma, TInterval iv) {
    if (sign_on(gamma, iv) == 0) return std::nullopt;
    Expr q = resolve_signs(pow(sym::abs(gamma), Rational(-2, 3)), iv);
    const double t0 = midpoint(iv);
    double v0, v1, v2;
    try {
        v0 = eval(q, t0, 0.0).real();
        v1 = eval(diff(q, Var::t), t0, 0.0).real();
        v2 = eval(diff(q, Var::t, 2), t0, 0.0).real();
    } catch (const SingularityError&) {
        return std::nullopt;
    }
    // q is determined up to a constant factor; normalize by q(t0).
    double c2 = v2 / 2.0 / v0;
    double c1 = v1 / v0 - 2.0 * c2 * t0;
    double c0 = 1.0 - c1 * t0 - c2 * t0 * t0;
    std::array<double, 3> raw{c0, c1, c2};
    double big = std::max({std::abs(c0), std::abs(c1), std::abs(c2)});
    std::array<Rational, 3> out;
    for (int k = 0; k < 3; ++k) {
        double v = raw[k] / big;
        if (std::abs(v) < 1e-10) {
            out[k] = Rational(0);
            continue;
        }
        auto r = Rational::from_double(v, 10000, 1e-8);
        if (!r) return std::nullopt;
        out[k] = *r;
    }
    Expr P = Expr(out[2]) * tv() * tv() + Expr(out[1]) * tv() + Expr(out[0]);
    if (sign_on(P, iv) == 0) return std::nullopt;
    if (!zero_on(diff(q / P, Var::t), iv)) return std::nullopt;
    return out;
}

ClassificationReport classify_full(const Expr& V_in, TInterval iv) {
    const Expr V = normalize(V_in);
    ClassificationReport rep;
    rep.table = 1;
    Invariants inv = invariants_of(V, iv);
    rep.dim_ess = inv.dim;
    rep.k1 = inv.k1;
    rep.k2 = inv.k2;
    rep.basis = inv.algebra.basis;
    rep.status = inv.status;
    rep.notes = inv.notes;
    rep.case_id = table1_case(inv.k1, inv.k2, inv.jordan);

    const bool t_free = zero_on(diff(V, Var::t), iv);
    std::optional<QuadraticPoleFit> fit = t_free ? fit_quadratic_pole(V) : std::nullopt;

    // Literal table shape and its footnote.
    std::string shape = "1";
    const char* footnote = kFootnote1;
    if (auto lit = table1_literal_case(V, fit)) {
        shape = *lit;
        footnote = nullptr;
    } else if (gamma_shape(V, iv)) {
        shape = "2";
        footnote = kFootnote2;
    } else if (t_free) {
        shape = "3";
        footnote = kFootnote3;
    }
    if (shape != rep.case_id) {
        rep.maximal = false;
        if (footnote) rep.violated_condition = footnote;
        if (shape == "3" && in_quadratic_pole_family(fit, false)) {
            rep.notes.push_back("time-independent potential in the excluded quadratic-pole family");
        }
    }

    const std::string& cs = rep.case_id;
    if (cs == "1") {
        rep.canonical_potential = V;
    } else if (cs == "2") {
        if (shape == "2") {
            rep.canonical_potential = V;
            rep.mapping = EquivTransform::identity();
        }
    } else if (cs == "3") {
        if (t_free) {
            rep.canonical_potential = V;
            rep.mapping = EquivTransform::identity();
        }
    } else if (cs == "4a" || cs == "4b" || cs == "4c") {
        if (fit) {
            if (auto m = map_to_case4(V, *fit, iv)) {
                rep.canonical_potential = m->potential;
                rep.mapping = m->g;
            }
        }
    } else if (cs == "5") {
        if (fit && !fit->c.is_zero()) {
            if (shape == "5") {
                rep.canonical_potential = V;
                rep.mapping = EquivTransform::identity();
            } else if (auto m = map_to_free_or_pole(V, *fit, iv)) {
                rep.canonical_potential = m->potential;
                rep.mapping = m->g;
            }
        }
    } else if (cs == "6") {
        rep.canonical_potential = Expr();
        if (V.is_zero_exact()) {
            rep.mapping = EquivTransform::identity();
        } else if (fit && fit->c.is_zero()) {
            if (auto m = map_to_free_or_pole(V, *fit, iv)) rep.mapping = m->g;
        }
    }
    if (rep.canonical_potential && !rep.mapping && !(cs == "1")) {
        rep.notes.push_back("no closed-form mapping to the canonical potential");
    }
    return rep;
}

ClassificationReport classify_real(const Expr& V_in, TInterval iv) {
    const Expr V = normalize(V_in);
    if (!zero_on(sym::conj(V) - V, iv)) throw PreconditionError("potential is not real-valued");
    ClassificationReport full = classify_full(V, iv);
    ClassificationReport rep = full;
    rep.table = 3;
    rep.maximal = true;
    rep.violated_condition.reset();
    if (full.dim_ess == 2) {
        rep.case_id = "1";
    } else if (full.k1 == 1 && full.k2 == 0) {
        rep.case_id = "2";
    } else if (full.k1 == 3 && full.k2 == 0) {
        rep.case_id = "3";
    } else if (full.dim_ess == 7) {
        rep.case_id = "4";
    } else {
        rep.case_id = "unknown";
        rep.status = ReportStatus::NumericOnly;
        rep.notes.push_back("invariants outside the real-potential list");
    }
    const bool t_free = zero_on(diff(V, Var::t), iv);
    std::string shape = "1";
    const char* footnote = kFootnote1;
    if (V.is_zero_exact()) {
        shape = "4";
        footnote = nullptr;
    } else if (full.case_id == "5" && full.canonical_potential && identical(*full.canonical_potential, V)) {
        shape = "3";
        footnote = nullptr;
    } else if (t_free) {
        shape = "2";
        footnote = kFootnoteReal2;
    }
    if (shape != rep.case_id) {
        rep.maximal = false;
        if (footnote) rep.violated_condition = footnote;
    }
    return rep;
}

ClassificationReport classify_subclass(const Expr& gamma_in, TInterval iv) {
    const Expr gamma = normalize(gamma_in);
    const Expr V = Expr::i() * gamma * xv();
    ClassificationReport rep;
    rep.table = 2;
    rep.k2 = 2;
    Invariants inv = invariants_of(V, iv);
    rep.dim_ess = inv.dim;
    rep.basis = inv.algebra.basis;
    rep.status = inv.status;
    rep.notes = inv.notes;

    SubclassEquivTransform sub;
    std::optional<Expr> shape;  // canonical gamma without the constant b
    if (zero_on(gamma, iv)) {
        rep.case_id = "3";
        rep.k1 = 3;
        rep.canonical_potential = Expr();
        rep.mapping = EquivTransform::identity();
        rep.subclass_mapping = sub;
    } else if (auto c = gamma_quadratic(gamma, iv)) {
        rep.k1 = 1;
        const Rational& c0 = (*c)[0];
        const Rational& c1 = (*c)[1];
        const Rational& c2 = (*c)[2];
        Rational D = c1 * c1 - Rational(4) * c2 * c0;
        if (D.is_zero()) {
            rep.case_id = "2a";
            shape = Expr(1);
            if (!c2.is_zero()) {
                Rational t0 = -c1 / (Rational(2) * c2);
                sub.a0 = Rational(-1);
                sub.a1 = Rational(0);
                sub.a2 = -t0;
                sub.a3 = Rational(1);
            }
        } else if (D.sign() > 0) {
            rep.case_id = "2b";
            shape = pow(sym::abs(tv()), Rational(-3, 2));
            if (c2.is_zero()) {
                sub.a0 = c0 / c1;
            } else if (auto root = D.exact_root(2)) {
                Rational t0 = (-c1 - *root) / (Rational(2) * c2);
                Rational t1 = (-c1 + *root) / (Rational(2) * c2);
                sub.a1 = Rational(1);
                sub.a0 = -t0;
                sub.a3 = Rational(1);
                sub.a2 = -t1;
            } else {
                shape.reset();
            }
        } else {
            rep.case_id = "2c";
            shape = pow(tv() * tv() + Expr(1), Rational(-3, 2));
            if (auto root = (-D).exact_root(2)) {
                Rational p = -c1 / (Rational(2) * c2);
                Rational s = *root / (Rational(2) * c2.abs());
                sub.a1 = Rational(1) / s;
                sub.a0 = -p / s;
            } else {
                shape.reset();
            }
        }
    } else {
        rep.case_id = "1";
        rep.k1 = 0;
        rep.canonical_potential = V;
        rep.mapping = EquivTransform::identity();
        rep.subclass_mapping = sub;
    }
    if (shape) {
        try {
            Expr g1 = transform_gamma(gamma, sub, iv);
            TInterval img = image_interval(EquivTransform::time(sub.T()), iv);
            double tm = midpoint(img);
            double b = eval(g1 / *shape, tm, 0.0).real();
            if (b < 0) {
                sub.eps = -sub.eps;
                b = -b;
            }
            if (rep.case_id == "2a") {
                // scale t -> k t with k = b^(2/3) when rational
                if (auto br = Rational::from_double(b, 10000, 1e-9)) {
                    if (auto k = (*br * *br).exact_root(3)) {
                        Rational a1 = sub.a1, a0 = sub.a0;
                        sub.a1 = *k * a1;
                        sub.a0 = *k * a0;
                        b = 1.0;
                    }
                }
            }
            Expr target_gamma;
            if (auto br = Rational::from_double(b, 10000, 1e-9)) target_gamma = Expr(*br) * *shape;
            Expr got = transform_gamma(gamma, sub, iv);
            img = image_interval(EquivTransform::time(sub.T()), iv);
            if (!target_gamma.is_zero_exact() && zero_on(got - target_gamma, img)) {
                rep.canonical_potential = Expr::i() * target_gamma * xv();
                rep.subclass_mapping = sub;
                rep.mapping = to_equiv(sub, gamma, iv);
            } else {
                rep.notes.push_back("no rational Mobius map to the canonical form");
            }
        } catch (const std::exception& e) {
            rep.notes.push_back(std::string("canonical map failed: ") + e.what());
        }
    }
    const int expected_dim = rep.case_id == "3" ? 7 : rep.case_id == "1" ? 4 : 5;
    if (inv.dim != expected_dim) {
        rep.status = ReportStatus::NumericOnly;
        rep.notes.push_back("essential algebra dimension disagrees with the gamma test");
    }
    return rep;
}

GFieldNormalization normalize_gfield(const StructuredField& q, TInterval iv) {
    if (!zero_on(q.tau, iv)) throw PreconditionError("field has a D-part");
    int s = sign_on(q.chi, iv);
    if (s == 0) throw PreconditionError("chi must be real and nonvanishing on the interval");
    EquivTransform g;
    Expr chi = resolve_signs(q.chi, iv);
    Expr inv2 = pow(chi, Rational(-2));
    // T_t = chi^(-2), chi X0_t - chi_t X0 = -2 sigma in the pushforward convention
    g.T = integrate_on(inv2, iv);
    g.eps = s;
    Expr sigma = resolve_signs(q.sigma, iv);
    if (!sigma.is_zero_exact()) g.X0 = Expr(-2 * s) * integrate_on(sigma * inv2, iv);
    GFieldNormalization out{g, pushforward(g, q, iv)};
    return out;
}

StructuredField extend_g1_to_gt(const Expr& rho1) {
    Expr integrand = tv() * diff(rho1, Var::t);
    StructuredField q = StructuredField::G(tv());
    if (!integrand.is_zero_exact()) q.rho = integrate_t(integrand);
    return q;
}

}  // namespace schrodclass
