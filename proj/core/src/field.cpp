#include "schrodclass/field.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

const Expr kT = Expr::t();
const Expr kX = Expr::x();

Expr dt(const Expr& e, int n = 1) { return diff(e, Var::t, n); }
Expr dx(const Expr& e, int n = 1) { return diff(e, Var::x, n); }

std::vector<Expr> components(const StructuredField& q) {
    return {q.tau, q.chi, q.sigma, q.rho, q.eta0.value_or(Expr())};
}

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// Exact rank of a rational matrix by fraction-exact elimination.
int rational_rank(std::vector<std::vector<Rational>> m) {
    int rank = 0;
    std::size_t rows = m.size();
    std::size_t cols = rows == 0 ? 0 : m[0].size();
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows); ++c) {
        std::size_t piv = rows;
        for (std::size_t r = rank; r < rows; ++r) {
            if (!m[r][c].is_zero()) {
                piv = r;
                break;
            }
        }
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == static_cast<std::size_t>(rank) || m[r][c].is_zero()) continue;
            Rational f = m[r][c] / m[rank][c];
            for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
        }
        ++rank;
    }
    return rank;
}

std::optional<int> exact_rank(const std::vector<std::vector<Expr>>& rows) {
    std::map<std::pair<std::size_t, Expr>, std::size_t, bool (*)(const std::pair<std::size_t, Expr>&,
                                                                  const std::pair<std::size_t, Expr>&)>
        keys([](const std::pair<std::size_t, Expr>& a, const std::pair<std::size_t, Expr>& b) {
            if (a.first != b.first) return a.first < b.first;
            return compare(a.second, b.second) < 0;
        });
    std::vector<std::vector<std::pair<std::size_t, CRational>>> entries(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            for (const auto& term : terms(rows[r][c])) {
                Expr mono = from_term(Term{CRational(1), term.factors});
                auto key = std::make_pair(c, mono);
                auto it = keys.find(key);
                std::size_t idx;
                if (it == keys.end()) {
                    idx = keys.size();
                    keys.emplace(key, idx);
                } else {
                    idx = it->second;
                }
                entries[r].emplace_back(idx, term.coeff);
            }
        }
    }
    try {
        std::vector<std::vector<Rational>> m(rows.size(), std::vector<Rational>(2 * keys.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (const auto& [idx, c] : entries[r]) {
                m[r][2 * idx] += c.re;
                m[r][2 * idx + 1] += c.im;
            }
        }
        return rational_rank(std::move(m));
    } catch (const std::overflow_error&) {
        return std::nullopt;
    }
}

std::vector<std::pair<double, double>> sample_points(std::size_t n, double t_lo, double t_hi) {
    std::mt19937_64 rng(probe_seed() ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> ut(t_lo, t_hi);
    std::uniform_real_distribution<double> ux(0.5, 1.5);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < n; ++k) pts.emplace_back(ut(rng), ux(rng));
    return pts;
}

// Rows evaluated at sample points; each row becomes a real vector.
Eigen::MatrixXd sample_matrix(const std::vector<std::vector<Expr>>& rows, std::size_t npts, double t_lo,
                              double t_hi) {
    std::size_t ncomp = rows.empty() ? 0 : rows[0].size();
    auto pts = sample_points(npts * 3 + 8, t_lo, t_hi);
    std::vector<std::pair<double, double>> good;
    for (const auto& p : pts) {
        bool ok = true;
        for (const auto& row : rows) {
            for (const auto& e : row) {
                try {
                    (void)eval(e, p.first, p.second);
                } catch (const SingularityError&) {
                    ok = false;
                }
                if (!ok) break;
            }
            if (!ok) break;
        }
        if (ok) good.push_back(p);
        if (good.size() == npts) break;
    }
    if (good.size() < npts) throw InconclusiveError("not enough nonsingular sample points");
    Eigen::MatrixXd m(rows.size(), 2 * ncomp * npts);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < ncomp; ++c) {
            for (std::size_t j = 0; j < npts; ++j) {
                auto v = eval(rows[r][c], good[j].first, good[j].second);
                m(r, 2 * (c * npts + j)) = v.real();
                m(r, 2 * (c * npts + j) + 1) = v.imag();
            }
        }
    }
    return m;
}

StructuredField scale(const Rational& r, const StructuredField& q) { return Expr(r) * q; }

}  // namespace

StructuredField StructuredField::D(const Expr& tau) { return {normalize(tau), Expr(), Expr(), Expr(), std::nullopt}; }
StructuredField StructuredField::G(const Expr& chi) { return {Expr(), normalize(chi), Expr(), Expr(), std::nullopt}; }
StructuredField StructuredField::M(const Expr& sigma) { return {Expr(), Expr(), normalize(sigma), Expr(), std::nullopt}; }
StructuredField StructuredField::I(const Expr& rho) { return {Expr(), Expr(), Expr(), normalize(rho), std::nullopt}; }
StructuredField StructuredField::Z(const Expr& eta0) { return {Expr(), Expr(), Expr(), Expr(), normalize(eta0)}; }

bool StructuredField::has_z() const { return eta0.has_value() && !eta0->is_zero_exact(); }

StructuredField operator+(const StructuredField& a, const StructuredField& b) {
    StructuredField r{a.tau + b.tau, a.chi + b.chi, a.sigma + b.sigma, a.rho + b.rho, std::nullopt};
    if (a.eta0 || b.eta0) r.eta0 = a.eta0.value_or(Expr()) + b.eta0.value_or(Expr());
    return r;
}

StructuredField operator-(const StructuredField& a, const StructuredField& b) {
    return a + Expr(-1) * b;
}

StructuredField operator*(const Expr& s, const StructuredField& q) {
    StructuredField r{s * q.tau, s * q.chi, s * q.sigma, s * q.rho, std::nullopt};
    if (q.eta0) r.eta0 = s * *q.eta0;
    return r;
}

bool same_field(const StructuredField& a, const StructuredField& b) {
    auto ca = components(a);
    auto cb = components(b);
    for (std::size_t k = 0; k < ca.size(); ++k) {
        if (!is_zero(ca[k] - cb[k])) return false;
    }
    return true;
}

Expr z_action(const StructuredField& q, const Expr& zeta) {
    const Expr i = Expr::i();
    Expr r = q.tau * dt(zeta) + Expr(Rational(1, 2)) * dt(q.tau) * kX * dx(zeta) -
             i * Expr(Rational(1, 8)) * dt(q.tau, 2) * kX * kX * zeta;
    r += q.chi * dx(zeta) - i * Expr(Rational(1, 2)) * dt(q.chi) * kX * zeta;
    r -= i * q.sigma * zeta;
    r -= q.rho * zeta;
    return r;
}

StructuredField commutator(const StructuredField& a, const StructuredField& b) {
    const Expr half(Rational(1, 2));
    StructuredField r;
    r.tau = a.tau * dt(b.tau) - b.tau * dt(a.tau);
    r.chi = a.tau * dt(b.chi) - half * dt(a.tau) * b.chi - b.tau * dt(a.chi) + half * dt(b.tau) * a.chi;
    r.sigma = a.tau * dt(b.sigma) - b.tau * dt(a.sigma) + half * (a.chi * dt(b.chi) - b.chi * dt(a.chi));
    r.rho = a.tau * dt(b.rho) - b.tau * dt(a.rho);
    if (a.has_z() || b.has_z()) {
        Expr z;
        if (b.has_z()) z += z_action(a, *b.eta0);
        if (a.has_z()) z -= z_action(b, *a.eta0);
        r.eta0 = z;
    }
    return r;
}

CoefficientForm coefficient_form(const StructuredField& q) {
    const Expr i = Expr::i();
    CoefficientForm f;
    f.tau = q.tau;
    f.xi = Expr(Rational(1, 2)) * dt(q.tau) * kX + q.chi;
    f.multiplier = i * Expr(Rational(1, 8)) * dt(q.tau, 2) * kX * kX + i * Expr(Rational(1, 2)) * dt(q.chi) * kX +
                   q.rho + i * q.sigma;
    f.eta0 = q.eta0.value_or(Expr());
    return f;
}

SpanRank expr_rank(const std::vector<std::vector<Expr>>& rows, double t_lo, double t_hi) {
    SpanRank out;
    if (rows.empty()) {
        out.gap = std::numeric_limits<double>::infinity();
        return out;
    }
    auto exact = exact_rank(rows);
    std::size_t npts = std::max<std::size_t>(3 * rows.size(), 12);
    Eigen::MatrixXd m = sample_matrix(rows, npts, t_lo, t_hi);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    double smax = s.size() > 0 ? s(0) : 0.0;
    int numeric = 0;
    for (int k = 0; k < s.size(); ++k) {
        if (s(k) > 1e-8 * smax && smax > 0.0) ++numeric;
    }
    if (numeric == 0) {
        out.gap = std::numeric_limits<double>::infinity();
    } else if (numeric < s.size()) {
        out.gap = s(numeric) > 0.0 ? s(numeric - 1) / s(numeric) : std::numeric_limits<double>::infinity();
    } else {
        out.gap = std::numeric_limits<double>::infinity();
    }
    if (exact && *exact == numeric) {
        out.dim = numeric;
        out.certainty = Certainty::Exact;
    } else {
        out.dim = numeric;
        out.certainty = Certainty::Probabilistic;
    }
    return out;
}

SpanRank span_dimension(const std::vector<StructuredField>& span, double t_lo, double t_hi) {
    std::vector<std::vector<Expr>> rows;
    for (const auto& q : span) rows.push_back(components(q));
    return expr_rank(rows, t_lo, t_hi);
}

KInvariants k_invariants(const std::vector<StructuredField>& span, double t_lo, double t_hi) {
    SpanRank full = span_dimension(span, t_lo, t_hi);
    for (const auto& extra : {StructuredField::M(), StructuredField::I()}) {
        auto ext = span;
        ext.push_back(extra);
        if (span_dimension(ext, t_lo, t_hi).dim != full.dim) {
            throw PreconditionError("span must contain M and I");
        }
    }
    std::vector<std::vector<Expr>> taus;
    for (const auto& q : span) taus.push_back({q.tau});
    SpanRank tr = expr_rank(taus, t_lo, t_hi);
    KInvariants k;
    k.k1 = tr.dim;
    k.k2 = full.dim - tr.dim - 2;
    k.certainty = (full.certainty == Certainty::Exact && tr.certainty == Certainty::Exact) ? Certainty::Exact
                                                                                          : Certainty::Probabilistic;
    return k;
}

const char* jordan_name(JordanType j) noexcept {
    switch (j) {
        case JordanType::Hyperbolic: return "hyperbolic";
        case JordanType::Elliptic: return "elliptic";
        case JordanType::Nilpotent: return "nilpotent";
        case JordanType::Zero: return "zero";
    }
    return "?";
}

std::optional<std::vector<Rational>> constant_combination(const StructuredField& target,
                                                          const std::vector<StructuredField>& basis) {
    std::vector<std::vector<Expr>> rows;
    for (const auto& q : basis) rows.push_back(components(q));
    rows.push_back(components(target));
    std::size_t npts = std::max<std::size_t>(3 * rows.size(), 12);
    Eigen::MatrixXd m = sample_matrix(rows, npts, 0.5, 2.0);
    Eigen::MatrixXd a = m.topRows(basis.size()).transpose();
    Eigen::VectorXd b = m.row(basis.size()).transpose();
    Eigen::VectorXd c = a.completeOrthogonalDecomposition().solve(b);
    std::vector<Rational> coeffs;
    StructuredField recon = StructuredField::M(Expr());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        auto r = Rational::from_double(c(k), 10000, 1e-7);
        if (!r) return std::nullopt;
        coeffs.push_back(*r);
        if (!r->is_zero()) recon = recon + scale(*r, basis[k]);
    }
    if (!same_field(recon, target)) return std::nullopt;
    return coeffs;
}

AdjointResult adjoint_gpart(const StructuredField& p0, const StructuredField& q1, const StructuredField& q2) {
    std::vector<StructuredField> basis{q1, q2, StructuredField::M(), StructuredField::I()};
    AdjointResult out;
    for (int p = 0; p < 2; ++p) {
        StructuredField br = commutator(p0, p == 0 ? q1 : q2);
        auto c = constant_combination(br, basis);
        if (!c) throw PreconditionError("bracket does not lie in span{Q1, Q2, M, I} with constant coefficients");
        out.matrix[p][0] = (*c)[0];
        out.matrix[p][1] = (*c)[1];
    }
    const Matrix2& a = out.matrix;
    if (!(a[0][0] + a[1][1]).is_zero()) throw PreconditionError("adjoint matrix has nonzero trace");
    Rational det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    Matrix2 z{{{Rational(0), Rational(0)}, {Rational(0), Rational(0)}}};
    out.canonical = z;
    if (det.sign() < 0) {
        out.type = JordanType::Hyperbolic;
        out.canonical[0][0] = Rational(1);
        out.canonical[1][1] = Rational(-1);
    } else if (det.sign() > 0) {
        out.type = JordanType::Elliptic;
        out.canonical[0][1] = Rational(-1);
        out.canonical[1][0] = Rational(1);
    } else if (!a[0][0].is_zero() || !a[0][1].is_zero() || !a[1][0].is_zero()) {
        out.type = JordanType::Nilpotent;
        out.canonical[1][0] = Rational(1);
    } else {
        out.type = JordanType::Zero;
    }
    return out;
}

std::string to_string(const StructuredField& q) {
    std::string out;
    auto add = [&](const std::string& s) {
        if (!out.empty()) out += " + ";
        out += s;
    };
    if (!q.tau.is_zero_exact()) add("D(" + to_string(q.tau) + ")");
    if (!q.chi.is_zero_exact()) add("G(" + to_string(q.chi) + ")");
    auto scaled = [&](const Expr& c, const char* name) {
        if (c.is_zero_exact()) return;
        auto k = c.as_constant();
        if (k && k->is_one()) add(name);
        else add("(" + to_string(c) + ")*" + name);
    };
    scaled(q.sigma, "M");
    scaled(q.rho, "I");
    if (q.has_z()) add("Z(" + to_string(*q.eta0) + ")");
    if (out.empty()) out = "0";
    return out;
}

}  // namespace schrodclass
