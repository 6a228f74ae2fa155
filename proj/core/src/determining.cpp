#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "expr_internal.hpp"
#include "schrodclass/classify.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

using Mat7 = Eigen::Matrix<double, 7, 7>;

Expr dt(const Expr& e, int order = 1) {
    return diff(e, Var::t, order);
}

// x-function key with its coefficients in F1 = V_t, F2 = x V_x / 2 + V, F3 = V_x.
struct KeyedCoefficients {
    Expr key;
    std::array<Expr, 3> coef;
};

void collect(const Expr& F, int slot, std::vector<KeyedCoefficients>& table) {
    for (const auto& term : terms(F)) {
        Term xs{CRational(1), {}};
        Term ts{term.coeff, {}};
        for (const auto& f : term.factors) {
            bool in_x = depends_on(f.atom, Var::x);
            bool in_t = depends_on(f.atom, Var::t);
            if (in_x && in_t) throw UnsplittableError("potential mixes t and x in " + to_string(f.atom));
            (in_x ? xs : ts).factors.push_back(f);
        }
        Expr key = from_term(xs);
        Expr c = from_term(ts);
        auto it = std::find_if(table.begin(), table.end(), [&](const auto& k) { return identical(k.key, key); });
        if (it == table.end()) {
            table.push_back({key, {}});
            it = std::prev(table.end());
        }
        it->coef[slot] += c;
    }
}

// Sample nodes for x-functions, inside the positive local chart.
std::vector<double> x_nodes(int n) {
    std::vector<double> xs;
    for (int j = 0; j < n; ++j) xs.push_back(0.3 + 2.6 * (j + 0.5) / n + 0.013 * std::sin(7.0 * j));
    return xs;
}

ProbeBox key_box() {
    ProbeBox box;
    box.x_lo = 0.3;
    box.x_hi = 2.9;
    return box;
}

// Replaces keys by a linearly independent real family; 1, x, x^2 are kept first.
std::vector<KeyedCoefficients> independent_keys(std::vector<KeyedCoefficients> table) {
    std::vector<KeyedCoefficients> real_keys;
    auto add = [&](const Expr& key, const std::array<Expr, 3>& coef) {
        if (key.is_zero_exact()) return;
        auto it = std::find_if(real_keys.begin(), real_keys.end(), [&](const auto& k) { return identical(k.key, key); });
        if (it == real_keys.end()) {
            real_keys.push_back({key, coef});
        } else {
            for (int s = 0; s < 3; ++s) it->coef[s] += coef[s];
        }
    };
    Expr x = Expr::x();
    for (const Expr& k : {Expr(1), x, x * x}) add(k, {});
    for (const auto& k : table) {
        if (is_real(k.key)) {
            add(k.key, k.coef);
        } else {
            // c (kr + i ki) = c kr + (i c) ki
            std::array<Expr, 3> ic;
            for (int s = 0; s < 3; ++s) ic[s] = Expr::i() * k.coef[s];
            add(re(k.key), k.coef);
            add(im(k.key), ic);
        }
    }
    std::vector<double> xs = x_nodes(static_cast<int>(real_keys.size()) + 12);
    std::vector<KeyedCoefficients> basis;
    std::vector<Eigen::VectorXd> samples;
    auto sample = [&](const Expr& key) {
        Eigen::VectorXd v(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) v(j) = eval(key, 0.0, xs[j]).real();
        return v;
    };
    for (auto& k : real_keys) {
        Eigen::VectorXd v = sample(k.key);
        if (!basis.empty()) {
            Eigen::MatrixXd B(xs.size(), basis.size());
            for (std::size_t j = 0; j < basis.size(); ++j) B.col(j) = samples[j];
            Eigen::VectorXd alpha = B.colPivHouseholderQr().solve(v);
            if ((B * alpha - v).norm() <= 1e-9 * std::max(1.0, v.norm())) {
                Expr combo;
                std::vector<Rational> q;
                bool ok = true;
                for (Eigen::Index j = 0; j < alpha.size(); ++j) {
                    auto r = Rational::from_double(alpha(j), 100000, 1e-9);
                    if (!r) {
                        ok = false;
                        break;
                    }
                    q.push_back(*r);
                    combo += Expr(*r) * basis[j].key;
                }
                if (ok && is_zero(combo - k.key, key_box())) {
                    for (std::size_t j = 0; j < q.size(); ++j) {
                        for (int s = 0; s < 3; ++s) basis[j].coef[s] += Expr(q[j]) * k.coef[s];
                    }
                    continue;
                }
                throw UnsplittableError("x-functions of the potential are dependent with non-rational coefficients");
            }
        }
        basis.push_back(k);
        samples.push_back(v);
    }
    return basis;
}

bool row_zero(const StateRow& r) {
    for (const auto& e : r) {
        if (!e.is_zero_exact() && !is_zero(e)) return false;
    }
    return true;
}

double eval_real(const Expr& e, double t) {
    if (e.is_zero_exact()) return 0.0;
    return eval(e, t, 0.0).real();
}

// ---- x-sampled canonical system ----

struct SampledSystem {
    Expr V, Vt, Vx;
    std::vector<double> xs;
    static constexpr int cols_[3] = {kTau, kTauT, kChi};

    // A(t) and an orthonormal basis of the constraint row space at t.
    void at(double t, Mat7& A, std::vector<Eigen::Matrix<double, 1, 7>>& rows) const {
        const int m0 = static_cast<int>(xs.size());
        std::vector<double> xv;
        std::vector<std::array<std::complex<double>, 3>> F;
        for (int j = 0; j < m0; ++j) {
            try {
                std::complex<double> v = eval(V, t, xs[j]);
                std::complex<double> vt = eval(Vt, t, xs[j]);
                std::complex<double> vx = eval(Vx, t, xs[j]);
                F.push_back({vt, 0.5 * xs[j] * vx + v, vx});
                xv.push_back(xs[j]);
            } catch (const SingularityError&) {
            }
        }
        // Nodes next to a singularity dominate the fit; keep the well-scaled ones.
        std::vector<double> mag;
        for (const auto& f : F) mag.push_back(std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])}));
        if (!mag.empty()) {
            std::vector<double> sorted = mag;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            double cap = 1e2 * std::max(sorted[sorted.size() / 2], 1e-300);
            std::size_t w = 0;
            for (std::size_t j = 0; j < F.size(); ++j) {
                if (mag[j] <= cap) {
                    F[w] = F[j];
                    xv[w] = xv[j];
                    ++w;
                }
            }
            F.resize(w);
            xv.resize(w);
        }
        const int m = static_cast<int>(xv.size());
        if (m < 8) throw SingularityError("too few regular x-nodes");
        Eigen::MatrixXd R(m, 3), Im(m, 3), Vm(m, 3);
        double scale = 0.0;
        for (int j = 0; j < m; ++j) {
            for (int k = 0; k < 3; ++k) {
                R(j, k) = F[j][k].real();
                Im(j, k) = F[j][k].imag();
                scale = std::max({scale, std::abs(R(j, k)), std::abs(Im(j, k))});
            }
            Vm(j, 0) = xv[j] * xv[j] / 8.0;
            Vm(j, 1) = xv[j] / 2.0;
            Vm(j, 2) = 1.0;
        }
        Eigen::MatrixXd P = Vm.completeOrthogonalDecomposition().pseudoInverse();
        Eigen::MatrixXd top = P * R;  // rows: tau_ttt, chi_tt, sigma_t in terms of (tau, tau_t, chi)
        Eigen::RowVectorXd mean = Im.colwise().mean();
        Eigen::MatrixXd C(2 * m, 3);
        C.topRows(m) = R - Vm * top;
        C.bottomRows(m) = Im.rowwise() - mean;
        rows.clear();
        if (scale > 0.0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
            const auto& s = svd.singularValues();
            for (int k = 0; k < 3; ++k) {
                if (s(k) <= 1e-9 * scale * std::sqrt(double(m))) break;
                Eigen::Vector3d v = svd.matrixV().col(k);
                Eigen::Matrix<double, 1, 7> row = Eigen::Matrix<double, 1, 7>::Zero();
                for (int c = 0; c < 3; ++c) row(cols_[c]) = v(c);
                rows.push_back(row);
            }
        }
        A.setZero();
        A(kTau, kTauT) = 1.0;
        A(kTauT, kTauTT) = 1.0;
        A(kChi, kChiT) = 1.0;
        for (int k = 0; k < 3; ++k) {
            A(kTauTT, cols_[k]) = top(0, k);
            A(kChiT, cols_[k]) = top(1, k);
            A(kSigma, cols_[k]) = top(2, k);
            A(kRho, cols_[k]) = -mean(k);
        }
        A(kRho, kTauTT) = -0.25;
    }
};

struct OracleRun {
    Eigen::MatrixXd null_basis;           // 7 x dim, initial states
    std::vector<double> times;
    std::vector<Mat7> phi;                // fundamental matrix at the sample times
    double gap = 0.0;
};

int rank_with_gap(const Eigen::VectorXd& s, double& gap) {
    if (s.size() == 0 || s(0) == 0.0) {
        gap = std::numeric_limits<double>::infinity();
        return 0;
    }
    int r = 0;
    while (r < s.size() && s(r) > 1e-8 * s(0)) ++r;
    double kept = s(r - 1);
    double dropped = r < s.size() ? s(r) : 0.0;
    gap = dropped > 0.0 ? kept / dropped : std::numeric_limits<double>::infinity();
    return r;
}

OracleRun run_oracle(const SampledSystem& sys, TInterval iv) {
    constexpr int kSteps = 4000;
    constexpr int kSamples = 64;
    const double h = (iv.hi - iv.lo) / kSteps;
    Mat7 Phi = Mat7::Identity();
    OracleRun run;
    std::vector<Eigen::Matrix<double, 1, 7>> stacked;
    std::vector<Eigen::Matrix<double, 1, 7>> rows;
    Mat7 A;
    auto record = [&](double t) {
        sys.at(t, A, rows);
        run.times.push_back(t);
        run.phi.push_back(Phi);
        for (const auto& r : rows) {
            Eigen::Matrix<double, 1, 7> mapped = r * Phi;
            double n = mapped.norm();
            if (n > 0.0) stacked.push_back(mapped / n);
        }
    };
    record(iv.lo);
    for (int step = 0; step < kSteps; ++step) {
        double t = iv.lo + step * h;
        Mat7 A1, A2, A3;
        sys.at(t, A1, rows);
        sys.at(t + 0.5 * h, A2, rows);
        sys.at(t + h, A3, rows);
        Mat7 k1 = A1 * Phi;
        Mat7 k2 = A2 * (Phi + 0.5 * h * k1);
        Mat7 k3 = A2 * (Phi + 0.5 * h * k2);
        Mat7 k4 = A3 * (Phi + h * k3);
        Phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!Phi.allFinite()) throw SingularityError("fundamental matrix overflow");
        if ((step + 1) % (kSteps / kSamples) == 0) record(t + h);
    }
    if (stacked.empty()) {
        run.null_basis = Eigen::MatrixXd::Identity(7, 7);
        run.gap = std::numeric_limits<double>::infinity();
        return run;
    }
    Eigen::MatrixXd S(stacked.size(), 7);
    for (std::size_t k = 0; k < stacked.size(); ++k) S.row(k) = stacked[k];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
    int r = rank_with_gap(svd.singularValues(), run.gap);
    run.null_basis = svd.matrixV().rightCols(7 - r);
    return run;
}

}  // namespace

Expr classifying_residual(const Expr& V, const StructuredField& q) {
    if (q.has_z()) throw PreconditionError("classifying residual requires a Z-free field");
    Expr x = Expr::x();
    Expr i = Expr::i();
    const Expr& tau = q.tau;
    return tau * diff(V, Var::t) + (dt(tau) * x / Expr(2) + q.chi) * diff(V, Var::x) + dt(tau) * V -
           dt(tau, 3) * x * x / Expr(8) - dt(q.chi, 2) * x / Expr(2) - dt(q.sigma) + i * dt(q.rho) +
           i * dt(tau, 2) / Expr(4);
}

std::array<std::array<double, 7>, 7> DeterminingSystem::matrix(double t) const {
    std::array<std::array<double, 7>, 7> A{};
    A[kTau][kTauT] = 1.0;
    A[kTauT][kTauTT] = 1.0;
    A[kChi][kChiT] = 1.0;
    for (int c = 0; c < 7; ++c) {
        A[kTauTT][c] = eval_real(tau_ttt[c], t);
        A[kChiT][c] = eval_real(chi_tt[c], t);
        A[kSigma][c] = eval_real(sigma_t[c], t);
        A[kRho][c] = eval_real(rho_t[c], t);
    }
    return A;
}

DeterminingSystem split_determining(const Expr& V) {
    Expr x = Expr::x();
    Expr Vx = diff(V, Var::x);
    std::vector<KeyedCoefficients> table;
    collect(diff(V, Var::t), 0, table);
    collect(x * Vx / Expr(2) + V, 1, table);
    collect(Vx, 2, table);
    std::vector<KeyedCoefficients> keys = independent_keys(std::move(table));
    DeterminingSystem sys;
    auto re_row = [](const KeyedCoefficients& k) {
        StateRow r;
        r[kTau] = re(k.coef[0]);
        r[kTauT] = re(k.coef[1]);
        r[kChi] = re(k.coef[2]);
        return r;
    };
    auto im_row = [](const KeyedCoefficients& k) {
        StateRow r;
        r[kTau] = im(k.coef[0]);
        r[kTauT] = im(k.coef[1]);
        r[kChi] = im(k.coef[2]);
        return r;
    };
    auto scaled = [](StateRow r, const Expr& s) {
        for (auto& e : r) e = s * e;
        return r;
    };
    // keys[0] = 1, keys[1] = x, keys[2] = x^2
    sys.sigma_t = re_row(keys[0]);
    sys.chi_tt = scaled(re_row(keys[1]), Expr(2));
    sys.tau_ttt = scaled(re_row(keys[2]), Expr(8));
    sys.rho_t = scaled(im_row(keys[0]), Expr(-1));
    sys.rho_t[kTauTT] = Expr(Rational(-1, 4));
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (k >= 3) {
            StateRow r = re_row(keys[k]);
            if (!row_zero(r)) sys.constraints.push_back(r);
        }
        if (k >= 1) {
            StateRow r = im_row(keys[k]);
            if (!row_zero(r)) sys.constraints.push_back(r);
        }
    }
    return sys;
}

NumericAlgebra numeric_algebra(const Expr& V, TInterval iv) {
    SampledSystem sys{normalize(V), diff(V, Var::t), diff(V, Var::x), x_nodes(24)};
    OracleRun run;
    bool done = false;
    for (int attempt = 0; attempt < 4 && !done; ++attempt) {
        try {
            run = run_oracle(sys, iv);
            done = true;
        } catch (const SingularityError&) {
            iv.hi = iv.lo + 0.5 * (iv.hi - iv.lo);
        }
    }
    if (!done) throw SingularityError("numeric oracle failed on every interval");
    NumericAlgebra out;
    out.dim = static_cast<int>(run.null_basis.cols());
    out.gap = run.gap;
    const Eigen::MatrixXd& N = run.null_basis;
    const std::size_t nt = run.times.size();
    Eigen::MatrixXd tau(nt, out.dim);
    for (std::size_t j = 0; j < nt; ++j) tau.row(j) = (run.phi[j] * N).row(kTau);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_tau(tau, Eigen::ComputeFullV);
    double gap_tau = 0.0;
    out.k1 = out.dim == 0 ? 0 : rank_with_gap(svd_tau.singularValues(), gap_tau);
    if (svd_tau.singularValues().size() > 0 && svd_tau.singularValues()(0) < 1e-12) out.k1 = 0;
    out.gap = std::min(out.gap, gap_tau);
    out.k2 = out.dim - out.k1 - 2;
    if (out.k1 == 1 && out.k2 == 2) {
        Eigen::MatrixXd Z = svd_tau.matrixV().rightCols(out.dim - 1);
        Eigen::VectorXd p0 = N * svd_tau.matrixV().col(0);
        Eigen::MatrixXd chi(nt, Z.cols());
        for (std::size_t j = 0; j < nt; ++j) chi.row(j) = (run.phi[j] * N * Z).row(kChi);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd_chi(chi, Eigen::ComputeFullV);
        Eigen::MatrixXd Q = N * Z * svd_chi.matrixV().leftCols(2);
        Eigen::MatrixXd X(nt, 2), U(nt, 2);
        for (std::size_t j = 0; j < nt; ++j) {
            Eigen::VectorXd s0 = run.phi[j] * p0;
            Eigen::MatrixXd sq = run.phi[j] * Q;
            for (int p = 0; p < 2; ++p) {
                X(j, p) = sq(kChi, p);
                U(j, p) = s0(kTau) * sq(kChiT, p) - 0.5 * s0(kTauT) * sq(kChi, p);
            }
        }
        // U = X a^T
        Eigen::Matrix2d a = X.colPivHouseholderQr().solve(U).transpose();
        double tr = a.trace();
        double disc = tr * tr - 4.0 * a.determinant();
        double scale = a.squaredNorm();
        if (scale < 1e-20) out.jordan = JordanType::Zero;
        else if (std::abs(disc) <= 1e-6 * scale) out.jordan = JordanType::Nilpotent;
        else out.jordan = disc > 0 ? JordanType::Hyperbolic : JordanType::Elliptic;
    }
    return out;
}

int numeric_dimension(const Expr& V, TInterval iv) {
    return numeric_algebra(V, iv).dim;
}

}  // namespace schrodclass
