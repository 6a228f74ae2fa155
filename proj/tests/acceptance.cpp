#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "schrodclass/classify.hpp"
#include "schrodclass/equiv.hpp"
#include "schrodclass/errors.hpp"
#include "schrodclass/fixtures.hpp"
#include "schrodclass/numverify.hpp"
#include "support.hpp"

using namespace schrodclass;
using schrodclass::testsupport::Rng;
using SF = StructuredField;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void fail(const std::string& what) {
        pass = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

int report(int n, const char* name, Outcome& o) {
    std::printf("%s %d. %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.str().c_str());
    for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

Outcome table_reproduction() {
    Outcome o;
    auto start = Clock::now();
    int cases = 0;
    double slowest = 0.0;
    for (const auto& table : table_fixtures()) {
        for (const auto& c : table.cases) {
            auto case_start = Clock::now();
            for (const auto& inst : c.instances) {
                ClassificationReport r = classify_fixture(table.table, c, inst);
                std::string label = std::to_string(table.table) + "." + c.case_id;
                if (r.case_id != c.case_id || r.k1 != c.k1 || r.k2 != c.k2 || r.dim_ess != c.dim) {
                    o.fail(label + ": got case " + r.case_id + " k=(" + std::to_string(r.k1) + "," +
                           std::to_string(r.k2) + ") dim " + std::to_string(r.dim_ess));
                }
                if (r.status == ReportStatus::NumericOnly) o.fail(label + ": numeric-only status");
            }
            double dt = seconds_since(case_start);
            slowest = std::max(slowest, dt);
            if (dt >= 10.0) o.fail("case " + c.case_id + " took " + std::to_string(dt) + " s");
            ++cases;
        }
    }
    double total = seconds_since(start);
    if (cases != 17) o.fail("expected 17 cases, found " + std::to_string(cases));
    if (total >= 120.0) o.fail("total time " + std::to_string(total) + " s");
    o.detail << cases << "/17 cases, slowest " << slowest << " s, total " << total << " s";
    return o;
}

Outcome residual_suite() {
    Outcome o;
    int checks = 0;
    for (const auto& table : table_fixtures()) {
        for (const auto& c : table.cases) {
            for (const auto& inst : c.instances) {
                Expr V = fixture_potential(c, inst);
                for (const auto& q : c.basis(inst)) {
                    ++checks;
                    if (!zero_test(classifying_residual(V, q)).zero) {
                        o.fail(std::to_string(table.table) + "." + c.case_id + ": " + to_string(q));
                    }
                }
            }
        }
    }
    if (checks < 40) o.fail("only " + std::to_string(checks) + " checks");
    o.detail << checks << " residual zero-checks";
    return o;
}

Outcome commutator_consistency() {
    Outcome o;
    Rng rng(probe_seed() ^ 0x3u);
    int pairs = 0;
    for (int n = 0; n < 50; ++n) {
        SF a = rng.z_free_field(), b = rng.z_free_field();
        ++pairs;
        if (!testsupport::bracket_consistent(a, b)) o.fail("bracket mismatch: " + to_string(a) + " , " + to_string(b));
    }
    std::vector<SF> gens;
    for (int k = 0; k <= 3; ++k) {
        Expr tk = pow(Expr::t(), Rational(k));
        gens.push_back(SF::D(tk));
        gens.push_back(SF::G(tk));
        gens.push_back(SF::M(tk));
        gens.push_back(SF::I(tk));
    }
    int triples = 0;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            for (std::size_t k = j + 1; k < gens.size(); ++k) {
                ++triples;
                if (!testsupport::is_zero_field(testsupport::jacobi_sum(gens[i], gens[j], gens[k]))) {
                    o.fail("Jacobi fails on " + to_string(gens[i]) + ", " + to_string(gens[j]) + ", " +
                           to_string(gens[k]));
                }
            }
        }
    }
    for (int n = 0; n < 50; ++n) {
        SF a = rng.z_free_field(true), b = rng.z_free_field(true), c = rng.z_free_field(true);
        ++triples;
        if (!testsupport::is_zero_field(testsupport::jacobi_sum(a, b, c))) o.fail("Jacobi fails on random triple");
    }
    o.detail << pairs << " bracket pairs, " << triples << " Jacobi triples";
    return o;
}

Outcome oracle_agreement() {
    Outcome o;
    int fixtures = 0;
    double min_gap = INFINITY, slowest = 0.0;
    for (const auto& table : table_fixtures()) {
        for (const auto& c : table.cases) {
            for (const auto& inst : c.instances) {
                auto start = Clock::now();
                Expr V = fixture_potential(c, inst);
                NumericAlgebra n = numeric_algebra(V);
                double dt = seconds_since(start);
                slowest = std::max(slowest, dt);
                min_gap = std::min(min_gap, n.gap);
                ++fixtures;
                std::string label = std::to_string(table.table) + "." + c.case_id;
                int expected = static_cast<int>(c.basis(inst).size());
                if (n.dim != expected) {
                    o.fail(label + ": numeric dim " + std::to_string(n.dim) + " vs " + std::to_string(expected));
                }
                if (n.gap < 1e4) o.fail(label + ": gap " + std::to_string(n.gap));
                if (dt >= 5.0) o.fail(label + ": took " + std::to_string(dt) + " s");
            }
        }
    }
    o.detail << fixtures << " fixtures, min gap " << min_gap << ", slowest " << slowest << " s";
    return o;
}

bool probes_agree(const Expr& a, const Expr& b, TInterval dom, Rng& rng) {
    int used = 0;
    for (int attempt = 0; attempt < 40 && used < 10; ++attempt) {
        double t = rng.real(dom.lo, dom.hi), x = rng.real(-2.0, 2.0);
        try {
            std::complex<double> va = eval(a, t, x), vb = eval(b, t, x);
            if (std::abs(va - vb) > 1e-10 * std::max(1.0, std::abs(vb))) return false;
            ++used;
        } catch (const SingularityError&) {
        }
    }
    return used == 10;
}

Outcome group_laws() {
    Outcome o;
    Rng rng(probe_seed() ^ 0x5u);
    TInterval dom{0.5, 1.5};
    int symbolic = 0, probed = 0;
    for (int n = 0; n < 200; ++n) {
        Expr V = rng.potential();
        EquivTransform g = rng.elementary(dom);
        try {
            TransformedPotential fwd = transform_potential(V, g, dom);
            TInterval img = image_interval(g, dom);
            EquivTransform inv = inverse(g, dom);
            TransformedPotential back = transform_potential(*fwd.potential, inv, img);
            if (identical(normalize(*back.potential), normalize(V))) {
                ++symbolic;
            } else if (probes_agree(*back.potential, V, dom, rng)) {
                ++probed;
            } else {
                o.fail(to_string(V) + " via " + to_string(g));
                continue;
            }
            EquivTransform id = compose(g, inv, dom);
            if (!is_zero(id.T - Expr::t()) || !is_zero(id.X0) || !is_zero(id.Sigma) || !is_zero(id.Upsilon) ||
                id.eps != 1) {
                o.fail("compose(g, inverse(g)) != identity for " + to_string(g));
            }
        } catch (const std::exception& e) {
            o.fail(to_string(V) + " via " + to_string(g) + ": " + e.what());
        }
    }
    o.detail << "200 round trips, " << symbolic << " symbolic, " << probed << " by probes";
    return o;
}

Outcome case_mappings() {
    Outcome o;
    TInterval pos{0.5, 2.0};
    auto check = [&](const char* label, const char* V, EquivTransform g, TInterval dom, const char* expected,
                     const char* expected_case) {
        TransformedPotential tp = transform_potential(parse(V), g, dom);
        if (!tp.potential) {
            o.fail(std::string(label) + ": not representable");
            return;
        }
        if (!is_zero(*tp.potential - parse(expected))) {
            o.fail(std::string(label) + ": got " + to_string(*tp.potential) + ", expected " + expected);
        }
        ClassificationReport r = classify_full(*tp.potential, image_interval(g, dom));
        if (r.case_id != expected_case) o.fail(std::string(label) + ": classified as case " + r.case_id);
        o.detail << label << " -> " << to_string(*tp.potential) << " (case " << r.case_id << "); ";
    };
    check("2b literal", "i*abs(t)^(-3/2)*x", EquivTransform::time(parse("sgn(t)/4*ln(abs(t))")), pos,
          "x^2 + 8*i*x + i", "4a");
    EquivTransform canon = EquivTransform::time(parse("sgn(t)/2*ln(abs(t))"));
    canon.Upsilon = parse("-1/4*ln(abs(t)^(-1)/2)");
    check("2b canonical", "i*abs(t)^(-3/2)*x", canon, pos, "1/4*x^2 + i*2^(3/2)*x", "4a");
    EquivTransform arctan = EquivTransform::time(parse("atan(t)"));
    arctan.Upsilon = parse("1/4*ln(1 + t^2)");
    check("2c", "i*(t^2 + 1)^(-3/2)*x", arctan, {-1.0, 1.0}, "-1/4*x^2 + i*x", "4b");
    return o;
}

Outcome pde_verification() {
    Outcome o;
    auto start = Clock::now();
    int jobs = std::max(1u, std::thread::hardware_concurrency());
    for (const char* id : {"3", "4c", "5", "6"}) {
        const FixtureCase& c = fixture_case(1, id);
        const FixtureConstants& inst = c.instances.front();
        Expr V = fixture_potential(c, inst);
        std::vector<SF> basis = c.basis(inst);
        PdeSetup setup = fixture_pde_setup(id);
        ConvergenceStudy st = convergence_study(V, basis, c.basis_templates, setup.initial, setup.grid, setup.map, jobs);
        if (!st.passed()) {
            std::ostringstream m;
            m << "case " << id << ": equation " << st.equation.ratio();
            for (const auto& r : st.fields) m << ", " << r.label << " " << r.ratio();
            if (st.map) m << ", map " << st.map->ratio();
            o.fail(m.str());
        }
        NumericSolution fine = crank_nicolson(V, setup.initial, setup.grid.refined());
        double worst = INFINITY;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            SF bad = basis[k] + parse("t/10") * SF::I();
            double corrupted = invariance_residual(V, bad, fine);
            double factor = corrupted / std::max(st.fields[k].fine, 1e-300);
            worst = std::min(worst, factor);
            if (factor < 10.0) o.fail(std::string("case ") + id + ": corrupted " + c.basis_templates[k] + " only " +
                                      std::to_string(factor) + "x");
        }
        o.detail << "case " << id << " ok=" << (st.passed() ? "yes" : "no") << " min corruption factor " << worst
                 << "; ";
    }
    double total = seconds_since(start);
    if (total >= 60.0) o.fail("total time " + std::to_string(total) + " s");
    o.detail << "total " << total << " s";
    return o;
}

Outcome invariant_sweep() {
    Outcome o;
    Rng rng(probe_seed() ^ 0x8u);
    TInterval dom{0.5, 1.5};
    int stable = 0;
    for (int n = 0; n < 100; ++n) {
        Expr V = rng.potential();
        try {
            ClassificationReport r = classify_full(V, dom);
            bool k_ok = (r.k1 == 0 || r.k1 == 1 || r.k1 == 3) && (r.k2 == 0 || r.k2 == 2) && r.dim_ess <= 7;
            if (!k_ok) {
                o.fail(to_string(V) + ": k=(" + std::to_string(r.k1) + "," + std::to_string(r.k2) + ") dim " +
                       std::to_string(r.dim_ess));
                continue;
            }
            EquivTransform g = rng.elementary(dom);
            TransformedPotential tp = transform_potential(V, g, dom);
            ClassificationReport s = classify_full(*tp.potential, image_interval(g, dom));
            if (s.case_id != r.case_id || s.k1 != r.k1 || s.k2 != r.k2) {
                o.fail(to_string(V) + " (case " + r.case_id + ") via " + to_string(g) + " -> case " + s.case_id);
                continue;
            }
            ++stable;
        } catch (const std::exception& e) {
            o.fail(to_string(V) + ": " + e.what());
        }
    }
    o.detail << stable << "/100 potentials valid and stable";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria{
        {"Table reproduction", table_reproduction},
        {"Residual suite", residual_suite},
        {"Commutator consistency", commutator_consistency},
        {"Oracle agreement", oracle_agreement},
        {"Group laws", group_laws},
        {"Case-mapping regression", case_mappings},
        {"PDE verification", pde_verification},
        {"Invariant sweep", invariant_sweep},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += report(static_cast<int>(k + 1), criteria[k].name, o);
    }
    return failed == 0 ? 0 : 1;
}
