#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "schrodclass/classify.hpp"
#include "schrodclass/errors.hpp"
#include "schrodclass/fixtures.hpp"
#include "schrodclass/numverify.hpp"
#include "schrodclass/report_json.hpp"

using namespace schrodclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitGrammar = 2;
constexpr int kExitNumericOnly = 3;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

TInterval parse_interval(const std::string& s) {
    auto parts = split_commas(s);
    if (parts.size() != 2) throw PreconditionError("--t-interval expects a,b");
    TInterval iv{std::stod(parts[0]), std::stod(parts[1])};
    if (!(iv.hi > iv.lo)) throw PreconditionError("--t-interval needs a < b");
    return iv;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void print_report(const ClassificationReport& r) {
    std::cout << "Table " << r.table << ", Case " << r.case_id << ", dim " << r.dim_ess << ", k=(" << r.k1 << ","
              << r.k2 << ")\n";
    std::cout << "  status: " << status_name(r.status) << "\n";
    std::cout << "  maximal: " << (r.maximal ? "yes" : "no") << "\n";
    if (r.violated_condition) std::cout << "  violated condition: " << *r.violated_condition << "\n";
    std::cout << "  canonical potential: " << (r.canonical_potential ? to_string(*r.canonical_potential) : "unknown")
              << "\n";
    if (r.mapping) std::cout << "  mapping: " << to_string(*r.mapping) << "\n";
    std::cout << "  basis:\n";
    for (const auto& q : r.basis) std::cout << "    " << to_string(q) << "\n";
    for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
}

struct ClassifyArgs {
    std::string potential;
    std::string gamma;
    bool real = false;
    std::string json_path;
    std::string interval;
    bool require_exact = false;
};

int cmd_classify(const ClassifyArgs& a) {
    if (a.potential.empty() && a.gamma.empty()) throw PreconditionError("--potential or --subclass-gamma is required");
    TInterval iv = a.interval.empty() ? TInterval{0.5, 1.5} : parse_interval(a.interval);
    ClassificationReport r;
    if (!a.gamma.empty()) {
        r = classify_subclass(parse(a.gamma), iv);
    } else if (a.real) {
        r = classify_real(parse(a.potential), iv);
    } else {
        r = classify_full(parse(a.potential), iv);
    }
    print_report(r);
    if (!a.json_path.empty()) {
        std::ofstream out(a.json_path, std::ios::binary);
        if (!out) throw PreconditionError("cannot write " + a.json_path);
        out << report_to_json(r);
    }
    if (a.require_exact && r.status == ReportStatus::NumericOnly) return kExitNumericOnly;
    return kExitOk;
}

struct VerifyArgs {
    std::string case_id;
    std::string potential;
    std::vector<std::string> fields;
    std::string initial;
    int nx = 0;
    int nt = 0;
    double xmin = 0.0;
    double xmax = 0.0;
    double tmax = 0.0;
    bool has_xmin = false;
    bool has_xmax = false;
    bool has_tmax = false;
    std::string csv_path;
    std::string dump_path;
    int jobs = 1;
};

StructuredField parse_field(const std::string& spec) {
    auto parts = split_commas(spec);
    if (parts.size() != 4) throw PreconditionError("--field expects tau,chi,sigma,rho");
    StructuredField q;
    q.tau = parse(parts[0]);
    q.chi = parse(parts[1]);
    q.sigma = parse(parts[2]);
    q.rho = parse(parts[3]);
    return q;
}

void print_row(const ConvergenceRow& row) {
    std::printf("  %-28s %12s %12s %8.3f  %s\n", row.label.c_str(), format_real(row.coarse).c_str(),
                format_real(row.fine).c_str(), row.ratio(), row.second_order() ? "pass" : "FAIL");
}

int cmd_verify(const VerifyArgs& a) {
    Expr V;
    Expr initial = parse("exp(0 - x^2)");
    Grid grid;
    std::vector<StructuredField> fields;
    std::vector<std::string> labels;
    std::optional<AdmissibleTransform> map;
    if (!a.case_id.empty()) {
        const FixtureCase& fc = fixture_case(1, a.case_id);
        V = fixture_potential(fc, fc.instances.front());
        fields = fc.basis(fc.instances.front());
        for (const auto& q : fields) labels.push_back(to_string(q));
        PdeSetup setup = fixture_pde_setup(a.case_id);
        grid = setup.grid;
        initial = setup.initial;
        map = setup.map;
    } else {
        if (a.potential.empty()) throw PreconditionError("--case or --potential is required");
        V = parse(a.potential);
        for (const auto& f : a.fields) {
            fields.push_back(parse_field(f));
            labels.push_back(to_string(fields.back()));
        }
    }
    if (!a.initial.empty()) initial = parse(a.initial);
    if (a.nx) grid.n_x = a.nx;
    if (a.nt) grid.n_t = a.nt;
    if (a.has_xmin) grid.x_min = a.xmin;
    if (a.has_xmax) grid.x_max = a.xmax;
    if (a.has_tmax) grid.t1 = a.tmax;
    grid.validate();

    ConvergenceStudy study = convergence_study(V, fields, labels, initial, grid, map, a.jobs);
    const Grid fine = grid.refined();
    std::printf("V = %s\n", to_string(V).c_str());
    std::printf("grids %dx%d and %dx%d on x in [%g, %g], t in [%g, %g]\n", grid.n_x, grid.n_t, fine.n_x, fine.n_t,
                grid.x_min, grid.x_max, grid.t0, grid.t1);
    std::printf("  %-28s %12s %12s %8s\n", "check", "coarse", "fine", "ratio");
    print_row(study.equation);
    int passed = 0;
    for (const auto& row : study.fields) {
        print_row(row);
        passed += row.second_order();
    }
    if (study.map) print_row(*study.map);
    if (!study.fields.empty()) {
        std::printf("%d/%zu basis fields pass\n", passed, study.fields.size());
    }
    if (!a.csv_path.empty() || !a.dump_path.empty()) {
        NumericSolution sol = crank_nicolson(V, initial, grid);
        if (!a.csv_path.empty()) {
            std::ofstream out(a.csv_path);
            write_csv(sol, out);
        }
        if (!a.dump_path.empty()) {
            std::ofstream out(a.dump_path, std::ios::binary);
            write_binary(sol, out);
        }
    }
    return study.passed() ? kExitOk : kExitFailure;
}

struct TransformArgs {
    std::string potential;
    std::string T = "t";
    std::string X0 = "0";
    std::string Sigma = "0";
    std::string Upsilon = "0";
    int eps = 1;
    std::string interval;
};

int cmd_transform(const TransformArgs& a) {
    if (a.eps != 1 && a.eps != -1) throw PreconditionError("--eps must be 1 or -1");
    TInterval iv = a.interval.empty() ? TInterval{} : parse_interval(a.interval);
    EquivTransform g;
    g.T = normalize(parse(a.T));
    g.X0 = normalize(parse(a.X0));
    g.Sigma = normalize(parse(a.Sigma));
    g.Upsilon = normalize(parse(a.Upsilon));
    g.eps = a.eps;
    TransformedPotential tp = transform_potential(parse(a.potential), g, iv);
    if (tp.potential) {
        std::cout << to_string(*tp.potential) << "\n";
    } else {
        std::cout << "numeric-only: the time map has no inverse in the grammar\n";
        std::cout << "in the old variables: " << to_string(tp.source_form) << "\n";
    }
    return kExitOk;
}

void print_table(const TableFixture& t) {
    std::cout << "Table " << t.table << ". " << t.title << "\n";
    for (const auto& c : t.cases) {
        std::cout << "  " << c.case_id << "  k1=" << c.k1 << " k2=" << c.k2 << " dim " << c.dim
                  << "  V = " << c.potential_template;
        if (!c.gamma_template.empty() && c.gamma_template != c.potential_template) {
            std::cout << ", gamma = " << c.gamma_template;
        }
        std::cout << "\n    basis: ";
        for (std::size_t k = 0; k < c.basis_templates.size(); ++k) {
            std::cout << (k ? ", " : "") << c.basis_templates[k];
        }
        std::cout << "\n";
        if (!c.condition.empty()) std::cout << "    condition: " << c.condition << "\n";
        for (const auto& inst : c.instances) {
            if (inst.empty()) continue;
            std::cout << "    instance:";
            for (const auto& [name, value] : inst) std::cout << " " << name << " = " << value;
            std::cout << "\n";
        }
    }
}

int cmd_tables(int table, bool self_test, int jobs) {
    if (self_test) {
        auto results = fixture_self_test(jobs);
        int ok = 0;
        for (const auto& r : results) {
            if (r.reproduced) {
                ++ok;
            } else {
                std::cout << "mismatch: Table " << r.table << ", Case " << r.case_id << ": " << r.detail << "\n";
            }
        }
        std::cout << ok << "/" << results.size() << " fixtures reproduced\n";
        return ok == static_cast<int>(results.size()) ? kExitOk : kExitFailure;
    }
    if (table) {
        print_table(fixture_table(table));
    } else {
        for (const auto& t : table_fixtures()) print_table(t);
    }
    return kExitOk;
}

int cmd_dim(const std::string& potential, const std::string& interval) {
    TInterval iv = interval.empty() ? TInterval{0.5, 1.5} : parse_interval(interval);
    NumericAlgebra na = numeric_algebra(parse(potential), iv);
    std::cout << "dim " << na.dim << ", k=(" << na.k1 << "," << na.k2 << "), gap " << format_real(na.gap);
    if (na.jordan) std::cout << ", " << jordan_name(*na.jordan);
    std::cout << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lie symmetry classification of linear Schrodinger equations i psi_t + psi_xx + V psi = 0"};
    app.require_subcommand(1);

    ClassifyArgs ca;
    auto* classify = app.add_subcommand("classify", "Classify a potential");
    classify->add_option("--potential", ca.potential, "Potential V(t,x)");
    classify->add_option("--subclass-gamma", ca.gamma, "gamma(t) for V = i*gamma*x");
    classify->add_flag("--real", ca.real, "Classify within real-valued potentials");
    classify->add_option("--json", ca.json_path, "Write the JSON report to this path");
    classify->add_option("--t-interval", ca.interval, "Working interval a,b");
    classify->add_flag("--require-exact", ca.require_exact, "Exit 3 on numeric-only results");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Numerical refinement study of symmetries");
    verify->add_option("--case", va.case_id, "Table 1 case id");
    verify->add_option("--potential", va.potential, "Potential V(t,x)");
    verify->add_option("--field", va.fields, "Field tau,chi,sigma,rho (repeatable)");
    verify->add_option("--initial", va.initial, "Initial data psi(t0,x)");
    verify->add_option("--nx", va.nx, "Space points");
    verify->add_option("--nt", va.nt, "Time points");
    auto* xmin = verify->add_option("--xmin", va.xmin, "Left end");
    auto* xmax = verify->add_option("--xmax", va.xmax, "Right end");
    auto* tmax = verify->add_option("--tmax", va.tmax, "Final time");
    verify->add_option("--csv", va.csv_path, "Write the coarse solution as CSV");
    verify->add_option("--dump", va.dump_path, "Write the coarse solution as a binary dump");
    verify->add_option("--jobs", va.jobs, "Concurrent evaluations");

    TransformArgs ta;
    auto* transform = app.add_subcommand("transform", "Apply an equivalence transformation to a potential");
    transform->add_option("--potential", ta.potential, "Potential V(t,x)")->required();
    transform->add_option("--T", ta.T, "New time T(t)");
    transform->add_option("--X0", ta.X0, "Shift X0(t)");
    transform->add_option("--Sigma", ta.Sigma, "Phase Sigma(t)");
    transform->add_option("--Upsilon", ta.Upsilon, "Amplitude Upsilon(t)");
    transform->add_option("--eps", ta.eps, "Space reflection sign");
    transform->add_option("--t-interval", ta.interval, "Working interval a,b");

    int table = 0;
    bool self_test = false;
    int table_jobs = 1;
    auto* tables = app.add_subcommand("tables", "List the classification tables");
    tables->add_option("--table", table, "Table number")->check(CLI::Range(1, 3));
    tables->add_flag("--self-test", self_test, "Reclassify every fixture");
    tables->add_option("--jobs", table_jobs, "Concurrent fixtures");

    std::string dim_potential, dim_interval;
    auto* dim = app.add_subcommand("dim", "Numeric dimension of the essential algebra");
    dim->add_option("--potential", dim_potential, "Potential V(t,x)")->required();
    dim->add_option("--t-interval", dim_interval, "Working interval a,b");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*classify) return cmd_classify(ca);
        if (*verify) {
            va.has_xmin = xmin->count() > 0;
            va.has_xmax = xmax->count() > 0;
            va.has_tmax = tmax->count() > 0;
            return cmd_verify(va);
        }
        if (*transform) return cmd_transform(ta);
        if (*tables) return cmd_tables(table, self_test, table_jobs);
        if (*dim) return cmd_dim(dim_potential, dim_interval);
    } catch (const GrammarError& e) {
        std::cerr << "grammar error: " << e.what() << "\n";
        return kExitGrammar;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
