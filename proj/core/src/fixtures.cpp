#include <algorithm>
#include <future>
#include <regex>
#include <sstream>

#include "schrodclass/errors.hpp"
#include "schrodclass/fixtures.hpp"

namespace schrodclass {

namespace {

using SF = StructuredField;

Expr val(const std::string& tmpl, const FixtureConstants& c) {
    return parse(instantiate(tmpl, c));
}

std::vector<SF> with_kernel(std::vector<SF> rest) {
    std::vector<SF> out{SF::M(), SF::I()};
    for (auto& q : rest) out.push_back(std::move(q));
    return out;
}

SF minus_i(SF q, const Expr& rho) {
    return q - rho * SF::I();
}

std::vector<SF> gamma_basis(const Expr& gamma) {
    return with_kernel({minus_i(SF::G(Expr(1)), integrate_t(gamma)),
                        minus_i(SF::G(Expr::t()), integrate_t(Expr::t() * gamma))});
}

std::vector<SF> case5_basis(const FixtureConstants&) {
    return with_kernel({SF::D(Expr(1)), SF::D(Expr::t()), minus_i(SF::D(parse("t^2")), parse("t/2"))});
}

std::vector<SF> free_basis(const FixtureConstants&) {
    return with_kernel({SF::D(Expr(1)), SF::D(Expr::t()), minus_i(SF::D(parse("t^2")), parse("t/2")),
                        SF::G(Expr(1)), SF::G(Expr::t())});
}

const std::string kTable1Case1 = "V does not satisfy the classifying condition for any field outside <M, I>";
const std::string kGammaCondition =
    "gamma != c3*|c2*t^2 + c1*t + c0|^(-3/2) for real c0, c1, c2, c3 with c0, c1, c2 not all zero";
const std::string kTable1Case3 =
    "V != b2*x^2 + b1*x + b0 + c*(x + a)^(-2) for real a, b2 and complex b1, b0, c with c*Im(b1) = 0";

std::vector<TableFixture> build() {
    std::vector<TableFixture> tables;

    TableFixture t1{1, "Results of classification", {}};
    t1.cases.push_back({"1", 0, 0, 2, "V", "", {"M", "I"}, kTable1Case1, {{{"V", "x^3 + t*x"}}},
                        [](const FixtureConstants&) { return with_kernel({}); }});
    t1.cases.push_back({"2", 0, 2, 4, "i*gamma*x", "gamma",
                        {"M", "I", "G(1) - (int gamma dt) I", "G(t) - (int t*gamma dt) I"}, kGammaCondition,
                        {{{"gamma", "t"}}}, [](const FixtureConstants& c) { return gamma_basis(val("gamma", c)); }});
    t1.cases.push_back({"3", 1, 0, 3, "V", "", {"M", "I", "D(1)"}, kTable1Case3, {{{"V", "exp(x)"}}},
                        [](const FixtureConstants&) { return with_kernel({SF::D(Expr(1))}); }});
    t1.cases.push_back({"4a", 1, 2, 5, "1/4*x^2 + i*b*x", "",
                        {"M", "I", "D(1)", "G(e^t) - b*e^t I", "G(e^(-t)) + b*e^(-t) I"}, "b real, b > 0",
                        {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({SF::D(Expr(1)), minus_i(SF::G(parse("exp(t)")), val("b*exp(t)", c)),
                                                minus_i(SF::G(parse("exp(-t)")), val("-1*b*exp(-t)", c))});
                        }});
    t1.cases.push_back({"4b", 1, 2, 5, "-1/4*x^2 + i*b*x", "",
                        {"M", "I", "D(1)", "G(cos t) - b*sin(t) I", "G(sin t) + b*cos(t) I"}, "b real, b > 0",
                        {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({SF::D(Expr(1)), minus_i(SF::G(parse("cos(t)")), val("b*sin(t)", c)),
                                                minus_i(SF::G(parse("sin(t)")), val("-1*b*cos(t)", c))});
                        }});
    t1.cases.push_back({"4c", 1, 2, 5, "i*b*x", "", {"M", "I", "D(1)", "G(1) - b*t I", "G(t) - 1/2*b*t^2 I"},
                        "b real, b = 1 mod equivalence", {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({SF::D(Expr(1)), minus_i(SF::G(Expr(1)), val("b*t", c)),
                                                minus_i(SF::G(Expr::t()), val("1/2*b*t^2", c))});
                        }});
    t1.cases.push_back({"5", 3, 0, 5, "c*x^(-2)", "", {"M", "I", "D(1)", "D(t)", "D(t^2) - 1/2*t I"},
                        "c complex, c != 0", {{{"c", "1"}}, {{"c", "i"}}}, case5_basis});
    t1.cases.push_back({"6", 3, 2, 7, "0", "",
                        {"M", "I", "D(1)", "D(t)", "D(t^2) - 1/2*t I", "G(1)", "G(t)"}, "", {{}}, free_basis});
    tables.push_back(std::move(t1));

    TableFixture t2{2, "Group classification of the subclass V = i*gamma(t)*x", {}};
    t2.cases.push_back({"1", 0, 2, 4, "i*gamma*x", "gamma",
                        {"M", "I", "G(1) - (int gamma dt) I", "G(t) - (int t*gamma dt) I"}, kGammaCondition,
                        {{{"gamma", "t"}}}, [](const FixtureConstants& c) { return gamma_basis(val("gamma", c)); }});
    t2.cases.push_back({"2a", 1, 2, 5, "i*b*x", "b", {"M", "I", "G(1) - b*t I", "G(t) - 1/2*b*t^2 I", "D(1)"},
                        "b real, b = 1 mod equivalence", {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({minus_i(SF::G(Expr(1)), val("b*t", c)),
                                                minus_i(SF::G(Expr::t()), val("1/2*b*t^2", c)), SF::D(Expr(1))});
                        }});
    t2.cases.push_back({"2b", 1, 2, 5, "i*b*abs(t)^(-3/2)*x", "b*abs(t)^(-3/2)",
                        {"M", "I", "G(1) + 2*b*t*|t|^(-3/2) I", "G(t) - 2*b*|t|^(1/2) I", "D(t)"},
                        "b real, b > 0", {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({minus_i(SF::G(Expr(1)), val("-2*b*t*abs(t)^(-3/2)", c)),
                                                minus_i(SF::G(Expr::t()), val("2*b*abs(t)^(1/2)", c)),
                                                SF::D(Expr::t())});
                        }});
    t2.cases.push_back({"2c", 1, 2, 5, "i*b*(t^2 + 1)^(-3/2)*x", "b*(t^2 + 1)^(-3/2)",
                        {"M", "I", "G(1) - b*t*(t^2 + 1)^(-1/2) I", "G(t) + b*(t^2 + 1)^(-1/2) I",
                         "D(t^2 + 1) - 1/2*t I"},
                        "b real, b > 0", {{{"b", "1"}}}, [](const FixtureConstants& c) {
                            return with_kernel({minus_i(SF::G(Expr(1)), val("b*t*(t^2 + 1)^(-1/2)", c)),
                                                minus_i(SF::G(Expr::t()), val("-1*b*(t^2 + 1)^(-1/2)", c)),
                                                minus_i(SF::D(parse("t^2 + 1")), parse("t/2"))});
                        }});
    t2.cases.push_back({"3", 3, 2, 7, "0", "0",
                        {"M", "I", "G(1)", "G(t)", "D(1)", "D(t)", "D(t^2) - 1/2*t I"}, "", {{}}, free_basis});
    tables.push_back(std::move(t2));

    TableFixture t3{3, "Classification of real-valued potentials", {}};
    t3.cases.push_back({"1", 0, 0, 2, "V", "", {"M", "I"}, kTable1Case1, {{{"V", "x^3 + t*x"}}},
                        [](const FixtureConstants&) { return with_kernel({}); }});
    t3.cases.push_back({"2", 1, 0, 3, "V", "", {"M", "I", "D(1)"},
                        "V != b2*x^2 + b1*x + b0 + c*(x + a)^(-2) for real a, b0, b1, b2, c", {{{"V", "exp(x)"}}},
                        [](const FixtureConstants&) { return with_kernel({SF::D(Expr(1))}); }});
    t3.cases.push_back({"3", 3, 0, 5, "c*x^(-2)", "", {"M", "I", "D(1)", "D(t)", "D(t^2) - 1/2*t I"},
                        "c real, c != 0", {{{"c", "1"}}}, case5_basis});
    t3.cases.push_back({"4", 3, 2, 7, "0", "", {"M", "I", "D(1)", "D(t)", "D(t^2) - 1/2*t I", "G(1)", "G(t)"}, "",
                        {{}}, free_basis});
    tables.push_back(std::move(t3));
    return tables;
}

std::string describe(const ClassificationReport& r) {
    std::ostringstream out;
    out << "got Case " << r.case_id << ", k=(" << r.k1 << "," << r.k2 << "), dim " << r.dim_ess << ", "
        << status_name(r.status);
    return out.str();
}

SelfTestResult self_test_case(int table, const FixtureCase& fc) {
    SelfTestResult res{table, fc.case_id, true, ""};
    for (const auto& inst : fc.instances) {
        try {
            ClassificationReport r = classify_fixture(table, fc, inst);
            bool ok = r.case_id == fc.case_id && r.k1 == fc.k1 && r.k2 == fc.k2 && r.dim_ess == fc.dim &&
                      r.status != ReportStatus::NumericOnly;
            if (!ok) {
                res.reproduced = false;
                res.detail = describe(r);
            }
        } catch (const std::exception& e) {
            res.reproduced = false;
            res.detail = e.what();
        }
    }
    return res;
}

}  // namespace

const std::vector<TableFixture>& table_fixtures() {
    static const std::vector<TableFixture> tables = build();
    return tables;
}

const TableFixture& fixture_table(int table) {
    if (table < 1 || table > 3) throw PreconditionError("table must be 1, 2 or 3");
    return table_fixtures()[table - 1];
}

const FixtureCase& fixture_case(int table, const std::string& case_id) {
    const TableFixture& t = fixture_table(table);
    auto it = std::find_if(t.cases.begin(), t.cases.end(), [&](const FixtureCase& c) { return c.case_id == case_id; });
    if (it == t.cases.end()) throw PreconditionError("no case " + case_id + " in table " + std::to_string(table));
    return *it;
}

std::string instantiate(const std::string& tmpl, const FixtureConstants& constants) {
    std::string out = tmpl;
    for (const auto& [name, value] : constants) {
        std::regex word("\\b" + name + "\\b");
        out = std::regex_replace(out, word, "(" + value + ")");
    }
    return out;
}

Expr fixture_potential(const FixtureCase& fc, const FixtureConstants& constants) {
    return parse(instantiate(fc.potential_template, constants));
}

Expr fixture_gamma(const FixtureCase& fc, const FixtureConstants& constants) {
    if (fc.gamma_template.empty()) throw PreconditionError("fixture has no gamma template");
    return parse(instantiate(fc.gamma_template, constants));
}

ClassificationReport classify_fixture(int table, const FixtureCase& fc, const FixtureConstants& constants,
                                      TInterval iv) {
    switch (table) {
        case 1:
            return classify_full(fixture_potential(fc, constants), iv);
        case 2:
            return classify_subclass(fixture_gamma(fc, constants), iv);
        case 3:
            return classify_real(fixture_potential(fc, constants), iv);
        default:
            throw PreconditionError("table must be 1, 2 or 3");
    }
}

std::vector<SelfTestResult> fixture_self_test(int jobs) {
    std::vector<std::pair<int, const FixtureCase*>> work;
    for (const auto& t : table_fixtures()) {
        for (const auto& c : t.cases) work.emplace_back(t.table, &c);
    }
    std::vector<SelfTestResult> results(work.size());
    const std::size_t stride = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t start = 0; start < work.size(); start += stride) {
        std::vector<std::future<SelfTestResult>> batch;
        for (std::size_t k = start; k < std::min(work.size(), start + stride); ++k) {
            auto [table, fc] = work[k];
            batch.push_back(std::async(stride > 1 ? std::launch::async : std::launch::deferred,
                                       [table, fc] { return self_test_case(table, *fc); }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
    }
    return results;
}

PdeSetup fixture_pde_setup(const std::string& case_id) {
    fixture_case(1, case_id);
    PdeSetup s{Grid{}, parse("exp(0 - x^2)"), {EquivTransform::identity(), Expr()}};
    if (case_id == "3") {
        s.grid = Grid{-9.0, 3.0, 256, 0.0, 0.5, 1024};
        s.initial = parse("exp(0 - (x + 3)^2)");
        s.map.base = EquivTransform::time(parse("t + 1/4"));
    } else if (case_id == "4c") {
        s.map.base.X0 = parse("1/2");
        s.map.base.Upsilon = parse("t/2");
    } else if (case_id == "5") {
        s.grid = Grid{1.0, 13.0, 256, 0.0, 0.5, 1024};
        s.initial = parse("exp(0 - (x - 7)^2)");
        s.map.base = EquivTransform::time(parse("2*t"));
    } else if (case_id == "6") {
        s.map.base.X0 = Expr::t();
        s.map.base.Sigma = parse("t/4");
    }
    return s;
}

}  // namespace schrodclass
