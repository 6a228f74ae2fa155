#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "schrodclass/classify.hpp"
#include "schrodclass/expr.hpp"
#include "schrodclass/field.hpp"
#include "schrodclass/numverify.hpp"

namespace schrodclass {

/// Values of the named constants of a template, as grammar strings.
using FixtureConstants = std::map<std::string, std::string>;

struct FixtureCase {
    std::string case_id;
    int k1 = 0;
    int k2 = 0;
    int dim = 0;
    /// Table entry for V, and for Table 2 the template of gamma.
    std::string potential_template;
    std::string gamma_template;
    std::vector<std::string> basis_templates;
    std::string condition;
    /// One or more instances of the constants; the first is the default.
    std::vector<FixtureConstants> instances;
    std::function<std::vector<StructuredField>(const FixtureConstants&)> basis;
};

struct TableFixture {
    int table = 1;
    std::string title;
    std::vector<FixtureCase> cases;
};

/// Tables 1, 2 and 3 in order.
const std::vector<TableFixture>& table_fixtures();

const TableFixture& fixture_table(int table);
/// Throws PreconditionError when the case does not exist.
const FixtureCase& fixture_case(int table, const std::string& case_id);

/// Replaces whole-word constant names by their parenthesized values.
std::string instantiate(const std::string& tmpl, const FixtureConstants& constants);

/// Instantiated potential V.
Expr fixture_potential(const FixtureCase& fc, const FixtureConstants& constants);
/// Instantiated gamma (Table 2 only).
Expr fixture_gamma(const FixtureCase& fc, const FixtureConstants& constants);

/// Runs the classifier of the fixture's table on the instance.
ClassificationReport classify_fixture(int table, const FixtureCase& fc, const FixtureConstants& constants,
                                      TInterval iv = {0.5, 1.5});

struct SelfTestResult {
    int table = 1;
    std::string case_id;
    bool reproduced = false;
    std::string detail;
};

/// Reclassifies every instance of every case; jobs > 1 runs cases concurrently.
std::vector<SelfTestResult> fixture_self_test(int jobs = 1);

/// Grid, initial data and a symmetry transformation for numeric checks of a
/// Table 1 case.
struct PdeSetup {
    Grid grid;
    Expr initial;
    AdmissibleTransform map;
};

PdeSetup fixture_pde_setup(const std::string& case_id);

}  // namespace schrodclass
