#pragma once

#include <string>

#include "schrodclass/classify.hpp"

namespace schrodclass {

/// Canonical JSON: keys sorted, two-space indent, reals with 17 significant
/// digits, expressions in grammar form, absent values as null.
std::string report_to_json(const ClassificationReport& report);

/// Throws PreconditionError on schema violations and GrammarError on
/// malformed expressions.
ClassificationReport report_from_json(const std::string& text);

}  // namespace schrodclass
