#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "schrodclass/errors.hpp"
#include "schrodclass/report_json.hpp"

namespace schrodclass {

namespace {

using json = nlohmann::json;

json expr_or_null(const std::optional<Expr>& e) {
    return e ? json(to_string(*e)) : json(nullptr);
}

void dump(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner + json(it.key()).dump() + ": ";
                dump(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ",\n";
                out += inner;
                dump(j[k], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
    }
}

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw PreconditionError(std::string("report is missing '") + key + "'");
    return j.at(key);
}

template <class T>
T typed(const json& j, const char* key) {
    const json& v = field(j, key);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw PreconditionError(std::string("report field '") + key + "' has the wrong type");
    }
}

std::optional<Expr> optional_expr(const json& j, const char* key) {
    const json& v = field(j, key);
    if (v.is_null()) return std::nullopt;
    return normalize(parse(typed<std::string>(j, key)));
}

ReportStatus parse_status(const std::string& s) {
    for (ReportStatus st : {ReportStatus::Exact, ReportStatus::Probabilistic, ReportStatus::NumericOnly}) {
        if (s == status_name(st)) return st;
    }
    throw PreconditionError("unknown status '" + s + "'");
}

}  // namespace

std::string report_to_json(const ClassificationReport& r) {
    json j = json::object();
    j["table"] = r.table;
    j["case"] = r.case_id;
    j["k1"] = r.k1;
    j["k2"] = r.k2;
    j["dim_ess"] = r.dim_ess;
    json basis = json::array();
    for (const auto& q : r.basis) {
        basis.push_back({{"tau", to_string(q.tau)},
                         {"chi", to_string(q.chi)},
                         {"sigma", to_string(q.sigma)},
                         {"rho", to_string(q.rho)}});
    }
    j["basis"] = basis;
    j["canonical_potential"] = expr_or_null(r.canonical_potential);
    if (r.mapping) {
        j["mapping"] = {{"T", to_string(r.mapping->T)},
                        {"X0", to_string(r.mapping->X0)},
                        {"Sigma", to_string(r.mapping->Sigma)},
                        {"Upsilon", to_string(r.mapping->Upsilon)},
                        {"eps", r.mapping->eps}};
    } else {
        j["mapping"] = nullptr;
    }
    j["maximal"] = r.maximal;
    j["violated_condition"] = r.violated_condition ? json(*r.violated_condition) : json(nullptr);
    j["status"] = status_name(r.status);
    std::string out;
    dump(j, out, 0);
    out += "\n";
    return out;
}

ClassificationReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PreconditionError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw PreconditionError("report must be a JSON object");
    ClassificationReport r;
    r.table = typed<int>(j, "table");
    r.case_id = typed<std::string>(j, "case");
    r.k1 = typed<int>(j, "k1");
    r.k2 = typed<int>(j, "k2");
    r.dim_ess = typed<int>(j, "dim_ess");
    const json& basis = field(j, "basis");
    if (!basis.is_array()) throw PreconditionError("report field 'basis' must be an array");
    for (const auto& b : basis) {
        StructuredField q;
        q.tau = normalize(parse(typed<std::string>(b, "tau")));
        q.chi = normalize(parse(typed<std::string>(b, "chi")));
        q.sigma = normalize(parse(typed<std::string>(b, "sigma")));
        q.rho = normalize(parse(typed<std::string>(b, "rho")));
        r.basis.push_back(q);
    }
    r.canonical_potential = optional_expr(j, "canonical_potential");
    const json& m = field(j, "mapping");
    if (!m.is_null()) {
        EquivTransform g;
        g.T = normalize(parse(typed<std::string>(m, "T")));
        g.X0 = normalize(parse(typed<std::string>(m, "X0")));
        g.Sigma = normalize(parse(typed<std::string>(m, "Sigma")));
        g.Upsilon = normalize(parse(typed<std::string>(m, "Upsilon")));
        g.eps = typed<int>(m, "eps");
        if (g.eps != 1 && g.eps != -1) throw PreconditionError("mapping eps must be +1 or -1");
        r.mapping = g;
    }
    r.maximal = typed<bool>(j, "maximal");
    const json& vc = field(j, "violated_condition");
    if (!vc.is_null()) r.violated_condition = typed<std::string>(j, "violated_condition");
    r.status = parse_status(typed<std::string>(j, "status"));
    return r;
}

}  // namespace schrodclass
