#include <cctype>
#include <cstring>

#include "expr_internal.hpp"
#include "schrodclass/errors.hpp"

namespace schrodclass {

namespace {

std::string print_const(const CRational& c, bool standalone) {
    if (c.is_real()) return c.re.to_string();
    if (c.re.is_zero()) {
        if (c.im.is_one()) return "i";
        if (c.im == Rational(-1)) return "-i";
        return c.im.to_string() + "*i";
    }
    std::string inner = c.re.to_string() + (c.im.sign() > 0 ? "+" : "-");
    Rational mag = c.im.abs();
    inner += mag.is_one() ? "i" : mag.to_string() + "*i";
    (void)standalone;
    return "(" + inner + ")";
}

std::string print_exponent(const Rational& q) {
    if (q.is_integer() && q.sign() > 0) return "^" + q.to_string();
    return "^(" + q.to_string() + ")";
}

std::string print_expr(const Expr& e);

bool is_simple_base(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Var:
        case Expr::Kind::Func:
        case Expr::Kind::Conj: return true;
        case Expr::Kind::Const:
            return e.value().is_real() && e.value().re.is_integer() && e.value().re.sign() >= 0;
        default: return false;
    }
}

std::string print_base(const Expr& e) {
    if (is_simple_base(e)) return print_expr(e);
    return "(" + print_expr(e) + ")";
}

std::string print_factor(const Expr& e) {
    if (e.kind() == Expr::Kind::Pow) return print_base(e.args()[0]) + print_exponent(e.exponent());
    if (e.kind() == Expr::Kind::Add) return "(" + print_expr(e) + ")";
    if (e.kind() == Expr::Kind::Const) {
        const CRational& c = e.value();
        if (c.is_real() && c.re.sign() >= 0 && c.re.is_integer()) return c.re.to_string();
        return "(" + print_const(c, false) + ")";
    }
    return print_expr(e);
}

// Returns the printed term and whether it carries a leading minus sign that
// the caller may turn into a binary minus.
std::string print_term(const Expr& e, bool& negative) {
    negative = false;
    if (e.kind() == Expr::Kind::Const) {
        const CRational& c = e.value();
        if (c.is_real() && c.re.sign() < 0) {
            negative = true;
            return (-c.re).to_string();
        }
        if (c.re.is_zero() && c.im.sign() < 0) {
            negative = true;
            return print_const(-c, true);
        }
        return print_const(c, true);
    }
    if (e.kind() != Expr::Kind::Mul) return print_factor(e);
    std::vector<std::string> parts;
    std::size_t start = 0;
    const auto& args = e.args();
    if (!args.empty() && args[0].kind() == Expr::Kind::Const) {
        CRational c = args[0].value();
        if (c.is_real() && c.re.sign() < 0) {
            negative = true;
            c = -c;
        } else if (c.re.is_zero() && c.im.sign() < 0) {
            negative = true;
            c = -c;
        }
        if (!c.is_one()) parts.push_back(print_const(c, false));
        start = 1;
    }
    for (std::size_t k = start; k < args.size(); ++k) parts.push_back(print_factor(args[k]));
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (k > 0) out += "*";
        out += parts[k];
    }
    if (out.empty()) out = "1";
    return out;
}

std::string print_expr(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Var: return e.var() == Var::t ? "t" : "x";
        case Expr::Kind::Func: return std::string(func_name(e.func())) + "(" + print_expr(e.args()[0]) + ")";
        case Expr::Kind::Conj: return "conj(" + print_expr(e.args()[0]) + ")";
        case Expr::Kind::Pow: return print_factor(e);
        case Expr::Kind::Const:
        case Expr::Kind::Mul: {
            bool neg = false;
            std::string s = print_term(e, neg);
            if (!neg) return s;
            // Unary minus binds tighter than ^, so a bare power needs an explicit -1 factor.
            bool first_is_power = e.kind() == Expr::Kind::Mul &&
                                  ((e.args()[0].kind() == Expr::Kind::Const && e.args()[0].value() == CRational(-1) &&
                                    e.args().size() > 1 && e.args()[1].kind() == Expr::Kind::Pow));
            if (first_is_power) return "-1*" + s;
            return "-" + s;
        }
        case Expr::Kind::Add: {
            std::string out;
            bool first = true;
            for (const auto& a : e.args()) {
                bool neg = false;
                std::string s = print_term(a, neg);
                if (first) {
                    out = neg ? print_expr(a) : s;
                    first = false;
                } else {
                    out += neg ? " - " : " + ";
                    out += s;
                }
            }
            return out;
        }
    }
    return "";
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr parse_all() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw GrammarError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        std::vector<Expr> terms{term()};
        while (true) {
            if (accept('+')) {
                terms.push_back(term());
            } else if (accept('-')) {
                terms.push_back(Expr::raw_product({Expr(-1), term()}));
            } else {
                break;
            }
        }
        return terms.size() == 1 ? terms[0] : Expr::raw_sum(std::move(terms));
    }

    Expr term() {
        std::vector<Expr> factors{factor()};
        while (true) {
            if (accept('*')) {
                factors.push_back(factor());
            } else if (accept('/')) {
                factors.push_back(Expr::raw_power(factor(), Rational(-1)));
            } else {
                break;
            }
        }
        return factors.size() == 1 ? factors[0] : Expr::raw_product(std::move(factors));
    }

    Expr factor() {
        Expr base = unary();
        if (accept('^')) return Expr::raw_power(base, exponent());
        return base;
    }

    Expr unary() {
        if (accept('-')) {
            Expr inner = unary();
            if (inner.kind() == Expr::Kind::Const) return Expr(-inner.value());
            return Expr::raw_product({Expr(-1), inner});
        }
        return base();
    }

    Rational number() {
        skip();
        std::size_t start = pos_;
        std::int64_t num = 0;
        std::int64_t den = 1;
        bool digits = false;
        auto push = [&](std::int64_t& v, char c) {
            if (v > (INT64_MAX - 9) / 10) fail("numeric literal too large");
            v = v * 10 + (c - '0');
        };
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            push(num, s_[pos_++]);
            digits = true;
        }
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                push(num, s_[pos_++]);
                if (den > INT64_MAX / 10) fail("numeric literal too long");
                den *= 10;
                digits = true;
            }
        }
        if (!digits) {
            pos_ = start;
            fail("expected number");
        }
        return Rational(num, den);
    }

    Rational exponent() {
        skip();
        if (accept('(')) {
            bool neg = accept('-');
            Rational r = number();
            if (accept('/')) {
                Rational d = number();
                if (d.is_zero()) fail("zero denominator in exponent");
                r /= d;
            }
            expect(')');
            return neg ? -r : r;
        }
        return number();
    }

    Expr base() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr(number());
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            if (id == "i") return Expr::i();
            if (id == "t") return Expr::t();
            if (id == "x") return Expr::x();
            static const std::pair<const char*, Func> funcs[] = {
                {"exp", Func::exp}, {"sin", Func::sin}, {"cos", Func::cos}, {"tan", Func::tan},
                {"atan", Func::atan}, {"ln", Func::ln}, {"abs", Func::abs}, {"sgn", Func::sgn}};
            for (const auto& [name, f] : funcs) {
                if (id == name) {
                    expect('(');
                    Expr arg = expr();
                    expect(')');
                    return Expr::raw_function(f, arg);
                }
            }
            if (id == "conj") {
                expect('(');
                Expr arg = expr();
                expect(')');
                return Expr::raw_conj(arg);
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

std::string to_string(const Expr& e) {
    return print_expr(e);
}

Expr parse(std::string_view text) {
    return Parser(text).parse_all();
}

}  // namespace schrodclass
