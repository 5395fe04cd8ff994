#include "novarch/novikov.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace novarch {

Rat parse_rat(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.empty()) throw ParseError("empty rational");
    auto dot = t.find('.');
    try {
        if (dot == std::string::npos) return Rat(t);
        // exact decimal: "12.345" -> 12345/1000 (sign handled by numerator)
        std::string digits = t.substr(0, dot) + t.substr(dot + 1);
        if (digits.empty() || digits == "-" || digits == "+") throw ParseError("bad rational: " + s);
        size_t frac_len = t.size() - dot - 1;
        Rat num(digits);
        Rat den = 1;
        for (size_t i = 0; i < frac_len; ++i) den *= 10;
        return num / den;
    } catch (const std::exception& e) {
        throw ParseError("bad rational '" + s + "'");
    }
}

namespace {
Rat g_default_precision = Rat(10);
}

Rat default_precision() { return g_default_precision; }
void set_default_precision(const Rat& e) { g_default_precision = e; }

void Novikov::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.exp < b.exp; });
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (auto& t : terms_) {
        if (prec_.is_finite() && ExtRat(t.exp) >= prec_) continue;
        if (!out.empty() && out.back().exp == t.exp)
            out.back().coeff += t.coeff;
        else
            out.push_back(t);
        if (!out.empty() && out.back().coeff == 0) out.pop_back();
    }
    terms_ = std::move(out);
}

Novikov make_novikov(std::vector<Novikov::Term> terms, ExtRat prec) {
    Novikov x;
    x.terms_ = std::move(terms);
    x.prec_ = prec;
    x.normalize();
    return x;
}

Novikov Novikov::monomial(const Rat& exp, const Rat& coeff) {
    Novikov x;
    if (coeff != 0) x.terms_.push_back({exp, coeff});
    return x;
}

Novikov Novikov::zero_mod(const ExtRat& prec) {
    Novikov x;
    x.prec_ = prec;
    return x;
}

double Novikov::norm() const {
    if (terms_.empty()) return 0.0;
    return std::exp(-rat_double(terms_.front().exp));
}

Rat Novikov::coeff_at(const Rat& exp) const {
    for (auto& t : terms_)
        if (t.exp == exp) return t.coeff;
    return Rat(0);
}

Novikov Novikov::truncated(const ExtRat& prec) const {
    std::vector<Term> out;
    for (auto& t : terms_)
        if (!(prec.is_finite() && ExtRat(t.exp) >= prec)) out.push_back(t);
    return make_novikov(std::move(out), ext_min(prec_, prec));
}

Novikov Novikov::tail_from(const Rat& cut) const {
    std::vector<Term> out;
    for (auto& t : terms_)
        if (t.exp >= cut) out.push_back(t);
    return make_novikov(std::move(out), prec_);
}

Novikov Novikov::shifted(const Rat& s) const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.exp += s;
    ExtRat p = prec_.is_finite() ? ExtRat(prec_.value() + s) : ExtRat::infinity();
    return make_novikov(std::move(out), p);
}

Novikov Novikov::scaled(const Rat& c) const {
    if (c == 0) return zero_mod(prec_);
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff *= c;
    return make_novikov(std::move(out), prec_);
}

Novikov Novikov::operator-() const { return scaled(Rat(-1)); }

Novikov operator+(const Novikov& a, const Novikov& b) {
    std::vector<Novikov::Term> out = a.terms_;
    out.insert(out.end(), b.terms_.begin(), b.terms_.end());
    return make_novikov(std::move(out), ext_min(a.prec_, b.prec_));
}

Novikov operator-(const Novikov& a, const Novikov& b) { return a + (-b); }

Novikov operator*(const Novikov& a, const Novikov& b) {
    // result precision: min(val_lb(a)+prec(b), val_lb(b)+prec(a))
    ExtRat p = ext_min(a.val_lb() + b.prec_, b.val_lb() + a.prec_);
    std::vector<Novikov::Term> out;
    out.reserve(a.terms_.size() * b.terms_.size());
    for (auto& s : a.terms_)
        for (auto& t : b.terms_)
            out.push_back({s.exp + t.exp, s.coeff * t.coeff});
    return make_novikov(std::move(out), p);
}

bool operator==(const Novikov& a, const Novikov& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].exp != b.terms_[i].exp || a.terms_[i].coeff != b.terms_[i].coeff)
            return false;
    return true;
}

Novikov Novikov::inverse() const {
    if (terms_.empty()) throw ZeroInversion();
    const Rat mu = terms_.front().exp;
    const Rat c = terms_.front().coeff;
    if (terms_.size() == 1 && prec_.is_inf())
        return monomial(-mu, Rat(1) / c);          // exact monomial inversion
    // u := a/(c T^mu) - 1 has val > 0; invert by geometric series to relative
    // precision R, so the result is valid mod T^{R - mu} = T^{E - 2 mu}.
    const Rat E = prec_.is_finite() ? prec_.value() : default_precision();
    const Rat R = E - mu;
    Novikov u = shifted(-mu).scaled(Rat(1) / c) - Novikov(1);
    u = u.truncated(ExtRat(R));
    Novikov series(1), pow(1);
    while (!pow.is_zero()) {
        pow = (pow * (-u)).truncated(ExtRat(R));
        series += pow;
    }
    Novikov res = series.scaled(Rat(1) / c).shifted(-mu);
    return res.truncated(ExtRat(R - mu));
}

std::string Novikov::str() const {
    std::ostringstream os;
    bool first = true;
    for (auto& t : terms_) {
        if (!first) os << " + ";
        first = false;
        if (t.exp == 0)
            os << rat_str(t.coeff);
        else
            os << rat_str(t.coeff) << "*T^(" << rat_str(t.exp) << ")";
    }
    if (prec_.is_finite()) {
        if (!first) os << " + ";
        os << "O(T^(" << rat_str(prec_.value()) << "))";
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

Novikov parse_novikov(const std::string& s) {
    // Accepts sums of: "c", "T^(e)", "c*T^(e)", "O(T^(e))", with '+'/'-'
    // separators at top level; exponent parens optional for plain numbers.
    std::vector<Novikov::Term> terms;
    ExtRat prec = ExtRat::infinity();
    size_t i = 0;
    const size_t n = s.size();
    auto skip_ws = [&] { while (i < n && std::isspace(static_cast<unsigned char>(s[i]))) ++i; };
    skip_ws();
    if (i == n) throw ParseError("empty Novikov literal");
    bool first_token = true;
    while (true) {
        skip_ws();
        if (i >= n) break;
        int sign = 1;
        if (!first_token) {
            if (s[i] == '+') { ++i; }
            else if (s[i] == '-') { sign = -1; ++i; }
            else throw ParseError("expected '+' or '-' in Novikov literal near index " + std::to_string(i));
            skip_ws();
        }
        first_token = false;
        // optional sign on the coefficient itself ("+ -1*T^(2)")
        while (i < n && (s[i] == '-' || s[i] == '+')) {
            if (s[i] == '-') sign = -sign;
            ++i;
            skip_ws();
        }
        // token end: next top-level '+'/'-' (a '-' inside "^(…)" or right after
        // '^','(','*','/' is part of a number)
        size_t start = i;
        int depth = 0;
        while (i < n) {
            char c = s[i];
            if (c == '(') ++depth;
            else if (c == ')') --depth;
            else if ((c == '+' || c == '-') && depth == 0) {
                char prev = s[i - 1];
                if (prev != '^' && prev != '*' && prev != '/' && prev != 'e' && prev != 'E') break;
            }
            ++i;
        }
        std::string tok = s.substr(start, i - start);
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.pop_back();
        if (tok.empty()) throw ParseError("empty term in Novikov literal");
        auto parse_exp_suffix = [&](const std::string& u) -> Rat {
            // u is "T^(e)" or "T^e"
            if (u.size() < 3 || u[0] != 'T' || u[1] != '^') throw ParseError("bad monomial '" + u + "'");
            std::string e = u.substr(2);
            if (!e.empty() && e.front() == '(') {
                if (e.back() != ')') throw ParseError("unbalanced exponent in '" + u + "'");
                e = e.substr(1, e.size() - 2);
            }
            return parse_rat(e);
        };
        if (tok.rfind("O(", 0) == 0) {
            if (tok.back() != ')') throw ParseError("unbalanced O(...) in Novikov literal");
            std::string inner = tok.substr(2, tok.size() - 3);
            Rat e = parse_exp_suffix(inner);
            prec = ext_min(prec, ExtRat(e));
            continue;
        }
        Rat coeff(1), exp(0);
        auto star = tok.find('*');
        if (star != std::string::npos) {
            coeff = parse_rat(tok.substr(0, star));
            exp = parse_exp_suffix(tok.substr(star + 1));
        } else if (tok[0] == 'T') {
            exp = parse_exp_suffix(tok);
        } else {
            coeff = parse_rat(tok);
        }
        terms.push_back({exp, coeff * sign});
    }
    return make_novikov(std::move(terms), prec);
}

NovikovInterval::NovikovInterval(const Rat& lo, const Rat& up, const Novikov& x)
    : lower(lo), upper(up) {
    if (!(lo < up)) throw InvariantError("NovikovInterval needs lower < upper");
    representative = x.truncated(ExtRat(up));
    if (!representative.is_zero() && representative.leading_exp() < lo)
        throw InvariantError("NovikovInterval representative below lower bound");
}

NovikovInterval NovikovInterval::plus(const NovikovInterval& o) const {
    Rat up = std::min(upper, o.upper);
    Rat lo = std::min(lower, o.lower);
    return NovikovInterval(lo, up, representative + o.representative);
}

NovikovInterval NovikovInterval::times(const NovikovInterval& o) const {
    Rat up = std::min(upper + o.lower, o.upper + lower);
    Rat lo = lower + o.lower;
    return NovikovInterval(lo, up, representative * o.representative);
}

} // namespace novarch
