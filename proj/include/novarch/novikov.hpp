#pragma once

#include <string>
#include <vector>

#include "novarch/rational.hpp"

namespace novarch {

// Global working precision E: operations on exact inputs that must truncate a
// series (inversion) truncate relative to this.  Set once at startup.
Rat default_precision();
void set_default_precision(const Rat& e);

// A Novikov scalar: finite sum Σ cᵢ·T^{eᵢ} with exact rational cᵢ ≠ 0 and
// strictly increasing exact rational exponents eᵢ, tracked modulo T^precision.
// precision = +∞ marks an exact element.  Invariant: all exponents < precision.
class Novikov {
public:
    struct Term {
        Rat exp;
        Rat coeff;
    };

    Novikov() = default;                      // exact zero
    Novikov(long n) { if (n != 0) terms_.push_back({Rat(0), Rat(n)}); }
    explicit Novikov(const Rat& c) { if (c != 0) terms_.push_back({Rat(0), c}); }
    static Novikov monomial(const Rat& exp, const Rat& coeff = Rat(1));
    static Novikov zero_mod(const ExtRat& prec);  // 0 known only mod T^prec

    const std::vector<Term>& terms() const { return terms_; }
    const ExtRat& precision() const { return prec_; }
    bool is_exact() const { return prec_.is_inf(); }

    // True when no visible terms remain (true zero only if precision = +∞).
    bool is_zero() const { return terms_.empty(); }

    // val = least exponent; +∞ when no terms.
    ExtRat val() const { return terms_.empty() ? ExtRat::infinity() : ExtRat(terms_.front().exp); }
    // Sound lower bound on the valuation of the represented element:
    // min(val, precision).  Used for precision propagation in products.
    ExtRat val_lb() const { return ext_min(val(), prec_); }
    double norm() const;                      // e^{-val}; 0 for zero

    const Rat& leading_exp() const { return terms_.front().exp; }
    const Rat& leading_coeff() const { return terms_.front().coeff; }
    Rat coeff_at(const Rat& exp) const;

    // Drop terms with exponent ≥ prec and lower the precision to min(cur, prec).
    Novikov truncated(const ExtRat& prec) const;
    // Keep only terms with exponent ≥ cut (precision unchanged).
    Novikov tail_from(const Rat& cut) const;
    // Multiply every exponent shift: T^s · x (exact).
    Novikov shifted(const Rat& s) const;
    // Scale coefficients by an exact rational.
    Novikov scaled(const Rat& c) const;

    Novikov operator-() const;
    friend Novikov operator+(const Novikov& a, const Novikov& b);
    friend Novikov operator-(const Novikov& a, const Novikov& b);
    friend Novikov operator*(const Novikov& a, const Novikov& b);
    Novikov& operator+=(const Novikov& b) { *this = *this + b; return *this; }
    Novikov& operator-=(const Novikov& b) { *this = *this - b; return *this; }
    Novikov& operator*=(const Novikov& b) { *this = *this * b; return *this; }

    // Structural equality of visible terms (precision not compared).  Algorithms
    // decide "equal" via (a-b).is_zero(), which respects precision.
    friend bool operator==(const Novikov& a, const Novikov& b);
    friend bool operator!=(const Novikov& a, const Novikov& b) { return !(a == b); }

    // Multiplicative inverse.  Exact monomials invert exactly; otherwise the
    // geometric series is truncated so the result is valid mod T^{E - 2·val}
    // with E = precision (or the global default for exact inputs).
    Novikov inverse() const;
    friend Novikov operator/(const Novikov& a, const Novikov& b) { return a * b.inverse(); }

    std::string str() const;                  // "3*T^(1/2) + -1*T^(2) + O(T^(10))"

private:
    std::vector<Term> terms_;
    ExtRat prec_ = ExtRat::infinity();
    void normalize();
    friend Novikov make_novikov(std::vector<Term> terms, ExtRat prec);
};

Novikov make_novikov(std::vector<Novikov::Term> terms, ExtRat prec);

// Spec-facing free functions.
inline Novikov nov_add(const Novikov& a, const Novikov& b) { return a + b; }
inline Novikov nov_mul(const Novikov& a, const Novikov& b) { return a * b; }
inline std::pair<ExtRat, double> nov_val_norm(const Novikov& a) { return {a.val(), a.norm()}; }
inline Novikov nov_invert(const Novikov& a) { return a.inverse(); }

Novikov parse_novikov(const std::string& s);

// Λ_{[lower,upper)}: a truncation window with arithmetic modulo T^upper.
struct NovikovInterval {
    Rat lower;
    Rat upper;
    Novikov representative;   // all exponents in [lower, upper)

    NovikovInterval(const Rat& lo, const Rat& up, const Novikov& x);
    NovikovInterval plus(const NovikovInterval& o) const;
    NovikovInterval times(const NovikovInterval& o) const;
};

} // namespace novarch
