#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <iosfwd>
#include <string>

#include "novarch/errors.hpp"

namespace novarch {

// Exact rational scalar used for exponents and coefficients throughout.
using Rat = boost::multiprecision::mpq_rational;

inline std::string rat_str(const Rat& q) { return q.str(); }

// Parse "p/q" or "p" (also accepts a plain decimal like "0.4" for convenience;
// decimals are converted exactly).
Rat parse_rat(const std::string& s);

inline double rat_double(const Rat& q) { return q.template convert_to<double>(); }

// Q ∪ {+∞}: valuations and precisions live here.  +∞ encodes "exact" precision
// and the valuation of zero.  Addition saturates at +∞.
class ExtRat {
public:
    ExtRat() : inf_(false), v_(0) {}
    ExtRat(const Rat& v) : inf_(false), v_(v) {}
    ExtRat(long v) : inf_(false), v_(v) {}
    static ExtRat infinity() { ExtRat e; e.inf_ = true; return e; }

    bool is_inf() const { return inf_; }
    bool is_finite() const { return !inf_; }
    const Rat& value() const {
        if (inf_) throw Error("ExtRat: +inf has no finite value");
        return v_;
    }
    // Finite value or the supplied fallback when +∞.
    Rat value_or(const Rat& fallback) const { return inf_ ? fallback : v_; }

    friend bool operator==(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
        return a.v_ == b.v_;
    }
    friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
    friend bool operator<(const ExtRat& a, const ExtRat& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.v_ < b.v_;
    }
    friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
    friend bool operator<=(const ExtRat& a, const ExtRat& b) { return !(b < a); }
    friend bool operator>=(const ExtRat& a, const ExtRat& b) { return !(a < b); }

    friend ExtRat operator+(const ExtRat& a, const ExtRat& b) {
        if (a.inf_ || b.inf_) return infinity();
        return ExtRat(a.v_ + b.v_);
    }
    friend ExtRat operator-(const ExtRat& a, const Rat& b) {
        if (a.inf_) return infinity();
        return ExtRat(a.v_ - b);
    }

    std::string str() const { return inf_ ? "inf" : rat_str(v_); }

private:
    bool inf_;
    Rat v_;
};

inline ExtRat ext_min(const ExtRat& a, const ExtRat& b) { return a < b ? a : b; }
inline ExtRat ext_max(const ExtRat& a, const ExtRat& b) { return a < b ? b : a; }

} // namespace novarch
