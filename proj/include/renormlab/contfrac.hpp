#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace renormlab {

// Convergent denominators of golden-type numbers pass 1e18 near level 87,
// so the ladder arithmetic runs in 128 bits and caps itself on overflow.
using int128 = __int128;

inline std::string to_string_i128(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

// One best rational approximation p/q = [r_0,...,r_{m-1}].
struct convergent {
    int128 p = 0;
    int128 q = 1;
    int index = 0;

    double as_double() const { return static_cast<double>(p) / static_cast<double>(q); }
};

struct convergent_ladder {
    std::vector<convergent> levels;  // indices 1..k
    bool capped = false;             // stopped early to avoid 128-bit overflow
};

// Continued fraction [r_0, r_1, ...] with value 1/(r_0 + 1/(r_1 + ...)) in [0,1].
// `exhausted` means the expansion is complete, i.e. the value is the exact
// rational given by the stored terms. A non-exhausted fraction is a known
// prefix of a longer (possibly infinite) expansion.
class continued_fraction {
  public:
    continued_fraction() = default;

    static continued_fraction from_terms(std::vector<std::int64_t> terms) {
        return continued_fraction(std::move(terms), /*exhausted=*/true);
    }

    static continued_fraction truncated(std::vector<std::int64_t> terms) {
        return continued_fraction(std::move(terms), /*exhausted=*/false);
    }

    const std::vector<std::int64_t>& terms() const { return terms_; }
    bool exhausted() const { return exhausted_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    // Value of the truncation to `depth` terms, evaluated backwards.
    double value(std::size_t depth) const {
        if (depth > terms_.size())
            throw std::out_of_range("continued_fraction::value: depth exceeds available terms");
        double v = 0.0;
        for (std::size_t i = depth; i-- > 0;)
            v = 1.0 / (static_cast<double>(terms_[i]) + v);
        return v;
    }

    double value() const { return value(terms_.size()); }

    // p_k/q_k for k = 1..m via the standard recurrence with seeds
    // (p_{-1},q_{-1}) = (1,0), (p_0,q_0) = (0,1).
    convergent_ladder convergents(std::size_t m) const {
        if (m > terms_.size())
            throw std::out_of_range("continued_fraction::convergents: insufficient terms");
        convergent_ladder out;
        out.levels.reserve(m);
        int128 pp = 1, qp = 0;  // level -1
        int128 pc = 0, qc = 1;  // level 0
        for (std::size_t k = 0; k < m; ++k) {
            int128 r = terms_[k];
            int128 pn, qn, t;
            if (__builtin_mul_overflow(r, pc, &t) || __builtin_add_overflow(t, pp, &pn) ||
                __builtin_mul_overflow(r, qc, &t) || __builtin_add_overflow(t, qp, &qn)) {
                out.capped = true;
                return out;
            }
            pp = pc; qp = qc; pc = pn; qc = qn;
            out.levels.push_back({pc, qc, static_cast<int>(k) + 1});
        }
        return out;
    }

    // Gauss shift: drop the leading term, G([r_0,r_1,...]) = [r_1,r_2,...].
    continued_fraction gauss_shift() const {
        if (terms_.empty())
            throw std::domain_error("gauss_shift: empty expansion");
        std::vector<std::int64_t> tail(terms_.begin() + 1, terms_.end());
        return continued_fraction(std::move(tail), exhausted_);
    }

    bool operator==(const continued_fraction& o) const {
        return exhausted_ == o.exhausted_ && terms_ == o.terms_;
    }

  private:
    continued_fraction(std::vector<std::int64_t> terms, bool exhausted)
        : terms_(std::move(terms)), exhausted_(exhausted) {
        for (std::int64_t t : terms_)
            if (t < 1)
                throw std::invalid_argument("continued_fraction: every term must be >= 1");
    }

    std::vector<std::int64_t> terms_;
    bool exhausted_ = true;
};

// Expansion of x in (0,1) by iterating x -> {1/x}. Extraction amplifies
// relative error by q_m^2, so once the residual falls below `floor_eps`
// the tail is treated as terminated rather than expanded into noise.
inline continued_fraction cf_of_real(double x, std::size_t max_terms,
                                     double floor_eps = 1e-12) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error("cf_of_real: x must lie in (0,1)");
    std::vector<std::int64_t> terms;
    terms.reserve(max_terms);
    double y = x;
    for (std::size_t i = 0; i < max_terms; ++i) {
        double inv = 1.0 / y;
        double r = std::floor(inv);
        double frac = inv - r;
        if (frac > 1.0 - floor_eps) {  // landed a rounding error below an integer
            r += 1.0;
            frac = 0.0;
        }
        if (r < 1.0) r = 1.0;
        terms.push_back(static_cast<std::int64_t>(r));
        if (frac < floor_eps)
            return continued_fraction::from_terms(std::move(terms));
        y = frac;
    }
    return continued_fraction::truncated(std::move(terms));
}

// Common targets.
inline continued_fraction golden_cf(std::size_t depth) {
    return continued_fraction::truncated(std::vector<std::int64_t>(depth, 1));
}

inline continued_fraction silver_cf(std::size_t depth) {
    return continued_fraction::truncated(std::vector<std::int64_t>(depth, 2));
}

inline constexpr double golden_mean = 0.6180339887498948482;  // (sqrt(5)-1)/2
inline constexpr double silver_mean = 0.4142135623730950488;  // sqrt(2)-1

}  // namespace renormlab
