#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "circlemap.hpp"
#include "contfrac.hpp"

namespace renormlab {

// ---------------------------------------------------------------------------
// Interval maps as expression trees over a base lift.
//
// Every map arising from pair extraction and renormalization is of the form
//   x -> scale * (f^q(x / scale) - p)
// because integer translations commute with the lift and equal rescales
// merge under composition. The tree therefore collapses to one node whose
// combinatorial data (q, p) stays in exact integers; composition, iteration
// and affine conjugation act on it symbolically.
// ---------------------------------------------------------------------------

template <class Real = double>
struct interval_map {
    circle_lift<Real> base;
    std::int64_t iterates = 1;     // q
    std::int64_t translation = 0;  // p
    Real scale = 1;                // lambda, may be negative

    Real operator()(Real x) const {
        Real y = x / scale;
        orbit_cursor<Real> cur{&base};
        cur.wraps = static_cast<std::int64_t>(std::floor(y));
        cur.u = y - std::floor(y);
        cur.advance(iterates);
        return scale * cur.signed_to(translation);
    }

    Real derivative(Real x, Real domain_scale) const {
        Real h = std::cbrt(std::numeric_limits<Real>::epsilon()) *
                 std::max(std::abs(domain_scale), std::abs(x));
        return ((*this)(x + h) - (*this)(x - h)) / (2 * h);
    }
};

template <class Real>
interval_map<Real> compose(const interval_map<Real>& a, const interval_map<Real>& b) {
    if (!a.base.same_base(b.base) || a.scale != b.scale)
        throw std::logic_error("interval_map compose: mismatched base or scale");
    return {a.base, a.iterates + b.iterates, a.translation + b.translation, a.scale};
}

template <class Real>
interval_map<Real> iterate(const interval_map<Real>& a, std::int64_t r) {
    if (r < 0) throw std::invalid_argument("interval_map iterate: r must be >= 0");
    return {a.base, r * a.iterates, r * a.translation, a.scale};
}

// Conjugation by x -> mu x.
template <class Real>
interval_map<Real> rescale(const interval_map<Real>& a, Real mu) {
    return {a.base, a.iterates, a.translation, mu * a.scale};
}

// ---------------------------------------------------------------------------
// Critical commuting pairs.
//
// zeta = (eta on I_eta, xi on I_xi) with I_eta = [0, xi(0)] and
// I_xi = [eta(0), 0] as unordered intervals: xi(0) and eta(0) carry
// opposite signs, and the orientation alternates along both circle-map
// levels and renormalization orbits (rescaling by 1/xi(0) flips it back).
// ---------------------------------------------------------------------------

template <class Real = double>
struct commuting_pair {
    interval_map<Real> eta;
    interval_map<Real> xi;
    int exponent = 3;        // 1 = noncritical oracle pair
    int level = -1;          // circle-map level of extraction, if any
    int renorm_depth = 0;

    Real eta0() const { return eta(Real(0)); }
    Real xi0() const { return xi(Real(0)); }
    bool critical() const { return exponent > 1; }
    // Interval lengths in the pair's own coordinates.
    Real len_eta_domain() const { return std::abs(xi0()); }
    Real len_xi_domain() const { return std::abs(eta0()); }
    // |xi(0)| in base-map coordinates; the certification floor lives here.
    Real base_pivot() const { return std::abs(xi0() / eta.scale); }
};

template <class Real>
struct pair_diagnostics {
    bool domains_ok = false;        // (I): xi(0), eta(0) nonzero, opposite signs
    Real commutation_residual = 0;  // (II), relative to the pivot scale
    bool commutation_ok = false;
    bool xi_eta0_in_I_eta = false;  // (III)
    Real min_abs_derivative = 0;    // (IV), away from 0
    bool derivative_ok = false;
    Real fitted_exponent = 0;       // (V)
    bool exponent_ok = false;

    bool passed() const {
        return domains_ok && commutation_ok && xi_eta0_in_I_eta && derivative_ok &&
               exponent_ok;
    }
};

template <class Real>
pair_diagnostics<Real> validate_pair(const commuting_pair<Real>& zeta, int samples = 16) {
    pair_diagnostics<Real> d;
    Real x0 = zeta.xi0(), e0 = zeta.eta0();
    d.domains_ok = x0 != Real(0) && e0 != Real(0) && ((x0 > 0) != (e0 > 0));
    if (!d.domains_ok) return d;
    Real scale = std::max(std::abs(x0), std::abs(e0));

    // (II) on a sample of the common domain near 0.
    Real worst = 0;
    for (int i = 0; i <= samples; ++i) {
        Real t = (static_cast<Real>(i) / samples - Real(0.5)) / 2;  // in [-1/4, 1/4]
        Real x = t * std::min(std::abs(x0), std::abs(e0));
        worst = std::max(worst, std::abs(zeta.eta(zeta.xi(x)) - zeta.xi(zeta.eta(x))));
    }
    d.commutation_residual = worst / scale;
    d.commutation_ok = d.commutation_residual < Real(1e-10);

    // (III) xi(eta(0)) lands in [0, xi(0)].
    Real y = zeta.xi(e0);
    d.xi_eta0_in_I_eta = (x0 > 0) ? (y >= Real(0) && y <= x0) : (y <= Real(0) && y >= x0);

    // (IV) derivative bounded away from 0 on both domains, excluding a
    // neighborhood of the critical point.
    Real min_deriv = std::numeric_limits<Real>::infinity();
    auto scan = [&](const interval_map<Real>& g, Real endpoint) {
        for (int i = 1; i <= samples; ++i) {
            Real x = endpoint * static_cast<Real>(i) / (samples + 1);
            if (std::abs(x) < Real(1e-2) * std::abs(endpoint)) continue;
            min_deriv = std::min(min_deriv, std::abs(g.derivative(x, endpoint)));
        }
    };
    scan(zeta.eta, x0);
    scan(zeta.xi, e0);
    d.min_abs_derivative = min_deriv;
    d.derivative_ok = min_deriv > Real(0);

    // (V) criticality at 0 with the declared exponent.
    if (!zeta.critical()) {
        d.exponent_ok = true;
    } else {
        Real span = std::min(std::abs(x0), std::abs(e0));
        Real sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (Real o : {Real(1e-1), Real(1e-2), Real(1e-3)}) {
            for (Real s : {Real(1), Real(-1)}) {
                Real x = s * o * span;
                Real dv = std::abs(zeta.eta(x) - zeta.eta(Real(0)));
                if (!(dv > Real(0))) continue;
                Real lx = std::log(o * span), ly = std::log(dv);
                sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
                ++cnt;
            }
        }
        d.fitted_exponent = cnt >= 3
            ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)
            : Real(0);
        d.exponent_ok = std::abs(d.fitted_exponent - zeta.exponent) <= Real(0.35);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Pair extraction from a circle map: eta = tau^{-p_{m+1}} o f^{q_{m+1}} on
// I_m, xi = tau^{-p_m} o f^{q_m} on I_{m+1}.
// ---------------------------------------------------------------------------

template <class Real>
commuting_pair<Real> from_circle_map(const circle_lift<Real>& f, int level,
                                     std::int64_t max_orbit = 4'000'000) {
    if (level < 0) throw std::invalid_argument("from_circle_map: level must be >= 0");
    auto run = closest_returns(f, level + 1, max_orbit);
    if (static_cast<int>(run.depth()) < level + 1 || run.rational_lock) {
        std::ostringstream msg;
        msg << "from_circle_map: level " << level
            << " not certified (deepest certified level: "
            << (static_cast<int>(run.depth()) - 2) << ")";
        throw std::out_of_range(msg.str());
    }
    auto qp_at = [&](int m) -> std::pair<std::int64_t, std::int64_t> {
        if (m == 0) return {1, 0};  // seed level: (q_0, p_0)
        return {run.q[static_cast<std::size_t>(m) - 1],
                run.p[static_cast<std::size_t>(m) - 1]};
    };
    auto [q_eta, p_eta] = qp_at(level + 1);
    auto [q_xi, p_xi] = qp_at(level);
    commuting_pair<Real> zeta;
    zeta.eta = {f, q_eta, p_eta, Real(1)};
    zeta.xi = {f, q_xi, p_xi, Real(1)};
    zeta.exponent = f.exponent();
    zeta.level = level;
    return zeta;
}

// ---------------------------------------------------------------------------
// Height, pre-renormalization, renormalization.
// ---------------------------------------------------------------------------

struct height_result {
    enum class kind { finite, infinite, undetermined };
    kind status = kind::undetermined;
    std::int64_t value = 0;  // r such that 0 lies in [eta^r(xi(0)), eta^{r+1}(xi(0))]

    bool finite() const { return status == kind::finite; }
    bool infinite() const { return status == kind::infinite; }
};

// Smallest r >= 1 carrying xi(0) across 0 under eta. Infinity is certified
// only by an actual fixed point of eta between the stalled orbit and 0
// (sign change of eta(x) - x, located by bisection) or by eta being the
// identity within tolerance; ties at the crossing are refused.
template <class Real>
height_result height(const commuting_pair<Real>& zeta, std::int64_t cap = 1'000'000) {
    height_result res;
    const Real tie = precision_floor<Real>() * std::max(Real(1), std::abs(zeta.eta.scale));
    Real x0 = zeta.xi0();
    if (x0 == Real(0)) return res;

    auto g = [&](Real x) { return zeta.eta(x) - x; };

    // Fixed-point scan of eta - id over I_eta: identically zero within
    // tolerance (identity-degenerate) or a solid sign change between
    // adjacent samples both certify an infinite height.
    auto certify_infinite = [&]() -> bool {
        const int grid = 64;
        Real prev = g(Real(0));
        Real worst = std::abs(prev);
        bool sign_change = false;
        for (int i = 1; i <= grid; ++i) {
            Real cur = g(x0 * static_cast<Real>(i) / grid);
            worst = std::max(worst, std::abs(cur));
            if (std::abs(prev) > tie && std::abs(cur) > tie && (prev > 0) != (cur > 0))
                sign_change = true;
            prev = cur;
        }
        return worst <= tie || sign_change;
    };
    if (certify_infinite()) {
        res.status = height_result::kind::infinite;
        return res;
    }

    Real t = x0;
    const bool start_positive = x0 > 0;
    for (std::int64_t k = 1; k <= cap; ++k) {
        Real next = zeta.eta(t);  // eta^k(xi(0))
        if (std::abs(next) <= tie) {
            res.status = height_result::kind::undetermined;  // tie at the crossing
            return res;
        }
        if ((next > 0) != start_positive) {
            // 0 lies in [eta^{k-1}(xi(0)), eta^k(xi(0))].
            if (k - 1 < 1) {
                res.status = height_result::kind::undetermined;  // malformed pair
                return res;
            }
            res.status = height_result::kind::finite;
            res.value = k - 1;
            return res;
        }
        // Progress stalled before 0; the scan above rules out a fixed
        // point, so the remaining cause is the precision floor.
        if (std::abs(next - t) <= tie) {
            res.status = height_result::kind::undetermined;
            return res;
        }
        t = next;
    }
    res.status = height_result::kind::undetermined;  // cap hit without certification
    return res;
}

// (eta^r o xi on I_xi, eta on [0, eta^r(xi(0))]), exact integer bookkeeping.
template <class Real>
commuting_pair<Real> prerenormalize(const commuting_pair<Real>& zeta) {
    auto h = height(zeta);
    if (h.infinite())
        throw std::domain_error("prerenormalize: height is infinite, not renormalizable");
    if (!h.finite())
        throw std::runtime_error("prerenormalize: height undetermined at this precision");
    commuting_pair<Real> out;
    out.eta = compose(iterate(zeta.eta, h.value), zeta.xi);
    out.xi = zeta.eta;
    out.exponent = zeta.exponent;
    out.level = zeta.level;
    out.renorm_depth = zeta.renorm_depth;
    return out;
}

// Pre-renormalization conjugated by x -> x / xi(0).
template <class Real>
commuting_pair<Real> renormalize(const commuting_pair<Real>& zeta) {
    Real pivot = zeta.xi0();
    if (std::abs(pivot) < precision_floor<Real>() * std::abs(zeta.eta.scale))
        throw std::runtime_error("renormalize: rescale factor beyond the precision floor");
    commuting_pair<Real> pre = prerenormalize(zeta);
    Real lambda = Real(1) / pivot;
    commuting_pair<Real> out;
    out.eta = rescale(pre.eta, lambda);
    out.xi = rescale(pre.xi, lambda);
    out.exponent = zeta.exponent;
    out.level = zeta.level;
    out.renorm_depth = zeta.renorm_depth + 1;
    // The definitional form (I) must come out of the rescaling; assert it.
    Real nx = out.xi0(), ne = out.eta0();
    if (nx == Real(0) || ne == Real(0) || ((nx > 0) == (ne > 0)))
        throw std::logic_error("renormalize: rescaled pair violates the domain form (I)");
    return out;
}

// Rotation number of a pair through successive heights; r_i = chi(R^i zeta),
// with 1/infinity understood as 0 (exhausted expansion).
template <class Real>
struct pair_rotation {
    continued_fraction cf;
    bool floor_truncated = false;
};

template <class Real>
pair_rotation<Real> rotation_number_pair(const commuting_pair<Real>& zeta, int depth) {
    std::vector<std::int64_t> terms;
    commuting_pair<Real> cur = zeta;
    for (int i = 0; i < depth; ++i) {
        auto h = height(cur);
        if (h.infinite())
            return {continued_fraction::from_terms(std::move(terms)), false};
        if (!h.finite())
            return {continued_fraction::truncated(std::move(terms)), true};
        terms.push_back(h.value);
        if (i + 1 == depth) break;
        try {
            cur = renormalize(cur);
        } catch (const std::runtime_error&) {
            return {continued_fraction::truncated(std::move(terms)), true};
        }
    }
    return {continued_fraction::truncated(std::move(terms)), false};
}

// ---------------------------------------------------------------------------
// C0 metric through the normalized embedding
//   zeta -> ( xi(0)^-1 eta(xi(0) x), eta(0)^-1 xi(eta(0) x), eta(0)/xi(0) ).
// Grid sup-differences are a lower bound of the true sup metric.
// ---------------------------------------------------------------------------

template <class Real>
Real c0_distance(const commuting_pair<Real>& a, const commuting_pair<Real>& b,
                 int samples = 1024) {
    Real ax0 = a.xi0(), ae0 = a.eta0();
    Real bx0 = b.xi0(), be0 = b.eta0();
    Real sup1 = 0, sup2 = 0;
    for (int i = 0; i <= samples; ++i) {
        Real t = static_cast<Real>(i) / samples;
        sup1 = std::max(sup1, std::abs(a.eta(ax0 * t) / ax0 - b.eta(bx0 * t) / bx0));
        sup2 = std::max(sup2, std::abs(a.xi(ae0 * t) / ae0 - b.xi(be0 * t) / be0));
    }
    return std::max(sup1, sup2) + std::abs(ae0 / ax0 - be0 / bx0);
}

// ---------------------------------------------------------------------------
// Renormalization orbits with per-level records.
// ---------------------------------------------------------------------------

template <class Real>
struct renorm_record {
    int level = 0;
    std::int64_t height_value = 0;
    bool height_infinite = false;
    Real xi0 = 0, eta0 = 0;
    Real len_eta = 0, len_xi = 0;   // |I_eta| = |xi(0)|, |I_xi| = |eta(0)|
    Real ratio = 0;                 // |eta(0)/xi(0)| = |I_{m+1}|/|I_m|
    Real commutation_residual = 0;
    std::optional<Real> c0_to_companion;
};

template <class Real>
struct renorm_orbit_result {
    std::vector<renorm_record<Real>> records;
    std::vector<commuting_pair<Real>> pairs;  // pair at each level, pre-rescale orbit
    bool floor_truncated = false;
    bool infinite_hit = false;
};

template <class Real>
renorm_orbit_result<Real> renorm_orbit(const commuting_pair<Real>& start, int depth,
                                       const commuting_pair<Real>* companion = nullptr) {
    renorm_orbit_result<Real> out;
    commuting_pair<Real> cur = start;
    commuting_pair<Real> comp;
    if (companion) comp = *companion;
    for (int lvl = 0; lvl < depth; ++lvl) {
        auto h = height(cur);
        renorm_record<Real> rec;
        rec.level = lvl;
        rec.xi0 = cur.xi0();
        rec.eta0 = cur.eta0();
        rec.len_eta = std::abs(rec.xi0);
        rec.len_xi = std::abs(rec.eta0);
        rec.ratio = std::abs(rec.eta0 / rec.xi0);
        rec.commutation_residual = validate_pair(cur, 8).commutation_residual;
        if (companion) rec.c0_to_companion = c0_distance(cur, comp, 256);
        if (h.infinite()) {
            rec.height_infinite = true;
            out.records.push_back(rec);
            out.pairs.push_back(cur);
            out.infinite_hit = true;
            return out;
        }
        if (!h.finite()) {
            out.floor_truncated = true;
            return out;
        }
        rec.height_value = h.value;
        out.records.push_back(rec);
        out.pairs.push_back(cur);
        if (lvl + 1 == depth) break;
        if (cur.base_pivot() < precision_floor<Real>() * 10) {
            out.floor_truncated = true;
            break;
        }
        try {
            cur = renormalize(cur);
            if (companion) comp = renormalize(comp);
        } catch (const std::exception&) {
            out.floor_truncated = true;
            break;
        }
    }
    return out;
}

}  // namespace renormlab
