#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "contfrac.hpp"

namespace renormlab {

// Orbit positions stop being combinatorially meaningful once the current
// closest-return distance sinks to this multiple of machine epsilon.
template <class Real>
constexpr Real precision_floor() {
    return Real(1000) * std::numeric_limits<Real>::epsilon();
}

// Evaluable lift of an analytic circle map: f(x+1) = f(x)+1, increasing,
// critical point (if any) at the integers. Value-semantic handle over an
// immutable implementation; the evaluation contract is generic in Real so
// an extended-precision build can raise the depth ceiling.
template <class Real = double>
class circle_lift {
  public:
    struct model {
        virtual ~model() = default;
        virtual Real eval(Real x) const = 0;
        // Families with closed-form derivatives override; everything else
        // falls back to central differences.
        virtual bool has_analytic_derivative() const { return false; }
        virtual Real analytic_derivative(Real) const {
            throw std::logic_error("no analytic derivative");
        }
        // f(x) - f(0) at full relative accuracy near the critical point,
        // where direct subtraction loses everything.
        virtual bool has_critical_delta() const { return false; }
        virtual Real critical_delta(Real) const {
            throw std::logic_error("no critical delta channel");
        }
    };

    circle_lift() = default;
    circle_lift(std::shared_ptr<const model> impl, int exponent, std::string name)
        : impl_(std::move(impl)), exponent_(exponent), name_(std::move(name)) {
        if (exponent_ != 1 && (exponent_ < 3 || exponent_ % 2 == 0))
            throw std::domain_error("circle_lift: critical exponent must be 1 or odd >= 3");
    }

    template <class F>
    static circle_lift from_function(F f, int exponent, std::string name) {
        struct fn_model final : model {
            F f;
            explicit fn_model(F g) : f(std::move(g)) {}
            Real eval(Real x) const override { return f(x); }
        };
        return circle_lift(std::make_shared<fn_model>(std::move(f)), exponent,
                           std::move(name));
    }

    bool valid() const { return static_cast<bool>(impl_); }
    Real operator()(Real x) const { return impl_->eval(x); }

    Real derivative(Real x) const {
        if (impl_->has_analytic_derivative()) return impl_->analytic_derivative(x);
        const Real h = std::cbrt(std::numeric_limits<Real>::epsilon()) *
                       std::max(Real(1), std::abs(x));
        return (impl_->eval(x + h) - impl_->eval(x - h)) / (2 * h);
    }

    Real critical_delta(Real x) const {
        if (impl_->has_critical_delta()) return impl_->critical_delta(x);
        return impl_->eval(x) - impl_->eval(Real(0));
    }

    int exponent() const { return exponent_; }
    bool critical() const { return exponent_ > 1; }
    const std::string& name() const { return name_; }
    bool same_base(const circle_lift& o) const { return impl_ == o.impl_; }
    const model& impl() const { return *impl_; }

  private:
    std::shared_ptr<const model> impl_;
    int exponent_ = 1;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Orbit marching in reduced coordinates.
//
// Raw lift positions grow like k*rho, and with them the rounding error;
// stepping the reduced position u in [0,1) with an exact integer wrap
// count keeps the per-step error at machine epsilon of order one.
// ---------------------------------------------------------------------------

template <class Real>
struct orbit_cursor {
    const circle_lift<Real>* lift = nullptr;
    Real u = 0;                // reduced position in [0,1)
    std::int64_t wraps = 0;    // integer part of the lifted orbit
    std::int64_t steps = 0;

    void step() {
        Real v = (*lift)(u);
        Real w = std::floor(v);
        u = v - w;
        if (u >= Real(1)) {  // rounding right at an integer
            u -= Real(1);
            w += Real(1);
        }
        wraps += static_cast<std::int64_t>(w);
        ++steps;
    }

    void advance(std::int64_t k) {
        for (std::int64_t i = 0; i < k; ++i) step();
    }

    // Signed distance to the integer `p` on the lift.
    Real signed_to(std::int64_t p) const {
        return u + static_cast<Real>(wraps - p);
    }
};

template <class Real>
struct orbit_result {
    std::vector<Real> points;  // f^k(0), k = 1..length (lifted values)
    bool truncated = false;    // stopped at the precision floor
};

// x_k = f^k(0) for k = 1..length. Truncates with a flag once the orbit
// returns within the precision floor of the critical point, where deeper
// combinatorics would be noise.
template <class Real>
orbit_result<Real> orbit_of_zero(const circle_lift<Real>& f, std::int64_t length) {
    if (length < 1) throw std::invalid_argument("orbit_of_zero: length must be >= 1");
    orbit_result<Real> out;
    out.points.reserve(static_cast<std::size_t>(length));
    orbit_cursor<Real> cur{&f};
    for (std::int64_t k = 0; k < length; ++k) {
        cur.step();
        out.points.push_back(cur.u + static_cast<Real>(cur.wraps));
        Real dist = std::min(cur.u, Real(1) - cur.u);
        if (dist < precision_floor<Real>()) {
            out.truncated = (k + 1 < length);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closest returns.
//
// f^k(0) is a closest return iff the arc [0, f^k(0)] holds no earlier
// orbit point; the return times are the convergent denominators q_m of
// rho(f). They are extracted by the first-return recursion: given levels
// m-1 and m, iterate the level-m return map on the level-(m-1) point and
// count steps until the orbit crosses 0. The count is the continued
// fraction term r_m, and the last point before the crossing is the
// level-(m+1) closest return. Only signs of exactly-tracked combinatorial
// data enter, so the extraction is valid for any monotone lift.
// ---------------------------------------------------------------------------

template <class Real>
struct closest_return_run {
    // Ladder entries for m = 1, 2, ...; the m = 0 seed is (q,p,d) = (1,0,f(0)).
    std::vector<std::int64_t> q, p;
    std::vector<Real> d;
    std::vector<std::int64_t> cf_terms;  // r_0, r_1, ...
    Real d0 = 0;                         // f(0)

    bool rational_lock = false;   // orbit hit 0 within tolerance: rho = p/q exactly
    bool floor_truncated = false; // |d| reached the precision floor
    bool budget_truncated = false;
    std::int64_t orbit_used = 0;
    // Progress inside the unfinished level, for rotation-number error bounds.
    std::int64_t partial_q = 0;

    std::size_t depth() const { return q.size(); }

    continued_fraction cf_prefix() const {
        std::vector<std::int64_t> t(cf_terms.begin(), cf_terms.end());
        return rational_lock ? continued_fraction::from_terms(std::move(t))
                             : continued_fraction::truncated(std::move(t));
    }
};

template <class Real>
closest_return_run<Real> closest_returns(const circle_lift<Real>& f, int levels,
                                         std::int64_t max_orbit) {
    if (levels < 1) throw std::invalid_argument("closest_returns: levels must be >= 1");
    closest_return_run<Real> run;
    const Real floor_eps = precision_floor<Real>();

    orbit_cursor<Real> cur{&f};
    cur.step();
    run.d0 = cur.signed_to(0);
    run.orbit_used = 1;
    if (std::abs(run.d0) < floor_eps) {  // fixed critical point: rho = 0
        run.rational_lock = true;
        return run;
    }

    // Levels m-1 and m of the ladder; seeds are (q,p,d) = (0,1,-1) and (1,0,f(0)).
    std::int64_t q_prev = 0, p_prev = 1;
    std::int64_t q_cur = 1, p_cur = 0;
    Real d_prev = -1, d_cur = run.d0;

    while (static_cast<int>(run.depth()) < levels) {
        // March the level-m return map from the level-(m-1) point.
        orbit_cursor<Real> walk{&f};
        walk.u = d_prev - std::floor(d_prev);
        walk.wraps = p_prev + static_cast<std::int64_t>(std::floor(d_prev));
        std::int64_t j = 0;
        Real t_last = d_prev;
        bool flipped = false;
        Real t_flip = 0;
        while (!flipped) {
            if (run.orbit_used + q_cur > max_orbit) {
                run.budget_truncated = true;
                run.partial_q = q_prev + j * q_cur;
                return run;
            }
            walk.advance(q_cur);
            run.orbit_used += q_cur;
            ++j;
            Real t = walk.signed_to(p_prev + j * p_cur);
            if (std::abs(t) < floor_eps) {
                // Orbit returned to 0 within tolerance: rational rotation number.
                run.cf_terms.push_back(j);
                run.q.push_back(q_prev + j * q_cur);
                run.p.push_back(p_prev + j * p_cur);
                run.d.push_back(t);
                run.rational_lock = true;
                return run;
            }
            if ((t > 0) != (d_prev > 0)) {
                flipped = true;
                t_flip = t;
            } else {
                t_last = t;
            }
        }
        std::int64_t r = j - 1;
        if (r < 1)
            throw std::runtime_error(
                "closest_returns: malformed combinatorics (crossed on first step)");
        (void)t_flip;
        std::int64_t q_next = q_prev + r * q_cur;
        std::int64_t p_next = p_prev + r * p_cur;
        Real d_next = t_last;

        run.cf_terms.push_back(r);
        run.q.push_back(q_next);
        run.p.push_back(p_next);
        run.d.push_back(d_next);

        if (std::abs(d_next) < floor_eps) {
            run.floor_truncated = true;
            return run;
        }
        q_prev = q_cur; p_prev = p_cur; d_prev = d_cur;
        q_cur = q_next; p_cur = p_next; d_cur = d_next;
    }
    return run;
}

// ---------------------------------------------------------------------------
// Rotation number.
// ---------------------------------------------------------------------------

template <class Real>
struct rotation_estimate {
    Real rho = 0;
    Real error_bound = 1;
    continued_fraction cf_prefix;
    std::int64_t orbit_length = 0;
    bool tol_reached = false;
    bool rational = false;
};

// Closest-return estimate rho = p_m/q_m with the best-approximation bound
// |rho - p_m/q_m| <= 1/(q_m * q_partial); Birkhoff average f^k(0)/k with
// bound 1/k as the fallback when not even one return fits the budget.
template <class Real>
rotation_estimate<Real> rotation_number(const circle_lift<Real>& f, Real tol,
                                        std::int64_t max_orbit) {
    rotation_estimate<Real> est;
    auto run = closest_returns(f, 512, max_orbit);
    est.orbit_length = run.orbit_used;
    est.cf_prefix = run.cf_prefix();

    if (run.rational_lock) {
        if (run.depth() == 0) {  // fixed point at the origin
            est.rho = 0;
            est.error_bound = 0;
        } else {
            est.rho = static_cast<Real>(run.p.back()) / static_cast<Real>(run.q.back());
            est.error_bound = 0;
        }
        est.rational = true;
        est.tol_reached = true;
        return est;
    }
    if (run.depth() == 0) {
        // No full return within budget: Birkhoff fallback.
        orbit_cursor<Real> cur{&f};
        cur.advance(max_orbit);
        est.rho = (cur.u + static_cast<Real>(cur.wraps)) / static_cast<Real>(max_orbit);
        est.error_bound = Real(1) / static_cast<Real>(max_orbit);
        est.tol_reached = est.error_bound <= tol;
        return est;
    }
    std::size_t m = run.depth() - 1;
    Real qm = static_cast<Real>(run.q[m]);
    Real q_next = static_cast<Real>(std::max(run.partial_q, run.q[m]));
    est.rho = static_cast<Real>(run.p[m]) / qm;
    est.error_bound = Real(1) / (qm * q_next);
    est.tol_reached = est.error_bound <= tol;
    return est;
}

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

template <class Real>
struct lift_diagnostics {
    Real max_periodicity_residual = 0;  // relative
    Real min_circle_derivative = 0;     // away from integer points
    Real fitted_exponent = 0;           // NaN-like 0 when noncritical
    bool noncritical = false;
    bool periodicity_ok = false;
    bool monotone_ok = false;
    bool exponent_ok = false;

    bool passed() const { return periodicity_ok && monotone_ok && exponent_ok; }
};

// Least-squares slope of log|f(x)-f(0)| against log|x| over
// x in {1e-2, 1e-3, 1e-4}, both signs.
template <class Real>
Real fit_critical_exponent(const circle_lift<Real>& f, Real scale = Real(1)) {
    static const Real offs[] = {Real(1e-2), Real(1e-3), Real(1e-4)};
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (Real o : offs) {
        for (Real s : {Real(1), Real(-1)}) {
            Real x = s * o * scale;
            Real d = std::abs(f.critical_delta(x));
            if (!(d > Real(0))) continue;
            Real lx = std::log(std::abs(x)), ly = std::log(d);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++n;
        }
    }
    if (n < 3) return Real(0);
    return (Real(n) * sxy - sx * sy) / (Real(n) * sxx - sx * sx);
}

template <class Real>
lift_diagnostics<Real> validate(const circle_lift<Real>& f, int grid = 256,
                                Real integer_exclusion = Real(1e-3)) {
    if (grid < 64) throw std::invalid_argument("validate: grid must be >= 64");
    lift_diagnostics<Real> diag;
    diag.noncritical = !f.critical();

    Real max_res = 0;
    Real min_deriv = std::numeric_limits<Real>::infinity();
    for (int i = 0; i < grid; ++i) {
        Real x = static_cast<Real>(i) / static_cast<Real>(grid);
        Real fx = f(x);
        Real res = std::abs(f(x + 1) - fx - 1) / std::max(Real(1), std::abs(fx));
        max_res = std::max(max_res, res);
        Real dist_to_int = std::min(x, Real(1) - x);
        if (dist_to_int > integer_exclusion)
            min_deriv = std::min(min_deriv, f.derivative(x));
    }
    diag.max_periodicity_residual = max_res;
    diag.min_circle_derivative = min_deriv;
    diag.periodicity_ok = max_res < Real(1e-12);
    diag.monotone_ok = min_deriv > Real(0);

    if (diag.noncritical) {
        diag.exponent_ok = true;  // exponent check skipped
    } else {
        diag.fitted_exponent = fit_critical_exponent(f);
        Real fit = diag.fitted_exponent;
        int nearest_odd = 2 * static_cast<int>(std::lround((fit - 1) / 2)) + 1;
        diag.exponent_ok =
            nearest_odd == f.exponent() && std::abs(fit - f.exponent()) <= Real(0.1);
    }
    return diag;
}

}  // namespace renormlab
