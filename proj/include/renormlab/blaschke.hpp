#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "circlemap.hpp"
#include "contfrac.hpp"

namespace renormlab {

// ---------------------------------------------------------------------------
// Exact integer polynomials, ascending coefficient order.
// ---------------------------------------------------------------------------
namespace poly {

using coeffs = std::vector<std::int64_t>;

inline coeffs trim(coeffs a) {
    while (a.size() > 1 && a.back() == 0) a.pop_back();
    return a;
}

inline coeffs sub(const coeffs& a, const coeffs& b) {
    coeffs r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return trim(std::move(r));
}

inline coeffs mul(const coeffs& a, const coeffs& b) {
    coeffs r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            int128 prod = static_cast<int128>(a[i]) * b[j] + r[i + j];
            if (prod > std::numeric_limits<std::int64_t>::max() ||
                prod < std::numeric_limits<std::int64_t>::min())
                throw std::overflow_error("poly::mul: coefficient overflow");
            r[i + j] = static_cast<std::int64_t>(prod);
        }
    return trim(std::move(r));
}

inline coeffs derivative(const coeffs& a) {
    if (a.size() <= 1) return {0};
    coeffs r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i)
        r[i - 1] = a[i] * static_cast<std::int64_t>(i);
    return trim(std::move(r));
}

// (z + c)^n by repeated multiplication, exact.
inline coeffs binomial_power(std::int64_t c, int n) {
    coeffs r{1};
    coeffs lin{c, 1};
    for (int i = 0; i < n; ++i) r = mul(r, lin);
    return r;
}

template <class Real>
std::complex<Real> eval(const coeffs& a, std::complex<Real> z) {
    std::complex<Real> r(0, 0);
    for (std::size_t i = a.size(); i-- > 0;)
        r = r * z + std::complex<Real>(static_cast<Real>(a[i]), 0);
    return r;
}

}  // namespace poly

// ---------------------------------------------------------------------------
// The degree-n Blaschke model z -> e^{2 pi i theta} P(z)/Q(z), n = 2m+1:
//   P(z) = sum_{k=0}^{m} (-1)^k C(n,k) z^{n-k},   Q(z) = z^n P(1/z),
// so that P(z) - Q(z) = (z-1)^n exactly. P carries powers m+1..n and Q
// powers 0..m; B fixes 0, 1, infinity, has an order-n critical point at 1,
// critical points of order m+1 at 0 and infinity, and restricts to a circle
// homeomorphism.
// ---------------------------------------------------------------------------

struct blaschke_fraction {
    int n = 0;
    int m = 0;
    poly::coeffs P;  // ascending, degree n
    poly::coeffs Q;  // ascending, degree m
    double theta = 0.0;
    std::int64_t derivative_constant = 0;  // c in P'Q - PQ' = c z^m (z-1)^{n-1}
};

inline blaschke_fraction build_blaschke(int n) {
    if (n < 3 || n % 2 == 0)
        throw std::domain_error("build_blaschke: n must be odd and >= 3");
    blaschke_fraction B;
    B.n = n;
    B.m = (n - 1) / 2;

    // (z-1)^n exactly; P is its upper half, Q the negated lower half.
    poly::coeffs zm1 = poly::binomial_power(-1, n);
    B.P.assign(static_cast<std::size_t>(n) + 1, 0);
    B.Q.assign(static_cast<std::size_t>(B.m) + 1, 0);
    for (int i = B.m + 1; i <= n; ++i) B.P[static_cast<std::size_t>(i)] = zm1[i];
    for (int i = 0; i <= B.m; ++i) B.Q[static_cast<std::size_t>(i)] = -zm1[i];

    // Construction identities, asserted in exact arithmetic.
    if (poly::sub(B.P, B.Q) != poly::trim(zm1))
        throw std::logic_error("build_blaschke: P - Q != (z-1)^n");
    for (int i = 0; i <= n; ++i) {
        std::int64_t qi = i <= B.m ? B.Q[static_cast<std::size_t>(i)] : 0;
        if (qi != B.P[static_cast<std::size_t>(n - i)])
            throw std::logic_error("build_blaschke: Q != z^n P(1/z)");
    }
    std::int64_t q1 = 0;
    for (auto c : B.Q) q1 += c;
    if (q1 == 0) throw std::logic_error("build_blaschke: Q(1) = 0");

    // P'Q - PQ' = c z^m (z-1)^{n-1} for a nonzero integer c.
    poly::coeffs num =
        poly::sub(poly::mul(poly::derivative(B.P), B.Q), poly::mul(B.P, poly::derivative(B.Q)));
    poly::coeffs expect = poly::binomial_power(-1, n - 1);
    expect.insert(expect.begin(), static_cast<std::size_t>(B.m), 0);  // * z^m
    if (num.size() != expect.size())
        throw std::logic_error("build_blaschke: derivative numerator has wrong degree");
    std::int64_t c = num.back() / expect.back();
    if (c == 0 || num.back() != c * expect.back())
        throw std::logic_error("build_blaschke: derivative numerator not divisible");
    for (std::size_t i = 0; i < num.size(); ++i)
        if (num[i] != c * expect[i])
            throw std::logic_error("build_blaschke: derivative numerator mismatch");
    B.derivative_constant = c;
    return B;
}

inline std::int64_t q_at_one(const blaschke_fraction& B) {
    std::int64_t s = 0;
    for (auto c : B.Q) s += c;
    return s;
}

// e^{2 pi i theta} P(z)/Q(z). A pole of Q maps to a non-finite value.
template <class Real = double>
std::complex<Real> blaschke_eval(const blaschke_fraction& B, std::complex<Real> z) {
    std::complex<Real> num = poly::eval<Real>(B.P, z);
    std::complex<Real> den = poly::eval<Real>(B.Q, z);
    std::complex<Real> phase =
        std::polar(Real(1), 2 * std::numbers::pi_v<Real> * static_cast<Real>(B.theta));
    return phase * num / den;
}

template <class Real = double>
bool blaschke_is_pole(const blaschke_fraction& B, std::complex<Real> z) {
    return std::abs(poly::eval<Real>(B.Q, z)) == Real(0);
}

// ---------------------------------------------------------------------------
// Circle lift.
//
// On |z| = 1 the restriction is a homeomorphism, so the positive-branch
// argument of B(e^{2 pi i s}) is the lift on [0,1) directly. Near the
// critical point z = 1 the argument is computed through the identity
//   B(z) - 1 = (z-1)^n / Q(z)
// with z - 1 in half-angle form, which keeps full relative precision of
// the tiny angle where direct evaluation of P/Q has already lost the sign.
// The derivative comes from the exact factorization of P'Q - PQ'.
//
// The optional precomposition is the circle diffeomorphism
// h_a(z) = (z+a)/(1+az), a real in (-1,1), which fixes 1 and satisfies
// h_a(z) - 1 = (1-a)(z-1)/(1+az); its lift g_a gets the same treatment.
// The full lift is t -> arg B(h_a(e^{2 pi i t}))/2pi + theta.
// ---------------------------------------------------------------------------

template <class Real>
class blaschke_lift_model final : public circle_lift<Real>::model {
  public:
    blaschke_lift_model(blaschke_fraction B, Real theta, Real precompose_a)
        : B_(std::move(B)), theta_(theta), a_(precompose_a) {
        if (!(std::abs(a_) < Real(1)))
            throw std::domain_error("blaschke lift: precomposition |a| must be < 1");
    }

    Real eval(Real x) const override {
        Real w = std::floor(x);
        Real s = x - w;
        Real g = a_ == Real(0) ? s : mobius_angle(s).positive;
        return w + base_angle(g).positive + theta_;
    }

    bool has_analytic_derivative() const override { return true; }
    Real analytic_derivative(Real x) const override {
        Real s = x - std::floor(x);
        Real g = s, gprime = Real(1);
        if (a_ != Real(0)) {
            g = mobius_angle(s).positive;
            gprime = mobius_derivative(s);
        }
        return base_derivative(g) * gprime;
    }

    bool has_critical_delta() const override { return true; }
    Real critical_delta(Real x) const override {
        // f(x) - f(0) with theta cancelled exactly; signed angles keep
        // relative precision on both sides of the critical point.
        Real w = std::round(x);
        Real s = x - w;
        Real g = a_ == Real(0) ? s : mobius_angle(s).signed_value;
        return w + base_angle(g).signed_value;
    }

    const blaschke_fraction& fraction() const { return B_; }
    Real theta() const { return theta_; }
    Real precompose() const { return a_; }

  private:
    struct angle {
        Real positive;      // in [0,1)
        Real signed_value;  // in (-1/2, 1/2]
    };

    static std::complex<Real> circle_point_minus_one(Real s) {
        // e^{2 pi i s} - 1 = -2 sin^2(pi s) + 2 i sin(pi s) cos(pi s),
        // full relative precision for small s.
        Real sp = std::sin(std::numbers::pi_v<Real> * s);
        Real cp = std::cos(std::numbers::pi_v<Real> * s);
        return {-2 * sp * sp, 2 * sp * cp};
    }

    static angle wrap(std::complex<Real> u) {
        Real a = std::atan2(u.imag(), u.real()) / (2 * std::numbers::pi_v<Real>);
        return {a < Real(0) ? a + Real(1) : a, a};
    }

    // arg of B_0(e^{2 pi i s}) via 1 + (z-1)^n / Q(z).
    angle base_angle(Real s) const {
        std::complex<Real> zm1 = circle_point_minus_one(s);
        std::complex<Real> z = zm1 + std::complex<Real>(1, 0);
        std::complex<Real> w(1, 0);
        for (int i = 0; i < B_.n; ++i) w *= zm1;
        w /= poly::eval<Real>(B_.Q, z);
        return wrap(std::complex<Real>(1, 0) + w);
    }

    // d/dt arg B_0(e^{2 pi i t}) = Re[z B'(z)/B(z)], via the exact
    // factorization B'/B = c z^m (z-1)^{n-1} / (P Q).
    Real base_derivative(Real s) const {
        std::complex<Real> zm1 = circle_point_minus_one(s);
        std::complex<Real> z = zm1 + std::complex<Real>(1, 0);
        std::complex<Real> num(static_cast<Real>(B_.derivative_constant), 0);
        for (int i = 0; i < B_.n - 1; ++i) num *= zm1;
        for (int i = 0; i < B_.m + 1; ++i) num *= z;  // z^{m+1} = z * z^m
        std::complex<Real> den = poly::eval<Real>(B_.P, z) * poly::eval<Real>(B_.Q, z);
        return (num / den).real();
    }

    // arg of h_a(e^{2 pi i s}) via 1 + (1-a)(z-1)/(1+az).
    angle mobius_angle(Real s) const {
        std::complex<Real> zm1 = circle_point_minus_one(s);
        std::complex<Real> z = zm1 + std::complex<Real>(1, 0);
        std::complex<Real> w = (Real(1) - a_) * zm1 / (std::complex<Real>(1, 0) + a_ * z);
        return wrap(std::complex<Real>(1, 0) + w);
    }

    Real mobius_derivative(Real s) const {
        std::complex<Real> zm1 = circle_point_minus_one(s);
        std::complex<Real> z = zm1 + std::complex<Real>(1, 0);
        std::complex<Real> v = z * (Real(1) - a_ * a_) /
                               ((z + a_) * (std::complex<Real>(1, 0) + a_ * z));
        return v.real();
    }

    blaschke_fraction B_;
    Real theta_;
    Real a_;
};

template <class Real = double>
circle_lift<Real> blaschke_circle_lift(const blaschke_fraction& B, Real theta,
                                       Real precompose_a = Real(0)) {
    blaschke_fraction base = B;
    base.theta = 0.0;  // theta handled by the lift itself
    std::ostringstream name;
    name << "blaschke(n=" << B.n << ",theta=" << static_cast<double>(theta);
    if (precompose_a != Real(0)) name << ",a=" << static_cast<double>(precompose_a);
    name << ")";
    auto model = std::make_shared<blaschke_lift_model<Real>>(std::move(base), theta,
                                                             precompose_a);
    return circle_lift<Real>(std::move(model), B.n, name.str());
}

// ---------------------------------------------------------------------------
// Parameter tuning. The lift of the rotated family is h_0 + theta, so an
// orbit point is strictly increasing in theta and combinatorial orderings
// against the target's convergents decide bisection directions exactly.
// ---------------------------------------------------------------------------

namespace detail {

// q_m f-steps from 0 and compare against p_m: sign of f^{q_m}(0) - p_m.
template <class Real>
Real iterate_residual(const circle_lift<Real>& f, std::int64_t q, std::int64_t p) {
    orbit_cursor<Real> cur{&f};
    cur.advance(q);
    return cur.signed_to(p);
}

struct int_convergents {
    std::vector<std::int64_t> q, p;
};

inline int_convergents target_convergents(const continued_fraction& target,
                                          std::size_t depth,
                                          std::int64_t max_q) {
    auto ladder = target.convergents(std::min(depth, target.size()));
    int_convergents out;
    for (const auto& c : ladder.levels) {
        if (c.q > max_q) break;
        out.q.push_back(static_cast<std::int64_t>(c.q));
        out.p.push_back(static_cast<std::int64_t>(c.p));
    }
    return out;
}

}  // namespace detail

template <class Real>
struct tune_result {
    Real theta = 0;
    Real bracket_lo = 0, bracket_hi = 1;
    rotation_estimate<Real> achieved;
    int depth_used = 0;
    bool depth_capped = false;  // bisection stalled inside the deepest undecided zone
};

// Unique theta with rho(e^{2 pi i theta} B_n restricted to S^1) equal to the
// irrational target. Bisection on theta; at each candidate the convergents
// of the target are walked until the sign of f^{q_m}(0) - p_m lands on the
// far side of the target, which decides the direction.
template <class Real = double>
tune_result<Real> tune_theta(int n, const continued_fraction& target, Real tol_theta,
                             int depth = 0, Real precompose_a = Real(0),
                             std::int64_t max_orbit = 4'000'000) {
    if (target.exhausted())
        throw std::domain_error("tune_theta: rational target has no unique theta");
    if (target.empty())
        throw std::domain_error("tune_theta: empty target");
    if (depth <= 0) {
        // Combinatorial decisions at CF level m resolve theta to roughly
        // |delta|^-m with |delta| ~ 2.8; pick a depth whose undecided
        // zone is well inside tol.
        depth = static_cast<int>(std::ceil(std::log(1.0 / static_cast<double>(tol_theta)) /
                                           std::log(2.8))) + 4;
    }
    auto B = build_blaschke(n);
    auto conv = detail::target_convergents(target, static_cast<std::size_t>(depth),
                                           max_orbit / 4);
    if (conv.q.empty())
        throw std::domain_error("tune_theta: target has no usable convergents");

    tune_result<Real> out;
    out.depth_used = static_cast<int>(conv.q.size());

    const Real tie = precision_floor<Real>();
    // One orbit pass per candidate, reading the sign of f^{q_m}(0) - p_m
    // at each convergent checkpoint until one lands on the far side of
    // the target. Convergents alternate around it, the first from above.
    // Candidates too close to theta* stay undecided at every level.
    auto decide = [&](Real theta_cand) -> int {
        auto f = blaschke_circle_lift<Real>(B, theta_cand, precompose_a);
        orbit_cursor<Real> cur{&f};
        for (std::size_t m = 0; m < conv.q.size(); ++m) {
            cur.advance(conv.q[m] - cur.steps);
            Real r = cur.signed_to(conv.p[m]);
            if (std::abs(r) <= tie) continue;  // tie: undecided at this level
            bool above_target = (m % 2 == 0);
            if (above_target && r > 0) return +1;
            if (!above_target && r < 0) return -1;
        }
        return 0;
    };
    // Two edge bisections: the largest theta certified below the target
    // and the smallest certified above. Both always terminate; what is
    // left between them is the zone the chosen depth cannot resolve, and
    // the flag reports a final bracket wider than asked.
    Real lo = 0, hi = 1;
    while (hi - lo > tol_theta / 4) {
        Real mid = (lo + hi) / 2;
        (decide(mid) < 0 ? lo : hi) = mid;
    }
    Real lo2 = lo, hi2 = 1;
    while (hi2 - lo2 > tol_theta / 4) {
        Real mid = (lo2 + hi2) / 2;
        (decide(mid) > 0 ? hi2 : lo2) = mid;
    }
    out.bracket_lo = lo;
    out.bracket_hi = hi2;
    out.depth_capped = hi2 - lo > tol_theta;
    out.theta = (lo + hi2) / 2;

    auto tuned = blaschke_circle_lift<Real>(B, out.theta, precompose_a);
    out.achieved = rotation_number(tuned, Real(1e-12), max_orbit);
    return out;
}

// Parameter where the critical point is q_m-periodic with combinatorics
// p_m/q_m: solves f_theta^{q_m}(0) = p_m, the residual being strictly
// increasing in theta.
template <class Real = double>
Real solve_theta_periodic(int n, const continued_fraction& target, int m,
                          Real precompose_a = Real(0),
                          Real residual_tol = Real(1e-12),
                          std::int64_t max_orbit = 4'000'000) {
    if (m < 1) throw std::invalid_argument("solve_theta_periodic: m must be >= 1");
    auto conv = detail::target_convergents(target, static_cast<std::size_t>(m), max_orbit);
    if (conv.q.size() < static_cast<std::size_t>(m))
        throw std::out_of_range("solve_theta_periodic: level beyond certified depth");
    std::int64_t q = conv.q[static_cast<std::size_t>(m) - 1];
    std::int64_t p = conv.p[static_cast<std::size_t>(m) - 1];
    auto B = build_blaschke(n);

    Real lo = 0, hi = 1;
    Real rlo = detail::iterate_residual(blaschke_circle_lift<Real>(B, lo, precompose_a), q, p);
    Real rhi = detail::iterate_residual(blaschke_circle_lift<Real>(B, hi, precompose_a), q, p);
    if (!(rlo < 0 && rhi >= 0))
        throw std::runtime_error("solve_theta_periodic: root not bracketed in [0,1)");
    if (std::abs(rhi) <= residual_tol) return hi;  // root at the closed endpoint
    Real best = 0, best_r = std::numeric_limits<Real>::infinity();
    for (int it = 0; it < 200; ++it) {
        Real mid = (lo + hi) / 2;
        if (mid == lo || mid == hi) break;
        Real r = detail::iterate_residual(blaschke_circle_lift<Real>(B, mid, precompose_a), q, p);
        if (std::abs(r) < std::abs(best_r)) { best = mid; best_r = r; }
        if (std::abs(r) <= residual_tol) return mid;
        (r < 0 ? lo : hi) = mid;
    }
    if (std::abs(best_r) <= residual_tol * 100) return best;
    throw std::runtime_error("solve_theta_periodic: residual tolerance unreachable");
}

}  // namespace renormlab
