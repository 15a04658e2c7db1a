// Acceptance suite: one PASS/FAIL line per criterion, exit code = number of
// failures. Tolerances and thresholds are pinned here, in code.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <renormlab/blaschke.hpp>
#include <renormlab/circlemap.hpp>
#include <renormlab/contfrac.hpp>
#include <renormlab/experiments.hpp>
#include <renormlab/families.hpp>
#include <renormlab/pairs.hpp>

using namespace renormlab;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
    std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// Tuned maps used by several criteria; tuning is deterministic.
struct tuned_map {
    double theta = 0;
    circle_lift<double> lift;
};

tuned_map tune_map(int n, const continued_fraction& target, double a = 0.0) {
    auto t = tune_theta<double>(n, target, 1e-10, 0, a);
    return {t.theta, blaschke_circle_lift<double>(build_blaschke(n), t.theta, a)};
}

// --------------------------------------------------------------------------

void criterion_1_model_identity() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (int n : {3, 5, 7, 9}) {
        try {
            auto B = build_blaschke(n);  // throws on any identity failure
            // Re-verify P - Q = (z-1)^n and the derivative factorization
            // explicitly in exact integers.
            auto diff = poly::sub(B.P, B.Q);
            auto zm1 = poly::binomial_power(-1, n);
            if (diff != poly::trim(zm1)) ok = false;
            auto num = poly::sub(poly::mul(poly::derivative(B.P), B.Q),
                                 poly::mul(B.P, poly::derivative(B.Q)));
            auto expect = poly::binomial_power(-1, n - 1);
            expect.insert(expect.begin(), static_cast<std::size_t>(B.m), 0);
            if (num.size() != expect.size()) ok = false;
            else
                for (std::size_t i = 0; i < num.size(); ++i)
                    if (num[i] != B.derivative_constant * expect[i]) ok = false;
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
    }
    double dt = seconds_since(t0);
    ok = ok && dt < 1.0;
    report(1, ok, "model identities exact for n in {3,5,7,9}",
           fmt("%s%.3fs", detail.c_str(), dt));
}

void criterion_2_circle_homeomorphism() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (int n : {3, 5, 7}) {
        auto f = blaschke_circle_lift<double>(build_blaschke(n), 0.37);
        double min_deriv = 1e300;
        bool nonneg = true, zeros_near_0 = true;
        for (int i = 0; i < 10'000; ++i) {
            double t = static_cast<double>(i) / 10'000.0;
            double d = f.derivative(t);
            if (d < 0) nonneg = false;
            double dist = std::min(t, 1.0 - t);
            if (dist > 1e-3) {
                min_deriv = std::min(min_deriv, d);
                if (d <= 0) zeros_near_0 = false;
            }
        }
        double fit = fit_critical_exponent(f);
        bool this_ok = nonneg && zeros_near_0 && std::abs(fit - n) <= 0.1;
        if (!this_ok)
            detail += fmt("n=%d nonneg=%d zeros=%d fit=%.3f; ", n, nonneg, zeros_near_0, fit);
        ok = ok && this_ok;
    }
    double dt = seconds_since(t0);
    ok = ok && dt < 10.0;
    report(2, ok, "circle lifts are homeomorphisms with exponent n for n in {3,5,7}",
           fmt("%s%.2fs", detail.c_str(), dt));
}

void criterion_3_rotation_exactness() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int bad = 0;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        double g = unif(rng);
        while (g <= 1e-6 || g >= 1.0 - 1e-6) g = unif(rng);
        auto est = rotation_number(rigid_lift(g), 1e-9, 1'000'000);
        double err = std::abs(est.rho - g);
        worst = std::max(worst, err);
        if (err > 1e-9) ++bad;
    }
    double dt = seconds_since(t0);
    report(3, bad == 0 && dt < 30.0,
           "rigid rotation numbers recovered to 1e-9 for 100 random irrationals",
           fmt("worst error %.2e, %d misses, %.1fs", worst, bad, dt));
}

tuned_map criterion_4_tuning() {
    auto t0 = std::chrono::steady_clock::now();
    auto tm = tune_map(3, golden_cf(30));
    // Independent verification through the rotation-number estimator.
    auto est = rotation_number(tm.lift, 1e-12, 4'000'000);
    double err = std::abs(est.rho - golden_mean);
    double dt = seconds_since(t0);
    report(4, err < 1e-8 && dt < 300.0,
           "tune_theta(3, golden, 1e-10) achieves rho within 1e-8",
           fmt("theta=%.12f, |rho-golden|=%.2e, %.1fs", tm.theta, err, dt));
    return tm;
}

void criterion_5_gauss_compatibility(const tuned_map& b3g, const tuned_map& b5g) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    auto check = [&](const circle_lift<double>& f, std::int64_t term, const char* name) {
        auto orbit = renorm_orbit(from_circle_map(f, 0), 10);
        int matched = 0;
        for (const auto& rec : orbit.records) {
            if (rec.height_infinite || rec.height_value != term) break;
            ++matched;
        }
        if (matched < 8) {
            ok = false;
            detail += fmt("%s matched only %d levels; ", name, matched);
        } else {
            detail += fmt("%s:%d ", name, matched);
        }
    };
    check(b3g.lift, 1, "B3@golden");
    check(b5g.lift, 1, "B5@golden");
    auto b3s = tune_map(3, silver_cf(20));
    auto b5s = tune_map(5, silver_cf(20));
    check(b3s.lift, 2, "B3@silver");
    check(b5s.lift, 2, "B5@silver");
    report(5, ok, "heights equal the target terms for >= 8 levels (golden and silver)",
           fmt("%s%.1fs", detail.c_str(), seconds_since(t0)));
}

void criterion_6_return_map_consistency(const tuned_map& b3g) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0;
    for (int m = 1; m <= 6; ++m) {
        auto r = renormalize(from_circle_map(b3g.lift, m));
        auto direct = from_circle_map(b3g.lift, m + 1);
        if (r.eta.iterates != direct.eta.iterates ||
            r.eta.translation != direct.eta.translation ||
            r.xi.iterates != direct.xi.iterates ||
            r.xi.translation != direct.xi.translation)
            ok = false;
        double lambda = r.eta.scale;
        double sup = 0;
        for (int i = 0; i <= 64; ++i) {
            double t = static_cast<double>(i) / 64.0;
            double x = direct.xi0() * t;
            sup = std::max(sup, std::abs(r.eta(lambda * x) - lambda * direct.eta(x)));
            double y = direct.eta0() * t;
            sup = std::max(sup, std::abs(r.xi(lambda * y) - lambda * direct.xi(y)));
        }
        worst = std::max(worst, sup);
        if (sup >= 1e-10) ok = false;
    }
    report(6, ok, "R(pair at m) equals the level-(m+1) pair after rescaling, m=1..6",
           fmt("worst sup-difference %.2e, %.1fs", worst, seconds_since(t0)));
}

void criterion_7_convergence(const tuned_map& b3g, const tuned_map& b3g_pre) {
    auto t0 = std::chrono::steady_clock::now();
    auto rep = renorm_convergence(b3g.lift, b3g_pre.lift, 10);
    bool ok = rep.certified_depth >= 5;
    for (int m = 2; m + 1 < rep.certified_depth; ++m)
        if (!(rep.distances[m + 1] < rep.distances[m])) ok = false;
    double ratio = rep.distances[rep.certified_depth - 1] / rep.distances[2];
    ok = ok && ratio < 0.2;
    report(7, ok,
           "c0 distance of renormalized B3 vs B3-precomposed strictly decreases",
           fmt("depth %d, final/initial %.3g, %.1fs", rep.certified_depth, ratio,
               seconds_since(t0)));
}

void criterion_8_universality(const tuned_map& b3g, const tuned_map& b3g_pre,
                              const tuned_map& b5g) {
    auto t0 = std::chrono::steady_clock::now();
    auto rep = universality_compare({b3g.lift, b3g_pre.lift}, golden_cf(20), 14);
    bool ok = rep.certified_depth >= 8;
    double disc = ok ? rep.max_rel_discrepancy[rep.certified_depth - 1] : 1.0;
    ok = ok && disc < 0.02;

    // Stabilized per-exponent limits, Cauchy-checked at the deepest level.
    auto limit_of = [](const circle_lift<double>& f) {
        auto sr = scaling_ratios(f, 16);
        double last = sr.ratios[sr.certified_depth - 1];
        double prev = sr.ratios[sr.certified_depth - 2];
        return std::abs(last - prev) < 0.01 * last ? last : -1.0;
    };
    double s3 = limit_of(b3g.lift);
    double s5 = limit_of(b5g.lift);
    double separation = (s3 > 0 && s5 > 0) ? std::abs(s5 - s3) / std::max(s3, s5) : 0.0;
    bool sep_ok = separation > 5 * 0.02;
    report(8, ok && sep_ok,
           "cross-family discrepancy < 2%; n=3 vs n=5 limits separated by > 10%",
           fmt("discrepancy %.3g, s3=%.5f, s5=%.5f, separation %.1f%% vs 10%% required, "
               "%.1fs",
               disc, s3, s5, 100 * separation, seconds_since(t0)));
}

void criterion_9_delta(const tuned_map& b3g) {
    auto t0 = std::chrono::steady_clock::now();
    auto rep = delta_estimate(3, golden_cf(20), 11);
    bool ok = !rep.theta_m.empty() && rep.stabilized_at > 0 && !rep.floor_truncated;
    for (std::size_t i = 0; i + 1 < rep.theta_m.size(); ++i)
        if ((rep.theta_m[i] > b3g.theta) == (rep.theta_m[i + 1] > b3g.theta)) ok = false;
    double final_ratio = rep.ratios.empty() ? 0 : rep.ratios.back();
    double prev_ratio = rep.ratios.size() > 1 ? rep.ratios[rep.ratios.size() - 2] : 1;
    ok = ok && std::abs(final_ratio - prev_ratio) < 0.01 * std::abs(final_ratio);
    report(9, ok, "eigenvalue probe stabilizes to 3 digits; theta_m alternates",
           fmt("delta ~ %.4f, stabilized at m=%d, %.1fs", final_ratio, rep.stabilized_at,
               seconds_since(t0)));
}

void criterion_10_raster(const tuned_map& b3g) {
    auto t0 = std::chrono::steady_clock::now();
    auto B = build_blaschke(3);
    B.theta = b3g.theta;
    raster_params par;  // 800x800, [-2,2]^2, 1000 iterations
    auto img1 = julia_raster(B, par, 1);
    auto img2 = julia_raster(B, par, 2);
    auto img1b = julia_raster(B, par, 1);
    bool identical = img1.classes == img2.classes && img1.classes == img1b.classes &&
                     img1.iters == img2.iters && img1.iters == img1b.iters;
    bool circle_undecided = true;
    for (int k = 0; k < 4096; ++k) {
        auto z = std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / 4096.0);
        if (classify_point(B, z, par.max_iter, par.r_in, par.r_out).cls !=
            pixel_class::undecided)
            circle_undecided = false;
    }
    double frac = img1.classified_fraction();
    double dt = seconds_since(t0);
    bool ok = frac > 0.95 && circle_undecided && identical && dt < 60.0;
    report(10, ok,
           "800x800 raster: >95% classified, circle undecided, bit-identical",
           fmt("classified %.1f%% vs 95%% required, circle_undecided=%d, identical=%d, "
               "%.1fs",
               100 * frac, circle_undecided, identical, dt));
}

}  // namespace

int main() {
    std::printf("renormlab acceptance suite\n");
    criterion_1_model_identity();
    criterion_2_circle_homeomorphism();
    criterion_3_rotation_exactness();
    auto b3g = criterion_4_tuning();
    auto b5g = tune_map(5, golden_cf(30));
    auto b3g_pre = tune_map(3, golden_cf(30), 0.3);
    criterion_5_gauss_compatibility(b3g, b5g);
    criterion_6_return_map_consistency(b3g);
    criterion_7_convergence(b3g, b3g_pre);
    criterion_8_universality(b3g, b3g_pre, b5g);
    criterion_9_delta(b3g);
    criterion_10_raster(b3g);
    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
