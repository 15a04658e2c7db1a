#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "blaschke.hpp"
#include "circlemap.hpp"
#include "contfrac.hpp"
#include "pairs.hpp"

namespace renormlab {

// ---------------------------------------------------------------------------
// Scaling ratios s_m = |I_{m+1}| / |I_m| from the closest-return ladder.
// ---------------------------------------------------------------------------

struct scaling_report {
    std::vector<double> ratios;  // s_m for m = certified ladder levels
    int certified_depth = 0;     // number of usable ratios
    bool floor_truncated = false;
};

inline scaling_report scaling_ratios(const circle_lift<double>& f, int depth,
                                     std::int64_t max_orbit = 4'000'000) {
    auto run = closest_returns(f, depth + 1, max_orbit);
    if (run.rational_lock)
        throw std::domain_error("scaling_ratios: rational rotation number");
    scaling_report rep;
    rep.floor_truncated = run.floor_truncated || run.budget_truncated;
    std::vector<double> lens;
    lens.push_back(std::abs(run.d0));  // |I_0|
    for (double d : run.d) lens.push_back(std::abs(d));
    for (std::size_t i = 0; i + 1 < lens.size() && static_cast<int>(i) < depth; ++i)
        rep.ratios.push_back(lens[i + 1] / lens[i]);
    rep.certified_depth = static_cast<int>(rep.ratios.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Universality: same target, different analytic families.
// ---------------------------------------------------------------------------

struct universality_report {
    int exponent = 0;
    std::vector<std::int64_t> target_terms;
    std::vector<std::vector<double>> ratios;        // per family, per level
    std::vector<double> max_rel_discrepancy;        // per commonly certified level
    std::vector<double> pair_c0_distance;           // families 0 vs 1, per level
    int certified_depth = 0;
    bool floor_truncated = false;
};

inline universality_report universality_compare(
    const std::vector<circle_lift<double>>& families, const continued_fraction& target,
    int depth, std::int64_t max_orbit = 4'000'000) {
    if (families.size() < 2)
        throw std::domain_error("universality_compare: need at least 2 families");
    int n = families.front().exponent();
    for (const auto& f : families)
        if (f.exponent() != n)
            throw std::domain_error("universality_compare: mismatched critical exponents");

    universality_report rep;
    rep.exponent = n;
    rep.target_terms = target.terms();
    int common = depth;
    for (const auto& f : families) {
        auto sr = scaling_ratios(f, depth, max_orbit);
        rep.floor_truncated = rep.floor_truncated || sr.floor_truncated;
        common = std::min(common, sr.certified_depth);
        rep.ratios.push_back(std::move(sr.ratios));
    }
    rep.certified_depth = common;
    for (int lvl = 0; lvl < common; ++lvl) {
        double lo = rep.ratios[0][static_cast<std::size_t>(lvl)];
        double hi = lo;
        for (const auto& r : rep.ratios) {
            lo = std::min(lo, r[static_cast<std::size_t>(lvl)]);
            hi = std::max(hi, r[static_cast<std::size_t>(lvl)]);
        }
        rep.max_rel_discrepancy.push_back((hi - lo) / hi);
    }

    // C0 distances between the first two families' renormalized pairs.
    auto pa = from_circle_map(families[0], 0, max_orbit);
    auto pb = from_circle_map(families[1], 0, max_orbit);
    for (int lvl = 0; lvl < common; ++lvl) {
        rep.pair_c0_distance.push_back(c0_distance(pa, pb, 256));
        if (lvl + 1 == common) break;
        try {
            pa = renormalize(pa);
            pb = renormalize(pb);
        } catch (const std::exception&) {
            rep.floor_truncated = true;
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Renormalization convergence of two same-rho maps.
// ---------------------------------------------------------------------------

struct convergence_report {
    std::vector<double> distances;  // c0(R^m a, R^m b), m = 0..certified
    int certified_depth = 0;
    bool floor_truncated = false;
};

inline convergence_report renorm_convergence(const circle_lift<double>& a,
                                             const circle_lift<double>& b, int depth,
                                             std::int64_t max_orbit = 4'000'000) {
    if (a.exponent() != b.exponent())
        throw std::domain_error("renorm_convergence: mismatched critical exponents");
    auto ra = closest_returns(a, std::min(depth + 1, 24), max_orbit);
    auto rb = closest_returns(b, std::min(depth + 1, 24), max_orbit);
    std::size_t shared = std::min({ra.cf_terms.size(), rb.cf_terms.size(),
                                   static_cast<std::size_t>(depth)});
    for (std::size_t i = 0; i < shared; ++i)
        if (ra.cf_terms[i] != rb.cf_terms[i])
            throw std::domain_error("renorm_convergence: rotation numbers disagree "
                                    "on the certified prefix");

    convergence_report rep;
    auto pa = from_circle_map(a, 0, max_orbit);
    auto pb = from_circle_map(b, 0, max_orbit);
    for (int m = 0; m < depth; ++m) {
        rep.distances.push_back(c0_distance(pa, pb));
        if (m + 1 == depth) break;
        try {
            pa = renormalize(pa);
            pb = renormalize(pb);
        } catch (const std::exception&) {
            rep.floor_truncated = true;
            break;
        }
    }
    rep.certified_depth = static_cast<int>(rep.distances.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Unstable-eigenvalue probe from the spacing of periodic-point parameters.
// ---------------------------------------------------------------------------

struct delta_report {
    std::vector<double> theta_m;   // m = 1..depth
    std::vector<double> ratios;    // d_m = (t_m - t_{m-1}) / (t_{m+1} - t_m)
    double theta_star = 0;         // from tune_theta, for the alternation check
    int stabilized_at = -1;        // first m with |d_m - d_{m-1}|/|d_m| < 1%
    bool floor_truncated = false;
};

inline delta_report delta_estimate(int n, const continued_fraction& target, int depth,
                                   std::int64_t max_orbit = 4'000'000) {
    delta_report rep;
    for (int m = 1; m <= depth; ++m) {
        try {
            rep.theta_m.push_back(solve_theta_periodic<double>(n, target, m, 0.0,
                                                               1e-12, max_orbit));
        } catch (const std::exception&) {
            rep.floor_truncated = true;
            break;
        }
    }
    auto tuned = tune_theta<double>(n, target, 1e-10);
    rep.theta_star = tuned.theta;
    const auto& t = rep.theta_m;
    for (std::size_t m = 1; m + 1 < t.size(); ++m)
        rep.ratios.push_back((t[m] - t[m - 1]) / (t[m + 1] - t[m]));
    for (std::size_t i = 1; i < rep.ratios.size(); ++i) {
        if (std::abs(rep.ratios[i] - rep.ratios[i - 1]) <
            0.01 * std::abs(rep.ratios[i])) {
            rep.stabilized_at = static_cast<int>(i) + 2;  // index of d_m with m from 2
            break;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Julia set raster of the model map: escape-time classification into the
// superattracting basins of 0 and infinity; undecided pixels approximate
// the Julia set, which contains the unit circle.
// ---------------------------------------------------------------------------

enum class pixel_class : std::uint8_t { basin_zero = 0, basin_infinity = 1, undecided = 2 };

struct raster_params {
    double re_min = -2, re_max = 2, im_min = -2, im_max = 2;
    int width = 800, height = 800;
    int max_iter = 1000;
    double r_in = 1e-6, r_out = 1e6;
};

struct raster_image {
    raster_params params;
    std::vector<pixel_class> classes;  // row-major, top row first
    std::vector<std::uint16_t> iters;
    std::int64_t count_zero = 0, count_infinity = 0, count_undecided = 0;

    pixel_class at(int row, int col) const {
        return classes[static_cast<std::size_t>(row) * params.width + col];
    }
    double classified_fraction() const {
        double total = static_cast<double>(classes.size());
        return total == 0 ? 0 : (count_zero + count_infinity) / total;
    }
};

struct escape_result {
    pixel_class cls = pixel_class::undecided;
    int iterations = 0;
};

inline escape_result classify_point(const blaschke_fraction& B, std::complex<double> z,
                                    int max_iter, double r_in, double r_out) {
    for (int k = 0; k <= max_iter; ++k) {
        double az = std::abs(z);
        if (az < r_in) return {pixel_class::basin_zero, k};
        if (!(az <= r_out)) return {pixel_class::basin_infinity, k};  // also poles/NaN
        if (k == max_iter) break;
        z = blaschke_eval(B, z);
    }
    return {pixel_class::undecided, static_cast<int>(max_iter)};
}

inline raster_image julia_raster(const blaschke_fraction& B, const raster_params& par,
                                 int threads = 1) {
    if (!(par.r_in < 1.0 && 1.0 < par.r_out))
        throw std::domain_error("julia_raster: need r_in < 1 < r_out");
    if (par.width < 1 || par.height < 1)
        throw std::domain_error("julia_raster: empty resolution");
    raster_image img;
    img.params = par;
    img.classes.resize(static_cast<std::size_t>(par.width) * par.height);
    img.iters.resize(img.classes.size());

    auto worker = [&](int row_begin, int row_end) {
        for (int row = row_begin; row < row_end; ++row) {
            double im = par.im_max - (row + 0.5) * (par.im_max - par.im_min) / par.height;
            for (int col = 0; col < par.width; ++col) {
                double re = par.re_min + (col + 0.5) * (par.re_max - par.re_min) / par.width;
                auto res = classify_point(B, {re, im}, par.max_iter, par.r_in, par.r_out);
                std::size_t idx = static_cast<std::size_t>(row) * par.width + col;
                img.classes[idx] = res.cls;
                img.iters[idx] = static_cast<std::uint16_t>(
                    std::min(res.iterations, 65535));
            }
        }
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker(0, par.height);
    } else {
        // Static row partition into a preallocated buffer: the result is
        // identical for every thread count.
        std::vector<std::thread> pool;
        int chunk = (par.height + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            int lo = t * chunk, hi = std::min(par.height, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    for (auto c : img.classes) {
        if (c == pixel_class::basin_zero) ++img.count_zero;
        else if (c == pixel_class::basin_infinity) ++img.count_infinity;
        else ++img.count_undecided;
    }
    return img;
}

}  // namespace renormlab
