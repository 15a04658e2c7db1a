#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blaschke.hpp"
#include "circlemap.hpp"

namespace renormlab {

// Rigid rotation x + rho. Noncritical; serves as the closed-form oracle
// for all combinatorial machinery.
template <class Real = double>
circle_lift<Real> rigid_lift(Real rho) {
    if (!(rho > Real(0) && rho < Real(1)))
        throw std::domain_error("rigid_lift: rho must lie in (0,1)");
    struct rigid_model final : circle_lift<Real>::model {
        Real rho;
        explicit rigid_model(Real r) : rho(r) {}
        Real eval(Real x) const override { return x + rho; }
        bool has_analytic_derivative() const override { return true; }
        Real analytic_derivative(Real) const override { return Real(1); }
        bool has_critical_delta() const override { return true; }
        Real critical_delta(Real x) const override { return x; }
    };
    std::ostringstream name;
    name << "rigid(" << static_cast<double>(rho) << ")";
    return circle_lift<Real>(std::make_shared<rigid_model>(rho), 1, name.str());
}

// x + c + a*sin(2 pi x). Noncritical diffeomorphism lift for |2 pi a| < 1.
template <class Real = double>
circle_lift<Real> sine_lift(Real offset, Real amplitude) {
    struct sine_model final : circle_lift<Real>::model {
        Real c, a;
        sine_model(Real c_, Real a_) : c(c_), a(a_) {}
        Real eval(Real x) const override {
            return x + c + a * std::sin(2 * std::numbers::pi_v<Real> * x);
        }
        bool has_analytic_derivative() const override { return true; }
        Real analytic_derivative(Real x) const override {
            return Real(1) +
                   2 * std::numbers::pi_v<Real> * a *
                       std::cos(2 * std::numbers::pi_v<Real> * x);
        }
    };
    std::ostringstream name;
    name << "sine(" << static_cast<double>(offset) << "," << static_cast<double>(amplitude)
         << ")";
    return circle_lift<Real>(std::make_shared<sine_model>(offset, amplitude), 1,
                             name.str());
}

// Rigid rotation conjugated by the circle diffeomorphism
// c(x) = x + (a/2pi) sin(2 pi x), |a| < 1. Same rotation number as the
// rigid rotation; used as a conjugacy-invariance oracle.
template <class Real = double>
circle_lift<Real> rigid_conjugate_lift(Real rho, Real a) {
    if (!(std::abs(a) < Real(1)))
        throw std::domain_error("rigid_conjugate_lift: |a| must be < 1");
    struct conj_model final : circle_lift<Real>::model {
        Real rho, a;
        conj_model(Real r, Real a_) : rho(r), a(a_) {}
        Real h(Real x) const {
            return x + a / (2 * std::numbers::pi_v<Real>) *
                           std::sin(2 * std::numbers::pi_v<Real> * x);
        }
        Real h_prime(Real x) const {
            return Real(1) + a * std::cos(2 * std::numbers::pi_v<Real> * x);
        }
        Real h_inv(Real y) const {
            // Newton on the reduced fundamental domain; h - id is 1-periodic.
            Real w = std::floor(y);
            Real yr = y - w;
            Real x = yr;
            for (int i = 0; i < 60; ++i) {
                Real err = h(x) - yr;
                if (std::abs(err) < 4 * std::numeric_limits<Real>::epsilon()) break;
                x -= err / h_prime(x);
            }
            return x + w;
        }
        Real eval(Real x) const override { return h(h_inv(x) + rho); }
    };
    std::ostringstream name;
    name << "rigid_conj(" << static_cast<double>(rho) << "," << static_cast<double>(a)
         << ")";
    return circle_lift<Real>(std::make_shared<conj_model>(rho, a), 1, name.str());
}

// ---------------------------------------------------------------------------
// Registry of named analytic families with real parameter vectors. This is
// the entry point for user-supplied maps on the CLI.
// ---------------------------------------------------------------------------

struct family_entry {
    std::size_t arity;
    std::string help;
    std::function<circle_lift<double>(const std::vector<double>&)> make;
};

inline std::map<std::string, family_entry>& family_registry() {
    static std::map<std::string, family_entry> reg = [] {
        std::map<std::string, family_entry> r;
        r["rigid"] = {1, "rigid rho: rotation x + rho",
                      [](const std::vector<double>& p) { return rigid_lift(p[0]); }};
        r["sine"] = {2, "sine c,a: x + c + a sin(2 pi x), noncritical",
                     [](const std::vector<double>& p) { return sine_lift(p[0], p[1]); }};
        r["rigid-conjugated"] = {
            2, "rigid-conjugated rho,a: rigid rotation conjugated by a circle diffeo",
            [](const std::vector<double>& p) { return rigid_conjugate_lift(p[0], p[1]); }};
        r["blaschke"] = {2, "blaschke n,theta: degree-n Blaschke model restricted to S^1",
                         [](const std::vector<double>& p) {
                             auto B = build_blaschke(static_cast<int>(p[0]));
                             return blaschke_circle_lift<double>(B, p[1]);
                         }};
        r["blaschke-precomposed"] = {
            3,
            "blaschke-precomposed n,theta,a: Blaschke model precomposed with the "
            "disk automorphism (z+a)/(1+az)",
            [](const std::vector<double>& p) {
                auto B = build_blaschke(static_cast<int>(p[0]));
                return blaschke_circle_lift<double>(B, p[1], p[2]);
            }};
        return r;
    }();
    return reg;
}

inline void register_family(const std::string& name, family_entry entry) {
    family_registry()[name] = std::move(entry);
}

inline circle_lift<double> make_family(const std::string& name,
                                       const std::vector<double>& params) {
    auto& reg = family_registry();
    auto it = reg.find(name);
    if (it == reg.end())
        throw std::domain_error("unknown family '" + name + "'");
    if (params.size() != it->second.arity) {
        std::ostringstream msg;
        msg << "family '" << name << "' expects " << it->second.arity
            << " parameter(s), got " << params.size();
        throw std::domain_error(msg.str());
    }
    return it->second.make(params);
}

}  // namespace renormlab
