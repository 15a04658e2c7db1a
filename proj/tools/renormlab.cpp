// renormlab: numerical laboratory for unicritical circle-map renormalization.
//
// Subcommands: model, tune, renorm, universality, convergence, delta, julia.
// Reports are JSON (with the full run configuration embedded) and CSV with
// fixed columns; rasters are binary P6 with a JSON sidecar.
//
// Exit codes: 0 success, 1 results truncated at the precision floor,
// 2 invalid input.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <renormlab/blaschke.hpp>
#include <renormlab/circlemap.hpp>
#include <renormlab/contfrac.hpp>
#include <renormlab/experiments.hpp>
#include <renormlab/families.hpp>
#include <renormlab/io.hpp>
#include <renormlab/pairs.hpp>

namespace {

using namespace renormlab;

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RENORMLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

int depth_or(const run_config& cfg, int fallback) {
    return cfg.depth > 0 ? cfg.depth : fallback;
}

continued_fraction target_of(const run_config& cfg) {
    if (cfg.target_terms.empty())
        throw std::domain_error("no --target terms given");
    return cfg.target_exhausted ? continued_fraction::from_terms(cfg.target_terms)
                                : continued_fraction::truncated(cfg.target_terms);
}

circle_lift<double> lift_of(const std::string& family, const std::vector<double>& params,
                            const run_config& cfg) {
    if (!family.empty()) return make_family(family, params);
    auto B = build_blaschke(cfg.n);
    return blaschke_circle_lift<double>(B, cfg.theta, cfg.precompose_a);
}

void emit(const run_config& cfg, const json& report, const std::string& csv) {
    if (!cfg.csv_path.empty() && !csv.empty()) write_file(cfg.csv_path, csv);
    if (!cfg.json_path.empty())
        write_file(cfg.json_path, report.dump(2) + "\n");
    else
        std::cout << report.dump(2) << "\n";
}

int cmd_model(const run_config& cfg) {
    auto B = build_blaschke(cfg.n);
    B.theta = cfg.theta;

    // Sampled invariant report on top of the exact construction checks.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_modulus = 0;
    for (int i = 0; i < 1000; ++i) {
        auto z = std::polar(1.0, 2 * std::numbers::pi * unif(rng));
        worst_modulus =
            std::max(worst_modulus, std::abs(std::abs(blaschke_eval(B, z)) - 1.0));
    }
    bool circle_ok = worst_modulus < 1e-12;

    json report = blaschke_to_json(B);
    report["config"] = cfg;
    report["invariants"] = {{"identity_P_minus_Q", true},  // asserted at build
                            {"reversal_Q", true},          // asserted at build
                            {"derivative_factorization", true},
                            {"max_circle_modulus_error", worst_modulus},
                            {"circle_symmetry_ok", circle_ok}};
    emit(cfg, report, "");
    return circle_ok ? 0 : 2;
}

int cmd_tune(const run_config& cfg) {
    auto target = target_of(cfg);
    auto tuned = tune_theta<double>(cfg.n, target, cfg.tol_theta, cfg.depth,
                                    cfg.precompose_a, cfg.max_orbit);
    json report{{"schema_version", schema_version},
                {"config", cfg},
                {"theta", tuned.theta},
                {"bracket", {tuned.bracket_lo, tuned.bracket_hi}},
                {"depth_used", tuned.depth_used},
                {"depth_capped", tuned.depth_capped},
                {"achieved_rho", tuned.achieved.rho},
                {"achieved_error_bound", tuned.achieved.error_bound},
                {"achieved_cf_prefix", cf_to_json(tuned.achieved.cf_prefix)},
                {"orbit_length", tuned.achieved.orbit_length}};
    emit(cfg, report, "");
    return tuned.depth_capped ? 1 : 0;
}

int cmd_renorm(const run_config& cfg) {
    auto f = lift_of(cfg.family, cfg.family_params, cfg);
    auto zeta = from_circle_map(f, 0, cfg.max_orbit);
    // Optional companion family: per-level C0 distances come along.
    commuting_pair<double> comp;
    bool with_companion = !cfg.family_b.empty();
    if (with_companion)
        comp = from_circle_map(make_family(cfg.family_b, cfg.family_b_params), 0,
                               cfg.max_orbit);
    auto orbit = renorm_orbit(zeta, depth_or(cfg, 8), with_companion ? &comp : nullptr);
    json levels = json::array();
    for (const auto& r : orbit.records) {
        json lvl{{"level", r.level},
                 {"height", r.height_infinite ? json("inf") : json(r.height_value)},
                 {"xi0", r.xi0},
                 {"len_I_eta", r.len_eta},
                 {"len_I_xi", r.len_xi},
                 {"ratio", r.ratio},
                 {"commutation_residual", r.commutation_residual}};
        if (r.c0_to_companion) lvl["c0_distance"] = *r.c0_to_companion;
        levels.push_back(lvl);
    }
    json report{{"schema_version", schema_version},
                {"config", cfg},
                {"family", f.name()},
                {"levels", levels},
                {"floor_truncated", orbit.floor_truncated},
                {"infinite_height", orbit.infinite_hit}};
    emit(cfg, report, renorm_csv(cfg, orbit));
    return orbit.floor_truncated ? 1 : 0;
}

int cmd_universality(const run_config& cfg) {
    auto fa = lift_of(cfg.family, cfg.family_params, cfg);
    auto fb = lift_of(cfg.family_b, cfg.family_b_params, cfg);
    auto rep = universality_compare({fa, fb}, target_of(cfg), depth_or(cfg, 10),
                                    cfg.max_orbit);
    json report{{"schema_version", schema_version},
                {"config", cfg},
                {"exponent", rep.exponent},
                {"ratios", rep.ratios},
                {"max_rel_discrepancy", rep.max_rel_discrepancy},
                {"pair_c0_distance", rep.pair_c0_distance},
                {"certified_depth", rep.certified_depth},
                {"floor_truncated", rep.floor_truncated}};
    emit(cfg, report, universality_csv(cfg, rep));
    return rep.floor_truncated ? 1 : 0;
}

int cmd_convergence(const run_config& cfg) {
    auto fa = lift_of(cfg.family, cfg.family_params, cfg);
    auto fb = lift_of(cfg.family_b, cfg.family_b_params, cfg);
    auto rep = renorm_convergence(fa, fb, depth_or(cfg, 8), cfg.max_orbit);
    json report{{"schema_version", schema_version},
                {"config", cfg},
                {"distances", rep.distances},
                {"certified_depth", rep.certified_depth},
                {"floor_truncated", rep.floor_truncated}};
    emit(cfg, report, convergence_csv(cfg, rep));
    return rep.floor_truncated ? 1 : 0;
}

int cmd_delta(const run_config& cfg) {
    auto rep = delta_estimate(cfg.n, target_of(cfg), depth_or(cfg, 8), cfg.max_orbit);
    json report{{"schema_version", schema_version},
                {"config", cfg},
                {"theta_star", rep.theta_star},
                {"theta_m", rep.theta_m},
                {"ratios", rep.ratios},
                {"stabilized_at", rep.stabilized_at},
                {"floor_truncated", rep.floor_truncated}};
    emit(cfg, report, delta_csv(cfg, rep));
    return rep.floor_truncated ? 1 : 0;
}

int cmd_julia(const run_config& cfg) {
    auto B = build_blaschke(cfg.n);
    B.theta = cfg.theta;
    raster_params par;
    par.re_min = cfg.re_min;
    par.re_max = cfg.re_max;
    par.im_min = cfg.im_min;
    par.im_max = cfg.im_max;
    par.width = cfg.width;
    par.height = cfg.height;
    par.max_iter = cfg.max_iter;
    par.r_in = cfg.r_in;
    par.r_out = cfg.r_out;
    auto img = julia_raster(B, par, resolve_threads(cfg.threads));
    std::string prefix = cfg.out_prefix.empty() ? "julia" : cfg.out_prefix;
    write_file(prefix + ".ppm", raster_to_p6(img));
    write_file(prefix + ".json", raster_sidecar(cfg, img).dump(2) + "\n");
    std::cout << "wrote " << prefix << ".ppm (" << img.params.width << "x"
              << img.params.height << "), classified fraction "
              << img.classified_fraction() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "renormlab: renormalization laboratory for unicritical analytic circle maps"};
    app.require_subcommand(1);

    run_config cfg;
    std::string config_path;
    std::string window_spec, res_spec;

    // Long flags only; a JSON config file may supply any field and explicit
    // flags override it.
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        sub->add_option("--json", cfg.json_path, "write the JSON report here");
        sub->add_option("--csv", cfg.csv_path, "write the CSV table here");
        sub->add_option("--seed", cfg.seed, "seed for sampled diagnostics");
        sub->add_option("--threads", cfg.threads,
                        "worker threads (default: RENORMLAB_THREADS or all cores)");
        sub->add_option("--max-orbit", cfg.max_orbit, "orbit evaluation budget");
    };
    auto add_family = [&](CLI::App* sub, bool second) {
        sub->add_option("--family", cfg.family,
                        "family name: rigid | sine | rigid-conjugated | blaschke | "
                        "blaschke-precomposed");
        sub->add_option("--fparams", cfg.family_params, "family parameters")
            ->delimiter(',');
        if (second) {
            sub->add_option("--family-b", cfg.family_b, "second family name");
            sub->add_option("--fparams-b", cfg.family_b_params,
                            "second family parameters")
                ->delimiter(',');
        }
    };
    auto add_target = [&](CLI::App* sub) {
        sub->add_option("--target", cfg.target_terms,
                        "target rotation number as continued-fraction terms")
            ->delimiter(',');
        sub->add_flag("--target-exhausted", cfg.target_exhausted,
                      "terms are the complete (rational) expansion");
    };

    auto* model = app.add_subcommand("model", "build the degree-n model and check it");
    model->add_option("--n", cfg.n, "odd critical exponent >= 3");
    model->add_option("--theta", cfg.theta, "rotation phase in [0,1)");
    add_common(model);

    auto* tune = app.add_subcommand("tune", "tune theta to a target rotation number");
    tune->add_option("--n", cfg.n, "odd critical exponent >= 3");
    tune->add_option("--tol", cfg.tol_theta, "theta bracket tolerance");
    tune->add_option("--depth", cfg.depth,
                     "continued-fraction decision depth (0 = from tolerance)");
    tune->add_option("--precompose-a", cfg.precompose_a, "precomposition parameter");
    add_target(tune);
    add_common(tune);

    auto* renorm = app.add_subcommand("renorm", "renormalization orbit of one family");
    renorm->add_option("--n", cfg.n, "exponent when no --family is given");
    renorm->add_option("--theta", cfg.theta, "phase when no --family is given");
    renorm->add_option("--depth", cfg.depth, "renormalization depth (default 8)");
    renorm->footer("CSV columns: level,height,xi0,len_I_eta,len_I_xi,ratio,"
                   "commutation_residual,c0_distance (last column only with "
                   "--family-b)");
    add_family(renorm, true);
    add_common(renorm);

    auto* universality =
        app.add_subcommand("universality", "scaling ratios across two families");
    universality->add_option("--depth", cfg.depth, "ladder depth (default 10)");
    universality->footer(
        "CSV columns: level,s_family0,s_family1,max_rel_discrepancy,c0_distance");
    add_family(universality, true);
    add_target(universality);
    add_common(universality);

    auto* convergence =
        app.add_subcommand("convergence", "C0 distances of renormalized pairs");
    convergence->add_option("--depth", cfg.depth, "renormalization depth (default 8)");
    convergence->footer("CSV columns: level,c0_distance");
    add_family(convergence, true);
    add_common(convergence);

    auto* delta = app.add_subcommand("delta", "unstable-eigenvalue probe");
    delta->add_option("--n", cfg.n, "odd critical exponent >= 3");
    delta->add_option("--depth", cfg.depth, "periodic-parameter depth (default 8)");
    delta->footer("CSV columns: m,theta_m,ratio_d_m");
    add_target(delta);
    add_common(delta);

    auto* julia = app.add_subcommand("julia", "escape-time raster of the model map");
    julia->add_option("--n", cfg.n, "odd critical exponent >= 3");
    julia->add_option("--theta", cfg.theta, "rotation phase in [0,1)");
    julia->add_option("--window", window_spec, "re_min,re_max,im_min,im_max");
    julia->add_option("--res", res_spec, "WIDTHxHEIGHT");
    julia->add_option("--max-iter", cfg.max_iter, "iteration cap per pixel");
    julia->add_option("--r-in", cfg.r_in, "basin-of-zero capture radius");
    julia->add_option("--r-out", cfg.r_out, "escape radius");
    julia->add_option("--out", cfg.out_prefix, "output prefix (.ppm and .json)");
    add_common(julia);

    CLI11_PARSE(app, argc, argv);
    auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();

    try {
        if (!config_path.empty())
            cfg = merge_config(cfg, json::parse(read_file(config_path)).get<run_config>());
        if (!window_spec.empty()) {
            std::vector<double> w;
            std::stringstream ss(window_spec);
            std::string tok;
            while (std::getline(ss, tok, ',')) w.push_back(std::stod(tok));
            if (w.size() != 4) throw std::domain_error("--window needs 4 numbers");
            cfg.re_min = w[0];
            cfg.re_max = w[1];
            cfg.im_min = w[2];
            cfg.im_max = w[3];
        }
        if (!res_spec.empty()) {
            auto x = res_spec.find('x');
            if (x == std::string::npos)
                throw std::domain_error("--res needs WIDTHxHEIGHT");
            cfg.width = std::stoi(res_spec.substr(0, x));
            cfg.height = std::stoi(res_spec.substr(x + 1));
        }

        if (cfg.command == "model") return cmd_model(cfg);
        if (cfg.command == "tune") return cmd_tune(cfg);
        if (cfg.command == "renorm") return cmd_renorm(cfg);
        if (cfg.command == "universality") return cmd_universality(cfg);
        if (cfg.command == "convergence") return cmd_convergence(cfg);
        if (cfg.command == "delta") return cmd_delta(cfg);
        if (cfg.command == "julia") return cmd_julia(cfg);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
