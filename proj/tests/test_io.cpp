#include <doctest.h>

#include <random>
#include <sstream>

#include <renormlab/families.hpp>
#include <renormlab/io.hpp>

using namespace renormlab;

TEST_CASE("run_config round-trips through JSON losslessly") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_int_distribution<int> small(1, 20);
    for (int trial = 0; trial < 50; ++trial) {
        run_config c;
        c.command = trial % 2 ? "renorm" : "julia";
        c.family = "blaschke";
        c.family_params = {3.0, unif(rng)};
        c.family_b = "rigid";
        c.family_b_params = {0.5 + unif(rng) * 0.1};
        c.target_terms = {1, 1, 1, static_cast<std::int64_t>(small(rng))};
        c.target_exhausted = trial % 3 == 0;
        c.n = 3 + 2 * (trial % 4);
        c.theta = unif(rng);
        c.depth = small(rng);
        c.tol = 1e-9 * unif(rng) * unif(rng);
        c.re_min = unif(rng);
        c.seed = static_cast<std::uint64_t>(trial) * 7919;
        c.threads = trial % 5;
        c.json_path = "out/report.json";
        c.csv_path = "table.csv";
        run_config back = json(json(c).dump() == "" ? json(c) : json::parse(json(c).dump()))
                              .get<run_config>();
        CHECK(back == c);
    }
}

TEST_CASE("model JSON schema: descending coefficients, n=3 frozen values") {
    auto B = build_blaschke(3);
    auto j = blaschke_to_json(B);
    CHECK(j["P"] == json::array({1, -3, 0, 0}));
    CHECK(j["Q"] == json::array({-3, 1}));
    CHECK(j["n"] == 3);
    CHECK(j["theta"] == 0.0);

    auto B2 = blaschke_from_json(j);
    CHECK(B2.P == B.P);
    CHECK(B2.Q == B.Q);

    auto bad = j;
    bad["P"][1] = -4;
    CHECK_THROWS_AS(blaschke_from_json(bad), std::invalid_argument);
}

TEST_CASE("CSV outputs embed a parseable config echo") {
    run_config cfg;
    cfg.command = "renorm";
    cfg.family = "rigid";
    cfg.family_params = {golden_mean};
    cfg.depth = 5;
    auto orbit = renorm_orbit(from_circle_map(rigid_lift(golden_mean), 0), 5);
    auto csv = renorm_csv(cfg, orbit);
    CHECK(csv.find("level,height,xi0") != std::string::npos);
    auto back = config_from_csv(csv);
    CHECK(back == cfg);

    // One data row per record.
    int rows = 0;
    std::istringstream lines(csv);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'l') ++rows;
    CHECK(rows == static_cast<int>(orbit.records.size()));
}

TEST_CASE("identical configs yield byte-identical CSV output") {
    run_config cfg;
    cfg.command = "convergence";
    cfg.family = "rigid";
    cfg.family_params = {golden_mean};
    cfg.family_b = "rigid-conjugated";
    cfg.family_b_params = {golden_mean, 0.4};
    cfg.depth = 6;
    auto run = [&] {
        auto rep = renorm_convergence(make_family(cfg.family, cfg.family_params),
                                      make_family(cfg.family_b, cfg.family_b_params),
                                      cfg.depth);
        return convergence_csv(cfg, rep);
    };
    CHECK(run() == run());
}

TEST_CASE("P6 raster bytes: header, size, payload determinism") {
    auto B = build_blaschke(3);
    raster_params par;
    par.width = 32;
    par.height = 24;
    par.max_iter = 60;
    auto img = julia_raster(B, par, 2);
    auto p6 = raster_to_p6(img);
    CHECK(p6.rfind("P6\n32 24\n255\n", 0) == 0);
    CHECK(p6.size() == std::string("P6\n32 24\n255\n").size() + 32 * 24 * 3);
    CHECK(p6 == raster_to_p6(julia_raster(B, par, 1)));

    auto side = raster_sidecar(run_config{}, img);
    CHECK(side["count_basin_zero"].get<std::int64_t>() == img.count_zero);
    CHECK(side["resolution"] == json::array({32, 24}));
}

TEST_CASE("config merge: flags beat file, file beats defaults") {
    run_config file;
    file.command = "tune";
    file.n = 5;
    file.depth = 12;
    file.tol_theta = 1e-6;
    file.target_terms = {2, 2, 2};

    run_config flags;  // as parsed: only --n was given
    flags.command = "tune";
    flags.n = 7;

    auto merged = merge_config(flags, file);
    CHECK(merged.n == 7);                             // flag wins
    CHECK(merged.depth == 12);                        // from file
    CHECK(merged.tol_theta == 1e-6);                  // from file
    CHECK(merged.target_terms == std::vector<std::int64_t>{2, 2, 2});
    CHECK(merged.command == "tune");
    CHECK(merged.seed == run_config{}.seed);          // untouched default
}

TEST_CASE("cf_to_json carries terms and the exhausted flag") {
    auto j = cf_to_json(continued_fraction::from_terms({1, 2}));
    CHECK(j["terms"] == json::array({1, 2}));
    CHECK(j["exhausted"] == true);
    CHECK(cf_to_json(golden_cf(3))["exhausted"] == false);
}
