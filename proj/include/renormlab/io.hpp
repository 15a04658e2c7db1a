#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "blaschke.hpp"
#include "contfrac.hpp"
#include "experiments.hpp"
#include "pairs.hpp"

namespace renormlab {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// ---------------------------------------------------------------------------
// Run configuration. One flat struct for every subcommand; unused fields
// keep their defaults so the JSON round-trip is lossless and every report
// can embed the exact configuration that produced it.
// ---------------------------------------------------------------------------

struct run_config {
    std::string command;

    std::string family = "blaschke";
    std::vector<double> family_params;
    std::string family_b;
    std::vector<double> family_b_params;

    std::vector<std::int64_t> target_terms;
    bool target_exhausted = false;

    int n = 3;
    double theta = 0.0;
    double precompose_a = 0.0;

    int depth = 0;  // 0: per-command default (tune: derived from tol_theta)
    double tol = 1e-9;
    double tol_theta = 1e-10;
    std::int64_t max_orbit = 4'000'000;

    // Raster window and resolution.
    double re_min = -2, re_max = 2, im_min = -2, im_max = 2;
    int width = 800, height = 800;
    int max_iter = 1000;
    double r_in = 1e-6, r_out = 1e6;

    std::uint64_t seed = 1;
    int threads = 0;  // 0: decide from RENORMLAB_THREADS / hardware

    std::string json_path;
    std::string csv_path;
    std::string out_prefix;

    bool operator==(const run_config&) const = default;
};

inline void to_json(json& j, const run_config& c) {
    j = json{{"schema_version", schema_version},
             {"command", c.command},
             {"family", c.family},
             {"family_params", c.family_params},
             {"family_b", c.family_b},
             {"family_b_params", c.family_b_params},
             {"target_terms", c.target_terms},
             {"target_exhausted", c.target_exhausted},
             {"n", c.n},
             {"theta", c.theta},
             {"precompose_a", c.precompose_a},
             {"depth", c.depth},
             {"tol", c.tol},
             {"tol_theta", c.tol_theta},
             {"max_orbit", c.max_orbit},
             {"window", {c.re_min, c.re_max, c.im_min, c.im_max}},
             {"width", c.width},
             {"height", c.height},
             {"max_iter", c.max_iter},
             {"r_in", c.r_in},
             {"r_out", c.r_out},
             {"seed", c.seed},
             {"threads", c.threads},
             {"json_path", c.json_path},
             {"csv_path", c.csv_path},
             {"out_prefix", c.out_prefix}};
}

inline void from_json(const json& j, run_config& c) {
    j.at("command").get_to(c.command);
    j.at("family").get_to(c.family);
    j.at("family_params").get_to(c.family_params);
    j.at("family_b").get_to(c.family_b);
    j.at("family_b_params").get_to(c.family_b_params);
    j.at("target_terms").get_to(c.target_terms);
    j.at("target_exhausted").get_to(c.target_exhausted);
    j.at("n").get_to(c.n);
    j.at("theta").get_to(c.theta);
    j.at("precompose_a").get_to(c.precompose_a);
    j.at("depth").get_to(c.depth);
    j.at("tol").get_to(c.tol);
    j.at("tol_theta").get_to(c.tol_theta);
    j.at("max_orbit").get_to(c.max_orbit);
    auto w = j.at("window");
    c.re_min = w.at(0);
    c.re_max = w.at(1);
    c.im_min = w.at(2);
    c.im_max = w.at(3);
    j.at("width").get_to(c.width);
    j.at("height").get_to(c.height);
    j.at("max_iter").get_to(c.max_iter);
    j.at("r_in").get_to(c.r_in);
    j.at("r_out").get_to(c.r_out);
    j.at("seed").get_to(c.seed);
    j.at("threads").get_to(c.threads);
    j.at("json_path").get_to(c.json_path);
    j.at("csv_path").get_to(c.csv_path);
    j.at("out_prefix").get_to(c.out_prefix);
}

// ---------------------------------------------------------------------------
// Model serialization: coefficients in descending powers.
// ---------------------------------------------------------------------------

inline json blaschke_to_json(const blaschke_fraction& B) {
    std::vector<std::int64_t> p_desc(B.P.rbegin(), B.P.rend());
    std::vector<std::int64_t> q_desc(B.Q.rbegin(), B.Q.rend());
    return json{{"schema_version", schema_version},
                {"n", B.n},
                {"m", B.m},
                {"P", p_desc},
                {"Q", q_desc},
                {"theta", B.theta},
                {"derivative_constant", B.derivative_constant}};
}

inline blaschke_fraction blaschke_from_json(const json& j) {
    blaschke_fraction B = build_blaschke(j.at("n").get<int>());
    B.theta = j.at("theta").get<double>();
    std::vector<std::int64_t> p_desc = j.at("P"), q_desc = j.at("Q");
    poly::coeffs P(p_desc.rbegin(), p_desc.rend());
    poly::coeffs Q(q_desc.rbegin(), q_desc.rend());
    if (P != B.P || Q != B.Q)
        throw std::invalid_argument(
            "blaschke_from_json: coefficients do not satisfy the model identities");
    return B;
}

inline json cf_to_json(const continued_fraction& cf) {
    return json{{"terms", cf.terms()}, {"exhausted", cf.exhausted()}};
}

// ---------------------------------------------------------------------------
// CSV. Fixed column sets, full round-trip precision, a config-echo comment
// line on top so every file parses back to the run that made it.
// ---------------------------------------------------------------------------

namespace detail_io {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail_io

inline std::string csv_header(const run_config& cfg) {
    return "# config " + json(cfg).dump() + "\n";
}

inline std::string renorm_csv(const run_config& cfg,
                              const renorm_orbit_result<double>& orbit) {
    std::ostringstream out;
    out << csv_header(cfg);
    out << "level,height,xi0,len_I_eta,len_I_xi,ratio,commutation_residual,c0_distance\n";
    for (const auto& r : orbit.records) {
        out << r.level << ',' << (r.height_infinite ? "inf" : std::to_string(r.height_value))
            << ',' << detail_io::fmt(r.xi0) << ',' << detail_io::fmt(r.len_eta) << ','
            << detail_io::fmt(r.len_xi) << ',' << detail_io::fmt(r.ratio) << ','
            << detail_io::fmt(r.commutation_residual) << ',';
        if (r.c0_to_companion) out << detail_io::fmt(*r.c0_to_companion);
        out << '\n';
    }
    if (orbit.floor_truncated)
        out << "# warning: truncated at the precision floor\n";
    return out.str();
}

inline std::string universality_csv(const run_config& cfg, const universality_report& rep) {
    std::ostringstream out;
    out << csv_header(cfg);
    out << "level";
    for (std::size_t f = 0; f < rep.ratios.size(); ++f) out << ",s_family" << f;
    out << ",max_rel_discrepancy,c0_distance\n";
    for (int lvl = 0; lvl < rep.certified_depth; ++lvl) {
        out << lvl;
        for (const auto& r : rep.ratios) out << ',' << detail_io::fmt(r[lvl]);
        out << ',' << detail_io::fmt(rep.max_rel_discrepancy[lvl]) << ','
            << (lvl < static_cast<int>(rep.pair_c0_distance.size())
                    ? detail_io::fmt(rep.pair_c0_distance[lvl])
                    : "")
            << '\n';
    }
    if (rep.floor_truncated) out << "# warning: truncated at the precision floor\n";
    return out.str();
}

inline std::string convergence_csv(const run_config& cfg, const convergence_report& rep) {
    std::ostringstream out;
    out << csv_header(cfg);
    out << "level,c0_distance\n";
    for (int m = 0; m < rep.certified_depth; ++m)
        out << m << ',' << detail_io::fmt(rep.distances[m]) << '\n';
    if (rep.floor_truncated) out << "# warning: truncated at the precision floor\n";
    return out.str();
}

inline std::string delta_csv(const run_config& cfg, const delta_report& rep) {
    std::ostringstream out;
    out << csv_header(cfg);
    out << "m,theta_m,ratio_d_m\n";
    for (std::size_t i = 0; i < rep.theta_m.size(); ++i) {
        out << (i + 1) << ',' << detail_io::fmt(rep.theta_m[i]) << ',';
        // d_m is defined for m = 2..depth-1 and sits on the row of theta_m.
        if (i >= 1 && i - 1 < rep.ratios.size()) out << detail_io::fmt(rep.ratios[i - 1]);
        out << '\n';
    }
    if (rep.floor_truncated) out << "# warning: truncated at the precision floor\n";
    return out.str();
}

inline run_config config_from_csv(const std::string& csv) {
    if (csv.rfind("# config ", 0) != 0)
        throw std::invalid_argument("config_from_csv: missing config echo");
    auto eol = csv.find('\n');
    return json::parse(csv.substr(9, eol - 9)).get<run_config>();
}

// ---------------------------------------------------------------------------
// Raster output: binary P6 plus a JSON sidecar with window and counts.
// ---------------------------------------------------------------------------

inline std::string raster_to_p6(const raster_image& img) {
    std::ostringstream out;
    out << "P6\n" << img.params.width << ' ' << img.params.height << "\n255\n";
    for (std::size_t i = 0; i < img.classes.size(); ++i) {
        int it = img.iters[i];
        unsigned char rgb[3] = {0, 0, 0};
        int ramp = std::min(215, it * 12);
        switch (img.classes[i]) {
            case pixel_class::basin_zero:
                rgb[0] = 0;
                rgb[1] = static_cast<unsigned char>(40 + ramp);
                rgb[2] = 255;
                break;
            case pixel_class::basin_infinity:
                rgb[0] = 255;
                rgb[1] = static_cast<unsigned char>(40 + ramp);
                rgb[2] = 0;
                break;
            case pixel_class::undecided:
                break;
        }
        out.write(reinterpret_cast<const char*>(rgb), 3);
    }
    return out.str();
}

inline json raster_sidecar(const run_config& cfg, const raster_image& img) {
    return json{{"schema_version", schema_version},
                {"config", cfg},
                {"window", {img.params.re_min, img.params.re_max, img.params.im_min,
                            img.params.im_max}},
                {"resolution", {img.params.width, img.params.height}},
                {"max_iter", img.params.max_iter},
                {"r_in", img.params.r_in},
                {"r_out", img.params.r_out},
                {"count_basin_zero", img.count_zero},
                {"count_basin_infinity", img.count_infinity},
                {"count_undecided", img.count_undecided},
                {"classified_fraction", img.classified_fraction()}};
}

inline std::string read_file(const std::string& path);

// Precedence: flags > file > defaults. `flags` holds the parsed command
// line; any field still at its default takes the file's value.
inline run_config merge_config(const run_config& flags, const run_config& file) {
    json merged = json(file);
    json jflags = json(flags);
    json jdefaults = json(run_config{});
    for (auto it = jflags.begin(); it != jflags.end(); ++it)
        if (!jdefaults.contains(it.key()) || jdefaults[it.key()] != it.value())
            merged[it.key()] = it.value();
    merged["command"] = flags.command;
    return merged.get<run_config>();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace renormlab
