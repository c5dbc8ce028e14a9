#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parajulia/cloud_io.hpp"
#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/harness.hpp"
#include "parajulia/map_spec.hpp"
#include "parajulia/measure.hpp"
#include "parajulia/pressure.hpp"
#include "parajulia/sampler.hpp"
#include "parajulia/spatial_index.hpp"
#include "parajulia/spectra.hpp"

using namespace parajulia;

namespace {

// Exit codes: 0 pass, 1 report failed its comparisons, 2 error.
constexpr int kFail = 1;
constexpr int kError = 2;

std::vector<double> dyadic_ladder(int k0, int k1) {
    std::vector<double> out;
    for (int k = k0; k <= k1; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

void print_report(const ComparisonReport& r) {
    std::cout << report_json(r) << "\n";
    std::cerr << (r.pass ? "PASS" : "FAIL") << " " << r.subject.substr(0, r.subject.find('\n')) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimension spectra of parabolic Julia sets"};
    app.require_subcommand(1);

    std::string config_path, outputs;
    auto* analyze = app.add_subcommand("analyze", "run the full pipeline from a config file");
    analyze->add_option("config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
    analyze->add_option("--outputs", outputs, "override the output directory");

    std::string map_path;
    auto* fixedpoints = app.add_subcommand("fixedpoints", "classify fixed points, report parabolic data as JSON");
    fixedpoints->add_option("map", map_path, "map file")->required()->check(CLI::ExistingFile);

    std::uint64_t seed = 1;
    std::size_t depth = 40, count = 100000;
    std::string out_path;
    auto* sample = app.add_subcommand("sample", "backward-orbit point cloud");
    sample->add_option("map", map_path, "map file")->required()->check(CLI::ExistingFile);
    sample->add_option("--seed", seed);
    sample->add_option("--depth", depth);
    sample->add_option("--count", count);
    sample->add_option("-o,--out", out_path, "output file (.csv for text, binary otherwise)")->required();

    int order = 0;
    std::string csv_path;
    auto* pressure = app.add_subcommand("pressure", "pressure zero h from periodic points");
    pressure->add_option("map", map_path, "map file")->required()->check(CLI::ExistingFile);
    pressure->add_option("--order", order, "period n (default picks one from the degree)");
    pressure->add_option("--csv", csv_path, "write P_n(t) on [0,2]");

    std::string xi_text;
    double r = 0.0, h = 1.0;
    int zoom_depth = 4000;
    auto* phi_cmd = app.add_subcommand("phi", "correction factor phi(xi, r) from the hyperbolic zoom");
    phi_cmd->set_help_flag("--help", "print help");
    phi_cmd->add_option("map", map_path, "map file")->required()->check(CLI::ExistingFile);
    phi_cmd->add_option("--xi", xi_text, "point, e.g. 0.1+0.2i")->required();
    phi_cmd->add_option("--r", r, "radius")->required();
    phi_cmd->add_option("--h", h, "conformal exponent")->required();
    phi_cmd->add_option("--depth", zoom_depth, "forward iterations");

    std::string cloud_path, kind = "assouad";
    std::vector<double> thetas{0.2, 0.35, 0.5, 0.65, 0.8};
    std::vector<double> ladder;
    std::size_t max_centers = 4096;
    auto* spectrum = app.add_subcommand("spectrum", "Assouad or lower spectrum of a stored cloud as CSV");
    spectrum->add_option("cloud", cloud_path, "cloud file")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--theta", thetas)->delimiter(',');
    spectrum->add_option("--r", ladder, "radii, strictly decreasing (default 2^-4..2^-11)")->delimiter(',');
    spectrum->add_option("--kind", kind)->check(CLI::IsMember({"assouad", "lower"}));
    spectrum->add_option("--max-centers", max_centers);

    std::string calib;
    std::size_t calib_size = 100000;
    auto* calibrate = app.add_subcommand("calibrate", "estimate a calibration set against its known spectrum");
    calibrate->add_option("kind", calib, "sequence:p, grid:d, circle or cantor:a")->required();
    calibrate->add_option("--size", calib_size);
    calibrate->add_option("--theta", thetas)->delimiter(',');
    calibrate->add_option("--outputs", outputs);

    double alpha = 0.0, delta = 0.0;
    bool circle = false;
    auto* rotdensity = app.add_subcommand("rotdensity", "least m making {k alpha mod 1 : k <= m} delta-dense");
    rotdensity->add_option("--alpha", alpha)->required();
    rotdensity->add_option("--delta", delta)->required();
    rotdensity->add_flag("--circle", circle, "measure the wraparound gap as a circle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            auto config = load_experiment_config(config_path);
            if (!outputs.empty()) config.outputs = outputs;
            const auto report = run_experiment(config);
            print_report(report);
            return report.pass ? 0 : kFail;
        }
        if (*fixedpoints) {
            std::cout << fixed_point_report_json(load_map_spec(map_path)) << "\n";
            return 0;
        }
        if (*sample) {
            const auto cloud = inverse_orbit_sample(load_map_spec(map_path), seed, depth, count);
            if (out_path.size() > 4 && out_path.ends_with(".csv")) {
                std::ofstream out(out_path);
                write_cloud_csv(out, cloud);
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
            } else {
                save_cloud(out_path, cloud);
            }
            std::cerr << cloud.size() << " points\n";
            return 0;
        }
        if (*pressure) {
            const auto map = load_map_spec(map_path);
            const int n = order > 0 ? order : default_order(map);
            const auto data = pressure_data(periodic_points(map, n), n);
            const int p = max_petal(parabolic_points_iterated(map));
            const auto est = solve_h(data, p);
            std::cout << "h," << format_double(est.h) << "\norder," << n << "\np_max," << p << "\nexcluded,"
                      << est.excluded << "\n";
            if (!csv_path.empty()) {
                std::vector<double> ts;
                for (int k = 0; k <= 40; ++k) ts.push_back(0.05 * k);
                std::ofstream out(csv_path);
                write_pressure_csv(out, pressure_curve(data, ts));
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + csv_path);
            }
            return 0;
        }
        if (*phi_cmd) {
            const auto map = load_map_spec(map_path);
            const int q = parabolic_period(map);
            const auto work = q > 1 ? iterate(map, q) : map;
            const auto pps = parabolic_points_iterated(map);
            const auto zoom = hyperbolic_zoom(work, pps, parse_complex(xi_text), zoom_depth);
            const auto e = phi(zoom, r, h);
            std::cout << "phi," << format_double(e.value) << "\nlog_phi," << format_double(e.log_value) << "\ncase,"
                      << to_string(e.case_tag) << "\nblock," << e.j_used << "\nr_m," << format_double(e.r_m)
                      << "\npetal," << e.petal << "\nlog_measure," << format_double(log_measure_ball(zoom, r, h))
                      << "\n";
            return 0;
        }
        if (*spectrum) {
            const auto cloud = load_cloud(cloud_path);
            if (ladder.empty()) ladder = dyadic_ladder(4, 11);
            const SpatialIndex index(cloud.points, {}, 0.25 * ladder.back());
            SpectrumOptions opts;
            opts.max_centers = max_centers;
            std::vector<SpectrumRow> rows;
            for (double t : thetas) {
                const auto est = kind == "assouad" ? assouad_spectrum(index, t, ladder, opts)
                                                   : lower_spectrum(index, t, ladder, opts);
                rows.push_back({t, est.exponent, est.fit_residual, kind, "estimate"});
            }
            write_spectrum_csv(std::cout, rows);
            return 0;
        }
        if (*calibrate) {
            std::ostringstream text;
            text << "calibration = " << calib << "\ncount = " << calib_size << "\ntheta_grid = ";
            for (std::size_t i = 0; i < thetas.size(); ++i) text << (i ? ", " : "") << format_double(thetas[i]);
            text << "\noutputs = " << (outputs.empty() ? "calibration-out" : outputs) << "\n";
            const auto report = run_experiment(parse_experiment_config(text.str()));
            print_report(report);
            return report.pass ? 0 : kFail;
        }
        if (*rotdensity) {
            std::cout << rotation_density(alpha, delta, circle ? DensityMetric::Circle : DensityMetric::Line) << "\n";
            return 0;
        }
    } catch (const StageError& e) {
        std::cerr << "error: stage=" << e.stage() << " " << e.what() << "\n";
        return kError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
