// frd: finite-range decomposition of lattice resolvents and stable-Levy
// Green's functions. Subcommands construct the objects, verify the properties
// they are supposed to have, and emit JSON reports plus CSV kernels.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "frd/cache.hpp"
#include "frd/decomposition.hpp"
#include "frd/levy.hpp"
#include "frd/sampling.hpp"
#include "frd/torus.hpp"
#include "frd/verify.hpp"

namespace {

struct GlobalArgs {
    int dim = 2;
    int L = 2;
    int levels = 2;
    std::vector<double> mass{1.0};
    double alpha = 1.0;
    double tol = 1e-8;
    std::uint64_t seed = 20240817;
    int threads = 1;
    std::string cache_dir;
    std::string out_dir = ".";
    std::string momentum; // comma-separated components
};

int log2_int(int L) {
    int p = 0;
    while ((1 << p) < L) ++p;
    if ((1 << p) != L) throw frd::ConfigError("L must be a power of two");
    return p;
}

frd::MomentumPoint parse_momentum(const std::string& text, int d) {
    frd::MomentumPoint p;
    std::stringstream ss(text);
    std::string item;
    int mu = 0;
    while (std::getline(ss, item, ',') && mu < d) p[mu++] = std::stod(item);
    return p;
}

void write_kernel_csv(const std::string& path, const frd::LatticeKernel& kernel) {
    std::ofstream out(path);
    out.precision(17);
    for (int mu = 0; mu < kernel.dim(); ++mu) out << "x" << (mu + 1) << ",";
    out << "value\n";
    kernel.for_each([&](const frd::Site& x, double v) {
        if (v == 0.0) return;
        for (int mu = 0; mu < kernel.dim(); ++mu) out << x[mu] << ",";
        out << v << "\n";
    });
}

void write_field_csv(const std::string& path, const std::vector<double>& field, int d, int M) {
    std::ofstream out(path);
    out.precision(17);
    for (int mu = 0; mu < d; ++mu) out << "x" << (mu + 1) << ",";
    out << "value\n";
    frd::for_each_grid_index(d, M, [&](std::size_t flat, const std::array<int, frd::kMaxDim>& k) {
        for (int mu = 0; mu < d; ++mu) out << k[mu] << ",";
        out << field[flat] << "\n";
    });
}

frd::BuildOptions build_options(const GlobalArgs& g, std::unique_ptr<frd::KernelCache>& cache) {
    frd::BuildOptions opt;
    opt.threads = g.threads;
    if (!g.cache_dir.empty()) {
        cache = std::make_unique<frd::KernelCache>(g.cache_dir);
        opt.cache = cache.get();
    }
    return opt;
}

std::string out_path(const GlobalArgs& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    return g.out_dir + "/" + name;
}

int finish(const GlobalArgs& g, frd::Report& report, const std::string& name) {
    report.print_check_lines(std::cout);
    report.save(out_path(g, name));
    std::cout << "report: " << out_path(g, name) << "\n";
    return report.all_passed() ? 0 : 1;
}

int run_poisson(const GlobalArgs& g, double R, long walks) {
    frd::LatticeSpec spec(g.dim, 1, 0);
    frd::CubeDomain cube(spec, R);
    double a = g.mass.front();
    frd::DirichletSolver solver(cube, a);
    frd::Site x{0, 0, 0, 0};
    frd::PoissonKernelRow row = solver.poisson_row(x);

    frd::Report report("poisson");
    report.add_data("d", g.dim);
    report.add_data("R", R);
    report.add_data("a", a);
    report.add_data("mass", row.mass());
    report.add_data("defect", row.defect());
    report.add_data("defect_bound", a * R * R / 2);
    report.add_check({"poisson.defect", "0 <= 1 - mass <= a R^2/2",
                      row.defect() >= -1e-12 && row.defect() <= a * R * R / 2 + 1e-12,
                      row.defect(), a * R * R / 2, ""});
    if (walks > 0) {
        frd::WalkEstimate mc = frd::walk_exit_oracle(cube, a, x, walks, g.seed);
        double tv = frd::total_variation(row, mc.row);
        double agg = mc.aggregate_std_error();
        report.add_data("walk_tv", tv);
        report.add_data("walk_aggregate_se", agg);
        report.add_check({"poisson.oracle", "TV distance <= 4 x aggregate std error",
                          tv <= 4 * agg, tv, 4 * agg, std::to_string(walks) + " walks"});
    }
    // kernel row as offsets over the boundary
    {
        std::ofstream out(out_path(g, "poisson_kernel.csv"));
        out.precision(17);
        for (int mu = 0; mu < g.dim; ++mu) out << "x" << (mu + 1) << ",";
        out << "weight\n";
        for (std::size_t j = 0; j < cube.boundary().size(); ++j) {
            for (int mu = 0; mu < g.dim; ++mu) out << cube.boundary()[j][mu] << ",";
            out << row.weights[j] << "\n";
        }
    }
    return finish(g, report, "poisson_report.json");
}

int run_averaging(const GlobalArgs& g, int m) {
    std::unique_ptr<frd::KernelCache> cache;
    frd::BuildOptions opt = build_options(g, cache);
    frd::LatticeSpec spec(g.dim, log2_int(g.L), g.levels);
    frd::BumpProfile bump(g.dim, g.L);
    double a = g.mass.front();
    frd::AveragingKernel kernel = frd::build_averaging_kernel(spec, m, a, bump, opt);

    frd::Report report("averaging");
    report.add_data("mass", kernel.mass);
    report.add_data("defect", kernel.defect());
    report.add_data("support_radius", kernel.density.support_radius());
    report.add_check({"averaging.defect", "0 <= 1 - mass <= a R^2/2",
                      kernel.defect() >= -1e-12 &&
                          kernel.defect() <= kernel.defect_bound() + 1e-12,
                      kernel.defect(), kernel.defect_bound(), ""});
    report.add_check({"averaging.range", "support radius <= R + R/4",
                      kernel.density.support_radius() <= 1.25 * kernel.R + spec.epsilon(),
                      kernel.density.support_radius(), 1.25 * kernel.R, ""});
    write_kernel_csv(out_path(g, "averaging_kernel.csv"), kernel.density);
    return finish(g, report, "averaging_report.json");
}

int run_fluctuation(const GlobalArgs& g) {
    std::unique_ptr<frd::KernelCache> cache;
    frd::BuildOptions opt = build_options(g, cache);
    frd::KernelWorkspace ws(g.dim, log2_int(g.L), opt);
    double a = g.mass.front();
    double margin = 0;
    int M = 0;
    frd::LatticeKernel gamma = frd::fluctuation_position(ws, g.levels, a, &margin, &M);

    frd::Report report("fluctuation");
    report.add_data("gamma0", gamma.at(frd::Site{0, 0, 0, 0}));
    report.add_data("grid_M", M);
    report.add_check({"fluctuation.range", "zero beyond 3L to 1e-9 relative", margin <= 1e-9,
                      margin, 1e-9, ""});
    write_kernel_csv(out_path(g, "fluctuation_kernel.csv"), gamma);
    return finish(g, report, "fluctuation_report.json");
}

int run_decompose(const GlobalArgs& g) {
    std::unique_ptr<frd::KernelCache> cache;
    frd::BuildOptions opt = build_options(g, cache);
    frd::KernelWorkspace ws(g.dim, log2_int(g.L), opt);

    frd::Report report("decompose");
    nlohmann::json levels = nlohmann::json::array();
    for (double a : g.mass) {
        // a single momentum may be supplied to probe one reconstruction point
        if (!g.momentum.empty()) {
            frd::MomentumPoint p = parse_momentum(g.momentum, g.dim);
            frd::Reconstruction rec = frd::reconstruct_green(ws, a, g.levels, p);
            report.add_check({"decompose.reconstruct_at_p",
                              "reconstruction residual at --p", rec.residual <= 1e-8,
                              rec.residual, 1e-8, g.momentum});
        }
        for (int n = 0; n <= g.levels; ++n) {
            frd::DecompositionLevel lvl = frd::rescaled_fluctuation(ws, n, a);
            nlohmann::json entry;
            entry["level"] = n;
            entry["a"] = a;
            entry["range_margin"] = lvl.range_margin;
            entry["min_spectrum"] = lvl.psd_min;
            nlohmann::json sob;
            for (auto [k, v] : lvl.sobolev) sob[std::to_string(k)] = v;
            entry["sobolev"] = sob;
            // reconstruction residuals at a few fixed momenta
            nlohmann::json res = nlohmann::json::array();
            if (n >= 1) {
                for (double scale : {0.3, 1.0, 2.0}) {
                    frd::MomentumPoint p;
                    for (int mu = 0; mu < g.dim; ++mu) p[mu] = scale / (mu + 1);
                    frd::Reconstruction rec = frd::reconstruct_green(ws, a, n, p);
                    res.push_back(rec.residual);
                    report.add_check({"decompose.reconstruct",
                                      "reconstruction residual (n=" + std::to_string(n) + ")",
                                      rec.residual <= 1e-8, rec.residual, 1e-8, ""});
                }
            }
            entry["reconstruction_residuals"] = res;
            levels.push_back(entry);
            report.add_check({"decompose.range", "range margin (n=" + std::to_string(n) + ")",
                              lvl.range_margin <= 1e-9, lvl.range_margin, 1e-9, ""});
            report.add_check({"decompose.psd", "PSD margin (n=" + std::to_string(n) + ")",
                              lvl.psd_min >= -1e-10 * lvl.psd_max, lvl.psd_min,
                              -1e-10 * lvl.psd_max, ""});
            std::ostringstream name;
            name << "gamma_n" << n << "_a" << a << ".csv";
            write_kernel_csv(out_path(g, name.str()), lvl.gamma);
        }
    }
    report.add_data("levels", levels);
    return finish(g, report, "decompose_report.json");
}

int run_levy(const GlobalArgs& g) {
    std::unique_ptr<frd::KernelCache> cache;
    frd::BuildOptions opt = build_options(g, cache);
    frd::KernelWorkspace ws(g.dim, log2_int(g.L), opt);
    frd::LevyParams q = frd::build_quadrature(g.alpha, g.tol, g.L);

    frd::Report report("levy");
    report.add_data("alpha", g.alpha);
    report.add_data("nodes", q.masses.size());
    report.add_data("truncation_estimate", q.truncation_estimate);
    for (double t : {0.5, 1.0, 3.0}) {
        double r = frd::scalar_identity_residual(q, t);
        report.add_check({"levy.identity", "t^{-alpha/2} reproduction at t=" + std::to_string(t),
                          r <= 1e-6, r, 1e-6, ""});
    }
    frd::MomentumPoint p;
    for (int mu = 0; mu < g.dim; ++mu) p[mu] = 1.0 / (mu + 1);
    frd::LevyReconstruction rec = frd::levy_reconstruct(ws, q, std::max(1, g.levels - 1), p);
    report.add_data("reconstruction",
                    {{"exact", rec.exact},
                     {"direct", rec.direct},
                     {"sum", rec.sum},
                     {"residual_direct", rec.residual_direct},
                     {"residual_sum", rec.residual_sum}});
    report.add_check({"levy.direct", "quadrature vs (-Lap)^{-alpha/2}",
                      rec.residual_direct <= 1e-6, rec.residual_direct, 1e-6, ""});
    report.add_check({"levy.sum", "telescoped sum vs direct integral", rec.residual_sum <= 1e-6,
                      rec.residual_sum, 1e-6, ""});
    for (int j = 0; j < g.levels; ++j) {
        frd::LevyLevel lvl = frd::levy_fluctuation(ws, q, j);
        report.add_check({"levy.range", "Levy Gamma_j range margin (j=" + std::to_string(j) + ")",
                          lvl.range_margin <= 1e-9, lvl.range_margin, 1e-9, ""});
        report.add_check({"levy.psd", "Levy Gamma_j PSD (j=" + std::to_string(j) + ")",
                          lvl.psd_min >= -1e-10 * lvl.psd_max, lvl.psd_min,
                          -1e-10 * lvl.psd_max, ""});
        std::ostringstream name;
        name << "levy_gamma_j" << j << ".csv";
        write_kernel_csv(out_path(g, name.str()), lvl.gamma);
    }
    return finish(g, report, "levy_report.json");
}

int run_sample(const GlobalArgs& g, long n_samples, const std::string& out_csv) {
    std::unique_ptr<frd::KernelCache> cache;
    frd::BuildOptions opt = build_options(g, cache);
    frd::KernelWorkspace ws(g.dim, log2_int(g.L), opt);
    double a = g.mass.front();

    std::vector<frd::DecompositionLevel> built;
    for (int j = 0; j < g.levels; ++j) {
        double aj = a * std::pow(static_cast<double>(g.L), 2.0 * j);
        built.push_back(frd::rescaled_fluctuation(ws, j, aj, 0));
    }
    std::vector<const frd::DecompositionLevel*> levels;
    for (const auto& lvl : built) levels.push_back(&lvl);

    int need = 0;
    for (const auto& lvl : built)
        need = std::max(need, 2 * frd::provable_range_sites(lvl.spec, lvl.level) + 1);
    int M = frd::pow2_at_least(need);
    double phi_dim = 0.5 * (g.dim - 2);

    frd::Report report("sample");
    report.add_data("M", M);
    report.add_data("torus_surrogate", true);
    report.add_data("phi_dim", phi_dim);
    frd::SynthesisResult synth = frd::synthesize(levels, M, phi_dim, g.seed);
    write_field_csv(out_path(g, out_csv), synth.phi, g.dim, M);

    // empirical variance against the exact level sum
    double expect = frd::synthesis_covariance(levels, M, phi_dim, frd::Site{0, 0, 0, 0});
    double sum = 0, sumsq = 0;
    std::uint64_t seed = g.seed;
    for (long s = 0; s < n_samples; ++s) {
        frd::SynthesisResult one = frd::synthesize(levels, M, phi_dim, ++seed);
        double v = one.phi[0];
        sum += v * v;
        sumsq += v * v * v * v;
    }
    double mean = sum / n_samples;
    double se = std::sqrt(std::max(0.0, sumsq / n_samples - mean * mean) / n_samples);
    report.add_data("empirical_variance", mean);
    report.add_data("exact_variance", expect);
    report.add_check({"sample.variance", "Var phi(0) within 4 sigma of the exact level sum",
                      std::fabs(mean - expect) <= 4 * se + 1e-12, std::fabs(mean - expect),
                      4 * se, std::to_string(n_samples) + " samples"});
    return finish(g, report, "sample_report.json");
}

int run_verify(const GlobalArgs& g, bool quick) {
    frd::verify::Options opt;
    opt.threads = g.threads;
    opt.cache_dir = g.cache_dir;
    opt.seed = g.seed;
    opt.quick = quick;
    frd::Report report = frd::verify::run_all(opt, std::cout);
    report.save(out_path(g, "verify_report.json"));
    std::cout << "report: " << out_path(g, "verify_report.json") << "\n";
    return report.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-range decomposition of lattice Green's functions"};
    app.set_config("--config", "", "plain key=value config file; flags win");

    GlobalArgs g;
    app.add_option("--dim", g.dim, "lattice dimension (1..4)");
    app.add_option("--L", g.L, "base scale, a power of two");
    app.add_option("--levels", g.levels, "number of levels / level index");
    app.add_option("--mass", g.mass, "mass parameter list a >= 0");
    app.add_option("--alpha", g.alpha, "stable index, 0 < alpha < 2");
    app.add_option("--tol", g.tol, "quadrature tolerance");
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--threads", g.threads, "worker threads");
    app.add_option("--cache-dir", g.cache_dir, "kernel cache directory");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--p", g.momentum, "momentum components, comma separated");

    double R = 4.0;
    long walks = 0;
    auto* poisson = app.add_subcommand("poisson", "Dirichlet cube and Poisson kernel row");
    poisson->add_option("--R", R, "cube side length");
    poisson->add_option("--walks", walks, "Monte Carlo cross-check walks");

    int m_index = 0;
    auto* averaging = app.add_subcommand("averaging", "averaging kernel A^a_{eps_n,m}(R_m)");
    averaging->add_option("--m", m_index, "scale index 0 <= m <= n");

    app.add_subcommand("fluctuation", "fluctuation covariance Gamma_eps");
    app.add_subcommand("decompose", "multiscale levels, reconstruction, diagnostics");
    app.add_subcommand("levy", "stable-Levy decomposition and quadrature");

    long n_samples = 200;
    std::string out_csv = "field.csv";
    auto* sample = app.add_subcommand("sample", "sample decomposed Gaussian fields");
    sample->add_option("--samples", n_samples, "Monte Carlo sample count");
    sample->add_option("--out-csv", out_csv, "field CSV name");

    bool quick = false;
    auto* verify = app.add_subcommand("verify", "run the full acceptance suite");
    verify->add_flag("--quick", quick, "trimmed grids for development");

    app.require_subcommand(1);
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (poisson->parsed()) return run_poisson(g, R, walks);
        if (averaging->parsed()) return run_averaging(g, m_index);
        if (app.get_subcommand("fluctuation")->parsed()) return run_fluctuation(g);
        if (app.get_subcommand("decompose")->parsed()) return run_decompose(g);
        if (app.get_subcommand("levy")->parsed()) return run_levy(g);
        if (sample->parsed()) return run_sample(g, n_samples, out_csv);
        if (verify->parsed()) return run_verify(g, quick);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const frd::Error& e) {
        nlohmann::json err{{"schema", 1}, {"error", e.code()}, {"message", e.what()}};
        std::cerr << err << "\n";
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json err{{"schema", 1}, {"error", "Unexpected"}, {"message", e.what()}};
        std::cerr << err << "\n";
        return 3;
    }
    return 0;
}
