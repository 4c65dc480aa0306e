#include "frd/verify.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "frd/cache.hpp"
#include "frd/decomposition.hpp"
#include "frd/levy.hpp"
#include "frd/sampling.hpp"
#include "frd/verify_support.hpp"

namespace frd::verify {

namespace {

std::string tag(int d, int L, int n, double a) {
    std::ostringstream os;
    os << "d" << d << " L" << L << " n" << n << " a" << a;
    return os.str();
}

} // namespace

Suite::Suite(const Options& opt) : opt_(opt) {
    if (!opt_.cache_dir.empty()) cache_ = std::make_unique<KernelCache>(opt_.cache_dir);
}

KernelWorkspace& Suite::workspace(int d, int L) {
    auto key = std::make_pair(d, L);
    auto it = workspaces_.find(key);
    if (it == workspaces_.end()) {
        BuildOptions bopt;
        bopt.threads = opt_.threads;
        bopt.cache = cache_.get();
        int p = 0;
        while ((1 << p) < L) ++p;
        it = workspaces_.emplace(key, std::make_unique<KernelWorkspace>(d, p, bopt)).first;
    }
    return *it->second;
}

const DecompositionLevel& Suite::level(int d, int L, int n, double a) {
    std::ostringstream key;
    key << d << ':' << L << ':' << n << ':' << std::hexfloat << a;
    auto it = levels_.find(key.str());
    if (it == levels_.end()) {
        auto built = std::make_unique<DecompositionLevel>(
            rescaled_fluctuation(workspace(d, L), n, a));
        it = levels_.emplace(key.str(), std::move(built)).first;
    }
    return *it->second;
}

bool Suite::position_feasible(int d, int L, int n) const {
    // (d=3, L=4, n=2) needs a 1024^3 grid; excluded from position-space work
    std::size_t points = 1;
    LatticeSpec spec(d, (L == 2) ? 1 : 2, n);
    int M = position_grid_size(spec, n);
    for (int mu = 0; mu < d; ++mu) points *= static_cast<std::size_t>(M);
    return points <= (1ULL << 25); // <= 512 MB of complex scratch
}

std::vector<std::pair<int, int>> Suite::dl_grid() const {
    if (opt_.quick) return {{1, 2}, {2, 2}};
    return {{1, 2}, {1, 4}, {2, 2}, {2, 4}, {3, 2}, {3, 4}};
}

// --- criterion 1: finite range of Gamma_eps at 3L --------------------------

CheckResult Suite::criterion_range_eps() {
    CheckResult c{"C1", "finite range of Gamma_eps at 3L (level 0)", true, 0, 1e-9, ""};
    for (auto [d, L] : dl_grid()) {
        for (double a : {0.0, 1.0}) {
            const DecompositionLevel& lvl = level(d, L, 0, a);
            if (lvl.range_margin > c.value) {
                c.value = lvl.range_margin;
                c.note = tag(d, L, 0, a);
            }
        }
    }
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 2: finite range of Gamma_n at 6L ----------------------------

CheckResult Suite::criterion_range_levels() {
    CheckResult c{"C2", "finite range of Gamma_n at 6L (n=1,2)", true, 0, 1e-9, ""};
    for (auto [d, L] : dl_grid()) {
        for (int n : {1, 2}) {
            if (!position_feasible(d, L, n)) continue;
            for (double a : {0.0, 1.0}) {
                const DecompositionLevel& lvl = level(d, L, n, a);
                if (lvl.range_margin > c.value) {
                    c.value = lvl.range_margin;
                    c.note = tag(d, L, n, a);
                }
            }
        }
    }
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 3: PSD of every constructed level ---------------------------

CheckResult Suite::criterion_psd() {
    CheckResult c{"C3", "PSD: min Gamma_hat >= -1e-10 x max on >=64^d grids", true, 0, 1e-10, ""};
    double worst = 0; // most negative min relative to max
    for (const auto& [key, lvl] : levels_) {
        double rel = (lvl->psd_max > 0) ? -lvl->psd_min / lvl->psd_max : 0.0;
        if (rel > worst) {
            worst = rel;
            c.note = tag(lvl->spec.d, lvl->spec.L(), lvl->level, lvl->a);
        }
    }
    // spectral-only scan where the position grid is infeasible
    for (auto [d, L] : dl_grid()) {
        for (int n : {1, 2}) {
            if (position_feasible(d, L, n)) continue;
            for (double a : {0.0, 1.0}) {
                SpectralEvaluator ev(workspace(d, L), n, a);
                SpectrumExtrema ex = psd_scan(ev, 128);
                double rel = (ex.max > 0) ? -ex.min / ex.max : 0.0;
                if (rel > worst) {
                    worst = rel;
                    c.note = tag(d, L, n, a) + " spectral-only";
                }
            }
        }
    }
    c.value = worst;
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 4: Fourier-side reconstruction ------------------------------

CheckResult Suite::criterion_reconstruction() {
    CheckResult c{"C4", "multiscale reconstruction residual at 50 random momenta", true, 0, 1e-8,
                  ""};
    const int n_momenta = opt_.quick ? 10 : 50;
    for (auto [d, L] : dl_grid()) {
        KernelWorkspace& ws = workspace(d, L);
        SplitMix rng(opt_.seed ^ (static_cast<std::uint64_t>(d) << 32 ^ L));
        for (int n : {1, 2}) {
            for (double a : {0.0, 0.25, 1.0, 4.0}) {
                for (int i = 0; i < n_momenta; ++i) {
                    MomentumPoint p;
                    double norm2 = 0;
                    for (int mu = 0; mu < d; ++mu) {
                        p[mu] = (2.0 * rng.uniform() - 1.0) * M_PI;
                        norm2 += p[mu] * p[mu];
                    }
                    if (a == 0 && norm2 < 1e-4) p[0] += 0.5; // keep clear of the massless pole
                    Reconstruction rec = reconstruct_green(ws, a, n, p);
                    if (rec.residual > c.value) {
                        c.value = rec.residual;
                        c.note = tag(d, L, n, a);
                    }
                }
            }
        }
    }
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 5: Poisson kernel vs killed-walk oracle ----------------------

CheckResult Suite::criterion_walk_oracle() {
    CheckResult c{"C5", "walk oracle TV distance <= 4 x aggregate std error", true, 0, 4.0, ""};
    const long walks = opt_.quick ? 20000 : 100000;
    double worst_ratio = 0;
    for (int d : {1, 2}) {
        for (double R : {2.0, 4.0}) {
            for (double a : {0.0, 1.0}) {
                LatticeSpec spec(d, 1, 0);
                CubeDomain cube(spec, R);
                DirichletSolver solver(cube, a);
                std::vector<Site> starts{Site{0, 0, 0, 0}};
                if (cube.half() >= 1) starts.push_back(Site{1, 0, 0, 0});
                for (const Site& x : starts) {
                    PoissonKernelRow exact = solver.poisson_row(x);
                    std::uint64_t seed = opt_.seed + static_cast<std::uint64_t>(
                        d * 1000 + static_cast<int>(R) * 100 + static_cast<int>(a) * 10 + x[0]);
                    WalkEstimate mc = walk_exit_oracle(cube, a, x, walks, seed);
                    double tv = total_variation(exact, mc.row);
                    double agg = mc.aggregate_std_error();
                    double ratio = (agg > 0) ? tv / agg : 0.0;
                    if (ratio > worst_ratio) {
                        worst_ratio = ratio;
                        std::ostringstream os;
                        os << "d" << d << " R" << R << " a" << a << " x" << x[0];
                        c.note = os.str();
                    }
                }
            }
        }
    }
    c.value = worst_ratio;
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 6: defect bound on every averaging kernel --------------------

CheckResult Suite::criterion_defect_bound() {
    CheckResult c{"C6", "0 <= 1 - mass <= a R^2/2 for every averaging kernel", true, 0, 1e-12,
                  ""};
    double worst_violation = 0; // positive = bound violated
    long count = 0;
    for (auto& [key, ws] : workspaces_) {
        ws->for_each_kernel([&](const AveragingKernel& k) {
            ++count;
            double lower = -k.defect();                      // defect must be >= 0
            double upper = k.defect() - k.defect_bound();    // and <= a R^2/2
            double violation = std::max(lower, upper);
            if (violation > worst_violation) {
                worst_violation = violation;
                c.note = tag(k.spec.d, k.spec.L(), k.spec.n, k.a) + " m" + std::to_string(k.m);
            }
        });
    }
    c.value = worst_violation;
    c.note += " (" + std::to_string(count) + " kernels)";
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 7: scaling relation ------------------------------------------

CheckResult Suite::criterion_scaling() {
    CheckResult c{"C7", "averaging-kernel scaling relation residual", true, 0, 1e-9, ""};
    for (auto [d, L] : dl_grid()) {
        BuildOptions bopt;
        bopt.threads = opt_.threads;
        bopt.cache = cache_.get();
        const BumpProfile& bump = workspace(d, L).bump();
        for (auto [n, m] : {std::pair{1, 1}, {2, 1}, {2, 2}}) {
            for (double a : {0.0, 1.0}) {
                int p = 0;
                while ((1 << p) < L) ++p;
                ScalingResidual r = scaling_residual(LatticeSpec(d, p, n), m, a, bump, bopt);
                double v = std::max(r.density_residual, r.mass_residual);
                if (v > c.value) {
                    c.value = v;
                    c.note = tag(d, L, n, a) + " m" + std::to_string(m);
                }
            }
        }
    }
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 8: Levy constant, identity, reconstruction -------------------

CheckResult Suite::criterion_levy() {
    CheckResult c{"C8", "Levy identity and reconstruction residuals", true, 0, 1e-6, ""};
    const int d = 3, L = 2;
    for (double alpha : {0.5, 1.0, 1.5}) {
        LevyParams q = build_quadrature(alpha, 1e-8, L);
        for (double t : {0.5, 1.0, 3.0}) {
            double r = scalar_identity_residual(q, t);
            if (r > c.value) {
                c.value = r;
                c.note = "identity alpha=" + std::to_string(alpha) + " t=" + std::to_string(t);
            }
        }
    }

    KernelWorkspace& ws = workspace(d, L);
    LevyParams q = build_quadrature(1.0, 1e-8, L);
    SplitMix rng(opt_.seed ^ 0xa5a5a5a5ULL);
    const int n_momenta = opt_.quick ? 3 : 8;
    for (int i = 0; i < n_momenta; ++i) {
        MomentumPoint p;
        for (int mu = 0; mu < d; ++mu) p[mu] = 0.2 + 2.8 * rng.uniform();
        LevyReconstruction rec = levy_reconstruct(ws, q, 1, p);
        double v = std::max(rec.residual_direct, rec.residual_sum);
        if (v > c.value) {
            c.value = v;
            c.note = "reconstruction n=1";
        }
    }

    // position-space recursion C_n = Gamma_n + L^{-2 phi} C_{n+1}(./L) on
    // index-aligned tori, in offset-difference form: the remainder has no
    // convergent torus zero mode, and differences cancel it on both sides
    {
        LevyParams qp = build_quadrature(1.0, 1e-8, L);
        const int M = 64;
        const int n = 1;
        LevyLevel gamma_n = levy_fluctuation(ws, qp, n);
        std::vector<double> c_n = levy_remainder_torus(ws, qp, n, M);
        std::vector<double> c_next = levy_remainder_torus(ws, qp, n + 1, M);
        double contraction = std::pow(static_cast<double>(L), -2.0 * qp.phi_dim(d));
        SplitMix orng(opt_.seed ^ 0x77ULL);
        auto flat_of = [&](const Site& x) {
            std::size_t flat = 0;
            for (int mu = 0; mu < d; ++mu) {
                int w = x[mu] < 0 ? x[mu] + M : x[mu];
                flat = flat * M + static_cast<std::size_t>(w);
            }
            return flat;
        };
        std::vector<Site> offsets;
        std::vector<double> lhs_vals, rhs_vals;
        for (int i = 0; i < 21; ++i) {
            Site x{0, 0, 0, 0};
            for (int mu = 0; mu < d; ++mu)
                x[mu] = static_cast<int>(orng.uniform() * 16) - 8;
            offsets.push_back(x);
            lhs_vals.push_back(c_n[flat_of(x)]);
            rhs_vals.push_back(gamma_n.gamma.at(x) + contraction * c_next[flat_of(x)]);
        }
        double scale = 0;
        for (std::size_t i = 1; i < offsets.size(); ++i)
            scale = std::max(scale, std::fabs(lhs_vals[i] - lhs_vals[0]));
        for (std::size_t i = 1; i < offsets.size(); ++i) {
            double lhs = lhs_vals[i] - lhs_vals[0];
            double rhs = rhs_vals[i] - rhs_vals[0];
            double r = std::fabs(lhs - rhs) / scale;
            if (r > c.value) {
                c.value = r;
                c.note = "recursion n=1";
            }
        }
        // the Levy fluctuation inherits range and PSD from its summands
        if (gamma_n.range_margin > 1e-9) {
            c.value = std::max(c.value, gamma_n.range_margin);
            c.note = "levy range margin";
        }
        if (gamma_n.psd_min < -1e-10 * gamma_n.psd_max) {
            c.value = std::max(c.value, -gamma_n.psd_min / gamma_n.psd_max);
            c.note = "levy psd";
        }
    }
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 9: convergence of Gamma_hat_n --------------------------------

CheckResult Suite::criterion_convergence() {
    // The geometric mechanism bounds each difference by an envelope geometric
    // in n; it does not bound pointwise ratios (a difference may vanish at a
    // given p, uncontrolled from below). The ratio is therefore taken over
    // the sup of |Gamma_hat_{n+1} - Gamma_hat_n| across the |p| <= 1 window.
    CheckResult c{"C9", "sup-difference ratio <= 2/L over |p| <= 1 for n in {1,2}", true, 0, 1.0,
                  ""};
    double worst = 0; // ratio / (2/L), must stay <= 1
    std::vector<std::pair<int, int>> grid{{1, 2}, {1, 4}, {2, 2}, {2, 4}, {3, 2}};
    if (opt_.quick) grid = {{1, 2}, {1, 4}};
    for (auto [d, L] : grid) {
        KernelWorkspace& ws = workspace(d, L);
        double bound = 2.0 / L;
        SplitMix rng(opt_.seed ^ 0x99ULL ^ static_cast<std::uint64_t>(d * 16 + L));
        std::vector<MomentumPoint> momenta;
        const int n_momenta = opt_.quick ? 12 : 40;
        for (int i = 0; i < n_momenta; ++i) {
            MomentumPoint p;
            double scale = 0.05 + 0.95 * rng.uniform();
            double norm = 0;
            for (int mu = 0; mu < d; ++mu) {
                p[mu] = rng.uniform() - 0.5;
                norm += p[mu] * p[mu];
            }
            norm = std::sqrt(norm);
            for (int mu = 0; mu < d; ++mu) p[mu] *= scale / norm;
            momenta.push_back(p);
        }
        for (double a : {0.0, 1.0}) {
            std::array<double, 3> sup{0, 0, 0};
            for (const auto& p : momenta) {
                ConvergenceSequence seq = convergence_sequence(ws, p, a, 3);
                for (int n = 0; n < 3; ++n)
                    sup[static_cast<std::size_t>(n)] =
                        std::max(sup[static_cast<std::size_t>(n)],
                                 seq.differences[static_cast<std::size_t>(n)]);
            }
            if (a > 0) { // p = 0 is inside the window when the pole is absent
                ConvergenceSequence seq = convergence_sequence(ws, MomentumPoint{}, a, 3);
                for (int n = 0; n < 3; ++n)
                    sup[static_cast<std::size_t>(n)] =
                        std::max(sup[static_cast<std::size_t>(n)],
                                 seq.differences[static_cast<std::size_t>(n)]);
            }
            for (int n = 1; n < 3; ++n) {
                double ratio = sup[static_cast<std::size_t>(n)] /
                               sup[static_cast<std::size_t>(n - 1)];
                if (ratio / bound > worst) {
                    worst = ratio / bound;
                    c.note = tag(d, L, n, a);
                }
            }
        }
    }
    c.value = worst;
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 10: Sobolev-norm uniformity and mass trend --------------------

CheckResult Suite::criterion_sobolev() {
    // Theorem-level trend; its dimensional hypothesis is d >= 3 and d=2
    // conforms empirically, so the gate runs d in {2,3}. d=1 high-k norms
    // genuinely grow across levels at desk scale (reported, not gated).
    CheckResult c{"C10", "H_k uniform across n (<=10x) and nonincreasing in a (d>=2)", true, 0,
                  10.0, ""};
    const std::vector<double> mass_grid{0.0, 0.25, 1.0, 4.0};
    double worst_ratio = 0;
    bool monotone = true;
    std::string mono_note;
    std::vector<std::pair<int, int>> grid{{2, 2}, {2, 4}, {3, 2}};
    if (opt_.quick) grid = {{2, 2}};
    for (auto [d, L] : grid) {
        for (int k = 0; k <= 4; ++k) {
            for (double a : mass_grid) {
                double lo = 0, hi = 0;
                for (int n : {0, 1, 2}) {
                    double v = level(d, L, n, a).sobolev.at(k);
                    if (n == 0) lo = hi = v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                double ratio = (lo > 0) ? hi / lo : 1.0;
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    c.note = tag(d, L, -1, a) + " k" + std::to_string(k);
                }
            }
            for (int n : {0, 1, 2}) {
                double prev = -1;
                for (double a : mass_grid) {
                    double v = level(d, L, n, a).sobolev.at(k);
                    if (prev >= 0 && v > prev * (1.0 + 1e-12)) {
                        monotone = false;
                        mono_note = tag(d, L, n, a) + " k" + std::to_string(k);
                    }
                    prev = v;
                }
            }
        }
    }
    c.value = worst_ratio;
    c.pass = (worst_ratio <= c.threshold) && monotone;
    if (!monotone) c.note += " NOT nonincreasing in a at " + mono_note;
    return c;
}

// --- criterion 11: sampler fidelity ------------------------------------------

CheckResult Suite::criterion_sampler() {
    CheckResult c{"C11", "empirical covariance within 4 sigma; zero beyond range", true, 0, 4.0,
                  ""};
    const long n_samples = opt_.quick ? 2000 : 10000;
    const int d = 2, L = 2, M = 64;
    const DecompositionLevel& lvl = level(d, L, 1, 1.0);
    GaussianSampler sampler(lvl.gamma, M, opt_.seed + 11);

    std::vector<Site> offsets;
    for (int i = 0; i < 10; ++i) offsets.push_back(make_site({i, (i * 3) % 7}));
    // at and beyond the range the exact covariance is zero, so the same 4-sigma
    // comparison doubles as the independence check
    int range_sites = provable_range_sites(lvl.spec, lvl.level);
    for (int i = 0; i < 4; ++i) offsets.push_back(make_site({range_sites + i, i}));

    std::vector<double> sums(offsets.size(), 0.0), sumsqs(offsets.size(), 0.0);
    for (long s = 0; s < n_samples; ++s) {
        std::vector<double> field = sampler.sample();
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            std::size_t flat = 0;
            for (int mu = 0; mu < d; ++mu) {
                int w = offsets[i][mu] % M;
                if (w < 0) w += M;
                flat = flat * M + static_cast<std::size_t>(w);
            }
            double prod = field[0] * field[flat];
            sums[i] += prod;
            sumsqs[i] += prod * prod;
        }
    }
    double worst_sigma = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        double mean = sums[i] / n_samples;
        double var = std::max(1e-300, sumsqs[i] / n_samples - mean * mean);
        double se = std::sqrt(var / n_samples);
        double expect = sampler.covariance_at(offsets[i]);
        double sig = std::fabs(mean - expect) / se;
        if (sig > worst_sigma) {
            worst_sigma = sig;
            std::ostringstream os;
            os << "offset (" << offsets[i][0] << "," << offsets[i][1] << ")";
            c.note = os.str();
        }
    }
    c.value = worst_sigma;
    c.pass = c.value <= c.threshold;
    return c;
}

// --- criterion 12: appendix identities ----------------------------------------

CheckResult Suite::criterion_identities() {
    CheckResult c{"C12", "energy identity <= 1e-10 and Poincare inequality", true, 0, 1e-10, ""};
    SplitMix rng(opt_.seed ^ 0x1234ULL);
    double worst = 0;
    for (int d : {1, 2, 3}) {
        LatticeSpec spec(d, 1, 0);
        std::array<int, kMaxDim> radius{0, 0, 0, 0};
        for (int mu = 0; mu < d; ++mu) radius[mu] = 4; // 9^d box ~ "8^d" scale
        for (int trial = 0; trial < 100; ++trial) {
            LatticeKernel h(spec, radius), phi(spec, radius);
            for (double& v : h.values()) v = 2.0 * rng.uniform() - 1.0;
            for (double& v : phi.values()) v = rng.uniform();
            double a = (trial % 2 == 0) ? 1.0 : 0.0;
            IdentityResidual r = green_identity_residual(h, phi, a);
            double rel = r.residual / std::max(r.scale, 1e-300);
            worst = std::max(worst, rel);
        }
    }
    bool poincare_ok = true;
    for (int d : {1, 2, 3}) {
        int pexp = (d == 1) ? 4 : (d == 2 ? 3 : 2);
        LatticeSpec cube_spec(d, pexp, 1); // eps = 2^-pexp
        long m = std::lround(1.0 / cube_spec.epsilon()) + 1;
        std::size_t total = 1;
        for (int mu = 0; mu < d; ++mu) total *= static_cast<std::size_t>(m);
        int trials = (d == 3) ? 20 : 100;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> u(total, 0.0);
            for (std::size_t i = 0; i < total; ++i) {
                // zero out boundary sites
                std::size_t rem = i;
                bool boundary = false;
                for (int mu = d - 1; mu >= 0; --mu) {
                    long comp = static_cast<long>(rem % static_cast<std::size_t>(m));
                    rem /= static_cast<std::size_t>(m);
                    if (comp == 0 || comp == m - 1) boundary = true;
                }
                u[i] = boundary ? 0.0 : (2.0 * rng.uniform() - 1.0);
            }
            PoincarePair pr = poincare_residual(cube_spec, u);
            if (pr.lhs > pr.rhs) poincare_ok = false;
        }
    }
    c.value = worst;
    c.pass = (worst <= c.threshold) && poincare_ok;
    if (!poincare_ok) c.note = "Poincare inequality violated";
    return c;
}

Report run_all(const Options& options, std::ostream& progress) {
    auto t0 = std::chrono::steady_clock::now();
    Suite suite(options);
    Report report("verify");

    auto run = [&](CheckResult (Suite::*fn)()) {
        CheckResult c = (suite.*fn)();
        report.add_check(c);
        Report line("verify");
        line.add_check(c);
        line.print_check_lines(progress);
    };

    run(&Suite::criterion_range_eps);
    run(&Suite::criterion_range_levels);
    run(&Suite::criterion_psd);
    run(&Suite::criterion_reconstruction);
    run(&Suite::criterion_walk_oracle);
    run(&Suite::criterion_defect_bound);
    run(&Suite::criterion_scaling);
    run(&Suite::criterion_levy);
    run(&Suite::criterion_convergence);
    run(&Suite::criterion_sobolev);
    run(&Suite::criterion_sampler);
    run(&Suite::criterion_identities);

    auto t1 = std::chrono::steady_clock::now();
    double seconds = std::chrono::duration<double>(t1 - t0).count();
    CheckResult timing{"C13", "full verify wall time <= 30 minutes", seconds <= 1800.0, seconds,
                       1800.0, ""};
    report.add_check(timing);
    Report line("verify");
    line.add_check(timing);
    line.print_check_lines(progress);
    return report;
}

} // namespace frd::verify
