#include "frd/levy.hpp"

#include <cmath>

#include "frd/torus.hpp"

namespace frd {

double levy_constant(double alpha) {
    if (!(alpha > 0 && alpha < 2)) throw ConfigError("alpha must lie in (0,2)");
    return std::sin(M_PI * alpha / 2.0) / M_PI;
}

LevyParams build_quadrature(double alpha, double tol, int L) {
    if (tol < 1e-10) throw ConfigError("tolerance below the supported floor 1e-10");
    if (alpha < 0.1 || alpha > 1.9)
        throw ConfigError("alpha restricted to [0.1, 1.9] at desk scale");

    LevyParams q;
    q.alpha = alpha;
    q.tol = tol;
    q.constant = levy_constant(alpha);

    // trapezoid-in-log step: discretization error ~ exp(-2 pi^2 / h) for the
    // resolvent-type integrand (poles at distance pi off the real axis)
    double h_target = 2.0 * M_PI * M_PI / std::log(100.0 / tol);
    double period = 2.0 * std::log(static_cast<double>(L));
    int per_period = static_cast<int>(std::ceil(period / h_target));
    q.h = period / per_period;
    q.shift = per_period;

    // truncate where the integrand envelope a^{-alpha/2} min(1/a, 1) drops
    // below tol at unit scale, with a decade of slack
    double slack = std::log(10.0);
    double u_max = (2.0 / alpha) * std::log(2.0 * q.constant / (alpha * tol)) + slack;
    double u_min = std::log(tol * (1.0 - alpha / 2.0) / q.constant) / (1.0 - alpha / 2.0) - slack;
    long n_lo = std::lround(std::floor(u_min / q.h));
    long n_hi = std::lround(std::ceil(u_max / q.h));
    long count = n_hi - n_lo + 1;
    if (count > 50000) throw ToleranceUnreachable("node budget exceeded: " + std::to_string(count));

    q.masses.resize(static_cast<std::size_t>(count));
    q.weights.assign(static_cast<std::size_t>(count), q.h);
    for (long k = 0; k < count; ++k)
        q.masses[static_cast<std::size_t>(k)] = std::exp((n_lo + k) * q.h);
    // the exp(u) substitution Jacobian folds into the node: a^{-alpha/2} da =
    // a^{1-alpha/2} du, so the weight picks up one power of a
    for (std::size_t k = 0; k < q.masses.size(); ++k) q.weights[k] *= q.masses[k];
    q.weights.front() *= 0.5;
    q.weights.back() *= 0.5;

    double a_hi = q.masses.back();
    double a_lo = q.masses.front();
    q.truncation_estimate = q.constant * (2.0 / alpha) * std::pow(a_hi, -0.5 * alpha) +
                            q.constant * std::pow(a_lo, 1.0 - 0.5 * alpha) / (1.0 - 0.5 * alpha);

    double check = scalar_identity_residual(q, 1.0);
    if (check > tol)
        throw ToleranceUnreachable("quadrature self-check residual " + std::to_string(check));
    return q;
}

double scalar_identity_residual(const LevyParams& q, double t) {
    double approx = q.integrate([t](double a) { return 1.0 / (a + t); });
    double exact = std::pow(t, -0.5 * q.alpha);
    return std::fabs(approx - exact) / exact;
}

double levy_green_hat(const LevyParams& q, int d, const MomentumPoint& p) {
    double disp = dispersion(p, d, 1.0);
    if (disp == 0) throw PoleAtZero("Levy Green's function has a pole at p = 0");
    return q.integrate([&](double a) { return 1.0 / (a - disp); });
}

LevyLevel levy_fluctuation(KernelWorkspace& ws, const LevyParams& q, int level) {
    LatticeSpec spec(ws.d(), ws.p(), level);
    LevyLevel out;
    out.spec = spec;
    out.level = level;
    out.alpha = q.alpha;
    out.provable_range = (level == 0 ? 3.0 : 6.0) * spec.L();
    int range_sites = provable_range_sites(spec, level);
    int M = position_grid_size(spec, level);
    out.grid_M = M;

    // accumulate the mass integral on the momentum grid, then one inverse DFT
    std::vector<double> grid(TorusFFT::get(spec.d, M)->size(), 0.0);
    for (std::size_t k = 0; k < q.masses.size(); ++k) {
        SpectralEvaluator ev(ws, level, q.masses[k]);
        std::vector<double> node = ev.gamma_hat_grid(M);
        double w = q.constant * q.weights[k] * std::pow(q.masses[k], -0.5 * q.alpha);
        for (std::size_t i = 0; i < grid.size(); ++i) grid[i] += w * node[i];
    }
    out.psd_min = grid[0];
    out.psd_max = grid[0];
    for (double v : grid) {
        out.psd_min = std::min(out.psd_min, v);
        out.psd_max = std::max(out.psd_max, v);
    }
    std::vector<double> values = grid_values_from_spectrum(spec.d, M, spec.epsilon(), grid);
    double beyond = 0;
    out.gamma = extract_kernel(spec, M, values, range_sites, range_sites, &beyond);
    out.gamma0 = out.gamma.at(Site{0, 0, 0, 0});
    out.range_margin = beyond / out.gamma0;
    out.gamma.for_each([&](const Site& x, double v) {
        if (v != 0.0 && sup_distance_sites(x, Site{0, 0, 0, 0}, spec.d) >= range_sites)
            out.gamma.ref(x) = 0.0;
    });
    out.gamma.set_even_symmetric(true);
    return out;
}

std::vector<double> levy_remainder_torus(KernelWorkspace& ws, const LevyParams& q, int level,
                                         int M) {
    LatticeSpec spec(ws.d(), ws.p(), level);
    std::vector<double> grid(TorusFFT::get(spec.d, M)->size(), 0.0);
    for (std::size_t k = 0; k < q.masses.size(); ++k) {
        SpectralEvaluator ev(ws, level, q.masses[k]);
        std::vector<double> node = ev.remainder_hat_grid(M);
        double w = q.constant * q.weights[k] * std::pow(q.masses[k], -0.5 * q.alpha);
        for (std::size_t i = 0; i < grid.size(); ++i) grid[i] += w * node[i];
    }
    // The remainder decays like |x|^{-(d-alpha)}, so its periodization has no
    // absolutely convergent zero mode; drop it. Offset differences of the
    // returned values are the well-defined quantities and satisfy the level
    // recursion exactly.
    grid[0] = 0.0;
    return grid_values_from_spectrum(spec.d, M, spec.epsilon(), grid);
}

LevyReconstruction levy_reconstruct(KernelWorkspace& ws, const LevyParams& q, int n,
                                    const MomentumPoint& p) {
    const int d = ws.d();
    const int L = ws.L();
    double disp = dispersion(p, d, 1.0);
    if (disp == 0) throw PoleAtZero("Levy reconstruction needs p != 0");

    LevyReconstruction rec;
    rec.exact = std::pow(-disp, -0.5 * q.alpha);
    rec.direct = levy_green_hat(q, d, p);

    double sum = 0;
    for (int j = 0; j < n; ++j) {
        MomentumPoint pj = MomentumPoint::scaled(p, std::pow(L, j));
        double gamma_j = q.integrate([&](double a) {
            SpectralEvaluator ev(ws, j, a);
            return ev.gamma_eps_hat(pj) * ev.composite_hat(pj) * ev.composite_hat(pj);
        });
        sum += std::pow(static_cast<double>(L), j * q.alpha) * gamma_j;
    }
    MomentumPoint pn = MomentumPoint::scaled(p, std::pow(L, n));
    double c_n = q.integrate([&](double a) {
        SpectralEvaluator ev(ws, n, a);
        return ev.remainder_hat(pn);
    });
    sum += std::pow(static_cast<double>(L), n * q.alpha) * c_n;
    rec.sum = sum;

    rec.residual_direct = std::fabs(rec.direct - rec.exact) / rec.exact;
    rec.residual_sum = std::fabs(rec.sum - rec.direct) / rec.direct;
    return rec;
}

} // namespace frd
