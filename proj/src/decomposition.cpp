#include "frd/decomposition.hpp"

#include <cmath>

#include "frd/torus.hpp"

namespace frd {

int provable_range_sites(const LatticeSpec& spec, int level) {
    int range_per_eps = (level == 0 ? 3 : 6) * spec.L(); // physical 3L or 6L over eps
    return range_per_eps << (spec.p * level);
}

int position_grid_size(const LatticeSpec& spec, int level) {
    long need = 2L * provable_range_sites(spec, level) + 4;
    return std::max(64, pow2_at_least(need));
}

namespace {

LatticeKernel extract_and_zero(const LatticeSpec& spec, int M,
                               const std::vector<double>& values, int range_sites,
                               double* margin) {
    double beyond = 0;
    LatticeKernel out = extract_kernel(spec, M, values, range_sites, range_sites, &beyond);
    double g0 = out.at(Site{0, 0, 0, 0});
    if (margin) *margin = (g0 != 0) ? beyond / g0 : beyond;
    // beyond-range storage entries are provably zero; measured, then zeroed
    out.for_each([&](const Site& x, double v) {
        if (v != 0.0 && sup_distance_sites(x, Site{0, 0, 0, 0}, spec.d) >= range_sites)
            out.ref(x) = 0.0;
    });
    out.set_even_symmetric(true);
    return out;
}

} // namespace

LatticeKernel fluctuation_position(KernelWorkspace& ws, int level, double a, double* range_margin,
                                   int* grid_M) {
    LatticeSpec spec(ws.d(), ws.p(), level);
    SpectralEvaluator ev(ws, level, a);
    int range_sites = 3 * spec.L() << (spec.p * level);
    int M = std::max(64, pow2_at_least(2L * range_sites + 4));
    if (grid_M) *grid_M = M;
    std::vector<double> values =
        grid_values_from_spectrum(spec.d, M, spec.epsilon(), ev.gamma_eps_hat_grid(M));
    return extract_and_zero(spec, M, values, range_sites, range_margin);
}

DecompositionLevel rescaled_fluctuation(KernelWorkspace& ws, int level, double a,
                                        int sobolev_max_k) {
    LatticeSpec spec(ws.d(), ws.p(), level);
    SpectralEvaluator ev(ws, level, a);

    DecompositionLevel out;
    out.spec = spec;
    out.level = level;
    out.a = a;
    out.provable_range = (level == 0 ? 3.0 : 6.0) * spec.L();
    int range_sites = provable_range_sites(spec, level);
    int M = position_grid_size(spec, level);
    out.grid_M = M;

    std::vector<double> gamma_hat = ev.gamma_hat_grid(M);
    out.psd_min = gamma_hat[0];
    out.psd_max = gamma_hat[0];
    for (double v : gamma_hat) {
        out.psd_min = std::min(out.psd_min, v);
        out.psd_max = std::max(out.psd_max, v);
    }
    std::vector<double> values = grid_values_from_spectrum(spec.d, M, spec.epsilon(), gamma_hat);
    out.gamma = extract_and_zero(spec, M, values, range_sites, &out.range_margin);
    out.gamma0 = out.gamma.at(Site{0, 0, 0, 0});
    for (int k = 0; k <= sobolev_max_k; ++k)
        out.sobolev[k] = sobolev_norm_spectral_form(out.gamma, k);
    return out;
}

double restriction_difference(const DecompositionLevel& coarse, const DecompositionLevel& fine,
                              int l) {
    // sites of (eps_l Z)^d have index stride L^{n-l} on level n
    const int d = coarse.spec.d;
    if (l > coarse.level || l > fine.level) throw ConfigError("restriction level too fine");
    int stride_c = 1 << (coarse.spec.p * (coarse.level - l));
    int stride_f = 1 << (fine.spec.p * (fine.level - l));
    int reach = coarse.gamma.radius()[0] / stride_c;
    double worst = 0;
    Site xc{0, 0, 0, 0}, xf{0, 0, 0, 0};
    std::array<int, kMaxDim> k{0, 0, 0, 0};
    std::function<void(int)> walk = [&](int mu) {
        if (mu == d) {
            for (int nu = 0; nu < d; ++nu) {
                xc[nu] = k[nu] * stride_c;
                xf[nu] = k[nu] * stride_f;
            }
            worst = std::max(worst, std::fabs(coarse.gamma.at(xc) - fine.gamma.at(xf)));
            return;
        }
        for (k[mu] = -reach; k[mu] <= reach; ++k[mu]) walk(mu + 1);
        k[mu] = 0;
    };
    walk(0);
    return worst;
}

} // namespace frd
