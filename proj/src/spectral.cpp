#include "frd/spectral.hpp"

#include <cmath>

#include "frd/torus.hpp"

namespace frd {

double green_fourier(int d, double eps, double a, const MomentumPoint& p) {
    double disp = dispersion(p, d, eps);
    double denom = a - disp;
    if (denom <= 0) {
        if (a == 0 && disp == 0)
            throw PoleAtZero("massless resolvent has a pole at p = 0");
        throw ConfigError("resolvent symbol is not positive; momentum outside the zone?");
    }
    return 1.0 / denom;
}

SpectralEvaluator::SpectralEvaluator(KernelWorkspace& ws, int level, double a)
    : spec_(ws.d(), ws.p(), level), a_(a) {
    m0_ = &ws.averaging(level, 0, a);
    composite_ = &ws.composite(level, a);
}

double SpectralEvaluator::m0_hat(const MomentumPoint& p) const {
    return kernel_fourier(m0_->density, p);
}

double SpectralEvaluator::composite_hat(const MomentumPoint& p) const {
    return composite_fourier(*composite_, p);
}

double SpectralEvaluator::green_hat(const MomentumPoint& p) const {
    return green_fourier(spec_.d, eps(), a_, p);
}

double SpectralEvaluator::sigma2() const {
    double s = 0;
    for (int mu = 0; mu < spec_.d; ++mu) s += second_moment(m0_->density, mu);
    return s / spec_.d;
}

double SpectralEvaluator::gamma_eps_hat(const MomentumPoint& p) const {
    double disp = dispersion(p, spec_.d, eps());
    if (a_ == 0 && disp == 0) return sigma2();
    double ahat = m0_hat(p);
    return (1.0 - ahat * ahat) / (a_ - disp);
}

double SpectralEvaluator::gamma_hat(const MomentumPoint& p) const {
    double chat = composite_hat(p);
    return chat * chat * gamma_eps_hat(p);
}

double SpectralEvaluator::remainder_hat(const MomentumPoint& p) const {
    double chat = composite_hat(p);
    return chat * chat * green_hat(p);
}

std::vector<double> SpectralEvaluator::m0_hat_grid(int M) const {
    return kernel_spectrum_on_grid(m0_->density, M, std::pow(eps(), spec_.d));
}

std::vector<double> SpectralEvaluator::composite_hat_grid(int M) const {
    return kernel_spectrum_on_grid(composite_->combined, M, std::pow(eps(), spec_.d));
}

std::vector<double> SpectralEvaluator::green_hat_grid(int M) const {
    const int d = spec_.d;
    const double ee = eps();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::pow(M, d)));
    // dispersion from grid indices: -Lap_hat = 2 eps^{-2} sum (1 - cos(2 pi k/M))
    std::vector<double> axis(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k)
        axis[static_cast<std::size_t>(k)] =
            2.0 / (ee * ee) * (1.0 - std::cos(2.0 * M_PI * k / M));
    out.assign(TorusFFT::get(d, M)->size(), 0.0);
    for_each_grid_index(d, M, [&](std::size_t flat, const std::array<int, kMaxDim>& k) {
        double neg_disp = 0;
        for (int mu = 0; mu < d; ++mu) neg_disp += axis[static_cast<std::size_t>(k[mu])];
        double denom = a_ + neg_disp;
        out[flat] = (denom > 0) ? 1.0 / denom : 0.0; // massless zero mode left at 0
    });
    return out;
}

std::vector<double> SpectralEvaluator::gamma_eps_hat_grid(int M) const {
    std::vector<double> m0 = m0_hat_grid(M);
    std::vector<double> green = green_hat_grid(M);
    for (std::size_t i = 0; i < m0.size(); ++i) m0[i] = (1.0 - m0[i] * m0[i]) * green[i];
    if (a_ == 0) m0[0] = sigma2();
    return m0;
}

std::vector<double> SpectralEvaluator::gamma_hat_grid(int M) const {
    std::vector<double> out = gamma_eps_hat_grid(M);
    std::vector<double> comp = composite_hat_grid(M);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= comp[i] * comp[i];
    return out;
}

std::vector<double> SpectralEvaluator::remainder_hat_grid(int M) const {
    if (a_ == 0) throw PoleAtZero("massless remainder grid has a pole at p = 0");
    std::vector<double> out = green_hat_grid(M);
    std::vector<double> comp = composite_hat_grid(M);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= comp[i] * comp[i];
    return out;
}

Reconstruction reconstruct_green(KernelWorkspace& ws, double a, int n, const MomentumPoint& p) {
    if (n < 1) throw ConfigError("reconstruction needs n >= 1");
    const int d = ws.d();
    const int L = ws.L();
    MomentumPoint p0 = p;
    if (a == 0 && dispersion(p0, d, 1.0) == 0)
        throw PoleAtZero("massless reconstruction needs p != 0");

    Reconstruction rec;
    rec.lhs = green_fourier(d, 1.0, a, p);
    double rhs = 0;
    double scale = 1.0;  // L^{2j}
    for (int j = 0; j < n; ++j) {
        SpectralEvaluator ev(ws, j, a * scale);
        rhs += scale * ev.gamma_hat(MomentumPoint::scaled(p, std::pow(L, j)));
        scale *= L * L;
    }
    SpectralEvaluator rem(ws, n, a * scale);
    rhs += scale * rem.remainder_hat(MomentumPoint::scaled(p, std::pow(L, n)));
    rec.rhs = rhs;
    rec.residual = std::fabs(rec.lhs - rec.rhs) / std::fabs(rec.lhs);
    return rec;
}

ConvergenceSequence convergence_sequence(KernelWorkspace& ws, const MomentumPoint& p, double a,
                                         int n_max) {
    if (n_max < 2) throw ConfigError("convergence sequence needs n_max >= 2");
    ConvergenceSequence seq;
    for (int n = 0; n <= n_max; ++n) {
        SpectralEvaluator ev(ws, n, a);
        seq.values.push_back(ev.gamma_hat(p));
    }
    for (std::size_t i = 0; i + 1 < seq.values.size(); ++i)
        seq.differences.push_back(std::fabs(seq.values[i + 1] - seq.values[i]));
    for (std::size_t i = 1; i < seq.differences.size(); ++i)
        seq.ratios.push_back(seq.differences[i] /
                             (seq.differences[i - 1] > 0 ? seq.differences[i - 1] : 1.0));
    // geometric extrapolation from the last observed ratio
    double rho = seq.ratios.empty() ? 0.0 : seq.ratios.back();
    double tail = (rho > 0 && rho < 1) ? seq.differences.back() * rho / (1.0 - rho) : 0.0;
    seq.extrapolated_limit = seq.values.back() + tail;
    return seq;
}

DecayReport decay_check(const SpectralEvaluator& ev, int k, int M) {
    if (k > 8) throw ConfigError("decay check supports k <= 8");
    DecayReport rep;
    rep.k = k;
    rep.grid_M = M;
    const int d = ev.spec().d;
    const double eps = ev.eps();
    std::vector<double> gamma = ev.gamma_hat_grid(M);
    for_each_grid_index(d, M, [&](std::size_t flat, const std::array<int, kMaxDim>& kk) {
        double p2 = 0;
        for (int mu = 0; mu < d; ++mu) {
            double c = torus_momentum(kk[mu], M, eps);
            p2 += c * c;
        }
        double g = std::fabs(gamma[flat]);
        rep.gamma_hat_max = std::max(rep.gamma_hat_max, g);
        rep.envelope_max = std::max(rep.envelope_max, g * std::pow(1.0 + p2, 2 * k));
    });
    rep.at_zero = gamma[0];
    return rep;
}

SpectrumExtrema psd_scan(const SpectralEvaluator& ev, int M) {
    std::vector<double> gamma = ev.gamma_hat_grid(M);
    SpectrumExtrema ex;
    ex.min = gamma[0];
    ex.max = gamma[0];
    for (double v : gamma) {
        ex.min = std::min(ex.min, v);
        ex.max = std::max(ex.max, v);
    }
    return ex;
}

} // namespace frd
