#ifndef FRD_SPECTRAL_HPP
#define FRD_SPECTRAL_HPP

#include <vector>

#include "frd/averaging.hpp"
#include "frd/lattice.hpp"

namespace frd {

// resolvent symbol 1/(a - Lap_hat(p)); PoleAtZero at the massless zero mode
double green_fourier(int d, double eps, double a, const MomentumPoint& p);

// Deterministic pointwise evaluation of every Fourier-side object of one
// decomposition level: the m=0 averaging symbol, the composite symbol, the
// fluctuation covariance and the remainder. Kernels come from the shared
// workspace, so evaluators are cheap to construct.
class SpectralEvaluator {
public:
    SpectralEvaluator(KernelWorkspace& ws, int level, double a);

    const LatticeSpec& spec() const { return spec_; }
    double a() const { return a_; }
    double eps() const { return spec_.epsilon(); }

    double m0_hat(const MomentumPoint& p) const;
    double composite_hat(const MomentumPoint& p) const;
    double green_hat(const MomentumPoint& p) const;

    // (1 - A0^2) G, continued across the massless zero mode by sigma2()
    double gamma_eps_hat(const MomentumPoint& p) const;
    // composite^2 * gamma_eps
    double gamma_hat(const MomentumPoint& p) const;
    // composite^2 * G
    double remainder_hat(const MomentumPoint& p) const;

    // lim_{p->0} gamma_eps_hat at a=0: (1/d) int |u|^2 A(0,du)
    double sigma2() const;

    // momentum-grid forms on the M^d torus grid
    std::vector<double> m0_hat_grid(int M) const;
    std::vector<double> composite_hat_grid(int M) const;
    std::vector<double> green_hat_grid(int M) const;    // massless zero mode left at 0
    std::vector<double> gamma_eps_hat_grid(int M) const;
    std::vector<double> gamma_hat_grid(int M) const;
    std::vector<double> remainder_hat_grid(int M) const; // requires a > 0

private:
    LatticeSpec spec_;
    double a_;
    const AveragingKernel* m0_;
    const CompositeAveraging* composite_;
};

struct Reconstruction {
    double lhs = 0;      // G_hat on Z^d
    double rhs = 0;      // telescoped sum plus remainder
    double residual = 0; // |lhs - rhs| / |lhs|
};

// Fourier-side multiscale identity at p in the unit Brillouin zone:
// G^a(p) = sum_{j<n} L^{2j} Gamma_j^{L^{2j}a}(L^j p) + L^{2n} remainder
Reconstruction reconstruct_green(KernelWorkspace& ws, double a, int n, const MomentumPoint& p);

struct ConvergenceSequence {
    std::vector<double> values;      // Gamma_hat_n(p), n = 0..n_max
    std::vector<double> differences; // |values[n+1] - values[n]|
    std::vector<double> ratios;      // differences[n] / differences[n-1]
    double extrapolated_limit = 0;
};

ConvergenceSequence convergence_sequence(KernelWorkspace& ws, const MomentumPoint& p, double a,
                                         int n_max);

struct DecayReport {
    int k = 0;
    double envelope_max = 0;  // max over the grid of Gamma_hat * (1+p^2)^{2k}
    double gamma_hat_max = 0; // plain max of Gamma_hat
    double at_zero = 0;
    int grid_M = 0;
};

DecayReport decay_check(const SpectralEvaluator& ev, int k, int M);

// min/max of Gamma_hat_n over the M^d momentum grid (PSD scan); works at any
// level without materializing a position kernel
struct SpectrumExtrema {
    double min = 0;
    double max = 0;
};
SpectrumExtrema psd_scan(const SpectralEvaluator& ev, int M);

} // namespace frd

#endif
