#ifndef FRD_LEVY_HPP
#define FRD_LEVY_HPP

#include <vector>

#include "frd/decomposition.hpp"
#include "frd/spectral.hpp"

namespace frd {

// the constant making const * int_0^inf a^{-alpha/2} (a+t)^{-1} da = t^{-alpha/2}
double levy_constant(double alpha);

// Log-mass trapezoid quadrature for the stable-Levy integral representation.
// The step divides 2 ln L so the mass rescaling a -> L^2 a is an index shift
// on the shared node set.
struct LevyParams {
    double alpha = 1.0;
    double tol = 1e-8;
    double constant = 0;            // sin(pi alpha / 2) / pi
    double h = 0;                   // log-step
    int shift = 0;                  // nodes per L^2 rescale: 2 ln L / h
    std::vector<double> masses;     // a_k = exp(u_min + k h)
    std::vector<double> weights;    // trapezoid weights (h, halved at the ends)
    double truncation_estimate = 0; // bound on the dropped tails at unit scale

    double phi_dim(int d) const { return 0.5 * (d - alpha); }

    // const * sum_k w_k a_k^{-alpha/2} f(a_k)
    template <typename F>
    double integrate(F&& f) const {
        double s = 0;
        for (std::size_t k = 0; k < masses.size(); ++k)
            s += weights[k] * std::pow(masses[k], -0.5 * alpha) * f(masses[k]);
        return constant * s;
    }
};

LevyParams build_quadrature(double alpha, double tol, int L);

// relative residual of const * quadrature[(a+t)^{-1}] against t^{-alpha/2}
double scalar_identity_residual(const LevyParams& q, double t);

// Levy Green's function symbol on Z^d through the mass integral
double levy_green_hat(const LevyParams& q, int d, const MomentumPoint& p);

// Levy fluctuation covariance Gamma_j = const int da a^{-alpha/2} Gamma_j^a
// as a position kernel with range/PSD diagnostics
struct LevyLevel {
    LatticeSpec spec;
    int level = 0;
    double alpha = 0;
    LatticeKernel gamma;
    double gamma0 = 0;
    double provable_range = 0;
    double range_margin = 0;
    double psd_min = 0, psd_max = 0;
    int grid_M = 0;
};
LevyLevel levy_fluctuation(KernelWorkspace& ws, const LevyParams& q, int level);

// position values of C_n on the M-site index torus of spacing eps_n
// (the remainder of the Levy decomposition; infinite range, periodized)
std::vector<double> levy_remainder_torus(KernelWorkspace& ws, const LevyParams& q, int level,
                                         int M);

struct LevyReconstruction {
    double exact = 0;     // (-Lap_hat(p))^{-alpha/2}
    double direct = 0;    // quadrature over the plain resolvent
    double sum = 0;       // telescoped levels plus remainder
    double residual_direct = 0; // |direct - exact| / exact
    double residual_sum = 0;    // |sum - direct| / direct
};
LevyReconstruction levy_reconstruct(KernelWorkspace& ws, const LevyParams& q, int n,
                                    const MomentumPoint& p);

} // namespace frd

#endif
