#ifndef FRD_DECOMPOSITION_HPP
#define FRD_DECOMPOSITION_HPP

#include <map>

#include "frd/spectral.hpp"

namespace frd {

// One constructed level Gamma^a_n on the eps_n lattice, as a position-space
// covariance with its verification diagnostics.
struct DecompositionLevel {
    LatticeSpec spec;
    int level = 0;
    double a = 0;
    LatticeKernel gamma;        // covariance values, zero beyond the provable range
    double gamma0 = 0;          // gamma at the origin
    double provable_range = 0;  // physical: 3L at level 0, 6L above
    double range_margin = 0;    // max |gamma| at/beyond the range, relative to gamma0
    double psd_min = 0;         // extrema of Gamma_hat over the evaluation grid
    double psd_max = 0;
    int grid_M = 0;
    std::map<int, double> sobolev; // H_k for k = 0..4
};

// fluctuation covariance Gamma^a_{eps_n} (range 3L) as a position kernel
LatticeKernel fluctuation_position(KernelWorkspace& ws, int level, double a,
                                   double* range_margin = nullptr, int* grid_M = nullptr);

// Gamma^a_n with diagnostics; level 0 coincides with fluctuation_position
DecompositionLevel rescaled_fluctuation(KernelWorkspace& ws, int level, double a,
                                        int sobolev_max_k = 4);

// number of sites of the provable range at this level, and the matching
// power-of-two torus (>= 64 per side so spectra double as PSD scans)
int provable_range_sites(const LatticeSpec& spec, int level);
int position_grid_size(const LatticeSpec& spec, int level);

// sup-norm difference of two levels' kernels restricted to the common
// (eps_l Z)^d sublattice (diagnostic for the continuum-limit trend)
double restriction_difference(const DecompositionLevel& coarse, const DecompositionLevel& fine,
                              int l);

} // namespace frd

#endif
