#ifndef FRD_AVERAGING_HPP
#define FRD_AVERAGING_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "frd/bump.hpp"
#include "frd/dirichlet.hpp"
#include "frd/lattice.hpp"

namespace frd {

class KernelCache; // disk cache, see cache.hpp

// Mollified translation-averaged Poisson operator A^a_{eps_n,m}(R_m)(0,du)
// as an explicit finite-support defective probability kernel. The density is
// taken against dz = eps^d sum, so measure_integral(density) is the mass.
struct AveragingKernel {
    LatticeSpec spec;     // lattice (eps_n Z)^d
    int m = 0;            // scale index, 0 <= m <= n
    double a = 0;         // mass parameter
    double R = 0;         // cube side R_m = L^{-(m-1)}
    LatticeKernel density;
    double mass = 0;

    double defect() const { return 1.0 - mass; }
    // upper bound on the defect from the mean exit time
    double defect_bound() const { return a * R * R / 2.0; }
};

struct BuildOptions {
    bool symmetry_reduction = true; // solve one Poisson row per signed-permutation orbit
    int threads = 1;
    KernelCache* cache = nullptr;
};

AveragingKernel build_averaging_kernel(const LatticeSpec& spec, int m, double a,
                                       const BumpProfile& bump, const BuildOptions& opt = {});

// Fourier transform of a lattice kernel density at an arbitrary momentum,
// int du D(u) e^{-ip.u}; real part returned (kernels here are even).
double kernel_fourier(const LatticeKernel& density, const MomentumPoint& p);

inline double averaging_fourier(const AveragingKernel& k, const MomentumPoint& p) {
    return kernel_fourier(k.density, p);
}

// (A f)(x) = int A(x,du) f(u), the translation-invariant convolution
LatticeKernel apply_averaging(const AveragingKernel& k, const LatticeKernel& f);

// density convolution (k1 * k2)(u) = int dv k1(v) k2(u - v)
LatticeKernel convolve_density(const LatticeKernel& k1, const LatticeKernel& k2);

// Composite operator over scales j = 1..n; identity for n = 0.
struct CompositeAveraging {
    LatticeSpec spec;
    double a = 0;
    std::vector<AveragingKernel> factors; // factor for scale index m at position m-1
    LatticeKernel combined;               // convolution of the factor densities
    double mass = 1;                      // product of factor masses
};

CompositeAveraging composite_averaging(const LatticeSpec& spec, double a, const BumpProfile& bump,
                                       const BuildOptions& opt = {});

double composite_fourier(const CompositeAveraging& c, const MomentumPoint& p);

// max over all coarse-kernel offsets of
// |A^a_{eps_{n-1},m-1}(0,u) - L^{-d} A^{L^2 a}_{eps_n,m}(0,u/L)| / max|coarse|,
// plus the mass mismatch; both vanish in exact arithmetic
struct ScalingResidual {
    double density_residual = 0;
    double mass_residual = 0;
};
ScalingResidual scaling_residual(const LatticeSpec& fine_spec, int m, double a,
                                 const BumpProfile& bump, const BuildOptions& opt = {});

// second moment of the density along one axis, int u_mu^2 A(0,du)
double second_moment(const LatticeKernel& density, int mu);

// Builds and memoizes averaging kernels and composites per (level, m, a);
// optionally backed by the disk cache. Shared by the spectral evaluators.
class KernelWorkspace {
public:
    explicit KernelWorkspace(int d, int p, BuildOptions opt = {});

    int d() const { return d_; }
    int L() const { return 1 << p_; }
    int p() const { return p_; }
    const BumpProfile& bump() const { return bump_; }
    const BuildOptions& options() const { return opt_; }

    const AveragingKernel& averaging(int level, int m, double a);
    const CompositeAveraging& composite(int level, double a);

    // visit every kernel built so far (defect-bound sweeps)
    template <typename F>
    void for_each_kernel(F&& f) const {
        for (const auto& [key, kernel] : kernels_) f(*kernel);
    }

private:
    int d_, p_;
    BuildOptions opt_;
    BumpProfile bump_;
    std::map<std::string, std::unique_ptr<AveragingKernel>> kernels_;
    std::map<std::string, std::unique_ptr<CompositeAveraging>> composites_;
    std::mutex mutex_;
};

} // namespace frd

#endif
