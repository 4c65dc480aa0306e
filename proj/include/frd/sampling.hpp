#ifndef FRD_SAMPLING_HPP
#define FRD_SAMPLING_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "frd/decomposition.hpp"
#include "frd/lattice.hpp"

namespace frd {

// Spectral (circulant) sampler for a stationary Gaussian field on an M^d
// index torus whose covariance is a finite-range PSD lattice kernel. The
// periodized torus covariance equals the kernel on the fundamental domain.
class GaussianSampler {
public:
    GaussianSampler(const LatticeKernel& covariance, int M, std::uint64_t seed);

    const LatticeSpec& spec() const { return spec_; }
    int M() const { return M_; }
    std::size_t field_size() const { return sqrt_spectrum_.size(); }
    long clamped_modes() const { return clamped_; }

    // next field in the deterministic stream for this seed
    std::vector<double> sample();

    // exact torus covariance at an index offset (wraps)
    double covariance_at(const Site& offset) const;

private:
    LatticeSpec spec_;
    int M_ = 0;
    long clamped_ = 0;
    std::vector<double> sqrt_spectrum_;
    std::vector<double> torus_covariance_;
    std::uint64_t rng_state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0;
    double normal();
};

struct FieldSample {
    std::vector<double> field; // M^d torus values
    int level = 0;
    std::uint64_t seed = 0;
};

// phi = sum_j L^{-j phi_dim} zeta_j with independent zeta_j ~ Gamma_j; all
// levels share the index torus (level j has spacing eps_j), so the sum is
// index-aligned. phi_dim = (d-2)/2 for the resolvent family.
struct SynthesisResult {
    std::vector<double> phi;
    std::vector<std::uint64_t> level_seeds;
};
SynthesisResult synthesize(const std::vector<const DecompositionLevel*>& levels, int M,
                           double phi_dim, std::uint64_t seed);

// exact covariance of the synthesized field at an index offset
double synthesis_covariance(const std::vector<const DecompositionLevel*>& levels, int M,
                            double phi_dim, const Site& offset);

// Monte Carlo RG step: E_{zeta ~ Gamma_n}[ z(zeta + phi_{1/L}) ] with
// phi_{1/L}[k] = L^{-phi_dim} phi[k] on the index-aligned finer torus.
struct RgEstimate {
    double mean = 0;
    double std_error = 0;
    long n_mc = 0;
};
RgEstimate rg_step(const std::function<double(const std::vector<double>&)>& z,
                   GaussianSampler& fluctuation_sampler, const std::vector<double>& phi,
                   double phi_dim, long n_mc);

} // namespace frd

#endif
