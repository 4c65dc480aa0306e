#include "frd/sampling.hpp"

#include <cmath>
#include <complex>

#include "frd/torus.hpp"

namespace frd {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

} // namespace

double GaussianSampler::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u = uniform01(splitmix64(rng_state_));
    double v = uniform01(splitmix64(rng_state_));
    double r = std::sqrt(-2.0 * std::log(u));
    have_spare_ = true;
    spare_ = r * std::sin(2.0 * M_PI * v);
    return r * std::cos(2.0 * M_PI * v);
}

GaussianSampler::GaussianSampler(const LatticeKernel& covariance, int M, std::uint64_t seed)
    : spec_(covariance.spec()), M_(M), rng_state_(seed ^ 0x51409ce02477bLL) {
    if ((M & (M - 1)) != 0) throw ConfigError("torus size must be a power of two");
    int range_sites = 0;
    for (int mu = 0; mu < spec_.d; ++mu) range_sites = std::max(range_sites, covariance.radius()[mu]);
    if (M <= 2 * range_sites)
        throw TorusTooSmall("torus of " + std::to_string(M) + " sites cannot hold range " +
                            std::to_string(range_sites));

    // spectrum of the periodized covariance: DFT of the embedded values
    sqrt_spectrum_ = kernel_spectrum_on_grid(covariance, M, 1.0);
    double top = 0;
    for (double v : sqrt_spectrum_) top = std::max(top, v);
    for (double& v : sqrt_spectrum_) {
        if (v < 0) {
            if (v < -1e-10 * top)
                throw NegativeSpectrumBeyondTolerance("spectrum minimum " + std::to_string(v));
            v = 0;
            ++clamped_;
        }
    }
    torus_covariance_ =
        grid_values_from_spectrum(spec_.d, M, 1.0, sqrt_spectrum_); // eps=1: index DFT inverse
    for (double& v : sqrt_spectrum_) v = std::sqrt(v);
}

double GaussianSampler::covariance_at(const Site& offset) const {
    std::size_t idx = 0;
    for (int mu = 0; mu < spec_.d; ++mu) {
        int w = offset[mu] % M_;
        if (w < 0) w += M_;
        idx = idx * static_cast<std::size_t>(M_) + static_cast<std::size_t>(w);
    }
    return torus_covariance_[idx];
}

std::vector<double> GaussianSampler::sample() {
    auto fft = TorusFFT::get(spec_.d, M_);
    std::vector<std::complex<double>> grid(fft->size());
    for (auto& g : grid) g = normal();
    fft->forward(grid.data());
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] *= sqrt_spectrum_[i];
    fft->backward(grid.data());
    double norm = std::pow(static_cast<double>(M_), -spec_.d);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = norm * grid[i].real();
    return out;
}

SynthesisResult synthesize(const std::vector<const DecompositionLevel*>& levels, int M,
                           double phi_dim, std::uint64_t seed) {
    if (levels.empty()) throw ConfigError("synthesis needs at least one level");
    SynthesisResult res;
    std::uint64_t state = seed;
    for (std::size_t j = 0; j < levels.size(); ++j) res.level_seeds.push_back(splitmix64(state));

    for (std::size_t j = 0; j < levels.size(); ++j) {
        const DecompositionLevel& lvl = *levels[j];
        GaussianSampler sampler(lvl.gamma, M, res.level_seeds[j]);
        std::vector<double> zeta = sampler.sample();
        double scale = std::pow(static_cast<double>(lvl.spec.L()),
                                -static_cast<double>(lvl.level) * phi_dim);
        if (res.phi.empty()) res.phi.assign(zeta.size(), 0.0);
        for (std::size_t i = 0; i < zeta.size(); ++i) res.phi[i] += scale * zeta[i];
    }
    return res;
}

double synthesis_covariance(const std::vector<const DecompositionLevel*>& levels, int M,
                            double phi_dim, const Site& offset) {
    double s = 0;
    for (const DecompositionLevel* lvl : levels) {
        GaussianSampler sampler(lvl->gamma, M, 0);
        double scale = std::pow(static_cast<double>(lvl->spec.L()),
                                -2.0 * lvl->level * phi_dim);
        s += scale * sampler.covariance_at(offset);
    }
    return s;
}

RgEstimate rg_step(const std::function<double(const std::vector<double>&)>& z,
                   GaussianSampler& fluctuation_sampler, const std::vector<double>& phi,
                   double phi_dim, long n_mc) {
    if (n_mc < 1) throw ConfigError("need at least one Monte Carlo sample");
    if (phi.size() != fluctuation_sampler.field_size())
        throw ConfigError("background field does not match the sampler torus");
    double Lval = fluctuation_sampler.spec().L();
    double contraction = std::pow(Lval, -phi_dim);

    double sum = 0, sumsq = 0;
    std::vector<double> shifted(phi.size());
    for (long i = 0; i < n_mc; ++i) {
        std::vector<double> zeta = fluctuation_sampler.sample();
        for (std::size_t k = 0; k < zeta.size(); ++k)
            shifted[k] = zeta[k] + contraction * phi[k];
        double v = z(shifted);
        sum += v;
        sumsq += v * v;
    }
    RgEstimate est;
    est.n_mc = n_mc;
    est.mean = sum / static_cast<double>(n_mc);
    double var = std::max(0.0, sumsq / static_cast<double>(n_mc) - est.mean * est.mean);
    est.std_error = std::sqrt(var / static_cast<double>(n_mc));
    return est;
}

} // namespace frd
