#ifndef FRD_TORUS_HPP
#define FRD_TORUS_HPP

#include <complex>
#include <memory>
#include <vector>

#include "frd/lattice.hpp"

namespace frd {

// Complex DFT on an M^d index torus (row-major). Plans are created with
// FFTW_ESTIMATE so repeated runs are bit-identical; executions on distinct
// buffers are thread-safe.
class TorusFFT {
public:
    static std::shared_ptr<const TorusFFT> get(int d, int M); // process-wide registry

    ~TorusFFT();

    int d() const { return d_; }
    int M() const { return M_; }
    std::size_t size() const { return size_; }

    // f(k) = sum_x f(x) e^{-2 pi i k.x / M}, in place
    void forward(std::complex<double>* data) const;
    // f(x) = sum_k f(k) e^{+2 pi i k.x / M}, in place, unnormalized
    void backward(std::complex<double>* data) const;

private:
    TorusFFT(int d, int M);
    int d_, M_;
    std::size_t size_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

// smallest power of two >= n
int pow2_at_least(long n);

// momentum component of grid index k on the spacing-eps torus, folded to the
// symmetric Brillouin interval
inline double torus_momentum(int k, int M, double eps) {
    int folded = (k <= M / 2) ? k : k - M;
    return 2.0 * M_PI * folded / (M * eps);
}

// walk all grid indices of an M^d torus; f(flat_index, site_index[]) where
// site components are in [0, M)
template <typename F>
void for_each_grid_index(int d, int M, F&& f) {
    std::array<int, kMaxDim> k{0, 0, 0, 0};
    std::size_t total = 1;
    for (int mu = 0; mu < d; ++mu) total *= static_cast<std::size_t>(M);
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(flat, static_cast<const std::array<int, kMaxDim>&>(k));
        for (int mu = d - 1; mu >= 0; --mu) {
            if (++k[mu] < M) break;
            k[mu] = 0;
        }
    }
}

// Fourier transform of a finite-support kernel on the full momentum grid of
// an M^d torus: out[k] = scale * sum_x K(x) e^{-2 pi i k.x / M}. The kernel
// box must fit in the torus. Pass scale = eps^d for densities (gives the
// measure Fourier transform), scale = 1 for covariance values (gives the
// sampling spectrum). Kernels are even, so the result is real.
std::vector<double> kernel_spectrum_on_grid(const LatticeKernel& kernel, int M, double scale);

// inverse: position values on the torus from a real momentum-grid function,
// value(x) = (M eps)^{-d} sum_k spectrum[k] e^{+2 pi i k.x / M}
std::vector<double> grid_values_from_spectrum(int d, int M, double eps,
                                              const std::vector<double>& spectrum);

// extract the origin-centered box of side 2*radius+1 from torus values,
// reporting the largest |value| strictly beyond `beyond` (sup-norm, in sites)
// over the whole fundamental domain
LatticeKernel extract_kernel(const LatticeSpec& spec, int M,
                             const std::vector<double>& torus_values, int radius, int beyond,
                             double* max_beyond);

} // namespace frd

#endif
