#include "frd/torus.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

namespace frd {

namespace {
std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

TorusFFT::TorusFFT(int d, int M) : d_(d), M_(M) {
    size_ = 1;
    for (int mu = 0; mu < d; ++mu) size_ *= static_cast<std::size_t>(M);
    std::vector<std::complex<double>> buf(size_);
    std::array<int, kMaxDim> dims{};
    for (int mu = 0; mu < d; ++mu) dims[static_cast<std::size_t>(mu)] = M;
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    fwd_ = fftw_plan_dft(d, dims.data(), ptr, ptr, FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft(d, dims.data(), ptr, ptr, FFTW_BACKWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_ || !bwd_) throw SolverFailure("FFTW refused the torus plan");
}

TorusFFT::~TorusFFT() {
    std::lock_guard<std::mutex> lock(registry_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

std::shared_ptr<const TorusFFT> TorusFFT::get(int d, int M) {
    static std::map<std::pair<int, int>, std::weak_ptr<const TorusFFT>> registry;
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto& slot = registry[{d, M}];
    if (auto alive = slot.lock()) return alive;
    std::shared_ptr<const TorusFFT> fresh(new TorusFFT(d, M));
    slot = fresh;
    return fresh;
}

void TorusFFT::forward(std::complex<double>* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), ptr, ptr);
}

void TorusFFT::backward(std::complex<double>* data) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), ptr, ptr);
}

int pow2_at_least(long n) {
    int m = 1;
    while (m < n) {
        m *= 2;
        if (m > (1 << 28)) throw TorusTooSmall("torus size overflow");
    }
    return m;
}

std::vector<double> kernel_spectrum_on_grid(const LatticeKernel& kernel, int M, double scale) {
    const int d = kernel.dim();
    for (int mu = 0; mu < d; ++mu)
        if (2 * kernel.radius()[mu] + 1 > M)
            throw TorusTooSmall("kernel box does not fit the torus");
    auto fft = TorusFFT::get(d, M);
    std::vector<std::complex<double>> grid(fft->size(), 0.0);
    kernel.for_each([&](const Site& x, double v) {
        if (v == 0.0) return;
        std::size_t idx = 0;
        for (int mu = 0; mu < d; ++mu) {
            int w = x[mu] < 0 ? x[mu] + M : x[mu]; // wrap negative offsets
            idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(w);
        }
        grid[idx] += v;
    });
    fft->forward(grid.data());
    std::vector<double> out(fft->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * grid[i].real();
    return out;
}

std::vector<double> grid_values_from_spectrum(int d, int M, double eps,
                                              const std::vector<double>& spectrum) {
    auto fft = TorusFFT::get(d, M);
    if (spectrum.size() != fft->size()) throw ConfigError("spectrum size mismatch");
    std::vector<std::complex<double>> grid(spectrum.begin(), spectrum.end());
    fft->backward(grid.data());
    double norm = std::pow(M * eps, -d);
    std::vector<double> out(fft->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = norm * grid[i].real();
    return out;
}

LatticeKernel extract_kernel(const LatticeSpec& spec, int M,
                             const std::vector<double>& torus_values, int radius, int beyond,
                             double* max_beyond) {
    const int d = spec.d;
    if (2 * radius + 1 > M) throw TorusTooSmall("extraction box larger than the torus");
    std::array<int, kMaxDim> rad{0, 0, 0, 0};
    for (int mu = 0; mu < d; ++mu) rad[mu] = radius;
    LatticeKernel out(spec, rad);
    double worst = 0;
    for_each_grid_index(d, M, [&](std::size_t flat, const std::array<int, kMaxDim>& k) {
        Site x{0, 0, 0, 0};
        int sup = 0;
        for (int mu = 0; mu < d; ++mu) {
            x[mu] = (k[mu] <= M / 2) ? k[mu] : k[mu] - M;
            sup = std::max(sup, std::abs(x[mu]));
        }
        if (sup >= beyond) worst = std::max(worst, std::fabs(torus_values[flat]));
        if (out.inside(x)) out.ref(x) = torus_values[flat];
    });
    if (max_beyond) *max_beyond = worst;
    return out;
}

} // namespace frd
