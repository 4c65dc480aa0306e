#ifndef FRD_LATTICE_HPP
#define FRD_LATTICE_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <vector>

#include "frd/errors.hpp"

namespace frd {

constexpr int kMaxDim = 4;

// Integer lattice offset at the spacing of the lattice it belongs to.
// Components beyond the active dimension are kept at zero.
using Site = std::array<int, kMaxDim>;

inline Site make_site(std::initializer_list<int> c) {
    Site s{0, 0, 0, 0};
    int i = 0;
    for (int v : c) s[static_cast<std::size_t>(i++)] = v;
    return s;
}

// Sup-norm distance between two sites, in lattice units (multiply by the
// spacing for physical distance).
inline int sup_distance_sites(const Site& x, const Site& y, int d) {
    int m = 0;
    for (int mu = 0; mu < d; ++mu) {
        int diff = x[mu] - y[mu];
        if (diff < 0) diff = -diff;
        if (diff > m) m = diff;
    }
    return m;
}

// A sequence of lattices (eps_n Z)^d with eps_n = L^{-n}, L = 2^p.
// Spacings are exact powers of two, so eps_n * L^n == 1 holds exactly
// in double precision.
struct LatticeSpec {
    int d = 2; // dimension, 1..4
    int p = 1; // L = 2^p
    int n = 0; // level; spacing eps_n = L^{-n}

    LatticeSpec() = default;
    LatticeSpec(int d_, int p_, int n_) : d(d_), p(p_), n(n_) {
        if (d < 1 || d > kMaxDim) throw ConfigError("dimension must be in 1..4");
        if (p < 1) throw ConfigError("L = 2^p requires p >= 1");
        if (n < 0) throw ConfigError("level must be >= 0");
        if (p * n > 60) throw ConfigError("lattice spacing underflows integer coordinates");
    }

    int L() const { return 1 << p; }
    double epsilon() const { return std::ldexp(1.0, -p * n); }
    // Same L, level shifted by k (clamped at 0 is the caller's business).
    LatticeSpec at_level(int level) const { return LatticeSpec(d, p, level); }

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

// Real-valued function of finite support on a lattice, stored as a dense
// origin-centered box. Values are densities against the measure
// dz = eps^d * sum, unless the surrounding code says otherwise (covariance
// kernels hold plain values). Zero outside the box by convention.
class LatticeKernel {
public:
    LatticeKernel() = default;
    LatticeKernel(const LatticeSpec& spec, const std::array<int, kMaxDim>& radius);

    static LatticeKernel delta(const LatticeSpec& spec); // density eps^{-d} at the origin

    const LatticeSpec& spec() const { return spec_; }
    int dim() const { return spec_.d; }
    const std::array<int, kMaxDim>& radius() const { return radius_; }
    int side(int mu) const { return 2 * radius_[mu] + 1; }
    std::size_t size() const { return values_.size(); }

    // physical sup-norm radius of the storage box
    double support_radius() const;

    double at(const Site& x) const { // zero-extended lookup
        if (!inside(x)) return 0.0;
        return values_[index(x)];
    }
    double& ref(const Site& x) {
        assert(inside(x));
        return values_[index(x)];
    }
    bool inside(const Site& x) const {
        for (int mu = 0; mu < spec_.d; ++mu)
            if (x[mu] < -radius_[mu] || x[mu] > radius_[mu]) return false;
        return true;
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool even_symmetric() const { return even_; }
    void set_even_symmetric(bool v) { even_ = v; }

    // iterate f(site, value) over the storage box
    template <typename F>
    void for_each(F&& f) const {
        Site x{0, 0, 0, 0};
        walk(0, x, std::forward<F>(f));
    }

    std::size_t index(const Site& x) const {
        std::size_t idx = 0;
        for (int mu = 0; mu < spec_.d; ++mu)
            idx = idx * static_cast<std::size_t>(side(mu)) +
                  static_cast<std::size_t>(x[mu] + radius_[mu]);
        return idx;
    }

    double max_abs() const;
    // drop entries below threshold * max_abs to exact zero
    void chop(double threshold);

private:
    template <typename F>
    void walk(int mu, Site& x, F&& f) const {
        if (mu == spec_.d) {
            f(static_cast<const Site&>(x), values_[index(x)]);
            return;
        }
        for (int k = -radius_[mu]; k <= radius_[mu]; ++k) {
            x[mu] = k;
            walk(mu + 1, x, f);
        }
        x[mu] = 0;
    }

    LatticeSpec spec_;
    std::array<int, kMaxDim> radius_{0, 0, 0, 0};
    std::vector<double> values_;
    bool even_ = false;
};

// Momentum in the Brillouin zone B_eps = [-pi/eps, pi/eps]^d.
struct MomentumPoint {
    std::array<double, kMaxDim> P{0, 0, 0, 0};
    MomentumPoint() = default;
    MomentumPoint(std::initializer_list<double> c) {
        int i = 0;
        for (double v : c) P[static_cast<std::size_t>(i++)] = v;
    }
    double operator[](int mu) const { return P[static_cast<std::size_t>(mu)]; }
    double& operator[](int mu) { return P[static_cast<std::size_t>(mu)]; }
    double norm2(int d) const {
        double s = 0;
        for (int mu = 0; mu < d; ++mu) s += P[mu] * P[mu];
        return s;
    }
    bool in_brillouin(int d, double eps) const;
    static MomentumPoint scaled(const MomentumPoint& q, double factor) {
        MomentumPoint r;
        for (int mu = 0; mu < kMaxDim; ++mu) r.P[mu] = q.P[mu] * factor;
        return r;
    }
};

// measure integral: eps^d * sum of values
double measure_integral(const LatticeKernel& f);

// physical sup distance between sites of a common lattice
double sup_distance(const LatticeSpec& spec, const Site& x, const Site& y);

// forward (sign=+1) / backward (sign=-1) lattice derivative along axis mu;
// support grows by one site on that axis, zero extension at the edge
LatticeKernel lattice_derivative(const LatticeKernel& f, int mu, int sign);

// nearest-neighbour Laplacian, eps^{-2} sum_nbr (f(y) - f(x))
LatticeKernel laplacian_apply(const LatticeKernel& f);

// Fourier symbol of the Laplacian; <= 0 on the Brillouin zone
double dispersion(const MomentumPoint& P, int d, double eps);

// L2 pairing under the lattice measure (zero-extended)
double inner_product(const LatticeKernel& f, const LatticeKernel& g);

// Optional axis-aligned box restriction for norms over a sub-domain
// (in sites, inclusive), empty = whole lattice.
struct BoxDomain {
    Site lo{0, 0, 0, 0};
    Site hi{0, 0, 0, 0};
    bool contains(const Site& x, int d) const {
        for (int mu = 0; mu < d; ++mu)
            if (x[mu] < lo[mu] || x[mu] > hi[mu]) return false;
        return true;
    }
};

// lattice Sobolev norm: (sum_{j<=k} 2^{-j} sum over ordered tuples of signed
// directions of the squared L2 norm of the j-th derivative)^{1/2}
double sobolev_norm(const LatticeKernel& f, int k, const std::optional<BoxDomain>& domain = {});

// same norm computed through <f, (-Laplacian)^j f>; equal to sobolev_norm on
// the full lattice, cheap enough for large kernels
double sobolev_norm_spectral_form(const LatticeKernel& f, int k);

// absolute defect of the discrete energy identity for h, phi and g=(a-Lap)h,
// together with the magnitude scale of its terms
struct IdentityResidual {
    double residual = 0;
    double scale = 0;
};
IdentityResidual green_identity_residual(const LatticeKernel& h, const LatticeKernel& phi,
                                         double a);

// Poincare check on the closed unit cube [0,1]^d at spacing eps=spec.epsilon():
// u is given on the (1/eps+1)^d grid, must vanish on the cube boundary.
// Returns (lhs, rhs) = (int |u|^2, C * sum_forward int |grad u|^2) with C = d.
struct PoincarePair {
    double lhs = 0;
    double rhs = 0;
};
PoincarePair poincare_residual(const LatticeSpec& spec, const std::vector<double>& u);

} // namespace frd

#endif
