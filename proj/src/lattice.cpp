#include "frd/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace frd {

LatticeKernel::LatticeKernel(const LatticeSpec& spec, const std::array<int, kMaxDim>& radius)
    : spec_(spec), radius_(radius) {
    std::size_t total = 1;
    for (int mu = 0; mu < spec_.d; ++mu) {
        if (radius_[mu] < 0) throw ConfigError("kernel radius must be >= 0");
        total *= static_cast<std::size_t>(2 * radius_[mu] + 1);
    }
    values_.assign(total, 0.0);
}

LatticeKernel LatticeKernel::delta(const LatticeSpec& spec) {
    LatticeKernel k(spec, {0, 0, 0, 0});
    double eps = spec.epsilon();
    k.values_[0] = std::pow(eps, -spec.d);
    k.even_ = true;
    return k;
}

double LatticeKernel::support_radius() const {
    int r = 0;
    for (int mu = 0; mu < spec_.d; ++mu) r = std::max(r, radius_[mu]);
    return r * spec_.epsilon();
}

double LatticeKernel::max_abs() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

void LatticeKernel::chop(double threshold) {
    double cut = threshold * max_abs();
    for (double& v : values_)
        if (std::fabs(v) < cut) v = 0.0;
}

bool MomentumPoint::in_brillouin(int d, double eps) const {
    double lim = M_PI / eps;
    for (int mu = 0; mu < d; ++mu)
        if (P[mu] < -lim || P[mu] > lim) return false;
    return true;
}

double measure_integral(const LatticeKernel& f) {
    double s = 0;
    for (double v : f.values()) s += v;
    return std::pow(f.spec().epsilon(), f.dim()) * s;
}

double sup_distance(const LatticeSpec& spec, const Site& x, const Site& y) {
    return spec.epsilon() * sup_distance_sites(x, y, spec.d);
}

LatticeKernel lattice_derivative(const LatticeKernel& f, int mu, int sign) {
    if (mu < 0 || mu >= f.dim()) throw ConfigError("derivative axis out of range");
    if (sign != 1 && sign != -1) throw ConfigError("derivative sign must be +-1");
    std::array<int, kMaxDim> radius = f.radius();
    radius[mu] += 1;
    LatticeKernel out(f.spec(), radius);
    double inv_eps = 1.0 / f.spec().epsilon();
    out.for_each([&](const Site& x, double) {
        Site shifted = x;
        shifted[mu] += sign;
        double v = inv_eps * (f.at(shifted) - f.at(x));
        out.ref(x) = v;
    });
    return out;
}

LatticeKernel laplacian_apply(const LatticeKernel& f) {
    std::array<int, kMaxDim> radius = f.radius();
    for (int mu = 0; mu < f.dim(); ++mu) radius[mu] += 1;
    LatticeKernel out(f.spec(), radius);
    double eps = f.spec().epsilon();
    double inv_eps2 = 1.0 / (eps * eps);
    out.for_each([&](const Site& x, double) {
        double acc = 0;
        double fx = f.at(x);
        for (int mu = 0; mu < f.dim(); ++mu) {
            Site y = x;
            y[mu] += 1;
            acc += f.at(y) - fx;
            y[mu] -= 2;
            acc += f.at(y) - fx;
        }
        out.ref(x) = inv_eps2 * acc;
    });
    return out;
}

double dispersion(const MomentumPoint& P, int d, double eps) {
    double s = 0;
    for (int mu = 0; mu < d; ++mu) s += std::cos(eps * P[mu]) - 1.0;
    return 2.0 / (eps * eps) * s;
}

double inner_product(const LatticeKernel& f, const LatticeKernel& g) {
    // iterate over the smaller box, zero extension outside
    const LatticeKernel& a = (f.size() <= g.size()) ? f : g;
    const LatticeKernel& b = (f.size() <= g.size()) ? g : f;
    double s = 0;
    a.for_each([&](const Site& x, double v) {
        if (v != 0.0) s += v * b.at(x);
    });
    return std::pow(f.spec().epsilon(), f.dim()) * s;
}

namespace {

double l2_sq(const LatticeKernel& f, const std::optional<BoxDomain>& domain) {
    double s = 0;
    f.for_each([&](const Site& x, double v) {
        if (!domain || domain->contains(x, f.dim())) s += v * v;
    });
    return std::pow(f.spec().epsilon(), f.dim()) * s;
}

} // namespace

double sobolev_norm(const LatticeKernel& f, int k, const std::optional<BoxDomain>& domain) {
    if (k < 0) throw ConfigError("sobolev order must be >= 0");
    // ordered tuples of signed directions; (2d)^j kernels at level j
    double total = l2_sq(f, domain);
    std::vector<LatticeKernel> level{f};
    double weight = 1.0;
    for (int j = 1; j <= k; ++j) {
        weight *= 0.5;
        std::vector<LatticeKernel> next;
        next.reserve(level.size() * 2 * static_cast<std::size_t>(f.dim()));
        for (const auto& g : level)
            for (int mu = 0; mu < f.dim(); ++mu)
                for (int sign : {+1, -1}) next.push_back(lattice_derivative(g, mu, sign));
        level = std::move(next);
        for (const auto& g : level) total += weight * l2_sq(g, domain);
    }
    return std::sqrt(total);
}

double sobolev_norm_spectral_form(const LatticeKernel& f, int k) {
    // sum_j <f, (-Lap)^j f>; the 2^{-j} weight cancels against the signed
    // tuple count once derivatives are paired by adjointness
    double total = 0;
    LatticeKernel g = f;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) {
            LatticeKernel lap = laplacian_apply(g);
            for (double& v : lap.values()) v = -v;
            g = std::move(lap);
        }
        total += inner_product(f, g);
    }
    return std::sqrt(total);
}

IdentityResidual green_identity_residual(const LatticeKernel& h, const LatticeKernel& phi,
                                         double a) {
    LatticeKernel g = laplacian_apply(h); // g = (a - Lap) h
    {
        std::array<int, kMaxDim> radius = g.radius();
        LatticeKernel tmp(h.spec(), radius);
        tmp.for_each([&](const Site& x, double) { tmp.ref(x) = a * h.at(x) - g.at(x); });
        g = std::move(tmp);
    }
    double epsd = std::pow(h.spec().epsilon(), h.dim());

    double mass_term = 0;     // a int phi h^2
    double gradient_term = 0; // (1/2) sum_{+-e} int phi (grad_e h)^2
    double source_term = 0;   // int phi h g
    double curvature_term = 0; // (1/2) int (Lap phi) h^2
    LatticeKernel lap_phi = laplacian_apply(phi);

    // phi has compact support; every integrand below carries a phi or Lap phi
    // factor, so iterating over the Lap-phi box covers all nonzero terms
    double inv_eps = 1.0 / h.spec().epsilon();
    lap_phi.for_each([&](const Site& x, double lp) {
        double ph = phi.at(x);
        double hx = h.at(x);
        if (ph != 0.0) {
            mass_term += ph * hx * hx;
            source_term += ph * hx * g.at(x);
            double grads = 0;
            for (int mu = 0; mu < h.dim(); ++mu) {
                for (int sign : {+1, -1}) {
                    Site y = x;
                    y[mu] += sign;
                    double dh = inv_eps * (h.at(y) - hx);
                    grads += dh * dh;
                }
            }
            gradient_term += 0.5 * ph * grads;
        }
        curvature_term += 0.5 * lp * hx * hx;
    });
    mass_term *= a * epsd;
    gradient_term *= epsd;
    source_term *= epsd;
    curvature_term *= epsd;

    double lhs = mass_term + gradient_term;
    double rhs = source_term + curvature_term;
    IdentityResidual r;
    r.residual = std::fabs(lhs - rhs);
    r.scale = std::fabs(mass_term) + std::fabs(gradient_term) + std::fabs(source_term) +
              std::fabs(curvature_term);
    return r;
}

PoincarePair poincare_residual(const LatticeSpec& spec, const std::vector<double>& u) {
    int d = spec.d;
    double eps = spec.epsilon();
    long m = std::lround(1.0 / eps) + 1; // sites per axis of the closed unit cube
    std::size_t total = 1;
    for (int mu = 0; mu < d; ++mu) total *= static_cast<std::size_t>(m);
    if (u.size() != total) throw ConfigError("field size does not match the unit cube grid");

    auto index_of = [&](const std::array<long, kMaxDim>& x) {
        std::size_t idx = 0;
        for (int mu = 0; mu < d; ++mu)
            idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(x[mu]);
        return idx;
    };

    // reject nonzero boundary values
    std::array<long, kMaxDim> x{0, 0, 0, 0};
    std::function<void(int)> check = [&](int mu) {
        if (mu == d) {
            bool on_boundary = false;
            for (int nu = 0; nu < d; ++nu)
                if (x[nu] == 0 || x[nu] == m - 1) on_boundary = true;
            if (on_boundary && u[index_of(x)] != 0.0)
                throw ConfigError("field does not vanish on the unit cube boundary");
            return;
        }
        for (x[mu] = 0; x[mu] < m; ++x[mu]) check(mu + 1);
        x[mu] = 0;
    };
    check(0);

    double epsd = std::pow(eps, d);
    double lhs = 0;
    for (double v : u) lhs += v * v;
    lhs *= epsd;

    double grad = 0;
    std::function<void(int)> accumulate = [&](int mu) {
        if (mu == d) {
            std::size_t idx = index_of(x);
            for (int nu = 0; nu < d; ++nu) {
                if (x[nu] + 1 >= m) continue;
                std::array<long, kMaxDim> y = x;
                y[nu] += 1;
                double diff = (u[index_of(y)] - u[idx]) / eps;
                grad += diff * diff;
            }
            return;
        }
        for (x[mu] = 0; x[mu] < m; ++x[mu]) accumulate(mu + 1);
        x[mu] = 0;
    };
    accumulate(0);
    grad *= epsd;

    PoincarePair pr;
    pr.lhs = lhs;
    pr.rhs = static_cast<double>(d) * grad;
    return pr;
}

} // namespace frd
