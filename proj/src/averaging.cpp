#include "frd/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "frd/cache.hpp"
#include "frd/parallel.hpp"

namespace frd {

namespace {

// signed permutation sigma(x)[mu] = sign[mu] * x[perm[mu]]
struct SignedPerm {
    std::array<int, kMaxDim> perm{0, 1, 2, 3};
    std::array<int, kMaxDim> sign{1, 1, 1, 1};

    Site apply(const Site& x, int d) const {
        Site y{0, 0, 0, 0};
        for (int mu = 0; mu < d; ++mu) y[mu] = sign[mu] * x[perm[mu]];
        return y;
    }
};

// canonical orbit representative: |components| sorted descending
Site canonical(const Site& z, int d) {
    Site c{0, 0, 0, 0};
    for (int mu = 0; mu < d; ++mu) c[mu] = std::abs(z[mu]);
    std::sort(c.begin(), c.begin() + d, std::greater<int>());
    return c;
}

// a signed permutation with sigma(canonical(z)) == z
SignedPerm perm_from_canonical(const Site& canon, const Site& z, int d) {
    SignedPerm s;
    std::array<bool, kMaxDim> used{false, false, false, false};
    for (int mu = 0; mu < d; ++mu) {
        int want = std::abs(z[mu]);
        for (int j = 0; j < d; ++j) {
            if (!used[j] && canon[j] == want) {
                used[j] = true;
                s.perm[mu] = j;
                break;
            }
        }
        s.sign[mu] = (z[mu] < 0) ? -1 : 1;
    }
    return s;
}

double dyadic_pow(int L, int e) { // L^e for L = 2^p, exact
    int p = 0;
    while ((1 << p) < L) ++p;
    return std::ldexp(1.0, p * e);
}

} // namespace

AveragingKernel build_averaging_kernel(const LatticeSpec& spec, int m, double a,
                                       const BumpProfile& bump, const BuildOptions& opt) {
    if (m < 0 || m > spec.n) throw ConfigError("scale index must satisfy 0 <= m <= n");
    if (a < 0) throw ConfigError("mass parameter must be >= 0");
    const int d = spec.d;
    const int L = spec.L();
    const double eps = spec.epsilon();
    const double R = dyadic_pow(L, 1 - m); // R_m = L^{-(m-1)}

    std::string cache_key;
    if (opt.cache) {
        cache_key = KernelCache::key(spec, m, a, R, bump.hash());
        if (auto hit = opt.cache->load(cache_key)) return *std::move(hit);
    }

    const double c_eps = lattice_normalizer(std::ldexp(1.0, -spec.p * (spec.n - m)), bump);

    CubeDomain cube(spec, R);
    DirichletSolver solver(cube, a);

    // translate centers z with g_m(z) != 0, i.e. |z|_2 < R/4
    const double zrad = R / 4.0;
    const int zmax = static_cast<int>(std::ceil(zrad / eps));

    std::vector<Site> translates;
    std::vector<double> weights; // c_eps * g_m(z)
    {
        Site k{0, 0, 0, 0};
        std::function<void(int)> enumerate = [&](int mu) {
            if (mu == d) {
                double r2 = 0;
                for (int nu = 0; nu < d; ++nu) r2 += (k[nu] * eps) * (k[nu] * eps);
                double r = std::sqrt(r2);
                if (r < zrad) {
                    double w = c_eps * bump.value_scaled(m, r);
                    if (w > 0) {
                        translates.push_back(k);
                        weights.push_back(w);
                    }
                }
                return;
            }
            for (k[mu] = -zmax; k[mu] <= zmax; ++k[mu]) enumerate(mu + 1);
            k[mu] = 0;
        };
        enumerate(0);
    }
    if (translates.empty()) throw DegenerateBump("no lattice translates inside the bump support");

    // one Poisson row per signed-permutation orbit; the cube, operator and
    // bump weight are invariant so rows transport exactly
    std::vector<Site> canon_of(translates.size());
    std::map<Site, std::size_t> row_index;
    std::vector<Site> canon_list;
    for (std::size_t i = 0; i < translates.size(); ++i) {
        Site c = opt.symmetry_reduction ? canonical(translates[i], d) : translates[i];
        canon_of[i] = c;
        if (row_index.emplace(c, canon_list.size()).second) canon_list.push_back(c);
    }
    std::vector<PoissonKernelRow> rows(canon_list.size());
    parallel_for(static_cast<long>(canon_list.size()), opt.threads, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            Site start = canon_list[static_cast<std::size_t>(i)];
            for (int mu = 0; mu < d; ++mu) start[mu] = -start[mu];
            rows[static_cast<std::size_t>(i)] = solver.poisson_row(start);
        }
    });

    // scatter: D[sigma(b + z*)] += w_z * rho(-z*, b)
    const int support = cube.half() + 1 + zmax;
    std::array<int, kMaxDim> radius{0, 0, 0, 0};
    for (int mu = 0; mu < d; ++mu) radius[mu] = support;
    AveragingKernel out;
    out.spec = spec;
    out.m = m;
    out.a = a;
    out.R = R;
    out.density = LatticeKernel(spec, radius);
    for (std::size_t i = 0; i < translates.size(); ++i) {
        const Site& z = translates[i];
        const Site& c = canon_of[i];
        const PoissonKernelRow& row = rows[row_index.at(c)];
        SignedPerm sigma = perm_from_canonical(c, z, d);
        const auto& bpts = cube.boundary();
        for (std::size_t j = 0; j < bpts.size(); ++j) {
            double w = row.weights[j];
            if (w == 0.0) continue;
            Site u = bpts[j];
            for (int mu = 0; mu < d; ++mu) u[mu] += c[mu];
            out.density.ref(sigma.apply(u, d)) += weights[i] * w;
        }
    }
    // fold the central inversion so K(x) = K(-x) holds bit-exactly (the sum
    // is symmetric term-by-term; only the accumulation order differs)
    out.density.for_each([&](const Site& u, double v) {
        Site neg{0, 0, 0, 0};
        for (int mu = 0; mu < d; ++mu) neg[mu] = -u[mu];
        if (u < neg) {
            double folded = 0.5 * (v + out.density.at(neg));
            out.density.ref(u) = folded;
            out.density.ref(neg) = folded;
        }
    });
    out.density.set_even_symmetric(true);
    out.density.chop(1e-15);
    out.mass = measure_integral(out.density);

    if (out.mass > 1.0 + 1e-10)
        throw SolverFailure("averaging kernel mass exceeds 1: " + std::to_string(out.mass));
    if (out.defect() > out.defect_bound() + 1e-10)
        throw SolverFailure("averaging kernel defect violates the exit-time bound");

    if (opt.cache) opt.cache->store(cache_key, out);
    return out;
}

double kernel_fourier(const LatticeKernel& density, const MomentumPoint& p) {
    const int d = density.dim();
    const double eps = density.spec().epsilon();
    // separable phase tables keep the sum O(support * d)
    std::array<std::vector<std::complex<double>>, kMaxDim> phase;
    for (int mu = 0; mu < d; ++mu) {
        int r = density.radius()[mu];
        phase[mu].resize(static_cast<std::size_t>(2 * r + 1));
        for (int k = -r; k <= r; ++k)
            phase[mu][static_cast<std::size_t>(k + r)] =
                std::polar(1.0, -p[mu] * eps * k);
    }
    std::complex<double> acc = 0;
    density.for_each([&](const Site& x, double v) {
        if (v == 0.0) return;
        std::complex<double> ph = phase[0][static_cast<std::size_t>(x[0] + density.radius()[0])];
        for (int mu = 1; mu < d; ++mu)
            ph *= phase[mu][static_cast<std::size_t>(x[mu] + density.radius()[mu])];
        acc += v * ph;
    });
    return std::pow(eps, d) * acc.real();
}

LatticeKernel apply_averaging(const AveragingKernel& k, const LatticeKernel& f) {
    if (!(k.spec == f.spec())) throw ConfigError("kernel and field live on different lattices");
    return convolve_density(k.density, f);
}

LatticeKernel convolve_density(const LatticeKernel& k1, const LatticeKernel& k2) {
    const int d = k1.dim();
    std::array<int, kMaxDim> radius{0, 0, 0, 0};
    for (int mu = 0; mu < d; ++mu) radius[mu] = k1.radius()[mu] + k2.radius()[mu];
    LatticeKernel out(k1.spec(), radius);
    double epsd = std::pow(k1.spec().epsilon(), d);
    k1.for_each([&](const Site& v, double w1) {
        if (w1 == 0.0) return;
        k2.for_each([&](const Site& u, double w2) {
            if (w2 == 0.0) return;
            Site s = u;
            for (int mu = 0; mu < d; ++mu) s[mu] += v[mu];
            out.ref(s) += w1 * w2;
        });
    });
    for (double& v : out.values()) v *= epsd;
    return out;
}

CompositeAveraging composite_averaging(const LatticeSpec& spec, double a, const BumpProfile& bump,
                                       const BuildOptions& opt) {
    CompositeAveraging c;
    c.spec = spec;
    c.a = a;
    c.combined = LatticeKernel::delta(spec);
    c.mass = 1.0;
    for (int m = 1; m <= spec.n; ++m) {
        c.factors.push_back(build_averaging_kernel(spec, m, a, bump, opt));
        c.combined = convolve_density(c.combined, c.factors.back().density);
        c.mass *= c.factors.back().mass;
    }
    c.combined.set_even_symmetric(true);
    return c;
}

double composite_fourier(const CompositeAveraging& c, const MomentumPoint& p) {
    double prod = 1.0;
    for (const auto& f : c.factors) prod *= kernel_fourier(f.density, p);
    return prod;
}

ScalingResidual scaling_residual(const LatticeSpec& fine_spec, int m, double a,
                                 const BumpProfile& bump, const BuildOptions& opt) {
    if (m < 1 || m > fine_spec.n) throw ConfigError("scaling relation needs 1 <= m <= n");
    const int d = fine_spec.d;
    const int L = fine_spec.L();
    LatticeSpec coarse_spec = fine_spec.at_level(fine_spec.n - 1);

    AveragingKernel coarse = build_averaging_kernel(coarse_spec, m - 1, a, bump, opt);
    AveragingKernel fine = build_averaging_kernel(fine_spec, m, L * L * a, bump, opt);

    // u/L preserves the integer offset: coarse index k at spacing eps_{n-1}
    // maps to fine index k at spacing eps_n, and the two storage boxes agree
    double scale = coarse.density.max_abs();
    double worst = 0;
    double ld = std::pow(static_cast<double>(L), -d);
    coarse.density.for_each([&](const Site& u, double v) {
        worst = std::max(worst, std::fabs(v - ld * fine.density.at(u)));
    });
    fine.density.for_each([&](const Site& u, double v) {
        if (v != 0.0 && !coarse.density.inside(u))
            worst = std::max(worst, std::fabs(ld * v));
    });

    ScalingResidual r;
    r.density_residual = worst / scale;
    r.mass_residual = std::fabs(coarse.mass - fine.mass);
    return r;
}

double second_moment(const LatticeKernel& density, int mu) {
    const double eps = density.spec().epsilon();
    double s = 0;
    density.for_each([&](const Site& x, double v) {
        double c = x[mu] * eps;
        s += c * c * v;
    });
    return std::pow(eps, density.dim()) * s;
}

KernelWorkspace::KernelWorkspace(int d, int p, BuildOptions opt)
    : d_(d), p_(p), opt_(opt), bump_(d, 1 << p) {}

const AveragingKernel& KernelWorkspace::averaging(int level, int m, double a) {
    std::ostringstream key;
    key << level << ':' << m << ':' << std::hexfloat << a;
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = kernels_.find(key.str());
    if (it == kernels_.end()) {
        auto built = std::make_unique<AveragingKernel>(
            build_averaging_kernel(LatticeSpec(d_, p_, level), m, a, bump_, opt_));
        it = kernels_.emplace(key.str(), std::move(built)).first;
    }
    return *it->second;
}

const CompositeAveraging& KernelWorkspace::composite(int level, double a) {
    std::ostringstream key;
    key << level << ':' << std::hexfloat << a;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = composites_.find(key.str());
        if (it != composites_.end()) return *it->second;
    }
    // assemble from the memoized factors; build outside the lock
    auto built = std::make_unique<CompositeAveraging>();
    built->spec = LatticeSpec(d_, p_, level);
    built->a = a;
    built->combined = LatticeKernel::delta(built->spec);
    built->mass = 1.0;
    for (int m = 1; m <= level; ++m) {
        const AveragingKernel& factor = averaging(level, m, a);
        built->factors.push_back(factor);
        built->combined = convolve_density(built->combined, factor.density);
        built->mass *= factor.mass;
    }
    built->combined.set_even_symmetric(true);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = composites_.find(key.str());
    if (it == composites_.end()) it = composites_.emplace(key.str(), std::move(built)).first;
    return *it->second;
}

} // namespace frd
