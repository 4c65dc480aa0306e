#include "frd/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <Eigen/Sparse>
#include <fftw3.h>

namespace frd {

namespace {

// FFTW planning is not thread-safe; executions via the new-array interface are.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

constexpr std::size_t kSparseLimit = 20000; // unknowns; above this use the DST path

} // namespace

CubeDomain::CubeDomain(const LatticeSpec& spec, double R, const Site& center)
    : spec_(spec), R_(R), center_(center) {
    double eps = spec.epsilon();
    if (!(R > 0)) throw ConfigError("cube side must be positive");
    double t = R / (2.0 * eps); // interior: |k| < t
    if (t < 1.0) throw EmptyInterior("cube of side " + std::to_string(R) + " has no interior at spacing " +
                                     std::to_string(eps));
    double ft = std::floor(t);
    half_ = static_cast<int>(ft) - ((t == ft) ? 1 : 0);

    int d = spec_.d;
    std::size_t interior_count = 1, shell_count = 1;
    for (int mu = 0; mu < d; ++mu) {
        interior_count *= static_cast<std::size_t>(2 * half_ + 1);
        shell_count *= static_cast<std::size_t>(2 * half_ + 3);
    }
    interior_.reserve(interior_count);
    boundary_.reserve(shell_count - interior_count);

    Site x{0, 0, 0, 0};
    std::function<void(int)> enumerate = [&](int mu) {
        if (mu == d) {
            if (is_interior(x))
                interior_.push_back(x);
            else
                boundary_.push_back(x);
            return;
        }
        for (int k = -half_ - 1; k <= half_ + 1; ++k) {
            x[mu] = k;
            enumerate(mu + 1);
        }
        x[mu] = 0;
    };
    enumerate(0);
}

std::size_t CubeDomain::boundary_index(const Site& y) const {
    auto it = std::lower_bound(boundary_.begin(), boundary_.end(), y);
    if (it == boundary_.end() || *it != y) throw ConfigError("site is not on the cube boundary");
    return static_cast<std::size_t>(it - boundary_.begin());
}

double defect_mass(const PoissonKernelRow& row) { return row.defect(); }

// ---------------------------------------------------------------------------
// solver backends

struct DirichletSolver::Impl {
    bool use_dst = false;

    // sparse path
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    // DST path: eigenvalues of (a - Lap) on the box, FFTW RODFT00 plan
    std::vector<double> eigenvalues;
    fftw_plan plan = nullptr;
    std::vector<double> plan_buffer; // plan was created on this buffer
    int side = 0;                    // interior sites per axis
    double dst_norm = 1.0;           // per-transform normalization

    ~Impl() {
        if (plan) {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

DirichletSolver::DirichletSolver(const CubeDomain& cube, double a, SolverBackend backend)
    : cube_(cube), a_(a), impl_(std::make_unique<Impl>()) {
    if (a < 0) throw ConfigError("mass parameter must be >= 0");
    const int d = cube_.spec().d;
    const double eps = cube_.spec().epsilon();
    const double inv_eps2 = 1.0 / (eps * eps);
    const std::size_t N = cube_.interior().size();

    impl_->use_dst = (backend == SolverBackend::automatic) ? N > kSparseLimit
                                                           : backend == SolverBackend::sine_transform;
    impl_->side = 2 * cube_.half() + 1;

    if (!impl_->use_dst) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(N * static_cast<std::size_t>(2 * d + 1));
        for (std::size_t i = 0; i < N; ++i) {
            const Site& x = cube_.interior()[i];
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i), a + 2.0 * d * inv_eps2);
            for (int mu = 0; mu < d; ++mu) {
                for (int sign : {+1, -1}) {
                    Site y = x;
                    y[mu] += sign;
                    if (cube_.is_interior(y))
                        trip.emplace_back(static_cast<int>(i),
                                          static_cast<int>(cube_.interior_index(y)), -inv_eps2);
                }
            }
        }
        Eigen::SparseMatrix<double> K(static_cast<int>(N), static_cast<int>(N));
        K.setFromTriplets(trip.begin(), trip.end());
        impl_->ldlt.compute(K);
        if (impl_->ldlt.info() != Eigen::Success)
            throw SolverFailure("LDLT factorization of the interior operator failed");
    } else {
        const int m = impl_->side;
        impl_->eigenvalues.resize(N);
        // separable spectrum: a + eps^{-2} sum_mu 2 (1 - cos(pi k_mu / (m+1)))
        std::vector<double> axis(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k)
            axis[static_cast<std::size_t>(k)] =
                2.0 * inv_eps2 * (1.0 - std::cos(M_PI * (k + 1) / (m + 1)));
        for (std::size_t i = 0; i < N; ++i) {
            // interior() is ordered lexicographically over the same box
            std::size_t rem = i;
            double lam = a;
            for (int mu = d - 1; mu >= 0; --mu) {
                lam += axis[rem % static_cast<std::size_t>(m)];
                rem /= static_cast<std::size_t>(m);
            }
            impl_->eigenvalues[i] = lam;
        }
        impl_->plan_buffer.assign(N, 0.0);
        std::array<int, kMaxDim> dims{};
        std::array<fftw_r2r_kind, kMaxDim> kinds{};
        for (int mu = 0; mu < d; ++mu) {
            dims[static_cast<std::size_t>(mu)] = m;
            kinds[static_cast<std::size_t>(mu)] = FFTW_RODFT00;
        }
        {
            std::lock_guard<std::mutex> lock(fftw_plan_mutex());
            // UNALIGNED so the plan can run on any same-shape buffer later
            impl_->plan = fftw_plan_r2r(d, dims.data(), impl_->plan_buffer.data(),
                                        impl_->plan_buffer.data(), kinds.data(),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        if (!impl_->plan) throw SolverFailure("FFTW refused the sine-transform plan");
        impl_->dst_norm = std::pow(2.0 * (m + 1), -d);
    }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

const char* DirichletSolver::backend() const { return impl_->use_dst ? "dst" : "ldlt"; }

std::vector<double> DirichletSolver::apply_inverse(std::vector<double> rhs) const {
    const std::size_t N = cube_.interior().size();
    if (!impl_->use_dst) {
        Eigen::Map<Eigen::VectorXd> b(rhs.data(), static_cast<long>(N));
        Eigen::VectorXd h = impl_->ldlt.solve(b);
        if (impl_->ldlt.info() != Eigen::Success)
            throw SolverFailure("LDLT back-substitution failed");
        return std::vector<double>(h.data(), h.data() + N);
    }
    // K^{-1} = S diag(1/lambda) S / (2(m+1))^d with S the unnormalized DST-I
    fftw_execute_r2r(impl_->plan, rhs.data(), rhs.data());
    for (std::size_t i = 0; i < N; ++i) rhs[i] /= impl_->eigenvalues[i];
    fftw_execute_r2r(impl_->plan, rhs.data(), rhs.data());
    for (std::size_t i = 0; i < N; ++i) rhs[i] *= impl_->dst_norm;
    return rhs;
}

std::vector<double> DirichletSolver::solve(std::span<const double> f) const {
    const int d = cube_.spec().d;
    const double eps = cube_.spec().epsilon();
    const double inv_eps2 = 1.0 / (eps * eps);
    if (f.size() != cube_.boundary().size())
        throw ConfigError("boundary data size mismatch");

    // rhs = eps^{-2} * (adjacency onto the boundary) f
    std::vector<double> rhs(cube_.interior().size(), 0.0);
    for (std::size_t i = 0; i < cube_.interior().size(); ++i) {
        const Site& x = cube_.interior()[i];
        double acc = 0;
        for (int mu = 0; mu < d; ++mu) {
            for (int sign : {+1, -1}) {
                Site y = x;
                y[mu] += sign;
                if (!cube_.is_interior(y)) acc += f[cube_.boundary_index(y)];
            }
        }
        if (acc != 0.0) rhs[i] = inv_eps2 * acc;
    }
    return apply_inverse(std::move(rhs));
}

PoissonKernelRow DirichletSolver::poisson_row(const Site& x) const {
    if (!cube_.is_interior(x)) throw ConfigError("Poisson row start point must be interior");
    const int d = cube_.spec().d;
    const double eps = cube_.spec().epsilon();
    const double inv_eps2 = 1.0 / (eps * eps);

    std::vector<double> rhs(cube_.interior().size(), 0.0);
    rhs[cube_.interior_index(x)] = 1.0;
    std::vector<double> s = apply_inverse(std::move(rhs));

    PoissonKernelRow row;
    row.a = a_;
    row.x = x;
    row.weights.assign(cube_.boundary().size(), 0.0);
    // w(y) = eps^{-2} sum of s over interior edge-neighbours of y; sup-norm
    // corner sites have none and keep weight exactly 0
    for (std::size_t j = 0; j < cube_.boundary().size(); ++j) {
        const Site& y = cube_.boundary()[j];
        double acc = 0;
        for (int mu = 0; mu < d; ++mu) {
            for (int sign : {+1, -1}) {
                Site z = y;
                z[mu] += sign;
                if (cube_.is_interior(z)) acc += s[cube_.interior_index(z)];
            }
        }
        double w = inv_eps2 * acc;
        if (w < 0.0) {
            if (w < -1e-14)
                throw SolverFailure("negative Poisson weight beyond roundoff: " + std::to_string(w));
            w = 0.0;
            ++clamped_;
        }
        row.weights[j] = w;
    }
    return row;
}

double DirichletSolver::mean_exit_time(const Site& x) const {
    if (a_ != 0.0) throw ConfigError("mean exit time is defined from the a=0 operator");
    std::vector<double> rhs(cube_.interior().size(), 1.0);
    std::vector<double> u = apply_inverse(std::move(rhs));
    return u[cube_.interior_index(x)];
}

// ---------------------------------------------------------------------------
// killed-walk oracle

namespace {

// portable uniform in (0,1] from the top 53 bits
inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

} // namespace

WalkEstimate walk_exit_oracle(const CubeDomain& cube, double a, const Site& x, long n_walks,
                              std::uint64_t seed, long step_cap) {
    if (n_walks < 1) throw ConfigError("need at least one walk");
    if (a < 0) throw ConfigError("mass parameter must be >= 0");
    if (!cube.is_interior(x)) throw ConfigError("walk start point must be interior");

    const int d = cube.spec().d;
    const double eps = cube.spec().epsilon();
    const double rate = 2.0 * d / (eps * eps); // exponential holding time rate

    const std::size_t bins = cube.boundary().size();
    std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
    long cap_hits = 0;

    SplitMix64 rng{seed ^ 0x6a09e667f3bcc908ULL};
    for (long w = 0; w < n_walks; ++w) {
        Site pos = x;
        double tau = 0;
        long steps = 0;
        bool capped = false;
        while (cube.is_interior(pos)) {
            if (++steps > step_cap) {
                capped = true;
                break;
            }
            if (a > 0) tau += -std::log(uniform01(rng.next())) / rate;
            std::uint64_t bits = rng.next();
            int dir = static_cast<int>(bits % static_cast<std::uint64_t>(2 * d));
            pos[dir >> 1] += (dir & 1) ? 1 : -1;
        }
        if (capped) {
            ++cap_hits;
            continue; // aborted, not binned: the estimate stays unbiased conditionally reported
        }
        double weight = (a > 0) ? std::exp(-a * tau) : 1.0;
        std::size_t bin = cube.boundary_index(pos);
        sum[bin] += weight;
        sumsq[bin] += weight * weight;
    }
    if (cap_hits > 0)
        throw StepCapExceeded(std::to_string(cap_hits) + " walks exceeded the step cap");

    WalkEstimate est;
    est.n_walks = n_walks;
    est.step_cap_hits = cap_hits;
    est.row.a = a;
    est.row.x = x;
    est.row.weights.resize(bins);
    est.std_errors.resize(bins);
    double inv_n = 1.0 / static_cast<double>(n_walks);
    for (std::size_t j = 0; j < bins; ++j) {
        double mean = sum[j] * inv_n;
        double var = std::max(0.0, sumsq[j] * inv_n - mean * mean);
        est.row.weights[j] = mean;
        est.std_errors[j] = std::sqrt(var * inv_n);
    }
    return est;
}

double total_variation(const PoissonKernelRow& r1, const PoissonKernelRow& r2) {
    if (r1.weights.size() != r2.weights.size())
        throw ConfigError("rows live on different boundaries");
    double s = 0;
    for (std::size_t j = 0; j < r1.weights.size(); ++j)
        s += std::fabs(r1.weights[j] - r2.weights[j]);
    return 0.5 * s;
}

} // namespace frd
