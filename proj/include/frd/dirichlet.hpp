#ifndef FRD_DIRICHLET_HPP
#define FRD_DIRICHLET_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "frd/lattice.hpp"

namespace frd {

// Open lattice cube U_eps(R) with its sup-norm boundary shell. Interior and
// boundary are ordered lexicographically; all coordinates are sites relative
// to the center.
class CubeDomain {
public:
    CubeDomain(const LatticeSpec& spec, double R, const Site& center = {0, 0, 0, 0});

    const LatticeSpec& spec() const { return spec_; }
    double R() const { return R_; }
    const Site& center() const { return center_; }
    int half() const { return half_; } // interior sites per axis: [-half, half]

    const std::vector<Site>& interior() const { return interior_; }
    const std::vector<Site>& boundary() const { return boundary_; }

    bool is_interior(const Site& x) const {
        for (int mu = 0; mu < spec_.d; ++mu)
            if (x[mu] < -half_ || x[mu] > half_) return false;
        return true;
    }
    // index into interior() for an interior site
    std::size_t interior_index(const Site& x) const {
        std::size_t idx = 0;
        std::size_t side = static_cast<std::size_t>(2 * half_ + 1);
        for (int mu = 0; mu < spec_.d; ++mu)
            idx = idx * side + static_cast<std::size_t>(x[mu] + half_);
        return idx;
    }
    std::size_t boundary_index(const Site& y) const; // lexicographic lookup

private:
    LatticeSpec spec_;
    double R_ = 0;
    Site center_{0, 0, 0, 0};
    int half_ = 0;
    std::vector<Site> interior_;
    std::vector<Site> boundary_;
};

// One row of the lattice Poisson kernel: exit weights from an interior start
// point, aligned with cube.boundary(). Mass <= 1, defect bounded by a R^2/2.
struct PoissonKernelRow {
    double a = 0;
    Site x{0, 0, 0, 0};
    std::vector<double> weights;

    double mass() const {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
    double defect() const { return 1.0 - mass(); }
};

double defect_mass(const PoissonKernelRow& row);

enum class SolverBackend { automatic, sparse, sine_transform };

// Interior operator (a - Lap_eps) of a cube, factored once and reused across
// right-hand sides. Small cubes use a sparse LDLT; large boxes switch to the
// separable sine-transform diagonalization (also exact).
class DirichletSolver {
public:
    DirichletSolver(const CubeDomain& cube, double a,
                    SolverBackend backend = SolverBackend::automatic);
    ~DirichletSolver();
    DirichletSolver(DirichletSolver&&) noexcept;
    DirichletSolver& operator=(DirichletSolver&&) noexcept;

    const CubeDomain& cube() const { return cube_; }
    double a() const { return a_; }
    const char* backend() const; // "ldlt" or "dst"

    // h on interior() from boundary data f on boundary()
    std::vector<double> solve(std::span<const double> f) const;

    // exit weights from start x; one transpose solve against the factored
    // interior operator, boundary coupling eps^{-2} x adjacency
    PoissonKernelRow poisson_row(const Site& x) const;

    // E_x[tau] via (-Lap) u = 1, u = 0 on the boundary (test oracle)
    double mean_exit_time(const Site& x) const;

    long clamped_weight_count() const { return clamped_; }

private:
    std::vector<double> apply_inverse(std::vector<double> rhs) const;

    CubeDomain cube_;
    double a_ = 0;
    mutable long clamped_ = 0;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Monte Carlo estimate of a Poisson kernel row by exact event-driven
// simulation of continuous-time simple random walk killed at rate a.
struct WalkEstimate {
    PoissonKernelRow row;              // weight estimates
    std::vector<double> std_errors;    // per-bin standard errors
    long n_walks = 0;
    long step_cap_hits = 0;            // walks aborted by the step cap

    double aggregate_std_error() const {
        double s = 0;
        for (double e : std_errors) s += e;
        return 0.5 * s;
    }
};

WalkEstimate walk_exit_oracle(const CubeDomain& cube, double a, const Site& x, long n_walks,
                              std::uint64_t seed, long step_cap = 10'000'000);

// total-variation distance (1/2) sum |w1 - w2| between two rows on the same cube
double total_variation(const PoissonKernelRow& r1, const PoissonKernelRow& r2);

} // namespace frd

#endif
