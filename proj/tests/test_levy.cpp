#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "frd/levy.hpp"
#include "frd/torus.hpp"

using namespace frd;

namespace {

// Test-only oracle for int_0^inf a^{-alpha/2} f(a) da, independent of the
// library's trapezoid-in-log quadrature: singularity-removing substitutions
// on [0,1] and [1,inf) followed by adaptive Simpson.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15 * tol)
        return left + right + (left + right - whole) / 15;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

double mass_integral_oracle(double alpha, const std::function<double(double)>& f, double tol) {
    // a in [0,1]: a = s^q with q = 2/(2-alpha) flattens a^{-alpha/2} da to q ds
    double q = 2.0 / (2.0 - alpha);
    double low = simpson([&](double s) { return (s == 0) ? 0.0 : q * f(std::pow(s, q)); }, 0.0,
                         1.0, tol);
    // a in [1,inf): a = 1/b, then b = r^{2/alpha} flattens the measure to (2/alpha) dr
    double w = 2.0 / alpha;
    double high = simpson(
        [&](double r) {
            if (r == 0) return 0.0;
            double b = std::pow(r, w);
            return w * f(1.0 / b) / b; // b^{alpha/2 - 1} f(1/b) db with the Jacobian folded in
        },
        0.0, 1.0, tol);
    return low + high;
}

} // namespace

TEST_CASE("oracle sanity: reproduces a closed form") {
    // int a^{-1/2}/(a+1) da = pi
    double v = mass_integral_oracle(1.0, [](double a) { return 1.0 / (a + 1.0); }, 1e-12);
    CHECK(v == doctest::Approx(M_PI).epsilon(1e-10));
}

TEST_CASE("Levy constant") {
    SUBCASE("alpha = 1 gives 1/pi, cross-checked by the oracle") {
        CHECK(levy_constant(1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
        double integral =
            mass_integral_oracle(1.0, [](double a) { return 1.0 / (a + 1.0); }, 1e-12);
        CHECK(levy_constant(1.0) * integral == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("scalar identity at several t against the oracle") {
        for (double alpha : {0.5, 1.0, 1.5}) {
            for (double t : {0.5, 1.0, 3.0}) {
                double integral = mass_integral_oracle(
                    alpha, [t](double a) { return 1.0 / (a + t); }, 1e-12);
                CHECK(levy_constant(alpha) * integral ==
                      doctest::Approx(std::pow(t, -alpha / 2)).epsilon(1e-9));
            }
        }
    }
    SUBCASE("domain guard") {
        CHECK_THROWS_AS(levy_constant(0.0), ConfigError);
        CHECK_THROWS_AS(levy_constant(2.0), ConfigError);
    }
}

TEST_CASE("quadrature construction") {
    SUBCASE("scalar identity residuals within tolerance") {
        for (double alpha : {0.5, 1.0, 1.5}) {
            LevyParams q = build_quadrature(alpha, 1e-8, 2);
            for (double t : {0.5, 1.0, 3.0}) CHECK(scalar_identity_residual(q, t) <= 1e-6);
        }
    }
    SUBCASE("node count grows with the tolerance demand") {
        std::size_t prev = 0;
        for (double tol : {1e-4, 1e-6, 1e-8}) {
            LevyParams q = build_quadrature(1.0, tol, 2);
            CHECK(q.masses.size() >= prev);
            prev = q.masses.size();
            CHECK(scalar_identity_residual(q, 1.0) <= tol);
        }
    }
    SUBCASE("step divides 2 ln L so mass rescaling is an index shift") {
        for (int L : {2, 4}) {
            LevyParams q = build_quadrature(0.5, 1e-8, L);
            CHECK(q.shift * q.h == doctest::Approx(2.0 * std::log(L)).epsilon(1e-14));
            // check a few nodes map onto later nodes under a -> L^2 a
            for (std::size_t k = 0; k + q.shift < q.masses.size(); k += 20)
                CHECK(q.masses[k + static_cast<std::size_t>(q.shift)] ==
                      doctest::Approx(L * L * q.masses[k]).epsilon(1e-12));
        }
    }
    SUBCASE("alpha guard at desk scale") {
        CHECK_THROWS_AS(build_quadrature(0.05, 1e-8, 2), ConfigError);
        CHECK_THROWS_AS(build_quadrature(1.95, 1e-8, 2), ConfigError);
    }
}

TEST_CASE("Levy Green's function on the lattice") {
    LevyParams q = build_quadrature(1.0, 1e-8, 2);
    SUBCASE("matches (-disp)^{-alpha/2} directly") {
        for (double px : {0.4, 1.0, 2.5}) {
            MomentumPoint p{px, 0.2, -0.7};
            double direct = levy_green_hat(q, 3, p);
            double exact = std::pow(-dispersion(p, 3, 1.0), -0.5);
            CHECK(std::fabs(direct - exact) / exact <= 1e-6);
        }
    }
    SUBCASE("pole guard") {
        CHECK_THROWS_AS(levy_green_hat(q, 3, MomentumPoint{0.0, 0.0, 0.0}), PoleAtZero);
    }
}

TEST_CASE("Levy decomposition at d=3, L=2") {
    KernelWorkspace ws(3, 1, {});
    LevyParams q = build_quadrature(1.0, 1e-8, 2);

    SUBCASE("reconstruction residuals") {
        for (double px : {0.5, 1.5}) {
            LevyReconstruction rec = levy_reconstruct(ws, q, 1, MomentumPoint{px, 0.5, 0.0});
            CHECK(rec.residual_direct <= 1e-6);
            CHECK(rec.residual_sum <= 1e-6);
        }
    }
    SUBCASE("fluctuation kernels: range, PSD, symmetry") {
        LevyLevel l0 = levy_fluctuation(ws, q, 0);
        LevyLevel l1 = levy_fluctuation(ws, q, 1);
        CHECK(l0.range_margin <= 1e-9);
        CHECK(l1.range_margin <= 1e-9);
        CHECK(l0.psd_min >= -1e-10 * l0.psd_max);
        CHECK(l1.psd_min >= -1e-10 * l1.psd_max);
        CHECK(l0.gamma0 > 0);
        // the rescaled family keeps shrinking at the origin
        CHECK(l1.gamma0 < l0.gamma0);
        // cubic symmetry to 1e-10
        double scale = l1.gamma0;
        l1.gamma.for_each([&](const Site& x, double v) {
            Site perm = make_site({x[2], x[0], x[1]});
            Site flip = make_site({-x[0], x[1], -x[2]});
            CHECK(std::fabs(l1.gamma.at(perm) - v) <= 1e-10 * scale);
            CHECK(std::fabs(l1.gamma.at(flip) - v) <= 1e-10 * scale);
        });
    }
    SUBCASE("level recursion in offset-difference form") {
        const int M = 64, n = 1;
        LevyLevel gamma_n = levy_fluctuation(ws, q, n);
        std::vector<double> c_n = levy_remainder_torus(ws, q, n, M);
        std::vector<double> c_next = levy_remainder_torus(ws, q, n + 1, M);
        double contraction = std::pow(2.0, -2.0 * q.phi_dim(3));
        auto flat_of = [&](const Site& x) {
            std::size_t f = 0;
            for (int mu = 0; mu < 3; ++mu) {
                int w = x[mu] < 0 ? x[mu] + M : x[mu];
                f = f * M + static_cast<std::size_t>(w);
            }
            return f;
        };
        Site x0{0, 0, 0, 0};
        double l0 = c_n[flat_of(x0)];
        double r0 = gamma_n.gamma.at(x0) + contraction * c_next[flat_of(x0)];
        double scale = 0;
        std::vector<Site> pts;
        for (int i = 1; i <= 20; ++i)
            pts.push_back(make_site({(i * 7) % 12 - 6, (i * 5) % 9 - 4, (i * 3) % 7 - 3}));
        for (const Site& x : pts)
            scale = std::max(scale, std::fabs(c_n[flat_of(x)] - l0));
        for (const Site& x : pts) {
            double lhs = c_n[flat_of(x)] - l0;
            double rhs = gamma_n.gamma.at(x) + contraction * c_next[flat_of(x)] - r0;
            CHECK(std::fabs(lhs - rhs) <= 1e-6 * scale);
        }
    }
}
