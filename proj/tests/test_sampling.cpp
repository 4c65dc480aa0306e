#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "frd/sampling.hpp"

using namespace frd;

namespace {

std::size_t flat_index(const Site& x, int d, int M) {
    std::size_t f = 0;
    for (int mu = 0; mu < d; ++mu) {
        int w = x[mu] % M;
        if (w < 0) w += M;
        f = f * static_cast<std::size_t>(M) + static_cast<std::size_t>(w);
    }
    return f;
}

} // namespace

TEST_CASE("white noise sampler") {
    LatticeSpec spec(2, 1, 1); // eps = 1/2
    LatticeKernel delta = LatticeKernel::delta(spec);
    GaussianSampler sampler(delta, 16, 99);
    CHECK(sampler.clamped_modes() == 0);
    // flat spectrum: covariance vanishes off the origin, variance is eps^{-d}
    CHECK(sampler.covariance_at(Site{0, 0, 0, 0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::fabs(sampler.covariance_at(make_site({3, 1}))) <= 1e-12);
    double var = 0;
    const int N = 4000;
    for (int i = 0; i < N; ++i) {
        auto f = sampler.sample();
        var += f[0] * f[0];
    }
    var /= N;
    double se = 4.0 * std::sqrt(2.0 / N);
    CHECK(std::fabs(var - 4.0) <= 4 * se);
}

TEST_CASE("sampler matches the decomposition covariance") {
    KernelWorkspace ws(2, 1, {});
    DecompositionLevel lvl = rescaled_fluctuation(ws, 1, 1.0);
    const int M = 64;
    GaussianSampler sampler(lvl.gamma, M, 1234);

    SUBCASE("spectrum clamps stay within roundoff scale") {
        // negative modes only from roundoff of the zeroed far field; clamped
        // to 0 with a logged count, never more than a sliver of the grid
        CHECK(sampler.clamped_modes() <= static_cast<long>(sampler.field_size() / 20));
    }

    SUBCASE("empirical covariance at offsets within 4 sigma, zero beyond range") {
        std::vector<Site> offsets{make_site({0, 0}), make_site({1, 0}), make_site({2, 3}),
                                  make_site({5, 5}), make_site({24, 0}), make_site({25, 4})};
        const int N = 6000;
        std::vector<double> sum(offsets.size(), 0), sumsq(offsets.size(), 0);
        for (int i = 0; i < N; ++i) {
            auto f = sampler.sample();
            for (std::size_t j = 0; j < offsets.size(); ++j) {
                double prod = f[0] * f[flat_index(offsets[j], 2, M)];
                sum[j] += prod;
                sumsq[j] += prod * prod;
            }
        }
        for (std::size_t j = 0; j < offsets.size(); ++j) {
            double mean = sum[j] / N;
            double se = std::sqrt((sumsq[j] / N - mean * mean) / N);
            double expect = sampler.covariance_at(offsets[j]);
            // offsets at sup-distance >= 24 sites lie at or beyond the range
            if (sup_distance_sites(offsets[j], Site{0, 0, 0, 0}, 2) >= 24)
                CHECK(std::fabs(expect) <= 1e-12);
            CHECK(std::fabs(mean - expect) <= 4 * se);
        }
    }

    SUBCASE("chi-squared of the standardized marginal at the origin (1% level)") {
        const int N = 10000, bins = 20;
        double sd = std::sqrt(sampler.covariance_at(Site{0, 0, 0, 0}));
        std::vector<int> count(bins, 0);
        GaussianSampler s2(lvl.gamma, M, 777);
        for (int i = 0; i < N; ++i) {
            auto f = s2.sample();
            double u = 0.5 * (1.0 + std::erf(f[0] / sd / std::sqrt(2.0)));
            int b = std::min(bins - 1, static_cast<int>(u * bins));
            ++count[b];
        }
        double chi2 = 0, expect = static_cast<double>(N) / bins;
        for (int b = 0; b < bins; ++b) chi2 += (count[b] - expect) * (count[b] - expect) / expect;
        CHECK(chi2 <= 36.1909); // chi2 quantile at 1%, 19 dof
    }

    SUBCASE("independent streams decorrelate") {
        GaussianSampler a(lvl.gamma, M, 1), b(lvl.gamma, M, 2);
        const int N = 4000;
        double cross = 0, var = 0;
        for (int i = 0; i < N; ++i) {
            auto fa = a.sample();
            auto fb = b.sample();
            cross += fa[0] * fb[0];
            var += fa[0] * fa[0];
        }
        cross /= N;
        var /= N;
        CHECK(std::fabs(cross) <= 4 * var / std::sqrt(static_cast<double>(N)));
    }

    SUBCASE("doubling the torus leaves the fundamental-domain covariance unchanged") {
        GaussianSampler big(lvl.gamma, 2 * M, 5);
        for (const Site& x : {make_site({0, 0}), make_site({3, 2}), make_site({7, -5})})
            CHECK(sampler.covariance_at(x) == doctest::Approx(big.covariance_at(x)).epsilon(1e-12));
    }

    SUBCASE("sampling never feeds back into construction") {
        GaussianSampler s1(lvl.gamma, M, 10), s2(lvl.gamma, M, 20);
        (void)s1.sample();
        (void)s2.sample();
        CHECK(s1.covariance_at(make_site({2, 1})) == s2.covariance_at(make_site({2, 1})));
    }
}

TEST_CASE("sampler guards") {
    KernelWorkspace ws(2, 1, {});
    DecompositionLevel lvl = rescaled_fluctuation(ws, 0, 1.0);
    SUBCASE("torus must dominate twice the range") {
        CHECK_THROWS_AS(GaussianSampler(lvl.gamma, 8, 1), TorusTooSmall);
    }
    SUBCASE("torus must be a power of two") {
        CHECK_THROWS_AS(GaussianSampler(lvl.gamma, 48, 1), ConfigError);
    }
    SUBCASE("non-PSD kernels are rejected") {
        LatticeSpec spec(1, 1, 0);
        LatticeKernel bad(spec, {1, 0, 0, 0});
        bad.ref(make_site({-1})) = 1.0; // pure off-origin pair: spectrum 2 cos
        bad.ref(make_site({1})) = 1.0;
        CHECK_THROWS_AS(GaussianSampler(bad, 16, 1), NegativeSpectrumBeyondTolerance);
    }
}

TEST_CASE("synthesis of the decomposed field") {
    KernelWorkspace ws(2, 1, {});
    const double a = 1.0;
    const int L = 2;
    std::vector<DecompositionLevel> built;
    for (int j = 0; j < 2; ++j)
        built.push_back(rescaled_fluctuation(ws, j, a * std::pow(L, 2.0 * j), 0));
    std::vector<const DecompositionLevel*> levels{&built[0], &built[1]};
    const int M = 64;
    const double phi_dim = 0.0; // (d-2)/2 at d=2

    SUBCASE("one level reduces to a plain sample") {
        std::vector<const DecompositionLevel*> one{&built[0]};
        SynthesisResult res = synthesize(one, M, phi_dim, 42);
        CHECK(res.phi.size() == static_cast<std::size_t>(M * M));
        CHECK(synthesis_covariance(one, M, phi_dim, Site{0, 0, 0, 0}) ==
              doctest::Approx(built[0].gamma0).epsilon(1e-12));
    }

    SUBCASE("variance additivity and offset covariance within 4 sigma") {
        const int N = 6000;
        std::vector<Site> offsets{make_site({0, 0}), make_site({1, 1}), make_site({4, 0}),
                                  make_site({0, 7})};
        std::vector<double> sum(offsets.size(), 0), sumsq(offsets.size(), 0);
        std::uint64_t seed = 1000;
        for (int i = 0; i < N; ++i) {
            SynthesisResult res = synthesize(levels, M, phi_dim, seed++);
            for (std::size_t j = 0; j < offsets.size(); ++j) {
                double prod = res.phi[0] * res.phi[flat_index(offsets[j], 2, M)];
                sum[j] += prod;
                sumsq[j] += prod * prod;
            }
        }
        for (std::size_t j = 0; j < offsets.size(); ++j) {
            double mean = sum[j] / N;
            double se = std::sqrt((sumsq[j] / N - mean * mean) / N);
            double expect = synthesis_covariance(levels, M, phi_dim, offsets[j]);
            CHECK(std::fabs(mean - expect) <= 4 * se);
        }
        // variance additivity: Var phi(0) = sum_j L^{-2 j phi} Gamma_j(0)
        double expect_var = 0;
        for (int j = 0; j < 2; ++j)
            expect_var += std::pow(static_cast<double>(L), -2.0 * j * phi_dim) * built[j].gamma0;
        CHECK(synthesis_covariance(levels, M, phi_dim, Site{0, 0, 0, 0}) ==
              doctest::Approx(expect_var).epsilon(1e-12));
    }
}

TEST_CASE("renormalization step") {
    KernelWorkspace ws(2, 1, {});
    DecompositionLevel lvl = rescaled_fluctuation(ws, 1, 1.0, 0);
    const int M = 64;
    GaussianSampler sampler(lvl.gamma, M, 31415);
    const double phi_dim = 0.5; // exercise a nonzero contraction exponent
    std::vector<double> phi(static_cast<std::size_t>(M * M));
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = 0.3 * std::sin(0.2 * static_cast<double>(i % M));

    SUBCASE("constant functional integrates to itself with zero error") {
        RgEstimate est = rg_step([](const std::vector<double>&) { return 1.0; }, sampler, phi,
                                 phi_dim, 64);
        CHECK(est.mean == 1.0);
        CHECK(est.std_error == 0.0);
    }

    SUBCASE("Gaussian characteristic functional") {
        // z(psi) = cos <k, psi>; E z = exp(-<k,Gamma k>/2) cos<k, phi_{1/L}>
        double eps = lvl.spec.epsilon();
        double epsd = eps * eps;
        std::vector<Site> support{make_site({0, 0}), make_site({1, 0}), make_site({0, 1})};
        std::vector<double> coeff{1.0, -0.5, 0.25};
        auto pairing = [&](const std::vector<double>& psi) {
            double s = 0;
            for (std::size_t j = 0; j < support.size(); ++j)
                s += coeff[j] * psi[flat_index(support[j], 2, M)];
            return epsd * s;
        };
        double quad = 0;
        for (std::size_t i = 0; i < support.size(); ++i)
            for (std::size_t j = 0; j < support.size(); ++j) {
                Site diff{0, 0, 0, 0};
                for (int mu = 0; mu < 2; ++mu) diff[mu] = support[i][mu] - support[j][mu];
                quad += coeff[i] * coeff[j] * sampler.covariance_at(diff);
            }
        quad *= epsd * epsd;
        double shift_phase = 0;
        {
            double contraction = std::pow(2.0, -phi_dim);
            std::vector<double> shifted(phi.size());
            for (std::size_t i = 0; i < phi.size(); ++i) shifted[i] = contraction * phi[i];
            shift_phase = pairing(shifted);
        }
        double expect = std::exp(-0.5 * quad) * std::cos(shift_phase);
        const long N = 20000;
        RgEstimate est = rg_step(
            [&](const std::vector<double>& psi) { return std::cos(pairing(psi)); }, sampler, phi,
            phi_dim, N);
        CHECK(std::fabs(est.mean - expect) <= 4 * est.std_error);
    }

    SUBCASE("quadratic functional: exact mean against the torus covariance") {
        double eps = lvl.spec.epsilon();
        double epsd = eps * eps;
        Site k1 = make_site({0, 0}), k2 = make_site({2, 1});
        auto pairing = [&](const std::vector<double>& psi) {
            return epsd * (psi[flat_index(k1, 2, M)] - psi[flat_index(k2, 2, M)]);
        };
        Site diff = make_site({-2, -1});
        double var = 2 * epsd * epsd *
                     (sampler.covariance_at(Site{0, 0, 0, 0}) - sampler.covariance_at(diff));
        double contraction = std::pow(2.0, -phi_dim);
        std::vector<double> shifted(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) shifted[i] = contraction * phi[i];
        double mean_shift = pairing(shifted);
        double expect = var + mean_shift * mean_shift;
        RgEstimate est = rg_step(
            [&](const std::vector<double>& psi) {
                double v = pairing(psi);
                return v * v;
            },
            sampler, phi, phi_dim, 20000);
        CHECK(std::fabs(est.mean - expect) <= 4 * est.std_error);
    }
}
