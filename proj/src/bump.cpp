#include "frd/bump.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <functional>

namespace frd {

namespace {

double raw_profile(double s) { // s = r / (L/4) in [0,1)
    if (s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

double unit_sphere_area(int d) { // S_{d-1} = 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

BumpProfile::BumpProfile(int d, int L) : d_(d), L_(L) {
    if (d < 1 || d > kMaxDim) throw ConfigError("bump dimension must be in 1..4");
    if (L < 2 || (L & (L - 1)) != 0) throw ConfigError("L must be a power of two >= 2");
    // int_{R^d} g = (L/4)^d S_{d-1} int_0^1 s^{d-1} raw(s) ds  (d=1: factor 2)
    double shell = (d == 1) ? 2.0 : unit_sphere_area(d);
    double radial = integrate([d](double s) { return std::pow(s, d - 1) * raw_profile(s); },
                              0.0, 1.0, 1e-15);
    normalization_ = std::pow(L / 4.0, d) * shell * radial;

    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, static_cast<std::uint64_t>(d));
    h = fnv1a(h, static_cast<std::uint64_t>(L));
    for (int i = 0; i <= 64; ++i) {
        double v = value(radius() * i / 64.0);
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h = fnv1a(h, bits);
    }
    hash_ = h;
}

double BumpProfile::value(double r) const {
    return raw_profile(r / radius()) / normalization_;
}

double BumpProfile::value_scaled(int m, double r) const {
    int p = std::countr_zero(static_cast<unsigned>(L_));
    return std::ldexp(value(std::ldexp(r, m * p)), m * p * d_);
}

double lattice_normalizer(double eps, const BumpProfile& profile) {
    int d = profile.d();
    long kmax = static_cast<long>(std::ceil(profile.radius() / eps));
    double sum = 0;
    std::array<long, kMaxDim> k{0, 0, 0, 0};
    std::function<void(int, double)> walk = [&](int mu, double r2) {
        if (mu == d) {
            sum += profile.value(std::sqrt(r2));
            return;
        }
        for (k[mu] = -kmax; k[mu] <= kmax; ++k[mu]) {
            double c = k[mu] * eps;
            walk(mu + 1, r2 + c * c);
        }
        k[mu] = 0;
    };
    walk(0, 0.0);
    sum *= std::pow(eps, d);
    if (!(sum > 0)) throw DegenerateBump("lattice sum of the bump vanished at spacing " + std::to_string(eps));
    return 1.0 / sum;
}

} // namespace frd
