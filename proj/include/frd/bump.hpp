#ifndef FRD_BUMP_HPP
#define FRD_BUMP_HPP

#include <cstdint>

#include "frd/lattice.hpp"

namespace frd {

// Rotationally invariant C-infinity mollifier supported in the Euclidean ball
// of radius L/4, normalized to unit continuum integral over R^d:
//   g(x) = exp(-1/(1 - (4|x|/L)^2)) / Z_d(L)   for |x| < L/4, else 0.
class BumpProfile {
public:
    BumpProfile(int d, int L);

    int d() const { return d_; }
    int L() const { return L_; }
    double radius() const { return L_ / 4.0; }

    // continuum-normalized value at Euclidean radius r
    double value(double r) const;

    // g_m(z) = L^{md} g(L^m z) at a physical point z (Euclidean norm given)
    double value_scaled(int m, double r) const;

    // identifies the profile in cache keys
    std::uint64_t hash() const { return hash_; }

private:
    int d_ = 0;
    int L_ = 0;
    double normalization_ = 1.0; // Z_d(L)
    std::uint64_t hash_ = 0;
};

// c_eps = 1 / (eps^d sum_{x in (eps Z)^d} g(x)); DegenerateBump if the lattice
// misses the support entirely
double lattice_normalizer(double eps, const BumpProfile& profile);

} // namespace frd

#endif
