#ifndef FRD_CACHE_HPP
#define FRD_CACHE_HPP

#include <optional>
#include <string>

#include "frd/lattice.hpp"

namespace frd {

struct AveragingKernel;

// Versioned JSON container for averaging kernels, keyed by
// (d, L, n, m, a, R, bump-profile hash). One file per kernel under dir/.
class KernelCache {
public:
    explicit KernelCache(std::string dir);

    const std::string& dir() const { return dir_; }

    static std::string key(const LatticeSpec& spec, int m, double a, double R,
                           std::uint64_t bump_hash);

    std::optional<AveragingKernel> load(const std::string& key) const;
    void store(const std::string& key, const AveragingKernel& kernel) const;

private:
    std::string path_for(const std::string& key) const;
    std::string dir_;
};

} // namespace frd

#endif
