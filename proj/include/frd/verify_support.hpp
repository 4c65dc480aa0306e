#ifndef FRD_VERIFY_SUPPORT_HPP
#define FRD_VERIFY_SUPPORT_HPP

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "frd/decomposition.hpp"
#include "frd/verify.hpp"

namespace frd::verify {

// deterministic generator for the randomized acceptance inputs
struct SplitMix {
    std::uint64_t state;
    explicit SplitMix(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53; }
};

// Shared state of one acceptance run: workspaces and constructed levels are
// memoized so later criteria reuse earlier builds.
class Suite {
public:
    explicit Suite(const Options& opt);

    KernelWorkspace& workspace(int d, int L);
    const DecompositionLevel& level(int d, int L, int n, double a);
    bool position_feasible(int d, int L, int n) const;
    std::vector<std::pair<int, int>> dl_grid() const;

    CheckResult criterion_range_eps();
    CheckResult criterion_range_levels();
    CheckResult criterion_psd();
    CheckResult criterion_reconstruction();
    CheckResult criterion_walk_oracle();
    CheckResult criterion_defect_bound();
    CheckResult criterion_scaling();
    CheckResult criterion_levy();
    CheckResult criterion_convergence();
    CheckResult criterion_sobolev();
    CheckResult criterion_sampler();
    CheckResult criterion_identities();

private:
    Options opt_;
    std::unique_ptr<KernelCache> cache_;
    std::map<std::pair<int, int>, std::unique_ptr<KernelWorkspace>> workspaces_;
    std::map<std::string, std::unique_ptr<DecompositionLevel>> levels_;
};

} // namespace frd::verify

#endif
