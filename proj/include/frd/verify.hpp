#ifndef FRD_VERIFY_HPP
#define FRD_VERIFY_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "frd/report.hpp"

namespace frd::verify {

struct Options {
    int threads = 1;
    std::string cache_dir; // empty: no disk cache
    std::uint64_t seed = 20240817;
    bool quick = false;    // trimmed grids for development loops
};

// Runs every acceptance criterion at the desk-scale envelope, printing one
// pass/fail line per criterion to `progress`.
Report run_all(const Options& options, std::ostream& progress);

} // namespace frd::verify

#endif
