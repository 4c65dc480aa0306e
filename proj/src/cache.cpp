#include "frd/cache.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "frd/averaging.hpp"

namespace frd {

KernelCache::KernelCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string KernelCache::key(const LatticeSpec& spec, int m, double a, double R,
                             std::uint64_t bump_hash) {
    std::ostringstream os;
    os << "d" << spec.d << "_L" << spec.L() << "_n" << spec.n << "_m" << m << "_a"
       << std::hexfloat << a << "_R" << std::hexfloat << R << "_g" << std::hex << bump_hash;
    return os.str();
}

std::string KernelCache::path_for(const std::string& key) const {
    // keys are already filesystem-safe apart from '+' in hexfloat exponents
    std::string safe = key;
    for (char& c : safe)
        if (c == '+') c = 'q';
    return dir_ + "/" + safe + ".json";
}

std::optional<AveragingKernel> KernelCache::load(const std::string& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    nlohmann::json j;
    in >> j;
    if (j.value("schema", 0) != 1 || j.value("kind", "") != "averaging") return std::nullopt;

    AveragingKernel k;
    k.spec = LatticeSpec(j.at("d").get<int>(), j.at("p").get<int>(), j.at("n").get<int>());
    k.m = j.at("m").get<int>();
    k.a = j.at("a").get<double>();
    k.R = j.at("R").get<double>();
    k.mass = j.at("mass").get<double>();
    std::array<int, kMaxDim> radius{0, 0, 0, 0};
    auto jr = j.at("radius");
    for (int mu = 0; mu < k.spec.d; ++mu) radius[mu] = jr.at(mu).get<int>();
    k.density = LatticeKernel(k.spec, radius);
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != k.density.size()) return std::nullopt;
    k.density.values() = std::move(values);
    k.density.set_even_symmetric(true);
    return k;
}

void KernelCache::store(const std::string& key, const AveragingKernel& kernel) const {
    nlohmann::json j;
    j["schema"] = 1;
    j["kind"] = "averaging";
    j["d"] = kernel.spec.d;
    j["p"] = kernel.spec.p;
    j["n"] = kernel.spec.n;
    j["m"] = kernel.m;
    j["a"] = kernel.a;
    j["R"] = kernel.R;
    j["mass"] = kernel.mass;
    std::vector<int> radius(kernel.spec.d);
    for (int mu = 0; mu < kernel.spec.d; ++mu) radius[static_cast<std::size_t>(mu)] = kernel.density.radius()[mu];
    j["radius"] = radius;
    j["values"] = kernel.density.values();

    std::string path = path_for(key);
    std::ofstream out(path + ".tmp");
    out << j;
    out.close();
    std::filesystem::rename(path + ".tmp", path);
}

} // namespace frd
