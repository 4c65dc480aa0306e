#include "frd/report.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>

namespace frd {

Report::Report(const std::string& command) : command_(command), data_(nlohmann::json::object()) {}

void Report::add_check(const CheckResult& check) { checks_.push_back(check); }

void Report::add_data(const std::string& key, const nlohmann::json& value) { data_[key] = value; }

bool Report::all_passed() const {
    for (const auto& c : checks_)
        if (!c.pass) return false;
    return true;
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = command_;
    j["pass"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks_) {
        j["checks"].push_back({{"id", c.id},
                               {"description", c.description},
                               {"pass", c.pass},
                               {"value", c.value},
                               {"threshold", c.threshold},
                               {"note", c.note}});
    }
    j["data"] = data_;
    return j;
}

void Report::save(const std::string& path) const {
    std::ofstream out(path);
    out << std::setw(2) << to_json() << '\n';
}

void Report::print_check_lines(std::ostream& os) const {
    for (const auto& c : checks_) {
        os << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << "  " << c.description << "  value="
           << std::setprecision(6) << std::scientific << c.value << " threshold=" << c.threshold;
        if (!c.note.empty()) os << "  (" << c.note << ")";
        os << std::defaultfloat << '\n';
    }
}

} // namespace frd
