#ifndef FRD_REPORT_HPP
#define FRD_REPORT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace frd {

// One certified numeric result: the value, the check it certifies and the
// tolerance it was held to.
struct CheckResult {
    std::string id;
    std::string description;
    bool pass = false;
    double value = 0;
    double threshold = 0;
    std::string note;
};

// Structured run output. Serialized with "schema": 1.
class Report {
public:
    explicit Report(const std::string& command);

    void add_check(const CheckResult& check);
    void add_data(const std::string& key, const nlohmann::json& value);

    bool all_passed() const;
    const std::vector<CheckResult>& checks() const { return checks_; }

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
    void print_check_lines(std::ostream& os) const;

private:
    std::string command_;
    std::vector<CheckResult> checks_;
    nlohmann::json data_;
};

} // namespace frd

#endif
