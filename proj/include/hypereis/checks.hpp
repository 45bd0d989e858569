#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hypereis::checks {

enum class Status { Pass, Fail, Inconclusive };

std::string to_string(Status s);

struct CheckResult {
    std::string name;
    Status status = Status::Fail;
    std::string summary;
    double tolerance = 0.0;  // the primary tolerance actually applied
    nlohmann::ordered_json details;
    double seconds = 0.0;
};

struct CheckOptions {
    // Replaces the check's primary tolerance. Below the check's floor a failure is
    // reported as Inconclusive: the requested accuracy is not attainable by the method.
    std::optional<double> tolerance;
    int threads = 1;
};

struct CheckInfo {
    std::string name;
    std::string description;
    double tolerance = 0.0;  // default primary tolerance
    double floor = 0.0;      // smallest primary tolerance the method can resolve
    std::function<CheckResult(const CheckOptions&, double tol)> run;
};

// All checks in a fixed order.
const std::vector<CheckInfo>& registry();

// Throws DomainError for an unknown name.
const CheckInfo& find_check(const std::string& name);

CheckResult run_check(const std::string& name, const CheckOptions& opt = {});

// Runs the named checks in the given order; an empty list runs the whole registry.
std::vector<CheckResult> run_checks(const std::vector<std::string>& names, const CheckOptions& opt = {});

inline constexpr const char* kVerifySchema = "hypereis.verify.v1";

nlohmann::ordered_json to_json(const CheckResult& r);
// {schema, passed, failed, inconclusive, checks: [...]}
nlohmann::ordered_json report_json(const std::vector<CheckResult>& results);

}  // namespace hypereis::checks
