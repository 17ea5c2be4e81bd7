#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gaugeflow {

/// Outcome of one numerical property check.
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string detail;
};

using ReportFragment = std::vector<CheckResult>;

struct VerificationReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    void append(CheckResult r) { checks.push_back(std::move(r)); }
    void append(const ReportFragment& fragment) {
        checks.insert(checks.end(), fragment.begin(), fragment.end());
    }

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

/// Pass iff measured <= tolerance; NaN never passes.
inline CheckResult threshold_check(std::string name, double measured, double tolerance,
                                   std::size_t samples, std::string detail = {}) {
    CheckResult r;
    r.name = std::move(name);
    r.measured = measured;
    r.tolerance = tolerance;
    r.passed = measured <= tolerance;
    r.samples = samples;
    r.detail = std::move(detail);
    return r;
}

} // namespace gaugeflow
