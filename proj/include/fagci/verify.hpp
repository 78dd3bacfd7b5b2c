#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fagci {

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    int gh_nodes = 32;             // noise quadrature resolution
    int remark4_scenarios = 10;    // matched-GMI vs MI consistency draws
    int gradient_scenarios = 20;   // finite-difference gradient checks
    int reduction_scenarios = 5;   // MISO-to-scalar reduction draws
    std::uint64_t seed = 7;
    double gradient_perturbation = 0.0;  // test hook: offsets the analytic gradient
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = false;
};

/// Built-in consistency suite: interference saturation and vanishing limits,
/// matched-metric GMI vs MI, precoder gradients vs finite differences, and
/// the MISO-to-scalar GMI reduction.
VerifyReport run_verify(const VerifyOptions& opts = {});

std::string verify_report_to_json(const VerifyReport& report);

}  // namespace fagci
