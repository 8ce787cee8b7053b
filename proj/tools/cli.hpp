#pragma once

#include <exception>
#include <ostream>
#include <string>

#include "nhrmt/csv.hpp"

namespace nhrmt::cli {

enum ExitCode { kOk = 0, kUsage = 2, kNumeric = 3, kIo = 4 };

// Maps a library exception to the process exit code.
int exit_code_for(const std::exception& e);

struct AnalyticOptions {
    int n = 20;
    double tau = 0.0;
    std::string variant = "conditional";
    double d = 0.0;
    int grid = 200;
    bool rescaled = false;  // ginue-nn/nnn: first-moment rescaled curve
};

// ginue-density, ai-density, ginue-nn, ginue-nnn, poisson-nn, poisson-nnn,
// surmise, gue-surmise, hermitian-limit, pentadiagonal, edge-gap
CsvTable analytic_curve(const std::string& curve, const AnalyticOptions& opt);

// Entry point of the nhrmt tool.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nhrmt::cli
