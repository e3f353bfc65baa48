#pragma once

// Small derivative-free and quasi-Newton minimizers for low-dimensional objectives.

#include <functional>
#include <vector>

namespace relent::search {

using Objective = std::function<double(const std::vector<double>&)>;

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    int max_evaluations = 2000;
    double initial_step = 0.5;
    // Stop once the simplex spread in f and x falls below these.
    double f_tolerance = 1e-10;
    double x_tolerance = 1e-8;
    // Dimension-adaptive coefficients (Gao & Han); better behaved above ~5 dimensions.
    bool adaptive = true;
};

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

struct QuasiNewtonOptions {
    int max_evaluations = 4000;
    double gradient_step = 1e-6;
    double gradient_tolerance = 1e-9;
};

// BFGS with central-difference gradients and backtracking line search.
Result quasi_newton(const Objective& f, std::vector<double> x0, const QuasiNewtonOptions& options = {});

}  // namespace relent::search
