#pragma once

#include <functional>
#include <span>
#include <vector>

namespace genrehawkes::optim {

/// Objective returning f(x) and writing the gradient into `grad`.
using ValueAndGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;
using Value = std::function<double(std::span<const double> x)>;

struct Options {
    int max_iterations{500};
    double gradient_tolerance{1e-6};
    double step_tolerance{1e-9};
    double armijo_c1{1e-4};
    double backtrack_shrink{0.5};
    int max_backtracks{60};
    /// Line-search failures tolerated before BFGS hands over to the simplex.
    int max_line_search_failures{2};
    double simplex_initial_step{0.1};
};

struct Result {
    std::vector<double> x;
    double value{0.0};
    double gradient_norm{0.0};
    double last_step{0.0};
    int iterations{0};
    bool converged{false};
    bool used_simplex{false};
};

/// Minimizes f with BFGS and a backtracking Armijo line search. When the line
/// search fails `max_line_search_failures` times the search continues with
/// Nelder-Mead from the best point so far. Converged means the gradient
/// norm fell below `gradient_tolerance` or a step shorter than
/// `step_tolerance` was taken, all within `max_iterations`.
[[nodiscard]] Result minimize_bfgs(const ValueAndGradient& f, std::vector<double> x0, const Options& opts = {});

/// Derivative-free Nelder-Mead. Converged means the simplex diameter fell
/// below `step_tolerance` and the spread of values below 1e-12 (relative)
/// within `max_iterations`.
[[nodiscard]] Result minimize_nelder_mead(const Value& f, std::vector<double> x0, const Options& opts = {});

}  // namespace genrehawkes::optim
