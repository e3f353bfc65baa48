#include "relent/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relent::search {

namespace {

struct Counted {
    const Objective& f;
    int evaluations = 0;
    double operator()(const std::vector<double>& x) {
        ++evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : INFINITY;
    }
};

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    Counted eval{f};
    if (n == 0) return {x0, eval(x0), eval.evaluations, true};

    const double dim = static_cast<double>(n);
    const double alpha = 1.0;
    const double beta = options.adaptive ? 1.0 + 2.0 / dim : 2.0;
    const double gamma = options.adaptive ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
    const double delta = options.adaptive ? 1.0 - 1.0 / dim : 0.5;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;

    auto point = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (worst[k] - centroid[k]);
    };

    while (eval.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double spread_x = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                spread_x = std::max(spread_x, std::abs(simplex[i][k] - simplex[best][k]));
        if (values[worst] - values[best] <= options.f_tolerance && spread_x <= options.x_tolerance) {
            converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / dim;
        }

        point(-alpha, trial, simplex[worst]);
        const double reflected = eval(trial);
        if (reflected < values[best]) {
            point(-alpha * beta, trial2, simplex[worst]);
            const double expanded = eval(trial2);
            if (expanded < reflected) {
                simplex[worst] = trial2;
                values[worst] = expanded;
            } else {
                simplex[worst] = trial;
                values[worst] = reflected;
            }
            continue;
        }
        if (reflected < values[second]) {
            simplex[worst] = trial;
            values[worst] = reflected;
            continue;
        }
        const bool outside = reflected < values[worst];
        point(outside ? -alpha * gamma : gamma, trial2, simplex[worst]);
        const double contracted = eval(trial2);
        if (contracted < std::min(reflected, values[worst])) {
            simplex[worst] = trial2;
            values[worst] = contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k)
                simplex[i][k] = simplex[best][k] + delta * (simplex[i][k] - simplex[best][k]);
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {simplex[best], values[best], eval.evaluations, converged};
}

Result quasi_newton(const Objective& f, std::vector<double> x0, const QuasiNewtonOptions& options) {
    const std::size_t n = x0.size();
    Counted eval{f};
    std::vector<double> x = std::move(x0);
    double fx = eval(x);
    if (n == 0) return {x, fx, eval.evaluations, true};

    auto gradient = [&](const std::vector<double>& at) {
        std::vector<double> g(n);
        std::vector<double> probe = at;
        for (std::size_t k = 0; k < n; ++k) {
            const double h = options.gradient_step * std::max(1.0, std::abs(at[k]));
            probe[k] = at[k] + h;
            const double up = eval(probe);
            probe[k] = at[k] - h;
            const double down = eval(probe);
            probe[k] = at[k];
            g[k] = (up - down) / (2.0 * h);
        }
        return g;
    };

    std::vector<double> hinv(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) hinv[k * n + k] = 1.0;
    std::vector<double> g = gradient(x);
    bool converged = false;

    while (eval.evaluations + 2 * static_cast<int>(n) + 20 < options.max_evaluations) {
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (!std::isfinite(gmax)) break;
        if (gmax <= options.gradient_tolerance) {
            converged = true;
            break;
        }
        std::vector<double> dir(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) dir[i] -= hinv[i * n + j] * g[j];
        double slope = std::inner_product(dir.begin(), dir.end(), g.begin(), 0.0);
        if (slope >= 0.0) {
            // Lost descent; reset the curvature model.
            std::fill(hinv.begin(), hinv.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) hinv[k * n + k] = 1.0;
            for (std::size_t k = 0; k < n; ++k) dir[k] = -g[k];
            slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        }

        double step = 1.0;
        std::vector<double> next(n);
        double fnext = fx;
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            for (std::size_t k = 0; k < n; ++k) next[k] = x[k] + step * dir[k];
            fnext = eval(next);
            if (fnext <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no further decrease resolvable at this gradient accuracy
            break;
        }

        const std::vector<double> gnext = gradient(next);
        std::vector<double> s(n), y(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = next[k] - x[k];
            y[k] = gnext[k] - g[k];
        }
        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        if (sy > 1e-14) {
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
            const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    hinv[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
        const double drop = fx - fnext;
        x = std::move(next);
        fx = fnext;
        g = gnext;
        if (drop >= 0.0 && drop < 1e-15 * std::max(1.0, std::abs(fx))) {
            converged = true;
            break;
        }
    }
    return {x, fx, eval.evaluations, converged};
}

}  // namespace relent::search
