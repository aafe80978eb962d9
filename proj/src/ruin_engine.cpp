#include "ruinlab/ruin_engine.hpp"

#include "ruinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace ruinlab {

std::pair<double, double> wilson_interval(const RuinEstimate& e, double z) {
    const double n = static_cast<double>(e.n_paths);
    const double p = e.psi_hat;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<RuinEstimate> ruin_curve(const RiskModel& model, std::span<const double> grid,
                                     Assumption assumption, const McOptions& options) {
    validate(model);
    if (grid.empty()) {
        throw std::invalid_argument("ruin_curve: empty surplus grid");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw std::invalid_argument("ruin_curve: surplus grid must be sorted ascending");
    }
    if (!(grid.front() >= 0.0)) {
        throw std::invalid_argument("ruin_curve: initial surplus must be >= 0");
    }
    if (options.n_paths < 1000) {
        throw std::invalid_argument("ruin_curve: need at least 1000 paths");
    }

    const PeriodSampler sampler(model, assumption);
    const double stop_below = -grid.back();
    unsigned workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, options.n_paths));

    std::vector<std::vector<std::size_t>> ruined(workers, std::vector<std::size_t>(grid.size(), 0));
    auto run = [&](unsigned w) {
        const std::size_t begin = options.n_paths * w / workers;
        const std::size_t end = options.n_paths * (w + 1) / workers;
        auto& counts = ruined[w];
        for (std::size_t i = begin; i < end; ++i) {
            auto stream = PathStream::for_path(options.master_seed, i);
            const double lowest = simulate_running_minimum(model, sampler, stream, stop_below);
            for (std::size_t g = 0; g < grid.size() && grid[g] + lowest < 0.0; ++g) {
                ++counts[g];
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back(run, w);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    std::vector<RuinEstimate> out;
    out.reserve(grid.size());
    const double n = static_cast<double>(options.n_paths);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::size_t total = 0;
        for (const auto& counts : ruined) {
            total += counts[g];
        }
        RuinEstimate e;
        e.u0 = grid[g];
        e.assumption = assumption;
        e.psi_hat = static_cast<double>(total) / n;
        e.std_error = std::sqrt(e.psi_hat * (1.0 - e.psi_hat) / n);
        e.n_paths = options.n_paths;
        e.horizon = model.horizon;
        out.push_back(e);
    }
    return out;
}

RuinEstimate estimate_ruin_mc(const RiskModel& model, double u0, Assumption assumption,
                              const McOptions& options) {
    const double grid[] = {u0};
    return ruin_curve(model, grid, assumption, options).front();
}

AdjustmentCoefficient adjustment_coefficient(const RiskModel& model) {
    const double lambda = model.lambda;
    const double beta = model.beta;
    const double c = premium_per_period(model);
    if (!(beta > 0.0) || !(lambda > 0.0)) {
        throw NumericalError("adjustment coefficient: need lambda > 0 and beta > 0");
    }
    // For r in (0, beta): lambda (beta/(beta-r) - 1) - c r = r * g(r).
    auto g = [&](double r) { return lambda / (beta - r) - c; };
    double lo = 0.0;
    double hi = beta;
    if (!(g(lo) < 0.0)) {
        throw NumericalError("adjustment coefficient: no sign change on (0, beta); net profit condition fails");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    AdjustmentCoefficient out;
    out.R = 0.5 * (lo + hi);
    out.residual = std::fabs(std::expm1(out.R * g(out.R)));
    return out;
}

double adjustment_coefficient_exponential(const RiskModel& model) {
    return model.loading * model.beta / (1.0 + model.loading);
}

double cramer_lundberg_psi(const RiskModel& model, double u0) {
    if (!(model.loading > 0.0)) {
        throw NumericalError("Cramer-Lundberg: loading must be > 0");
    }
    if (!(u0 >= 0.0)) {
        throw std::invalid_argument("Cramer-Lundberg: u0 must be >= 0");
    }
    const double R = adjustment_coefficient(model).R;
    return std::exp(-R * u0) / (1.0 + model.loading);
}

double lundberg_bound(const RiskModel& model, double u0) {
    return std::exp(-adjustment_coefficient(model).R * u0);
}

InterestModel InterestModel::constant(double rate) {
    return InterestModel{{rate}, {{1.0}}};
}

void validate(const InterestModel& interest) {
    const std::size_t l = interest.rates.size();
    if (l == 0) {
        throw std::invalid_argument("interest model: no states");
    }
    if (interest.transition.size() != l) {
        throw std::invalid_argument("interest model: transition matrix must be square over the states");
    }
    for (double r : interest.rates) {
        if (!(r > -1.0) || !std::isfinite(r)) {
            throw std::invalid_argument("interest model: rates must be > -1");
        }
    }
    for (const auto& row : interest.transition) {
        if (row.size() != l) {
            throw std::invalid_argument("interest model: transition matrix must be square over the states");
        }
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) {
                throw std::invalid_argument("interest model: negative transition probability");
            }
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument(fmt::format("interest model: transition row sums to {}, not 1", sum));
        }
    }
}

LossDistribution exponential_loss(double rate) {
    if (!(rate > 0.0)) {
        throw std::invalid_argument("exponential_loss: rate must be > 0");
    }
    return LossDistribution{
        [rate](double x) { return x <= 0.0 ? 1.0 : std::exp(-rate * x); },
        [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); },
    };
}

namespace {

// psi_k tabulated at nodes m * step for every interest state.
struct RuinTable {
    double step = 0.0;
    std::vector<std::vector<double>> by_state;
};

class Recursion {
public:
    Recursion(const InterestModel& interest, const LossDistribution& loss, double premium, double step)
        : interest_(interest), loss_(loss), premium_(premium), step_(step) {}

    // psi_{k}(x, s) from the psi_{k-1} table (k = 1 when prev is null).
    double evaluate(double x, std::size_t s, const RuinTable* prev) {
        double total = 0.0;
        for (std::size_t j = 0; j < interest_.rates.size(); ++j) {
            const double p = interest_.transition[s][j];
            if (p == 0.0) {
                continue;
            }
            const double w = x * (1.0 + interest_.rates[j]) + premium_;
            double term = loss_.survival(w);
            if (prev != nullptr) {
                term += integral(w, prev->by_state[j]);
            }
            total += p * term;
        }
        return std::min(total, 1.0);
    }

    RuinTable tabulate(double domain, const RuinTable* prev) {
        const auto nodes = static_cast<std::size_t>(std::ceil(domain / step_)) + 1;
        RuinTable table;
        table.step = step_;
        table.by_state.assign(interest_.rates.size(), std::vector<double>(nodes));
        for (std::size_t s = 0; s < interest_.rates.size(); ++s) {
            for (std::size_t m = 0; m < nodes; ++m) {
                table.by_state[s][m] = evaluate(static_cast<double>(m) * step_, s, prev);
            }
        }
        return table;
    }

private:
    double density_at_node(std::size_t m) {
        while (density_.size() <= m) {
            density_.push_back(loss_.density(static_cast<double>(density_.size()) * step_));
        }
        return density_[m];
    }

    static double interpolate(const std::vector<double>& psi, double pos) {
        const auto last = psi.size() - 1;
        if (pos >= static_cast<double>(last)) {
            return psi[last];
        }
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return psi[i] + frac * (psi[i + 1] - psi[i]);
    }

    // Trapezoid rule for int_0^w psi(w - z) v(z) dz on nodes z = m * step plus
    // the final partial panel ending at w.
    double integral(double w, const std::vector<double>& psi) {
        const double h = step_;
        const auto full = static_cast<std::size_t>(std::floor(w / h));
        const double frac = w / h - static_cast<double>(full);
        // psi(w - m h) sits at table position (full - m) + frac
        auto g = [&](std::size_t m) {
            return interpolate(psi, static_cast<double>(full - m) + frac) * density_at_node(m);
        };
        double sum = 0.0;
        if (full > 0) {
            sum += 0.5 * (g(0) + g(full));
            for (std::size_t m = 1; m < full; ++m) {
                sum += g(m);
            }
            sum *= h;
        }
        const double tail = w - static_cast<double>(full) * h;
        if (tail > 0.0) {
            sum += 0.5 * tail * (g(full) + psi.front() * loss_.density(w));
        }
        return sum;
    }

    const InterestModel& interest_;
    const LossDistribution& loss_;
    double premium_;
    double step_;
    std::vector<double> density_;
};

void check_recursion_inputs(double u0, const InterestModel& interest, std::size_t start_state,
                            double premium, const RecursionSettings& settings) {
    validate(interest);
    if (start_state >= interest.rates.size()) {
        throw std::invalid_argument("finite-time ruin: start state out of range");
    }
    if (!(u0 >= 0.0)) {
        throw std::invalid_argument("finite-time ruin: u0 must be >= 0");
    }
    if (!(premium > 0.0)) {
        throw std::invalid_argument("finite-time ruin: premium must be > 0");
    }
    if (settings.n_periods < 1) {
        throw std::invalid_argument("finite-time ruin: need at least one period");
    }
    if (settings.step < 0.0 || settings.step > premium / 10.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            fmt::format("finite-time ruin: grid step {} too coarse (max premium / 10 = {})", settings.step,
                        premium / 10.0));
    }
}

} // namespace

std::vector<double> finite_time_ruin_sequence(double u0, const InterestModel& interest,
                                              std::size_t start_state, const LossDistribution& loss,
                                              double premium, const RecursionSettings& settings) {
    check_recursion_inputs(u0, interest, start_state, premium, settings);
    const double step = settings.step > 0.0 ? settings.step : premium / 10.0;
    const int n = settings.n_periods;

    // Table k (for psi_k) must cover every argument u (1 + i_j) + c reached
    // from the points evaluated at level k + 1.
    const double growth = 1.0 + std::max(0.0, *std::max_element(interest.rates.begin(), interest.rates.end()));
    std::vector<double> domain(static_cast<std::size_t>(n) + 1, 0.0);
    domain[static_cast<std::size_t>(n)] = u0;
    for (int k = n - 1; k >= 1; --k) {
        domain[static_cast<std::size_t>(k)] = (domain[static_cast<std::size_t>(k) + 1] + step) * growth + premium + step;
    }

    Recursion recursion(interest, loss, premium, step);
    std::vector<double> sequence;
    sequence.reserve(static_cast<std::size_t>(n));
    RuinTable prev;
    for (int k = 1; k <= n; ++k) {
        const RuinTable* prev_ptr = k == 1 ? nullptr : &prev;
        sequence.push_back(recursion.evaluate(u0, start_state, prev_ptr));
        if (k < n) {
            prev = recursion.tabulate(domain[static_cast<std::size_t>(k)], prev_ptr);
        }
    }
    return sequence;
}

double finite_time_ruin_recursive(double u0, const InterestModel& interest, std::size_t start_state,
                                  const LossDistribution& loss, double premium,
                                  const RecursionSettings& settings) {
    return finite_time_ruin_sequence(u0, interest, start_state, loss, premium, settings).back();
}

RefinedRuin finite_time_ruin_refined(double u0, const InterestModel& interest, std::size_t start_state,
                                     const LossDistribution& loss, double premium, int n_periods,
                                     double tolerance, int max_halvings) {
    double step = premium / 10.0;
    double previous = finite_time_ruin_recursive(u0, interest, start_state, loss, premium, {n_periods, step});
    for (int h = 0; h < max_halvings; ++h) {
        step *= 0.5;
        const double current =
            finite_time_ruin_recursive(u0, interest, start_state, loss, premium, {n_periods, step});
        const double change = std::fabs(current - previous);
        if (change < tolerance) {
            return RefinedRuin{current, step, change};
        }
        previous = current;
    }
    throw NumericalError(fmt::format("finite-time ruin: no convergence to {} after {} halvings", tolerance,
                                     max_halvings));
}

} // namespace ruinlab
