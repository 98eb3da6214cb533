#include "pekit/excite.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "pekit/csv.hpp"

namespace pekit {

using nlohmann::json;

std::string ExcitationPlan::to_json() const {
    json experiments_json = json::array();
    for (const TimeSeries& u : experiments) {
        json rows = json::array();
        for (Eigen::Index k = 0; k < u.length(); ++k) {
            json row = json::array();
            for (Eigen::Index j = 0; j < u.dim(); ++j) {
                row.push_back(u.samples()(j, k));
            }
            rows.push_back(std::move(row));
        }
        experiments_json.push_back(std::move(rows));
    }
    const json j = {
        {"designer", designer}, {"m", input_dim},   {"L", order},
        {"mu", settle_steps},   {"alpha", amplitude}, {"experiments", experiments_json},
    };
    return j.dump(2) + "\n";
}

ExcitationPlan ExcitationPlan::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("plan JSON parse error: ") + e.what());
    }
    ExcitationPlan plan;
    try {
        plan.designer = j.at("designer").get<std::string>();
        plan.input_dim = j.at("m").get<Eigen::Index>();
        plan.order = j.at("L").get<Eigen::Index>();
        plan.settle_steps = j.at("mu").get<Eigen::Index>();
        plan.amplitude = j.at("alpha").get<double>();
        for (const json& rows : j.at("experiments")) {
            Eigen::MatrixXd u(plan.input_dim, static_cast<Eigen::Index>(rows.size()));
            Eigen::Index k = 0;
            for (const json& row : rows) {
                if (static_cast<Eigen::Index>(row.size()) != plan.input_dim) {
                    throw IoError("plan JSON: sample dimension mismatch");
                }
                for (Eigen::Index d = 0; d < plan.input_dim; ++d) {
                    u(d, k) = row.at(static_cast<size_t>(d)).get<double>();
                }
                ++k;
            }
            plan.experiments.emplace_back(std::move(u));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("plan JSON: ") + e.what());
    }
    return plan;
}

ExcitationPlan impulse_train(Eigen::Index input_dim, Eigen::Index order, Eigen::Index horizon,
                             double alpha) {
    if (input_dim < 1 || order < 1) {
        throw std::invalid_argument("input dimension and order must be >= 1");
    }
    if (alpha <= 0.0) {
        throw std::invalid_argument("pulse amplitude must be positive");
    }
    const Eigen::Index min_horizon = (input_dim + 1) * order - 1;
    if (horizon < min_horizon) {
        throw std::invalid_argument("horizon too short: N = " + std::to_string(horizon) +
                                    " < (m+1)L-1 = " + std::to_string(min_horizon));
    }

    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(input_dim, horizon);
    ExcitationPlan plan;
    for (Eigen::Index j = 1; j <= input_dim; ++j) {
        u(j - 1, j * order - 1) = alpha;
        plan.amplitudes_used.push_back(Eigen::VectorXd::Unit(input_dim, j - 1) * alpha);
    }
    plan.designer = "impulse_train";
    plan.input_dim = input_dim;
    plan.order = order;
    plan.amplitude = alpha;
    plan.experiments.emplace_back(std::move(u));
    return plan;
}

ExcitationPlan hammerstein_train(const BasisSet& basis,
                                 const std::vector<Eigen::VectorXd>& amplitudes,
                                 Eigen::Index order, Eigen::Index horizon) {
    if (!basis.input_only_arity()) {
        throw std::invalid_argument("this designer requires an input-only basis");
    }
    if (order < 1) {
        throw std::invalid_argument("order must be >= 1");
    }
    const Eigen::Index r = basis.size();
    const Eigen::Index min_horizon = (r + 1) * order - 1;
    if (horizon < min_horizon) {
        throw std::invalid_argument("horizon too short: N = " + std::to_string(horizon) +
                                    " < (r+1)L-1 = " + std::to_string(min_horizon));
    }

    const StructuredMatrix lambda = build_lambda(basis, amplitudes);
    const InvertibilityReport report = check_invertible(lambda);
    if (!report.invertible) {
        throw std::invalid_argument(
            "amplitude matrix is singular (rank " + std::to_string(report.rank) + " of " +
            std::to_string(r) + ", condition estimate " + std::to_string(report.condition) +
            "); choose amplitudes that make the basis evaluations independent");
    }

    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(basis.input_dim(), horizon);
    for (Eigen::Index j = 1; j <= r; ++j) {
        u.col(j * order - 1) = amplitudes[static_cast<size_t>(j - 1)];
    }
    ExcitationPlan plan;
    plan.designer = "hammerstein_train";
    plan.input_dim = basis.input_dim();
    plan.order = order;
    plan.experiments.emplace_back(std::move(u));
    plan.amplitudes_used = amplitudes;
    return plan;
}

ExcitationPlan hammerstein_train(const BasisSet& basis, const std::vector<double>& amplitudes,
                                 Eigen::Index order, Eigen::Index horizon) {
    std::vector<Eigen::VectorXd> vectors;
    vectors.reserve(amplitudes.size());
    for (double a : amplitudes) {
        vectors.push_back(Eigen::VectorXd::Constant(1, a));
    }
    return hammerstein_train(basis, vectors, order, horizon);
}

AmplitudeSearchResult solve_lambda_feasibility(const BasisSet& basis,
                                               const AmplitudeSearchOptions& options,
                                               std::mt19937_64& rng) {
    if (!basis.input_only_arity()) {
        throw std::invalid_argument("amplitude search requires an input-only basis");
    }
    const Eigen::Index m = basis.input_dim();
    const Eigen::Index r = basis.size();
    if (options.lower.size() != m || options.upper.size() != m) {
        throw std::invalid_argument("sampler bounds must match the input dimension");
    }
    for (Eigen::Index d = 0; d < m; ++d) {
        if (!(options.lower(d) <= options.upper(d))) {
            throw std::invalid_argument("sampler bounds must satisfy lower <= upper");
        }
    }
    if (options.max_samples < r) {
        throw std::invalid_argument("max_samples must allow at least r draws");
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&]() {
        Eigen::VectorXd v(m);
        for (Eigen::Index d = 0; d < m; ++d) {
            v(d) = options.lower(d) + (options.upper(d) - options.lower(d)) * unit(rng);
        }
        return v;
    };

    AmplitudeSearchResult result;
    std::vector<Eigen::VectorXd> current;
    current.reserve(static_cast<size_t>(r));
    for (Eigen::Index j = 0; j < r; ++j) {
        current.push_back(draw());
    }
    result.samples_used = static_cast<int>(r);

    StructuredMatrix lambda = build_lambda(basis, current);
    auto sigma_min_of = [](const Eigen::MatrixXd& mtx) {
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(mtx).singularValues();
        return sv(sv.size() - 1);
    };
    double best_sigma = sigma_min_of(lambda.matrix);

    InvertibilityReport report = check_invertible(lambda, options.tol);
    result.rank = report.rank;
    result.condition = report.condition;
    while (!(report.invertible && report.condition <= options.condition_cap) &&
           result.samples_used < options.max_samples) {
        const Eigen::VectorXd candidate = draw();
        ++result.samples_used;

        // Greedy column replacement: keep whichever single substitution of the
        // candidate improves sigma_min the most.
        double best_improved = best_sigma;
        Eigen::Index best_slot = -1;
        for (Eigen::Index j = 0; j < r; ++j) {
            std::vector<Eigen::VectorXd> trial = current;
            trial[static_cast<size_t>(j)] = candidate;
            const double s = sigma_min_of(build_lambda(basis, trial).matrix);
            if (s > best_improved) {
                best_improved = s;
                best_slot = j;
            }
        }
        if (best_slot >= 0) {
            current[static_cast<size_t>(best_slot)] = candidate;
            best_sigma = best_improved;
            report = check_invertible(build_lambda(basis, current), options.tol);
            result.rank = std::max(result.rank, report.rank);
            result.condition = report.condition;
        }
    }

    result.amplitudes = current;
    result.sigma_min = best_sigma;
    result.success = report.invertible && report.condition <= options.condition_cap;
    result.condition = report.condition;
    return result;
}

ExcitationPlan reachable_multi_experiment(const std::vector<TimeSeries>& pulse_windows,
                                          Eigen::Index order, Eigen::Index settle_steps,
                                          const std::vector<Eigen::Index>& horizons) {
    if (pulse_windows.empty()) {
        throw std::invalid_argument("need at least one pulse window");
    }
    if (order < 1 || settle_steps < 1) {
        throw std::invalid_argument("order and settle_steps must be >= 1");
    }
    if (horizons.size() != pulse_windows.size()) {
        throw std::invalid_argument("horizon list must match the number of pulse windows");
    }
    const Eigen::Index m = pulse_windows.front().dim();
    const Eigen::Index min_horizon = 2 * order + settle_steps - 1;

    ExcitationPlan plan;
    plan.designer = "reachable_multi_experiment";
    plan.input_dim = m;
    plan.order = order;
    plan.settle_steps = settle_steps;
    for (size_t j = 0; j < pulse_windows.size(); ++j) {
        const TimeSeries& eta = pulse_windows[j];
        if (eta.dim() != m) {
            throw std::invalid_argument("pulse window " + std::to_string(j) +
                                        " has mismatched input dimension");
        }
        if (eta.length() != settle_steps + 1) {
            throw std::invalid_argument("pulse window " + std::to_string(j) + " must have mu+1 = " +
                                        std::to_string(settle_steps + 1) + " samples, got " +
                                        std::to_string(eta.length()));
        }
        const Eigen::Index N = horizons[j];
        if (N < min_horizon) {
            throw std::invalid_argument("horizon too short for experiment " + std::to_string(j) +
                                        ": N = " + std::to_string(N) +
                                        " < 2L+mu-1 = " + std::to_string(min_horizon));
        }
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(m, N);
        u.middleCols(order - 1, settle_steps + 1) = eta.samples();
        plan.experiments.emplace_back(std::move(u));
    }
    return plan;
}

std::vector<TimeSeries> flat_eta_sequences(Eigen::Index order, Eigen::Index max_power,
                                           const std::vector<double>& values) {
    if (order < 1 || max_power < 1) {
        throw std::invalid_argument("order and max_power must be >= 1");
    }
    const Eigen::Index n = order;
    const Eigen::Index t = max_power;
    const Eigen::Index r = t * (n + 1);
    if (static_cast<Eigen::Index>(values.size()) != r) {
        throw std::invalid_argument("expected t(n+1) = " + std::to_string(r) + " values, got " +
                                    std::to_string(values.size()));
    }
    for (size_t a = 0; a < values.size(); ++a) {
        if (values[a] == 0.0) {
            throw std::invalid_argument("pulse value " + std::to_string(a + 1) + " is zero");
        }
        for (size_t b = a + 1; b < values.size(); ++b) {
            if (values[a] == values[b]) {
                throw std::invalid_argument("pulse values " + std::to_string(a + 1) + " and " +
                                            std::to_string(b + 1) + " are equal (" +
                                            std::to_string(values[a]) + ")");
            }
        }
    }

    // Window j (1-based) places its value delta_j so that, stepped from the
    // origin, experiment endpoints hit distinct chain positions: the first
    // t*n windows put delta_j at position b*n - j where b = ceil(j/n) is the
    // band of j; the final n+1..-group windows put delta_j at the last slot.
    std::vector<TimeSeries> windows;
    windows.reserve(static_cast<size_t>(r));
    for (Eigen::Index j = 1; j <= r; ++j) {
        Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(1, n + 1);
        Eigen::Index position = n;
        if (j <= t * n) {
            const Eigen::Index band = (j + n - 1) / n; // lowest band containing j
            position = band * n - j;
        }
        eta(0, position) = values[static_cast<size_t>(j - 1)];
        windows.emplace_back(std::move(eta));
    }
    return windows;
}

std::vector<EndpointRecord> endpoint_records(const Plant& plant, const ExcitationPlan& plan) {
    if (plan.settle_steps < 1) {
        throw std::invalid_argument("plan carries no pulse-window metadata");
    }
    const Eigen::Index endpoint = plan.order + plan.settle_steps - 1;
    std::vector<EndpointRecord> records;
    records.reserve(plan.experiments.size());
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(plant.state_dim());
    for (const TimeSeries& u : plan.experiments) {
        if (u.length() <= endpoint) {
            throw std::invalid_argument("experiment too short to reach sample L+mu-1");
        }
        const Trajectory traj = simulate(plant, x0, u);
        if (traj.truncated || traj.states.length() <= endpoint) {
            throw std::invalid_argument("simulation diverged before the endpoint sample");
        }
        records.push_back({traj.states.sample(endpoint), u.sample(endpoint)});
    }
    return records;
}

RandomWindowSearchResult random_eta_heuristic(Eigen::Index experiment_count,
                                              Eigen::Index settle_steps, double bound_lo,
                                              double bound_hi, const Plant& plant,
                                              const BasisSet& basis, Eigen::Index order,
                                              int attempts, std::mt19937_64& rng) {
    if (experiment_count != basis.size()) {
        throw std::invalid_argument("experiment count must equal the basis size r");
    }
    if (bound_lo > bound_hi) {
        throw std::invalid_argument("bounds must satisfy lo <= hi");
    }
    std::uniform_real_distribution<double> dist(bound_lo, bound_hi);

    const Eigen::Index m = plant.input_dim();
    const std::vector<Eigen::Index> horizons(static_cast<size_t>(experiment_count),
                                             2 * order + settle_steps - 1);

    RandomWindowSearchResult result;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        result.attempts_used = attempt;
        std::vector<TimeSeries> windows;
        windows.reserve(static_cast<size_t>(experiment_count));
        for (Eigen::Index j = 0; j < experiment_count; ++j) {
            Eigen::MatrixXd eta(m, settle_steps + 1);
            for (Eigen::Index d = 0; d < m; ++d) {
                for (Eigen::Index k = 0; k <= settle_steps; ++k) {
                    eta(d, k) = dist(rng);
                }
            }
            windows.emplace_back(std::move(eta));
        }
        ExcitationPlan plan =
            reachable_multi_experiment(windows, order, settle_steps, horizons);
        plan.designer = "random_eta_heuristic";

        std::vector<EndpointRecord> records;
        try {
            records = endpoint_records(plant, plan);
        } catch (const std::invalid_argument&) {
            continue; // diverged; resample
        }
        const StructuredMatrix w = build_w(basis, records);
        const InvertibilityReport report = check_invertible(w);
        if (report.condition < result.best_condition) {
            result.best_condition = report.condition;
        }
        if (report.invertible) {
            result.success = true;
            result.plan = std::move(plan);
            result.endpoint_matrix = w;
            result.report = report;
            return result;
        }
    }
    return result;
}

} // namespace pekit
