#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pekit/basis.hpp"
#include "pekit/pe.hpp"
#include "pekit/plant.hpp"

namespace pekit {

/// Least-squares model of the chain-driving nonlinearity over a basis set.
struct RegressionModel {
    Eigen::VectorXd coefficients; ///< one per basis component
    double residual = 0.0;        ///< 2-norm of the fit residual
    double regressor_condition = 0.0;
    bool exact_span = false;      ///< residual below the exact-fit tolerance
    PEReport regressor_report;    ///< depth-1 excitation report of the lifted data
};

/// Fits c so that c' * basis(x_k, u_k) tracks the synthetic input recovered
/// from the trajectories. Requires the stacked regressor to have full row
/// rank r (depth-1 excitation of the lifted data); throws otherwise.
RegressionModel fit_nonlinearity(const std::vector<Trajectory>& data, const BasisSet& basis,
                                 double tol = kDefaultRankTol);

/// State-feedback law u(x) = (K x - g0(x)) / c_u built from a fitted model:
/// g0 collects the non-input terms, c_u is the pure-input coefficient, and K
/// places every chain pole at `pole_radius` (deadbeat at 0). Assumes the
/// model is affine in the input (components other than the pure-input one
/// must not depend on u).
class LinearizingController {
  public:
    LinearizingController(const BasisSet& basis, RegressionModel model, Eigen::Index order,
                          double pole_radius);

    double operator()(const Eigen::VectorXd& state) const;

    const Eigen::RowVectorXd& gain() const { return gain_; }
    double input_coefficient() const { return input_coef_; }

  private:
    BasisSet basis_;
    RegressionModel model_;
    Eigen::RowVectorXd gain_;
    double input_coef_ = 1.0;
    Eigen::Index input_component_ = 0;
};

LinearizingController linearizing_controller(const BasisSet& basis, const RegressionModel& model,
                                             Eigen::Index order, double pole_radius = 0.0);

/// Closed-loop run record. The cumulative error averages |x_i| over the full
/// horizon; the tail variant starts the sum at k = n, after the transient a
/// deadbeat design needs to absorb the initial state.
struct ClosedLoopResult {
    TimeSeries states;
    Eigen::VectorXd cumulative_error;      ///< E_i = sum_k |x_{i,k}| / T
    Eigen::VectorXd tail_cumulative_error; ///< same sum restricted to k >= n
    bool diverged = false;
};

/// Simulates the plant under the controller for T steps from x0. Divergence
/// (non-finite sample or norm above `blowup`) truncates the run and is a
/// reported outcome, not an error.
ClosedLoopResult closed_loop_experiment(const FlatPlant& plant,
                                        const std::function<double(const Eigen::VectorXd&)>& control,
                                        const Eigen::VectorXd& x0, Eigen::Index horizon,
                                        double blowup = 1e6);

/// Aggregates for one excitation/model strategy in the comparison harness.
struct StrategySummary {
    std::string name;
    double avg_sigma_min = 0.0;   ///< depth-1 sigma_min of the lifted data
    Eigen::VectorXd avg_error;      ///< averaged over non-diverged trials
    Eigen::VectorXd avg_tail_error;
    int diverged = 0;
    int fit_failures = 0;
};

struct Table1Trial {
    uint64_t seed = 0;
    Eigen::VectorXd x0;
    std::vector<double> sigma_min;   ///< per strategy
    std::vector<Eigen::VectorXd> error;
    std::vector<Eigen::VectorXd> tail_error;
    std::vector<bool> diverged;
    std::vector<bool> fit_failed;
};

struct Table1Report {
    std::vector<StrategySummary> strategies;
    std::vector<Table1Trial> trials;
    int trial_count = 0;

    std::string to_json() const;
    std::string trials_to_csv() const;
};

struct Table1Options {
    int trials = 50;
    Eigen::Index horizon = 20;          ///< closed-loop steps T
    Eigen::Index random_data_length = 21;
    double random_input_bound = 0.25;   ///< data inputs ~ U(-b, b) for random strategies
    double designed_pulse_bound = 1.0;  ///< pulse values ~ U(-b, b) for the designed strategy
    double pole_radius = 0.0;
    double blowup = 1e6;
};

/// Three-way comparison on the benchmark system: (exact_random) a spanning
/// basis fit on one random-input experiment, (approx_random) an affine-input
/// monomial basis on the same data, (approx_designed) the same approximate
/// basis fit on short designed multi-experiments. Deterministic given the
/// seed; per-trial seeds make trials independent.
Table1Report table1_experiment(uint64_t seed, const Table1Options& options = {});

} // namespace pekit
