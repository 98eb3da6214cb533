#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pekit/basis.hpp"
#include "pekit/plant.hpp"
#include "pekit/timeseries.hpp"

namespace pekit {

/// One or more designed input sequences plus the metadata needed to state
/// the excitation guarantee they carry.
struct ExcitationPlan {
    std::string designer;               ///< which designer produced the plan
    Eigen::Index input_dim = 1;         ///< m
    Eigen::Index order = 1;             ///< target excitation order L
    Eigen::Index settle_steps = 0;      ///< pulse-window length parameter (mu), 0 when unused
    double amplitude = 1.0;             ///< scale applied to pulses (alpha)
    std::vector<TimeSeries> experiments;
    std::vector<Eigen::VectorXd> amplitudes_used; ///< per-pulse amplitudes, when applicable

    /// Serializes to {designer, m, L, mu, alpha, experiments}.
    std::string to_json() const;
    static ExcitationPlan from_json(const std::string& text);
};

/// Single sparse experiment with one pulse per input channel: sample
/// jL-1 carries alpha * e_j for j = 1..m, all other samples are zero.
/// Guarantees rank(H_L(u)) = mL with every singular value equal to alpha.
/// Requires N >= (m+1)L - 1.
ExcitationPlan impulse_train(Eigen::Index input_dim, Eigen::Index order, Eigen::Index horizon,
                             double alpha = 1.0);

/// Sparse amplitude train for an input-only basis: sample jL-1 carries
/// amplitude j. The amplitude matrix is checked for invertibility and the
/// plan is rejected (with its condition estimate) when it fails, because the
/// excitation guarantee on the lifted sequence depends on it.
/// Requires N >= (r+1)L - 1.
ExcitationPlan hammerstein_train(const BasisSet& basis,
                                 const std::vector<Eigen::VectorXd>& amplitudes,
                                 Eigen::Index order, Eigen::Index horizon);
ExcitationPlan hammerstein_train(const BasisSet& basis, const std::vector<double>& amplitudes,
                                 Eigen::Index order, Eigen::Index horizon);

struct AmplitudeSearchOptions {
    Eigen::VectorXd lower; ///< per-channel sampling bounds
    Eigen::VectorXd upper;
    int max_samples = 1000;   ///< total candidate draws
    double condition_cap = 1e8;
    double tol = kDefaultRankTol;
};

struct AmplitudeSearchResult {
    bool success = false;
    std::vector<Eigen::VectorXd> amplitudes;
    double sigma_min = 0.0;
    double condition = std::numeric_limits<double>::infinity();
    Eigen::Index rank = 0;  ///< best rank achieved
    int samples_used = 0;
};

/// Searches amplitudes that make the basis amplitude matrix invertible with
/// condition at most the cap: multistart uniform sampling with greedy
/// column replacement, keeping the candidate set that maximizes sigma_min.
/// Failure (likely a linearly dependent basis) carries the best rank and
/// condition found.
AmplitudeSearchResult solve_lambda_feasibility(const BasisSet& basis,
                                               const AmplitudeSearchOptions& options,
                                               std::mt19937_64& rng);

/// Multi-experiment plan for systems reachable near the origin: experiment j
/// is zero except samples L-1 .. L+mu-1, which carry the j-th pulse window.
/// Requires each N_j >= 2L + mu - 1 and windows of length mu+1.
ExcitationPlan reachable_multi_experiment(const std::vector<TimeSeries>& pulse_windows,
                                          Eigen::Index order, Eigen::Index settle_steps,
                                          const std::vector<Eigen::Index>& horizons);

/// Pulse windows (length n+1 each, scalar) for the chain-of-order-n design:
/// t*(n+1) windows, each placing one of the given distinct nonzero values so
/// that the endpoint records produce an invertible block anti-diagonal
/// matrix. Values must be pairwise distinct and nonzero.
std::vector<TimeSeries> flat_eta_sequences(Eigen::Index order, Eigen::Index max_power,
                                           const std::vector<double>& values);

struct RandomWindowSearchResult {
    bool success = false;
    ExcitationPlan plan;
    StructuredMatrix endpoint_matrix;
    InvertibilityReport report;
    int attempts_used = 0;
    double best_condition = std::numeric_limits<double>::infinity();
};

/// Samples pulse windows uniformly within bounds, simulates the plant from
/// the origin, and keeps the first draw whose endpoint matrix passes the
/// invertibility check. Returns the verified plan or the best condition
/// found when attempts run out.
RandomWindowSearchResult random_eta_heuristic(Eigen::Index experiment_count,
                                              Eigen::Index settle_steps, double bound_lo,
                                              double bound_hi, const Plant& plant,
                                              const BasisSet& basis, Eigen::Index order,
                                              int attempts, std::mt19937_64& rng);

/// Endpoint records (state and input at sample L+mu-1) of the plan's
/// experiments simulated on the plant from the origin.
std::vector<EndpointRecord> endpoint_records(const Plant& plant, const ExcitationPlan& plan);

} // namespace pekit
