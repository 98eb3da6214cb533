#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include "pekit/pe.hpp"
#include "pekit/timeseries.hpp"

namespace pekit {

/// Black-box steppable discrete-time system with dimensions (n, m, p).
/// Plants are immutable after construction; step/output must be pure, so
/// concurrent simulations of the same plant are safe.
class Plant {
  public:
    virtual ~Plant() = default;

    virtual Eigen::Index state_dim() const = 0;
    virtual Eigen::Index input_dim() const = 0;
    virtual Eigen::Index output_dim() const = 0;

    virtual Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;
    virtual Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;

    /// Chain-driving scalar recorded during simulation, when the plant has
    /// one (normal-form plants only).
    virtual std::optional<double> synthetic_input(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& u) const {
        (void)x;
        (void)u;
        return std::nullopt;
    }
};

/// x_{k+1} = A x_k + B u_k,  y_k = C x_k + D u_k.
class LtiPlant : public Plant {
  public:
    LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D);

    Eigen::Index state_dim() const override { return A_.rows(); }
    Eigen::Index input_dim() const override { return B_.cols(); }
    Eigen::Index output_dim() const override { return C_.rows(); }

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }
    const Eigen::MatrixXd& D() const { return D_; }

    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;

    /// rank [B, AB, ..., A^{n-1}B] == n, with the toolkit rank criterion.
    bool controllable(double tol = kDefaultRankTol) const;

  private:
    Eigen::MatrixXd A_, B_, C_, D_;
};

/// LTI core driven through a static input nonlinearity:
/// x_{k+1} = A x_k + B g(u_k),  y_k = C x_k + D g(u_k), with g(0) = 0.
class HammersteinPlant : public Plant {
  public:
    using InputMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    /// `lifted_input_dim` is the dimension of g's image (the column count
    /// of B and D); `input_dim` is the physical input dimension.
    HammersteinPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D,
                     Eigen::Index input_dim, InputMap gamma);

    Eigen::Index state_dim() const override { return core_.state_dim(); }
    Eigen::Index input_dim() const override { return input_dim_; }
    Eigen::Index output_dim() const override { return core_.output_dim(); }
    Eigen::Index lifted_input_dim() const { return core_.input_dim(); }

    const LtiPlant& core() const { return core_; }
    Eigen::VectorXd gamma(const Eigen::VectorXd& u) const;

    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;

  private:
    LtiPlant core_;
    Eigen::Index input_dim_;
    InputMap gamma_;
};

/// SISO nonlinear system in normal form: the state is a length-n shift chain
/// driven by the synthetic scalar v = a(x) + b(x) u, with output y = x_1.
/// a(0) = 0 and b bounded away from zero on the operating region keep the
/// input channel invertible.
class FlatPlant : public Plant {
  public:
    using StateFn = std::function<double(const Eigen::VectorXd&)>;

    FlatPlant(Eigen::Index order, StateFn drift, StateFn input_gain);

    /// Constant input gain convenience (b(x) = gain).
    FlatPlant(Eigen::Index order, StateFn drift, double gain = 1.0);

    Eigen::Index state_dim() const override { return order_; }
    Eigen::Index input_dim() const override { return 1; }
    Eigen::Index output_dim() const override { return 1; }

    /// v = a(x) + b(x) u.
    double chain_input(const Eigen::VectorXd& x, double u) const;

    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    std::optional<double> synthetic_input(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u) const override;

  private:
    Eigen::Index order_;
    StateFn drift_;
    StateFn input_gain_;
};

/// Simulation record. States run one sample longer than inputs (terminal
/// state included); outputs align with inputs; the synthetic-input series is
/// present for normal-form plants only.
struct Trajectory {
    TimeSeries states;
    TimeSeries inputs;
    TimeSeries outputs;
    std::optional<TimeSeries> synthetic_inputs;
    bool truncated = false;           ///< stopped early at a non-finite sample
    Eigen::Index first_bad_index = -1; ///< step index that produced it
};

/// Exact recursion of the plant's step map from x0 under the given inputs.
/// Halts at the first non-finite sample and reports a truncated trajectory.
Trajectory simulate(const Plant& plant, const Eigen::VectorXd& x0, const TimeSeries& u);

/// The second-order benchmark system used throughout the toolkit's
/// experiments: v = -sin(x1) + x1*x2^2 - x1^3*x2 + u.
FlatPlant example_flat_system();

/// Reconstructs the chain state from outputs: sample k stacks y_k..y_{k+n-1}.
/// Output length is N - n + 1.
TimeSeries flat_state_from_outputs(const TimeSeries& y, Eigen::Index order);

/// Recovers the synthetic input from a normal-form state sequence via the
/// shift structure: v_k = x_{n,k+1}.
TimeSeries extract_synthetic_input(const Trajectory& traj);

/// Loads a plant description from JSON (kinds: "lti", "hammerstein", "flat").
std::unique_ptr<Plant> load_plant_json(const std::filesystem::path& path);
std::unique_ptr<Plant> parse_plant_json(const std::string& text);

} // namespace pekit
