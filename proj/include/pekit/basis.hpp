#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "pekit/pe.hpp"

namespace pekit {

/// Serializable tag describing one basis component. `kind` is "monomial"
/// for factory-built power terms and "custom" for user closures; `shift`
/// records the constant subtracted so the component vanishes at the origin.
struct ComponentDescriptor {
    std::string kind = "custom"; ///< "monomial" or "custom"
    int power = 0;               ///< exponent for monomial components
    int index = 0;               ///< variable index (inputs first, then states)
    double shift = 0.0;          ///< origin value subtracted at construction
    std::string label;           ///< human-readable form, e.g. "u^2" or "x1*x2^2"

    bool operator==(const ComponentDescriptor&) const = default;
};

/// Ordered set of r scalar functions of the input alone, or of (state, input).
/// Every component evaluates to 0 at the origin; components whose closure does
/// not vanish there are shifted by their origin value at construction and the
/// shift is recorded in the descriptor. Components must be pure functions;
/// evaluation is re-entrant.
class BasisSet {
  public:
    /// Component closure: receives (state, input); input-only sets get an
    /// empty state vector.
    using Component = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

    /// Input-only basis over R^m.
    static BasisSet input_only(Eigen::Index input_dim, std::vector<Component> components,
                               std::vector<ComponentDescriptor> descriptors);

    /// State-input basis over R^n x R^m.
    static BasisSet state_input(Eigen::Index state_dim, Eigen::Index input_dim,
                                std::vector<Component> components,
                                std::vector<ComponentDescriptor> descriptors);

    bool input_only_arity() const { return state_dim_ == 0; }
    Eigen::Index state_dim() const { return state_dim_; }
    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(components_.size()); }

    const std::vector<ComponentDescriptor>& descriptors() const { return descriptors_; }

    /// Index of the pure linear-input component (monomial u with power 1),
    /// or -1 when the set has none. Used by controller construction.
    Eigen::Index pure_input_component() const;

    /// Evaluates the stacked component vector at (x, u). Input-only sets
    /// take an empty x.
    Eigen::VectorXd eval_stack(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

    /// Convenience for input-only sets.
    Eigen::VectorXd eval_stack(const Eigen::VectorXd& u) const;

    /// Whole-series evaluation: sample k of the result is the stacked vector
    /// at (x_k, u_k). For input-only sets pass an empty states series.
    TimeSeries lift(const TimeSeries& states, const TimeSeries& inputs) const;
    TimeSeries lift(const TimeSeries& inputs) const;

  private:
    BasisSet(Eigen::Index state_dim, Eigen::Index input_dim, std::vector<Component> components,
             std::vector<ComponentDescriptor> descriptors);

    Eigen::Index state_dim_ = 0; // 0 means input-only arity
    Eigen::Index input_dim_ = 1;
    std::vector<Component> components_;
    std::vector<ComponentDescriptor> descriptors_;
};

/// Monomial basis over (state, input) with element-wise state powers:
/// [u, u^2, ..., u^t, x_1, ..., x_n, x_1^2, ..., x_n^2, ..., x_n^t].
/// With state_dim = 0 the set reduces to the input powers [u, ..., u^t];
/// the input must be scalar when state_dim > 0. Size is t*(n+1) for n > 0.
BasisSet monomial_basis(Eigen::Index state_dim, Eigen::Index input_dim, int max_power);

/// Monomial basis that keeps the input linear: [u, x_1, ..., x_n, x_1^2, ...,
/// x_n^2, ..., x_n^t]. Size is 1 + t*n. Suits controller designs that must
/// invert the input channel.
BasisSet monomial_basis_affine_input(Eigen::Index state_dim, int max_state_power);

/// Square matrix of basis evaluations with a record of what produced each
/// column. Invertibility of these matrices is what the input designers
/// certify, so it is checked with check_invertible rather than asserted here.
struct StructuredMatrix {
    enum class Kind { Lambda, W, Omega };
    Kind kind = Kind::Lambda;
    Eigen::MatrixXd matrix;
    std::vector<std::string> column_provenance;
};

struct InvertibilityReport {
    bool invertible = false;
    double condition = std::numeric_limits<double>::infinity();
    Eigen::Index rank = 0;
};

/// Column j = stacked basis vector at amplitude j (input-only basis;
/// amplitudes must number exactly r).
StructuredMatrix build_lambda(const BasisSet& basis, const std::vector<Eigen::VectorXd>& amplitudes);

/// Scalar-amplitude convenience overload.
StructuredMatrix build_lambda(const BasisSet& basis, const std::vector<double>& amplitudes);

/// t x t matrix with entry (i, j) = values[j]^(i+1); invertible iff the
/// values are nonzero and mutually distinct. Singularity is a checkable
/// outcome, not an error.
StructuredMatrix build_omega(const std::vector<double>& values);

/// One (state, input) record per experiment, taken at the sample index the
/// multi-experiment designers aim at.
struct EndpointRecord {
    Eigen::VectorXd state;
    Eigen::VectorXd input;
};

/// Column j = stacked basis vector at experiment j's endpoint record
/// (state-input basis; records must number exactly r).
StructuredMatrix build_w(const BasisSet& basis, const std::vector<EndpointRecord>& records);

/// Numerical invertibility: rank (toolkit criterion) equals the dimension.
/// The condition estimate is sigma_max / sigma_min, infinite when singular.
InvertibilityReport check_invertible(const StructuredMatrix& m, double tol = kDefaultRankTol);
InvertibilityReport check_invertible(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

} // namespace pekit
