#include "pekit/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace pekit {

namespace {

std::string power_label(const std::string& var, int power) {
    return power == 1 ? var : var + "^" + std::to_string(power);
}

} // namespace

BasisSet::BasisSet(Eigen::Index state_dim, Eigen::Index input_dim,
                   std::vector<Component> components,
                   std::vector<ComponentDescriptor> descriptors)
    : state_dim_(state_dim), input_dim_(input_dim), components_(std::move(components)),
      descriptors_(std::move(descriptors)) {
    if (components_.empty()) {
        throw std::invalid_argument("basis set needs at least one component");
    }
    if (descriptors_.size() != components_.size()) {
        throw std::invalid_argument("descriptor count must match component count");
    }
    if (input_dim_ < 1 || state_dim_ < 0) {
        throw std::invalid_argument("invalid basis arity");
    }
    // Shift components so that every one vanishes at the origin; record the
    // shift for report reproducibility.
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(state_dim_);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(input_dim_);
    for (size_t i = 0; i < components_.size(); ++i) {
        const double origin_value = components_[i](x0, u0);
        if (!std::isfinite(origin_value)) {
            throw std::invalid_argument("basis component " + std::to_string(i) +
                                        " is not finite at the origin");
        }
        if (origin_value != 0.0) {
            descriptors_[i].shift = origin_value;
            Component inner = std::move(components_[i]);
            components_[i] = [inner = std::move(inner), origin_value](
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
                return inner(x, u) - origin_value;
            };
        }
    }
}

BasisSet BasisSet::input_only(Eigen::Index input_dim, std::vector<Component> components,
                              std::vector<ComponentDescriptor> descriptors) {
    return BasisSet(0, input_dim, std::move(components), std::move(descriptors));
}

BasisSet BasisSet::state_input(Eigen::Index state_dim, Eigen::Index input_dim,
                               std::vector<Component> components,
                               std::vector<ComponentDescriptor> descriptors) {
    if (state_dim < 1) {
        throw std::invalid_argument("state-input basis needs state dimension >= 1");
    }
    return BasisSet(state_dim, input_dim, std::move(components), std::move(descriptors));
}

Eigen::Index BasisSet::pure_input_component() const {
    for (size_t i = 0; i < descriptors_.size(); ++i) {
        const ComponentDescriptor& d = descriptors_[i];
        if (d.kind == "monomial" && d.power == 1 && d.index < input_dim_) {
            return static_cast<Eigen::Index>(i);
        }
    }
    return -1;
}

Eigen::VectorXd BasisSet::eval_stack(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    if (x.size() != state_dim_) {
        throw std::invalid_argument("state dimension mismatch: expected " +
                                    std::to_string(state_dim_) + ", got " +
                                    std::to_string(x.size()));
    }
    if (u.size() != input_dim_) {
        throw std::invalid_argument("input dimension mismatch: expected " +
                                    std::to_string(input_dim_) + ", got " +
                                    std::to_string(u.size()));
    }
    Eigen::VectorXd out(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        out(i) = components_[static_cast<size_t>(i)](x, u);
    }
    return out;
}

Eigen::VectorXd BasisSet::eval_stack(const Eigen::VectorXd& u) const {
    return eval_stack(Eigen::VectorXd::Zero(state_dim_), u);
}

TimeSeries BasisSet::lift(const TimeSeries& states, const TimeSeries& inputs) const {
    if (states.length() < inputs.length()) {
        throw std::invalid_argument("state series shorter than input series");
    }
    Eigen::MatrixXd out(size(), inputs.length());
    for (Eigen::Index k = 0; k < inputs.length(); ++k) {
        out.col(k) = eval_stack(states.sample(k), inputs.sample(k));
    }
    return TimeSeries(std::move(out));
}

TimeSeries BasisSet::lift(const TimeSeries& inputs) const {
    if (!input_only_arity()) {
        throw std::invalid_argument("state-input basis requires a state series");
    }
    Eigen::MatrixXd out(size(), inputs.length());
    const Eigen::VectorXd x0(0);
    for (Eigen::Index k = 0; k < inputs.length(); ++k) {
        out.col(k) = eval_stack(x0, inputs.sample(k));
    }
    return TimeSeries(std::move(out));
}

BasisSet monomial_basis(Eigen::Index state_dim, Eigen::Index input_dim, int max_power) {
    if (max_power < 1) {
        throw std::invalid_argument("max_power must be >= 1, got " + std::to_string(max_power));
    }
    if (state_dim > 0 && input_dim != 1) {
        throw std::invalid_argument("state-input monomial basis requires a scalar input");
    }
    std::vector<BasisSet::Component> components;
    std::vector<ComponentDescriptor> descriptors;

    for (int p = 1; p <= max_power; ++p) {
        for (Eigen::Index j = 0; j < input_dim; ++j) {
            components.push_back([p, j](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
                return std::pow(u(j), p);
            });
            const std::string var = input_dim == 1 ? "u" : "u" + std::to_string(j + 1);
            descriptors.push_back({"monomial", p, static_cast<int>(j), 0.0, power_label(var, p)});
        }
    }
    for (int p = 1; p <= max_power; ++p) {
        for (Eigen::Index i = 0; i < state_dim; ++i) {
            components.push_back([p, i](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
                return std::pow(x(i), p);
            });
            descriptors.push_back({"monomial", p, static_cast<int>(input_dim + i), 0.0,
                                   power_label("x" + std::to_string(i + 1), p)});
        }
    }

    if (state_dim == 0) {
        return BasisSet::input_only(input_dim, std::move(components), std::move(descriptors));
    }
    return BasisSet::state_input(state_dim, input_dim, std::move(components),
                                 std::move(descriptors));
}

BasisSet monomial_basis_affine_input(Eigen::Index state_dim, int max_state_power) {
    if (state_dim < 1) {
        throw std::invalid_argument("state dimension must be >= 1");
    }
    if (max_state_power < 1) {
        throw std::invalid_argument("max_state_power must be >= 1");
    }
    std::vector<BasisSet::Component> components;
    std::vector<ComponentDescriptor> descriptors;

    components.push_back(
        [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); });
    descriptors.push_back({"monomial", 1, 0, 0.0, "u"});

    for (int p = 1; p <= max_state_power; ++p) {
        for (Eigen::Index i = 0; i < state_dim; ++i) {
            components.push_back([p, i](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
                return std::pow(x(i), p);
            });
            descriptors.push_back({"monomial", p, static_cast<int>(1 + i), 0.0,
                                   power_label("x" + std::to_string(i + 1), p)});
        }
    }
    return BasisSet::state_input(state_dim, 1, std::move(components), std::move(descriptors));
}

StructuredMatrix build_lambda(const BasisSet& basis,
                              const std::vector<Eigen::VectorXd>& amplitudes) {
    if (!basis.input_only_arity()) {
        throw std::invalid_argument("amplitude matrix requires an input-only basis");
    }
    const Eigen::Index r = basis.size();
    if (static_cast<Eigen::Index>(amplitudes.size()) != r) {
        throw std::invalid_argument("expected " + std::to_string(r) + " amplitudes, got " +
                                    std::to_string(amplitudes.size()));
    }
    StructuredMatrix m;
    m.kind = StructuredMatrix::Kind::Lambda;
    m.matrix.resize(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        m.matrix.col(j) = basis.eval_stack(amplitudes[static_cast<size_t>(j)]);
        std::string label = "amplitude " + std::to_string(j + 1) + " = (";
        for (Eigen::Index i = 0; i < amplitudes[static_cast<size_t>(j)].size(); ++i) {
            label += (i ? ", " : "") + std::to_string(amplitudes[static_cast<size_t>(j)](i));
        }
        m.column_provenance.push_back(label + ")");
    }
    return m;
}

StructuredMatrix build_lambda(const BasisSet& basis, const std::vector<double>& amplitudes) {
    std::vector<Eigen::VectorXd> vectors;
    vectors.reserve(amplitudes.size());
    for (double a : amplitudes) {
        vectors.push_back(Eigen::VectorXd::Constant(1, a));
    }
    return build_lambda(basis, vectors);
}

StructuredMatrix build_omega(const std::vector<double>& values) {
    const Eigen::Index t = static_cast<Eigen::Index>(values.size());
    if (t < 1) {
        throw std::invalid_argument("need at least one value");
    }
    StructuredMatrix m;
    m.kind = StructuredMatrix::Kind::Omega;
    m.matrix.resize(t, t);
    for (Eigen::Index j = 0; j < t; ++j) {
        double p = 1.0;
        for (Eigen::Index i = 0; i < t; ++i) {
            p *= values[static_cast<size_t>(j)];
            m.matrix(i, j) = p;
        }
        m.column_provenance.push_back("value " + std::to_string(values[static_cast<size_t>(j)]));
    }
    return m;
}

StructuredMatrix build_w(const BasisSet& basis, const std::vector<EndpointRecord>& records) {
    if (basis.input_only_arity()) {
        throw std::invalid_argument("endpoint matrix requires a state-input basis");
    }
    const Eigen::Index r = basis.size();
    if (static_cast<Eigen::Index>(records.size()) != r) {
        throw std::invalid_argument("expected " + std::to_string(r) + " endpoint records, got " +
                                    std::to_string(records.size()));
    }
    StructuredMatrix m;
    m.kind = StructuredMatrix::Kind::W;
    m.matrix.resize(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        const EndpointRecord& rec = records[static_cast<size_t>(j)];
        m.matrix.col(j) = basis.eval_stack(rec.state, rec.input);
        m.column_provenance.push_back("experiment " + std::to_string(j + 1));
    }
    return m;
}

InvertibilityReport check_invertible(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("invertibility check requires a square matrix");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();
    InvertibilityReport report;
    const double threshold = rank_threshold(sv(0), m.rows(), m.cols(), tol);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++report.rank;
        }
    }
    report.invertible = (report.rank == m.rows());
    const double sigma_min = sv(sv.size() - 1);
    report.condition = sigma_min > 0.0 ? sv(0) / sigma_min
                                       : std::numeric_limits<double>::infinity();
    return report;
}

InvertibilityReport check_invertible(const StructuredMatrix& m, double tol) {
    return check_invertible(m.matrix, tol);
}

} // namespace pekit
