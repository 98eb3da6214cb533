#include "pekit/plant.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "pekit/csv.hpp"
#include "pekit/pe.hpp"

namespace pekit {

using nlohmann::json;

namespace {

void check_dims(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                const Eigen::MatrixXd& D) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("A must be square");
    }
    if (B.rows() != A.rows()) {
        throw std::invalid_argument("B row count must match the state dimension");
    }
    if (C.cols() != A.rows()) {
        throw std::invalid_argument("C column count must match the state dimension");
    }
    if (D.rows() != C.rows() || D.cols() != B.cols()) {
        throw std::invalid_argument("D must be outputs x inputs");
    }
}

} // namespace

LtiPlant::LtiPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, Eigen::MatrixXd D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)) {
    check_dims(A_, B_, C_, D_);
}

Eigen::VectorXd LtiPlant::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return A_ * x + B_ * u;
}

Eigen::VectorXd LtiPlant::output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return C_ * x + D_ * u;
}

bool LtiPlant::controllable(double tol) const {
    const Eigen::Index n = state_dim();
    const Eigen::Index m = input_dim();
    Eigen::MatrixXd reach(n, n * m);
    Eigen::MatrixXd block = B_;
    for (Eigen::Index i = 0; i < n; ++i) {
        reach.middleCols(i * m, m) = block;
        block = A_ * block;
    }
    return numerical_rank(reach, tol) == n;
}

HammersteinPlant::HammersteinPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                   Eigen::MatrixXd D, Eigen::Index input_dim, InputMap gamma)
    : core_(std::move(A), std::move(B), std::move(C), std::move(D)), input_dim_(input_dim),
      gamma_(std::move(gamma)) {
    if (input_dim_ < 1) {
        throw std::invalid_argument("input dimension must be >= 1");
    }
    const Eigen::VectorXd at_origin = gamma_(Eigen::VectorXd::Zero(input_dim_));
    if (at_origin.size() != core_.input_dim()) {
        throw std::invalid_argument("input map image dimension " +
                                    std::to_string(at_origin.size()) +
                                    " does not match B/D column count " +
                                    std::to_string(core_.input_dim()));
    }
    if (at_origin.norm() > 1e-12) {
        throw std::invalid_argument("input nonlinearity must vanish at the origin");
    }
}

Eigen::VectorXd HammersteinPlant::gamma(const Eigen::VectorXd& u) const {
    if (u.size() != input_dim_) {
        throw std::invalid_argument("input dimension mismatch");
    }
    return gamma_(u);
}

Eigen::VectorXd HammersteinPlant::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return core_.step(x, gamma(u));
}

Eigen::VectorXd HammersteinPlant::output(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) const {
    return core_.output(x, gamma(u));
}

FlatPlant::FlatPlant(Eigen::Index order, StateFn drift, StateFn input_gain)
    : order_(order), drift_(std::move(drift)), input_gain_(std::move(input_gain)) {
    if (order_ < 1) {
        throw std::invalid_argument("chain order must be >= 1");
    }
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(order_);
    if (std::abs(drift_(origin)) > 1e-12) {
        throw std::invalid_argument("drift term must vanish at the origin");
    }
    if (input_gain_(origin) == 0.0) {
        throw std::invalid_argument("input gain must be nonzero at the origin");
    }
}

FlatPlant::FlatPlant(Eigen::Index order, StateFn drift, double gain)
    : FlatPlant(order, std::move(drift), [gain](const Eigen::VectorXd&) { return gain; }) {
    if (gain == 0.0) {
        throw std::invalid_argument("input gain must be nonzero");
    }
}

double FlatPlant::chain_input(const Eigen::VectorXd& x, double u) const {
    return drift_(x) + input_gain_(x) * u;
}

Eigen::VectorXd FlatPlant::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    Eigen::VectorXd next(order_);
    if (order_ > 1) {
        next.head(order_ - 1) = x.tail(order_ - 1);
    }
    next(order_ - 1) = chain_input(x, u(0));
    return next;
}

Eigen::VectorXd FlatPlant::output(const Eigen::VectorXd& x, const Eigen::VectorXd&) const {
    return x.head(1);
}

std::optional<double> FlatPlant::synthetic_input(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u) const {
    return chain_input(x, u(0));
}

Trajectory simulate(const Plant& plant, const Eigen::VectorXd& x0, const TimeSeries& u) {
    if (x0.size() != plant.state_dim()) {
        throw std::invalid_argument("initial state dimension " + std::to_string(x0.size()) +
                                    " does not match plant state dimension " +
                                    std::to_string(plant.state_dim()));
    }
    if (u.dim() != plant.input_dim()) {
        throw std::invalid_argument("input dimension " + std::to_string(u.dim()) +
                                    " does not match plant input dimension " +
                                    std::to_string(plant.input_dim()));
    }

    const Eigen::Index N = u.length();
    const bool has_v = plant.synthetic_input(x0, u.sample(0)).has_value();

    Eigen::MatrixXd states(plant.state_dim(), N + 1);
    Eigen::MatrixXd outputs(plant.output_dim(), N);
    Eigen::MatrixXd synth(has_v ? 1 : 0, N);

    states.col(0) = x0;
    Eigen::Index steps = 0;
    bool truncated = false;
    Eigen::Index first_bad = -1;
    for (Eigen::Index k = 0; k < N; ++k) {
        const Eigen::VectorXd uk = u.sample(k);
        const Eigen::VectorXd xk = states.col(k);
        const Eigen::VectorXd yk = plant.output(xk, uk);
        const Eigen::VectorXd xk1 = plant.step(xk, uk);
        if (!yk.allFinite() || !xk1.allFinite()) {
            truncated = true;
            first_bad = k;
            break;
        }
        outputs.col(k) = yk;
        states.col(k + 1) = xk1;
        if (has_v) {
            synth(0, k) = *plant.synthetic_input(xk, uk);
        }
        steps = k + 1;
    }

    if (steps == 0) {
        throw std::invalid_argument("simulation produced no finite samples (non-finite at step 0)");
    }

    Trajectory traj;
    traj.states = TimeSeries(states.leftCols(steps + 1));
    traj.inputs = u.segment(0, steps);
    traj.outputs = TimeSeries(outputs.leftCols(steps));
    if (has_v) {
        traj.synthetic_inputs = TimeSeries(synth.leftCols(steps));
    }
    traj.truncated = truncated;
    traj.first_bad_index = first_bad;
    return traj;
}

FlatPlant example_flat_system() {
    return FlatPlant(2, [](const Eigen::VectorXd& x) {
        return -std::sin(x(0)) + x(0) * x(1) * x(1) - x(0) * x(0) * x(0) * x(1);
    });
}

TimeSeries flat_state_from_outputs(const TimeSeries& y, Eigen::Index order) {
    if (y.dim() != 1) {
        throw std::invalid_argument("output series must be scalar");
    }
    if (order < 1 || y.length() < order) {
        throw std::invalid_argument("need at least " + std::to_string(order) +
                                    " output samples, got " + std::to_string(y.length()));
    }
    Eigen::MatrixXd xi(order, y.length() - order + 1);
    for (Eigen::Index k = 0; k < xi.cols(); ++k) {
        xi.col(k) = y.samples().row(0).segment(k, order).transpose();
    }
    return TimeSeries(std::move(xi));
}

TimeSeries extract_synthetic_input(const Trajectory& traj) {
    const TimeSeries& x = traj.states;
    if (x.length() < 2) {
        throw std::invalid_argument("trajectory too short: need at least 2 state samples");
    }
    const Eigen::Index n = x.dim();
    Eigen::MatrixXd v(1, x.length() - 1);
    for (Eigen::Index k = 0; k + 1 < x.length(); ++k) {
        v(0, k) = x.samples()(n - 1, k + 1);
    }
    return TimeSeries(std::move(v));
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) {
        throw IoError("plant JSON: '" + name + "' must be a non-empty array of rows");
    }
    const size_t rows = j.size();
    const size_t cols = j.at(0).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) {
            throw IoError("plant JSON: ragged rows in '" + name + "'");
        }
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                j.at(i).at(c).get<double>();
        }
    }
    return m;
}

HammersteinPlant::InputMap gamma_from_json(const json& j, Eigen::Index input_dim) {
    if (!j.is_array() || j.empty()) {
        throw IoError("plant JSON: 'gamma' must be a non-empty array of component descriptors");
    }
    struct Comp {
        std::string kind;
        int power = 1;
        Eigen::Index index = 0;
        std::vector<double> xs, ys;
    };
    std::vector<Comp> comps;
    for (const json& cj : j) {
        Comp c;
        c.kind = cj.at("kind").get<std::string>();
        c.index = cj.value("index", 0);
        if (c.index < 0 || c.index >= input_dim) {
            throw IoError("plant JSON: gamma component index out of range");
        }
        if (c.kind == "monomial") {
            c.power = cj.at("power").get<int>();
        } else if (c.kind == "sin") {
            // nothing else
        } else if (c.kind == "table") {
            c.xs = cj.at("x").get<std::vector<double>>();
            c.ys = cj.at("y").get<std::vector<double>>();
            if (c.xs.size() != c.ys.size() || c.xs.size() < 2) {
                throw IoError("plant JSON: gamma table needs matching x/y lists (>= 2 points)");
            }
        } else {
            throw IoError("plant JSON: unknown gamma kind '" + c.kind + "'");
        }
        comps.push_back(std::move(c));
    }
    return [comps](const Eigen::VectorXd& u) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(comps.size()));
        for (size_t i = 0; i < comps.size(); ++i) {
            const Comp& c = comps[i];
            const double ui = u(c.index);
            double value = 0.0;
            if (c.kind == "monomial") {
                value = std::pow(ui, c.power);
            } else if (c.kind == "sin") {
                value = std::sin(ui);
            } else {
                // piecewise-linear table, clamped at the ends
                const auto& xs = c.xs;
                const auto& ys = c.ys;
                if (ui <= xs.front()) {
                    value = ys.front();
                } else if (ui >= xs.back()) {
                    value = ys.back();
                } else {
                    size_t hi = 1;
                    while (xs[hi] < ui) {
                        ++hi;
                    }
                    const double w = (ui - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
                    value = (1.0 - w) * ys[hi - 1] + w * ys[hi];
                }
            }
            out(static_cast<Eigen::Index>(i)) = value;
        }
        return out;
    };
}

FlatPlant flat_from_json(const json& j) {
    const Eigen::Index n = j.at("n").get<Eigen::Index>();
    struct Term {
        double coef = 0.0;
        std::vector<int> powers;
        int sin_of = -1; // 1-based state index whose sine multiplies the term
    };
    std::vector<Term> terms;
    for (const json& tj : j.at("a_terms")) {
        Term t;
        t.coef = tj.at("coef").get<double>();
        if (tj.contains("powers")) {
            t.powers = tj.at("powers").get<std::vector<int>>();
            if (static_cast<Eigen::Index>(t.powers.size()) != n) {
                throw IoError("plant JSON: a_terms powers list must have n entries");
            }
        }
        if (tj.contains("sin_of")) {
            t.sin_of = tj.at("sin_of").get<int>();
            if (t.sin_of < 1 || t.sin_of > n) {
                throw IoError("plant JSON: sin_of must be a 1-based state index");
            }
        }
        terms.push_back(std::move(t));
    }
    const double b_const = j.value("b_const", 1.0);
    auto drift = [terms](const Eigen::VectorXd& x) {
        double v = 0.0;
        for (const Term& t : terms) {
            double term = t.coef;
            for (size_t i = 0; i < t.powers.size(); ++i) {
                term *= std::pow(x(static_cast<Eigen::Index>(i)), t.powers[i]);
            }
            if (t.sin_of >= 1) {
                term *= std::sin(x(t.sin_of - 1));
            }
            v += term;
        }
        return v;
    };
    return FlatPlant(n, std::move(drift), b_const);
}

} // namespace

std::unique_ptr<Plant> parse_plant_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("plant JSON parse error: ") + e.what());
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "lti") {
            return std::make_unique<LtiPlant>(
                matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B"),
                matrix_from_json(j.at("C"), "C"), matrix_from_json(j.at("D"), "D"));
        }
        if (kind == "hammerstein") {
            const Eigen::Index input_dim = j.value("m", 1);
            return std::make_unique<HammersteinPlant>(
                matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B"),
                matrix_from_json(j.at("C"), "C"), matrix_from_json(j.at("D"), "D"), input_dim,
                gamma_from_json(j.at("gamma"), input_dim));
        }
        if (kind == "flat") {
            return std::make_unique<FlatPlant>(flat_from_json(j));
        }
        throw IoError("plant JSON: unknown kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw IoError(std::string("plant JSON: ") + e.what());
    }
}

std::unique_ptr<Plant> load_plant_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plant_json(ss.str());
}

} // namespace pekit
