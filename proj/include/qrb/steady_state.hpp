// steady_state.hpp - stationary populations of the dressed master equation.
//
// Two independent routes: the Gibbs state (equal bath temperatures only) and
// the null space of the population generator. The null space is extracted with
// the Grassmann-Taksar-Heyman state reduction, which never subtracts and so
// keeps relative accuracy in populations down to the underflow limit.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qrb/dissipation.hpp"
#include "qrb/errors.hpp"
#include "qrb/model.hpp"

namespace qrb {

enum class SteadySource { gibbs, nullspace };

struct SteadyState {
    Eigen::VectorXd populations;
    SteadySource source{SteadySource::gibbs};
    std::optional<double> residual;  // max |M P|, when a generator was available

    Eigen::Index size() const { return populations.size(); }
};

inline double stationarity_residual(const Eigen::MatrixXd& generator, const Eigen::VectorXd& pops) {
    if (generator.cols() != pops.size()) throw DimensionMismatch("stationarity_residual: size mismatch");
    return (generator * pops).cwiseAbs().maxCoeff();
}

inline SteadyState gibbs_state(const Eigensystem& es, double temp) {
    if (!(temp >= 0.0)) throw InvalidInput("gibbs_state: temperature must be >= 0");
    const Eigen::Index dim = es.size();
    SteadyState ss;
    ss.source = SteadySource::gibbs;
    ss.populations = Eigen::VectorXd::Zero(dim);
    if (dim == 0) return ss;
    if (temp == 0.0) {
        ss.populations(0) = 1.0;
        return ss;
    }
    const double e0 = es.energies(0);
    for (Eigen::Index n = 0; n < dim; ++n) ss.populations(n) = std::exp(-(es.energies(n) - e0) / temp);
    // Smallest terms first.
    double z = 0.0;
    for (Eigen::Index n = dim - 1; n >= 0; --n) z += ss.populations(n);
    ss.populations /= z;
    return ss;
}

namespace detail {

// Closed communicating classes of the jump graph (edge k -> j when M(j,k) > 0).
inline std::vector<std::vector<Eigen::Index>> closed_classes(const Eigen::MatrixXd& m) {
    const Eigen::Index dim = m.rows();
    std::vector<std::vector<char>> reach(static_cast<std::size_t>(dim),
                                         std::vector<char>(static_cast<std::size_t>(dim), 0));
    for (Eigen::Index s = 0; s < dim; ++s) {
        auto& seen = reach[static_cast<std::size_t>(s)];
        std::vector<Eigen::Index> stack{s};
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            const Eigen::Index k = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < dim; ++j) {
                if (j != k && m(j, k) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                    seen[static_cast<std::size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
    }
    // s is recurrent iff everything it reaches can reach it back.
    std::vector<std::vector<Eigen::Index>> classes;
    std::vector<char> assigned(static_cast<std::size_t>(dim), 0);
    for (Eigen::Index s = 0; s < dim; ++s) {
        if (assigned[static_cast<std::size_t>(s)]) continue;
        bool closed = true;
        for (Eigen::Index j = 0; j < dim && closed; ++j) {
            if (reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] &&
                !reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)]) {
                closed = false;
            }
        }
        if (!closed) continue;
        std::vector<Eigen::Index> cls;
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)]) {
                cls.push_back(j);
                assigned[static_cast<std::size_t>(j)] = 1;
            }
        }
        classes.push_back(std::move(cls));
    }
    return classes;
}

// GTH reduction on an irreducible generator restricted to `states`.
inline Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& states) {
    const auto n = static_cast<Eigen::Index>(states.size());
    // a(i, j): rate from states[i] to states[j].
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = i == j ? 0.0 : m(states[j], states[i]);
    }
    for (Eigen::Index k = n - 1; k >= 1; --k) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) s += a(k, j);
        if (!(s > 0.0)) throw PhysicsError("nullspace_steady_state: reduction hit a zero pivot");
        for (Eigen::Index i = 0; i < k; ++i) a(i, k) /= s;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double akj = a(k, j);
            if (akj == 0.0) continue;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (i != j) a(i, j) += a(i, k) * akj;
            }
        }
    }
    Eigen::VectorXd pi(n);
    pi(0) = 1.0;
    for (Eigen::Index k = 1; k < n; ++k) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) acc += pi(i) * a(i, k);
        pi(k) = acc;
    }
    return pi / pi.sum();
}

}  // namespace detail

inline SteadyState nullspace_steady_state(const Eigen::MatrixXd& generator) {
    const Eigen::Index dim = generator.rows();
    if (generator.cols() != dim || dim == 0) throw DimensionMismatch("nullspace_steady_state: generator must be square");
    const auto classes = detail::closed_classes(generator);
    if (classes.size() != 1) {
        std::ostringstream msg;
        msg << "nullspace_steady_state: " << classes.size() << " closed classes, steady state not unique; components:";
        const std::size_t shown = std::min<std::size_t>(classes.size(), 8);
        for (std::size_t c = 0; c < shown; ++c) {
            msg << " {";
            for (std::size_t i = 0; i < classes[c].size() && i < 6; ++i) msg << (i ? "," : "") << classes[c][i];
            if (classes[c].size() > 6) msg << ",...";
            msg << "}";
        }
        if (classes.size() > shown) msg << " ...";
        throw NonUniqueSteadyState(msg.str());
    }
    const auto& states = classes.front();
    const Eigen::VectorXd pi = detail::gth_stationary(generator, states);
    SteadyState ss;
    ss.source = SteadySource::nullspace;
    ss.populations = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < states.size(); ++i) ss.populations(states[i]) = pi(static_cast<Eigen::Index>(i));
    ss.residual = stationarity_residual(generator, ss.populations);
    return ss;
}

inline double validate_steady(const SteadyState& a, const SteadyState& b) {
    if (a.size() != b.size()) throw DimensionMismatch("validate_steady: population vectors differ in size");
    if (a.size() == 0) return 0.0;
    return (a.populations - b.populations).cwiseAbs().maxCoeff();
}

// Gibbs when both baths share a temperature, null space otherwise.
inline SteadyState steady_state(const Eigensystem& es, const RateTable& rt, const BathSpec& bath) {
    if (bath.equal_temperatures()) {
        SteadyState ss = gibbs_state(es, bath.t_q);
        if (rt.pop_rate_matrix.rows() == es.size()) {
            ss.residual = stationarity_residual(rt.pop_rate_matrix, ss.populations);
        }
        return ss;
    }
    return nullspace_steady_state(rt.pop_rate_matrix);
}

}  // namespace qrb
