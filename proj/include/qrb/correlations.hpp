// correlations.hpp - dressed detection operator, bundle moments, zero-delay
// G_m^(n)(0), and delayed G_m^(2)(tau) from the quantum regression theorem.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "qrb/dissipation.hpp"
#include "qrb/errors.hpp"
#include "qrb/model.hpp"
#include "qrb/steady_state.hpp"

namespace qrb {

using cd = std::complex<double>;

// Denominator moments below this are numerically 0/0; results are flagged invalid.
inline constexpr double kFluxThreshold = 1e-250;

struct DetectionOperator {
    Eigen::MatrixXcd x_plus;  // strictly upper triangular in the dressed basis

    Eigen::MatrixXcd x_minus() const { return x_plus.adjoint(); }
    Eigen::Index size() const { return x_plus.rows(); }

    DetectionOperator scaled(cd factor) const { return {factor * x_plus}; }
};

// (X^+)_{j,k} = -i (E_k - E_j) <phi_j|(a + a^dagger)|phi_k> for k > j.
inline DetectionOperator detection_operator(const Eigensystem& es, const Eigen::MatrixXd& position_dressed) {
    const Eigen::Index dim = es.size();
    if (position_dressed.rows() != dim || position_dressed.cols() != dim) {
        throw DimensionMismatch("detection_operator: dressed position matrix has wrong size");
    }
    DetectionOperator det{Eigen::MatrixXcd::Zero(dim, dim)};
    for (Eigen::Index k = 1; k < dim; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (es.parities[static_cast<std::size_t>(j)] == es.parities[static_cast<std::size_t>(k)]) continue;
            det.x_plus(j, k) = cd(0.0, -es.gap(k, j) * position_dressed(j, k));
        }
    }
    return det;
}

inline DetectionOperator detection_operator(const Eigensystem& es) {
    return detection_operator(es, dressed_matrix(position_operator(es.truncation()), es));
}

// (X^+)^p. Exactly zero once p exceeds the nilpotency index D - 1.
inline Eigen::MatrixXcd detection_power(const DetectionOperator& det, int p) {
    if (p < 0) throw InvalidInput("detection_power: negative power");
    const Eigen::Index dim = det.size();
    if (p == 0) return Eigen::MatrixXcd::Identity(dim, dim);
    if (p > dim - 1) return Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd y = det.x_plus;
    for (int k = 1; k < p; ++k) {
        Eigen::MatrixXcd next = det.x_plus.triangularView<Eigen::StrictlyUpper>() * y;
        y.swap(next);
    }
    return y;
}

namespace detail {

inline std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& pops) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pops.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return pops(a) > pops(b); });
    return order;
}

// sum_n P_n ||Y e_n||^2, largest populations first.
inline double weighted_column_norms(const Eigen::MatrixXcd& y, const Eigen::VectorXd& pops,
                                    const std::vector<Eigen::Index>& order) {
    double acc = 0.0;
    for (Eigen::Index n : order) {
        const double w = pops(n);
        if (w <= 0.0) continue;
        acc += w * y.col(n).squaredNorm();
    }
    return acc;
}

}  // namespace detail

// <(X^-)^p (X^+)^p>_ss for one order.
inline double bundle_moment(const DetectionOperator& det, const SteadyState& ss, int p) {
    if (p < 1) throw InvalidInput("bundle_moment: order must be >= 1");
    if (ss.size() != det.size()) throw DimensionMismatch("bundle_moment: steady state size mismatch");
    const auto order = detail::descending_order(ss.populations);
    return detail::weighted_column_norms(detection_power(det, p), ss.populations, order);
}

// Moments for orders 0..max_order (order 0 is the trace, 1) sharing one power chain.
inline std::vector<double> bundle_moments(const DetectionOperator& det, const SteadyState& ss, int max_order) {
    if (max_order < 0) throw InvalidInput("bundle_moments: negative order");
    if (ss.size() != det.size()) throw DimensionMismatch("bundle_moments: steady state size mismatch");
    const auto order = detail::descending_order(ss.populations);
    std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
    out[0] = 1.0;
    const Eigen::Index dim = det.size();
    Eigen::MatrixXcd y = det.x_plus;
    for (int p = 1; p <= max_order; ++p) {
        if (p > dim - 1) break;
        if (p > 1) {
            Eigen::MatrixXcd next = det.x_plus.triangularView<Eigen::StrictlyUpper>() * y;
            y.swap(next);
        }
        out[static_cast<std::size_t>(p)] = detail::weighted_column_norms(y, ss.populations, order);
    }
    return out;
}

struct CorrelationResult {
    double value{std::numeric_limits<double>::quiet_NaN()};
    int m{1};
    int n{2};
    double flux_moment{0.0};  // <(X^-)^m (X^+)^m>_ss
    bool valid{false};
};

// numerator / denominator^n, or invalid when the quotient is not representable.
inline CorrelationResult moment_ratio(double numerator, double denominator, int m, int n) {
    CorrelationResult res;
    res.m = m;
    res.n = n;
    res.flux_moment = denominator;
    if (!(denominator >= kFluxThreshold)) return res;
    if (numerator == 0.0 &&
        n * std::log(denominator) < std::log(std::numeric_limits<double>::min()) + 36.0) {
        // Numerator may simply have underflowed.
        return res;
    }
    double v = numerator;
    for (int k = 0; k < n; ++k) v /= denominator;
    res.value = v;
    res.valid = std::isfinite(v);
    return res;
}

inline CorrelationResult gmn_zero_from_moments(const std::vector<double>& moments, int m, int n) {
    if (m < 1 || n < 2) throw InvalidInput("gmn_zero: need m >= 1 and n >= 2");
    const auto hi = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    if (moments.size() <= hi) throw InvalidInput("gmn_zero: moment table too short");
    return moment_ratio(moments[hi], moments[static_cast<std::size_t>(m)], m, n);
}

inline CorrelationResult gmn_zero(const DetectionOperator& det, const SteadyState& ss, int m, int n) {
    if (m < 1 || n < 2) throw InvalidInput("gmn_zero: need m >= 1 and n >= 2");
    return gmn_zero_from_moments(bundle_moments(det, ss, m * n), m, n);
}

inline const CorrelationResult& require_emission(const CorrelationResult& r) {
    if (!r.valid) {
        throw NoEmission("no emission: bundle flux moment " + std::to_string(r.flux_moment) +
                         " below threshold for m=" + std::to_string(r.m));
    }
    return r;
}

// ------------------------------ propagation ---------------------------------

// exp(M tau) acting on population vectors, by uniformization: with q above
// every out-rate, J = I + M/q is entrywise nonnegative and
// exp(M tau) = sum_k Poisson(k; q tau) J^k. Nonnegative inputs stay
// nonnegative term by term, so tiny excited-state populations keep their
// relative accuracy even when the generator is extremely stiff.
class PopulationPropagator {
public:
    PopulationPropagator() = default;

    explicit PopulationPropagator(const Eigen::MatrixXd& generator) {
        const Eigen::Index dim = generator.rows();
        if (generator.cols() != dim) throw DimensionMismatch("PopulationPropagator: generator must be square");
        double max_out = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) max_out = std::max(max_out, -generator(k, k));
        rate_ = 1.05 * max_out;
        if (rate_ > 0.0) {
            jump_ = generator / rate_;
            jump_.diagonal().array() += 1.0;
        } else {
            jump_ = Eigen::MatrixXd::Identity(dim, dim);
        }
    }

    double uniformization_rate() const { return rate_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& p, double tau) const {
        if (tau < 0.0) throw InvalidInput("PopulationPropagator: tau must be >= 0");
        if (p.size() != jump_.rows()) throw DimensionMismatch("PopulationPropagator: vector size mismatch");
        if (tau == 0.0 || rate_ == 0.0) return p;
        const double total = rate_ * tau;
        const int chunks = std::max(1, static_cast<int>(std::ceil(total / kChunk)));
        const double x = total / chunks;
        Eigen::VectorXd cur = p;
        for (int c = 0; c < chunks; ++c) cur = poisson_step(cur, x);
        return cur;
    }

private:
    static constexpr double kChunk = 30.0;

    Eigen::VectorXd poisson_step(const Eigen::VectorXd& p, double x) const {
        double w = std::exp(-x);
        Eigen::VectorXd v = p;
        Eigen::VectorXd acc = w * v;
        double wmax = w;
        for (int k = 1; k < 100000; ++k) {
            v = jump_ * v;
            w *= x / k;
            acc.noalias() += w * v;
            wmax = std::max(wmax, w);
            if (k > x && w < 1e-18 * wmax) break;
        }
        return acc;
    }

    Eigen::MatrixXd jump_;
    double rate_{0.0};
};

// e^{L tau}[B] under the secular dressed master equation: populations through
// the rate generator, each coherence (m,n) scaled by e^{lambda_{m,n} tau}.
inline Eigen::MatrixXcd propagate(const RateTable& rt, const PopulationPropagator& prop,
                                  const Eigen::MatrixXcd& b, double tau) {
    const Eigen::Index dim = rt.size();
    if (b.rows() != dim || b.cols() != dim) throw DimensionMismatch("propagate: operator size mismatch");
    if (tau < 0.0) throw InvalidInput("propagate: tau must be >= 0");
    if (tau == 0.0) return b;
    Eigen::MatrixXcd out(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        for (Eigen::Index m = 0; m < dim; ++m) {
            if (m != n) out(m, n) = b(m, n) * std::exp(rt.coherence_consts(m, n) * tau);
        }
    }
    const Eigen::VectorXd re = prop.apply(b.diagonal().real(), tau);
    const Eigen::VectorXd im = prop.apply(b.diagonal().imag(), tau);
    for (Eigen::Index n = 0; n < dim; ++n) out(n, n) = cd(re(n), im(n));
    return out;
}

inline Eigen::MatrixXcd propagate(const RateTable& rt, const Eigen::MatrixXcd& b, double tau) {
    return propagate(rt, PopulationPropagator(rt.pop_rate_matrix), b, tau);
}

// ------------------------------ delayed G ------------------------------------

struct TauGrid {
    std::vector<double> points;  // tau, ascending
    double renormalization{1e-3};  // alpha for the alpha*tau axis

    void validate() const {
        if (points.empty()) throw InvalidInput("TauGrid: no points");
        if (points.front() < 0.0) throw InvalidInput("TauGrid: negative delay");
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (!(points[i] > points[i - 1])) throw InvalidInput("TauGrid: points must be strictly increasing");
        }
        if (!(renormalization > 0.0)) throw InvalidInput("TauGrid: renormalization must be > 0");
    }

    // tau = 0 followed by `count` log-spaced points with alpha*tau in [lo, hi].
    static TauGrid log_spaced(double alpha, std::size_t count = 200, double lo = 1e-3, double hi = 5.0) {
        if (count < 2 || !(lo > 0.0) || !(hi > lo) || !(alpha > 0.0)) {
            throw InvalidInput("TauGrid::log_spaced: bad range");
        }
        TauGrid grid;
        grid.renormalization = alpha;
        grid.points.reserve(count + 1);
        grid.points.push_back(0.0);
        const double l0 = std::log10(lo);
        const double l1 = std::log10(hi);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1);
            grid.points.push_back(std::pow(10.0, t) / alpha);
        }
        return grid;
    }

    bool operator==(const TauGrid&) const = default;
};

struct CorrelationSeries {
    std::vector<double> tau;
    std::vector<double> values;
    int m{1};
    double flux_moment{0.0};
    bool valid{false};
};

// G_m^(2)(tau) = Tr{A e^{L tau}[C]} / <A>^2 with Y = (X^+)^m, A = Y^dagger Y and
// C = Y rho_ss Y^dagger.
inline CorrelationSeries g2m_tau(const DetectionOperator& det, const SteadyState& ss, const RateTable& rt,
                                 const PopulationPropagator& prop, int m, const TauGrid& grid) {
    if (m < 1) throw InvalidInput("g2m_tau: bundle size must be >= 1");
    grid.validate();
    const Eigen::Index dim = det.size();
    if (ss.size() != dim || rt.size() != dim) throw DimensionMismatch("g2m_tau: size mismatch");

    CorrelationSeries out;
    out.m = m;
    out.tau = grid.points;
    const Eigen::MatrixXcd y = detection_power(det, m);
    const auto order = detail::descending_order(ss.populations);
    out.flux_moment = detail::weighted_column_norms(y, ss.populations, order);
    if (!(out.flux_moment >= kFluxThreshold)) {
        out.values.assign(grid.points.size(), std::numeric_limits<double>::quiet_NaN());
        return out;
    }

    const Eigen::MatrixXcd a = y.adjoint() * y;
    const Eigen::MatrixXcd c = y * ss.populations.asDiagonal() * y.adjoint();
    const Eigen::VectorXd a_diag = a.diagonal().real();

    struct Term {
        cd weight;
        cd lambda;
    };
    std::vector<Term> terms;
    for (Eigen::Index k = 0; k < dim; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (j == k) continue;
            const cd w = a(k, j) * c(j, k);
            if (w != cd(0.0, 0.0)) terms.push_back({w, rt.coherence_consts(j, k)});
        }
    }

    Eigen::VectorXd pops = c.diagonal().real();
    double prev = 0.0;
    out.values.reserve(grid.points.size());
    for (double tau : grid.points) {
        pops = prop.apply(pops, tau - prev);
        prev = tau;
        double num = a_diag.dot(pops);
        cd coh(0.0, 0.0);
        for (const auto& t : terms) coh += t.weight * std::exp(t.lambda * tau);
        num += coh.real();
        out.values.push_back(num / out.flux_moment / out.flux_moment);
    }
    out.valid = true;
    return out;
}

inline CorrelationSeries g2m_tau(const DetectionOperator& det, const SteadyState& ss, const RateTable& rt, int m,
                                 const TauGrid& grid) {
    return g2m_tau(det, ss, rt, PopulationPropagator(rt.pop_rate_matrix), m, grid);
}

// ------------------------------ regimes --------------------------------------

enum class Regime {
    laser_type_continuous,    // G1 > 1, G2 > 1
    gun_type_two_photon,      // G1 > 1, G2 < 1
    strong_blockade,          // G1 < 1, G2 < 1
    two_photon_bundle_laser,  // G1 < 1, G2 > 1
    boundary,                 // either value exactly 1
};

inline Regime classify_regime(double g1, double g2) {
    if (!std::isfinite(g1) || !std::isfinite(g2) || g1 < 0.0 || g2 < 0.0) {
        throw InvalidInput("classify_regime: correlation values must be finite and nonnegative");
    }
    if (g1 == 1.0 || g2 == 1.0) return Regime::boundary;
    if (g1 > 1.0) return g2 > 1.0 ? Regime::laser_type_continuous : Regime::gun_type_two_photon;
    return g2 > 1.0 ? Regime::two_photon_bundle_laser : Regime::strong_blockade;
}

inline Regime classify_regime(const CorrelationResult& g1, const CorrelationResult& g2) {
    if (!g1.valid || !g2.valid) throw InvalidInput("classify_regime: invalid correlation result");
    return classify_regime(g1.value, g2.value);
}

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::laser_type_continuous: return "laser-type-continuous";
        case Regime::gun_type_two_photon: return "gun-type-two-photon";
        case Regime::strong_blockade: return "strong-blockade";
        case Regime::two_photon_bundle_laser: return "two-photon-bundle-laser";
        case Regime::boundary: return "boundary";
    }
    return "unknown";
}

// ------------------------------ per-point pipeline ----------------------------

// Everything needed for correlation queries at one parameter point. Immutable
// after construction; safe to share read-only between threads.
class BundleStatistics {
public:
    BundleStatistics(const ModelParams& model, const BathSpec& bath, const TruncationSpec& tr)
        : model_(model), bath_(bath) {
        model.validate();
        bath.validate();
        tr.validate();
        es_ = solve_model(model, tr);
        const DressedCouplings dc = dressed_couplings(es_);
        rt_ = build_rate_table(es_, dc, bath, model);
        ss_ = steady_state(es_, rt_, bath);
        det_ = detection_operator(es_, dc.position);
    }

    const ModelParams& model() const { return model_; }
    const BathSpec& bath() const { return bath_; }
    const Eigensystem& eigensystem() const { return es_; }
    const RateTable& rates() const { return rt_; }
    const SteadyState& steady() const { return ss_; }
    const DetectionOperator& detection() const { return det_; }

    std::vector<double> moments(int max_order) const { return bundle_moments(det_, ss_, max_order); }

    CorrelationResult gzero(int m, int n = 2) const { return gmn_zero(det_, ss_, m, n); }

    CorrelationSeries gtau(int m, const TauGrid& grid) const {
        return g2m_tau(det_, ss_, rt_, propagator(), m, grid);
    }

    PopulationPropagator propagator() const { return PopulationPropagator(rt_.pop_rate_matrix); }

private:
    ModelParams model_;
    BathSpec bath_;
    Eigensystem es_;
    RateTable rt_;
    SteadyState ss_;
    DetectionOperator det_;
};

}  // namespace qrb
