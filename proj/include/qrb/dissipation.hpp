// dissipation.hpp - Ohmic baths, Bose occupations, dressed transition rates and
// the secular Liouvillian data (population generator + coherence constants).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "qrb/errors.hpp"
#include "qrb/model.hpp"

namespace qrb {

struct BathSpec {
    double alpha_q{1e-3};
    double alpha_c{1e-3};
    double omega_cut{10.0};
    double t_q{0.07};
    double t_c{0.07};

    static BathSpec ohmic(double alpha, double omega_cut, double temp) {
        return {alpha, alpha, omega_cut, temp, temp};
    }

    bool equal_temperatures() const { return t_q == t_c; }

    void validate() const {
        if (!(alpha_q >= 0.0) || !(alpha_c >= 0.0)) throw InvalidInput("BathSpec: alpha must be >= 0");
        if (!(omega_cut > 0.0)) throw InvalidInput("BathSpec: omega_cut must be > 0");
        if (!(t_q >= 0.0) || !(t_c >= 0.0)) throw InvalidInput("BathSpec: temperatures must be >= 0");
    }

    bool operator==(const BathSpec&) const = default;
};

enum class Channel { qubit, cavity };

inline double reference_frequency(Channel ch, const ModelParams& p) {
    const double ref = ch == Channel::qubit ? p.delta : p.omega0;
    if (!(ref > 0.0)) {
        throw InvalidDivisor(ch == Channel::qubit
                                 ? "qubit spectral density needs delta > 0"
                                 : "cavity spectral density needs omega0 > 0");
    }
    return ref;
}

inline double spectral_density(Channel ch, double omega, const BathSpec& bath, const ModelParams& p) {
    const double ref = reference_frequency(ch, p);
    const double alpha = ch == Channel::qubit ? bath.alpha_q : bath.alpha_c;
    return alpha * (omega / ref) * std::exp(-std::abs(omega) / bath.omega_cut);
}

inline double bose_occupation(double gap, double temp) {
    if (temp <= 0.0) return 0.0;
    return 1.0 / std::expm1(gap / temp);
}

inline constexpr double kSmallGap = 1e-9;

// Gamma*(1+n) and Gamma*n for one transition whose rate is strength*gap.
struct ThermalRates {
    double emission{0.0};    // downward, Gamma (1 + n)
    double absorption{0.0};  // upward, Gamma n
};

// Stable through gap -> 0: Gamma n = strength * T * x / expm1(x), x = gap / T,
// and Gamma (1 + n) = Gamma n + Gamma. Below kSmallGap the x -> 0 limit is used.
inline ThermalRates thermal_rates(double strength, double gap, double temp) {
    ThermalRates out;
    if (strength == 0.0) return out;
    if (temp <= 0.0) {
        out.emission = strength * gap;
        return out;
    }
    if (gap < kSmallGap) {
        out.absorption = strength * temp;
    } else {
        const double x = gap / temp;
        out.absorption = strength * temp * (x / std::expm1(x));
    }
    out.emission = out.absorption + strength * gap;
    return out;
}

struct RateTable {
    Eigen::VectorXd energies;
    // Entry (k, j), k > j: Gamma_u^{k,j} for the qubit / cavity bath. Zero elsewhere.
    Eigen::MatrixXd gamma_q;
    Eigen::MatrixXd gamma_c;
    // Gamma_u^{k,j} / Delta_{k,j}; keeps thermal products finite when the gap vanishes.
    Eigen::MatrixXd strength_q;
    Eigen::MatrixXd strength_c;
    // dP/dt = M P; column k holds the rates out of state k.
    Eigen::MatrixXd pop_rate_matrix;
    // lambda_{m,n} = -i Delta_{m,n} - gamma_{m,n}; the diagonal holds minus the out-rate.
    Eigen::MatrixXcd coherence_consts;
    // Distinct states closer than kSmallGap that are connected by a rate; the
    // secular form is not reliable there.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> near_degenerate_pairs;

    Eigen::Index size() const { return energies.size(); }
};

// Fills gamma/strength tables. Same-parity pairs are skipped outright.
inline RateTable transition_rates(const Eigensystem& es, const DressedCouplings& dc,
                                  const BathSpec& bath, const ModelParams& p) {
    bath.validate();
    const Eigen::Index dim = es.size();
    if (dc.sigma_x.rows() != dim || dc.position.rows() != dim) {
        throw DimensionMismatch("transition_rates: couplings do not match eigensystem");
    }
    const double cut = bath.omega_cut;
    const double pref_q = bath.alpha_q == 0.0 ? 0.0 : bath.alpha_q / reference_frequency(Channel::qubit, p);
    const double pref_c = bath.alpha_c == 0.0 ? 0.0 : bath.alpha_c / reference_frequency(Channel::cavity, p);

    RateTable rt;
    rt.energies = es.energies;
    rt.gamma_q = Eigen::MatrixXd::Zero(dim, dim);
    rt.gamma_c = Eigen::MatrixXd::Zero(dim, dim);
    rt.strength_q = Eigen::MatrixXd::Zero(dim, dim);
    rt.strength_c = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 1; k < dim; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (es.parities[static_cast<std::size_t>(k)] == es.parities[static_cast<std::size_t>(j)]) continue;
            const double gap = es.gap(k, j);
            const double damp = std::exp(-std::abs(gap) / cut);
            const double mq = dc.sigma_x(j, k);
            const double mc = dc.position(j, k);
            rt.strength_q(k, j) = pref_q * mq * mq * damp;
            rt.strength_c(k, j) = pref_c * mc * mc * damp;
            rt.gamma_q(k, j) = rt.strength_q(k, j) * gap;
            rt.gamma_c(k, j) = rt.strength_c(k, j) * gap;
            if (gap < kSmallGap && (rt.strength_q(k, j) > 0.0 || rt.strength_c(k, j) > 0.0)) {
                rt.near_degenerate_pairs.emplace_back(j, k);
            }
        }
    }
    return rt;
}

inline RateTable transition_rates(const Eigensystem& es, const BathSpec& bath, const ModelParams& p) {
    return transition_rates(es, dressed_couplings(es), bath, p);
}

inline Eigen::MatrixXd population_rate_matrix(const RateTable& rt, const BathSpec& bath) {
    const Eigen::Index dim = rt.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 1; k < dim; ++k) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const double sq = rt.strength_q(k, j);
            const double sc = rt.strength_c(k, j);
            if (sq == 0.0 && sc == 0.0) continue;
            const double gap = rt.energies(k) - rt.energies(j);
            const ThermalRates q = thermal_rates(sq, gap, bath.t_q);
            const ThermalRates c = thermal_rates(sc, gap, bath.t_c);
            m(j, k) = q.emission + c.emission;
            m(k, j) = q.absorption + c.absorption;
        }
    }
    for (Eigen::Index k = 0; k < dim; ++k) m(k, k) = -(m.col(k).sum() - m(k, k));
    return m;
}

inline Eigen::MatrixXcd coherence_constants(const Eigen::MatrixXd& pop_rate_matrix,
                                            const Eigen::VectorXd& energies) {
    const Eigen::Index dim = energies.size();
    Eigen::MatrixXcd lam(dim, dim);
    for (Eigen::Index m = 0; m < dim; ++m) {
        for (Eigen::Index n = 0; n < dim; ++n) {
            const double decay = -0.5 * (pop_rate_matrix(m, m) + pop_rate_matrix(n, n));
            const double freq = m == n ? 0.0 : energies(m) - energies(n);
            lam(m, n) = std::complex<double>(-decay, -freq);
        }
    }
    return lam;
}

inline Eigen::MatrixXcd coherence_constants(const RateTable& rt, const Eigensystem& es,
                                            const BathSpec& bath) {
    if (rt.pop_rate_matrix.rows() == rt.size()) return coherence_constants(rt.pop_rate_matrix, es.energies);
    return coherence_constants(population_rate_matrix(rt, bath), es.energies);
}

// Complete table: rates, population generator and coherence constants.
inline RateTable build_rate_table(const Eigensystem& es, const DressedCouplings& dc,
                                  const BathSpec& bath, const ModelParams& p) {
    RateTable rt = transition_rates(es, dc, bath, p);
    rt.pop_rate_matrix = population_rate_matrix(rt, bath);
    rt.coherence_consts = coherence_constants(rt.pop_rate_matrix, es.energies);
    return rt;
}

inline RateTable build_rate_table(const Eigensystem& es, const BathSpec& bath, const ModelParams& p) {
    return build_rate_table(es, dressed_couplings(es), bath, p);
}

}  // namespace qrb
