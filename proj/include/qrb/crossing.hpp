// crossing.hpp - locate excited-state level crossings along the coupling axis.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "qrb/errors.hpp"
#include "qrb/model.hpp"

namespace qrb {

struct CrossingQuery {
    int level_low{2};   // excited-state index, 1 = first excited
    int level_high{3};
    double g_min{0.0};
    double g_max{2.0};
    int resolution{2000};

    void validate() const {
        if (level_low < 1 || level_high <= level_low) {
            throw InvalidInput("CrossingQuery: need 1 <= level_low < level_high");
        }
        if (!(g_max > g_min) || g_min < 0.0) throw InvalidInput("CrossingQuery: need 0 <= g_min < g_max");
        if (resolution < 10) throw InvalidInput("CrossingQuery: resolution must be >= 10");
    }

    bool operator==(const CrossingQuery&) const = default;
};

struct CrossingResult {
    double g_c{0.0};
    double min_gap{0.0};
    bool true_crossing{false};  // gap closes below kTrueCrossingGap
};

inline constexpr double kTrueCrossingGap = 1e-8;

namespace detail {

inline double level_gap(const ModelParams& base, const TruncationSpec& tr, double g, int lo, int hi) {
    ModelParams p = base;
    p.g = g;
    const Eigensystem es = diagonalize(hamiltonian(p, tr), parity_operator(tr), false);
    return es.energies(hi) - es.energies(lo);
}

// d(E_hi - E_lo)/dg by Hellmann-Feynman.
inline double gap_slope(const ModelParams& base, const TruncationSpec& tr, const Eigen::MatrixXd& dh, double g,
                        int lo, int hi) {
    ModelParams p = base;
    p.g = g;
    const Eigensystem es = solve_model(p, tr);
    const Eigen::VectorXd vh = es.vectors.col(hi);
    const Eigen::VectorXd vl = es.vectors.col(lo);
    return vh.dot(dh * vh) - vl.dot(dh * vl);
}

inline CrossingResult refine_minimum(const ModelParams& base, const TruncationSpec& tr, double left, double right,
                                     int lo, int hi) {
    const Eigen::MatrixXd dh = interaction_operator(base, tr);
    double sl = gap_slope(base, tr, dh, left, lo, hi);
    double sr = gap_slope(base, tr, dh, right, lo, hi);
    if (sl < 0.0 && sr > 0.0) {
        for (int it = 0; it < 200 && right - left > 1e-14 * std::max(1.0, right); ++it) {
            const double mid = 0.5 * (left + right);
            const double sm = gap_slope(base, tr, dh, mid, lo, hi);
            if (sm < 0.0) {
                left = mid;
            } else {
                right = mid;
            }
        }
    } else {
        // No slope sign change inside the bracket: golden-section on the gap itself.
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = left, b = right;
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = level_gap(base, tr, c, lo, hi), fd = level_gap(base, tr, d, lo, hi);
        for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - phi * (b - a);
                fc = level_gap(base, tr, c, lo, hi);
            } else {
                a = c; c = d; fc = fd;
                d = a + phi * (b - a);
                fd = level_gap(base, tr, d, lo, hi);
            }
        }
        left = a;
        right = b;
    }
    CrossingResult res;
    res.g_c = 0.5 * (left + right);
    res.min_gap = level_gap(base, tr, res.g_c, lo, hi);
    res.true_crossing = res.min_gap < kTrueCrossingGap;
    return res;
}

inline std::vector<double> scan_gaps(const CrossingQuery& q, const ModelParams& base, const TruncationSpec& tr,
                                     std::vector<double>& gs) {
    const Eigen::Index dim = tr.dim();
    if (q.level_high >= dim) throw InvalidInput("CrossingQuery: level index exceeds truncated dimension");
    gs.resize(static_cast<std::size_t>(q.resolution));
    std::vector<double> gaps(gs.size());
    for (int i = 0; i < q.resolution; ++i) {
        gs[static_cast<std::size_t>(i)] = q.g_min + (q.g_max - q.g_min) * i / (q.resolution - 1);
        gaps[static_cast<std::size_t>(i)] =
            level_gap(base, tr, gs[static_cast<std::size_t>(i)], q.level_low, q.level_high);
    }
    return gaps;
}

}  // namespace detail

// Global minimum of E_high - E_low over the scan, refined inside the
// neighbouring grid cells. A minimum on the range boundary means the gap has no
// interior minimum and NoCrossingFound is thrown.
inline CrossingResult find_level_crossing(const CrossingQuery& q, const ModelParams& base, const TruncationSpec& tr) {
    q.validate();
    tr.validate();
    base.validate();
    std::vector<double> gs;
    const std::vector<double> gaps = detail::scan_gaps(q, base, tr, gs);
    std::size_t best = 0;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        if (gaps[i] < gaps[best]) best = i;
    }
    if (best == 0 || best + 1 == gaps.size()) {
        throw NoCrossingFound("no level crossing between levels " + std::to_string(q.level_low) + " and " +
                              std::to_string(q.level_high) + " for g in [" + std::to_string(q.g_min) + ", " +
                              std::to_string(q.g_max) + "]: gap is smallest at the range boundary");
    }
    return detail::refine_minimum(base, tr, gs[best - 1], gs[best + 1], q.level_low, q.level_high);
}

// Every interior local minimum of the gap that closes to a true crossing.
inline std::vector<CrossingResult> find_level_crossings(const CrossingQuery& q, const ModelParams& base,
                                                        const TruncationSpec& tr) {
    q.validate();
    tr.validate();
    base.validate();
    std::vector<double> gs;
    const std::vector<double> gaps = detail::scan_gaps(q, base, tr, gs);
    std::vector<CrossingResult> out;
    for (std::size_t i = 1; i + 1 < gaps.size(); ++i) {
        if (gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1]) {
            CrossingResult r = detail::refine_minimum(base, tr, gs[i - 1], gs[i + 1], q.level_low, q.level_high);
            if (r.true_crossing) out.push_back(r);
        }
    }
    return out;
}

}  // namespace qrb
