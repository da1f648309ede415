// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qrb/qrb.hpp"

using namespace qrb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass{false};
    std::string detail;
};

template <typename... Args>
std::string fmtn(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const BathSpec kBath = BathSpec::ohmic(1e-3, 10.0, 0.07);
const TruncationSpec kTr{100};

ModelParams random_model(std::mt19937& rng) {
    std::uniform_real_distribution<double> g(0.0, 1.5), r(0.0, 1.0), u(-0.4, 0.4);
    return ModelParams::aqrsm(g(rng), r(rng), u(rng));
}

int sign_changes(const std::vector<double>& v) {
    int changes = 0;
    int prev = 0;
    for (double x : v) {
        const int s = x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

// ---------------------------------------------------------------------------

Outcome jc_spectrum() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double g : {0.1, 0.2, 0.5}) {
        const Eigensystem es = solve_model(ModelParams::jcm(g), kTr);
        std::vector<double> ref{-0.5};
        for (int n = 0; n < kTr.n_tr; ++n) {
            ref.push_back(n + 0.5 + g * std::sqrt(n + 1.0));
            ref.push_back(n + 0.5 - g * std::sqrt(n + 1.0));
        }
        ref.push_back(kTr.n_tr + 0.5);
        std::sort(ref.begin(), ref.end());
        // Everything below the top doublet.
        const double top = kTr.n_tr - 0.5 - g * std::sqrt(static_cast<double>(kTr.n_tr));
        for (std::size_t k = 0; k < ref.size(); ++k) {
            if (ref[k] >= top - 1e-9) continue;
            worst = std::max(worst, std::abs(es.energies(static_cast<Eigen::Index>(k)) - ref[k]));
        }
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-10 && dt < 1.0, fmtn("max |E - E_JC| = %.3e (tol 1e-10), %.3f s (limit 1 s)", worst, dt)};
}

Outcome parity_selection() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20240501);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Eigensystem es = solve_model(random_model(rng), kTr);
        const DressedCouplings dc = dressed_couplings(es);
        for (Eigen::Index j = 0; j < es.size(); ++j) {
            for (Eigen::Index k = 0; k < es.size(); ++k) {
                if (es.parities[static_cast<std::size_t>(j)] != es.parities[static_cast<std::size_t>(k)]) continue;
                worst = std::max({worst, std::abs(dc.sigma_x(j, k)), std::abs(dc.position(j, k))});
            }
        }
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-10 && dt < 30.0,
            fmtn("50 draws, max same-parity element %.3e (tol 1e-10), %.2f s (limit 30 s)", worst, dt)};
}

Outcome steady_cross_validation() {
    const auto t0 = Clock::now();
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> t(0.05, 0.5);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = random_model(rng);
        const double temp = t(rng);
        const Eigensystem es = solve_model(p, kTr);
        const RateTable rt = build_rate_table(es, BathSpec::ohmic(1e-3, 10.0, temp), p);
        worst = std::max(worst, validate_steady(gibbs_state(es, temp), nullspace_steady_state(rt.pop_rate_matrix)));
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-8 && dt < 60.0,
            fmtn("20 draws, max |P_gibbs - P_null| = %.3e (tol 1e-8), %.2f s (limit 60 s)", worst, dt)};
}

Outcome detailed_balance() {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> t(0.05, 0.5);
    double worst = 0.0;
    long pairs = 0, skipped = 0;
    for (int i = 0; i < 5; ++i) {
        const ModelParams p = random_model(rng);
        const double temp = t(rng);
        const Eigensystem es = solve_model(p, kTr);
        const RateTable rt = build_rate_table(es, BathSpec::ohmic(1e-3, 10.0, temp), p);
        const Eigen::MatrixXd& m = rt.pop_rate_matrix;
        for (Eigen::Index k = 1; k < es.size(); ++k) {
            for (Eigen::Index j = 0; j < k; ++j) {
                if (m(j, k) == 0.0) continue;
                if (m(k, j) < 1e-290) {
                    ++skipped;  // upward rate below the normal double range
                    continue;
                }
                ++pairs;
                const double log_ratio =
                    std::log(m(j, k)) - (es.energies(k) - es.energies(j)) / temp - std::log(m(k, j));
                worst = std::max(worst, std::abs(std::expm1(log_ratio)));
            }
        }
    }
    return {worst < 1e-12, fmtn("%ld connected pairs, max relative violation %.3e (tol 1e-12); %ld pairs with "
                                "subnormal upward rate not comparable",
                                pairs, worst, skipped)};
}

Outcome thermal_limit() {
    const auto t0 = Clock::now();
    const BundleStatistics st(ModelParams::qrm(1e-4), BathSpec::ohmic(1e-3, 10.0, 0.2), kTr);
    const CorrelationResult g1 = st.gzero(1), g2 = st.gzero(2);
    const double dt = seconds_since(t0);
    const bool ok = g1.valid && g2.valid && std::abs(g1.value - 2.0) < 1e-3 && std::abs(g2.value - 6.0) < 1e-3;
    return {ok && dt < 5.0, fmtn("G1 = %.9f (2 +- 1e-3), G2 = %.9f (6 +- 1e-3), %.3f s (limit 5 s)", g1.value,
                                 g2.value, dt)};
}

Outcome zero_delay_consistency() {
    double worst = 0.0;
    for (double g : {0.25, 0.5}) {
        const BundleStatistics st(ModelParams::qrm(g), kBath, kTr);
        const TauGrid grid = TauGrid::log_spaced(kBath.alpha_c, 4);
        for (int m : {1, 2}) {
            const CorrelationSeries s = st.gtau(m, grid);
            const CorrelationResult r = st.gzero(m);
            worst = std::max(worst, std::abs(s.values.front() - r.value) / r.value);
        }
    }
    return {worst < 1e-8, fmtn("max relative |G(tau=0) - G(0)| = %.3e (tol 1e-8)", worst)};
}

Outcome long_delay() {
    const auto t0 = Clock::now();
    std::string detail;
    double worst = 0.0;
    for (const char* name : {"fig2a", "fig2b", "fig2c", "fig2d"}) {
        const SweepSpec s = preset(name);
        const BundleStatistics st(s.model, s.bath, s.truncation);
        const TauGrid grid = s.tau->grid();
        const PopulationPropagator prop = st.propagator();
        for (int m : {1, 2}) {
            const CorrelationSeries series = g2m_tau(st.detection(), st.steady(), st.rates(), prop, m, grid);
            const double dev = series.values.back() - 1.0;
            worst = std::max(worst, std::abs(dev));
            detail += fmtn("%s G%d-1=%+.2e; ", name, m, dev);
        }
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-3 && dt < 120.0,
            detail + fmtn("max %.3e at alpha*tau=5 (tol 1e-3), %.2f s (limit 120 s)", worst, dt)};
}

std::vector<double> cut_column(const SweepSpec& s, std::size_t col) {
    const ResultTable t = run_sweep(s);
    std::vector<double> v;
    for (const auto& row : t.rows) v.push_back(row.values[col] ? *row.values[col] : 0.0);
    return v;
}

Outcome fig1b_pattern() {
    const auto t0 = Clock::now();
    SweepSpec s = preset("fig1b");
    s.axes = {Axis{AxisKind::g, 0.05, 1.5, 300}};
    const ResultTable t = run_sweep(s);
    std::vector<double> g1, g2;
    for (const auto& row : t.rows) {
        g1.push_back(row.values[0] ? *row.values[0] : 0.0);
        g2.push_back(row.values[1] ? *row.values[1] : 0.0);
    }
    const int c1 = sign_changes(g1), c2 = sign_changes(g2);
    const double dt = seconds_since(t0);
    // Reported alongside: the same counts over the preset's own range.
    const SweepSpec full = preset("fig1b");
    const int f1 = sign_changes(cut_column(full, 0));
    return {c1 == 2 && c2 == 4 && dt < 120.0,
            fmtn("g in [0.05,1.5], 300 pts: log10 G1 sign changes = %d (want 2), log10 G2 = %d (want 4), %.2f s "
                 "(limit 120 s); over [%.2f,%.2f] G1 has %d",
                 c1, c2, dt, full.axes[0].min, full.axes[0].max, f1)};
}

Outcome fig2a_pattern() {
    const SweepSpec s = preset("fig2a");
    const BundleStatistics st(s.model, s.bath, s.truncation);
    const TauGrid grid = s.tau->grid();
    const CorrelationSeries g1 = st.gtau(1, grid), g2 = st.gtau(2, grid);
    double min1 = 1e300, min2 = 1e300;
    int below1 = 0, inside = 0;
    for (std::size_t i = 1; i < grid.points.size(); ++i) {
        const double at = grid.points[i] * grid.renormalization;
        if (at > 1.0 + 1e-12) break;
        ++inside;
        min1 = std::min(min1, g1.values[i]);
        min2 = std::min(min2, g2.values[i]);
        if (g1.values[i] <= 1.0) ++below1;
    }
    int extrema = 0;
    for (std::size_t i = 1; i + 1 < g1.values.size(); ++i) {
        const double a = g1.values[i - 1], b = g1.values[i], c = g1.values[i + 1];
        if ((b > a && b > c) || (b < a && b < c)) ++extrema;
    }
    const bool ok = min1 > 1.0 && min2 > 1.0 && extrema >= 3;
    return {ok, fmtn("alpha*tau in (0,1] (%d pts): min G1 = %.4f (%d pts <= 1), min G2 = %.4f, G1 local extrema = %d "
                     "(want >= 3)",
                     inside, min1, below1, min2, extrema)};
}

Outcome truncation_convergence() {
    double worst = 0.0;
    std::string detail;
    for (double g : {0.7, 1.2}) {
        const double a = BundleStatistics(ModelParams::qrm(g), kBath, TruncationSpec{100}).gzero(2).value;
        const double b = BundleStatistics(ModelParams::qrm(g), kBath, TruncationSpec{120}).gzero(2).value;
        const double rel = std::abs(a - b) / a;
        worst = std::max(worst, rel);
        detail += fmtn("g=%.1f: %.3e; ", g, rel);
    }
    return {worst < 1e-6, detail + "tol 1e-6"};
}

Outcome scale_invariance() {
    const std::complex<double> factor = 3.7e2 * std::polar(1.0, M_PI / 5.0);
    double worst = 0.0;
    for (double g : {0.1, 0.5, 1.2}) {
        const BundleStatistics st(ModelParams::qrm(g), kBath, kTr);
        const DetectionOperator scaled = st.detection().scaled(factor);
        for (int m : {1, 2}) {
            const double a = st.gzero(m).value;
            const double b = gmn_zero(scaled, st.steady(), m, 2).value;
            worst = std::max(worst, std::abs(a - b) / std::abs(a));
        }
        const TauGrid grid = TauGrid::log_spaced(kBath.alpha_c, 20);
        for (int m : {1, 2}) {
            const auto x = st.gtau(m, grid);
            const auto y = g2m_tau(scaled, st.steady(), st.rates(), m, grid);
            for (std::size_t i = 0; i < x.values.size(); ++i) {
                worst = std::max(worst, std::abs(x.values[i] - y.values[i]) / std::abs(x.values[i]));
            }
        }
    }
    return {worst < 1e-12, fmtn("max relative change %.3e (tol 1e-12)", worst)};
}

Outcome propagator_soundness() {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> t(0.05, 0.5);
    std::normal_distribution<double> nd;
    double trace_err = 0.0, herm_err = 0.0, fixed_err = 0.0;
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = random_model(rng);
        const BathSpec bath = BathSpec::ohmic(1e-3, 10.0, t(rng));
        const BundleStatistics st(p, bath, kTr);
        const PopulationPropagator prop = st.propagator();
        const Eigen::Index dim = st.eigensystem().size();
        Eigen::MatrixXcd b(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) b(r, c) = std::complex<double>(nd(rng), nd(rng));
        }
        b = b + b.adjoint().eval();
        b /= b.trace();
        const Eigen::MatrixXcd rho = st.steady().populations.cast<std::complex<double>>().asDiagonal();
        for (double at : {0.1, 1.0, 10.0}) {
            const double tau = at / bath.alpha_c;
            const Eigen::MatrixXcd out = propagate(st.rates(), prop, b, tau);
            trace_err = std::max(trace_err, std::abs(out.trace() - b.trace()));
            herm_err = std::max(herm_err, (out - out.adjoint()).cwiseAbs().maxCoeff());
            fixed_err = std::max(fixed_err, (propagate(st.rates(), prop, rho, tau) - rho).cwiseAbs().maxCoeff());
        }
    }
    return {trace_err < 1e-10 && herm_err < 1e-12 && fixed_err < 1e-12,
            fmtn("trace %.3e (tol 1e-10), hermiticity %.3e (tol 1e-12), stationarity %.3e (tol 1e-12)", trace_err,
                 herm_err, fixed_err)};
}

Outcome performance() {
    const auto p0 = Clock::now();
    const BundleStatistics st(ModelParams::qrm(0.5), kBath, kTr);
    const auto moments = st.moments(4);
    const CorrelationResult g1 = gmn_zero_from_moments(moments, 1, 2);
    const CorrelationResult g2 = gmn_zero_from_moments(moments, 2, 2);
    const double single = seconds_since(p0);

    const unsigned threads = default_threads();
    const SweepSpec map = preset("fig1a");
    const auto t0 = Clock::now();
    const ResultTable table = run_sweep(map, threads);
    const double elapsed = seconds_since(t0);
    std::size_t ok = 0;
    for (const auto& row : table.rows) ok += row.status == "ok" ? 1 : 0;
    const bool pass = g1.valid && g2.valid && single < 0.5 && elapsed < 600.0 && table.rows.size() == 101 * 101;
    return {pass, fmtn("single point %.3f s (limit 0.5 s); fig1a 101x101 map %.1f s on %u thread(s) (limit 600 s "
                       "on 4 cores), %zu/%zu rows ok",
                       single, elapsed, threads, ok, table.rows.size())};
}

Outcome crossing_oracle() {
    const double exact = 1.0 / (1.0 + std::sqrt(2.0));
    const CrossingResult jc = find_level_crossing(CrossingQuery{2, 3, 0.2, 0.6, 2000}, ModelParams::jcm(0.0), kTr);
    const double jc_err = std::abs(jc.g_c - exact);

    const CrossingResult aq =
        find_level_crossing(CrossingQuery{2, 3, 1.0, 2.0, 2000}, ModelParams::aqrm(0.0, 0.7), kTr);
    const SweepSpec cut = preset("fig3b");
    const ResultTable t = run_sweep(cut);
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& v = t.rows[i].values[1];
        if (v && *v > best_v) {
            best_v = *v;
            best = i;
        }
    }
    const double g_peak = t.rows[best].coords[0];
    const double step = (cut.axes[0].max - cut.axes[0].min) / (cut.axes[0].count - 1);
    const double off = std::abs(g_peak - aq.g_c);
    const bool pass = jc_err < 1e-6 && jc.true_crossing && aq.true_crossing && off <= step;
    return {pass, fmtn("JCM g_c = %.10f (|err| %.2e, tol 1e-6); AQRM r=0.7 g_c = %.6f (gap %.1e), fig3b G2 argmax "
                       "g = %.6f, offset %.5f (step %.5f)",
                       jc.g_c, jc_err, aq.g_c, aq.min_gap, g_peak, off, step)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"01", "jc_spectrum_oracle", jc_spectrum},
        {"02", "parity_selection", parity_selection},
        {"03", "steady_state_cross_validation", steady_cross_validation},
        {"04", "detailed_balance", detailed_balance},
        {"05", "thermal_decoupled_limit", thermal_limit},
        {"06", "dynamic_static_consistency", zero_delay_consistency},
        {"07", "long_delay_normalization", long_delay},
        {"08", "qrm_cut_transition_pattern", fig1b_pattern},
        {"09", "weak_coupling_delay_trace", fig2a_pattern},
        {"10", "truncation_convergence", truncation_convergence},
        {"11", "scale_invariance", scale_invariance},
        {"12", "propagator_soundness", propagator_soundness},
        {"13", "performance_envelope", performance},
        {"14", "crossing_finder_oracle", crossing_oracle},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d passed, %d failed\n", criteria.size(), static_cast<int>(criteria.size()) - failed,
                failed);
    return failed;
}
