// sweep.hpp - parameter sweeps over the Rabi family and the figure presets.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qrb/correlations.hpp"
#include "qrb/crossing.hpp"
#include "qrb/errors.hpp"
#include "qrb/model.hpp"

namespace qrb {

inline constexpr const char* kVersion = "0.1.0";

enum class AxisKind { g, r, u, t };

inline std::string to_string(AxisKind k) {
    switch (k) {
        case AxisKind::g: return "g";
        case AxisKind::r: return "r";
        case AxisKind::u: return "U";
        case AxisKind::t: return "T";
    }
    return "?";
}

inline AxisKind parse_axis_kind(const std::string& s) {
    if (s == "g") return AxisKind::g;
    if (s == "r") return AxisKind::r;
    if (s == "U" || s == "u") return AxisKind::u;
    if (s == "T" || s == "t") return AxisKind::t;
    throw InvalidInput("unknown axis '" + s + "' (expected g, r, U or T)");
}

struct Axis {
    AxisKind kind{AxisKind::g};
    double min{0.0};
    double max{1.0};
    int count{2};

    double value(int i) const {
        if (i == count - 1) return max;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }

    bool operator==(const Axis&) const = default;
};

enum class QuantityKind { g1_zero, g2_zero, gm_zero, g2m_tau };

struct Quantity {
    QuantityKind kind{QuantityKind::g2_zero};
    int m{2};

    static Quantity g1_zero() { return {QuantityKind::g1_zero, 1}; }
    static Quantity g2_zero() { return {QuantityKind::g2_zero, 2}; }
    static Quantity gm_zero(int m) { return {QuantityKind::gm_zero, m}; }
    static Quantity g2m_tau(int m) { return {QuantityKind::g2m_tau, m}; }

    bool delayed() const { return kind == QuantityKind::g2m_tau; }

    // Zero-delay quantities are reported as log10, delayed ones linearly.
    std::string column() const {
        if (delayed()) return "G" + std::to_string(m) + "_2_tau";
        return "log10_G" + std::to_string(m) + "_2_0";
    }

    std::string name() const {
        switch (kind) {
            case QuantityKind::g1_zero: return "g1_zero";
            case QuantityKind::g2_zero: return "g2_zero";
            case QuantityKind::gm_zero: return "gm_zero(" + std::to_string(m) + ")";
            case QuantityKind::g2m_tau: return "g2m_tau(" + std::to_string(m) + ")";
        }
        return "?";
    }

    bool operator==(const Quantity&) const = default;
};

inline Quantity parse_quantity(const std::string& raw) {
    std::string s;
    for (char c : raw) {
        if (c != ' ' && c != '\t') s.push_back(c);
    }
    if (s == "g1_zero") return Quantity::g1_zero();
    if (s == "g2_zero") return Quantity::g2_zero();
    auto with_m = [&](const std::string& prefix) -> std::optional<int> {
        if (s.rfind(prefix + "(", 0) != 0 || s.back() != ')') return std::nullopt;
        const std::string inner = s.substr(prefix.size() + 1, s.size() - prefix.size() - 2);
        try {
            std::size_t used = 0;
            const int m = std::stoi(inner, &used);
            if (used != inner.size()) return std::nullopt;
            return m;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    if (auto m = with_m("gm_zero")) {
        if (*m < 1) throw InvalidInput("gm_zero: bundle size must be >= 1");
        return Quantity::gm_zero(*m);
    }
    if (auto m = with_m("g2m_tau")) {
        if (*m < 1) throw InvalidInput("g2m_tau: bundle size must be >= 1");
        return Quantity::g2m_tau(*m);
    }
    throw InvalidInput("unknown quantity '" + raw + "'");
}

// tau = 0 plus `count` log-spaced points over alpha*tau in [lo, hi].
struct TauSpec {
    double alpha{1e-3};
    int count{200};
    double lo{1e-3};
    double hi{5.0};

    TauGrid grid() const { return TauGrid::log_spaced(alpha, static_cast<std::size_t>(count), lo, hi); }

    bool operator==(const TauSpec&) const = default;
};

// Trace of the (level_low, level_high) crossing along the secondary axis of a map.
struct CrossingOverlay {
    CrossingQuery query;

    bool operator==(const CrossingOverlay&) const = default;
};

struct SweepSpec {
    std::string name{"custom"};
    ModelParams model;
    BathSpec bath;
    TruncationSpec truncation;
    std::vector<Axis> axes;  // axes[0] is the outer (slowest) axis
    std::vector<Quantity> quantities;
    std::optional<TauSpec> tau;
    std::optional<CrossingOverlay> crossing;
    std::vector<std::string> assumptions;

    bool has_delayed() const {
        return std::any_of(quantities.begin(), quantities.end(), [](const Quantity& q) { return q.delayed(); });
    }

    std::size_t point_count() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
        return n;
    }

    void validate() const {
        model.validate();
        bath.validate();
        truncation.validate();
        if (axes.size() > 2) throw InvalidInput("SweepSpec: at most two axes");
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const auto& a = axes[i];
            if (a.count < 2) throw InvalidInput("SweepSpec: axis " + to_string(a.kind) + " needs count >= 2");
            if (!(a.min < a.max)) throw InvalidInput("SweepSpec: axis " + to_string(a.kind) + " needs min < max");
            for (std::size_t j = 0; j < i; ++j) {
                if (axes[j].kind == a.kind) throw InvalidInput("SweepSpec: duplicate axis " + to_string(a.kind));
            }
            if (a.kind == AxisKind::g && a.min < 0.0) throw InvalidInput("SweepSpec: g axis must be >= 0");
            if (a.kind == AxisKind::r && a.min < 0.0) throw InvalidInput("SweepSpec: r axis must be >= 0");
            if (a.kind == AxisKind::t && a.min < 0.0) throw InvalidInput("SweepSpec: T axis must be >= 0");
        }
        if (quantities.empty()) throw InvalidInput("SweepSpec: quantities list is empty");
        for (const auto& q : quantities) {
            if (q.m < 1) throw InvalidInput("SweepSpec: bundle size must be >= 1");
        }
        if (has_delayed()) {
            if (!tau) throw InvalidInput("SweepSpec: delayed quantity requested without a tau grid");
            tau->grid().validate();
        }
        if (crossing) crossing->query.validate();
    }

    bool operator==(const SweepSpec&) const = default;
};

inline void apply_axis(ModelParams& model, BathSpec& bath, AxisKind kind, double v) {
    switch (kind) {
        case AxisKind::g: model.g = v; break;
        case AxisKind::r: model.r = v; break;
        case AxisKind::u: model.u = v; break;
        case AxisKind::t: bath.t_q = v; bath.t_c = v; break;
    }
}

// ------------------------------ result table ---------------------------------

struct ResultRow {
    std::vector<double> coords;               // axis values, then tau and alpha*tau when delayed
    std::vector<std::optional<double>> values;  // one per quantity; empty when not available
    std::string status{"ok"};
};

struct ResultTable {
    std::vector<std::string> coord_columns;
    std::vector<std::string> value_columns;
    std::vector<ResultRow> rows;
};

namespace detail {

inline std::string sanitize_status(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    }
    return s;
}

inline std::vector<ResultRow> evaluate_point(const SweepSpec& spec, const std::vector<double>& axis_values) {
    ModelParams model = spec.model;
    BathSpec bath = spec.bath;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) apply_axis(model, bath, spec.axes[a].kind, axis_values[a]);

    const std::size_t nq = spec.quantities.size();
    std::optional<TauGrid> grid;
    if (spec.has_delayed()) grid = spec.tau->grid();
    const std::size_t nrows = grid ? grid->points.size() : 1;

    std::vector<ResultRow> rows(nrows);
    for (std::size_t i = 0; i < nrows; ++i) {
        rows[i].coords = axis_values;
        if (grid) {
            rows[i].coords.push_back(grid->points[i]);
            rows[i].coords.push_back(grid->points[i] * grid->renormalization);
        }
        rows[i].values.assign(nq, std::nullopt);
    }

    try {
        const BundleStatistics stats(model, bath, spec.truncation);
        int max_order = 0;
        for (const auto& q : spec.quantities) {
            if (!q.delayed()) max_order = std::max(max_order, 2 * q.m);
        }
        const std::vector<double> moments = max_order > 0 ? stats.moments(max_order) : std::vector<double>{};
        bool missing = false;
        for (std::size_t k = 0; k < nq; ++k) {
            const Quantity& q = spec.quantities[k];
            if (!q.delayed()) {
                const CorrelationResult r = gmn_zero_from_moments(moments, q.m, 2);
                if (r.valid && r.value > 0.0) {
                    for (auto& row : rows) row.values[k] = std::log10(r.value);
                } else {
                    missing = true;
                }
                continue;
            }
            const CorrelationSeries s = stats.gtau(q.m, *grid);
            if (!s.valid) {
                missing = true;
                continue;
            }
            for (std::size_t i = 0; i < nrows; ++i) rows[i].values[k] = s.values[i];
        }
        if (missing) {
            for (auto& row : rows) row.status = "no_emission";
        }
    } catch (const std::exception& e) {
        for (auto& row : rows) {
            row.values.assign(nq, std::nullopt);
            row.status = sanitize_status(std::string("error: ") + e.what());
        }
    }
    return rows;
}

// Runs job(i) for i in [0, n) on `threads` workers.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) job(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

inline unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// One row per grid point (times tau points for delayed quantities), outer axis
// major. Failures stay confined to their own rows.
inline ResultTable run_sweep(const SweepSpec& spec, unsigned threads = default_threads()) {
    spec.validate();
    ResultTable table;
    for (const auto& a : spec.axes) table.coord_columns.push_back(to_string(a.kind));
    if (spec.has_delayed()) {
        table.coord_columns.push_back("tau");
        table.coord_columns.push_back("alpha_tau");
    }
    for (const auto& q : spec.quantities) table.value_columns.push_back(q.column());

    const std::size_t npts = spec.point_count();
    std::vector<std::vector<double>> points(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        std::size_t rem = i;
        std::vector<double> v(spec.axes.size());
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const auto c = static_cast<std::size_t>(spec.axes[a].count);
            v[a] = spec.axes[a].value(static_cast<int>(rem % c));
            rem /= c;
        }
        points[i] = std::move(v);
    }

    std::vector<std::vector<ResultRow>> results(npts);
    detail::parallel_for(npts, threads, [&](std::size_t i) { results[i] = detail::evaluate_point(spec, points[i]); });
    for (auto& block : results) {
        for (auto& row : block) table.rows.push_back(std::move(row));
    }
    return table;
}

// Crossing trace along the non-g axis of a two-axis map.
struct CrossingTraceRow {
    double secondary{0.0};
    std::vector<CrossingResult> crossings;
    std::string status{"ok"};
};

inline std::vector<CrossingTraceRow> trace_crossings(const SweepSpec& spec, unsigned threads = default_threads()) {
    if (!spec.crossing) throw InvalidInput("trace_crossings: spec has no crossing overlay");
    const Axis* secondary = nullptr;
    for (const auto& a : spec.axes) {
        if (a.kind == AxisKind::r || a.kind == AxisKind::u) secondary = &a;
    }
    if (secondary == nullptr) throw InvalidInput("trace_crossings: needs an r or U axis");
    std::vector<CrossingTraceRow> rows(static_cast<std::size_t>(secondary->count));
    detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
        ModelParams model = spec.model;
        BathSpec bath = spec.bath;
        rows[i].secondary = secondary->value(static_cast<int>(i));
        apply_axis(model, bath, secondary->kind, rows[i].secondary);
        try {
            rows[i].crossings = find_level_crossings(spec.crossing->query, model, spec.truncation);
            if (rows[i].crossings.empty()) rows[i].status = "no_crossing";
        } catch (const std::exception& e) {
            rows[i].status = detail::sanitize_status(std::string("error: ") + e.what());
        }
    });
    return rows;
}

// ------------------------------ presets -----------------------------------------

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig1a", "fig1b", "fig2a", "fig2b", "fig2c", "fig2d",
                                                   "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig5a",
                                                   "fig5b", "fig6a", "fig6b", "fig6c", "fig6d"};
    return names;
}

inline constexpr int kMapResolution = 101;
inline constexpr int kCutResolution = 300;
inline constexpr double kCouplingMin = 0.05;
inline constexpr double kCouplingMax = 2.0;

inline SweepSpec preset(const std::string& name) {
    SweepSpec s;
    s.name = name;
    s.model = ModelParams::qrm(0.0);
    s.bath = BathSpec::ohmic(1e-3, 10.0, 0.07);
    s.truncation = TruncationSpec{100};

    const Axis g_cut{AxisKind::g, kCouplingMin, kCouplingMax, kCutResolution};
    const Axis g_map{AxisKind::g, kCouplingMin, kCouplingMax, kMapResolution};
    const std::string g_note = "g axis spans [0.05, 2.0]; the figure's coupling range is not stated numerically";
    auto cut = [&] {
        s.axes = {g_cut};
        s.quantities = {Quantity::g1_zero(), Quantity::g2_zero()};
        s.assumptions.push_back(g_note + ", " + std::to_string(kCutResolution) + " points");
    };
    auto map = [&](Axis secondary) {
        s.axes = {secondary, g_map};
        s.quantities = {Quantity::g2_zero()};
        s.assumptions.push_back(g_note + "; 101 x 101 grid");
    };
    auto delayed = [&](double g) {
        s.model.g = g;
        s.quantities = {Quantity::g2m_tau(1), Quantity::g2m_tau(2)};
        s.tau = TauSpec{1e-3, 200, 1e-3, 5.0};
        s.assumptions.push_back("tau grid: tau = 0 plus 200 log-spaced points over alpha*tau in [1e-3, 5], alpha = alpha_c");
    };
    auto overlay = [&] {
        s.crossing = CrossingOverlay{CrossingQuery{2, 3, kCouplingMin, kCouplingMax, 400}};
    };

    if (name == "fig1a") {
        map(Axis{AxisKind::t, 0.02, 0.2, kMapResolution});
        s.assumptions.push_back("T axis spans [0.02, 0.2]; the figure's temperature range is not stated numerically");
    } else if (name == "fig1b") {
        cut();
    } else if (name == "fig2a") {
        delayed(0.1);
    } else if (name == "fig2b") {
        delayed(0.25);
    } else if (name == "fig2c") {
        delayed(0.5);
    } else if (name == "fig2d") {
        delayed(0.7);
    } else if (name == "fig3a") {
        map(Axis{AxisKind::r, 0.0, 1.0, kMapResolution});
        overlay();
    } else if (name == "fig3b") {
        s.model.r = 0.7;
        cut();
    } else if (name == "fig4a") {
        map(Axis{AxisKind::u, -0.5, 0.5, kMapResolution});
        s.assumptions.push_back("U axis spans [-0.5, 0.5]; the figure's Stark range is not stated numerically");
        overlay();
    } else if (name == "fig4b") {
        s.model.u = 0.3;
        cut();
    } else if (name == "fig4c") {
        s.model.u = -0.4;
        cut();
    } else if (name == "fig5a") {
        s.model.r = 0.9;
        s.model.u = 0.0;
        cut();
    } else if (name == "fig5b") {
        s.model.r = 0.9;
        s.model.u = -0.4;
        cut();
    } else if (name == "fig6a") {
        s.model.u = 0.3;
        map(Axis{AxisKind::r, 0.0, 1.0, kMapResolution});
        overlay();
    } else if (name == "fig6b") {
        s.model.u = 0.3;
        s.model.r = 0.8;
        cut();
    } else if (name == "fig6c") {
        s.model.u = -0.3;
        map(Axis{AxisKind::r, 0.0, 1.0, kMapResolution});
        overlay();
    } else if (name == "fig6d") {
        s.model.u = -0.3;
        s.model.r = 0.4;
        cut();
    } else {
        throw UnknownPreset(name);
    }
    return s;
}

}  // namespace qrb
