// qrb - photon-bundle statistics for the quantum Rabi model family.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qrb/qrb.hpp"

namespace {

struct Overrides {
    std::optional<double> g, r, u, delta, omega0, t, t_q, t_c, alpha, omega_cut;
    std::optional<int> ntr;
};

void add_physics(CLI::App* app, Overrides& o) {
    app->add_option("--g", o.g, "coupling g");
    app->add_option("--r", o.r, "anisotropy ratio r");
    app->add_option("--u", o.u, "Stark coupling U");
    app->add_option("--delta", o.delta, "qubit splitting");
    app->add_option("--omega0", o.omega0, "cavity frequency");
    app->add_option("--t", o.t, "temperature of both baths");
    app->add_option("--tq", o.t_q, "qubit bath temperature");
    app->add_option("--tc", o.t_c, "cavity bath temperature");
    app->add_option("--alpha", o.alpha, "coupling of both baths");
    app->add_option("--omega-cut", o.omega_cut, "bath cutoff frequency");
}

void apply(const Overrides& o, qrb::SweepSpec& s) {
    if (o.g) s.model.g = *o.g;
    if (o.r) s.model.r = *o.r;
    if (o.u) s.model.u = *o.u;
    if (o.delta) s.model.delta = *o.delta;
    if (o.omega0) s.model.omega0 = *o.omega0;
    if (o.t) s.bath.t_q = s.bath.t_c = *o.t;
    if (o.t_q) s.bath.t_q = *o.t_q;
    if (o.t_c) s.bath.t_c = *o.t_c;
    if (o.alpha) s.bath.alpha_q = s.bath.alpha_c = *o.alpha;
    if (o.omega_cut) s.bath.omega_cut = *o.omega_cut;
    if (o.ntr) s.truncation.n_tr = *o.ntr;
}

std::vector<qrb::Axis> parse_axes(const std::vector<std::string>& raw) {
    std::vector<qrb::Axis> axes;
    for (const auto& a : raw) {
        const auto spec = qrb::apply_config({{"axis", a}});
        axes.push_back(spec.axes.front());
    }
    return axes;
}

std::vector<qrb::Quantity> parse_quantities(const std::vector<std::string>& raw) {
    std::vector<qrb::Quantity> qs;
    for (const auto& q : raw) qs.push_back(qrb::parse_quantity(q));
    return qs;
}

std::string fmt(double v) { return qrb::format_number(v); }

void run_and_write(const qrb::SweepSpec& spec, const std::string& out_dir, unsigned threads) {
    spec.validate();
    const qrb::ResultTable table = qrb::run_sweep(spec, threads);
    std::optional<std::vector<qrb::CrossingTraceRow>> crossings;
    if (spec.crossing) crossings = qrb::trace_crossings(spec, threads);
    const auto out = qrb::write_sweep(spec, table, out_dir, crossings ? &*crossings : nullptr);
    std::size_t bad = 0;
    for (const auto& row : table.rows) bad += row.status == "ok" ? 0 : 1;
    std::cout << "wrote " << out.csv.string() << " (" << table.rows.size() << " rows";
    if (bad) std::cout << ", " << bad << " without values";
    std::cout << ")\n";
    std::cout << "wrote " << out.metadata.string() << "\n";
    std::cout << "wrote " << out.plot.string() << "\n";
    if (!out.crossing.empty()) std::cout << "wrote " << out.crossing.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon-bundle correlations of the quantum Rabi model family"};
    app.set_version_flag("--version", std::string(qrb::kVersion));
    app.require_subcommand(0, 1);

    Overrides ov;
    std::string out_dir = ".";
    unsigned threads = qrb::default_threads();
    std::string config_path;
    app.add_option("--ntr", ov.ntr, "Fock truncation n_tr");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "key = value config file");

    int levels = 12;
    auto* spectrum = app.add_subcommand("spectrum", "dressed energies and parities");
    add_physics(spectrum, ov);
    spectrum->add_option("--levels", levels, "number of levels to print")->check(CLI::PositiveNumber);

    auto* steady = app.add_subcommand("steady", "steady-state populations");
    add_physics(steady, ov);
    steady->add_option("--levels", levels, "number of levels to print")->check(CLI::PositiveNumber);
    bool cross_check = false;
    steady->add_flag("--check", cross_check, "compare Gibbs and null-space solutions");

    std::vector<int> bundle_sizes{1, 2};
    int order = 2;
    auto* gzero = app.add_subcommand("gzero", "zero-delay bundle correlations");
    add_physics(gzero, ov);
    gzero->add_option("--m", bundle_sizes, "bundle sizes")->check(CLI::PositiveNumber);
    gzero->add_option("--n", order, "correlation order")->check(CLI::Range(2, 64));

    qrb::TauSpec tau_opts;
    auto* gtau = app.add_subcommand("gtau", "delayed bundle correlations, written as a sweep");
    add_physics(gtau, ov);
    gtau->add_option("--m", bundle_sizes, "bundle sizes")->check(CLI::PositiveNumber);
    gtau->add_option("--tau-count", tau_opts.count, "log-spaced delay points")->check(CLI::PositiveNumber);
    gtau->add_option("--tau-lo", tau_opts.lo, "smallest alpha*tau");
    gtau->add_option("--tau-hi", tau_opts.hi, "largest alpha*tau");

    std::vector<std::string> axes_raw, quantities_raw;
    std::string name;
    auto* map = app.add_subcommand("map", "two-axis sweep");
    auto* cut = app.add_subcommand("cut", "one-axis sweep");
    for (auto* sub : {map, cut}) {
        add_physics(sub, ov);
        sub->add_option("--axis", axes_raw, "kind:min:max:count, kind in g r U T");
        sub->add_option("--quantity", quantities_raw, "g1_zero, g2_zero, gm_zero(m), g2m_tau(m)");
        sub->add_option("--name", name, "output base name");
    }

    qrb::CrossingQuery cq;
    auto* crossing = app.add_subcommand("crossing", "excited-state level crossing along g");
    add_physics(crossing, ov);
    crossing->add_option("--low", cq.level_low, "lower excited level (1 = first excited)");
    crossing->add_option("--high", cq.level_high, "upper excited level");
    crossing->add_option("--gmin", cq.g_min, "scan start");
    crossing->add_option("--gmax", cq.g_max, "scan end");
    crossing->add_option("--resolution", cq.resolution, "scan points");
    bool all_crossings = false;
    crossing->add_flag("--all", all_crossings, "report every interior true crossing");

    std::string preset_name;
    auto* preset = app.add_subcommand("preset", "run a figure preset");
    preset->add_option("name", preset_name, "fig1a ... fig6d")->required();
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "print preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (list_presets) {
            for (const auto& n : qrb::preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cout << app.help();
            return 2;
        }
        qrb::SweepSpec spec;
        spec.model = qrb::ModelParams::qrm(0.5);
        if (!config_path.empty()) spec = qrb::apply_config(qrb::read_config_file(config_path), spec);
        if (*preset) {
            spec = qrb::preset(preset_name);
            if (!config_path.empty()) spec = qrb::apply_config(qrb::read_config_file(config_path), spec);
        }
        apply(ov, spec);
        spec.model.validate();
        spec.bath.validate();
        spec.truncation.validate();

        if (*spectrum) {
            const qrb::Eigensystem es = qrb::solve_model(spec.model, spec.truncation);
            std::cout << "n,energy,parity\n";
            for (Eigen::Index n = 0; n < std::min<Eigen::Index>(levels, es.size()); ++n) {
                std::cout << n << "," << fmt(es.energies(n)) << "," << es.parities[static_cast<std::size_t>(n)]
                          << "\n";
            }
        } else if (*steady) {
            const qrb::BundleStatistics st(spec.model, spec.bath, spec.truncation);
            const auto& ss = st.steady();
            std::cout << "# source " << (ss.source == qrb::SteadySource::gibbs ? "gibbs" : "nullspace");
            if (ss.residual) std::cout << ", residual " << fmt(*ss.residual);
            std::cout << "\n";
            if (cross_check) {
                const auto ns = qrb::nullspace_steady_state(st.rates().pop_rate_matrix);
                std::cout << "# max |P_gibbs - P_nullspace| = "
                          << fmt(qrb::validate_steady(qrb::gibbs_state(st.eigensystem(), spec.bath.t_q), ns)) << "\n";
            }
            std::cout << "n,energy,population\n";
            for (Eigen::Index n = 0; n < std::min<Eigen::Index>(levels, ss.size()); ++n) {
                std::cout << n << "," << fmt(st.eigensystem().energies(n)) << "," << fmt(ss.populations(n)) << "\n";
            }
        } else if (*gzero) {
            const qrb::BundleStatistics st(spec.model, spec.bath, spec.truncation);
            std::cout << "m,n,G,log10_G,flux_moment\n";
            std::vector<qrb::CorrelationResult> rs;
            for (int m : bundle_sizes) {
                const auto r = qrb::require_emission(st.gzero(m, order));
                rs.push_back(r);
                std::cout << m << "," << order << "," << fmt(r.value) << "," << fmt(std::log10(r.value)) << ","
                          << fmt(r.flux_moment) << "\n";
            }
            if (order == 2 && bundle_sizes == std::vector<int>{1, 2}) {
                std::cout << "# regime " << qrb::to_string(qrb::classify_regime(rs[0], rs[1])) << "\n";
            }
        } else if (*gtau) {
            spec.axes.clear();
            spec.quantities.clear();
            for (int m : bundle_sizes) spec.quantities.push_back(qrb::Quantity::g2m_tau(m));
            const bool tau_given = gtau->count("--tau-count") + gtau->count("--tau-lo") + gtau->count("--tau-hi") > 0;
            if (!spec.tau || tau_given) spec.tau = tau_opts;
            spec.tau->alpha = spec.bath.alpha_c > 0.0 ? spec.bath.alpha_c : 1.0;
            if (spec.name == "custom") spec.name = "gtau";
            run_and_write(spec, out_dir, threads);
        } else if (*map || *cut) {
            if (!axes_raw.empty()) spec.axes = parse_axes(axes_raw);
            if (!quantities_raw.empty()) spec.quantities = parse_quantities(quantities_raw);
            const std::size_t want = *map ? 2 : 1;
            if (spec.axes.size() != want) {
                throw qrb::InvalidInput(std::string(*map ? "map" : "cut") + " needs exactly " +
                                        std::to_string(want) + " axis definition(s)");
            }
            if (spec.has_delayed() && !spec.tau) spec.tau = qrb::TauSpec{spec.bath.alpha_c, 200, 1e-3, 5.0};
            if (!name.empty()) spec.name = name;
            run_and_write(spec, out_dir, threads);
        } else if (*crossing) {
            if (all_crossings) {
                const auto found = qrb::find_level_crossings(cq, spec.model, spec.truncation);
                if (found.empty()) throw qrb::NoCrossingFound("no true crossing in range");
                std::cout << "g_c,min_gap,true_crossing\n";
                for (const auto& c : found) std::cout << fmt(c.g_c) << "," << fmt(c.min_gap) << ",1\n";
            } else {
                const auto c = qrb::find_level_crossing(cq, spec.model, spec.truncation);
                std::cout << "g_c,min_gap,true_crossing\n"
                          << fmt(c.g_c) << "," << fmt(c.min_gap) << "," << (c.true_crossing ? 1 : 0) << "\n";
            }
        } else if (*preset) {
            run_and_write(spec, out_dir, threads);
        }
    } catch (const qrb::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const qrb::PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return 3;
    } catch (const qrb::IoFailure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
