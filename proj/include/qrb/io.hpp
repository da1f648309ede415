// io.hpp - CSV / JSON emission, config parsing and plot scripts for sweeps.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrb/errors.hpp"
#include "qrb/sweep.hpp"

namespace qrb {

using json = nlohmann::json;

// 17 significant digits, scientific.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoFailure("write to '" + path.string() + "' failed");
}

}  // namespace detail

inline void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
    if (table.rows.empty()) throw InvalidInput("emit_csv: table has no rows");
    auto out = detail::open_output(path);
    bool first = true;
    auto header = [&](const std::string& col) {
        out << (first ? "" : ",") << col;
        first = false;
    };
    for (const auto& c : table.coord_columns) header(c);
    for (const auto& c : table.value_columns) header(c);
    header("status");
    out << '\n';
    for (const auto& row : table.rows) {
        for (double c : row.coords) out << format_number(c) << ',';
        for (const auto& v : row.values) {
            if (v) out << format_number(*v);
            out << ',';
        }
        out << row.status << '\n';
    }
    detail::finish_output(out, path);
}

inline void emit_crossing_csv(const std::vector<CrossingTraceRow>& rows, const std::string& axis_name,
                              const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << axis_name << ",g_c,min_gap,status\n";
    for (const auto& row : rows) {
        if (row.crossings.empty()) {
            out << format_number(row.secondary) << ",,," << row.status << '\n';
            continue;
        }
        for (const auto& c : row.crossings) {
            out << format_number(row.secondary) << ',' << format_number(c.g_c) << ',' << format_number(c.min_gap)
                << ',' << row.status << '\n';
        }
    }
    detail::finish_output(out, path);
}

// ------------------------------ JSON -----------------------------------------

inline json to_json(const SweepSpec& s) {
    json j;
    j["code_version"] = kVersion;
    j["preset"] = s.name;
    j["model"] = {{"delta", s.model.delta}, {"omega0", s.model.omega0}, {"g", s.model.g},
                  {"r", s.model.r},         {"u", s.model.u}};
    j["bath"] = {{"alpha_q", s.bath.alpha_q}, {"alpha_c", s.bath.alpha_c}, {"omega_cut", s.bath.omega_cut},
                 {"t_q", s.bath.t_q},         {"t_c", s.bath.t_c}};
    j["truncation"] = {{"n_tr", s.truncation.n_tr}, {"dim", s.truncation.dim()}};
    j["axes"] = json::array();
    for (const auto& a : s.axes) {
        j["axes"].push_back({{"kind", to_string(a.kind)}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    }
    j["quantities"] = json::array();
    for (const auto& q : s.quantities) j["quantities"].push_back(q.name());
    if (s.tau) {
        j["tau_grid"] = {{"alpha", s.tau->alpha}, {"count", s.tau->count}, {"lo", s.tau->lo}, {"hi", s.tau->hi},
                         {"includes_zero", true}};
    } else {
        j["tau_grid"] = nullptr;
    }
    if (s.crossing) {
        const auto& q = s.crossing->query;
        j["crossing"] = {{"level_low", q.level_low}, {"level_high", q.level_high}, {"g_min", q.g_min},
                         {"g_max", q.g_max},         {"resolution", q.resolution}};
    } else {
        j["crossing"] = nullptr;
    }
    j["tolerances"] = {{"flux_threshold", kFluxThreshold},
                       {"small_gap", kSmallGap},
                       {"parity_commutator", kParityCommutatorTol},
                       {"parity_purity", kParityPurityTol},
                       {"true_crossing_gap", kTrueCrossingGap}};
    j["assumptions"] = s.assumptions;
    return j;
}

inline SweepSpec spec_from_json(const json& j) {
    try {
        SweepSpec s;
        s.name = j.at("preset").get<std::string>();
        const auto& m = j.at("model");
        s.model = {m.at("delta").get<double>(), m.at("omega0").get<double>(), m.at("g").get<double>(),
                   m.at("r").get<double>(), m.at("u").get<double>()};
        const auto& b = j.at("bath");
        s.bath = {b.at("alpha_q").get<double>(), b.at("alpha_c").get<double>(), b.at("omega_cut").get<double>(),
                  b.at("t_q").get<double>(), b.at("t_c").get<double>()};
        s.truncation.n_tr = j.at("truncation").at("n_tr").get<int>();
        for (const auto& a : j.at("axes")) {
            s.axes.push_back({parse_axis_kind(a.at("kind").get<std::string>()), a.at("min").get<double>(),
                              a.at("max").get<double>(), a.at("count").get<int>()});
        }
        for (const auto& q : j.at("quantities")) s.quantities.push_back(parse_quantity(q.get<std::string>()));
        if (j.contains("tau_grid") && !j.at("tau_grid").is_null()) {
            const auto& t = j.at("tau_grid");
            s.tau = TauSpec{t.at("alpha").get<double>(), t.at("count").get<int>(), t.at("lo").get<double>(),
                            t.at("hi").get<double>()};
        }
        if (j.contains("crossing") && !j.at("crossing").is_null()) {
            const auto& c = j.at("crossing");
            s.crossing = CrossingOverlay{CrossingQuery{c.at("level_low").get<int>(), c.at("level_high").get<int>(),
                                                       c.at("g_min").get<double>(), c.at("g_max").get<double>(),
                                                       c.at("resolution").get<int>()}};
        }
        if (j.contains("assumptions")) s.assumptions = j.at("assumptions").get<std::vector<std::string>>();
        return s;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("metadata: ") + e.what());
    }
}

inline void emit_metadata(const SweepSpec& spec, const std::filesystem::path& path) {
    spec.validate();
    auto out = detail::open_output(path);
    out << to_json(spec).dump(2) << '\n';
    detail::finish_output(out, path);
}

inline SweepSpec load_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("'" + path.string() + "': " + e.what());
    }
    return spec_from_json(j);
}

// ------------------------------ config ---------------------------------------
//
//   # comment
//   preset   = fig3b           base spec, applied before everything else
//   g = 0.5                    also r, u, delta, omega0
//   t = 0.07                   both baths; t_q / t_c individually
//   alpha = 1e-3               both baths; alpha_q / alpha_c individually
//   omega_cut = 10
//   ntr = 100
//   axis = g:0.05:2:300        repeatable, outer axis first
//   quantity = g2m_tau(2)      repeatable
//   tau = 1e-3:200:1e-3:5      alpha:count:lo:hi
//   crossing = 2:3:0.05:2:400  level_low:level_high:g_min:g_max:resolution
//   name = mysweep

using ConfigMap = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw InvalidInput("config: '" + key + "' expects a number, got '" + v + "'");
}

inline int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used == v.size()) return i;
    } catch (const std::exception&) {
    }
    throw InvalidInput("config: '" + key + "' expects an integer, got '" + v + "'");
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

inline ConfigMap read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open config '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Applies entries on top of `base`. A `preset` key replaces the base first.
inline SweepSpec apply_config(const ConfigMap& cfg, SweepSpec base = {}) {
    for (const auto& [k, v] : cfg) {
        if (k == "preset") base = preset(v);
    }
    bool axes_reset = false;
    bool quantities_reset = false;
    for (const auto& [k, v] : cfg) {
        using detail::to_double;
        if (k == "preset") continue;
        if (k == "name") {
            base.name = v;
        } else if (k == "delta") {
            base.model.delta = to_double(k, v);
        } else if (k == "omega0") {
            base.model.omega0 = to_double(k, v);
        } else if (k == "g") {
            base.model.g = to_double(k, v);
        } else if (k == "r") {
            base.model.r = to_double(k, v);
        } else if (k == "u" || k == "U") {
            base.model.u = to_double(k, v);
        } else if (k == "t" || k == "T") {
            base.bath.t_q = base.bath.t_c = to_double(k, v);
        } else if (k == "t_q") {
            base.bath.t_q = to_double(k, v);
        } else if (k == "t_c") {
            base.bath.t_c = to_double(k, v);
        } else if (k == "alpha") {
            base.bath.alpha_q = base.bath.alpha_c = to_double(k, v);
        } else if (k == "alpha_q") {
            base.bath.alpha_q = to_double(k, v);
        } else if (k == "alpha_c") {
            base.bath.alpha_c = to_double(k, v);
        } else if (k == "omega_cut") {
            base.bath.omega_cut = to_double(k, v);
        } else if (k == "ntr" || k == "n_tr") {
            base.truncation.n_tr = detail::to_int(k, v);
        } else if (k == "axis") {
            if (!axes_reset) base.axes.clear();
            axes_reset = true;
            const auto parts = detail::split(v, ':');
            if (parts.size() != 4) throw InvalidInput("config: axis expects kind:min:max:count, got '" + v + "'");
            base.axes.push_back({parse_axis_kind(parts[0]), to_double(k, parts[1]), to_double(k, parts[2]),
                                 detail::to_int(k, parts[3])});
        } else if (k == "quantity") {
            if (!quantities_reset) base.quantities.clear();
            quantities_reset = true;
            base.quantities.push_back(parse_quantity(v));
        } else if (k == "tau") {
            const auto parts = detail::split(v, ':');
            if (parts.size() != 4) throw InvalidInput("config: tau expects alpha:count:lo:hi, got '" + v + "'");
            base.tau = TauSpec{to_double(k, parts[0]), detail::to_int(k, parts[1]), to_double(k, parts[2]),
                               to_double(k, parts[3])};
        } else if (k == "crossing") {
            const auto parts = detail::split(v, ':');
            if (parts.size() != 5) {
                throw InvalidInput("config: crossing expects low:high:g_min:g_max:resolution, got '" + v + "'");
            }
            base.crossing = CrossingOverlay{CrossingQuery{detail::to_int(k, parts[0]), detail::to_int(k, parts[1]),
                                                          to_double(k, parts[2]), to_double(k, parts[3]),
                                                          detail::to_int(k, parts[4])}};
        } else {
            throw InvalidInput("config: unknown key '" + k + "'");
        }
    }
    if (base.has_delayed() && !base.tau) base.tau = TauSpec{base.bath.alpha_c, 200, 1e-3, 5.0};
    return base;
}

// Config text to a complete, validated sweep spec.
inline SweepSpec parse_sweep_spec(const std::string& text, SweepSpec base = {}) {
    SweepSpec s = apply_config(parse_config_text(text), std::move(base));
    s.validate();
    return s;
}

// ------------------------------ plot script ----------------------------------

inline std::string plot_script(const SweepSpec& spec, const std::string& csv_name) {
    std::ostringstream gp;
    gp << "# gnuplot script for " << spec.name << "\n"
       << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set terminal pngcairo size 900,700\n"
       << "set output '" << spec.name << ".png'\n";
    if (spec.has_delayed()) {
        const std::size_t first = spec.axes.size() + 2;
        gp << "set logscale x\nset xlabel 'alpha tau'\nset ylabel 'G_m^{(2)}(tau)'\n";
        gp << "set xrange [" << spec.tau->lo << ":" << spec.tau->hi << "]\n";
        gp << "plot ";
        for (std::size_t k = 0; k < spec.quantities.size(); ++k) {
            gp << (k ? ", " : "") << "'" << csv_name << "' using " << spec.axes.size() + 2 << ":" << first + k + 1
               << " with lines";
        }
        gp << "\n";
    } else if (spec.axes.size() == 2) {
        gp << "set view map\nset xlabel '" << to_string(spec.axes[1].kind) << "'\nset ylabel '"
           << to_string(spec.axes[0].kind) << "'\n"
           << "set cblabel '" << spec.quantities.front().column() << "'\n"
           << "set palette defined (-1 'blue', 0 'white', 1 'red')\n";
        gp << "splot '" << csv_name << "' using 2:1:3 with image notitle";
        if (spec.crossing) {
            gp << ", '" << spec.name << ".crossing.csv' using 2:1:(0) with points pt 7 ps 0.4 lc 'black' notitle";
        }
        gp << "\n";
    } else if (spec.axes.size() == 1) {
        gp << "set xlabel '" << to_string(spec.axes[0].kind) << "'\nset ylabel 'log10 G_m^{(2)}(0)'\n"
           << "set xzeroaxis\nplot ";
        for (std::size_t k = 0; k < spec.quantities.size(); ++k) {
            gp << (k ? ", " : "") << "'" << csv_name << "' using 1:" << k + 2 << " with lines";
        }
        gp << "\n";
    } else {
        gp << "# single point: no plot\n";
    }
    return gp.str();
}

inline void emit_plot_script(const SweepSpec& spec, const std::string& csv_name, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << plot_script(spec, csv_name);
    detail::finish_output(out, path);
}

struct SweepOutputs {
    std::filesystem::path csv;
    std::filesystem::path metadata;
    std::filesystem::path plot;
    std::filesystem::path crossing;  // empty when no overlay was requested
};

// Writes <dir>/<name>.csv, .meta.json, .gp and, for overlays, .crossing.csv.
inline SweepOutputs write_sweep(const SweepSpec& spec, const ResultTable& table, const std::filesystem::path& dir,
                                const std::vector<CrossingTraceRow>* crossings = nullptr) {
    if (!std::filesystem::is_directory(dir)) throw IoFailure("output directory '" + dir.string() + "' does not exist");
    SweepOutputs out;
    out.csv = dir / (spec.name + ".csv");
    out.metadata = dir / (spec.name + ".meta.json");
    out.plot = dir / (spec.name + ".gp");
    emit_csv(table, out.csv);
    emit_metadata(spec, out.metadata);
    emit_plot_script(spec, out.csv.filename().string(), out.plot);
    if (crossings != nullptr) {
        out.crossing = dir / (spec.name + ".crossing.csv");
        std::string axis = "secondary";
        for (const auto& a : spec.axes) {
            if (a.kind == AxisKind::r || a.kind == AxisKind::u) axis = to_string(a.kind);
        }
        emit_crossing_csv(*crossings, axis, out.crossing);
    }
    return out;
}

}  // namespace qrb
