// SPDX-License-Identifier: Apache-2.0
//
// stealthsim — link-level simulator for 5G NR downlink synchronization
// detectability under directional beam management
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "stealthsim/scenario.hpp"

namespace stealthsim {

inline constexpr const char* kEngineVersion = "stealthsim 1.0.0";

// ---------------------------------------------------------------------------
// Configuration files (JSON).  Keys mirror ScenarioConfig field names; any
// key may be omitted (deployment defaults apply) and unknown keys are
// rejected by name so typos cannot silently fall back to defaults.
// ---------------------------------------------------------------------------

namespace detail {

/// Pulls typed values out of a JSON object with diagnostics that name the
/// offending key, and tracks consumption so leftovers can be rejected.
class ConfigReader {
  public:
    explicit ConfigReader(const nlohmann::json& j) : j_(j) {
        if (!j.is_object())
            throw std::invalid_argument("config: top level must be a JSON object");
    }

    bool has(const char* key) const { return j_.find(key) != j_.end(); }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument(std::string("config: key \"") + key +
                                        "\" has the wrong type");
        }
    }

    void get_array(const char* key, ArrayGeometry& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        std::vector<int> v;
        try {
            v = it->get<std::vector<int>>();
        } catch (const nlohmann::json::exception&) {
            throw std::invalid_argument(std::string("config: key \"") + key +
                                        "\" must be an integer array [rows, cols, pols]");
        }
        if (v.size() != 3)
            throw std::invalid_argument(std::string("config: key \"") + key +
                                        "\" must have exactly 3 entries [rows, cols, "
                                        "pols]");
        out = ArrayGeometry{v[0], v[1], v[2]};
    }

    void get_enum(const char* key, Mode& out) {
        std::string s = to_string(out);
        get(key, s);
        if (s == "baseline")
            out = Mode::kBaseline;
        else if (s == "csi")
            out = Mode::kCsi;
        else
            throw std::invalid_argument(std::string("config: key \"") + key +
                                        "\" must be \"baseline\" or \"csi\", got \"" + s +
                                        "\"");
    }

    void get_enum(const char* key, CsiSource& out) {
        std::string s = to_string(out);
        get(key, s);
        if (s == "genie")
            out = CsiSource::kGenie;
        else if (s == "ls")
            out = CsiSource::kLs;
        else
            throw std::invalid_argument(std::string("config: key \"") + key +
                                        "\" must be \"genie\" or \"ls\", got \"" + s +
                                        "\"");
    }

    void reject_unknown() const {
        for (const auto& item : j_.items())
            if (seen_.find(item.key()) == seen_.end())
                throw std::invalid_argument("config: unknown key \"" + item.key() + "\"");
    }

  private:
    const nlohmann::json& j_;
    std::set<std::string> seen_;
};

}  // namespace detail

/// Builds a ScenarioConfig from a parsed JSON object.  Absent keys take the
/// deployment defaults; `tx_power_dbm`, when absent, pairs with the chosen
/// gNB array (28 dBm for 16 ports, 19 dBm for 128).  The result is
/// validated before it is returned.
inline ScenarioConfig parse_config_json(const nlohmann::json& j) {
    detail::ConfigReader r(j);
    ScenarioConfig cfg;

    r.get_array("gnb_array", cfg.gnb_array);
    r.get_array("ue_array", cfg.ue_array);
    r.get_array("eve_array", cfg.eve_array);
    const bool explicit_tx = r.has("tx_power_dbm");
    r.get("tx_power_dbm", cfg.tx_power_dbm);
    if (!explicit_tx) cfg.tx_power_dbm = ScenarioConfig::default_tx_power_dbm(cfg.gnb_array);

    r.get("n_sectors", cfg.n_sectors);
    r.get("sector_width_deg", cfg.sector_width_deg);
    r.get("scs_hz", cfg.scs_hz);
    r.get("fc_ghz", cfg.fc_ghz);
    r.get("sample_rate_hz", cfg.sample_rate_hz);
    r.get("ssb_period_ms", cfg.ssb_period_ms);
    r.get("eve_obs_time_ms", cfg.eve_obs_time_ms);
    r.get("ul_tx_power_dbm", cfg.ul_tx_power_dbm);
    r.get("noise_figure_db", cfg.noise_figure_db);
    r.get("ssb_subcarrier_offset", cfg.ssb_subcarrier_offset);
    r.get_enum("mode", cfg.mode);
    r.get_enum("csi_source", cfg.csi_source);
    r.get("detect_energy", cfg.detect_energy);
    r.get("detect_correlator", cfg.detect_correlator);
    r.get("n_trials", cfg.n_trials);
    r.get("seed", cfg.seed);
    r.reject_unknown();

    cfg.validate();
    return cfg;
}

/// Reads and parses a JSON config file.
inline ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: \"" + path + "\" is not valid JSON: " +
                                 e.what());
    }
    return parse_config_json(j);
}

/// Full config snapshot, every field explicit.  parse_config_json of this
/// object reproduces `cfg` exactly (the forced-drop test hook is not part
/// of the file format).
inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["n_sectors"] = cfg.n_sectors;
    j["sector_width_deg"] = cfg.sector_width_deg;
    j["gnb_array"] = {cfg.gnb_array.rows, cfg.gnb_array.cols, cfg.gnb_array.pols};
    j["ue_array"] = {cfg.ue_array.rows, cfg.ue_array.cols, cfg.ue_array.pols};
    j["eve_array"] = {cfg.eve_array.rows, cfg.eve_array.cols, cfg.eve_array.pols};
    j["scs_hz"] = cfg.scs_hz;
    j["fc_ghz"] = cfg.fc_ghz;
    j["sample_rate_hz"] = cfg.sample_rate_hz;
    j["ssb_period_ms"] = cfg.ssb_period_ms;
    j["eve_obs_time_ms"] = cfg.eve_obs_time_ms;
    j["tx_power_dbm"] = cfg.tx_power_dbm;
    j["ul_tx_power_dbm"] = cfg.ul_tx_power_dbm;
    j["noise_figure_db"] = cfg.noise_figure_db;
    j["ssb_subcarrier_offset"] = cfg.ssb_subcarrier_offset;
    j["mode"] = to_string(cfg.mode);
    j["csi_source"] = to_string(cfg.csi_source);
    j["detect_energy"] = cfg.detect_energy;
    j["detect_correlator"] = cfg.detect_correlator;
    j["n_trials"] = cfg.n_trials;
    j["seed"] = cfg.seed;
    return j;
}

// ---------------------------------------------------------------------------
// ROC results as CSV.
// ---------------------------------------------------------------------------

inline constexpr const char* kRocCsvHeader =
    "mode,detector,observer,antennas,pfa,pd,n_h0,n_h1";

namespace detail {

/// Fixed-format float: 6 significant digits, locale-independent.
inline std::string format_g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

/// Renders pooled ROC curves as CSV.  Rows are sorted by (mode, detector,
/// observer, pfa, pd) so the byte stream is a pure function of the data:
/// equal campaigns produce equal files regardless of map insertion order or
/// worker scheduling.
inline std::string roc_csv_string(const std::map<RocKey, RocCurve>& curves,
                                  int antennas) {
    if (curves.empty())
        throw std::invalid_argument("roc_csv_string: no curves to write");
    std::vector<const std::pair<const RocKey, RocCurve>*> order;
    order.reserve(curves.size());
    for (const auto& kv : curves) order.push_back(&kv);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return std::tie(a->first.mode, a->first.detector, a->first.observer) <
               std::tie(b->first.mode, b->first.detector, b->first.observer);
    });

    std::string out = kRocCsvHeader;
    out += '\n';
    for (const auto* kv : order) {
        const auto& key = kv->first;
        const auto& curve = kv->second;
        for (const auto& [pfa, pd] : curve.points) {
            out += key.mode;
            out += ',';
            out += key.detector;
            out += ',';
            out += key.observer;
            out += ',';
            out += std::to_string(antennas);
            out += ',';
            out += detail::format_g6(pfa);
            out += ',';
            out += detail::format_g6(pd);
            out += ',';
            out += std::to_string(curve.n_h0);
            out += ',';
            out += std::to_string(curve.n_h1);
            out += '\n';
        }
    }
    return out;
}

/// Writes the CSV rendering of `curves` to `path`.
inline void emit_roc_csv(const std::map<RocKey, RocCurve>& curves, int antennas,
                         const std::string& path) {
    const std::string body = roc_csv_string(curves, antennas);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_roc_csv: cannot write \"" + path + "\"");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("emit_roc_csv: write failed for \"" + path + "\"");
}

/// A parsed results file: the gNB antenna count plus one curve per
/// (mode, detector, observer) group, points in file order.
struct RocCsv {
    int antennas = 0;
    std::map<RocKey, RocCurve> curves;
};

/// Reads a file produced by emit_roc_csv (or one concatenated from several,
/// as the `both`-mode runner emits).
inline RocCsv read_roc_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_roc_csv: cannot open \"" + path + "\"");
    std::string line;
    if (!std::getline(in, line) || line != kRocCsvHeader)
        throw std::runtime_error("read_roc_csv: \"" + path +
                                 "\" does not start with the expected header");
    RocCsv out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string, 8> field;
        std::size_t start = 0, n_fields = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (n_fields >= field.size())
                    throw std::runtime_error("read_roc_csv: line " +
                                             std::to_string(line_no) + ": too many fields");
                field[n_fields++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (n_fields != 8)
            throw std::runtime_error("read_roc_csv: line " + std::to_string(line_no) +
                                     ": expected 8 fields, got " +
                                     std::to_string(n_fields));
        try {
            const RocKey key{field[2], field[1], field[0]};
            const int antennas = std::stoi(field[3]);
            if (out.curves.empty())
                out.antennas = antennas;
            else if (antennas != out.antennas)
                throw std::runtime_error("inconsistent antenna column");
            auto& curve = out.curves[key];
            curve.points.emplace_back(std::stod(field[4]), std::stod(field[5]));
            curve.n_h0 = std::stoi(field[6]);
            curve.n_h1 = std::stoi(field[7]);
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::runtime_error("read_roc_csv: line " + std::to_string(line_no) +
                                     ": malformed numeric field");
        }
    }
    if (out.curves.empty())
        throw std::runtime_error("read_roc_csv: \"" + path + "\" has no data rows");
    return out;
}

// ---------------------------------------------------------------------------
// ROC plot as a self-contained SVG.
// ---------------------------------------------------------------------------

namespace detail {

/// Two-decimal SVG coordinate.
inline std::string svg_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline constexpr double kPlotLeft = 70.0, kPlotTop = 40.0;
inline constexpr double kPlotRight = 430.0, kPlotBottom = 420.0;

inline double plot_x(double pfa) { return kPlotLeft + pfa * (kPlotRight - kPlotLeft); }
inline double plot_y(double pd) { return kPlotBottom - pd * (kPlotBottom - kPlotTop); }

}  // namespace detail

/// Renders ROC curves as a standalone SVG document (no external fonts,
/// scripts, or stylesheets): pfa on x, pd on y, both [0,1], one labeled
/// curve per (mode, detector, observer), legend on the right.
inline std::string roc_svg_string(const std::map<RocKey, RocCurve>& curves,
                                  const std::string& title = "") {
    if (curves.empty())
        throw std::invalid_argument("roc_svg_string: no curves to plot");
    using detail::plot_x;
    using detail::plot_y;
    using detail::svg_coord;

    static constexpr std::array<const char*, 8> kPalette = {
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

    std::vector<const std::pair<const RocKey, RocCurve>*> order;
    for (const auto& kv : curves) order.push_back(&kv);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return std::tie(a->first.mode, a->first.detector, a->first.observer) <
               std::tie(b->first.mode, b->first.detector, b->first.observer);
    });

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    if (!title.empty())
        s << "<text x=\"" << svg_coord((detail::kPlotLeft + detail::kPlotRight) / 2)
          << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"15\" fill=\"#222222\">"
          << title << "</text>\n";

    // Grid, axes, and tick labels.
    for (int i = 0; i <= 5; ++i) {
        const double f = i / 5.0;
        s << "<line x1=\"" << svg_coord(plot_x(f)) << "\" y1=\"" << svg_coord(plot_y(0))
          << "\" x2=\"" << svg_coord(plot_x(f)) << "\" y2=\"" << svg_coord(plot_y(1))
          << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s << "<line x1=\"" << svg_coord(plot_x(0)) << "\" y1=\"" << svg_coord(plot_y(f))
          << "\" x2=\"" << svg_coord(plot_x(1)) << "\" y2=\"" << svg_coord(plot_y(f))
          << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        char lab[8];
        std::snprintf(lab, sizeof lab, "%.1f", f);
        s << "<text x=\"" << svg_coord(plot_x(f)) << "\" y=\""
          << svg_coord(detail::kPlotBottom + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
             "fill=\"#222222\">"
          << lab << "</text>\n";
        s << "<text x=\"" << svg_coord(detail::kPlotLeft - 8) << "\" y=\""
          << svg_coord(plot_y(f) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
             "fill=\"#222222\">"
          << lab << "</text>\n";
    }
    s << "<rect x=\"" << svg_coord(detail::kPlotLeft) << "\" y=\""
      << svg_coord(detail::kPlotTop) << "\" width=\""
      << svg_coord(detail::kPlotRight - detail::kPlotLeft) << "\" height=\""
      << svg_coord(detail::kPlotBottom - detail::kPlotTop)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    // Chance diagonal for reference.
    s << "<line x1=\"" << svg_coord(plot_x(0)) << "\" y1=\"" << svg_coord(plot_y(0))
      << "\" x2=\"" << svg_coord(plot_x(1)) << "\" y2=\"" << svg_coord(plot_y(1))
      << "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 4\"/>\n";
    s << "<text x=\"" << svg_coord((detail::kPlotLeft + detail::kPlotRight) / 2)
      << "\" y=\"" << svg_coord(detail::kPlotBottom + 40)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222222\">probability of false alarm</text>\n";
    s << "<text x=\"20\" y=\"" << svg_coord((detail::kPlotTop + detail::kPlotBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222222\" transform=\"rotate(-90 20 "
      << svg_coord((detail::kPlotTop + detail::kPlotBottom) / 2)
      << ")\">probability of detection</text>\n";

    // Curves and legend.
    const double legend_x = detail::kPlotRight + 18.0;
    double legend_y = detail::kPlotTop + 12.0;
    std::size_t idx = 0;
    for (const auto* kv : order) {
        const char* color = kPalette[idx % kPalette.size()];
        s << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& [pfa, pd] : kv->second.points) {
            if (!first) s << ' ';
            s << svg_coord(plot_x(pfa)) << ',' << svg_coord(plot_y(pd));
            first = false;
        }
        s << "\"/>\n";
        const std::string label =
            kv->first.mode + " / " + kv->first.observer + " / " + kv->first.detector;
        s << "<line x1=\"" << svg_coord(legend_x) << "\" y1=\"" << svg_coord(legend_y - 4)
          << "\" x2=\"" << svg_coord(legend_x + 24) << "\" y2=\""
          << svg_coord(legend_y - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        s << "<text class=\"legend-label\" x=\"" << svg_coord(legend_x + 30) << "\" y=\""
          << svg_coord(legend_y)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">" << label
          << "</text>\n";
        legend_y += 18.0;
        ++idx;
    }
    s << "</svg>\n";
    return s.str();
}

/// Writes the SVG rendering of `curves` to `path`.  An empty curve set is
/// rejected before the file is created.
inline void emit_plot(const std::map<RocKey, RocCurve>& curves, const std::string& path,
                      const std::string& title = "") {
    const std::string body = roc_svg_string(curves, title);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot: cannot write \"" + path + "\"");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("emit_plot: write failed for \"" + path + "\"");
}

// ---------------------------------------------------------------------------
// Run manifest.
// ---------------------------------------------------------------------------

/// Record of one CLI run: the exact config executed (snapshot with every
/// field explicit), the seed, the engine version, wall-clock bounds, and
/// the files written.
struct RunManifest {
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string engine_version = kEngineVersion;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;
};

/// ISO-8601 UTC timestamp (second resolution).
inline std::string utc_timestamp(std::time_t t) {
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["engine_version"] = m.engine_version;
    j["seed"] = m.seed;
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    j["config"] = m.config;
    j["outputs"] = m.outputs;
    return j;
}

inline void emit_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_manifest: cannot write \"" + path + "\"");
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out)
        throw std::runtime_error("emit_manifest: write failed for \"" + path + "\"");
}

// ---------------------------------------------------------------------------
// Debug sample dumps: interleaved little-endian float32 I/Q.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_f32_le(std::string& buf, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    buf.push_back(static_cast<char>(u & 0xff));
    buf.push_back(static_cast<char>((u >> 8) & 0xff));
    buf.push_back(static_cast<char>((u >> 16) & 0xff));
    buf.push_back(static_cast<char>((u >> 24) & 0xff));
}

inline float get_f32_le(const unsigned char* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                            (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(u);
}

}  // namespace detail

/// Writes samples as interleaved 32-bit-float I/Q, little-endian regardless
/// of host byte order.
inline void write_iq_f32(const std::vector<cf>& samples, const std::string& path) {
    std::string buf;
    buf.reserve(samples.size() * 8);
    for (const cf& v : samples) {
        detail::put_f32_le(buf, v.real());
        detail::put_f32_le(buf, v.imag());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_iq_f32: cannot write \"" + path + "\"");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_iq_f32: write failed for \"" + path + "\"");
}

/// Reads a file produced by write_iq_f32.
inline std::vector<cf> read_iq_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_iq_f32: cannot open \"" + path + "\"");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        throw std::runtime_error("read_iq_f32: \"" + path +
                                 "\" is not a whole number of I/Q pairs");
    std::vector<cf> out(bytes.size() / 8);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cf(detail::get_f32_le(p + 8 * i), detail::get_f32_le(p + 8 * i + 4));
    return out;
}

}  // namespace stealthsim
