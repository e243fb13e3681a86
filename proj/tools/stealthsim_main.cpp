// SPDX-License-Identifier: Apache-2.0
//
// stealthsim — link-level simulator for 5G NR downlink synchronization
// detectability under directional beam management
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line front end.  Subcommands:
//   run      — execute a Monte Carlo campaign, write roc.csv / roc.svg /
//              manifest.json (optionally first-trial I/Q dumps) to --out
//   plot     — re-render an existing roc.csv as an SVG
//   selftest — fast self-contained math checks, one line per check

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stealthsim/io.hpp"
#include "stealthsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace stealthsim;

namespace {

int run_command(const std::string& config_path, std::uint64_t* seed_override,
                int* trials_override, const std::string& mode_str,
                const std::string& out_dir, bool dump_iq) {
    ScenarioConfig cfg =
        config_path.empty() ? ScenarioConfig{} : parse_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (trials_override) cfg.n_trials = *trials_override;

    std::vector<Mode> modes;
    if (mode_str == "baseline")
        modes = {Mode::kBaseline};
    else if (mode_str == "csi")
        modes = {Mode::kCsi};
    else if (mode_str == "both")
        modes = {Mode::kBaseline, Mode::kCsi};
    else
        modes = {cfg.mode};
    cfg.mode = modes.front();
    cfg.validate();

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.seed = cfg.seed;
    manifest.config = config_to_json(cfg);
    manifest.started_utc = utc_timestamp(std::time(nullptr));

    const auto out_path = [&](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    std::map<RocKey, RocCurve> curves;
    for (Mode mode : modes) {
        ScenarioConfig mode_cfg = cfg;
        mode_cfg.mode = mode;
        std::fprintf(stderr, "running %d %s trials (seed %llu, M=%d)...\n",
                     mode_cfg.n_trials, to_string(mode).c_str(),
                     static_cast<unsigned long long>(mode_cfg.seed),
                     mode_cfg.gnb_array.ports());
        auto res = run_campaign(mode_cfg);
        for (auto& [key, curve] : res.curves) curves[key] = std::move(curve);

        if (dump_iq && mode == modes.front()) {
            TrialCapture capture;
            (void)run_trial(mode_cfg, Rng::for_trial(mode_cfg.seed, 0), &capture);
            const auto dump = [&](const DetectorStream& s, const std::string& stem) {
                for (std::size_t port = 0; port < s.size(); ++port) {
                    const auto p =
                        out_path(stem + "_port" + std::to_string(port) + ".iqf32");
                    write_iq_f32(s[port], p);
                    manifest.outputs.push_back(p);
                }
            };
            dump(capture.ue_h1, "ue_h1");
            dump(capture.eve_h1, "eve_h1");
        }
    }

    const auto csv_path = out_path("roc.csv");
    const auto svg_path = out_path("roc.svg");
    emit_roc_csv(curves, cfg.gnb_array.ports(), csv_path);
    emit_plot(curves, svg_path,
              "SSB detection ROC (M=" + std::to_string(cfg.gnb_array.ports()) + ")");
    manifest.outputs.insert(manifest.outputs.begin(), {csv_path, svg_path});
    manifest.finished_utc = utc_timestamp(std::time(nullptr));
    const auto manifest_path = out_path("manifest.json");
    emit_manifest(manifest, manifest_path);

    for (const auto& [key, curve] : curves)
        std::printf("%-8s  %-8s  %-10s  AUC %.4f  PD@PFA0.1 %.4f\n", key.mode.c_str(),
                    key.observer.c_str(), key.detector.c_str(), auc(curve),
                    pd_at_pfa(curve, 0.1));
    std::printf("wrote %s, %s, %s\n", csv_path.c_str(), svg_path.c_str(),
                manifest_path.c_str());
    return 0;
}

int plot_command(const std::string& in_path, const std::string& out_path) {
    const auto parsed = read_roc_csv(in_path);
    emit_plot(parsed.curves, out_path,
              "SSB detection ROC (M=" + std::to_string(parsed.antennas) + ")");
    std::printf("wrote %s (%zu curves)\n", out_path.c_str(), parsed.curves.size());
    return 0;
}

// ---------------------------------------------------------------------------
// selftest: fast, self-contained checks of the math core.
// ---------------------------------------------------------------------------

struct SelftestReport {
    int failures = 0;
    void check(const std::string& name, bool ok, const std::string& detail = "") {
        std::printf("%s - %s%s%s\n", ok ? "ok" : "FAIL", name.c_str(),
                    detail.empty() ? "" : ": ", detail.c_str());
        if (!ok) ++failures;
    }
};

int selftest_command() {
    SelftestReport rep;

    {  // Two-level periodic autocorrelation of the length-127 sync sequence.
        const auto seq = gen_pss(0);
        bool ok = true;
        for (int tau = 0; tau < kSyncSeqLen && ok; ++tau) {
            double r = 0.0;
            for (int n = 0; n < kSyncSeqLen; ++n)
                r += seq[static_cast<std::size_t>(n)] *
                     seq[static_cast<std::size_t>((n + tau) % kSyncSeqLen)];
            ok = (tau == 0) ? (r == 127.0) : (r == -1.0);
        }
        rep.check("m-sequence two-level autocorrelation (exact)", ok);
    }

    {  // Unitary FFT: norm preservation and round trip.
        Rng rng(11);
        Fft<double> fft(512);
        std::vector<cd> x(512);
        double norm_in = 0.0;
        for (auto& v : x) {
            v = rng.cgaussian(1.0);
            norm_in += std::norm(v);
        }
        auto y = x;
        fft.forward_unitary(y.data());
        double norm_out = 0.0;
        for (const auto& v : y) norm_out += std::norm(v);
        fft.inverse_unitary(y.data());
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            err = std::max(err, std::abs(y[i] - x[i]));
        rep.check("unitary FFT norm preservation",
                  std::abs(norm_out - norm_in) < 1e-9 * norm_in);
        rep.check("FFT round trip < 1e-10", err < 1e-10);
    }

    {  // OFDM modulate/demodulate round trip.
        Rng rng(12);
        const Numerology num;
        ResourceGrid grid(kSsbSubcarriers, kSsbSymbols);
        for (int r = 0; r < grid.rows(); ++r)
            for (int c = 0; c < grid.cols(); ++c) grid(r, c) = rng.cgaussian(1.0);
        const auto wave = modulate(grid, 136, num, 4);
        const auto back =
            demodulate(wave.channels[0], num, kSsbSymbols, 136, kSsbSubcarriers, 4);
        double err = 0.0;
        for (int r = 0; r < grid.rows(); ++r)
            for (int c = 0; c < grid.cols(); ++c)
                err = std::max(err, std::abs(grid(r, c) - back(r, c)));
        rep.check("OFDM modulate/demodulate round trip < 1e-10", err < 1e-10,
                  "max error " + std::to_string(err));
    }

    {  // Principal eigenpair vs. an independent dense solver.
        Rng rng(13);
        const int m = 16;
        Eigen::MatrixXcd a(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) a(r, c) = rng.cgaussian(1.0);
        const SpatialCovariance cov{a * a.adjoint() +
                                    Eigen::MatrixXcd::Identity(m, m)};
        const auto pre = eigen_precoder(cov);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov.r);
        const double lam_ref = es.eigenvalues().maxCoeff();
        // The precoder is the conjugated eigenvector, so rate it on the
        // conjugate covariance (same spectrum).
        const double lam_hat =
            std::real(cd((pre.p.adjoint() * cov.r.conjugate() * pre.p)(0, 0)));
        rep.check("dominant eigenpair matches dense solver (1e-6)",
                  std::abs(lam_hat - lam_ref) < 1e-6 * lam_ref);
    }

    {  // Empirical Gaussian ROC anchor: PD at PFA 0.1 for a 2-sigma shift.
        Rng rng(14);
        std::vector<double> h0(20000), h1(20000);
        for (auto& v : h0) v = rng.gaussian();
        for (auto& v : h1) v = 2.0 + rng.gaussian();
        const auto roc = roc_curve(h0, h1);
        const double pd = pd_at_pfa(roc, 0.1);
        rep.check("Gaussian ROC: PD(PFA=0.1, 2-sigma shift) = 0.762 +- 0.02",
                  std::abs(pd - 0.7616) < 0.02, "measured " + std::to_string(pd));
    }

    {  // Config snapshot fixpoint.
        ScenarioConfig x;
        x.mode = Mode::kCsi;
        x.gnb_array = ArrayGeometry{8, 8, 2};
        x.tx_power_dbm = 19.0;
        const auto once = config_to_json(parse_config_json(config_to_json(x)));
        rep.check("config emit/parse fixpoint",
                  once == config_to_json(x) &&
                      config_to_json(parse_config_json(once)) == once);
    }

    {  // CSV rendering is a pure function of the data.
        RocCurve c;
        c.points = {{0.0, 0.0}, {1.0 / 3.0, 0.9}, {1.0, 1.0}};
        c.n_h0 = c.n_h1 = 3;
        const std::map<RocKey, RocCurve> curves{{RocKey{"eve", "energy", "csi"}, c}};
        rep.check("CSV emission deterministic",
                  roc_csv_string(curves, 16) == roc_csv_string(curves, 16));
    }

    {  // Link budget constant: thermal noise at NF 7 dB over 15.36 MHz.
        const auto b = link_budget(28.0, 85.28, 7.0, 15.36e6);
        rep.check("noise floor -95.14 dBm (NF 7, 15.36 MHz)",
                  std::abs(mw_to_dbm(b.noise_variance) - (-95.14)) < 0.01);
    }

    std::printf("%s\n", rep.failures == 0 ? "selftest passed" : "selftest FAILED");
    return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stealthsim — 5G NR SSB detectability simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a Monte Carlo campaign");
    std::string config_path, mode_str, out_dir = "out";
    std::uint64_t seed = 0;
    int trials = 0;
    bool dump_iq = false;
    run->add_option("--config", config_path, "JSON config file (defaults apply if omitted)")
        ->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed", seed, "override the campaign seed");
    auto* trials_opt =
        run->add_option("--trials", trials, "override the trial count")
            ->check(CLI::PositiveNumber);
    run->add_option("--mode", mode_str, "baseline | csi | both")
        ->check(CLI::IsMember({"baseline", "csi", "both"}));
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_flag("--dump-iq", dump_iq,
                  "also write trial-0 receive streams as little-endian float32 I/Q");

    auto* plot = app.add_subcommand("plot", "render an existing roc.csv as SVG");
    std::string plot_in, plot_out;
    plot->add_option("--in", plot_in, "input roc.csv")
        ->required()
        ->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output SVG path")->required();

    auto* self = app.add_subcommand("selftest", "run fast built-in math checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, seed_opt->count() ? &seed : nullptr,
                               trials_opt->count() ? &trials : nullptr, mode_str,
                               out_dir, dump_iq);
        if (plot->parsed()) return plot_command(plot_in, plot_out);
        if (self->parsed()) return selftest_command();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
