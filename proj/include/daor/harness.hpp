#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "daor/channel.hpp"
#include "daor/design.hpp"
#include "daor/metrics.hpp"
#include "daor/parallel.hpp"
#include "daor/rng.hpp"

namespace daor {

constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Threshold entry: a number, or the per-realization lambda_max token.
struct GammaSpec {
    bool is_gamma_max = false;
    double value = 0.0;

    std::string label() const { return is_gamma_max ? "gamma_max" : nlohmann::json(value).dump(); }
};

/// Declarative experiment description; file defaults reproduce the reference
/// desk-scale setup (16x8 half-wavelength arrays, 4 streams, 45/75 degree
/// angle pair, 0 dB K-factor, 20 paths).
struct ExperimentConfig {
    ChannelConfig channel;
    double rician_k_db = 0.0;
    double fake_angle_deg = 75.0;
    int n_streams = 4;
    double power_p = 1.0;
    double boundary_tol_eps = 1e-6;
    double min_angle_sep_deg = 0.5;
    std::vector<double> snr_db_list = {10.0};
    std::vector<GammaSpec> gamma_th_list = {GammaSpec{false, 2.0}};
    std::string strategy = "os";
    int ss_shortlist_q = 10;
    std::vector<int> q_list = {1, 10};
    int trials = 200;
    std::uint64_t master_seed = 1;
    int workers = 1;
    double grid_step_deg = 0.25;

    void validate() const {
        channel.validate();
        if (!(fake_angle_deg >= 0.0 && fake_angle_deg <= 180.0))
            throw ConfigError("config: design.fake_angle_deg must lie in [0, 180]");
        if (std::abs(fake_angle_deg - channel.true_angle_phi_deg) < min_angle_sep_deg)
            throw ConfigError("config: |true_angle_deg - fake_angle_deg| must be >= " +
                              std::to_string(min_angle_sep_deg));
        const int cap =
            std::min(channel.tx_geometry.n_elements, channel.rx_geometry.n_elements);
        if (n_streams < 1 || n_streams > cap)
            throw ConfigError("config: design.n_streams must lie in [1, min(n_tx, n_rx)] = [1, " +
                              std::to_string(cap) + "]");
        if (!(power_p > 0.0)) throw ConfigError("config: design.power must be > 0");
        if (!(boundary_tol_eps > 0.0)) throw ConfigError("config: design.boundary_tol_eps must be > 0");
        if (!(min_angle_sep_deg >= 0.0)) throw ConfigError("config: design.min_angle_sep_deg must be >= 0");
        if (snr_db_list.empty()) throw ConfigError("config: snr_db_list must be non-empty");
        for (double s : snr_db_list)
            if (!std::isfinite(s)) throw ConfigError("config: snr_db_list entries must be finite");
        if (gamma_th_list.empty()) throw ConfigError("config: gamma_th_list must be non-empty");
        for (const auto& g : gamma_th_list)
            if (!g.is_gamma_max && (!std::isfinite(g.value) || g.value < 0.0))
                throw ConfigError("config: numeric gamma_th entries must be finite and >= 0");
        if (strategy != "os" && strategy != "ss")
            throw ConfigError("config: strategy must be \"os\" or \"ss\"");
        const std::uint64_t n_subsets =
            binomial_exact(channel.tx_geometry.n_elements, n_streams);
        if (ss_shortlist_q < 1 || static_cast<std::uint64_t>(ss_shortlist_q) > n_subsets)
            throw ConfigError("config: q must lie in [1, C(n_tx, n_streams)] = [1, " +
                              std::to_string(n_subsets) + "]");
        if (q_list.empty()) throw ConfigError("config: q_list must be non-empty");
        for (int q : q_list)
            if (q < 1 || static_cast<std::uint64_t>(q) > n_subsets)
                throw ConfigError("config: q_list entries must lie in [1, C(n_tx, n_streams)]");
        if (trials < 1) throw ConfigError("config: trials must be >= 1");
        if (workers < 1) throw ConfigError("config: workers must be >= 1");
        if (!(grid_step_deg > 0.0 && grid_step_deg <= 5.0))
            throw ConfigError("config: beampattern_grid_step_deg must lie in (0, 5]");
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const char* where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: field \"") + key + "\" in " + where +
                          " has the wrong type");
    }
}

}  // namespace detail

/// Builds an ExperimentConfig from parsed JSON. Unknown keys are a hard
/// error; dB-to-linear conversions happen here and nowhere else.
inline ExperimentConfig config_from_json(const nlohmann::json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
    detail::reject_unknown_keys(root,
                                {"schema_version", "channel", "design", "snr_db_list",
                                 "gamma_th_list", "strategy", "q", "q_list", "trials",
                                 "master_seed", "workers", "beampattern_grid_step_deg"},
                                "the top level");
    ExperimentConfig ec;
    ec.channel.tx_geometry = ArrayGeometry{16, 0.5, 1.0};
    ec.channel.rx_geometry = ArrayGeometry{8, 0.5, 1.0};
    ec.channel.true_angle_phi_deg = 45.0;
    ec.channel.n_paths_l = 20;

    const int declared = detail::get_or<int>(root, "schema_version", kSchemaVersion, "the top level");
    if (declared != kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(declared));

    if (root.contains("channel")) {
        const auto& ch = root.at("channel");
        if (!ch.is_object()) throw ConfigError("config: \"channel\" must be an object");
        detail::reject_unknown_keys(ch,
                                    {"n_tx", "n_rx", "spacing_d", "wavelength", "true_angle_deg",
                                     "rician_k_db", "n_paths"},
                                    "\"channel\"");
        ec.channel.tx_geometry.n_elements = detail::get_or<int>(ch, "n_tx", 16, "channel");
        ec.channel.rx_geometry.n_elements = detail::get_or<int>(ch, "n_rx", 8, "channel");
        const double d = detail::get_or<double>(ch, "spacing_d", 0.5, "channel");
        const double wl = detail::get_or<double>(ch, "wavelength", 1.0, "channel");
        ec.channel.tx_geometry.spacing_d = ec.channel.rx_geometry.spacing_d = d;
        ec.channel.tx_geometry.wavelength_lambda = ec.channel.rx_geometry.wavelength_lambda = wl;
        ec.channel.true_angle_phi_deg = detail::get_or<double>(ch, "true_angle_deg", 45.0, "channel");
        ec.rician_k_db = detail::get_or<double>(ch, "rician_k_db", 0.0, "channel");
        ec.channel.n_paths_l = detail::get_or<int>(ch, "n_paths", 20, "channel");
    }
    if (!std::isfinite(ec.rician_k_db)) throw ConfigError("config: channel.rician_k_db must be finite");
    ec.channel.rician_k_linear = std::pow(10.0, ec.rician_k_db / 10.0);

    if (root.contains("design")) {
        const auto& de = root.at("design");
        if (!de.is_object()) throw ConfigError("config: \"design\" must be an object");
        detail::reject_unknown_keys(de,
                                    {"n_streams", "fake_angle_deg", "power", "boundary_tol_eps",
                                     "min_angle_sep_deg"},
                                    "\"design\"");
        ec.n_streams = detail::get_or<int>(de, "n_streams", 4, "design");
        ec.fake_angle_deg = detail::get_or<double>(de, "fake_angle_deg", 75.0, "design");
        ec.power_p = detail::get_or<double>(de, "power", 1.0, "design");
        ec.boundary_tol_eps = detail::get_or<double>(de, "boundary_tol_eps", 1e-6, "design");
        ec.min_angle_sep_deg = detail::get_or<double>(de, "min_angle_sep_deg", 0.5, "design");
    }

    if (root.contains("snr_db_list"))
        ec.snr_db_list = detail::get_or<std::vector<double>>(root, "snr_db_list", {}, "the top level");
    if (root.contains("gamma_th_list")) {
        const auto& gl = root.at("gamma_th_list");
        if (!gl.is_array()) throw ConfigError("config: gamma_th_list must be an array");
        ec.gamma_th_list.clear();
        for (const auto& entry : gl) {
            if (entry.is_string()) {
                if (entry.get<std::string>() != "gamma_max")
                    throw ConfigError("config: the only string gamma_th entry is \"gamma_max\"");
                ec.gamma_th_list.push_back(GammaSpec{true, 0.0});
            } else if (entry.is_number()) {
                ec.gamma_th_list.push_back(GammaSpec{false, entry.get<double>()});
            } else {
                throw ConfigError("config: gamma_th_list entries must be numbers or \"gamma_max\"");
            }
        }
    }
    ec.strategy = detail::get_or<std::string>(root, "strategy", "os", "the top level");
    ec.ss_shortlist_q = detail::get_or<int>(root, "q", 10, "the top level");
    if (root.contains("q_list"))
        ec.q_list = detail::get_or<std::vector<int>>(root, "q_list", {}, "the top level");
    ec.trials = detail::get_or<int>(root, "trials", 200, "the top level");
    ec.master_seed = detail::get_or<std::uint64_t>(root, "master_seed", 1, "the top level");
    ec.workers = detail::get_or<int>(root, "workers", 1, "the top level");
    ec.grid_step_deg =
        detail::get_or<double>(root, "beampattern_grid_step_deg", 0.25, "the top level");

    ec.validate();
    return ec;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: parse error in \"" + path + "\": " + e.what());
    }
    return config_from_json(root);
}

/// Resolved-config echo that accompanies every JSON record.
inline nlohmann::json config_echo(const ExperimentConfig& ec) {
    nlohmann::json gl = nlohmann::json::array();
    for (const auto& g : ec.gamma_th_list) {
        if (g.is_gamma_max)
            gl.push_back("gamma_max");
        else
            gl.push_back(g.value);
    }
    return nlohmann::json{
        {"schema_version", kSchemaVersion},
        {"channel",
         {{"n_tx", ec.channel.tx_geometry.n_elements},
          {"n_rx", ec.channel.rx_geometry.n_elements},
          {"spacing_d", ec.channel.tx_geometry.spacing_d},
          {"wavelength", ec.channel.tx_geometry.wavelength_lambda},
          {"true_angle_deg", ec.channel.true_angle_phi_deg},
          {"rician_k_db", ec.rician_k_db},
          {"rician_k_linear", ec.channel.rician_k_linear},
          {"n_paths", ec.channel.n_paths_l}}},
        {"design",
         {{"n_streams", ec.n_streams},
          {"fake_angle_deg", ec.fake_angle_deg},
          {"power", ec.power_p},
          {"boundary_tol_eps", ec.boundary_tol_eps},
          {"min_angle_sep_deg", ec.min_angle_sep_deg}}},
        {"snr_db_list", ec.snr_db_list},
        {"gamma_th_list", gl},
        {"strategy", ec.strategy},
        {"q", ec.ss_shortlist_q},
        {"q_list", ec.q_list},
        {"trials", ec.trials},
        {"master_seed", ec.master_seed},
        {"workers", ec.workers},
        {"beampattern_grid_step_deg", ec.grid_step_deg}};
}

inline DesignConfig design_config_for(const ExperimentConfig& ec, double snr_db, double gamma_th) {
    DesignConfig dc;
    dc.gamma_th = gamma_th;
    dc.power_p = ec.power_p;
    dc.noise_n0 = ec.power_p / std::pow(10.0, snr_db / 10.0);
    dc.n_streams = ec.n_streams;
    dc.phi_deg = ec.channel.true_angle_phi_deg;
    dc.phi_hat_deg = ec.fake_angle_deg;
    dc.boundary_tol_eps = ec.boundary_tol_eps;
    dc.ss_shortlist_q = ec.ss_shortlist_q;
    dc.min_angle_sep_deg = ec.min_angle_sep_deg;
    return dc;
}

namespace detail {

struct MeanStd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = 0.0;
    long count = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    ms.count = static_cast<long>(xs.size());
    if (xs.empty()) return ms;
    double acc = 0.0;
    for (double x : xs) acc += x;
    ms.mean = acc / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double sq = 0.0;
        for (double x : xs) sq += (x - ms.mean) * (x - ms.mean);
        ms.stddev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
    }
    return ms;
}

/// Deterministic number rendering shared by the CSV and JSON writers
/// (shortest round-trip form, "." decimal separator).
inline std::string render_number(double x) {
    if (!std::isfinite(x)) return "";
    return nlohmann::json(x).dump();
}

inline std::string iso8601_utc_now() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// design: one seeded realization, full JSON record
// ---------------------------------------------------------------------------

struct DesignRun {
    nlohmann::json record;
    DesignOutcome outcome;
    double wall_ms = 0.0;
};

/// Designs one precoder for trial `trial_index` (channel seed =
/// mix_seed(master_seed, trial_index)) at the first SNR and threshold entries.
inline DesignRun run_design(const ExperimentConfig& ec, std::uint64_t trial_index = 0) {
    ec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t channel_seed = mix_seed(ec.master_seed, trial_index);
    const ChannelRealization h = sample_channel(ec.channel, channel_seed);
    const double snr_db = ec.snr_db_list.front();
    const GammaSpec gspec = ec.gamma_th_list.front();

    DesignConfig dc = design_config_for(ec, snr_db, 0.0);
    const PrivacyQuadratics q = build_quadratic_forms(h, dc);
    dc.gamma_th = gspec.is_gamma_max ? q.lambda_max : gspec.value;

    const DesignOutcome outcome =
        ec.strategy == "os" ? design_os(h, dc, ec.workers) : design_ss(h, dc, ec.workers);

    const ComplexMatrix& w = outcome.precoder.matrix_w;
    std::vector<double> w_re, w_im;
    w_re.reserve(static_cast<size_t>(w.size()));
    w_im.reserve(static_cast<size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w_re.push_back(w(r, c).real());
            w_im.push_back(w(r, c).imag());
        }

    DesignRun run;
    run.outcome = outcome;
    run.record = nlohmann::json{
        {"schema_version", kSchemaVersion},
        {"command", "design"},
        {"config", config_echo(ec)},
        {"trial_index", trial_index},
        {"channel_seed", channel_seed},
        {"snr_db", snr_db},
        {"gamma_th", gspec.is_gamma_max ? nlohmann::json("gamma_max") : nlohmann::json(gspec.value)},
        {"gamma_th_resolved", dc.gamma_th},
        {"lambda_min", q.lambda_min},
        {"lambda_max", q.lambda_max},
        {"case", to_string(outcome.case_label)},
        {"strategy", to_string(outcome.strategy)},
        {"chosen_indices", outcome.chosen_indices},
        {"achieved_gamma", outcome.achieved_gamma},
        {"rate_bits", outcome.rate_bits},
        {"effective_streams", outcome.precoder.effective_streams()},
        {"solver_calls", outcome.solver_calls},
        {"precoder",
         {{"rows", w.rows()}, {"cols", w.cols()}, {"power", outcome.precoder.power_budget_p},
          {"re", w_re}, {"im", w_im}}}};
    run.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

// ---------------------------------------------------------------------------
// sweep: SNR x gamma_th grid of seeded Monte Carlo cells
// ---------------------------------------------------------------------------

struct SweepRow {
    double snr_db = 0.0;
    std::string gamma_label;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    long trials_used = 0;
    long n_infeasible = 0;
};

struct CellTiming {
    double snr_db = 0.0;
    std::string gamma_label;
    double mean_design_wall_ms = 0.0;
};

struct SweepOutput {
    std::vector<SweepRow> rows;
    std::vector<CellTiming> timing;
};

namespace detail {

struct TrialRecord {
    bool infeasible = false;
    double rate = 0.0;
    double gamma = 0.0;
    double lambda_max = 0.0;
    double solver_calls = 0.0;
    double wall_ms = 0.0;
};

inline TrialRecord sweep_trial(const ExperimentConfig& ec, double snr_db, const GammaSpec& gspec,
                               std::uint64_t trial_index, bool use_ss) {
    const ChannelRealization h = sample_channel(ec.channel, mix_seed(ec.master_seed, trial_index));
    DesignConfig dc = design_config_for(ec, snr_db, 0.0);
    const PrivacyQuadratics q = build_quadratic_forms(h, dc);
    dc.gamma_th = gspec.is_gamma_max ? q.lambda_max : gspec.value;

    TrialRecord rec;
    rec.lambda_max = q.lambda_max;
    try {
        const DesignOutcome out = use_ss ? design_ss(h, dc, 1) : design_os(h, dc, 1);
        rec.rate = out.rate_bits;
        rec.gamma = out.achieved_gamma;
        rec.solver_calls = static_cast<double>(out.solver_calls);
        rec.wall_ms = out.wall_time_ms;
    } catch (const InfeasiblePrivacy&) {
        rec.infeasible = true;
    }
    return rec;
}

}  // namespace detail

/// Cartesian SNR x gamma grid; per cell, `trials` independent draws with the
/// published per-trial seeds. Trials run in parallel; aggregation reduces in
/// trial order, so all statistics are worker-count independent.
inline SweepOutput run_sweep(const ExperimentConfig& ec) {
    ec.validate();
    const bool use_ss = ec.strategy == "ss";
    const std::size_t n_cells = ec.snr_db_list.size() * ec.gamma_th_list.size();
    const std::size_t n_trials = static_cast<std::size_t>(ec.trials);
    std::vector<detail::TrialRecord> records(n_cells * n_trials);

    parallel_chunks(records.size(), ec.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t cell = k / n_trials;
            const std::size_t trial = k % n_trials;
            const double snr_db = ec.snr_db_list[cell / ec.gamma_th_list.size()];
            const GammaSpec& gspec = ec.gamma_th_list[cell % ec.gamma_th_list.size()];
            records[k] = detail::sweep_trial(ec, snr_db, gspec, trial, use_ss);
        }
    });

    SweepOutput out;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const double snr_db = ec.snr_db_list[cell / ec.gamma_th_list.size()];
        const GammaSpec& gspec = ec.gamma_th_list[cell % ec.gamma_th_list.size()];
        std::vector<double> rates, gammas, lmaxes, calls, walls;
        long infeasible = 0;
        for (std::size_t t = 0; t < n_trials; ++t) {
            const auto& rec = records[cell * n_trials + t];
            lmaxes.push_back(rec.lambda_max);
            if (rec.infeasible) {
                ++infeasible;
                continue;
            }
            rates.push_back(rec.rate);
            gammas.push_back(rec.gamma);
            calls.push_back(rec.solver_calls);
            walls.push_back(rec.wall_ms);
        }
        auto push = [&](const char* metric, const detail::MeanStd& ms) {
            out.rows.push_back(SweepRow{snr_db, gspec.label(), metric, ms.mean, ms.stddev,
                                        ms.count, infeasible});
        };
        push("rate_bits", detail::mean_std(rates));
        push("achieved_gamma", detail::mean_std(gammas));
        push("gamma_max", detail::mean_std(lmaxes));
        push("solver_calls", detail::mean_std(calls));
        out.timing.push_back(CellTiming{snr_db, gspec.label(), detail::mean_std(walls).mean});
    }
    return out;
}

inline std::string sweep_to_csv(const SweepOutput& out) {
    std::string csv = "schema_version,snr_db,gamma_th,metric,mean,std,trials_used,n_infeasible\n";
    for (const auto& r : out.rows) {
        csv += std::to_string(kSchemaVersion) + "," + detail::render_number(r.snr_db) + "," +
               r.gamma_label + "," + r.metric + "," + detail::render_number(r.mean) + "," +
               detail::render_number(r.stddev) + "," + std::to_string(r.trials_used) + "," +
               std::to_string(r.n_infeasible) + "\n";
    }
    return csv;
}

inline nlohmann::json sweep_to_json(const ExperimentConfig& ec, const SweepOutput& out) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : out.rows)
        rows.push_back(nlohmann::json{{"snr_db", r.snr_db},
                                      {"gamma_th", r.gamma_label},
                                      {"metric", r.metric},
                                      {"mean", std::isfinite(r.mean) ? nlohmann::json(r.mean)
                                                                     : nlohmann::json()},
                                      {"std", r.stddev},
                                      {"trials_used", r.trials_used},
                                      {"n_infeasible", r.n_infeasible}});
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"command", "sweep"},
                          {"config", config_echo(ec)},
                          {"rows", rows}};
}

// ---------------------------------------------------------------------------
// beampattern: one seeded design, Bartlett spectrum plus angle markers
// ---------------------------------------------------------------------------

struct BeampatternRun {
    Beampattern pattern;
    double b_true_db = 0.0;
    double b_fake_db = 0.0;
    double achieved_gamma = 0.0;
    double gamma_th_resolved = 0.0;
    DirectionVerdict verdict = DirectionVerdict::Ambiguous;
    DesignOutcome outcome;
};

inline BeampatternRun run_beampattern(const ExperimentConfig& ec, std::uint64_t trial_index = 0) {
    ec.validate();
    const ChannelRealization h = sample_channel(ec.channel, mix_seed(ec.master_seed, trial_index));
    const double snr_db = ec.snr_db_list.front();
    const GammaSpec gspec = ec.gamma_th_list.front();
    DesignConfig dc = design_config_for(ec, snr_db, 0.0);
    const PrivacyQuadratics q = build_quadratic_forms(h, dc);
    dc.gamma_th = gspec.is_gamma_max ? q.lambda_max : gspec.value;

    BeampatternRun run;
    run.gamma_th_resolved = dc.gamma_th;
    run.outcome = ec.strategy == "os" ? design_os(h, dc, ec.workers) : design_ss(h, dc, ec.workers);
    run.achieved_gamma = run.outcome.achieved_gamma;

    const ComplexMatrix r = covariance(h, run.outcome.precoder, dc.noise_n0);
    run.pattern = beampattern(r, h.config.rx_geometry, ec.grid_step_deg);

    // Markers from the same covariance and peak normalization, at the exact angles.
    auto sample_db = [&](double theta) {
        const ComplexVector a = steering_vector(theta, h.config.rx_geometry);
        const ComplexVector ap = steering_vector(run.pattern.peak_angle_deg, h.config.rx_geometry);
        const double val = (a.adjoint() * r * a)(0, 0).real();
        const double peak = (ap.adjoint() * r * ap)(0, 0).real();
        return 10.0 * std::log10(val / peak);
    };
    run.b_true_db = sample_db(dc.phi_deg);
    run.b_fake_db = sample_db(dc.phi_hat_deg);
    run.verdict = dominant_direction(run.pattern, dc.phi_deg, dc.phi_hat_deg);
    return run;
}

inline std::string beampattern_to_csv(const ExperimentConfig& ec, const BeampatternRun& run) {
    std::string csv = "schema_version,kind,theta_deg,power_db\n";
    const auto& p = run.pattern;
    for (std::size_t i = 0; i < p.grid_deg.size(); ++i)
        csv += std::to_string(kSchemaVersion) + ",sample," + detail::render_number(p.grid_deg[i]) +
               "," + detail::render_number(p.power_db[i]) + "\n";
    csv += std::to_string(kSchemaVersion) + ",marker_true," +
           detail::render_number(ec.channel.true_angle_phi_deg) + "," +
           detail::render_number(run.b_true_db) + "\n";
    csv += std::to_string(kSchemaVersion) + ",marker_fake," +
           detail::render_number(ec.fake_angle_deg) + "," +
           detail::render_number(run.b_fake_db) + "\n";
    csv += std::to_string(kSchemaVersion) + ",peak," +
           detail::render_number(p.peak_angle_deg) + ",0.0\n";
    return csv;
}

inline nlohmann::json beampattern_to_json(const ExperimentConfig& ec, const BeampatternRun& run) {
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"command", "beampattern"},
                          {"config", config_echo(ec)},
                          {"gamma_th_resolved", run.gamma_th_resolved},
                          {"achieved_gamma", run.achieved_gamma},
                          {"b_true_db", run.b_true_db},
                          {"b_fake_db", run.b_fake_db},
                          {"verdict", to_string(run.verdict)},
                          {"peak_angle_deg", run.pattern.peak_angle_deg},
                          {"theta_deg", run.pattern.grid_deg},
                          {"power_db", run.pattern.power_db}};
}

// ---------------------------------------------------------------------------
// compare: OS vs SS-Q rate / solver-call / wall-time comparison
// ---------------------------------------------------------------------------

struct CompareRow {
    double snr_db = 0.0;
    std::string strategy_label;
    std::uint64_t q_budget = 0;
    double mean_rate = 0.0;
    double std_rate = 0.0;
    double mean_solver_calls = 0.0;
    double mean_achieved_gamma = 0.0;
    double reduction_fraction = 0.0;
    long trials_used = 0;
    long n_infeasible = 0;
    double mean_wall_ms = 0.0;  // timing sidecar only
};

/// One OS design plus one SS design per shortlist size in q_list, per trial
/// and SNR point, on shared channel draws.
inline std::vector<CompareRow> run_compare(const ExperimentConfig& ec) {
    ec.validate();
    const std::size_t n_strategies = 1 + ec.q_list.size();
    const std::size_t n_trials = static_cast<std::size_t>(ec.trials);
    const GammaSpec gspec = ec.gamma_th_list.front();

    struct Cellrec {
        bool infeasible = false;
        std::vector<double> rate, gamma, calls, wall;
    };

    std::vector<CompareRow> rows;
    for (double snr_db : ec.snr_db_list) {
        struct TrialOut {
            bool infeasible = false;
            std::vector<double> rate, gamma, calls, wall;
        };
        std::vector<TrialOut> outs(n_trials);
        parallel_chunks(n_trials, ec.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                const ChannelRealization h =
                    sample_channel(ec.channel, mix_seed(ec.master_seed, t));
                DesignConfig dc = design_config_for(ec, snr_db, 0.0);
                const PrivacyQuadratics q = build_quadratic_forms(h, dc);
                dc.gamma_th = gspec.is_gamma_max ? q.lambda_max : gspec.value;
                TrialOut& to = outs[t];
                try {
                    const DesignOutcome os = design_os(h, dc, 1);
                    to.rate.push_back(os.rate_bits);
                    to.gamma.push_back(os.achieved_gamma);
                    to.calls.push_back(static_cast<double>(os.solver_calls));
                    to.wall.push_back(os.wall_time_ms);
                    for (int quota : ec.q_list) {
                        DesignConfig dq = dc;
                        dq.ss_shortlist_q = quota;
                        const DesignOutcome ss = design_ss(h, dq, 1);
                        to.rate.push_back(ss.rate_bits);
                        to.gamma.push_back(ss.achieved_gamma);
                        to.calls.push_back(static_cast<double>(ss.solver_calls));
                        to.wall.push_back(ss.wall_time_ms);
                    }
                } catch (const InfeasiblePrivacy&) {
                    to.infeasible = true;
                }
            }
        });

        for (std::size_t s = 0; s < n_strategies; ++s) {
            std::vector<double> rates, gammas, calls, walls;
            long infeasible = 0;
            for (std::size_t t = 0; t < n_trials; ++t) {
                if (outs[t].infeasible) {
                    ++infeasible;
                    continue;
                }
                rates.push_back(outs[t].rate[s]);
                gammas.push_back(outs[t].gamma[s]);
                calls.push_back(outs[t].calls[s]);
                walls.push_back(outs[t].wall[s]);
            }
            CompareRow row;
            row.snr_db = snr_db;
            if (s == 0) {
                row.strategy_label = "os";
                row.q_budget =
                    binomial_exact(ec.channel.tx_geometry.n_elements, ec.n_streams);
                row.reduction_fraction = 0.0;
            } else {
                const int quota = ec.q_list[s - 1];
                row.strategy_label = "ss-" + std::to_string(quota);
                row.q_budget = static_cast<std::uint64_t>(quota);
                row.reduction_fraction =
                    complexity_report(ec.channel.tx_geometry.n_elements, ec.n_streams,
                                      static_cast<std::uint64_t>(quota))
                        .reduction_fraction;
            }
            const auto r = detail::mean_std(rates);
            row.mean_rate = r.mean;
            row.std_rate = r.stddev;
            row.mean_solver_calls = detail::mean_std(calls).mean;
            row.mean_achieved_gamma = detail::mean_std(gammas).mean;
            row.trials_used = r.count;
            row.n_infeasible = infeasible;
            row.mean_wall_ms = detail::mean_std(walls).mean;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string compare_to_csv(const std::vector<CompareRow>& rows) {
    std::string csv =
        "schema_version,snr_db,strategy,q,mean_rate_bits,std_rate_bits,mean_solver_calls,"
        "mean_achieved_gamma,reduction_fraction,trials_used,n_infeasible\n";
    for (const auto& r : rows) {
        csv += std::to_string(kSchemaVersion) + "," + detail::render_number(r.snr_db) + "," +
               r.strategy_label + "," + std::to_string(r.q_budget) + "," +
               detail::render_number(r.mean_rate) + "," + detail::render_number(r.std_rate) + "," +
               detail::render_number(r.mean_solver_calls) + "," +
               detail::render_number(r.mean_achieved_gamma) + "," +
               detail::render_number(r.reduction_fraction) + "," +
               std::to_string(r.trials_used) + "," + std::to_string(r.n_infeasible) + "\n";
    }
    return csv;
}

inline nlohmann::json compare_to_json(const ExperimentConfig& ec,
                                      const std::vector<CompareRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back(nlohmann::json{{"snr_db", r.snr_db},
                                     {"strategy", r.strategy_label},
                                     {"q", r.q_budget},
                                     {"mean_rate_bits", std::isfinite(r.mean_rate)
                                                            ? nlohmann::json(r.mean_rate)
                                                            : nlohmann::json()},
                                     {"std_rate_bits", r.std_rate},
                                     {"mean_solver_calls", r.mean_solver_calls},
                                     {"mean_achieved_gamma", r.mean_achieved_gamma},
                                     {"reduction_fraction", r.reduction_fraction},
                                     {"trials_used", r.trials_used},
                                     {"n_infeasible", r.n_infeasible}});
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"command", "compare"},
                          {"config", config_echo(ec)},
                          {"rows", arr}};
}

// ---------------------------------------------------------------------------
// bounds: feasible-DAOR band and boundary-precoder rate statistics
// ---------------------------------------------------------------------------

struct BoundsRow {
    double snr_db = 0.0;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    long trials = 0;
};

inline std::vector<BoundsRow> run_bounds(const ExperimentConfig& ec) {
    ec.validate();
    const std::size_t n_trials = static_cast<std::size_t>(ec.trials);
    std::vector<BoundsRow> rows;
    for (double snr_db : ec.snr_db_list) {
        struct Draw {
            double lmin, lmax, rate;
        };
        std::vector<Draw> draws(n_trials);
        parallel_chunks(n_trials, ec.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                const ChannelRealization h =
                    sample_channel(ec.channel, mix_seed(ec.master_seed, t));
                const DesignConfig dc = design_config_for(ec, snr_db, 0.0);
                const PrivacyQuadratics q = build_quadratic_forms(h, dc);
                const Precoder w = boundary_precoder(q.t_max, dc.power_p, dc.n_streams);
                draws[t] = Draw{q.lambda_min, q.lambda_max, achievable_rate(h, w, dc.noise_n0)};
            }
        });
        std::vector<double> lmins, lmaxes, rates;
        for (const auto& d : draws) {
            lmins.push_back(d.lmin);
            lmaxes.push_back(d.lmax);
            rates.push_back(d.rate);
        }
        auto push = [&](const char* metric, const detail::MeanStd& ms) {
            rows.push_back(BoundsRow{snr_db, metric, ms.mean, ms.stddev, ms.count});
        };
        push("lambda_min", detail::mean_std(lmins));
        push("lambda_max", detail::mean_std(lmaxes));
        push("rate_at_gamma_max", detail::mean_std(rates));
    }
    return rows;
}

inline std::string bounds_to_csv(const std::vector<BoundsRow>& rows) {
    std::string csv = "schema_version,snr_db,metric,mean,std,trials\n";
    for (const auto& r : rows)
        csv += std::to_string(kSchemaVersion) + "," + detail::render_number(r.snr_db) + "," +
               r.metric + "," + detail::render_number(r.mean) + "," +
               detail::render_number(r.stddev) + "," + std::to_string(r.trials) + "\n";
    return csv;
}

inline nlohmann::json bounds_to_json(const ExperimentConfig& ec,
                                     const std::vector<BoundsRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back(nlohmann::json{{"snr_db", r.snr_db},
                                     {"metric", r.metric},
                                     {"mean", r.mean},
                                     {"std", r.stddev},
                                     {"trials", r.trials}});
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"command", "bounds"},
                          {"config", config_echo(ec)},
                          {"rows", arr}};
}

// ---------------------------------------------------------------------------
// timing sidecar: timestamps and wall-clock measurements live here so the
// primary outputs stay byte-identical across reruns and worker counts
// ---------------------------------------------------------------------------

inline nlohmann::json timing_sidecar(const std::string& command, double wall_ms_total,
                                     const nlohmann::json& details = nlohmann::json::object()) {
    return nlohmann::json{{"schema_version", kSchemaVersion},
                          {"command", command},
                          {"created_utc", detail::iso8601_utc_now()},
                          {"wall_ms_total", wall_ms_total},
                          {"details", details}};
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file \"" + path + "\"");
    out << content;
}

}  // namespace daor
