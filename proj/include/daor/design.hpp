#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "daor/channel.hpp"
#include "daor/metrics.hpp"
#include "daor/numerics.hpp"
#include "daor/parallel.hpp"
#include "daor/powalloc.hpp"

namespace daor {

struct InfeasiblePrivacy : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoFeasibleSubset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DesignConfig {
    double gamma_th = 2.0;
    double power_p = 1.0;
    double noise_n0 = 0.1;
    int n_streams = 4;
    double phi_deg = 45.0;
    double phi_hat_deg = 75.0;
    double boundary_tol_eps = 1e-6;
    int ss_shortlist_q = 10;
    double min_angle_sep_deg = 0.5;

    void validate(const ChannelConfig& channel) const {
        if (!(gamma_th >= 0.0)) throw std::invalid_argument("DesignConfig: gamma_th must be >= 0");
        if (!(power_p > 0.0)) throw std::invalid_argument("DesignConfig: power_p must be > 0");
        if (!(noise_n0 > 0.0)) throw std::invalid_argument("DesignConfig: noise_n0 must be > 0");
        const int cap = std::min(channel.tx_geometry.n_elements, channel.rx_geometry.n_elements);
        if (n_streams < 1 || n_streams > cap)
            throw std::invalid_argument("DesignConfig: n_streams must lie in [1, min(N_T, N_R)] = [1, " +
                                        std::to_string(cap) + "]");
        if (!(phi_deg >= 0.0 && phi_deg <= 180.0) || !(phi_hat_deg >= 0.0 && phi_hat_deg <= 180.0))
            throw std::invalid_argument("DesignConfig: angles must lie in [0, 180] degrees");
        if (std::abs(phi_deg - phi_hat_deg) < min_angle_sep_deg)
            throw DegenerateAngles("DesignConfig: |phi - phi_hat| must be >= " +
                                   std::to_string(min_angle_sep_deg) + " degrees");
        if (!(boundary_tol_eps > 0.0))
            throw std::invalid_argument("DesignConfig: boundary_tol_eps must be > 0");
        if (ss_shortlist_q < 1) throw std::invalid_argument("DesignConfig: ss_shortlist_q must be >= 1");
    }
};

/// The pair of quadratic forms whose generalized Rayleigh quotient is the
/// obfuscation ratio, together with its extreme eigenpairs.
struct PrivacyQuadratics {
    ComplexMatrix a_fake;
    ComplexMatrix a_true;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    ComplexVector t_min;
    ComplexVector t_max;
};

enum class DesignCase { Infeasible, BoundaryMax, Unconstrained, Interior };
enum class Strategy { OS, SS, WaterFill, Boundary };

inline const char* to_string(DesignCase c) {
    switch (c) {
        case DesignCase::Infeasible: return "Infeasible";
        case DesignCase::BoundaryMax: return "BoundaryMax";
        case DesignCase::Unconstrained: return "Unconstrained";
        default: return "Interior";
    }
}
inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::OS: return "OS";
        case Strategy::SS: return "SS";
        case Strategy::WaterFill: return "WaterFill";
        default: return "Boundary";
    }
}

struct DesignOutcome {
    Precoder precoder;
    DesignCase case_label = DesignCase::Interior;
    double achieved_gamma = 0.0;
    double rate_bits = 0.0;
    std::vector<int> chosen_indices;
    long solver_calls = 0;
    double wall_time_ms = 0.0;
    Strategy strategy = Strategy::OS;
};

/// A_fake = H^H a_R(phi_hat) a_R(phi_hat)^H H + (N0/P) I and the analogous
/// A_true, with unit-norm steering vectors; the (N0/P) coefficient keeps the
/// trace-form ratio tr(W^H A_fake W)/tr(W^H A_true W) identical to the
/// covariance-based obfuscation ratio for every power-P precoder.
inline PrivacyQuadratics build_quadratic_forms(const ChannelRealization& h,
                                               const DesignConfig& cfg) {
    cfg.validate(h.config);
    const Eigen::Index n_tx = h.matrix_h.cols();
    const ComplexVector a_fake_rx = steering_vector(cfg.phi_hat_deg, h.config.rx_geometry);
    const ComplexVector a_true_rx = steering_vector(cfg.phi_deg, h.config.rx_geometry);
    const ComplexVector hf = h.matrix_h.adjoint() * a_fake_rx;
    const ComplexVector ht = h.matrix_h.adjoint() * a_true_rx;
    const double reg = cfg.noise_n0 / cfg.power_p;

    PrivacyQuadratics q;
    q.a_fake = hf * hf.adjoint();
    q.a_fake += reg * ComplexMatrix::Identity(n_tx, n_tx);
    q.a_true = ht * ht.adjoint();
    q.a_true += reg * ComplexMatrix::Identity(n_tx, n_tx);

    const GeneralizedEigenResult gen = generalized_eig(q.a_fake, q.a_true);
    q.lambda_max = gen.eigenvalues[0];
    q.lambda_min = gen.eigenvalues[gen.eigenvalues.size() - 1];
    q.t_max = gen.eigenvectors.col(0);
    q.t_min = gen.eigenvectors.col(gen.eigenvectors.cols() - 1);
    return q;
}

/// Rank-one precoder sqrt(P) t on the first stream, remaining streams zero.
inline Precoder boundary_precoder(const ComplexVector& t, double power_p, int n_streams) {
    if (n_streams < 1) throw std::invalid_argument("boundary_precoder: n_streams must be >= 1");
    if (!(power_p > 0.0)) throw std::invalid_argument("boundary_precoder: power must be > 0");
    const double norm = t.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("boundary_precoder: zero direction vector");
    ComplexMatrix w = ComplexMatrix::Zero(t.size(), n_streams);
    w.col(0) = (std::sqrt(power_p) / norm) * t;
    return Precoder{std::move(w), power_p};
}

/// Capacity-optimal precoder over the top singular modes of H: powers
/// p_k = max(0, mu - N0/sigma_k^2) with the water level mu located by
/// bisection and snapped so the powers sum to P exactly.
inline Precoder waterfill_precoder(const ChannelRealization& h, const DesignConfig& cfg) {
    cfg.validate(h.config);
    const int ns = cfg.n_streams;
    const double power = cfg.power_p;
    Eigen::JacobiSVD<ComplexMatrix> svd(h.matrix_h, Eigen::ComputeThinV);
    const RealVector sing = svd.singularValues();

    std::vector<double> inv_gain;  // N0 / sigma_k^2 for usable modes
    const double sigma_floor = 1e-14 * std::max(sing.size() > 0 ? sing[0] : 0.0, 0.0);
    for (int k = 0; k < ns && k < sing.size(); ++k)
        if (sing[k] > sigma_floor && sing[k] > 0.0)
            inv_gain.push_back(cfg.noise_n0 / (sing[k] * sing[k]));

    RealVector powers = RealVector::Zero(ns);
    if (inv_gain.empty()) {
        powers.setConstant(power / ns);  // degenerate channel: rate is zero anyway
    } else {
        double lo = *std::min_element(inv_gain.begin(), inv_gain.end());
        double hi = *std::max_element(inv_gain.begin(), inv_gain.end()) + power;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double total = 0.0;
            for (double c : inv_gain) total += std::max(0.0, mid - c);
            (total < power ? lo : hi) = mid;
        }
        // Exact water level on the active set found by the bisection.
        double c_sum = 0.0;
        int active = 0;
        for (double c : inv_gain)
            if (hi - c > 0.0) {
                c_sum += c;
                ++active;
            }
        const double mu = (power + c_sum) / active;
        double total = 0.0;
        for (size_t k = 0; k < inv_gain.size(); ++k) {
            powers[static_cast<Eigen::Index>(k)] = std::max(0.0, mu - inv_gain[k]);
            total += powers[static_cast<Eigen::Index>(k)];
        }
        powers *= power / total;
    }

    ComplexMatrix w = ComplexMatrix::Zero(h.matrix_h.cols(), ns);
    const Eigen::Index v_cols = svd.matrixV().cols();
    for (int k = 0; k < ns; ++k) {
        if (powers[k] <= 0.0) continue;
        if (k >= v_cols) throw NumericsError("waterfill_precoder: SVD returned too few modes");
        w.col(k) = std::sqrt(powers[k]) * svd.matrixV().col(k);
    }
    return Precoder{std::move(w), power};
}

/// Four-way dispatch on the threshold location, checked in this order:
/// above the band (infeasible), on the upper edge, at or below the lower
/// eigenvalue (constraint inactive), strictly inside.
inline DesignCase classify_case(const PrivacyQuadratics& q, const DesignConfig& cfg) {
    const double eps = cfg.boundary_tol_eps * std::max(1.0, q.lambda_max);
    if (cfg.gamma_th > q.lambda_max + eps) return DesignCase::Infeasible;
    if (std::abs(cfg.gamma_th - q.lambda_max) <= eps) return DesignCase::BoundaryMax;
    if (cfg.gamma_th <= q.lambda_min) return DesignCase::Unconstrained;
    return DesignCase::Interior;
}

/// Eigenbasis of the privacy matrix A_fake - gamma_th A_true, eigenvalues
/// descending.
inline std::pair<ComplexMatrix, RealVector> privacy_modes(const PrivacyQuadratics& q,
                                                          double gamma_th) {
    const ComplexMatrix m = q.a_fake - gamma_th * q.a_true;
    HermitianEigenResult eig = hermitian_eig(m);
    return {std::move(eig.eigenvectors), std::move(eig.eigenvalues)};
}

struct ComplexityReport {
    std::uint64_t os_calls = 0;
    std::uint64_t ss_calls = 0;
    double reduction_fraction = 0.0;
};

inline std::uint64_t binomial_exact(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::invalid_argument("binomial_exact: need 0 <= k <= n");
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("binomial_exact: result exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

/// Solver-call budget of the exhaustive strategy vs a Q-shortlist.
inline ComplexityReport complexity_report(int n_t, int n_s, std::uint64_t q) {
    ComplexityReport rep;
    rep.os_calls = binomial_exact(n_t, n_s);
    if (q < 1 || q > rep.os_calls)
        throw std::invalid_argument("complexity_report: q must lie in [1, C(n_t, n_s)]");
    rep.ss_calls = q;
    rep.reduction_fraction = 1.0 - static_cast<double>(q) / static_cast<double>(rep.os_calls);
    return rep;
}

namespace detail {

template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
    std::vector<int> c(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) c[static_cast<size_t>(i)] = i;
    while (true) {
        fn(c);
        int i = k - 1;
        while (i >= 0 && c[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++c[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) c[static_cast<size_t>(j)] = c[static_cast<size_t>(j - 1)] + 1;
    }
}

struct SubsetEval {
    double rate = -std::numeric_limits<double>::infinity();
    RealVector powers;
    bool ok = false;
};

struct InteriorContext {
    ComplexMatrix modes_u;           // eigenbasis of the privacy matrix
    RealVector mode_lambdas;         // descending
    ComplexMatrix hu;                // H * U, shared across subsets
    std::vector<std::vector<int>> subsets;  // lex order, feasibility-filtered
};

inline InteriorContext make_interior_context(const ChannelRealization& h, const DesignConfig& cfg,
                                             const PrivacyQuadratics& q) {
    InteriorContext ctx;
    auto [u, lam] = privacy_modes(q, cfg.gamma_th);
    ctx.modes_u = std::move(u);
    ctx.mode_lambdas = std::move(lam);
    ctx.hu = h.matrix_h * ctx.modes_u;
    const int n_tx = static_cast<int>(ctx.modes_u.cols());
    for_each_combination(n_tx, cfg.n_streams, [&](const std::vector<int>& idx) {
        double lam_max = -std::numeric_limits<double>::infinity();
        for (int i : idx) lam_max = std::max(lam_max, ctx.mode_lambdas[i]);
        if (lam_max >= 0.0) ctx.subsets.push_back(idx);
    });
    if (ctx.subsets.empty())
        throw NoFeasibleSubset(
            "design: no eigenmode subset can satisfy the privacy constraint (unreachable when "
            "gamma_th <= lambda_max)");
    return ctx;
}

inline AllocationProblem subset_problem(const InteriorContext& ctx, const std::vector<int>& idx,
                                        const DesignConfig& cfg) {
    AllocationProblem prob;
    prob.effective_channel_g.resize(ctx.hu.rows(), static_cast<Eigen::Index>(idx.size()));
    prob.lambdas.resize(static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) {
        prob.effective_channel_g.col(static_cast<Eigen::Index>(k)) = ctx.hu.col(idx[k]);
        prob.lambdas[static_cast<Eigen::Index>(k)] = ctx.mode_lambdas[idx[k]];
    }
    prob.total_power = cfg.power_p;
    prob.noise_n0 = cfg.noise_n0;
    return prob;
}

inline Precoder assemble_precoder(const InteriorContext& ctx, const std::vector<int>& idx,
                                  const RealVector& powers, double total_power) {
    ComplexMatrix w(ctx.modes_u.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k)
        w.col(static_cast<Eigen::Index>(k)) =
            std::sqrt(std::max(powers[static_cast<Eigen::Index>(k)], 0.0)) *
            ctx.modes_u.col(idx[k]);
    return Precoder{std::move(w), total_power};
}

inline DesignOutcome finish_outcome(const ChannelRealization& h, const DesignConfig& cfg,
                                    Precoder precoder, DesignCase case_label, Strategy strategy,
                                    std::vector<int> chosen, long solver_calls,
                                    std::chrono::steady_clock::time_point t0) {
    DesignOutcome out;
    out.rate_bits = achievable_rate(h, precoder, cfg.noise_n0);
    out.achieved_gamma =
        obfuscation_ratio(h, precoder, cfg.noise_n0, cfg.phi_deg, cfg.phi_hat_deg, cfg.min_angle_sep_deg);
    out.precoder = std::move(precoder);
    out.case_label = case_label;
    out.strategy = strategy;
    out.chosen_indices = std::move(chosen);
    out.solver_calls = solver_calls;
    out.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    return out;
}

}  // namespace detail

/// Exhaustive strategy: evaluate every feasibility-filtered eigenmode subset
/// with the allocation solver and keep the best rate (ties resolved toward
/// the lexicographically smallest index set). Subset evaluation may run on
/// several workers; the reduction is order-independent.
inline DesignOutcome design_os(const ChannelRealization& h, const DesignConfig& cfg,
                               int workers = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    const PrivacyQuadratics q = build_quadratic_forms(h, cfg);
    switch (classify_case(q, cfg)) {
        case DesignCase::Infeasible:
            throw InfeasiblePrivacy("design_os: gamma_th " + std::to_string(cfg.gamma_th) +
                                    " exceeds lambda_max " + std::to_string(q.lambda_max));
        case DesignCase::BoundaryMax:
            return detail::finish_outcome(h, cfg,
                                          boundary_precoder(q.t_max, cfg.power_p, cfg.n_streams),
                                          DesignCase::BoundaryMax, Strategy::Boundary, {}, 0, t0);
        case DesignCase::Unconstrained:
            return detail::finish_outcome(h, cfg, waterfill_precoder(h, cfg),
                                          DesignCase::Unconstrained, Strategy::WaterFill, {}, 0,
                                          t0);
        case DesignCase::Interior: break;
    }

    const detail::InteriorContext ctx = detail::make_interior_context(h, cfg, q);
    std::vector<detail::SubsetEval> evals(ctx.subsets.size());
    parallel_chunks(ctx.subsets.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const AllocationResult res =
                solve_power_allocation(detail::subset_problem(ctx, ctx.subsets[i], cfg));
            evals[i] = detail::SubsetEval{res.rate_bits, res.powers, res.feasible};
        }
    });

    std::size_t best = ctx.subsets.size();
    for (std::size_t i = 0; i < evals.size(); ++i) {
        if (!evals[i].ok) continue;
        if (best == ctx.subsets.size() || evals[i].rate > evals[best].rate) best = i;
    }
    if (best == ctx.subsets.size())
        throw NoFeasibleSubset("design_os: every allocation solve failed its certificate");

    return detail::finish_outcome(
        h, cfg, detail::assemble_precoder(ctx, ctx.subsets[best], evals[best].powers, cfg.power_p),
        DesignCase::Interior, Strategy::OS, ctx.subsets[best],
        static_cast<long>(ctx.subsets.size()), t0);
}

/// Shortlist strategy: rank all filtered subsets by their equal-power rate,
/// then run the allocation solver down the ranking until Q subsets have been
/// solved with a valid certificate (batching keeps the invocation set
/// independent of the worker count). Falls back to the lambda_max boundary
/// precoder if nothing solves.
inline DesignOutcome design_ss(const ChannelRealization& h, const DesignConfig& cfg,
                               int workers = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    const PrivacyQuadratics q = build_quadratic_forms(h, cfg);
    switch (classify_case(q, cfg)) {
        case DesignCase::Infeasible:
            throw InfeasiblePrivacy("design_ss: gamma_th " + std::to_string(cfg.gamma_th) +
                                    " exceeds lambda_max " + std::to_string(q.lambda_max));
        case DesignCase::BoundaryMax:
            return detail::finish_outcome(h, cfg,
                                          boundary_precoder(q.t_max, cfg.power_p, cfg.n_streams),
                                          DesignCase::BoundaryMax, Strategy::Boundary, {}, 0, t0);
        case DesignCase::Unconstrained:
            return detail::finish_outcome(h, cfg, waterfill_precoder(h, cfg),
                                          DesignCase::Unconstrained, Strategy::WaterFill, {}, 0,
                                          t0);
        case DesignCase::Interior: break;
    }

    const detail::InteriorContext ctx = detail::make_interior_context(h, cfg, q);
    const std::size_t n_subsets = ctx.subsets.size();

    // Phase 1: equal-power ranking (privacy inequality deliberately ignored).
    std::vector<double> equal_rates(n_subsets);
    parallel_chunks(n_subsets, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            equal_rates[i] = equal_power_rate(detail::subset_problem(ctx, ctx.subsets[i], cfg));
    });
    std::vector<std::size_t> order(n_subsets);
    for (std::size_t i = 0; i < n_subsets; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return equal_rates[a] > equal_rates[b];
    });

    // Phase 2: walk the ranking in deterministic batches until Q subsets have
    // solved feasibly or the list runs out.
    const std::size_t q_target = static_cast<std::size_t>(cfg.ss_shortlist_q);
    std::vector<detail::SubsetEval> solved(n_subsets);
    std::vector<char> attempted(n_subsets, 0);
    std::size_t cursor = 0;
    std::size_t feasible_count = 0;
    long calls = 0;
    while (feasible_count < q_target && cursor < n_subsets) {
        const std::size_t want = q_target - feasible_count;
        const std::size_t batch_end = std::min(cursor + want, n_subsets);
        parallel_chunks(batch_end - cursor, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = cursor + begin; k < cursor + end; ++k) {
                const std::size_t i = order[k];
                const AllocationResult res =
                    solve_power_allocation(detail::subset_problem(ctx, ctx.subsets[i], cfg));
                solved[i] = detail::SubsetEval{res.rate_bits, res.powers, res.feasible};
                attempted[i] = 1;
            }
        });
        calls += static_cast<long>(batch_end - cursor);
        for (std::size_t k = cursor; k < batch_end; ++k)
            if (solved[order[k]].ok) ++feasible_count;
        cursor = batch_end;
    }

    // Best feasible result; ties toward the lexicographically smallest subset,
    // which is the enumeration index order.
    std::size_t best = n_subsets;
    for (std::size_t i = 0; i < n_subsets; ++i) {
        if (!attempted[i] || !solved[i].ok) continue;
        if (best == n_subsets || solved[i].rate > solved[best].rate) best = i;
    }
    if (best == n_subsets)
        return detail::finish_outcome(h, cfg,
                                      boundary_precoder(q.t_max, cfg.power_p, cfg.n_streams),
                                      DesignCase::Interior, Strategy::Boundary, {}, calls, t0);

    return detail::finish_outcome(
        h, cfg, detail::assemble_precoder(ctx, ctx.subsets[best], solved[best].powers, cfg.power_p),
        DesignCase::Interior, Strategy::SS, ctx.subsets[best], calls, t0);
}

}  // namespace daor
