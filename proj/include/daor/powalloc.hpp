#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "daor/numerics.hpp"

namespace daor {

struct InfeasibleSubset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Concave allocation subproblem: maximize log2 det(I + G diag(p) G^H / N0)
/// over the polytope {p >= 0, sum p = P, sum p_i lambda_i >= 0}.
struct AllocationProblem {
    ComplexMatrix effective_channel_g;  // n_rx x n, column i = H u_i
    RealVector lambdas;                 // n privacy weights
    double total_power = 1.0;
    double noise_n0 = 1.0;

    void validate() const {
        const Eigen::Index n = effective_channel_g.cols();
        if (n < 1 || effective_channel_g.rows() < 1)
            throw std::invalid_argument("AllocationProblem: empty channel matrix");
        if (lambdas.size() != n)
            throw DimensionMismatch("AllocationProblem: lambda count " +
                                    std::to_string(lambdas.size()) + " != column count " +
                                    std::to_string(n));
        if (!effective_channel_g.allFinite() || !lambdas.allFinite())
            throw NonFinite("AllocationProblem: non-finite input");
        if (!(total_power > 0.0) || !(noise_n0 > 0.0))
            throw std::invalid_argument("AllocationProblem: P and N0 must be > 0");
        if (lambdas.maxCoeff() < 0.0)
            throw InfeasibleSubset(
                "AllocationProblem: all privacy weights negative, polytope is empty");
    }
};

struct AllocationResult {
    RealVector powers;
    double rate_bits = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool feasible = false;
};

namespace detail {

// S(p) = I + (1/n0) G diag(p) G^H. Rate in bits; gradient and Hessian of the
// rate as a function of p, via one shared solve X = S^{-1} G:
//   df/dp_i  =  Re[(G^H X)_ii] / (n0 ln 2)
//   d2f/dp_i dp_j = -|(G^H X)_ij|^2 / (n0^2 ln 2)
inline void rate_grad_hess(const ComplexMatrix& g, const RealVector& p, double n0, double* rate,
                           RealVector* grad, RealMatrix* hess) {
    const Eigen::Index nr = g.rows();
    const Eigen::Index n = g.cols();
    ComplexMatrix s = ComplexMatrix::Identity(nr, nr);
    s.noalias() += (1.0 / n0) * (g * p.cast<Complex>().asDiagonal() * g.adjoint());
    s = 0.5 * (s + s.adjoint());
    Eigen::LLT<ComplexMatrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("rate_grad_hess: covariance lost definiteness");
    if (rate) {
        double acc = 0.0;
        const ComplexMatrix l = llt.matrixL();
        for (Eigen::Index i = 0; i < nr; ++i) acc += std::log(l(i, i).real());
        *rate = 2.0 * acc / std::numbers::ln2;
    }
    if (grad || hess) {
        const ComplexMatrix x = llt.solve(g);
        const ComplexMatrix m = g.adjoint() * x;
        if (grad) {
            grad->resize(n);
            for (Eigen::Index i = 0; i < n; ++i)
                (*grad)[i] = m(i, i).real() / (n0 * std::numbers::ln2);
        }
        if (hess) {
            hess->resize(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    (*hess)(i, j) = -std::norm(m(i, j)) / (n0 * n0 * std::numbers::ln2);
        }
    }
}

inline double rate_at(const ComplexMatrix& g, const RealVector& p, double n0) {
    double rate = 0.0;
    rate_grad_hess(g, p, n0, &rate, nullptr, nullptr);
    return rate;
}

}  // namespace detail

/// Vertices of {p >= 0, sum p = P, lambda . p >= 0} in closed form: the
/// simplex corners with lambda_i >= 0 plus, for every sign-crossing pair
/// (lambda_i > 0 > lambda_j), the point on that edge where lambda . p = 0.
inline std::vector<RealVector> allocation_vertices(const RealVector& lambdas, double total_power) {
    const Eigen::Index n = lambdas.size();
    std::vector<RealVector> verts;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lambdas[i] >= 0.0) {
            RealVector v = RealVector::Zero(n);
            v[i] = total_power;
            verts.push_back(std::move(v));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(lambdas[i] > 0.0)) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(lambdas[j] < 0.0)) continue;
            RealVector v = RealVector::Zero(n);
            v[i] = total_power * (-lambdas[j]) / (lambdas[i] - lambdas[j]);
            v[j] = total_power * lambdas[i] / (lambdas[i] - lambdas[j]);
            verts.push_back(std::move(v));
        }
    }
    return verts;
}

/// Scaled KKT residual of a candidate point: primal feasibility, stationarity
/// over the support, dual feasibility on the active bounds and complementary
/// slackness of the privacy inequality, all relative to the gradient scale.
inline double allocation_kkt_residual(const AllocationProblem& prob, const RealVector& p) {
    const double power = prob.total_power;
    const RealVector& lam = prob.lambdas;
    const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    RealVector grad;
    detail::rate_grad_hess(prob.effective_channel_g, p.cwiseMax(0.0), prob.noise_n0, nullptr,
                           &grad, nullptr);
    const double sigma = std::max(1.0, grad.cwiseAbs().maxCoeff());
    const double priv_val = lam.dot(p);

    double res = std::abs(p.sum() - power) / power;
    res = std::max(res, std::max(0.0, -p.minCoeff()) / power);
    res = std::max(res, std::max(0.0, -priv_val) / (power * lam_scale));

    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 1e-9 * power) free_idx.push_back(i);
    if (free_idx.empty()) return 1.0;

    // Stationarity convention: g_i + nu * lambda_i = mu on the support, with
    // nu >= 0 for the privacy inequality. Fit (mu, nu) by least squares over
    // the support columns [1, -lambda].
    const bool priv_near = priv_val <= 1e-8 * power * lam_scale;
    double mu = 0.0, nu = 0.0;
    if (priv_near) {
        RealMatrix a(static_cast<Eigen::Index>(free_idx.size()), 2);
        RealVector rhs(static_cast<Eigen::Index>(free_idx.size()));
        for (size_t k = 0; k < free_idx.size(); ++k) {
            a(static_cast<Eigen::Index>(k), 0) = 1.0;
            a(static_cast<Eigen::Index>(k), 1) = -lam[free_idx[k]];
            rhs[static_cast<Eigen::Index>(k)] = grad[free_idx[k]];
        }
        Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(a);
        const RealVector sol = cod.solve(rhs);
        mu = sol[0];
        nu = sol[1];
    }
    if (nu < 0.0 || !priv_near) nu = 0.0;
    if (nu == 0.0) {
        double acc = 0.0;
        for (auto i : free_idx) acc += grad[i];
        mu = acc / static_cast<double>(free_idx.size());
    }

    for (auto i : free_idx) res = std::max(res, std::abs(grad[i] + nu * lam[i] - mu) / sigma);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 1e-9 * power) continue;
        res = std::max(res, std::max(0.0, grad[i] + nu * lam[i] - mu) / sigma);
    }
    res = std::max(res, nu * std::abs(priv_val) / (sigma * power * lam_scale));
    return res;
}

/// Rate under the flat split p_i = P/n. Used by the shortlist ranking; the
/// privacy inequality is deliberately not checked here.
inline double equal_power_rate(const AllocationProblem& prob) {
    prob.validate();
    const Eigen::Index n = prob.effective_channel_g.cols();
    const RealVector p =
        RealVector::Constant(n, prob.total_power / static_cast<double>(n));
    return detail::rate_at(prob.effective_channel_g, p, prob.noise_n0);
}

/// Active-set Newton solve of the allocation subproblem.
///
/// Working set = the zero bounds plus optionally the privacy equality. On the
/// current face the equality-constrained Newton step is taken in a null-space
/// parameterization with a ratio test against the inactive constraints;
/// face-stationary points release the most negative multiplier. Deterministic:
/// fixed tie-breaks, no randomization. The returned kkt_residual is recomputed
/// from scratch at the final point.
inline AllocationResult solve_power_allocation(const AllocationProblem& prob) {
    prob.validate();
    const ComplexMatrix& g_mat = prob.effective_channel_g;
    const RealVector& lam = prob.lambdas;
    const Eigen::Index n = g_mat.cols();
    const double power = prob.total_power;
    const double n0 = prob.noise_n0;

    // Start at the flat split, blended toward the best-lambda corner until the
    // privacy constraint holds.
    RealVector p = RealVector::Constant(n, power / static_cast<double>(n));
    bool priv_active = false;
    {
        const double priv_val = lam.dot(p);
        if (priv_val < 0.0) {
            Eigen::Index imax = 0;
            lam.maxCoeff(&imax);
            const double vert_val = lam[imax] * power;
            const double theta = -priv_val / (vert_val - priv_val);
            p *= (1.0 - theta);
            p[imax] += theta * power;
            priv_active = true;
        }
    }
    std::vector<char> bound(static_cast<size_t>(n), 0);
    std::vector<int> release_budget(static_cast<size_t>(n), 3);
    int priv_release_budget = 3;
    for (Eigen::Index i = 0; i < n; ++i)
        if (p[i] <= 0.0) {
            p[i] = 0.0;
            bound[static_cast<size_t>(i)] = 1;
        }

    int iterations = 0;
    std::vector<double> f_hist;
    bool stalled = false;
    constexpr int kMaxTotalIterations = 5000;
    constexpr int kMaxOuter = 80;
    constexpr int kMaxInner = 40;

    for (int outer = 0; outer < kMaxOuter && !stalled; ++outer) {
        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!bound[static_cast<size_t>(i)]) free_idx.push_back(i);
        const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());

        // Face equalities on the free coordinates.
        const int m = priv_active ? 2 : 1;
        RealMatrix cmat(m, nf);
        RealVector crhs(m);
        cmat.row(0).setOnes();
        crhs[0] = power;
        if (priv_active) {
            for (Eigen::Index j = 0; j < nf; ++j) cmat(1, j) = lam[free_idx[static_cast<size_t>(j)]];
            crhs[1] = 0.0;
        }

        RealVector pf(nf);
        for (Eigen::Index j = 0; j < nf; ++j) pf[j] = p[free_idx[static_cast<size_t>(j)]];

        Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(cmat);
        pf += cod.solve(crhs - cmat * pf);
        if (priv_active && (cmat * pf - crhs).cwiseAbs().maxCoeff() >
                               1e-8 * power * std::max(1.0, lam.cwiseAbs().maxCoeff())) {
            // Inconsistent face (privacy equality incompatible with the power
            // budget on these coordinates): drop the equality and retry.
            priv_active = false;
            continue;
        }
        for (Eigen::Index j = 0; j < nf; ++j) pf[j] = std::max(pf[j], 0.0);
        for (Eigen::Index j = 0; j < nf; ++j) p[free_idx[static_cast<size_t>(j)]] = pf[j];

        Eigen::FullPivLU<RealMatrix> lu(cmat);
        RealMatrix kernel = lu.kernel();
        if (kernel.cols() > 0 && kernel.norm() > 0.0) {
            Eigen::HouseholderQR<RealMatrix> qr(kernel);
            kernel = qr.householderQ() * RealMatrix::Identity(nf, kernel.cols());
        } else {
            kernel.resize(nf, 0);
        }

        bool face_changed = false;
        for (int inner = 0; inner < kMaxInner && kernel.cols() > 0; ++inner) {
            if (++iterations > kMaxTotalIterations) {
                stalled = true;
                break;
            }
            double f_cur = 0.0;
            RealVector grad;
            RealMatrix hess;
            detail::rate_grad_hess(g_mat, p, n0, &f_cur, &grad, &hess);

            RealVector gf(nf);
            RealMatrix hf(nf, nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = grad[free_idx[static_cast<size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b)
                    hf(a, b) = hess(free_idx[static_cast<size_t>(a)],
                                    free_idx[static_cast<size_t>(b)]);
            }
            const RealVector red_grad = kernel.transpose() * gf;
            const double gscale = std::max(1.0, gf.cwiseAbs().maxCoeff());
            // Face-level stationarity target: far below the 1e-6 certificate,
            // above the log-det round-off floor on ill-conditioned instances.
            if (red_grad.cwiseAbs().maxCoeff() <= 3e-9 * gscale) break;

            f_hist.push_back(f_cur);
            if (f_hist.size() >= 11) {
                const double gain = f_hist.back() - f_hist[f_hist.size() - 11];
                if (gain < 1e-12 * std::max(1.0, std::abs(f_hist.back()))) {
                    stalled = true;
                    break;
                }
            }

            RealMatrix neg_hr = -(kernel.transpose() * hf * kernel);
            double damp = 0.0;
            Eigen::LLT<RealMatrix> hllt(neg_hr);
            while (hllt.info() != Eigen::Success && damp < 1e6) {
                damp = std::max(damp * 10.0, 1e-12 * std::max(1.0, neg_hr.trace()));
                hllt.compute(neg_hr + damp * RealMatrix::Identity(neg_hr.rows(), neg_hr.cols()));
            }
            if (hllt.info() != Eigen::Success) break;
            const RealVector dz = hllt.solve(red_grad);
            const double slope = red_grad.dot(dz);
            if (!(slope > 0.0)) break;
            const RealVector dpf = kernel * dz;

            // Ratio test against the inactive constraints.
            double alpha_max = 1e300;
            Eigen::Index blocker_coord = -1;  // a free coordinate index, or -1
            bool blocker_priv = false;
            for (Eigen::Index j = 0; j < nf; ++j) {
                if (dpf[j] < -1e-300) {
                    const double a = pf[j] / (-dpf[j]);
                    if (a < alpha_max) {
                        alpha_max = a;
                        blocker_coord = j;
                        blocker_priv = false;
                    }
                }
            }
            if (!priv_active) {
                double dpriv = 0.0, cur = 0.0;
                for (Eigen::Index j = 0; j < nf; ++j) {
                    dpriv += lam[free_idx[static_cast<size_t>(j)]] * dpf[j];
                    cur += lam[free_idx[static_cast<size_t>(j)]] * pf[j];
                }
                if (dpriv < -1e-300) {
                    const double a = std::max(cur, 0.0) / (-dpriv);
                    if (a < alpha_max) {
                        alpha_max = a;
                        blocker_coord = -1;
                        blocker_priv = true;
                    }
                }
            }

            double alpha = std::min(1.0, alpha_max);
            const bool hits_boundary = alpha_max <= 1.0;
            // Armijo with slack for log-det evaluation noise: near the optimum
            // genuine gains can sit below round-off, and rejecting those steps
            // would freeze the iteration short of stationarity.
            const double noise_slack = 1e-11 * std::max(1.0, std::abs(f_cur));
            int backtracks = 0;
            bool accepted = false;
            while (backtracks < 60) {
                RealVector cand = pf + alpha * dpf;
                for (Eigen::Index j = 0; j < nf; ++j) cand[j] = std::max(cand[j], 0.0);
                RealVector p_cand = p;
                for (Eigen::Index j = 0; j < nf; ++j)
                    p_cand[free_idx[static_cast<size_t>(j)]] = cand[j];
                const double f_new = detail::rate_at(g_mat, p_cand, n0);
                if (f_new >= f_cur + 1e-6 * alpha * slope - noise_slack) {
                    pf = cand;
                    p = p_cand;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
                ++backtracks;
            }
            if (!accepted) break;  // step rejected at every scale: at the noise floor

            if (hits_boundary && backtracks == 0) {
                if (blocker_priv) {
                    priv_active = true;
                } else {
                    const Eigen::Index i_glob = free_idx[static_cast<size_t>(blocker_coord)];
                    p[i_glob] = 0.0;
                    bound[static_cast<size_t>(i_glob)] = 1;
                }
                face_changed = true;
                break;
            }
        }
        if (stalled) break;
        if (face_changed) continue;

        // Face-stationary point: check multiplier signs.
        RealVector grad;
        detail::rate_grad_hess(g_mat, p, n0, nullptr, &grad, nullptr);
        RealVector gf(nf);
        for (Eigen::Index j = 0; j < nf; ++j) gf[j] = grad[free_idx[static_cast<size_t>(j)]];
        const double gscale = std::max(1.0, gf.cwiseAbs().maxCoeff());
        const double tol_release = 1e-10 * gscale;

        // Multipliers under g_i + nu * lambda_i = mu (nu >= 0 required); a
        // negative nu or a negative bound multiplier s_i = mu - g_i - nu *
        // lambda_i flags its constraint for release.
        double mu = 0.0, nu = 0.0;
        if (priv_active) {
            RealMatrix a(nf, 2);
            a.col(0).setOnes();
            for (Eigen::Index j = 0; j < nf; ++j)
                a(j, 1) = -lam[free_idx[static_cast<size_t>(j)]];
            Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod2(a);
            const RealVector sol = cod2.solve(gf);
            mu = sol[0];
            nu = sol[1];
        } else {
            mu = gf.mean();
        }

        const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
        double worst_score = tol_release;
        int worst_kind = 0;  // 0 none, 1 privacy, 2 coordinate bound
        Eigen::Index worst_i = -1;
        if (priv_active && priv_release_budget > 0 && -nu * lam_scale > worst_score) {
            worst_score = -nu * lam_scale;
            worst_kind = 1;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!bound[static_cast<size_t>(i)] || release_budget[static_cast<size_t>(i)] <= 0)
                continue;
            const double s_i = mu - nu * lam[i] - grad[i];
            if (-s_i > worst_score) {
                worst_score = -s_i;
                worst_kind = 2;
                worst_i = i;
            }
        }
        if (worst_kind == 0) break;
        if (worst_kind == 1) {
            priv_active = false;
            --priv_release_budget;
        } else {
            bound[static_cast<size_t>(worst_i)] = 0;
            --release_budget[static_cast<size_t>(worst_i)];
        }
    }

    // Finalize: exact zeros on bound coordinates, exact power sum.
    for (Eigen::Index i = 0; i < n; ++i)
        if (bound[static_cast<size_t>(i)]) p[i] = 0.0;
    p *= power / p.sum();

    AllocationResult out;
    out.powers = p;
    out.rate_bits = detail::rate_at(g_mat, p, n0);
    out.kkt_residual = allocation_kkt_residual(prob, p);
    out.iterations = iterations;
    const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const bool primal_ok = p.minCoeff() >= 0.0 &&
                           std::abs(p.sum() - power) <= 1e-10 * power &&
                           lam.dot(p) >= -1e-9 * power * lam_scale;
    out.feasible = primal_ok && out.kkt_residual <= 1e-6;
    return out;
}

}  // namespace daor
