#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "daor/channel.hpp"
#include "daor/numerics.hpp"

namespace daor {

struct DegenerateAngles : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Transmit precoder W (n_tx x n_streams) with its power budget P.
/// The power invariant trace(W W^H) = P is checked by make_precoder; tests
/// that deliberately break it construct the struct directly.
struct Precoder {
    ComplexMatrix matrix_w;
    double power_budget_p = 1.0;

    int effective_streams() const {
        int count = 0;
        for (Eigen::Index k = 0; k < matrix_w.cols(); ++k)
            if (matrix_w.col(k).squaredNorm() > 1e-12 * power_budget_p) ++count;
        return count;
    }
};

inline Precoder make_precoder(ComplexMatrix w, double power_budget_p) {
    if (!(power_budget_p > 0.0)) throw std::invalid_argument("Precoder: power budget must be > 0");
    if (!w.allFinite()) throw NonFinite("Precoder: non-finite entry");
    const double trace = w.squaredNorm();
    if (std::abs(trace - power_budget_p) > 1e-8 * power_budget_p)
        throw std::invalid_argument("Precoder: trace(W W^H) = " + std::to_string(trace) +
                                    " violates the power budget " + std::to_string(power_budget_p));
    return Precoder{std::move(w), power_budget_p};
}

/// Received spatial covariance R = H W W^H H^H + N0 I.
inline ComplexMatrix covariance(const ChannelRealization& h, const Precoder& w, double n0) {
    if (!(n0 > 0.0)) throw std::invalid_argument("covariance: noise floor must be > 0");
    if (h.matrix_h.cols() != w.matrix_w.rows())
        throw DimensionMismatch("covariance: H has " + std::to_string(h.matrix_h.cols()) +
                                " columns but W has " + std::to_string(w.matrix_w.rows()) +
                                " rows");
    const ComplexMatrix hw = h.matrix_h * w.matrix_w;
    ComplexMatrix r = hw * hw.adjoint();
    r += n0 * ComplexMatrix::Identity(r.rows(), r.cols());
    return r;
}

/// Rate log2 det(I + H W W^H H^H / N0) in bits/s/Hz, evaluated via the
/// Cholesky log-determinant.
inline double achievable_rate(const ChannelRealization& h, const Precoder& w, double n0) {
    if (!(n0 > 0.0)) throw std::invalid_argument("achievable_rate: noise floor must be > 0");
    const ComplexMatrix hw = h.matrix_h * w.matrix_w;
    const Eigen::Index n_rx = h.matrix_h.rows();
    ComplexMatrix s = ComplexMatrix::Identity(n_rx, n_rx);
    s.noalias() += (1.0 / n0) * (hw * hw.adjoint());
    return logdet_hpd(s) / std::numbers::ln2;
}

/// Obfuscation ratio: received power toward phi_hat over power toward phi,
/// both read from the covariance through unit-norm steering vectors.
/// Values above 1 mean the decoy direction dominates.
inline double obfuscation_ratio(const ChannelRealization& h, const Precoder& w, double n0, double phi_deg,
                   double phi_hat_deg, double min_separation_deg = 0.5) {
    if (std::abs(phi_hat_deg - phi_deg) < min_separation_deg)
        throw DegenerateAngles("daor: |phi_hat - phi| < " + std::to_string(min_separation_deg) +
                               " degrees");
    const ComplexMatrix r = covariance(h, w, n0);
    const ComplexVector a_fake = steering_vector(phi_hat_deg, h.config.rx_geometry);
    const ComplexVector a_true = steering_vector(phi_deg, h.config.rx_geometry);
    const double num = (a_fake.adjoint() * r * a_fake)(0, 0).real();
    const double den = (a_true.adjoint() * r * a_true)(0, 0).real();
    return num / den;
}

/// Rate, obfuscation ratio and covariance for one (channel, precoder) pair.
struct LinkMetrics {
    double rate_bits = 0.0;
    double daor_gamma = 1.0;
    ComplexMatrix covariance_r;
};

inline LinkMetrics link_metrics(const ChannelRealization& h, const Precoder& w, double n0,
                                double phi_deg, double phi_hat_deg,
                                double min_separation_deg = 0.5) {
    LinkMetrics m;
    m.covariance_r = covariance(h, w, n0);
    m.rate_bits = achievable_rate(h, w, n0);
    m.daor_gamma = obfuscation_ratio(h, w, n0, phi_deg, phi_hat_deg, min_separation_deg);
    return m;
}

/// Bartlett angular spectrum of a covariance, normalized so the peak sits at
/// 0 dB, floored at -80 dB.
struct Beampattern {
    std::vector<double> grid_deg;
    std::vector<double> power_db;
    double peak_angle_deg = 0.0;
};

inline Beampattern beampattern(const ComplexMatrix& r, const ArrayGeometry& rx_geometry,
                               double grid_step_deg = 0.25) {
    if (!(grid_step_deg > 0.0 && grid_step_deg <= 5.0))
        throw std::invalid_argument("beampattern: grid step must lie in (0, 5] degrees");
    detail::require_square(r, "beampattern");
    const int n_points = static_cast<int>(std::floor(180.0 / grid_step_deg + 1e-9)) + 1;

    Beampattern b;
    b.grid_deg.reserve(n_points);
    std::vector<double> linear(static_cast<size_t>(n_points));
    double peak = 0.0;
    int peak_idx = 0;
    for (int i = 0; i < n_points; ++i) {
        const double theta = std::min(180.0, i * grid_step_deg);
        const ComplexVector a = steering_vector(theta, rx_geometry);
        const double power = (a.adjoint() * r * a)(0, 0).real();
        b.grid_deg.push_back(theta);
        linear[static_cast<size_t>(i)] = power;
        if (power > peak) {  // strict: ties keep the smaller angle
            peak = power;
            peak_idx = i;
        }
    }
    b.power_db.reserve(n_points);
    for (double power : linear) {
        const double db = 10.0 * std::log10(std::max(power, 1e-300) / peak);
        b.power_db.push_back(std::max(db, -80.0));
    }
    b.peak_angle_deg = b.grid_deg[static_cast<size_t>(peak_idx)];
    return b;
}

enum class DirectionVerdict { TrueDominant, FakeDominant, Ambiguous };

inline const char* to_string(DirectionVerdict v) {
    switch (v) {
        case DirectionVerdict::TrueDominant: return "TrueDominant";
        case DirectionVerdict::FakeDominant: return "FakeDominant";
        default: return "Ambiguous";
    }
}

/// Compares the pattern near phi against the pattern near phi_hat using the
/// maximum over a +-1 degree window each; differences within 0.1 dB are
/// declared ambiguous.
inline DirectionVerdict dominant_direction(const Beampattern& b, double phi_deg,
                                           double phi_hat_deg) {
    if (b.grid_deg.empty()) throw std::invalid_argument("dominant_direction: empty pattern");
    const double step = b.grid_deg.size() > 1 ? b.grid_deg[1] - b.grid_deg[0] : 180.0;
    auto window_max = [&](double center) {
        if (center < b.grid_deg.front() - step || center > b.grid_deg.back() + step)
            throw std::invalid_argument("dominant_direction: angle outside the pattern grid");
        double best = -1e300;
        for (size_t i = 0; i < b.grid_deg.size(); ++i)
            if (std::abs(b.grid_deg[i] - center) <= 1.0 + 1e-12)
                best = std::max(best, b.power_db[i]);
        return best;
    };
    const double fake = window_max(phi_hat_deg);
    const double truth = window_max(phi_deg);
    if (fake - truth > 0.1) return DirectionVerdict::FakeDominant;
    if (truth - fake > 0.1) return DirectionVerdict::TrueDominant;
    return DirectionVerdict::Ambiguous;
}

}  // namespace daor
