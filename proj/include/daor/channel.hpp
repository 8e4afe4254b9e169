#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "daor/numerics.hpp"
#include "daor/rng.hpp"

namespace daor {

/// Uniform linear array: element count, spacing and carrier wavelength
/// (spacing and wavelength share one unit).
struct ArrayGeometry {
    int n_elements = 1;
    double spacing_d = 0.5;
    double wavelength_lambda = 1.0;

    void validate() const {
        if (n_elements < 1) throw std::invalid_argument("ArrayGeometry: n_elements must be >= 1");
        if (!(spacing_d > 0.0)) throw std::invalid_argument("ArrayGeometry: spacing_d must be > 0");
        if (!(wavelength_lambda > 0.0))
            throw std::invalid_argument("ArrayGeometry: wavelength_lambda must be > 0");
    }
};

/// Rician channel description. The K-factor is stored linear; dB inputs are
/// converted at the config-file boundary.
struct ChannelConfig {
    ArrayGeometry tx_geometry;
    ArrayGeometry rx_geometry;
    double true_angle_phi_deg = 45.0;
    double rician_k_linear = 1.0;
    int n_paths_l = 20;

    void validate() const {
        tx_geometry.validate();
        rx_geometry.validate();
        if (!(true_angle_phi_deg > 0.0 && true_angle_phi_deg < 180.0))
            throw std::invalid_argument(
                "ChannelConfig: true_angle_phi_deg must lie strictly inside (0, 180)");
        if (!(rician_k_linear >= 0.0) || !std::isfinite(rician_k_linear))
            throw std::invalid_argument("ChannelConfig: rician_k_linear must be finite and >= 0");
        if (n_paths_l < 1) throw std::invalid_argument("ChannelConfig: n_paths_l must be >= 1");
    }
};

/// One scattered path: complex gain plus departure/arrival angles in degrees.
struct NlosPath {
    Complex gain_alpha;
    double dod_omega_t_deg = 0.0;
    double doa_omega_r_deg = 0.0;
};

/// One channel draw together with everything needed to recompute it.
struct ChannelRealization {
    ComplexMatrix matrix_h;  // n_rx x n_tx
    ChannelConfig config;
    std::vector<NlosPath> paths;
    std::uint64_t seed = 0;
};

/// Unit-norm ULA steering vector, entry m = exp(-j 2 pi (d/lambda) m cos theta) / sqrt(N).
/// theta is measured from the array axis, broadside at 90 degrees.
inline ComplexVector steering_vector(double theta_deg, const ArrayGeometry& geometry) {
    geometry.validate();
    if (!(theta_deg >= 0.0 && theta_deg <= 180.0))
        throw std::invalid_argument("steering_vector: theta must lie in [0, 180] degrees");
    const int n = geometry.n_elements;
    const double phase_step = -2.0 * std::numbers::pi *
                              (geometry.spacing_d / geometry.wavelength_lambda) *
                              std::cos(theta_deg * std::numbers::pi / 180.0);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexVector a(n);
    for (int m = 0; m < n; ++m)
        a[m] = Complex(amp * std::cos(phase_step * m), amp * std::sin(phase_step * m));
    return a;
}

/// Deterministic line-of-sight component sqrt(Nt*Nr) a_R(phi) a_T(phi)^H (rank 1).
inline ComplexMatrix make_los(const ChannelConfig& config) {
    config.validate();
    const ComplexVector ar = steering_vector(config.true_angle_phi_deg, config.rx_geometry);
    const ComplexVector at = steering_vector(config.true_angle_phi_deg, config.tx_geometry);
    const double scale = std::sqrt(static_cast<double>(config.tx_geometry.n_elements) *
                                   static_cast<double>(config.rx_geometry.n_elements));
    return scale * (ar * at.adjoint());
}

/// Scattered component sqrt(Nt*Nr/L) sum_l alpha_l a_R(omega_r) a_T(omega_t)^H.
inline ComplexMatrix make_nlos(const std::vector<NlosPath>& paths, const ChannelConfig& config) {
    config.validate();
    if (paths.empty()) throw std::invalid_argument("make_nlos: path list is empty");
    const int n_tx = config.tx_geometry.n_elements;
    const int n_rx = config.rx_geometry.n_elements;
    ComplexMatrix h = ComplexMatrix::Zero(n_rx, n_tx);
    for (const auto& path : paths) {
        const ComplexVector ar = steering_vector(path.doa_omega_r_deg, config.rx_geometry);
        const ComplexVector at = steering_vector(path.dod_omega_t_deg, config.tx_geometry);
        h.noalias() += path.gain_alpha * (ar * at.adjoint());
    }
    const double scale = std::sqrt(static_cast<double>(n_tx) * static_cast<double>(n_rx) /
                                   static_cast<double>(paths.size()));
    return scale * h;
}

/// Draws one Rician realization H = sqrt(k/(k+1)) H_los + sqrt(1/(k+1)) H_nlos.
///
/// Per path, in order: DOD ~ U[0,180), DOA ~ U[0,180), then the complex gain
/// with each component N(0, 1/2) from one polar Gaussian pair. Identical
/// (config, seed) pairs produce bit-identical realizations.
inline ChannelRealization sample_channel(const ChannelConfig& config, std::uint64_t seed) {
    config.validate();
    Xoshiro256pp rng(seed);
    std::vector<NlosPath> paths;
    paths.reserve(static_cast<size_t>(config.n_paths_l));
    for (int l = 0; l < config.n_paths_l; ++l) {
        NlosPath path;
        path.dod_omega_t_deg = rng.uniform(0.0, 180.0);
        path.doa_omega_r_deg = rng.uniform(0.0, 180.0);
        const auto [z1, z2] = rng.gaussian_pair();
        path.gain_alpha = Complex(z1 * std::numbers::sqrt2 / 2.0, z2 * std::numbers::sqrt2 / 2.0);
        paths.push_back(path);
    }
    const double k = config.rician_k_linear;
    const double w_los = std::sqrt(k / (k + 1.0));
    const double w_nlos = std::sqrt(1.0 / (k + 1.0));

    ChannelRealization real;
    real.config = config;
    real.paths = std::move(paths);
    real.seed = seed;
    real.matrix_h = w_los * make_los(config) + w_nlos * make_nlos(real.paths, config);
    return real;
}

}  // namespace daor
