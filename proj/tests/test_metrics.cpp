#include <catch2/catch_amalgamated.hpp>

#include "daor/design.hpp"
#include "daor/metrics.hpp"
#include "test_support.hpp"

using namespace daor;

namespace {

ChannelRealization manual_channel(ComplexMatrix h, int n_tx, int n_rx) {
    ChannelRealization real;
    real.config.tx_geometry = ArrayGeometry{n_tx, 0.5, 1.0};
    real.config.rx_geometry = ArrayGeometry{n_rx, 0.5, 1.0};
    real.config.true_angle_phi_deg = 45.0;
    real.matrix_h = std::move(h);
    return real;
}

}  // namespace

TEST_CASE("covariance trivial cases") {
    // Zero-power W (power invariant deliberately bypassed).
    ChannelRealization h = testing::table_channel(1, 4, 3);
    const Precoder zero{ComplexMatrix::Zero(4, 2), 1.0};
    const ComplexMatrix r = covariance(h, zero, 0.25);
    CHECK((r - 0.25 * ComplexMatrix::Identity(3, 3)).norm() <= 1e-15);

    ComplexMatrix h_row(1, 2);
    h_row << Complex(1, 0), Complex(0, 0);
    ChannelRealization scalar = manual_channel(h_row, 2, 1);
    ComplexMatrix w(2, 1);
    w << Complex(2, 0), Complex(0, 0);  // P = 4
    const ComplexMatrix rs = covariance(scalar, Precoder{w, 4.0}, 0.5);
    CHECK(rs(0, 0).real() == Catch::Approx(4.5));

    CHECK_THROWS_AS(covariance(scalar, Precoder{ComplexMatrix::Zero(3, 1), 1.0}, 0.5),
                    DimensionMismatch);
    CHECK_THROWS_AS(covariance(scalar, Precoder{w, 4.0}, 0.0), std::invalid_argument);
}

TEST_CASE("covariance minus noise is PSD with rank at most the stream count") {
    Xoshiro256pp rng(3);
    const ChannelRealization h = testing::table_channel(2);
    const Precoder w = testing::random_precoder(rng, 16, 4, 1.0);
    const ComplexMatrix r = covariance(h, w, 0.1);
    const auto eig = hermitian_eig(r - 0.1 * ComplexMatrix::Identity(8, 8));
    for (int k = 0; k < 8; ++k) CHECK(eig.eigenvalues[k] >= -1e-10);
    for (int k = 4; k < 8; ++k) CHECK(std::abs(eig.eigenvalues[k]) <= 1e-10 * eig.eigenvalues[0]);
}

TEST_CASE("achievable_rate closed forms and determinant oracle") {
    ComplexMatrix h11(1, 1);
    h11 << Complex(1, 0);
    ChannelRealization scalar = manual_channel(h11, 1, 1);
    ComplexMatrix w(1, 1);
    w << Complex(2.0, 0.0);  // P = 4
    CHECK(achievable_rate(scalar, Precoder{w, 4.0}, 0.5) ==
          Catch::Approx(std::log2(1.0 + 4.0 / 0.5)).epsilon(1e-12));

    ChannelRealization dead = manual_channel(ComplexMatrix::Zero(3, 4), 4, 3);
    Xoshiro256pp rng(5);
    const Precoder any = testing::random_precoder(rng, 4, 2, 1.0);
    CHECK(achievable_rate(dead, any, 0.1) == 0.0);

    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix hm = testing::random_complex(rng, 4, 4);
        ChannelRealization hr = manual_channel(hm, 4, 4);
        const Precoder wp = testing::random_precoder(rng, 4, 4, 2.0);
        const double via_logdet = achievable_rate(hr, wp, 0.3);
        const double via_det = testing::determinant_rate(hm, wp.matrix_w, 0.3);
        CHECK(via_logdet == Catch::Approx(via_det).epsilon(1e-9));
    }
}

TEST_CASE("daor identity cases") {
    Xoshiro256pp rng(9);
    const ChannelRealization h = testing::table_channel(4, 6, 4);
    const Precoder w = testing::random_precoder(rng, 6, 2, 1.0);

    // Same angle on both sides, tolerance disabled: identical quadratic forms.
    CHECK(obfuscation_ratio(h, w, 0.1, 45.0, 45.0, 0.0) == Catch::Approx(1.0).epsilon(1e-12));

    // W in the null space of H: only noise reaches both directions.
    Eigen::JacobiSVD<ComplexMatrix> svd(h.matrix_h, Eigen::ComputeFullV);
    ComplexMatrix null_w = svd.matrixV().rightCols(2);  // n_tx > n_rx
    null_w *= std::sqrt(1.0) / null_w.norm();
    CHECK((h.matrix_h * null_w).norm() <= 1e-10);
    CHECK(obfuscation_ratio(h, Precoder{null_w, 1.0}, 0.1, 45.0, 75.0) == Catch::Approx(1.0).margin(1e-9));

    CHECK_THROWS_AS(obfuscation_ratio(h, w, 0.1, 45.0, 45.2), DegenerateAngles);
}

TEST_CASE("daor equals lambda_max for the boundary precoder") {
    const ChannelRealization h = testing::table_channel(11);
    DesignConfig dc = testing::table_design(2.0, 10.0);
    const PrivacyQuadratics q = build_quadratic_forms(h, dc);
    const Precoder w = boundary_precoder(q.t_max, dc.power_p, dc.n_streams);
    const double gamma = obfuscation_ratio(h, w, dc.noise_n0, dc.phi_deg, dc.phi_hat_deg);
    CHECK(gamma == Catch::Approx(q.lambda_max).epsilon(1e-6));

    // Random power-P precoders never exceed the bound.
    Xoshiro256pp rng(13);
    for (int s = 0; s < 100000; ++s) {
        const Precoder wr = testing::random_precoder(rng, 16, 4, dc.power_p);
        const double g = testing::trace_form_daor(q, wr.matrix_w);
        REQUIRE(g <= q.lambda_max + 1e-8);
        REQUIRE(g >= q.lambda_min - 1e-8);
    }
}

TEST_CASE("daor trace-form identity for power-P precoders") {
    Xoshiro256pp rng(17);
    const ChannelRealization h = testing::table_channel(19);
    DesignConfig dc = testing::table_design(2.0, 10.0);
    const PrivacyQuadratics q = build_quadratic_forms(h, dc);
    for (int trial = 0; trial < 50; ++trial) {
        const Precoder w = testing::random_precoder(rng, 16, 4, dc.power_p);
        const double via_covariance = obfuscation_ratio(h, w, dc.noise_n0, 45.0, 75.0);
        const double via_trace = testing::trace_form_daor(q, w.matrix_w);
        CHECK(via_covariance == Catch::Approx(via_trace).epsilon(1e-9));
    }
}

TEST_CASE("metrics are invariant under right-unitary precoder rotations") {
    Xoshiro256pp rng(21);
    const ChannelRealization h = testing::table_channel(23, 8, 4);
    const Precoder w = testing::random_precoder(rng, 8, 3, 1.0);
    const Eigen::HouseholderQR<ComplexMatrix> qr(testing::random_complex(rng, 3, 3));
    const ComplexMatrix unitary = qr.householderQ();
    const Precoder wq{w.matrix_w * unitary, 1.0};

    CHECK((covariance(h, w, 0.2) - covariance(h, wq, 0.2)).norm() <=
          1e-10 * covariance(h, w, 0.2).norm());
    CHECK(achievable_rate(h, w, 0.2) == Catch::Approx(achievable_rate(h, wq, 0.2)).epsilon(1e-10));
    CHECK(obfuscation_ratio(h, w, 0.2, 45.0, 75.0) == Catch::Approx(obfuscation_ratio(h, wq, 0.2, 45.0, 75.0)).epsilon(1e-10));
}

TEST_CASE("achievable_rate is monotone under rank-one covariance additions") {
    Xoshiro256pp rng(25);
    const ChannelRealization h = testing::table_channel(27, 8, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const Precoder w = testing::random_precoder(rng, 8, 2, 1.0);
        const double base = achievable_rate(h, w, 0.2);
        ComplexMatrix extended(8, 3);
        extended.leftCols(2) = w.matrix_w;
        extended.col(2) = std::sqrt(0.05) * testing::random_unit_vector(rng, 8);
        const double grown = achievable_rate(h, Precoder{extended, 1.05}, 0.2);
        CHECK(grown >= base - 1e-12);
    }
}

TEST_CASE("beampattern flat and single-source cases") {
    const ArrayGeometry rx{8, 0.5, 1.0};
    const ComplexMatrix iso = 0.3 * ComplexMatrix::Identity(8, 8);
    const Beampattern flat = beampattern(iso, rx, 0.25);
    CHECK(flat.grid_deg.size() == 721);
    for (double db : flat.power_db) CHECK(std::abs(db) <= 1e-9);
    CHECK(dominant_direction(flat, 45.0, 75.0) == DirectionVerdict::Ambiguous);

    const ComplexVector a75 = steering_vector(75.0, rx);
    const ComplexMatrix spike =
        1e-4 * ComplexMatrix::Identity(8, 8) + 10.0 * (a75 * a75.adjoint());
    const Beampattern peaked = beampattern(spike, rx, 0.25);
    CHECK(std::abs(peaked.peak_angle_deg - 75.0) <= 0.25);
    CHECK(dominant_direction(peaked, 45.0, 75.0) == DirectionVerdict::FakeDominant);

    CHECK_THROWS_AS(beampattern(iso, rx, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(beampattern(iso, rx, 6.0), std::invalid_argument);
}

TEST_CASE("beampattern sample difference matches the obfuscation ratio in dB") {
    const ChannelRealization h = testing::table_channel(31);
    DesignConfig dc = testing::table_design(2.0, 10.0);
    const DesignOutcome out = design_os(h, dc);
    const ComplexMatrix r = covariance(h, out.precoder, dc.noise_n0);
    const Beampattern b = beampattern(r, h.config.rx_geometry, 0.25);

    const auto at = [&](double angle) {
        for (size_t i = 0; i < b.grid_deg.size(); ++i)
            if (std::abs(b.grid_deg[i] - angle) < 1e-9) return b.power_db[i];
        FAIL("angle missing from grid");
        return 0.0;
    };
    const double diff = at(75.0) - at(45.0);
    CHECK(diff == Catch::Approx(10.0 * std::log10(out.achieved_gamma)).margin(0.05));
}

TEST_CASE("precoder power invariant and effective stream count") {
    ComplexMatrix w = ComplexMatrix::Zero(4, 2);
    w(0, 0) = Complex(2.0, 0.0);
    const Precoder p = make_precoder(w, 4.0);
    CHECK(p.effective_streams() == 1);
    CHECK_THROWS_AS(make_precoder(w, 5.0), std::invalid_argument);
}
