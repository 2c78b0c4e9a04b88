#include "qbeam/coherent.hpp"
#include "qbeam/errors.hpp"
#include "support.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace qbeam;
using testing::for_all;
using testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

GaussianBeamState gaussian(double x0, double p0, double sigma) {
    GaussianBeamState st;
    st.x0 = x0;
    st.p0 = p0;
    st.sigma = sigma;
    return st;
}

double trapezoid(double a, double b, std::size_t n, const GaussianBeamState& st) {
    const double h = (b - a) / static_cast<double>(n);
    double acc = 0.5 * (coherent_density(a, st) + coherent_density(b, st));
    for (std::size_t i = 1; i < n; ++i) {
        acc += coherent_density(a + h * static_cast<double>(i), st);
    }
    return acc * h;
}

} // namespace

TEST_CASE("matched_sigma") {
    CHECK(matched_sigma(1.0, 0.02) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(matched_sigma(4.0, 0.02) == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(matched_sigma(1.0, 0.08) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS(matched_sigma(0.0, 0.02), InvalidParameter);
    CHECK_THROWS_AS(matched_sigma(1.0, -0.02), InvalidParameter);
}

TEST_CASE("check_matching") {
    CHECK(check_matching(0.01, 0.1, 1.0) < 1e-15);
    CHECK(check_matching(0.02, 0.1, 1.0) == doctest::Approx(0.5));
    Gen g(31);
    const auto p = coupled_dissipative_profiles(1.0, 0.01, 0.1);
    for (int i = 0; i < 100; ++i) {
        const double s = g.uniform(0.0, 100.0);
        CHECK(check_matching(p.thermo.eta0(s), 0.1, p.strength(s)) < 1e-14);
    }
}

TEST_CASE("coherent_density") {
    const auto st = gaussian(0.3, 0.0, 0.1);
    const double peak = 1.0 / std::sqrt(2.0 * kPi * 0.01);
    CHECK(coherent_density(0.3, st) == doctest::Approx(peak).epsilon(1e-15));
    CHECK(peak == doctest::Approx(3.98942).epsilon(1e-6));
    CHECK(coherent_density(0.4, st) == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-14));
    // quadrature over +-10 sigma, with the doubled-resolution value as oracle
    const double coarse = trapezoid(-0.7, 1.3, 2000, st);
    const double fine = trapezoid(-0.7, 1.3, 4000, st);
    CHECK(std::abs(fine - 1.0) < 1e-10);
    CHECK(std::abs(coarse - fine) < 1e-10);
}

TEST_CASE("coherent_wavefunction") {
    SUBCASE("real positive peak") {
        const auto psi = coherent_wavefunction(0.2, gaussian(0.2, 0.0, 0.1), 0.02);
        CHECK(psi.imag() == 0.0);
        CHECK(psi.real() == doctest::Approx(std::pow(2.0 * kPi * 0.01, -0.25)).epsilon(1e-15));
    }
    SUBCASE("|psi|^2 is the coherent density") {
        Gen g(32);
        const auto st = gaussian(0.05, 0.07, 0.1);
        for (int i = 0; i < 1000; ++i) {
            const double x = g.uniform(-0.5, 0.5);
            CHECK(testing::rel_err(std::norm(coherent_wavefunction(x, st, 0.02)), coherent_density(x, st)) < 1e-14);
        }
    }
    SUBCASE("phase gradient per convention") {
        const auto st = gaussian(0.0, 0.05, 0.1);
        const double h = 1e-4;
        for (auto [conv, expected] : {std::pair{PhaseConvention::Half, 1.25}, std::pair{PhaseConvention::Full, 2.5}}) {
            for (double x : {-0.2, 0.0, 0.13}) {
                const double a = std::arg(coherent_wavefunction(x - h, st, 0.02, conv));
                const double b = std::arg(coherent_wavefunction(x + h, st, 0.02, conv));
                double d = b - a;
                d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
                CHECK(d / (2.0 * h) == doctest::Approx(expected).epsilon(1e-8));
            }
        }
    }
    SUBCASE("global phase") {
        auto st = gaussian(0.0, 0.0, 0.1);
        st.phi0 = 0.7;
        CHECK(std::arg(coherent_wavefunction(0.0, st, 0.02)) == doctest::Approx(0.7));
    }
}

TEST_CASE("property: the coherent wavefunction is normalized") {
    for_all(50, 33, [](Gen& g, int) {
        auto st = gaussian(g.uniform(-1.0, 1.0), g.uniform(-0.2, 0.2), g.uniform(0.02, 0.5));
        st.phi0 = g.uniform(-3.0, 3.0);
        const double eps = g.uniform(0.005, 0.05);
        const double a = st.x0 - 12.0 * st.sigma;
        const double b = st.x0 + 12.0 * st.sigma;
        const std::size_t n = 4000;
        const double h = (b - a) / n;
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += w * std::norm(coherent_wavefunction(a + h * static_cast<double>(i), st, eps));
        }
        CHECK(std::abs(acc * h - 1.0) < 1e-10);
    });
}

TEST_CASE("isothermal_energy") {
    CHECK(isothermal_energy(1.0, 0.0, 1.0) == 0.5);
    CHECK(isothermal_energy(0.0, 0.0, 3.0) == 0.0);
    CHECK(isothermal_energy(0.5, -0.2, 4.0) == doctest::Approx(0.02 + 0.5));

    OdeSettings s;
    s.abs_tol = 1e-13;
    s.rel_tol = 1e-12;
    s.output_cadence = 0.1;
    const auto traj = integrate(gaussian(0.05, 0.03, 0.1), StrengthProfile::constant(2.0),
                                EmittanceProfile::constant(0.02), 20.0, s);
    const double e0 = isothermal_energy(traj.front().x0, traj.front().p0, 2.0);
    for (const auto& st : traj) {
        CHECK(std::abs(isothermal_energy(st.x0, st.p0, 2.0) - e0) / e0 < 1e-8);
    }
}

TEST_CASE("CoherentSpec construction") {
    SUBCASE("isothermal derives the matched size") {
        const auto spec = CoherentSpec::isothermal(1.0, 0.02, 0.05, 0.0);
        CHECK(spec.kind() == CoherentKind::Isothermal);
        CHECK(spec.sigma0() == doctest::Approx(0.1));
        CHECK(spec.beta() == doctest::Approx(0.01));
        CHECK(spec.eta0(3.0) == doctest::Approx(0.01));
        const auto st = spec.initial_state();
        CHECK(st.x0 == 0.05);
        CHECK(st.dsigma == 0.0);
    }
    SUBCASE("isothermal requires constant K and eps") {
        CHECK_THROWS_AS(CoherentSpec::isothermal(StrengthProfile::modulated(1.0, 0.1, 1.0),
                                                 EmittanceProfile::constant(0.02), 0.1, 0.0, 0.0),
                        InvalidParameter);
        CHECK_THROWS_AS(CoherentSpec::isothermal(StrengthProfile::constant(1.0),
                                                 EmittanceProfile::exponential(0.02, 0.01), 0.1, 0.0, 0.0),
                        InvalidParameter);
    }
    SUBCASE("isothermal requires matching") {
        CHECK_THROWS_AS(CoherentSpec::isothermal(StrengthProfile::constant(1.0), EmittanceProfile::constant(0.02),
                                                 0.11, 0.0, 0.0),
                        InvalidParameter);
        CHECK_NOTHROW(CoherentSpec::isothermal(StrengthProfile::constant(1.0), EmittanceProfile::constant(0.02), 0.1,
                                               0.0, 0.0));
    }
    SUBCASE("dissipative kind: Gamma from eps equals K'/K") {
        const auto spec = CoherentSpec::dissipative(1.0, 0.01, 0.1, 0.05, 0.0);
        CHECK(spec.kind() == CoherentKind::Dissipative);
        for (int i = 0; i < 100; ++i) {
            const double s = 0.5 * i;
            CHECK(std::abs(gamma_rate(spec.emittance(), s) - spec.strength().log_derivative(s)) < 1e-12);
        }
    }
}

TEST_CASE("matched states stay shape-invariant along the envelope") {
    for (const auto& spec :
         {CoherentSpec::isothermal(1.0, 0.02, 0.05, 0.02), CoherentSpec::dissipative(1.0, 0.01, 0.1, 0.05, 0.0)}) {
        OdeSettings s;
        s.abs_tol = 1e-13;
        s.rel_tol = 1e-12;
        s.output_cadence = 0.05;
        const auto st0 = spec.initial_state();
        const auto traj = integrate(st0, spec.strength(), spec.emittance(), 4.0 * kPi, s);
        double sig = 0.0;
        double shape = 0.0;
        for (const auto& st : traj) {
            sig = std::max(sig, std::abs(st.sigma - spec.sigma0()));
            for (double u = -0.4; u <= 0.4; u += 0.01) {
                shape = std::max(shape, std::abs(coherent_density(st.x0 + u, st) - coherent_density(st0.x0 + u, st0)));
            }
        }
        CHECK(sig < 1e-6 * spec.sigma0());
        CHECK(shape < 1e-8);
    }
}

TEST_CASE("centroid bookkeeping: P0 = x0' and g = K x0^2 / 2 along trajectories") {
    OdeSettings s;
    s.abs_tol = 1e-13;
    s.rel_tol = 1e-12;
    s.output_cadence = 1e-3;
    const auto p = coupled_dissipative_profiles(1.0, 0.01, 0.1);
    const auto traj = integrate(gaussian(0.05, 0.01, 0.1), p.strength, p.emittance, 3.0, s);
    for (std::size_t i = 1; i + 1 < traj.size(); i += 100) {
        const double h = traj[i + 1].s - traj[i - 1].s;
        const double dx0 = (traj[i + 1].x0 - traj[i - 1].x0) / h;
        CHECK(std::abs(dx0 - traj[i].p0) < 1e-6);
        // Energy balance with the centroid potential g = K x0^2 / 2:
        // d/ds (P0^2/2 + g) = K' x0^2 / 2
        const double e_minus = 0.5 * traj[i - 1].p0 * traj[i - 1].p0 +
                               0.5 * p.strength(traj[i - 1].s) * traj[i - 1].x0 * traj[i - 1].x0;
        const double e_plus = 0.5 * traj[i + 1].p0 * traj[i + 1].p0 +
                              0.5 * p.strength(traj[i + 1].s) * traj[i + 1].x0 * traj[i + 1].x0;
        const double g_rate = 0.5 * p.strength.derivative(traj[i].s) * traj[i].x0 * traj[i].x0;
        CHECK(std::abs((e_plus - e_minus) / h - g_rate) < 1e-8);
    }
}
