#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmetro/angular.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/numdiff.hpp"
#include "qmetro/states.hpp"

#include <cmath>

using namespace qmetro;

namespace {

double dense_pj(const BlochState& state, int N, int twice_j) {
    const auto rho = build_density(state, N);
    const auto proj = angular_projector(N, twice_j);
    return (proj * rho).trace().real();
}

} // namespace

TEST_CASE("multiplicities") {
    CHECK(multiplicity(2, 2) == 1);
    CHECK(multiplicity(2, 0) == 1);
    CHECK(multiplicity(4, 2) == 3);
    CHECK(multiplicity(4, 0) == 2);

    SUBCASE("N=6 ladder {1,5,9,5} with dimension sum 64") {
        CHECK(multiplicity(6, 6) == 1);
        CHECK(multiplicity(6, 4) == 5);
        CHECK(multiplicity(6, 2) == 9);
        CHECK(multiplicity(6, 0) == 5);
        std::uint64_t dim = 0;
        for (int tj = 0; tj <= 6; tj += 2) dim += (tj + 1) * multiplicity(6, tj);
        CHECK(dim == 64);
    }
    SUBCASE("dimension sums to 2^N for every N up to 20") {
        for (int N = 1; N <= 20; ++N) {
            std::uint64_t dim = 0;
            for (int tj = N % 2; tj <= N; tj += 2) {
                dim += static_cast<std::uint64_t>(tj + 1) * multiplicity(N, tj);
            }
            CHECK(dim == (std::uint64_t{1} << N));
        }
    }
    SUBCASE("dense diagonalization count agrees") {
        for (int N : {3, 5}) {
            const auto basis = angular_eigenbasis(N);
            for (int tj = N % 2; tj <= N; tj += 2) {
                std::size_t count = 0;
                for (const auto& v : basis) {
                    if (v.twice_j == tj) ++count;
                }
                CHECK(count == (static_cast<std::uint64_t>(tj) + 1) * multiplicity(N, tj));
            }
        }
    }
    SUBCASE("stays exact at N=64") {
        // Central multiplicity of 64 spins, against the difference of binomials
        // computed in arbitrary precision.
        CHECK(multiplicity(64, 0) == binomial(64, 32) - binomial(64, 31));
        CHECK(multiplicity(64, 64) == 1);
    }
    SUBCASE("invalid pairs rejected") {
        CHECK_THROWS(multiplicity(4, 1));
        CHECK_THROWS(multiplicity(4, 6));
    }
}

TEST_CASE("exact spectrum") {
    SUBCASE("pure symmetric state concentrates at j = N/2") {
        const auto spec = spectrum_exact(BlochState::from_s(1.0, 0.0), 5);
        CHECK(spec.entries.front().twice_j == 5);
        CHECK(spec.entries.front().p == doctest::Approx(1.0));
        for (std::size_t i = 1; i < spec.entries.size(); ++i) {
            CHECK(spec.entries[i].p == doctest::Approx(0.0));
        }
    }
    SUBCASE("maximally mixed state weights subspaces by dimension") {
        const auto spec = spectrum_exact(BlochState::from_s(0.0, 0.0), 2);
        CHECK(spec.entries[0].p == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(spec.entries[1].p == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("normalization for all N up to 64") {
        for (int N : {1, 2, 3, 7, 16, 33, 64}) {
            for (double s : {0.0, 1e-13, 0.2, 0.7, 0.999, 1.0}) {
                const auto spec = spectrum_exact(BlochState::from_s(s, 0.0), N);
                double sum = 0.0;
                for (const auto& e : spec.entries) {
                    CHECK(e.p >= 0.0);
                    sum += e.p;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("phi independence is structural") {
        const auto par = Parametrization::default_quadratic();
        const auto a = spectrum_exact(BlochState(0.4, 0.0, par), 6);
        const auto b = spectrum_exact(BlochState(0.4, 1.3, par), 6);
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            CHECK(a.entries[i].p == b.entries[i].p); // bitwise equal
        }
    }
    SUBCASE("dense projector oracle, N up to 8") {
        for (int N = 1; N <= 8; ++N) {
            const auto state = BlochState::from_s(0.6, 0.45);
            const auto spec = spectrum_exact(state, N);
            for (const auto& e : spec.entries) {
                CHECK(e.p == doctest::Approx(dense_pj(state, N, e.twice_j)).epsilon(1e-10));
            }
        }
    }
    SUBCASE("closed-form derivative matches finite differences") {
        const auto par = Parametrization::default_quadratic();
        const BlochState state(0.5, 0.0, par);
        const int N = 6;
        const auto pairs = spectrum_with_derivative(state, N);
        const auto spec = spectrum_exact(state, N);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const int tj = spec.entries[i].twice_j;
            const double fd = five_point_derivative(
                [&](double e) {
                    const auto s = spectrum_exact(BlochState(e, 0.0, par), N);
                    return s.entries[i].p;
                },
                0.5);
            CHECK(pairs[i].first == doctest::Approx(spec.entries[i].p));
            CHECK(pairs[i].second == doctest::Approx(fd).epsilon(1e-7));
            (void)tj;
        }
    }
}

TEST_CASE("small-epsilon expansion of the spectrum") {
    SUBCASE("top subspace at N=4") {
        const double eps = 1e-3;
        const double expansion = spectrum_expansion(eps, 4, 4);
        CHECK(expansion == doctest::Approx(1.0 - 3.0 * eps * eps / 16.0).epsilon(1e-15));
        const auto par = Parametrization::default_quadratic();
        const double exact = spectrum_exact(BlochState(eps, 0.0, par), 4).entries[0].p;
        CHECK(std::abs(expansion - exact) / exact < 1e-9);
    }
    SUBCASE("next subspace three-copy coefficient") {
        const double eps = 1e-3;
        const double expected = 3.0 * eps * eps / 16.0 * (1.0 - 2.0 * eps * eps / 16.0);
        CHECK(spectrum_expansion(eps, 4, 2) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("delta term at j=0") {
        // For even N, a_{0,N} picks up the extra -1/16.
        const double eps = 1e-2;
        const double mu = static_cast<double>(multiplicity(4, 0));
        const double a = (1.0 - 0.0 - 2.0 - 1.0) / 16.0;
        CHECK(spectrum_expansion(eps, 4, 0) ==
              doctest::Approx(mu * std::pow(eps / 4.0, 4) * (1 + a * eps * eps))
                  .epsilon(1e-14));
    }
    SUBCASE("residuals shrink at fourth order when epsilon halves") {
        const auto par = Parametrization::default_quadratic();
        for (int N : {4, 6}) {
            for (int tj = N - 4; tj <= N; tj += 2) {
                double rel[2];
                int idx = 0;
                for (double eps : {1e-2, 5e-3}) {
                    const auto spec = spectrum_exact(BlochState(eps, 0.0, par), N);
                    double exact = 0.0;
                    for (const auto& e : spec.entries) {
                        if (e.twice_j == tj) exact = e.p;
                    }
                    rel[idx++] = std::abs(spectrum_expansion(eps, N, tj) - exact) / exact;
                }
                CHECK(rel[0] / rel[1] > 3.5);
            }
        }
    }
    SUBCASE("invalid j rejected") { CHECK_THROWS(spectrum_expansion(0.1, 4, 1)); }
}

TEST_CASE("per-subspace information in the nearly-pure regime") {
    SUBCASE("N=4 hierarchy at small epsilon") {
        const double eps = 1e-3;
        const auto f = fi_per_subspace(eps, 4);
        CHECK(f.f_minus1 == doctest::Approx(0.75).epsilon(1e-5));
        CHECK(f.f_top == doctest::Approx(9.0 * eps * eps / 64.0).epsilon(1e-12));
        CHECK(f.f_minus2 == doctest::Approx(4.0 * eps * eps / 32.0).epsilon(1e-12));
    }
    SUBCASE("truncated total approaches (N-1)/4") {
        for (int N : {4, 6, 10}) {
            const auto f = fi_per_subspace(1e-6, N);
            CHECK(f.truncated_total == doctest::Approx((N - 1) / 4.0).epsilon(1e-9));
        }
    }
    SUBCASE("finite-difference oracle on the exact spectrum") {
        // f_j = (dp/deps)^2 / p from the closed-form distribution; expansions
        // must agree to the stated truncation order (relative O(eps^2)).
        const auto par = Parametrization::default_quadratic();
        const double eps = 1e-3;
        for (int N : {2, 4, 6}) {
            const BlochState state(eps, 0.0, par);
            const auto pairs = spectrum_with_derivative(state, N);
            const auto spec = spectrum_exact(state, N);
            const auto f = fi_per_subspace(eps, N);
            for (std::size_t i = 0; i < spec.entries.size(); ++i) {
                const int tj = spec.entries[i].twice_j;
                const auto [p, dp] = pairs[i];
                const double f_exact = dp * dp / p;
                if (tj == N) {
                    CHECK(std::abs(f.f_top - f_exact) / std::max(f_exact, 1e-30) < 1e-2);
                } else if (tj == N - 2) {
                    CHECK(std::abs(f.f_minus1 - f_exact) / f_exact < 1e-4);
                } else if (tj == N - 4 && N >= 4) {
                    CHECK(std::abs(f.f_minus2 - f_exact) / std::max(f_exact, 1e-30) < 1e-2);
                }
            }
        }
    }
    SUBCASE("difference from the quantum bound is the documented offset") {
        for (int N : {4, 6, 8, 10}) {
            for (double eps : {1e-3, 1e-2}) {
                const auto f = fi_per_subspace(eps, N);
                const double qfi = N * 4.0 / (16.0 - eps * eps);
                const double offset = 0.25 + 5.0 * eps * eps / 64.0;
                CHECK(std::abs(qfi - f.truncated_total - offset) <
                      0.01 * N * std::pow(eps, 4) + 1e-15);
            }
        }
    }
    SUBCASE("N < 2 rejected") { CHECK_THROWS(fi_per_subspace(0.1, 1)); }
}

TEST_CASE("nearly-pure decomposition") {
    const auto par = Parametrization::default_quadratic();

    SUBCASE("epsilon = 0 collapses to the aligned pure state") {
        const auto d = nearly_pure_decomposition(BlochState(0.0, 0.4, par), 3);
        CHECK(d.w0 == doctest::Approx(1.0));
        CHECK(d.w1 == doctest::Approx(0.0));
        const auto rho = build_density(BlochState(0.0, 0.4, par), 3);
        CHECK(max_abs(d.tau0 - rho) < 1e-12);
    }
    SUBCASE("flip mixture overlaps the symmetric subspace by exactly 1/N") {
        for (int N : {2, 4, 6, 9}) {
            const auto d = nearly_pure_decomposition(BlochState(0.05, 0.3, par), N);
            const auto proj = symmetric_projector(N);
            CHECK((proj * d.tau1).trace().real() == doctest::Approx(1.0 / N).epsilon(1e-10));
            CHECK(is_density_operator(d.tau0, 1e-10));
            CHECK(is_density_operator(d.tau1, 1e-10));
        }
    }
    SUBCASE("trace distance to the exact state is O(N^2 eps^4)") {
        // Empirically C ~ 1/256; assert with a conservative constant.
        for (int N : {2, 4, 6}) {
            for (double eps : {0.02, 0.05, 0.1}) {
                const BlochState state(eps, 0.25, par);
                const auto d = nearly_pure_decomposition(state, N);
                const DenseOperator approx = d.w0 * d.tau0 + d.w1 * d.tau1;
                const DenseOperator diff = build_density(state, N) - approx;
                Eigen::SelfAdjointEigenSolver<DenseOperator> es(diff);
                const double tdist = 0.5 * es.eigenvalues().cwiseAbs().sum();
                CHECK(tdist <= 0.02 * N * N * std::pow(eps, 4));
            }
        }
    }
    SUBCASE("weights are consistent with the top-two spectrum weights") {
        const double eps = 0.05;
        const int N = 6;
        const auto d = nearly_pure_decomposition(BlochState(eps, 0.0, par), N);
        const auto spec = spectrum_exact(BlochState(eps, 0.0, par), N);
        const double p_top = spec.entries[0].p;
        CHECK(std::abs(d.w0 + d.w1 / N - p_top) < std::pow(eps, 4) * N * N);
    }
}
