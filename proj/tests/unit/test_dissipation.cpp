#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qrb/dissipation.hpp"

using namespace qrb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const BathSpec kBase = BathSpec::ohmic(1e-3, 10.0, 0.07);

ModelParams random_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> g(0.0, 1.5), r(0.0, 1.0), u(-0.4, 0.4);
    return ModelParams::aqrsm(g(rng), r(rng), u(rng));
}

}  // namespace

TEST_CASE("ohmic spectral densities") {
    const ModelParams p = ModelParams::qrm(0.3);
    CHECK(spectral_density(Channel::cavity, 0.0, kBase, p) == 0.0);
    CHECK_THAT(spectral_density(Channel::cavity, 1.0, kBase, p), WithinRel(9.0483741803595946e-4, 1e-12));
    CHECK_THAT(spectral_density(Channel::qubit, 1.0, kBase, p), WithinRel(9.0483741803595946e-4, 1e-12));

    ModelParams bad = p;
    bad.delta = 0.0;
    CHECK_THROWS_AS(spectral_density(Channel::qubit, 1.0, kBase, bad), InvalidDivisor);
    bad.delta = -1.0;
    CHECK_THROWS_AS(spectral_density(Channel::qubit, 1.0, kBase, bad), InvalidDivisor);
    CHECK_NOTHROW(spectral_density(Channel::cavity, 1.0, kBase, bad));
}

TEST_CASE("bose occupation") {
    CHECK(bose_occupation(1.0, 0.0) == 0.0);
    CHECK(bose_occupation(0.3, 0.0) == 0.0);
    CHECK_THAT(bose_occupation(1.0, 1.0), WithinRel(0.58197670686932642, 1e-12));
    CHECK_THAT(bose_occupation(1.0, 0.07), WithinRel(6.2487534142e-7, 1e-9));
    CHECK_THAT(bose_occupation(1.0, 0.07), WithinRel(1.0 / (std::exp(1.0 / 0.07) - 1.0), 1e-12));
}

TEST_CASE("thermal rate products through a vanishing gap") {
    const double strength = 2.5e-3, temp = 0.07;
    // Exact x -> 0 limit of Gamma n and Gamma (1+n) with Gamma = strength * gap.
    const double limit = strength * temp;
    const ThermalRates zero = thermal_rates(strength, 0.0, temp);
    CHECK(zero.absorption == limit);
    CHECK(zero.emission == limit);

    const double gap = 1e-6;
    const ThermalRates r = thermal_rates(strength, gap, temp);
    const double gamma = strength * gap;
    const double n = bose_occupation(gap, temp);
    CHECK_THAT(r.absorption, WithinRel(gamma * n, 1e-8));
    CHECK_THAT(r.emission, WithinRel(gamma * (1.0 + n), 1e-8));
    // Both products sit within gap/T of the limit; their mean is second-order close.
    CHECK(std::abs(r.absorption - limit) / limit < gap / temp);
    CHECK(std::abs(r.emission - limit) / limit < gap / temp);
    CHECK_THAT(0.5 * (r.absorption + r.emission), WithinRel(limit, 1e-8));

    const ThermalRates cold = thermal_rates(strength, 0.4, 0.0);
    CHECK(cold.absorption == 0.0);
    CHECK(cold.emission == strength * 0.4);
}

TEST_CASE("decoupled cavity rates") {
    const TruncationSpec tr{12};
    const ModelParams p = ModelParams::qrm(0.0);
    const Eigensystem es = solve_model(p, tr);
    const RateTable rt = transition_rates(es, BathSpec{0.0, 1e-3, 10.0, 0.07, 0.07}, p);
    std::vector<Eigen::Index> where(static_cast<std::size_t>(tr.dim()));
    for (Eigen::Index k = 0; k < es.size(); ++k) {
        Eigen::Index idx = 0;
        es.vectors.col(k).cwiseAbs().maxCoeff(&idx);
        where[static_cast<std::size_t>(idx)] = k;
    }
    for (int n = 1; n <= tr.n_tr; ++n) {
        for (int s = 0; s < 2; ++s) {
            const Eigen::Index k = where[static_cast<std::size_t>(2 * n + s)];
            const Eigen::Index j = where[static_cast<std::size_t>(2 * (n - 1) + s)];
            CHECK_THAT(rt.gamma_c(k, j), WithinRel(1e-3 * n * std::exp(-0.1), 1e-12));
        }
    }
    CHECK(rt.gamma_q.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rate table invariants") {
    std::mt19937 rng(17);
    const TruncationSpec tr{40};
    for (int i = 0; i < 6; ++i) {
        const ModelParams p = random_params(rng);
        const Eigensystem es = solve_model(p, tr);
        const RateTable rt = build_rate_table(es, kBase, p);
        const Eigen::Index dim = es.size();
        for (Eigen::Index k = 0; k < dim; ++k) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                const bool same = es.parities[static_cast<std::size_t>(k)] == es.parities[static_cast<std::size_t>(j)];
                if (k > j) {
                    CHECK(rt.gamma_q(k, j) >= 0.0);
                    CHECK(rt.gamma_c(k, j) >= 0.0);
                } else {
                    CHECK(rt.gamma_q(k, j) == 0.0);
                    CHECK(rt.gamma_c(k, j) == 0.0);
                }
                if (same) {
                    CHECK(rt.gamma_q(k, j) == 0.0);
                    CHECK(rt.gamma_c(k, j) == 0.0);
                    if (k != j) CHECK(rt.pop_rate_matrix(k, j) == 0.0);
                }
                if (k != j) CHECK(rt.pop_rate_matrix(k, j) >= 0.0);
                CHECK(rt.coherence_consts(k, j).real() <= 0.0);
                CHECK(rt.coherence_consts(j, k) == std::conj(rt.coherence_consts(k, j)));
            }
            const double scale = rt.pop_rate_matrix.col(k).cwiseAbs().sum();
            CHECK(std::abs(rt.pop_rate_matrix.col(k).sum()) <= 1e-14 * std::max(scale, 1e-300));
            CHECK(rt.coherence_consts(k, k).imag() == 0.0);
            CHECK(rt.coherence_consts(k, k).real() == rt.pop_rate_matrix(k, k));
        }
    }
}

TEST_CASE("detailed balance at equal temperatures") {
    std::mt19937 rng(99);
    const TruncationSpec tr{40};
    for (int i = 0; i < 5; ++i) {
        const ModelParams p = random_params(rng);
        const double temp = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
        const BathSpec bath = BathSpec::ohmic(1e-3, 10.0, temp);
        const Eigensystem es = solve_model(p, tr);
        const RateTable rt = build_rate_table(es, bath, p);
        const Eigen::MatrixXd& m = rt.pop_rate_matrix;
        double worst = 0.0;
        for (Eigen::Index k = 1; k < es.size(); ++k) {
            for (Eigen::Index j = 0; j < k; ++j) {
                // Upward rates below the normal double range carry no relative precision.
                if (m(j, k) == 0.0 || m(k, j) < 1e-290) continue;
                // M_jk e^{-E_k/T} = M_kj e^{-E_j/T} in log form.
                const double lhs = std::log(m(j, k)) - (es.energies(k) - es.energies(j)) / temp;
                worst = std::max(worst, std::abs(std::expm1(lhs - std::log(m(k, j)))));
            }
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("zero temperature generator only decays") {
    const ModelParams p = ModelParams::qrm(0.4);
    const Eigensystem es = solve_model(p, TruncationSpec{20});
    const RateTable rt = build_rate_table(es, BathSpec::ohmic(1e-3, 10.0, 0.0), p);
    for (Eigen::Index k = 0; k < es.size(); ++k) {
        for (Eigen::Index j = k + 1; j < es.size(); ++j) CHECK(rt.pop_rate_matrix(j, k) == 0.0);
    }
}

TEST_CASE("closed system coherence constants") {
    const ModelParams p = ModelParams::aqrm(0.6, 0.5);
    const Eigensystem es = solve_model(p, TruncationSpec{20});
    const RateTable rt = build_rate_table(es, BathSpec{0.0, 0.0, 10.0, 0.07, 0.07}, p);
    for (Eigen::Index m = 0; m < es.size(); ++m) {
        for (Eigen::Index n = 0; n < es.size(); ++n) {
            const double freq = m == n ? 0.0 : es.energies(m) - es.energies(n);
            CHECK(rt.coherence_consts(m, n) == std::complex<double>(0.0, -freq));
        }
    }
}

TEST_CASE("coherence decay equals the mean out-rate") {
    const ModelParams p = ModelParams::qrm(0.5);
    const Eigensystem es = solve_model(p, TruncationSpec{20});
    const RateTable rt = build_rate_table(es, BathSpec::ohmic(1e-3, 10.0, 0.2), p);
    for (Eigen::Index m = 0; m < 8; ++m) {
        for (Eigen::Index n = 0; n < 8; ++n) {
            double out_m = 0.0, out_n = 0.0;
            for (Eigen::Index k = 0; k < es.size(); ++k) {
                if (k != m) out_m += rt.pop_rate_matrix(k, m);
                if (k != n) out_n += rt.pop_rate_matrix(k, n);
            }
            CHECK_THAT(-rt.coherence_consts(m, n).real(), WithinRel(0.5 * (out_m + out_n), 1e-12));
        }
    }
}

TEST_CASE("bath spec validation") {
    CHECK_THROWS_AS((BathSpec{-1.0, 1e-3, 10.0, 0.1, 0.1}.validate()), InvalidInput);
    CHECK_THROWS_AS((BathSpec{1e-3, 1e-3, 0.0, 0.1, 0.1}.validate()), InvalidInput);
    CHECK_THROWS_AS((BathSpec{1e-3, 1e-3, 10.0, -0.1, 0.1}.validate()), InvalidInput);
    CHECK(BathSpec::ohmic(1e-3, 10.0, 0.1).equal_temperatures());
}
