#include "corrspec/spectral.hpp"

#include <Eigen/SVD>

#include "helpers.hpp"

using namespace corrspec;
using namespace testutil;

TEST_SUITE("spectral") {

TEST_CASE("tilde of the doubly symmetric source") {
    auto t = spectral::tilde(bss(0.25));
    CHECK(t.mat(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(t.mat(0, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(spectral::lambda2(bss(0.25)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tilde rejects zero marginals, untilde round-trips") {
    auto zero_row = make_joint({{0.5, 0.5}, {0.0, 0.0}});
    CHECK_THROWS_AS(spectral::tilde(zero_row), Error);

    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto s = rng::item_stream(777, seed);
        int r = 2 + static_cast<int>(s.next_below(5));
        int c = 2 + static_cast<int>(s.next_below(5));
        auto j = random_joint(s, r, c);
        auto t = spectral::tilde(j);
        CHECK((spectral::untilde(t) - j.mass).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("svd meets its contract on random matrices") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto s = rng::item_stream(31337, seed);
        int r = 1 + static_cast<int>(s.next_below(6));
        int c = 1 + static_cast<int>(s.next_below(6));
        Mat a(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) a(i, j) = s.next_unit() - 0.3;
        auto d = spectral::svd(a);
        int l = static_cast<int>(std::min(r, c));
        REQUIRE(d.sigma.size() == l);
        for (int i = 1; i < l; ++i) CHECK(d.sigma(i) <= d.sigma(i - 1) + 1e-12);
        CHECK((d.M.transpose() * d.M - Mat::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((d.N.transpose() * d.N - Mat::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-8);
        Mat rec = d.M * d.sigma.asDiagonal() * d.N.transpose();
        CHECK((rec - a).cwiseAbs().maxCoeff() < 1e-8);
        // sign convention: first significant coordinate of each left vector positive
        for (int i = 0; i < l; ++i) {
            for (int k = 0; k < r; ++k) {
                if (std::abs(d.M(k, i)) > 1e-12) {
                    CHECK(d.M(k, i) > 0.0);
                    break;
                }
            }
        }
        // values agree with an independent implementation
        Eigen::JacobiSVD<Mat> ref(a);
        for (int i = 0; i < l; ++i)
            CHECK(d.sigma(i) == doctest::Approx(ref.singularValues()(i)).epsilon(1e-9));
    }
}

TEST_CASE("svd is deterministic across repeated calls") {
    auto s = rng::item_stream(5, 0);
    Mat a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = s.next_unit();
    auto d1 = spectral::svd(a);
    auto d2 = spectral::svd(a);
    CHECK((d1.M - d2.M).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d1.N - d2.N).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram route matches the dense route on a wide matrix") {
    auto s = rng::item_stream(99, 1);
    Mat a(3, 5000);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a(i, j) = s.next_unit() / 100.0;
    auto sig = spectral::singular_values(a);
    Eigen::JacobiSVD<Mat> ref(a);
    for (int i = 0; i < 3; ++i)
        CHECK(sig(i) == doctest::Approx(ref.singularValues()(i)).epsilon(1e-9));
}

TEST_CASE("verify_theorem_iff accepts valid joints") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto s = rng::item_stream(2024, seed);
        auto j = random_joint(s, 2 + static_cast<int>(s.next_below(4)),
                              2 + static_cast<int>(s.next_below(4)));
        auto rep = spectral::verify_theorem_iff(spectral::tilde(j));
        CHECK(rep.valid);
        CHECK(std::abs(rep.sigma(0) - 1.0) < 1e-8);
    }
}

TEST_CASE("verify_theorem_iff rejects the canonical counterexamples") {
    // sigma_1 = 1 but the top pair is not strictly positive
    Mat diag(2, 2);
    diag << 1.0, 0.0, 0.0, 0.5;
    auto rep = spectral::verify_theorem_iff(spectral::tilde_from_candidate(diag));
    CHECK_FALSE(rep.valid);
    bool no_pair = false;
    for (const auto& f : rep.failures) no_pair |= (f == "no-positive-top-pair");
    CHECK(no_pair);

    // scaling a genuine tilde matrix breaks sigma_1 = 1
    auto t = spectral::tilde(bss(0.25));
    auto scaled = spectral::tilde_from_candidate(Mat(1.2 * t.mat));
    auto rep2 = spectral::verify_theorem_iff(scaled);
    CHECK_FALSE(rep2.valid);
    bool bad_sigma = false;
    for (const auto& f : rep2.failures)
        bad_sigma |= (f == "sigma1-not-one" || f == "sigma-above-one");
    CHECK(bad_sigma);

    // raw candidate of a genuine joint is accepted with recovered marginals
    auto raw = spectral::tilde_from_candidate(t.mat);
    auto rep3 = spectral::verify_theorem_iff(raw);
    CHECK(rep3.valid);
    CHECK(rep3.recovered_px(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("identity coupling: lambda2 = 1, decomposes, still a valid joint") {
    auto ident = make_joint({{0.5, 0.0}, {0.0, 0.5}});
    CHECK(spectral::lambda2(ident) == doctest::Approx(1.0).epsilon(1e-12));
    auto d = spectral::decomposes(ident);
    REQUIRE(d.has_value());
    CHECK(d->s1_rows == std::vector<std::string>{"r0"});
    CHECK(d->s2_cols == std::vector<std::string>{"c0"});
    auto rep = spectral::verify_theorem_iff(spectral::tilde(ident));
    CHECK(rep.valid);
}

TEST_CASE("decomposes mirrors lambda2 >= 1 - 1e-7 on a mixed corpus") {
    std::vector<JointDist> corpus;
    corpus.push_back(bss(0.25));
    corpus.push_back(make_joint({{0.5, 0.0}, {0.0, 0.5}}));
    corpus.push_back(make_joint({{0.3, 0.2, 0.0}, {0.1, 0.4, 0.0}})); // zero col, connected
    corpus.push_back(make_joint({{0.2, 0.1, 0.0, 0.0},
                                 {0.3, 0.1, 0.0, 0.0},
                                 {0.0, 0.0, 0.2, 0.1}})); // two blocks
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = rng::item_stream(555, seed);
        corpus.push_back(random_joint(s, 3, 3));
    }
    for (auto& j : corpus) {
        bool lam_one = false;
        // decomposition implies lambda2 = 1 only when the tilde transform exists;
        // restricted support is what the spectrum sees
        auto sig = spectral::support_spectrum(j.mass);
        if (sig.size() > 1) lam_one = sig(1) >= 1.0 - 1e-7;
        CHECK(spectral::decomposes(j).has_value() == lam_one);
    }
}

TEST_CASE("support_spectrum agrees with correlation_spectrum and restricts support") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto s = rng::item_stream(42, seed);
        auto j = random_joint(s, 2 + static_cast<int>(s.next_below(4)),
                              2 + static_cast<int>(s.next_below(4)));
        auto full = spectral::correlation_spectrum(j);
        auto fast = spectral::support_spectrum(j.mass);
        REQUIRE(fast.size() == full.lambdas.size() + 1);
        for (int i = 0; i < full.lambdas.size(); ++i)
            CHECK(fast(i + 1) == doctest::Approx(full.lambdas(i)).epsilon(1e-9));

        // padding with zero rows/cols must not change the spectrum
        Mat padded = Mat::Zero(j.mass.rows() + 1, j.mass.cols() + 1);
        padded.topLeftCorner(j.mass.rows(), j.mass.cols()) = j.mass;
        auto padded_sig = spectral::support_spectrum(padded);
        REQUIRE(padded_sig.size() == fast.size());
        for (int i = 0; i < fast.size(); ++i)
            CHECK(padded_sig(i) == doctest::Approx(fast(i)).epsilon(1e-12));
    }
    // deterministic slice: 1 x k support has an empty tail
    Mat row(2, 2);
    row << 0.6, 0.4, 0.0, 0.0;
    auto sig = spectral::support_spectrum(row);
    CHECK(sig.size() == 1);
    CHECK(sig(0) == doctest::Approx(1.0));
}

TEST_CASE("signed 2x2 correlation") {
    CHECK(spectral::signed_lambda_2x2(bss(0.25).mass) == doctest::Approx(0.5).epsilon(1e-12));
    auto anti = make_joint({{0.0, 0.5}, {0.5, 0.0}});
    CHECK(spectral::signed_lambda_2x2(anti.mass) == doctest::Approx(-1.0).epsilon(1e-12));
    auto indep = make_joint({{0.25, 0.25}, {0.25, 0.25}});
    CHECK(spectral::signed_lambda_2x2(indep.mass) == doctest::Approx(0.0));
    Mat bad(2, 2);
    bad << 1.0, 0.0, 0.0, 0.0;
    CHECK_THROWS_AS(spectral::signed_lambda_2x2(bad), Error);
}

TEST_CASE("sigma positions 2..n+1 of a product carry lambda2 (kron cross-check)") {
    auto j2 = prob::kron(bss(0.25), bss(0.25));
    auto spec = spectral::correlation_spectrum(j2);
    // product spectrum of {1, 0.5} with itself: {1, 0.5, 0.5, 0.25}
    REQUIRE(spec.lambdas.size() == 3);
    CHECK(spec.lambdas(0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(spec.lambdas(1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(spec.lambdas(2) == doctest::Approx(0.25).epsilon(1e-10));
}

} // TEST_SUITE
