#include "corrspec/factored.hpp"

#include "helpers.hpp"

using namespace corrspec;
using namespace testutil;

namespace {

// X1 = U through BSC(e1), X2 = V through BSC(e2), (U,V) ~ BSS(p): the workhorse
// four-variable test fixture
prob::FactoredDist chain_fixture(double p, double e1, double e2) {
    auto uv = prob::from_pair(bss(p), "u", "v");
    auto with_x1 = prob::attach_conditional(uv, {"x1", prob::indexed_alphabet(2, "a")}, {"u"},
                                            bsc(e1).rows);
    return prob::attach_conditional(with_x1, {"x2", prob::indexed_alphabet(2, "b")}, {"v"},
                                    bsc(e2).rows);
}

} // namespace

TEST_SUITE("factored") {

TEST_CASE("axes are canonicalized by name") {
    auto j = bss(0.25);
    auto f = prob::from_pair(j, "v", "u"); // deliberately reversed
    CHECK(f.axes[0].name == "u");
    CHECK(f.axes[1].name == "v");
    // mass must have been transposed along with the axes
    auto back = prob::pair_joint(f, {"v"}, {"u"});
    CHECK((back.mass - j.mass).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("marginalize and condition agree with hand computation") {
    auto f = chain_fixture(0.25, 0.1, 0.1);
    CHECK(f.cells() == 16);

    auto pu = prob::axis_marginal(f, "u");
    CHECK(pu(0) == doctest::Approx(0.5).epsilon(1e-12));

    // P(x1=0 | u=0) = 0.9 regardless of the rest of the chain
    auto given_u0 = prob::condition(f, {{"u", 0}});
    auto px1 = prob::axis_marginal(given_u0, "x1");
    CHECK(px1(0) == doctest::Approx(0.9).epsilon(1e-12));

    // conditioning on (u,v) makes x1 and x2 independent
    auto given_uv = prob::condition(f, {{"u", 0}, {"v", 1}});
    auto x1x2 = prob::pair_joint(given_uv, {"x1"}, {"x2"});
    auto r = prob::row_marginal(x1x2);
    auto c = prob::col_marginal(x1x2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            CHECK(x1x2.mass(a, b) == doctest::Approx(r(a) * c(b)).epsilon(1e-12));
}

TEST_CASE("pair_joint flattens groups row-major in the given order") {
    auto f = chain_fixture(0.25, 0.0, 0.0); // noiseless: x1=u, x2=v
    auto j = prob::pair_joint(f, {"x1", "u"}, {"x2", "v"});
    CHECK(j.rows.size() == 4);
    // only diagonal-in-(x1,u) cells carry mass
    CHECK(j.mass(0, 0) == doctest::Approx(0.375).epsilon(1e-12)); // (x1=0,u=0),(x2=0,v=0)
    CHECK(j.mass(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("event mass and zero events") {
    auto f = chain_fixture(0.25, 0.0, 0.0);
    CHECK(prob::event_mass(f, {{"u", 0}, {"x1", 0}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(prob::event_mass(f, {{"u", 0}, {"x1", 1}}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(prob::condition(f, {{"u", 0}, {"x1", 1}}), Error);
}

TEST_CASE("grouped entropies and conditional mutual information") {
    auto f = chain_fixture(0.25, 0.1, 0.1);
    const double h_uv = prob::joint_entropy(bss(0.25));
    CHECK(prob::group_entropy(f, {"u", "v"}) == doctest::Approx(h_uv).epsilon(1e-12));

    // I(U;V) via the factored route matches the pair route
    CHECK(prob::cond_mutual_information(f, {"u"}, {"v"}) ==
          doctest::Approx(prob::mutual_information(bss(0.25))).epsilon(1e-10));

    // chain X1 - U - V - X2: conditioning on (U,V) wipes out the X1;X2 dependence
    CHECK(prob::cond_mutual_information(f, {"x1"}, {"x2"}, {"u", "v"}) ==
          doctest::Approx(0.0).epsilon(1e-10));

    // chain rule sanity: I(X1;X2) <= I(U;V)
    CHECK(prob::cond_mutual_information(f, {"x1"}, {"x2"}) <
          prob::cond_mutual_information(f, {"u"}, {"v"}));
}

TEST_CASE("unknown axis and bad masses are rejected") {
    auto f = chain_fixture(0.25, 0.1, 0.1);
    CHECK_THROWS_AS(prob::marginalize(f, {"nope"}), Error);
    CHECK_THROWS_AS(prob::axis_marginal(f, ""), Error);
    std::vector<prob::Axis> axes{{"x", prob::indexed_alphabet(2)}};
    CHECK_THROWS_AS(prob::make_factored(axes, {0.5, 0.6}), Error);
}

} // TEST_SUITE
