// ===========================================================================
// acceptance gate: one line per criterion, nonzero exit when any fails.
//
//   1 spectral characterization on 1000 random joints      (< 10 s)
//   2 data-processing inequality on 1000 random chains     (< 20 s)
//   3 combinatorial Kronecker spectra vs materialized SVD
//   4 block construction driving lambda2 to 1, n = 4..16   (< 30 s)
//   5 binary bound reproduction and grid containment
//   6 extreme-point enumeration vs closed form, n <= 6
//   7 brute-force sweeps vs every bound                    (< 5 min)
//   8 region hierarchy on sampled candidates
//   9 multiple-access necessary conditions
// ===========================================================================
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "corrspec/asymptotic.hpp"
#include "corrspec/binary.hpp"
#include "corrspec/dpi.hpp"
#include "corrspec/error.hpp"
#include "corrspec/oracle.hpp"
#include "corrspec/prob.hpp"
#include "corrspec/regions.hpp"
#include "corrspec/rng.hpp"
#include "corrspec/spectral.hpp"
#include "corrspec/tol.hpp"

using namespace corrspec;

namespace {

int failures = 0;

void criterion(int index, const std::string& name, double limit_s,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0 && secs > limit_s) {
        ok = false;
        detail += (detail.empty() ? "" : "; ") + std::string("over time limit");
    }
    std::printf("criterion %d: %-4s %-42s (%.2f s)%s%s\n", index, ok ? "PASS" : "FAIL",
                name.c_str(), secs, detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

prob::JointDist bss(double p) {
    prob::Mat m(2, 2);
    m << (1 - p) / 2, p / 2, p / 2, (1 - p) / 2;
    return {prob::indexed_alphabet(2, "u"), prob::indexed_alphabet(2, "v"), m};
}

prob::JointDist random_joint(rng::Stream& s, int rows, int cols) {
    const auto flat = s.next_simplex(static_cast<std::size_t>(rows) * cols);
    prob::Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
    prob::JointDist j(prob::indexed_alphabet(rows, "x"), prob::indexed_alphabet(cols, "y"),
                      std::move(m));
    prob::validate_joint(j);
    return j;
}

prob::Kernel random_kernel(rng::Stream& s, const prob::Alphabet& from, int to) {
    prob::Mat m(from.size(), to);
    for (int r = 0; r < from.size(); ++r) {
        const auto row = s.next_simplex(static_cast<std::size_t>(to));
        for (int c = 0; c < to; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return {from, prob::indexed_alphabet(to, "z"), std::move(m)};
}

prob::Mat kron(const prob::Mat& a, const prob::Mat& b) {
    prob::Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

bool c1_iff_suite(std::string& detail) {
    rng::Stream sizes(101);
    for (int i = 0; i < 1000; ++i) {
        auto item = rng::item_stream(2024, static_cast<std::uint64_t>(i));
        const int rows = 2 + static_cast<int>(sizes.next_below(5));
        const int cols = 2 + static_cast<int>(sizes.next_below(5));
        auto j = random_joint(item, rows, cols);
        const auto t = spectral::tilde(j);
        const auto rep = spectral::verify_theorem_iff(t);
        if (!rep.valid) {
            detail = "joint " + std::to_string(i) + " rejected: " +
                     (rep.failures.empty() ? "?" : rep.failures.front());
            return false;
        }
        if (std::abs(rep.sigma(0) - 1.0) > 1e-8 || rep.sigma.minCoeff() < -1e-10 ||
            rep.sigma.maxCoeff() > 1.0 + 1e-8) {
            detail = "spectrum out of range at joint " + std::to_string(i);
            return false;
        }
        const double residual = (spectral::untilde(t) - j.mass).cwiseAbs().maxCoeff();
        if (residual >= 1e-12) {
            detail = "round-trip residual " + std::to_string(residual);
            return false;
        }
    }
    return true;
}

bool c2_dpi_suite(std::string& detail) {
    for (int i = 0; i < 1000; ++i) {
        auto item = rng::item_stream(7310, static_cast<std::uint64_t>(i));
        const int nx = 2 + static_cast<int>(item.next_below(4));
        const int ny = 2 + static_cast<int>(item.next_below(4));
        const int nz = 2 + static_cast<int>(item.next_below(4));
        dpi::ChainSpec chain;
        chain.pxy = random_joint(item, nx, ny);
        chain.kzy = random_kernel(item, chain.pxy.cols, nz);
        const auto rep = dpi::check_dpi(chain);
        if (!rep.holds || rep.min_slack < -tol::kInequality) {
            detail = "DPI violated at chain " + std::to_string(i);
            return false;
        }
        if (!(rep.factorization_residual < 1e-10)) {
            detail = "factorization residual " + std::to_string(rep.factorization_residual);
            return false;
        }
    }
    // symmetric binary cascade: equality case
    dpi::ChainSpec cascade;
    cascade.pxy = bss(0.25);
    prob::Mat flip(2, 2);
    flip << 0.9, 0.1, 0.1, 0.9;
    cascade.kzy = prob::Kernel(cascade.pxy.cols, prob::indexed_alphabet(2, "z"), flip);
    const auto rep = dpi::check_dpi(cascade);
    if (std::abs(rep.min_slack) > 1e-10) {
        detail = "cascade slack " + std::to_string(rep.min_slack);
        return false;
    }
    return true;
}

bool c3_kronecker(std::string& detail) {
    for (int l : {2, 3}) {
        for (int n = 1; n <= 3; ++n) {
            for (int trial = 0; trial < 20; ++trial) {
                auto item = rng::item_stream(5150 + l, static_cast<std::uint64_t>(n * 100 + trial));
                auto j = random_joint(item, l, l);
                const auto spec = spectral::correlation_spectrum(j);
                prob::Vec base(spec.lambdas.size() + 1);
                base(0) = 1.0; // lambda1 = 1 exactly for every valid joint
                base.tail(spec.lambdas.size()) = spec.lambdas;

                int total = 1;
                for (int k = 0; k < n; ++k) total *= l;
                const auto comb = asymptotic::nletter_spectrum(base, n, total);

                prob::Mat t = spectral::tilde(j).mat;
                prob::Mat power = t;
                for (int k = 1; k < n; ++k) power = kron(power, t);
                const prob::Vec direct = spectral::singular_values(power);

                if (comb.values.size() != direct.size()) {
                    detail = "value count mismatch";
                    return false;
                }
                for (Eigen::Index i = 0; i < direct.size(); ++i)
                    if (std::abs(comb.values(i) - direct(i)) > 1e-9) {
                        detail = "l=" + std::to_string(l) + " n=" + std::to_string(n) +
                                 " index " + std::to_string(i);
                        return false;
                    }
                // positions 2..n+1 hold exactly lambda2 of the base
                for (int i = 1; i <= n; ++i)
                    if (comb.values(i) != base(1)) {
                        detail = "lambda2 multiplicity broken at position " + std::to_string(i + 1);
                        return false;
                    }
            }
        }
    }
    return true;
}

bool c4_construction(std::string& detail) {
    prob::Vec px(2), pu(2);
    px << 0.3, 0.7;
    pu << 0.5, 0.5;
    double last_lambda2 = 0.0;
    for (int n = 4; n <= 16; ++n) {
        const auto c = asymptotic::construct_witsenhausen(px, pu, n, {0});
        const auto v = asymptotic::verify_app_bound(c);
        if (!v.pass) {
            detail = "certificate failed at n=" + std::to_string(n);
            return false;
        }
        if (c.gap > std::pow(0.5, n) + 1e-15) {
            detail = "gap bound broken at n=" + std::to_string(n);
            return false;
        }
        if (c.lambda2 < c.certified_lower - tol::kInequality) {
            detail = "lambda2 below certificate at n=" + std::to_string(n);
            return false;
        }
        last_lambda2 = c.lambda2;
    }
    if (last_lambda2 < 0.999) {
        detail = "lambda2(16) = " + std::to_string(last_lambda2);
        return false;
    }
    // exact subset-sum hit: uniform px over a dyadic block decomposes exactly
    prob::Vec half(2);
    half << 0.5, 0.5;
    const auto exact = asymptotic::construct_witsenhausen(half, pu, 3, {0});
    if (!exact.exact_hit || std::abs(exact.lambda2 - 1.0) > 1e-10) {
        detail = "exact-hit lambda2 = " + std::to_string(exact.lambda2);
        return false;
    }
    return true;
}

bool c5_binary_bounds(std::string& detail) {
    const double isq = 1.0 / std::sqrt(2.0);
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9; };

    const auto mid = binary::bounds(isq, isq, 0.5);
    if (!(close(mid.outer1.lo, -0.5) && close(mid.outer1.hi, 0.5) &&
          close(mid.outer2.lo, -0.5) && close(mid.outer2.hi, 0.5) &&
          close(mid.inner.lo, -0.5) && close(mid.inner.hi, 0.5))) {
        detail = "a=b=1/sqrt(2) intervals";
        return false;
    }
    const auto skew = binary::bounds(std::sqrt(0.2), std::sqrt(0.5), 0.5);
    if (!(close(skew.outer1.lo, -0.5) && close(skew.outer1.hi, 0.5) &&
          close(skew.outer2.lo, -0.375) && close(skew.outer2.hi, 0.375) &&
          close(skew.inner.lo, -0.25) && close(skew.inner.hi, 0.25))) {
        detail = "a^2=0.2, b^2=0.5 intervals";
        return false;
    }

    const auto grid = binary::curve_data(99, true, 0.5);
    if (grid.size() != 99u * 99u) {
        detail = "grid size " + std::to_string(grid.size());
        return false;
    }
    for (const auto& row : grid) {
        const auto& s = row.set;
        const double vals[] = {s.outer1.lo, s.outer1.hi, s.outer2.lo,
                               s.outer2.hi, s.inner.lo,  s.inner.hi};
        for (double v : vals)
            if (!std::isfinite(v)) {
                detail = "non-finite bound in grid";
                return false;
            }
        if (!(s.outer1.lo <= s.outer2.lo + tol::kInequality &&
              s.outer2.lo <= s.inner.lo + tol::kInequality &&
              s.inner.hi <= s.outer2.hi + tol::kInequality &&
              s.outer2.hi <= s.outer1.hi + tol::kInequality)) {
            detail = "containment broken at a=" + std::to_string(row.a) +
                     " b=" + std::to_string(row.b);
            return false;
        }
    }

    // figure data regenerates byte-identically
    auto render = [] {
        std::string csv;
        char buf[160];
        for (const auto& r : binary::curve_data(99, false, 0.5)) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                          r.a, r.b, r.set.outer1.lo, r.set.outer1.hi, r.set.outer2.lo,
                          r.set.outer2.hi, r.set.inner.lo, r.set.inner.hi);
            csv += buf;
        }
        return csv;
    };
    const std::string once = render();
    if (once.empty() || once != render()) {
        detail = "figure CSV not deterministic";
        return false;
    }
    return true;
}

bool c6_extreme_points(std::string& detail) {
    for (int n = 1; n <= 6; ++n) {
        const long long cells = 1LL << n;
        for (long long i = 1; i < cells; ++i) {
            for (long long j = 1; j < cells; ++j) {
                const double a2 = static_cast<double>(i) / static_cast<double>(cells);
                const double b2 = static_cast<double>(j) / static_cast<double>(cells);
                const double a = std::sqrt(a2), b = std::sqrt(b2);
                const auto ep = binary::extreme_point_max(a, b, n);
                const double closed = std::min(a2, b2) * std::min(1 - a2, 1 - b2) /
                                      (a * b * std::sqrt((1 - a2) * (1 - b2)));
                if (std::abs(ep.value - closed) > 1e-10) {
                    detail = "n=" + std::to_string(n) + " i=" + std::to_string(i) +
                             " j=" + std::to_string(j);
                    return false;
                }
            }
        }
    }
    return true;
}

bool c7_oracle(std::string& detail) {
    const auto src = bss(0.25);
    for (int n = 1; n <= 3; ++n) {
        oracle::OracleConfig cfg;
        cfg.n = n;
        const auto r = oracle::frontier(src, cfg);
        const std::uint64_t want = n == 1 ? 16u : n == 2 ? 256u : 65536u;
        if (r.samples_evaluated != want) {
            detail = "pair count at n=" + std::to_string(n);
            return false;
        }
        if (!r.clean) {
            detail = "violation in exhaustive sweep n=" + std::to_string(n) + ", pair " +
                     std::to_string(r.first_violation_id);
            return false;
        }
        if (n == 1 && std::abs(r.best_lambda(1) - 0.5) > 1e-12) {
            detail = "copy encoders missed lambda2=0.5";
            return false;
        }
    }
    oracle::OracleConfig rnd;
    rnd.mode = oracle::Mode::Random;
    rnd.budget = 100000;
    rnd.seed = 7;
    const auto r = oracle::frontier(src, rnd);
    if (!r.clean) {
        detail = "violation in random sweep, pair " + std::to_string(r.first_violation_id);
        return false;
    }
    return true;
}

bool c8_regions(std::string& detail) {
    const auto src = bss(0.25);
    regions::DistortionSpec ds;
    ds.d1 = prob::Mat(2, 2);
    ds.d1 << 0, 1, 1, 0;
    ds.d2 = ds.d1;

    regions::SamplerConfig cfg;
    cfg.seed = 17;
    cfg.budget = 500;
    const auto run = regions::rd_region_sample(src, ds, 1.0, 1.0,
                                               regions::SetPredicate::Sout4, cfg);
    if (!run.hierarchy_ok || run.sin_not_sout2 || run.sout2cert_not_sout1 ||
        run.sin_not_sout4 || run.cap_not_sout4) {
        detail = "samplewise hierarchy violated";
        return false;
    }

    // the common-information instance: accepted by the trifactor search with the
    // planted |W| = 2, rejected by the spectral conditionings
    regions::Candidate cand;
    cand.pq = prob::Vec::Ones(1);
    cand.x1 = prob::indexed_alphabet(2, "a");
    cand.x2 = prob::indexed_alphabet(2, "b");
    cand.table = prob::Mat(4, 4);
    for (int r = 0; r < 4; ++r) cand.table.row(r) << 0.5, 0.0, 0.0, 0.5;
    const auto tc = regions::make_test_channel(src, cand);
    const auto tri = regions::membership_sout2(tc);
    if (!tri.member || tri.w_used != 2) {
        detail = "trifactor search missed the planted W";
        return false;
    }
    if (regions::membership_sout4(tc, 0.5).pass) {
        detail = "spectral conditioning accepted common information";
        return false;
    }

    // region containment under predicate nesting on a shared sample stream
    regions::SamplerConfig small = cfg;
    small.budget = 200;
    const auto outer = regions::rd_region_sample(src, ds, 1.0, 1.0,
                                                 regions::SetPredicate::Sout4, small);
    const auto capped = regions::rd_region_sample(src, ds, 1.0, 1.0,
                                                  regions::SetPredicate::Sout2Cap4, small);
    std::vector<int> outer_ids, capped_ids;
    for (const auto& rec : outer.records)
        if (rec.selected) outer_ids.push_back(rec.id);
    for (const auto& rec : capped.records)
        if (rec.selected) capped_ids.push_back(rec.id);
    if (!std::includes(outer_ids.begin(), outer_ids.end(), capped_ids.begin(),
                       capped_ids.end())) {
        detail = "nested predicate selected a sample outside the looser region";
        return false;
    }
    return true;
}

bool c9_mac(std::string& detail) {
    const auto src = bss(0.25);
    regions::Candidate copy;
    copy.pq = prob::Vec::Ones(1);
    copy.x1 = prob::indexed_alphabet(2, "a");
    copy.x2 = prob::indexed_alphabet(2, "b");
    copy.table = prob::Mat::Identity(4, 4);

    const prob::Alphabet pairs = prob::indexed_alphabet(4, "p");
    const prob::Kernel identity(pairs, prob::indexed_alphabet(4, "y"),
                                prob::Mat::Identity(4, 4));
    const prob::Kernel zero(pairs, prob::indexed_alphabet(1, "y"), prob::Mat::Ones(4, 1));

    const auto pass_rep = regions::mare_check(src, identity, copy, -1.0);
    if (!pass_rep.pass) {
        detail = "identity channel with copy encoders rejected (" + pass_rep.worst + ")";
        return false;
    }
    bool sum_rate_tight = false;
    for (const auto& c : pass_rep.constraints)
        if (c.name == "rate.h_uv" && std::abs(c.margin) <= 1e-9) sum_rate_tight = true;
    if (!sum_rate_tight) {
        detail = "sum-rate margin not zero";
        return false;
    }

    if (regions::mare_check(src, zero, copy, -1.0).pass) {
        detail = "zero-capacity channel accepted";
        return false;
    }

    regions::Candidate common;
    common.pq = prob::Vec::Ones(1);
    common.x1 = prob::indexed_alphabet(2, "a");
    common.x2 = prob::indexed_alphabet(2, "b");
    common.table = prob::Mat(4, 4);
    for (int r = 0; r < 4; ++r) common.table.row(r) << 0.5, 0.0, 0.0, 0.5;
    for (const auto* channel : {&identity, &zero}) {
        const auto rep = regions::mare_check(src, *channel, common, -1.0);
        bool spectral_fail = false;
        for (const auto& c : rep.constraints)
            if (!c.pass && c.name.rfind("rate.", 0) != 0) spectral_fail = true;
        if (rep.pass || !spectral_fail) {
            detail = "common-information candidate not rejected spectrally";
            return false;
        }
    }
    return true;
}

} // namespace

int main() {
    criterion(1, "spectral characterization, 1000 joints", 10.0, c1_iff_suite);
    criterion(2, "data-processing inequality, 1000 chains", 20.0, c2_dpi_suite);
    criterion(3, "Kronecker spectra vs materialized SVD", 0.0, c3_kronecker);
    criterion(4, "block construction certificates, n=4..16", 30.0, c4_construction);
    criterion(5, "binary bound reproduction and containment", 0.0, c5_binary_bounds);
    criterion(6, "extreme points vs closed form, n<=6", 0.0, c6_extreme_points);
    criterion(7, "brute-force sweeps vs every bound", 300.0, c7_oracle);
    criterion(8, "region hierarchy on sampled candidates", 0.0, c8_regions);
    criterion(9, "multiple-access necessary conditions", 0.0, c9_mac);

    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
