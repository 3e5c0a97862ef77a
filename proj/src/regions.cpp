#include "corrspec/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "corrspec/error.hpp"
#include "corrspec/rng.hpp"
#include "corrspec/spectral.hpp"
#include "corrspec/tol.hpp"

namespace corrspec::regions {

namespace {

struct Slice {
    int q = 0;
    double weight = 0.0;
    FactoredDist f; // axes u, v, x1, x2
};

// positive q-slices; zero-mass q values are listed in `skipped`
std::vector<Slice> q_slices(const TestChannel& tc, std::vector<std::string>* skipped) {
    std::vector<Slice> out;
    for (int k = 0; k < tc.pq.size(); ++k) {
        if (tc.pq(k) <= tol::kZeroMass) {
            if (skipped) skipped->push_back("q=" + std::to_string(k));
            continue;
        }
        out.push_back({k, tc.pq(k), prob::condition(tc.dist, {{"q", k}})});
    }
    return out;
}

std::string uv_tag(const Slice& s, bool with_q, int ui, int vi) {
    std::string tag = "u=" + std::to_string(ui) + ",v=" + std::to_string(vi);
    if (with_q) tag = "q=" + std::to_string(s.q) + "," + tag;
    return tag;
}

} // namespace

TestChannel make_test_channel(const JointDist& sources, const Candidate& c) {
    JointDist src = sources;
    prob::validate_joint(src);
    const int nu = src.rows.size();
    const int nv = src.cols.size();
    const int nq = static_cast<int>(c.pq.size());
    const int n1 = c.x1.size();
    const int n2 = c.x2.size();
    if (nq < 1) fail(Err::DegenerateMarginal, "time-sharing weights are empty");
    if (n1 < 1 || n2 < 1) fail(Err::AlphabetMismatch, "candidate output alphabets are empty");
    double qsum = 0.0;
    for (int k = 0; k < nq; ++k) {
        if (c.pq(k) < -tol::kNegClip) fail(Err::NegativeEntry, "negative time-sharing weight");
        qsum += std::max(0.0, c.pq(k));
    }
    if (std::abs(qsum - 1.0) > tol::kMassSum) fail(Err::SumNotOne, "time-sharing weights must sum to 1");
    if (c.table.rows() != static_cast<Eigen::Index>(nq) * nu * nv || c.table.cols() != n1 * n2) {
        fail(Err::AlphabetMismatch, "conditional table shape does not match (q,u,v) x (x1,x2)");
    }
    for (Eigen::Index r = 0; r < c.table.rows(); ++r) {
        double s = 0.0;
        for (Eigen::Index col = 0; col < c.table.cols(); ++col) {
            if (c.table(r, col) < -tol::kNegClip) {
                fail(Err::NegativeEntry, "conditional table has a negative entry");
            }
            s += std::max(0.0, c.table(r, col));
        }
        if (std::abs(s - 1.0) > tol::kRowSum) {
            fail(Err::SumNotOne, "conditional table row " + std::to_string(r) + " sums to " +
                                     std::to_string(s));
        }
    }

    std::vector<prob::Axis> axes = {
        {"q", prob::indexed_alphabet(nq, "q")}, {"u", src.rows},  {"v", src.cols},
        {"x1", c.x1},                           {"x2", c.x2},
    };
    std::vector<double> mass(static_cast<std::size_t>(nq) * nu * nv * n1 * n2);
    std::size_t idx = 0;
    for (int q = 0; q < nq; ++q) {
        for (int u = 0; u < nu; ++u) {
            for (int v = 0; v < nv; ++v) {
                const Eigen::Index row = (static_cast<Eigen::Index>(q) * nu + u) * nv + v;
                const double base = std::max(0.0, c.pq(q)) * src.mass(u, v);
                for (int a = 0; a < n1; ++a) {
                    for (int b = 0; b < n2; ++b) {
                        mass[idx++] = base * std::max(0.0, c.table(row, a * n2 + b));
                    }
                }
            }
        }
    }

    TestChannel tc;
    tc.dist = prob::make_factored(std::move(axes), std::move(mass));
    tc.pq = c.pq.cwiseMax(0.0);

    // invariant audit: the (q,u,v) marginal must factor as p(q) * p(u,v)
    auto quv = prob::marginalize(tc.dist, {"q", "u", "v"});
    double worst = 0.0;
    for (int q = 0; q < nq; ++q) {
        for (int u = 0; u < nu; ++u) {
            for (int v = 0; v < nv; ++v) {
                const double got = prob::event_mass(quv, {{"q", q}, {"u", u}, {"v", v}});
                worst = std::max(worst, std::abs(got - tc.pq(q) * src.mass(u, v)));
            }
        }
    }
    if (worst > tol::kMembership) {
        fail(Err::Internal, "time-sharing factorization drifted: " + std::to_string(worst));
    }
    return tc;
}

// ---------------------------------------------------------------------------
// factorization predicates
// ---------------------------------------------------------------------------

FactorReport membership_sin(const TestChannel& tc) {
    FactorReport rep;
    const bool with_q = tc.pq.size() > 1;
    for (const auto& s : q_slices(tc, &rep.skipped)) {
        const Vec pu = prob::axis_marginal(s.f, "u");
        const Vec pv = prob::axis_marginal(s.f, "v");
        for (int ui = 0; ui < pu.size(); ++ui) {
            if (pu(ui) <= tol::kZeroMass) {
                std::string tag = "u=" + std::to_string(ui);
                rep.skipped.push_back(with_q ? "q=" + std::to_string(s.q) + "," + tag : tag);
                continue;
            }
            const Vec px1_u = prob::axis_marginal(prob::condition(s.f, {{"u", ui}}), "x1");
            for (int vi = 0; vi < pv.size(); ++vi) {
                const double mass = prob::event_mass(s.f, {{"u", ui}, {"v", vi}});
                if (mass <= tol::kZeroMass) {
                    rep.skipped.push_back(uv_tag(s, with_q, ui, vi));
                    continue;
                }
                const Vec px2_v = prob::axis_marginal(prob::condition(s.f, {{"v", vi}}), "x2");
                const auto cond = prob::condition(s.f, {{"u", ui}, {"v", vi}});
                const Mat joint = prob::pair_joint(cond, {"x1"}, {"x2"}).mass;
                const double gap = (joint - px1_u * px2_v.transpose()).cwiseAbs().maxCoeff();
                rep.residual = std::max(rep.residual, gap);
            }
        }
    }
    rep.member = rep.residual < tol::kMembership;
    return rep;
}

FactorReport membership_sout1(const TestChannel& tc) {
    FactorReport rep;
    const bool with_q = tc.pq.size() > 1;
    for (const auto& s : q_slices(tc, &rep.skipped)) {
        const Vec pu = prob::axis_marginal(s.f, "u");
        const Vec pv = prob::axis_marginal(s.f, "v");
        std::vector<Vec> px1_u(static_cast<std::size_t>(pu.size()));
        std::vector<Vec> px2_v(static_cast<std::size_t>(pv.size()));
        for (int ui = 0; ui < pu.size(); ++ui) {
            if (pu(ui) > tol::kZeroMass) {
                px1_u[ui] = prob::axis_marginal(prob::condition(s.f, {{"u", ui}}), "x1");
            }
        }
        for (int vi = 0; vi < pv.size(); ++vi) {
            if (pv(vi) > tol::kZeroMass) {
                px2_v[vi] = prob::axis_marginal(prob::condition(s.f, {{"v", vi}}), "x2");
            }
        }
        for (int ui = 0; ui < pu.size(); ++ui) {
            for (int vi = 0; vi < pv.size(); ++vi) {
                const double mass = prob::event_mass(s.f, {{"u", ui}, {"v", vi}});
                if (mass <= tol::kZeroMass) {
                    rep.skipped.push_back(uv_tag(s, with_q, ui, vi));
                    continue;
                }
                const auto cond = prob::condition(s.f, {{"u", ui}, {"v", vi}});
                const Vec p1 = prob::axis_marginal(cond, "x1");
                const Vec p2 = prob::axis_marginal(cond, "x2");
                rep.residual = std::max(rep.residual, (p1 - px1_u[ui]).cwiseAbs().maxCoeff());
                rep.residual = std::max(rep.residual, (p2 - px2_v[vi]).cwiseAbs().maxCoeff());
            }
        }
    }
    rep.member = rep.residual < tol::kMembership;
    return rep;
}

// ---------------------------------------------------------------------------
// bounded trifactorization search
// ---------------------------------------------------------------------------

namespace {

struct SliceTarget {
    int nu = 0, nv = 0, n1 = 0, n2 = 0;
    std::vector<double> t;         // (u,v,x1,x2) row-major conditional target
    std::vector<std::uint8_t> pos; // positive (u,v) mask
    int npos = 0;

    double& at(int u, int v, int a, int b) {
        return t[static_cast<std::size_t>(((u * nv + v) * n1 + a) * n2 + b)];
    }
    double at(int u, int v, int a, int b) const {
        return t[static_cast<std::size_t>(((u * nv + v) * n1 + a) * n2 + b)];
    }
};

SliceTarget slice_target(const FactoredDist& f) {
    SliceTarget st;
    st.nu = static_cast<int>(prob::axis_marginal(f, "u").size());
    st.nv = static_cast<int>(prob::axis_marginal(f, "v").size());
    st.n1 = static_cast<int>(prob::axis_marginal(f, "x1").size());
    st.n2 = static_cast<int>(prob::axis_marginal(f, "x2").size());
    st.t.assign(static_cast<std::size_t>(st.nu) * st.nv * st.n1 * st.n2, 0.0);
    st.pos.assign(static_cast<std::size_t>(st.nu) * st.nv, 0);
    for (int u = 0; u < st.nu; ++u) {
        for (int v = 0; v < st.nv; ++v) {
            const double mass = prob::event_mass(f, {{"u", u}, {"v", v}});
            if (mass <= tol::kZeroMass) continue;
            st.pos[static_cast<std::size_t>(u * st.nv + v)] = 1;
            st.npos++;
            for (int a = 0; a < st.n1; ++a) {
                for (int b = 0; b < st.n2; ++b) {
                    st.at(u, v, a, b) =
                        prob::event_mass(f, {{"u", u}, {"v", v}, {"x1", a}, {"x2", b}}) / mass;
                }
            }
        }
    }
    return st;
}

struct TrifactorModel {
    int w = 0;
    std::vector<double> r;            // W
    std::vector<std::vector<double>> a; // per w: nu x n1 row-major, rows stochastic
    std::vector<std::vector<double>> b; // per w: nv x n2

    double eval(const SliceTarget& st, int u, int v, int x1, int x2) const {
        double m = 0.0;
        for (int k = 0; k < w; ++k) {
            m += r[static_cast<std::size_t>(k)] *
                 a[static_cast<std::size_t>(k)][static_cast<std::size_t>(u * st.n1 + x1)] *
                 b[static_cast<std::size_t>(k)][static_cast<std::size_t>(v * st.n2 + x2)];
        }
        return m;
    }
};

double model_residual(const SliceTarget& st, const TrifactorModel& mod) {
    double worst = 0.0;
    for (int u = 0; u < st.nu; ++u) {
        for (int v = 0; v < st.nv; ++v) {
            if (!st.pos[static_cast<std::size_t>(u * st.nv + v)]) continue;
            for (int a = 0; a < st.n1; ++a) {
                for (int b = 0; b < st.n2; ++b) {
                    worst = std::max(worst, std::abs(st.at(u, v, a, b) - mod.eval(st, u, v, a, b)));
                }
            }
        }
    }
    return worst;
}

void normalize_rows(std::vector<double>& table, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += table[static_cast<std::size_t>(i * cols + j)];
        if (s <= 1e-300) {
            for (int j = 0; j < cols; ++j) table[static_cast<std::size_t>(i * cols + j)] = 1.0 / cols;
        } else {
            for (int j = 0; j < cols; ++j) table[static_cast<std::size_t>(i * cols + j)] /= s;
        }
    }
}

TrifactorModel init_model(const SliceTarget& st, int w, int restart, rng::Stream& stream) {
    TrifactorModel mod;
    mod.w = w;
    mod.r.assign(static_cast<std::size_t>(w), 1.0 / w);
    mod.a.assign(static_cast<std::size_t>(w), {});
    mod.b.assign(static_cast<std::size_t>(w), {});

    // marginals of the target, uniform over positive (u,v) rows
    std::vector<double> px1u(static_cast<std::size_t>(st.nu) * st.n1, 0.0);
    std::vector<double> px2v(static_cast<std::size_t>(st.nv) * st.n2, 0.0);
    for (int u = 0; u < st.nu; ++u) {
        for (int v = 0; v < st.nv; ++v) {
            if (!st.pos[static_cast<std::size_t>(u * st.nv + v)]) continue;
            for (int a = 0; a < st.n1; ++a) {
                for (int b = 0; b < st.n2; ++b) {
                    px1u[static_cast<std::size_t>(u * st.n1 + a)] += st.at(u, v, a, b);
                    px2v[static_cast<std::size_t>(v * st.n2 + b)] += st.at(u, v, a, b);
                }
            }
        }
    }
    normalize_rows(px1u, st.nu, st.n1);
    normalize_rows(px2v, st.nv, st.n2);

    for (int k = 0; k < w; ++k) {
        auto& a = mod.a[static_cast<std::size_t>(k)];
        auto& b = mod.b[static_cast<std::size_t>(k)];
        a.assign(static_cast<std::size_t>(st.nu) * st.n1, 0.0);
        b.assign(static_cast<std::size_t>(st.nv) * st.n2, 0.0);
        if (restart == 0) {
            // jittered marginals: recovers one-component structure immediately
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = px1u[i] * (0.5 + stream.next_unit());
            for (std::size_t i = 0; i < b.size(); ++i) b[i] = px2v[i] * (0.5 + stream.next_unit());
        } else if (restart == 1) {
            // anchor components to output symbols: recovers identity-coded W
            for (int u = 0; u < st.nu; ++u) {
                for (int x = 0; x < st.n1; ++x) {
                    a[static_cast<std::size_t>(u * st.n1 + x)] =
                        (x == k % st.n1 ? 1.0 : 0.05) * (0.9 + 0.2 * stream.next_unit());
                }
            }
            for (int v = 0; v < st.nv; ++v) {
                for (int x = 0; x < st.n2; ++x) {
                    b[static_cast<std::size_t>(v * st.n2 + x)] =
                        (x == k % st.n2 ? 1.0 : 0.05) * (0.9 + 0.2 * stream.next_unit());
                }
            }
        } else {
            for (int u = 0; u < st.nu; ++u) {
                auto row = stream.next_simplex(static_cast<std::size_t>(st.n1));
                std::copy(row.begin(), row.end(), a.begin() + static_cast<std::ptrdiff_t>(u) * st.n1);
            }
            for (int v = 0; v < st.nv; ++v) {
                auto row = stream.next_simplex(static_cast<std::size_t>(st.n2));
                std::copy(row.begin(), row.end(), b.begin() + static_cast<std::ptrdiff_t>(v) * st.n2);
            }
        }
        normalize_rows(a, st.nu, st.n1);
        normalize_rows(b, st.nv, st.n2);
    }
    if (restart >= 2) {
        auto rw = stream.next_simplex(static_cast<std::size_t>(w));
        mod.r.assign(rw.begin(), rw.end());
    }
    return mod;
}

// expectation-maximization on the mixture p(x1,x2|u,v) = sum_w r_w a_w(x1|u) b_w(x2|v),
// weighting every positive (u,v) row equally (minimizes the factorization divergence)
double run_em(const SliceTarget& st, TrifactorModel& mod, int iterations) {
    const int w = mod.w;
    std::vector<double> acc_r(static_cast<std::size_t>(w));
    std::vector<std::vector<double>> acc_a(static_cast<std::size_t>(w)),
        acc_b(static_cast<std::size_t>(w));
    std::vector<double> gamma(static_cast<std::size_t>(w));
    double best = model_residual(st, mod);

    for (int it = 0; it < iterations; ++it) {
        std::fill(acc_r.begin(), acc_r.end(), 0.0);
        for (int k = 0; k < w; ++k) {
            acc_a[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(st.nu) * st.n1, 0.0);
            acc_b[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(st.nv) * st.n2, 0.0);
        }
        for (int u = 0; u < st.nu; ++u) {
            for (int v = 0; v < st.nv; ++v) {
                if (!st.pos[static_cast<std::size_t>(u * st.nv + v)]) continue;
                for (int x1 = 0; x1 < st.n1; ++x1) {
                    for (int x2 = 0; x2 < st.n2; ++x2) {
                        const double weight = st.at(u, v, x1, x2) / st.npos;
                        if (weight <= 0.0) continue;
                        double total = 0.0;
                        for (int k = 0; k < w; ++k) {
                            gamma[static_cast<std::size_t>(k)] =
                                mod.r[static_cast<std::size_t>(k)] *
                                mod.a[static_cast<std::size_t>(k)]
                                     [static_cast<std::size_t>(u * st.n1 + x1)] *
                                mod.b[static_cast<std::size_t>(k)]
                                     [static_cast<std::size_t>(v * st.n2 + x2)];
                            total += gamma[static_cast<std::size_t>(k)];
                        }
                        for (int k = 0; k < w; ++k) {
                            const double g = total > 1e-300
                                                 ? weight * gamma[static_cast<std::size_t>(k)] / total
                                                 : weight / w;
                            acc_r[static_cast<std::size_t>(k)] += g;
                            acc_a[static_cast<std::size_t>(k)]
                                 [static_cast<std::size_t>(u * st.n1 + x1)] += g;
                            acc_b[static_cast<std::size_t>(k)]
                                 [static_cast<std::size_t>(v * st.n2 + x2)] += g;
                        }
                    }
                }
            }
        }
        double rsum = 0.0;
        for (int k = 0; k < w; ++k) rsum += acc_r[static_cast<std::size_t>(k)];
        for (int k = 0; k < w; ++k) {
            mod.r[static_cast<std::size_t>(k)] =
                rsum > 1e-300 ? acc_r[static_cast<std::size_t>(k)] / rsum : 1.0 / w;
            mod.a[static_cast<std::size_t>(k)] = acc_a[static_cast<std::size_t>(k)];
            mod.b[static_cast<std::size_t>(k)] = acc_b[static_cast<std::size_t>(k)];
            normalize_rows(mod.a[static_cast<std::size_t>(k)], st.nu, st.n1);
            normalize_rows(mod.b[static_cast<std::size_t>(k)], st.nv, st.n2);
        }
        if ((it + 1) % 5 == 0 || it + 1 == iterations) {
            best = std::min(best, model_residual(st, mod));
            if (best < 0.1 * tol::kTrifactorAccept) break;
        }
    }
    return std::min(best, model_residual(st, mod));
}

// best factorization gap for one slice; w_found set on acceptance
double search_slice(const SliceTarget& st, const TrifactorConfig& cfg, std::uint64_t slice_seed,
                    int w_max, int* w_found) {
    *w_found = 0;

    // |W| = 1 is decided in closed form: a one-component factorization exists
    // iff the product of the conditional marginals already matches the target
    TrifactorModel flat;
    flat.w = 1;
    flat.r = {1.0};
    {
        std::vector<double> px1u(static_cast<std::size_t>(st.nu) * st.n1, 0.0);
        std::vector<double> px2v(static_cast<std::size_t>(st.nv) * st.n2, 0.0);
        for (int u = 0; u < st.nu; ++u) {
            for (int v = 0; v < st.nv; ++v) {
                if (!st.pos[static_cast<std::size_t>(u * st.nv + v)]) continue;
                for (int a = 0; a < st.n1; ++a) {
                    for (int b = 0; b < st.n2; ++b) {
                        px1u[static_cast<std::size_t>(u * st.n1 + a)] += st.at(u, v, a, b);
                        px2v[static_cast<std::size_t>(v * st.n2 + b)] += st.at(u, v, a, b);
                    }
                }
            }
        }
        normalize_rows(px1u, st.nu, st.n1);
        normalize_rows(px2v, st.nv, st.n2);
        flat.a = {std::move(px1u)};
        flat.b = {std::move(px2v)};
    }
    double best = model_residual(st, flat);
    if (best < tol::kTrifactorAccept) {
        *w_found = 1;
        return best;
    }

    for (int w = 2; w <= w_max; ++w) {
        for (int restart = 0; restart < cfg.restarts; ++restart) {
            rng::Stream stream = rng::item_stream(
                slice_seed, static_cast<std::uint64_t>(w) * 0x10001ULL + static_cast<std::uint64_t>(restart));
            TrifactorModel mod = init_model(st, w, restart, stream);
            const double res = run_em(st, mod, cfg.iterations);
            if (res < best) best = res;
            if (best < tol::kTrifactorAccept) {
                *w_found = w;
                return best;
            }
        }
    }
    return best;
}

} // namespace

TrifactorVerdict membership_sout2(const TestChannel& tc, const TrifactorConfig& cfg) {
    TrifactorVerdict verdict;
    const int n1 = prob::axis_marginal(tc.dist, "x1").size();
    const int n2 = prob::axis_marginal(tc.dist, "x2").size();
    verdict.w_max = cfg.w_max > 0 ? cfg.w_max : n1 * n2 + 2;

    // a near-exact trifactorization forces both short Markov chains: marginalizing
    // the model over x2 leaves sum_w r_w a_w(x1|u), which has no v-dependence, and
    // each marginalization sums at most max(n1, n2) cell gaps from each of the two
    // distributions being compared
    if (cfg.prefilter) {
        const auto chains = membership_sout1(tc);
        if (chains.residual > 2.0 * std::max(n1, n2) * tol::kTrifactorAccept) {
            verdict.prefiltered = true;
            verdict.residual = chains.residual;
            verdict.member = false;
            return verdict;
        }
    }

    verdict.member = true;
    for (const auto& s : q_slices(tc, nullptr)) {
        const SliceTarget st = slice_target(s.f);
        int w_found = 0;
        const double res = search_slice(st, cfg, cfg.seed ^ (static_cast<std::uint64_t>(s.q) << 32),
                                        verdict.w_max, &w_found);
        verdict.residual = std::max(verdict.residual, res);
        if (w_found == 0) {
            verdict.member = false;
        } else {
            verdict.w_used = std::max(verdict.w_used, w_found);
        }
    }
    if (!verdict.member) verdict.w_used = 0;
    return verdict;
}

namespace {

void merge_report(MembershipReport& into, const MembershipReport& part, const std::string& prefix) {
    into.pass = into.pass && part.pass;
    for (auto c : part.constraints) {
        c.name = prefix + c.name;
        into.constraints.push_back(std::move(c));
    }
    for (const auto& s : part.skipped_events) into.skipped_events.push_back(prefix + s);
}

void finalize_worst(MembershipReport& rep) {
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& c : rep.constraints) {
        if (c.margin < rep.worst_margin) {
            rep.worst_margin = c.margin;
            rep.worst = c.name;
        }
    }
    if (rep.constraints.empty()) rep.worst_margin = 0.0;
}

} // namespace

MembershipReport membership_sout4(const TestChannel& tc, double lambda2_uv) {
    MembershipReport rep;
    rep.lambda2_bound = lambda2_uv;
    const bool with_q = tc.pq.size() > 1;
    std::vector<std::string> skipped_q;
    for (const auto& s : q_slices(tc, &skipped_q)) {
        auto part = dpi::intersection_membership(s.f, lambda2_uv, {"u"}, {"v"});
        merge_report(rep, part, with_q ? "q=" + std::to_string(s.q) + "." : "");
    }
    for (const auto& s : skipped_q) rep.skipped_events.push_back(s);
    finalize_worst(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// rates and distortion
// ---------------------------------------------------------------------------

RatePoint rd_rates(const TestChannel& tc) {
    RatePoint r;
    r.r1 = prob::cond_mutual_information(tc.dist, {"u", "v"}, {"x1"}, {"x2", "q"});
    r.r2 = prob::cond_mutual_information(tc.dist, {"u", "v"}, {"x2"}, {"x1", "q"});
    r.rsum = prob::cond_mutual_information(tc.dist, {"u", "v"}, {"x1", "x2"}, {"q"});

    const double ix_q = prob::cond_mutual_information(tc.dist, {"x1"}, {"x2"}, {"q"});
    const double ix_uvq = prob::cond_mutual_information(tc.dist, {"x1"}, {"x2"}, {"u", "v", "q"});
    const double drift = std::abs(r.r1 + r.r2 + ix_q - r.rsum - ix_uvq);
    if (drift > 1e-10) {
        fail(Err::Internal, "rate chain-rule identity drifted: " + std::to_string(drift));
    }
    if (r.r1 < -1e-12 || r.r2 < -1e-12 || r.rsum < -1e-12) {
        fail(Err::Internal, "negative mutual information");
    }
    return r;
}

DistortionResult best_distortion(const TestChannel& tc, const DistortionSpec& ds) {
    const int nu = prob::axis_marginal(tc.dist, "u").size();
    const int nv = prob::axis_marginal(tc.dist, "v").size();
    const int n1 = prob::axis_marginal(tc.dist, "x1").size();
    const int n2 = prob::axis_marginal(tc.dist, "x2").size();
    const int nq = static_cast<int>(tc.pq.size());
    if (ds.d1.rows() != nu || ds.d2.rows() != nv) {
        fail(Err::AlphabetMismatch, "distortion tables do not match the source alphabets");
    }
    if (ds.d1.cols() < 1 || ds.d2.cols() < 1) {
        fail(Err::AlphabetMismatch, "empty reconstruction alphabet");
    }
    if (ds.d1.minCoeff() < 0.0 || ds.d2.minCoeff() < 0.0) {
        fail(Err::NegativeEntry, "distortion entries must be nonnegative");
    }

    DistortionResult out;
    out.uhat.assign(static_cast<std::size_t>(n1) * n2 * nq, 0);
    out.vhat.assign(static_cast<std::size_t>(n1) * n2 * nq, 0);
    Vec mu(nu), mv(nv);
    for (int a = 0; a < n1; ++a) {
        for (int b = 0; b < n2; ++b) {
            for (int q = 0; q < nq; ++q) {
                for (int u = 0; u < nu; ++u) {
                    mu(u) = prob::event_mass(tc.dist, {{"q", q}, {"u", u}, {"x1", a}, {"x2", b}});
                }
                for (int v = 0; v < nv; ++v) {
                    mv(v) = prob::event_mass(tc.dist, {{"q", q}, {"v", v}, {"x1", a}, {"x2", b}});
                }
                const std::size_t cell = static_cast<std::size_t>((a * n2 + b) * nq + q);
                double best1 = std::numeric_limits<double>::infinity();
                for (int uh = 0; uh < ds.d1.cols(); ++uh) {
                    const double cost = mu.dot(ds.d1.col(uh));
                    if (cost < best1 - 1e-15) {
                        best1 = cost;
                        out.uhat[cell] = uh;
                    }
                }
                double best2 = std::numeric_limits<double>::infinity();
                for (int vh = 0; vh < ds.d2.cols(); ++vh) {
                    const double cost = mv.dot(ds.d2.col(vh));
                    if (cost < best2 - 1e-15) {
                        best2 = cost;
                        out.vhat[cell] = vh;
                    }
                }
                out.ed1 += best1;
                out.ed2 += best2;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// sampled region evaluation
// ---------------------------------------------------------------------------

namespace {

Candidate sample_candidate(const JointDist& sources, const SamplerConfig& cfg, int item) {
    rng::Stream stream = rng::item_stream(cfg.seed, static_cast<std::uint64_t>(item));
    const int nu = sources.rows.size();
    const int nv = sources.cols.size();
    const int n1 = cfg.x1_size, n2 = cfg.x2_size, nq = cfg.q_size;

    Candidate c;
    c.x1 = prob::indexed_alphabet(n1);
    c.x2 = prob::indexed_alphabet(n2);
    c.pq.resize(nq);
    if (nq == 1) {
        c.pq(0) = 1.0;
    } else {
        auto s = stream.next_simplex(static_cast<std::size_t>(nq));
        for (int k = 0; k < nq; ++k) c.pq(k) = s[static_cast<std::size_t>(k)];
    }

    c.table.resize(static_cast<Eigen::Index>(nq) * nu * nv, n1 * n2);
    // three interleaved draw families on one id stream: a deterministic
    // encoder-pair grid (id % 4 == 0), random product-form channels (other even
    // ids) -- both land in S_in by construction -- and generic rows (odd ids)
    const bool product_form = item % 2 == 0;
    const bool grid_point = item % 4 == 0;
    for (int q = 0; q < nq; ++q) {
        if (grid_point) {
            std::uint64_t maps1 = 1, maps2 = 1;
            for (int u = 0; u < nu; ++u) maps1 *= static_cast<std::uint64_t>(n1);
            for (int v = 0; v < nv; ++v) maps2 *= static_cast<std::uint64_t>(n2);
            std::uint64_t code = (static_cast<std::uint64_t>(item) / 4 +
                                  static_cast<std::uint64_t>(q)) %
                                 (maps1 * maps2);
            std::uint64_t f = code % maps1, g = code / maps1;
            std::vector<int> fu(static_cast<std::size_t>(nu)), gv(static_cast<std::size_t>(nv));
            for (int u = 0; u < nu; ++u) {
                fu[static_cast<std::size_t>(u)] = static_cast<int>(f % n1);
                f /= n1;
            }
            for (int v = 0; v < nv; ++v) {
                gv[static_cast<std::size_t>(v)] = static_cast<int>(g % n2);
                g /= n2;
            }
            for (int u = 0; u < nu; ++u) {
                for (int v = 0; v < nv; ++v) {
                    const Eigen::Index row = (static_cast<Eigen::Index>(q) * nu + u) * nv + v;
                    for (int j = 0; j < n1 * n2; ++j) c.table(row, j) = 0.0;
                    c.table(row, fu[static_cast<std::size_t>(u)] * n2 +
                                     gv[static_cast<std::size_t>(v)]) = 1.0;
                }
            }
        } else if (product_form) {
            std::vector<std::vector<double>> rows_u, rows_v;
            for (int u = 0; u < nu; ++u) rows_u.push_back(stream.next_simplex(static_cast<std::size_t>(n1)));
            for (int v = 0; v < nv; ++v) rows_v.push_back(stream.next_simplex(static_cast<std::size_t>(n2)));
            for (int u = 0; u < nu; ++u) {
                for (int v = 0; v < nv; ++v) {
                    const Eigen::Index row = (static_cast<Eigen::Index>(q) * nu + u) * nv + v;
                    for (int a = 0; a < n1; ++a) {
                        for (int b = 0; b < n2; ++b) {
                            c.table(row, a * n2 + b) = rows_u[static_cast<std::size_t>(u)]
                                                             [static_cast<std::size_t>(a)] *
                                                       rows_v[static_cast<std::size_t>(v)]
                                                             [static_cast<std::size_t>(b)];
                        }
                    }
                }
            }
        } else {
            for (int u = 0; u < nu; ++u) {
                for (int v = 0; v < nv; ++v) {
                    const Eigen::Index row = (static_cast<Eigen::Index>(q) * nu + u) * nv + v;
                    auto cell = stream.next_simplex(static_cast<std::size_t>(n1) * n2);
                    for (int j = 0; j < n1 * n2; ++j) c.table(row, j) = cell[static_cast<std::size_t>(j)];
                }
            }
        }
    }
    return c;
}

} // namespace

RegionSampleResult rd_region_sample(const JointDist& sources, const DistortionSpec& ds,
                                    double d1_max, double d2_max, SetPredicate set,
                                    const SamplerConfig& cfg) {
    if (cfg.budget < 1 || cfg.budget > tol::kOracleBudgetCap) {
        fail(Err::BudgetExceeded, "sample budget must be in [1, " +
                                      std::to_string(tol::kOracleBudgetCap) + "]");
    }
    if (cfg.x1_size < 1 || cfg.x1_size > 4 || cfg.x2_size < 1 || cfg.x2_size > 4 ||
        cfg.q_size < 1 || cfg.q_size > 4) {
        fail(Err::SizeOverflow, "sampler alphabet caps are |X1|,|X2|,|Q| <= 4");
    }

    RegionSampleResult out;
    out.lambda2_uv = spectral::lambda2(sources);
    out.records.resize(static_cast<std::size_t>(cfg.budget));

    auto evaluate = [&](int id) {
        SampleRecord rec;
        rec.id = id;
        const Candidate cand = sample_candidate(sources, cfg, id);
        const TestChannel tc = make_test_channel(sources, cand);

        rec.sin = membership_sin(tc).member;
        rec.sout1 = membership_sout1(tc).member;
        TrifactorConfig tf = cfg.trifactor;
        tf.seed = rng::item_stream(cfg.seed ^ 0x7472696eULL, static_cast<std::uint64_t>(id)).next_u64();
        const auto tri = membership_sout2(tc, tf);
        rec.sout2 = tri.member;
        rec.sout2_w = tri.w_used;
        rec.sout4 = membership_sout4(tc, out.lambda2_uv).pass;
        rec.rates = rd_rates(tc);
        const auto dist = best_distortion(tc, ds);
        rec.ed1 = dist.ed1;
        rec.ed2 = dist.ed2;
        rec.meets_distortion = rec.ed1 <= d1_max + 1e-12 && rec.ed2 <= d2_max + 1e-12;

        bool in_set = false;
        switch (set) {
            case SetPredicate::Sin: in_set = rec.sin; break;
            case SetPredicate::Sout2: in_set = rec.sout2; break;
            case SetPredicate::Sout4: in_set = rec.sout4; break;
            case SetPredicate::Sout2Cap4: in_set = rec.sout2 && rec.sout4; break;
        }
        rec.selected = in_set && rec.meets_distortion;
        out.records[static_cast<std::size_t>(id)] = rec;
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (int id = 0; id < cfg.budget; ++id) evaluate(id);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (int id = t; id < cfg.budget; id += workers) evaluate(id);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& rec : out.records) {
        out.count_sin += rec.sin;
        out.count_sout1 += rec.sout1;
        out.count_sout2 += rec.sout2;
        out.count_sout4 += rec.sout4;
        out.count_cap += rec.sout2 && rec.sout4;
        out.sin_not_sout2 += rec.sin && !rec.sout2;
        out.sout2cert_not_sout1 += rec.sout2_w == 1 && !rec.sout1;
        out.sin_not_sout4 += rec.sin && !rec.sout4;
        const bool sel_cap = rec.sout2 && rec.sout4 && rec.meets_distortion;
        const bool sel_sout4 = rec.sout4 && rec.meets_distortion;
        out.cap_not_sout4 += sel_cap && !sel_sout4;
        if (rec.selected) out.region.push_back(rec.rates);
    }
    out.hierarchy_ok = out.sin_not_sout2 == 0 && out.sout2cert_not_sout1 == 0 &&
                       out.sin_not_sout4 == 0 && out.cap_not_sout4 == 0;
    return out;
}

// ---------------------------------------------------------------------------
// multiple-access necessary conditions
// ---------------------------------------------------------------------------

EntropyTriple source_entropies(const JointDist& sources) {
    EntropyTriple t;
    t.h_u_given_v = prob::conditional_entropy(sources, prob::Given::Cols);
    t.h_v_given_u = prob::conditional_entropy(sources, prob::Given::Rows);
    t.h_uv = prob::joint_entropy(sources);
    return t;
}

MacRates mac_rates(const TestChannel& tc, const Kernel& channel) {
    Kernel k = channel;
    prob::validate_kernel(k);
    const int n1 = prob::axis_marginal(tc.dist, "x1").size();
    const int n2 = prob::axis_marginal(tc.dist, "x2").size();
    if (k.from.size() != n1 * n2) {
        fail(Err::AlphabetMismatch, "channel input alphabet must have |X1|*|X2| symbols");
    }
    const auto with_y =
        prob::attach_conditional(tc.dist, {"y", k.to}, {"x1", "x2"}, k.rows);
    MacRates r;
    r.i1 = prob::cond_mutual_information(with_y, {"x1"}, {"y"}, {"x2", "v", "q"});
    r.i2 = prob::cond_mutual_information(with_y, {"x2"}, {"y"}, {"x1", "u", "q"});
    r.isum = prob::cond_mutual_information(with_y, {"x1", "x2"}, {"y"}, {"q"});
    return r;
}

MembershipReport mare_check(const JointDist& sources, const Kernel& channel,
                            const Candidate& cand, double lambda2_uv) {
    const TestChannel tc = make_test_channel(sources, cand);
    if (lambda2_uv < 0.0) lambda2_uv = spectral::lambda2(sources);

    MembershipReport rep = membership_sout4(tc, lambda2_uv);

    const EntropyTriple h = source_entropies(sources);
    const MacRates mi = mac_rates(tc, channel);
    auto rate = [&](const std::string& name, double measured, double bound) {
        dpi::Constraint c;
        c.name = name;
        c.measured = measured;
        c.bound = bound;
        c.margin = bound - measured;
        c.pass = c.margin >= -tol::kRateSlack;
        rep.pass = rep.pass && c.pass;
        rep.constraints.push_back(std::move(c));
    };
    rate("rate.h_u_given_v", h.h_u_given_v, mi.i1);
    rate("rate.h_v_given_u", h.h_v_given_u, mi.i2);
    rate("rate.h_uv", h.h_uv, mi.isum);
    finalize_worst(rep);
    return rep;
}

} // namespace corrspec::regions
