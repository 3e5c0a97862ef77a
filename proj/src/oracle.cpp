#include "corrspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "corrspec/binary.hpp"
#include "corrspec/error.hpp"
#include "corrspec/rng.hpp"
#include "corrspec/spectral.hpp"
#include "corrspec/tol.hpp"

namespace corrspec::oracle {

namespace {

long long checked_pow(long long base, int exp, long long cap, const char* what) {
    long long out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > cap / base) fail(Err::CapExceeded, std::string(what) + " overflows the cap");
        out *= base;
    }
    return out;
}

// u64 power with saturation at 2^63; sweeps near that size are refused anyway
std::uint64_t saturating_pow(std::uint64_t base, long long exp) {
    const std::uint64_t lim = 1ULL << 63;
    std::uint64_t out = 1;
    for (long long i = 0; i < exp; ++i) {
        if (out >= lim / base + 1) return lim;
        out *= base;
    }
    return out;
}

void require_valid_source(JointDist& src) {
    prob::validate_joint(src);
    if (prob::has_zero_marginal(src)) {
        fail(Err::ZeroMarginal, "oracle sources need strictly positive marginals");
    }
}

Kernel one_hot_kernel(const prob::Alphabet& from, const prob::Alphabet& to, std::uint64_t code) {
    Mat rows = Mat::Zero(from.size(), to.size());
    for (int r = 0; r < from.size(); ++r) {
        rows(r, static_cast<int>(code % static_cast<std::uint64_t>(to.size()))) = 1.0;
        code /= static_cast<std::uint64_t>(to.size());
    }
    return Kernel(from, to, std::move(rows));
}

// letter digits of a sequence row, first letter most significant (matches
// prob::kron_power row ordering)
int letter_digit(long long row, int letter, int n, int base) {
    long long shift = 1;
    for (int i = letter + 1; i < n; ++i) shift *= base;
    return static_cast<int>((row / shift) % base);
}

struct SubsetPair {
    int buckets = 0;        // assignments: |U|^popcount(su) * |V|^popcount(sv)
    int nb = 0;             // V-side assignment count
    std::vector<int> au;    // per sequence row: packed U-side assignment
    std::vector<int> bv;    // per sequence column
};

// everything that is fixed across encoder pairs for one (sources, n) sweep
struct SweepLayout {
    int n1 = 0, n2 = 0;
    long long rows1 = 0, rows2 = 0;
    Mat pn;                             // P_{U^n V^n}
    std::vector<std::pair<long long, long long>> cells; // positive (r, c)
    double lambda2_uv = 0.0;
    std::vector<SubsetPair> nec_pairs;  // excludes (empty, empty) = plain necc
    int max_buckets = 0;
};

SweepLayout build_layout(const JointDist& sources, int n, int n1, int n2, bool check_nec) {
    SweepLayout lay;
    lay.n1 = n1;
    lay.n2 = n2;
    const int bu = sources.rows.size();
    const int bvz = sources.cols.size();
    lay.rows1 = checked_pow(bu, n, tol::kKronCellCap, "|U|^n");
    lay.rows2 = checked_pow(bvz, n, tol::kKronCellCap, "|V|^n");
    if (lay.rows1 > tol::kKronCellCap / lay.rows2) {
        fail(Err::CapExceeded, "source tensor needs " + std::to_string(lay.rows1) + " x " +
                                   std::to_string(lay.rows2) + " cells, beyond the cap");
    }
    lay.pn = prob::kron_power(sources, n).mass;
    for (long long r = 0; r < lay.rows1; ++r)
        for (long long c = 0; c < lay.rows2; ++c)
            if (lay.pn(r, c) > 0.0) lay.cells.push_back({r, c});
    lay.lambda2_uv = spectral::lambda2(sources);

    if (check_nec) {
        const long long pairs = (1LL << n) * (1LL << n);
        if (pairs > tol::kSubsetPairCap) {
            fail(Err::SubsetExplosion,
                 std::to_string(pairs) + " subset pairs exceed the cap of " +
                     std::to_string(tol::kSubsetPairCap) + "; disable the nec audit for n > 4");
        }
        for (int su = 0; su < (1 << n); ++su) {
            for (int sv = 0; sv < (1 << n); ++sv) {
                if (su == 0 && sv == 0) continue;
                SubsetPair sp;
                int na = 1, nb = 1;
                for (int i = 0; i < n; ++i) {
                    if (su & (1 << i)) na *= bu;
                    if (sv & (1 << i)) nb *= bvz;
                }
                sp.nb = nb;
                sp.buckets = na * nb;
                sp.au.resize(static_cast<std::size_t>(lay.rows1));
                sp.bv.resize(static_cast<std::size_t>(lay.rows2));
                for (long long r = 0; r < lay.rows1; ++r) {
                    int a = 0;
                    for (int i = 0; i < n; ++i)
                        if (su & (1 << i)) a = a * bu + letter_digit(r, i, n, bu);
                    sp.au[static_cast<std::size_t>(r)] = a;
                }
                for (long long c = 0; c < lay.rows2; ++c) {
                    int b = 0;
                    for (int i = 0; i < n; ++i)
                        if (sv & (1 << i)) b = b * bvz + letter_digit(c, i, n, bvz);
                    sp.bv[static_cast<std::size_t>(c)] = b;
                }
                lay.max_buckets = std::max(lay.max_buckets, sp.buckets);
                lay.nec_pairs.push_back(std::move(sp));
            }
        }
    }
    return lay;
}

// running tallies and frontier maxima for one worker's slice of the id space
struct SweepState {
    Vec best;
    std::vector<std::uint64_t> best_id;
    std::uint64_t necc_violations = 0, nec_violations = 0;
    std::uint64_t outer2_violations = 0, outer2_skipped = 0;
    std::uint64_t first_violation = kNoPair;
    double worst_necc = std::numeric_limits<double>::infinity();
    double worst_nec = std::numeric_limits<double>::infinity();
    double worst_outer2 = std::numeric_limits<double>::infinity();

    explicit SweepState(int indices)
        : best(Vec::Zero(indices)), best_id(static_cast<std::size_t>(indices), kNoPair) {}

    void flag(std::uint64_t id) { first_violation = std::min(first_violation, id); }
};

// evaluation scratch reused across pairs to keep the hot loop allocation-free
struct Scratch {
    Mat marginal;
    std::vector<Mat> buckets;
    std::vector<double> bucket_mass;

    Scratch(int n1, int n2, int max_buckets)
        : marginal(n1, n2), buckets(static_cast<std::size_t>(std::max(1, max_buckets))),
          bucket_mass(static_cast<std::size_t>(std::max(1, max_buckets))) {
        for (auto& b : buckets) b.resize(n1, n2);
    }
};

void audit_spectrum(const Vec& sigma, double lambda2_uv, std::uint64_t id, bool conditioned,
                    SweepState& st) {
    double& worst = conditioned ? st.worst_nec : st.worst_necc;
    std::uint64_t& bad = conditioned ? st.nec_violations : st.necc_violations;
    for (int i = 1; i < sigma.size(); ++i) {
        worst = std::min(worst, lambda2_uv - sigma(i));
        if (sigma(i) > lambda2_uv + tol::kInequality) {
            ++bad;
            st.flag(id);
        }
    }
    if (conditioned) return;
    for (int i = 0; i < sigma.size(); ++i) {
        if (static_cast<Eigen::Index>(i) >= st.best.size()) break;
        const double v = sigma(i);
        if (st.best_id[static_cast<std::size_t>(i)] == kNoPair || v > st.best(i)) {
            st.best(i) = v;
            st.best_id[static_cast<std::size_t>(i)] = id;
        }
    }
}

void evaluate_pair(const SweepLayout& lay, const Mat& e1, const Mat& e2, std::uint64_t id,
                   bool check_outer2, Scratch& sc, SweepState& st) {
    sc.marginal.noalias() = e1.transpose() * lay.pn * e2;
    audit_spectrum(spectral::support_spectrum(sc.marginal), lay.lambda2_uv, id, false, st);

    if (check_outer2 && lay.n1 == 2 && lay.n2 == 2) {
        const double p1 = sc.marginal.row(1).sum();
        const double q1 = sc.marginal.col(1).sum();
        if (std::min(p1, 1.0 - p1) <= 1e-9 || std::min(q1, 1.0 - q1) <= 1e-9) {
            ++st.outer2_skipped;
        } else {
            const double s = spectral::signed_lambda_2x2(sc.marginal);
            const auto bs = binary::bounds(std::sqrt(p1), std::sqrt(q1), lay.lambda2_uv);
            const double margin = std::min(s - bs.outer2.lo, bs.outer2.hi - s);
            st.worst_outer2 = std::min(st.worst_outer2, margin);
            if (!binary::contains(bs.outer2, s)) {
                ++st.outer2_violations;
                st.flag(id);
            }
        }
    }

    for (const auto& sp : lay.nec_pairs) {
        for (int b = 0; b < sp.buckets; ++b) {
            sc.buckets[static_cast<std::size_t>(b)].setZero();
            sc.bucket_mass[static_cast<std::size_t>(b)] = 0.0;
        }
        for (const auto& [r, c] : lay.cells) {
            const int b = sp.au[static_cast<std::size_t>(r)] * sp.nb +
                          sp.bv[static_cast<std::size_t>(c)];
            const double w = lay.pn(r, c);
            sc.buckets[static_cast<std::size_t>(b)].noalias() +=
                w * (e1.row(r).transpose() * e2.row(c));
            sc.bucket_mass[static_cast<std::size_t>(b)] += w;
        }
        for (int b = 0; b < sp.buckets; ++b) {
            if (sc.bucket_mass[static_cast<std::size_t>(b)] <= tol::kZeroMass) continue;
            audit_spectrum(spectral::support_spectrum(sc.buckets[static_cast<std::size_t>(b)]),
                           lay.lambda2_uv, id, true, st);
        }
    }
}

void merge_state(SweepState& into, const SweepState& part) {
    for (Eigen::Index i = 0; i < into.best.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (part.best_id[idx] == kNoPair) continue;
        if (into.best_id[idx] == kNoPair || part.best(i) > into.best(i) ||
            (part.best(i) == into.best(i) && part.best_id[idx] < into.best_id[idx])) {
            into.best(i) = part.best(i);
            into.best_id[idx] = part.best_id[idx];
        }
    }
    into.necc_violations += part.necc_violations;
    into.nec_violations += part.nec_violations;
    into.outer2_violations += part.outer2_violations;
    into.outer2_skipped += part.outer2_skipped;
    into.first_violation = std::min(into.first_violation, part.first_violation);
    into.worst_necc = std::min(into.worst_necc, part.worst_necc);
    into.worst_nec = std::min(into.worst_nec, part.worst_nec);
    into.worst_outer2 = std::min(into.worst_outer2, part.worst_outer2);
}

Mat random_rows(rng::Stream& stream, long long rows, int cols) {
    Mat m(rows, cols);
    for (long long r = 0; r < rows; ++r) {
        const auto row = stream.next_simplex(static_cast<std::size_t>(cols));
        for (int j = 0; j < cols; ++j) m(r, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
}

} // namespace

FactoredDist induced_joint(const JointDist& sources, const EncoderPair& pair) {
    JointDist src = sources;
    require_valid_source(src);
    Kernel e1 = pair.enc1, e2 = pair.enc2;
    prob::validate_kernel(e1);
    prob::validate_kernel(e2);
    const int n = pair.n;
    if (n < 1) fail(Err::CapExceeded, "letter count must be at least 1");
    const long long rows1 = checked_pow(src.rows.size(), n, tol::kKronCellCap, "|U|^n");
    const long long rows2 = checked_pow(src.cols.size(), n, tol::kKronCellCap, "|V|^n");
    if (rows1 > tol::kKronCellCap / rows2) {
        fail(Err::CapExceeded, "source tensor needs " + std::to_string(rows1) + " x " +
                                   std::to_string(rows2) + " cells, beyond the cap");
    }
    if (e1.rows.rows() != rows1 || e2.rows.rows() != rows2) {
        fail(Err::AlphabetMismatch, "encoder row counts must equal |U|^n and |V|^n");
    }
    const int n1 = e1.to.size(), n2 = e2.to.size();
    const long long cells = rows1 * rows2 * n1 * n2;
    if (cells > tol::kWideCellCap) {
        fail(Err::CapExceeded, "induced tensor needs " + std::to_string(cells) + " cells");
    }

    const Mat pn = prob::kron_power(src, n).mass;
    std::vector<prob::Axis> axes;
    axes.push_back({"x1", e1.to});
    axes.push_back({"x2", e2.to});
    for (int i = 0; i < n; ++i) axes.push_back({"u" + std::to_string(i + 1), src.rows});
    for (int i = 0; i < n; ++i) axes.push_back({"v" + std::to_string(i + 1), src.cols});

    std::vector<double> mass(static_cast<std::size_t>(cells));
    std::size_t idx = 0;
    for (int a = 0; a < n1; ++a)
        for (int b = 0; b < n2; ++b)
            for (long long r = 0; r < rows1; ++r)
                for (long long c = 0; c < rows2; ++c)
                    mass[idx++] = pn(r, c) * e1.rows(r, a) * e2.rows(c, b);
    return prob::make_factored(std::move(axes), std::move(mass));
}

JointDist induced_pair(const JointDist& sources, const EncoderPair& pair) {
    JointDist src = sources;
    require_valid_source(src);
    Kernel e1 = pair.enc1, e2 = pair.enc2;
    prob::validate_kernel(e1);
    prob::validate_kernel(e2);
    const int n = pair.n;
    if (n < 1) fail(Err::CapExceeded, "letter count must be at least 1");
    const long long rows1 = checked_pow(src.rows.size(), n, tol::kKronCellCap, "|U|^n");
    const long long rows2 = checked_pow(src.cols.size(), n, tol::kKronCellCap, "|V|^n");
    if (rows1 > tol::kKronCellCap / rows2) {
        fail(Err::CapExceeded, "source tensor needs " + std::to_string(rows1) + " x " +
                                   std::to_string(rows2) + " cells, beyond the cap");
    }
    if (e1.rows.rows() != rows1 || e2.rows.rows() != rows2) {
        fail(Err::AlphabetMismatch, "encoder row counts must equal |U|^n and |V|^n");
    }
    const Mat pn = prob::kron_power(src, n).mass;
    return JointDist(e1.to, e2.to, e1.rows.transpose() * pn * e2.rows);
}

EnumerationPlan enumerate_deterministic(const JointDist& sources, int n, int x1_size,
                                        int x2_size, std::uint64_t cap) {
    JointDist src = sources;
    require_valid_source(src);
    if (n < 1) fail(Err::CapExceeded, "letter count must be at least 1");
    if (x1_size < 1 || x2_size < 1) fail(Err::AlphabetMismatch, "output alphabets are empty");
    EnumerationPlan plan;
    plan.rows1 = checked_pow(src.rows.size(), n, tol::kKronCellCap, "|U|^n");
    plan.rows2 = checked_pow(src.cols.size(), n, tol::kKronCellCap, "|V|^n");
    plan.count1 = saturating_pow(static_cast<std::uint64_t>(x1_size), plan.rows1);
    plan.count2 = saturating_pow(static_cast<std::uint64_t>(x2_size), plan.rows2);
    const std::uint64_t lim = 1ULL << 63;
    plan.total = (plan.count1 >= lim / plan.count2 + 1) ? lim : plan.count1 * plan.count2;
    if (plan.total > cap) {
        fail(Err::CapExceeded, "deterministic sweep holds " +
                                   (plan.total >= lim ? std::string(">= 2^63")
                                                      : std::to_string(plan.total)) +
                                   " pairs, beyond the budget of " + std::to_string(cap));
    }
    return plan;
}

EncoderPair deterministic_pair(const JointDist& sources, int n, int x1_size, int x2_size,
                               std::uint64_t id) {
    const auto plan =
        enumerate_deterministic(sources, n, x1_size, x2_size, std::numeric_limits<std::uint64_t>::max() >> 1);
    if (id >= plan.total) {
        fail(Err::CapExceeded, "pair id " + std::to_string(id) + " outside the sweep of " +
                                   std::to_string(plan.total));
    }
    const auto seq1 = prob::sequence_alphabet(sources.rows, n);
    const auto seq2 = prob::sequence_alphabet(sources.cols, n);
    EncoderPair pair;
    pair.n = n;
    pair.enc1 = one_hot_kernel(seq1, prob::indexed_alphabet(x1_size, "x"), id / plan.count2);
    pair.enc2 = one_hot_kernel(seq2, prob::indexed_alphabet(x2_size, "x"), id % plan.count2);
    return pair;
}

EncoderPair random_pair(const JointDist& sources, int n, int x1_size, int x2_size,
                        std::uint64_t seed, std::uint64_t item) {
    JointDist src = sources;
    require_valid_source(src);
    if (n < 1) fail(Err::CapExceeded, "letter count must be at least 1");
    const long long rows1 = checked_pow(src.rows.size(), n, tol::kKronCellCap, "|U|^n");
    const long long rows2 = checked_pow(src.cols.size(), n, tol::kKronCellCap, "|V|^n");
    rng::Stream stream = rng::item_stream(seed, item);
    EncoderPair pair;
    pair.n = n;
    pair.enc1 = Kernel(prob::sequence_alphabet(src.rows, n), prob::indexed_alphabet(x1_size, "x"),
                       random_rows(stream, rows1, x1_size));
    pair.enc2 = Kernel(prob::sequence_alphabet(src.cols, n), prob::indexed_alphabet(x2_size, "x"),
                       random_rows(stream, rows2, x2_size));
    return pair;
}

FrontierResult frontier(const JointDist& sources, const OracleConfig& cfg) {
    JointDist src = sources;
    require_valid_source(src);
    if (cfg.x1_size < 1 || cfg.x2_size < 1) {
        fail(Err::AlphabetMismatch, "output alphabets are empty");
    }
    if (cfg.budget < 1 || cfg.budget > static_cast<std::uint64_t>(tol::kOracleBudgetCap)) {
        fail(Err::BudgetExceeded, "budget must be in [1, " +
                                      std::to_string(tol::kOracleBudgetCap) + "]");
    }

    std::uint64_t total = cfg.budget;
    if (cfg.mode == Mode::Exhaustive) {
        total = enumerate_deterministic(src, cfg.n, cfg.x1_size, cfg.x2_size, cfg.budget).total;
    } else {
        checked_pow(src.rows.size(), cfg.n, tol::kKronCellCap, "|U|^n");
        checked_pow(src.cols.size(), cfg.n, tol::kKronCellCap, "|V|^n");
    }

    const SweepLayout lay = build_layout(src, cfg.n, cfg.x1_size, cfg.x2_size, cfg.check_nec);
    const int indices = std::min(cfg.x1_size, cfg.x2_size);

    const int workers = std::max(1, cfg.workers);
    std::vector<SweepState> states;
    states.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) states.emplace_back(indices);

    const std::uint64_t count2 =
        saturating_pow(static_cast<std::uint64_t>(cfg.x2_size), lay.rows2);
    auto run_slice = [&](int t) {
        SweepState& st = states[static_cast<std::size_t>(t)];
        Scratch sc(lay.n1, lay.n2, lay.max_buckets);
        Mat one1 = Mat::Zero(lay.rows1, lay.n1), one2 = Mat::Zero(lay.rows2, lay.n2);
        for (std::uint64_t id = static_cast<std::uint64_t>(t); id < total;
             id += static_cast<std::uint64_t>(workers)) {
            if (cfg.mode == Mode::Exhaustive) {
                // decode the one-hot kernels in place instead of allocating pairs
                std::uint64_t c1 = id / count2;
                std::uint64_t c2 = id % count2;
                one1.setZero();
                one2.setZero();
                for (long long r = 0; r < lay.rows1; ++r) {
                    one1(r, static_cast<int>(c1 % static_cast<std::uint64_t>(cfg.x1_size))) = 1.0;
                    c1 /= static_cast<std::uint64_t>(cfg.x1_size);
                }
                for (long long c = 0; c < lay.rows2; ++c) {
                    one2(c, static_cast<int>(c2 % static_cast<std::uint64_t>(cfg.x2_size))) = 1.0;
                    c2 /= static_cast<std::uint64_t>(cfg.x2_size);
                }
                evaluate_pair(lay, one1, one2, id, cfg.check_outer2, sc, st);
            } else {
                rng::Stream stream = rng::item_stream(cfg.seed, id);
                const Mat e1 = random_rows(stream, lay.rows1, lay.n1);
                const Mat e2 = random_rows(stream, lay.rows2, lay.n2);
                evaluate_pair(lay, e1, e2, id, cfg.check_outer2, sc, st);
            }
        }
    };

    if (workers == 1) {
        run_slice(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(run_slice, t);
        for (auto& th : pool) th.join();
    }

    SweepState merged = std::move(states.front());
    for (std::size_t t = 1; t < states.size(); ++t) merge_state(merged, states[t]);

    FrontierResult out;
    out.best_lambda = merged.best;
    out.best_id = merged.best_id;
    out.samples_evaluated = total;
    out.seed = cfg.seed;
    out.mode = cfg.mode;
    out.lambda2_uv = lay.lambda2_uv;
    out.necc_violations = merged.necc_violations;
    out.nec_violations = merged.nec_violations;
    out.outer2_violations = merged.outer2_violations;
    out.outer2_skipped = merged.outer2_skipped;
    out.first_violation_id = merged.first_violation;
    out.worst_necc_margin = merged.worst_necc;
    out.worst_nec_margin = merged.worst_nec;
    out.worst_outer2_margin = merged.worst_outer2;
    out.clean = merged.necc_violations == 0 && merged.nec_violations == 0 &&
                merged.outer2_violations == 0;

    for (Eigen::Index i = 0; i < out.best_lambda.size(); ++i) {
        if (out.best_lambda(i) < 0.0 || out.best_lambda(i) > 1.0 + tol::kSpectral) {
            fail(Err::Internal, "frontier value " + std::to_string(out.best_lambda(i)) +
                                    " escaped [0, 1]");
        }
    }

    std::uint64_t record = kNoPair;
    if (indices > 1 && out.best_id[1] != kNoPair) record = out.best_id[1];
    else if (out.best_id[0] != kNoPair) record = out.best_id[0];
    if (record != kNoPair) {
        out.argmax = cfg.mode == Mode::Exhaustive
                         ? deterministic_pair(src, cfg.n, cfg.x1_size, cfg.x2_size, record)
                         : random_pair(src, cfg.n, cfg.x1_size, cfg.x2_size, cfg.seed, record);
    }
    return out;
}

} // namespace corrspec::oracle
