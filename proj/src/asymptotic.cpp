#include "corrspec/asymptotic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "corrspec/tol.hpp"

namespace corrspec::asymptotic {

namespace {

constexpr int kGramBlock = 4096;   // fixed column block width for streamed Grams
constexpr int kMaxLetters = 20;    // exact multinomials fit in long long up to 20!
constexpr int kMaxTopk = 1 << 20;

// n! / prod(counts!) with overflow detection
long long multinomial(int n, const std::vector<int>& counts) {
    __int128 acc = 1;
    int remaining = n;
    for (int c : counts) {
        // multiply by C(remaining, c)
        __int128 binom = 1;
        for (int i = 1; i <= c; ++i) {
            binom = binom * (remaining - c + i) / i; // exact: prefix products of C are integral
        }
        remaining -= c;
        acc *= binom;
        if (acc > std::numeric_limits<long long>::max()) {
            fail(Err::SizeOverflow, "multinomial multiplicity exceeds 64-bit range");
        }
    }
    return static_cast<long long>(acc);
}

struct HeapState {
    double value;
    std::vector<int> idx; // nondecreasing base-sigma indices, length n
};

struct HeapLess {
    // max-heap on value; ties resolved toward lexicographically smaller index vector
    bool operator()(const HeapState& a, const HeapState& b) const {
        if (a.value != b.value) return a.value < b.value;
        return a.idx > b.idx;
    }
};

// ---------------------------------------------------------------------------
// streamed Gram accumulation: G = C C^T over fixed-width column blocks, columns
// produced by a generator so the wide matrix is never materialized
// ---------------------------------------------------------------------------

template <typename ColumnFn>
Mat streamed_gram(int m, long long cols, ColumnFn&& column_of) {
    Mat g = Mat::Zero(m, m);
    Mat block(m, kGramBlock);
    for (long long c0 = 0; c0 < cols; c0 += kGramBlock) {
        const int width = static_cast<int>(std::min<long long>(kGramBlock, cols - c0));
        for (int j = 0; j < width; ++j) {
            column_of(c0 + j, block.col(j));
        }
        g.noalias() += block.leftCols(width) * block.leftCols(width).transpose();
    }
    return g;
}

Vec singular_values_of_gram(const Mat& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.info() != Eigen::Success) {
        fail(Err::ConvergenceFailure, "eigen solve failed on streamed Gram matrix");
    }
    Vec ev = es.eigenvalues(); // ascending
    Vec sv(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        sv(i) = std::sqrt(std::max(0.0, ev(ev.size() - 1 - i)));
    }
    return sv;
}

void validate_distribution(const Vec& p, const std::string& name) {
    if (p.size() < 2) fail(Err::DegenerateSource, name + " needs at least two symbols");
    for (int i = 0; i < p.size(); ++i) {
        if (!(p(i) > tol::kZeroMass)) {
            fail(Err::DegenerateSource, name + " must be strictly positive at index " + std::to_string(i));
        }
    }
    if (std::abs(p.sum() - 1.0) > tol::kMassSum) {
        fail(Err::SumNotOne, name + " sums to " + std::to_string(p.sum()));
    }
}

// sequence masses w_s for all |U|^n sequences, most-significant letter first
Vec sequence_masses(const Vec& pu, int n) {
    Vec w = pu;
    for (int k = 1; k < n; ++k) {
        Vec next(w.size() * pu.size());
        for (long long i = 0; i < w.size(); ++i) {
            next.segment(i * pu.size(), pu.size()) = w(i) * pu;
        }
        w.swap(next);
    }
    return w;
}

} // namespace

NLetterSpectrum nletter_spectrum(const Vec& base, int n, int topk) {
    const int l = static_cast<int>(base.size());
    if (l < 1) fail(Err::DegenerateSource, "empty base spectrum");
    if (n < 1 || n > kMaxLetters) {
        fail(Err::SizeOverflow, "letter count must be in [1, " + std::to_string(kMaxLetters) + "]");
    }
    if (topk < 1 || topk > kMaxTopk) {
        fail(Err::SizeOverflow, "topk must be in [1, " + std::to_string(kMaxTopk) + "]");
    }
    for (int i = 0; i < l; ++i) {
        if (base(i) < -1e-10 || base(i) > 1.0 + tol::kSpectral) {
            fail(Err::InvalidTilde, "base singular values must lie in [0, 1]");
        }
        if (i > 0 && base(i) > base(i - 1) + 1e-12) {
            fail(Err::InvalidTilde, "base singular values must be nonincreasing");
        }
    }

    NLetterSpectrum out;
    // l^n, saturating
    out.total = 1;
    for (int k = 0; k < n; ++k) {
        if (out.total > (std::numeric_limits<long long>::max() / l)) {
            out.total = std::numeric_limits<long long>::max();
            break;
        }
        out.total *= l;
    }

    std::priority_queue<HeapState, std::vector<HeapState>, HeapLess> heap;
    std::set<std::vector<int>> seen;
    std::vector<int> root(n, 0);
    double rootval = 1.0;
    for (int k = 0; k < n; ++k) rootval *= std::max(0.0, base(0));
    heap.push({rootval, root});
    seen.insert(root);

    std::vector<double> expanded;
    expanded.reserve(static_cast<std::size_t>(topk));
    long long emitted = 0;
    while (!heap.empty() && emitted < topk) {
        HeapState s = heap.top();
        heap.pop();

        std::vector<int> counts(l, 0);
        for (int i : s.idx) counts[i]++;
        const long long mult = multinomial(n, counts);

        NLetterSpectrum::Distinct d;
        d.value = s.value;
        d.counts = counts;
        d.multiplicity = mult;
        out.distinct.push_back(std::move(d));

        for (long long r = 0; r < mult && emitted < topk; ++r) {
            expanded.push_back(s.value);
            ++emitted;
        }

        // successors: bump one position, keeping the index vector nondecreasing
        for (int i = 0; i < n; ++i) {
            const int v = s.idx[i];
            if (v + 1 >= l) continue;
            if (i + 1 < n && v + 1 > s.idx[i + 1]) continue;
            std::vector<int> child = s.idx;
            child[i] = v + 1;
            if (!seen.insert(child).second) continue;
            // recompute from scratch: identical multisets must compare bit-equal
            double cv = 1.0;
            for (int q : child) cv *= std::max(0.0, base(q));
            heap.push({cv, std::move(child)});
        }
    }
    out.values = Eigen::Map<const Vec>(expanded.data(), static_cast<Eigen::Index>(expanded.size()));
    return out;
}

WitsenhausenConstruction construct_witsenhausen(const Vec& px, const Vec& pu, int n,
                                                const std::vector<int>& s1) {
    validate_distribution(px, "px");
    validate_distribution(pu, "pu");
    if (n < 1) fail(Err::DegenerateSource, "letter count must be positive");
    if (s1.empty() || static_cast<int>(s1.size()) >= px.size()) {
        fail(Err::DegenerateSource, "block S1 must be a nonempty proper subset of the X alphabet");
    }

    WitsenhausenConstruction c;
    c.n = n;
    c.px = px;
    c.pu = pu;
    c.s1 = s1;

    std::vector<std::uint8_t> in_s1(px.size(), 0);
    for (int i : s1) {
        if (i < 0 || i >= px.size()) fail(Err::UnknownAxis, "S1 index out of range");
        if (in_s1[i]) fail(Err::UnknownAxis, "S1 index repeated");
        in_s1[i] = 1;
    }

    long long cols = 1;
    for (int k = 0; k < n; ++k) {
        cols *= pu.size();
        if (cols * px.size() > tol::kWideCellCap) {
            fail(Err::SizeOverflow, "sequence table exceeds the wide-matrix cell cap");
        }
    }
    c.columns = cols;

    const double alpha = [&] {
        double a = 0.0;
        for (int i = 0; i < px.size(); ++i)
            if (in_s1[i]) a += px(i);
        return a;
    }();
    c.ps1 = alpha;

    // --- greedy block selection over sequence masses -------------------------
    const Vec w = sequence_masses(pu, n);
    std::vector<long long> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), 0LL);
    std::sort(order.begin(), order.end(), [&](long long a, long long b) {
        if (w(a) != w(b)) return w(a) > w(b);
        return a < b;
    });

    c.s2_mask.assign(static_cast<std::size_t>(cols), 0);
    double taken = 0.0;
    for (long long idx : order) {
        if (taken + w(idx) <= alpha + 1e-12) {
            c.s2_mask[static_cast<std::size_t>(idx)] = 1;
            taken += w(idx);
        }
    }

    // smallest unused mass, lowest index on ties
    long long spare = -1;
    for (long long idx = 0; idx < cols; ++idx) {
        if (c.s2_mask[static_cast<std::size_t>(idx)]) continue;
        if (spare < 0 || w(idx) < w(spare) || (w(idx) == w(spare) && idx < spare)) spare = idx;
    }
    if (taken <= 0.0) {
        // every single mass overshoots alpha; the closest achievable block is one sequence
        if (spare < 0) fail(Err::Internal, "no sequence available for block S2");
        c.s2_mask[static_cast<std::size_t>(spare)] = 1;
        taken = w(spare);
    } else if (spare >= 0) {
        const double cand_gap = taken + w(spare) - alpha;
        if (std::abs(cand_gap) < (alpha - taken) - 1e-15 && taken + w(spare) <= 1.0 - tol::kZeroMass) {
            c.s2_mask[static_cast<std::size_t>(spare)] = 1;
            taken += w(spare);
        }
    }

    const double beta = taken;
    if (!(beta > tol::kZeroMass) || !(beta < 1.0 - tol::kZeroMass)) {
        fail(Err::DegenerateMarginal, "selected block mass is degenerate");
    }
    c.ps2 = beta;
    c.gap = std::abs(beta - alpha);
    c.exact_hit = c.gap <= tol::kIdentity;
    c.beta_at_least_alpha = beta >= alpha;
    c.pmax_n = std::pow(pu.maxCoeff(), n);
    if (c.gap > c.pmax_n + 1e-12) {
        fail(Err::Internal, "greedy selection exceeded its gap guarantee");
    }

    // --- block scalings and audit constants ----------------------------------
    if (c.beta_at_least_alpha) {
        c.scale[0][0] = 1.0 / beta;
        c.scale[0][1] = 0.0;
        c.scale[1][0] = (beta - alpha) / ((1.0 - alpha) * beta);
        c.scale[1][1] = 1.0 / (1.0 - alpha);
        c.c1 = 1.0 / std::sqrt((1.0 - alpha) * beta);
        c.c2 = std::sqrt((1.0 - alpha) / alpha) / (1.0 - beta);
        c.c3 = ((1.0 - alpha) / (1.0 - beta)) * std::sqrt(beta / alpha);
    } else {
        c.scale[0][0] = 1.0 / alpha;
        c.scale[0][1] = (alpha - beta) / (alpha * (1.0 - beta));
        c.scale[1][0] = 0.0;
        c.scale[1][1] = 1.0 / (1.0 - beta);
        c.c1 = 1.0 / std::sqrt(alpha * (1.0 - beta));
        c.c2 = std::sqrt(alpha / (1.0 - alpha)) / beta;
        c.c3 = (alpha / beta) * std::sqrt((1.0 - beta) / (1.0 - alpha));
    }
    c.c4 = 1.0 / std::sqrt(alpha * (1.0 - alpha));

    const double factor1 = 1.0 - c.c4 * std::pow(pu.maxCoeff(), 0.5 * n);
    const double factor2 = 1.0 - c.c2 * c.pmax_n;
    c.certified_lower = (factor1 > 0.0 && factor2 > 0.0) ? factor1 * factor2 : 0.0;

    // --- lambda2 from the streamed Gram of the tilde transform ---------------
    const int m = static_cast<int>(px.size());
    Vec dir[2]; // tilde column direction per S2 membership
    for (int b = 0; b < 2; ++b) {
        dir[b].resize(m);
        for (int x = 0; x < m; ++x) {
            dir[b](x) = c.scale[in_s1[x] ? 0 : 1][b] * std::sqrt(px(x));
        }
    }
    Mat g = streamed_gram(m, cols, [&](long long s, Eigen::Ref<Vec> col) {
        col = std::sqrt(w(s)) * dir[c.s2_mask[static_cast<std::size_t>(s)] ? 0 : 1];
    });
    Vec sv = singular_values_of_gram(g);
    c.sigma1 = sv(0);
    c.lambda2 = sv.size() > 1 ? std::clamp(sv(1), 0.0, 1.0) : 0.0;
    return c;
}

BoundReport verify_app_bound(const WitsenhausenConstruction& c) {
    BoundReport r;
    r.gap_ok = c.gap <= c.pmax_n + 1e-12;
    r.certified_ok = c.certified_lower >= 0.0 && c.certified_lower <= 1.0 &&
                     c.lambda2 >= c.certified_lower - 1e-12;
    r.sigma1_ok = std::abs(c.sigma1 - 1.0) <= tol::kSpectral;

    std::vector<std::uint8_t> in_s1(c.px.size(), 0);
    for (int i : c.s1) in_s1[i] = 1;

    // row sums: px(x) * (beta*scale[b][0] + (1-beta)*scale[b][1]) must equal px(x)
    double row_err = 0.0;
    for (int x = 0; x < c.px.size(); ++x) {
        const int b = in_s1[x] ? 0 : 1;
        const double factor = c.ps2 * c.scale[b][0] + (1.0 - c.ps2) * c.scale[b][1];
        row_err = std::max(row_err, std::abs(c.px(x) * factor - c.px(x)));
    }
    r.row_marginal_err = row_err;

    // column masses: w_s * (alpha*scale[0][b] + (1-alpha)*scale[1][b]) must equal w_s
    double col_err = 0.0;
    for (int b = 0; b < 2; ++b) {
        const double factor = c.ps1 * c.scale[0][b] + (1.0 - c.ps1) * c.scale[1][b];
        col_err = std::max(col_err, std::abs(factor - 1.0));
    }
    r.col_factor_err = col_err;

    r.marginals_ok = row_err <= tol::kMassSum && col_err <= tol::kMassSum;
    r.pass = r.gap_ok && r.certified_ok && r.sigma1_ok && r.marginals_ok;
    return r;
}

PerturbationReport perturbation_check(const WitsenhausenConstruction& c) {
    const int m = static_cast<int>(c.px.size());
    std::vector<std::uint8_t> in_s1(c.px.size(), 0);
    for (int i : c.s1) in_s1[i] = 1;

    const double alpha = c.ps1;
    const double beta = c.ps2;

    // A drops the off-block leak; M, N rescale A into an exactly decomposed joint
    double scale_a[2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) scale_a[i][j] = c.scale[i][j];
    Vec mdiag(m);
    double nscale[2];
    if (c.beta_at_least_alpha) {
        scale_a[1][0] = 0.0;
        for (int x = 0; x < m; ++x) mdiag(x) = in_s1[x] ? 1.0 : (1.0 - alpha) / (1.0 - beta);
    } else {
        scale_a[0][1] = 0.0;
        for (int x = 0; x < m; ++x) mdiag(x) = in_s1[x] ? alpha / beta : 1.0;
    }
    nscale[0] = std::sqrt(beta / alpha);
    nscale[1] = std::sqrt((1.0 - beta) / (1.0 - alpha));

    Vec dir_p[2], dir_a[2], dir_r[2];
    for (int b = 0; b < 2; ++b) {
        dir_p[b].resize(m);
        dir_a[b].resize(m);
        for (int x = 0; x < m; ++x) {
            const int rowb = in_s1[x] ? 0 : 1;
            const double sq = std::sqrt(c.px(x));
            dir_p[b](x) = c.scale[rowb][b] * sq;
            dir_a[b](x) = scale_a[rowb][b] * sq;
        }
        dir_r[b] = nscale[b] * mdiag.cwiseProduct(dir_a[b]);
    }

    const Vec w = sequence_masses(c.pu, c.n);
    auto gram_for = [&](const Vec* dir) {
        return streamed_gram(m, c.columns, [&](long long s, Eigen::Ref<Vec> col) {
            col = std::sqrt(w(s)) * dir[c.s2_mask[static_cast<std::size_t>(s)] ? 0 : 1];
        });
    };
    const Vec sv_p = singular_values_of_gram(gram_for(dir_p));
    const Vec sv_a = singular_values_of_gram(gram_for(dir_a));
    const Vec sv_r = singular_values_of_gram(gram_for(dir_r));

    PerturbationReport rep;
    const double e_norm = c.c1 * c.gap;
    double additive = 0.0;
    for (int i = 0; i < m; ++i) {
        additive = std::max(additive, std::abs(sv_p(i) - sv_a(i)) - e_norm);
    }
    rep.additive_worst = additive;

    // Gram-computed zero singular values carry sqrt(eigen-noise) ~ 1e-8; the diagonal
    // scalings are invertible so true zeros pair up, and anything under the noise
    // floor on either side is excluded from the ratio test
    constexpr double kRankNoise = 1e-7;
    double low = std::numeric_limits<double>::infinity();
    double high = -std::numeric_limits<double>::infinity();
    bool zero_mismatch = false;
    for (int i = 0; i < m; ++i) {
        if (sv_a(i) < kRankNoise || sv_r(i) < kRankNoise) {
            if (std::max(sv_a(i), sv_r(i)) > 1e-5) zero_mismatch = true;
            continue;
        }
        const double ratio = sv_r(i) / sv_a(i);
        low = std::min(low, ratio * c.c3 - 1.0);
        high = std::max(high, ratio / c.c3 - 1.0);
    }
    if (!std::isfinite(low)) low = 0.0;
    if (!std::isfinite(high)) high = 0.0;
    rep.multiplicative_low = low;
    rep.multiplicative_high = high;
    rep.reference_sigma2 = sv_r.size() > 1 ? sv_r(1) : 0.0;

    rep.pass = !zero_mismatch && rep.additive_worst <= kRankNoise &&
               rep.multiplicative_low >= -kRankNoise && rep.multiplicative_high <= kRankNoise &&
               std::abs(rep.reference_sigma2 - 1.0) <= 1e-9;
    return rep;
}

JointDist to_joint(const WitsenhausenConstruction& c) {
    if (c.columns * c.px.size() > tol::kKronCellCap) {
        fail(Err::SizeOverflow, "materialized block joint exceeds the cell cap");
    }
    std::vector<std::uint8_t> in_s1(c.px.size(), 0);
    for (int i : c.s1) in_s1[i] = 1;
    const Vec w = sequence_masses(c.pu, c.n);

    JointDist j;
    j.rows = prob::indexed_alphabet(static_cast<int>(c.px.size()), "x");
    j.cols = prob::sequence_alphabet(prob::indexed_alphabet(static_cast<int>(c.pu.size()), "u"), c.n);
    j.mass.resize(c.px.size(), c.columns);
    for (int x = 0; x < c.px.size(); ++x) {
        const int rb = in_s1[x] ? 0 : 1;
        for (long long s = 0; s < c.columns; ++s) {
            const int cb = c.s2_mask[static_cast<std::size_t>(s)] ? 0 : 1;
            j.mass(x, s) = c.px(x) * w(s) * c.scale[rb][cb];
        }
    }
    prob::validate_joint(j);
    return j;
}

} // namespace corrspec::asymptotic
