#pragma once

#include <cstdint>
#include <vector>

#include "corrspec/prob.hpp"

namespace corrspec::asymptotic {

using prob::JointDist;
using prob::Mat;
using prob::Vec;

// ---------------------------------------------------------------------------
// spectrum of an n-fold product source, computed combinatorially: the singular
// values of the product tilde matrix are all n-term products of base singular
// values, with multinomial multiplicities.
// ---------------------------------------------------------------------------

struct NLetterSpectrum {
    struct Distinct {
        double value = 0.0;
        std::vector<int> counts;       // how many factors of each base sigma
        long long multiplicity = 0;    // n! / prod(counts!)
    };
    Vec values;                        // top-k expanded values, descending
    std::vector<Distinct> distinct;    // same order, one entry per distinct multiset
    long long total = 0;               // l^n when it fits, else saturated
};

// base: singular values of the letter source, descending, sigma_1 = 1 first.
// Best-first enumeration; ties broken toward lexicographically smaller index
// multisets. n <= 20 (exact multinomials), topk <= 2^20.
NLetterSpectrum nletter_spectrum(const Vec& base, int n, int topk);

// ---------------------------------------------------------------------------
// block construction over (X1, U^n): rearranges the independent product joint
// into two nearly-exact blocks, preserving both marginals, with a certified
// lower bound on lambda2 that tends to 1 exponentially in n.
// ---------------------------------------------------------------------------

struct WitsenhausenConstruction {
    // inputs
    int n = 0;
    Vec px;                 // target X1 marginal
    Vec pu;                 // letter distribution
    std::vector<int> s1;    // X1 block (indices into px)

    // block selection
    double ps1 = 0.0, ps2 = 0.0; // alpha = P(S1), beta = P(S2)
    double gap = 0.0;            // |beta - alpha|
    bool exact_hit = false;      // gap below tol::kIdentity
    bool beta_at_least_alpha = true;
    std::vector<std::uint8_t> s2_mask; // per sequence index

    // cell scale factors by block: P(x,s) = px(x) * w_s * scale[in S1][in S2]
    double scale[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    // audit constants: ||E~||2 = c1*gap, ||M E~ N||2 = c2*gap, c3 = ||M||2*||N||2,
    // c4 = 1/sqrt(alpha(1-alpha))
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double pmax_n = 0.0;         // max_u pu(u) to the n-th power
    double certified_lower = 0.0;// max(0, (1-c4*pmax^(n/2))(1-c2*pmax^n)), 0 unless both > 0

    // measured from the streamed Gram matrix of the tilde transform
    double sigma1 = 0.0;
    double lambda2 = 0.0;

    long long columns = 0;       // |U|^n
};

// DegenerateSource unless px, pu are strictly positive distributions and s1 is a
// nonempty proper subset; SizeOverflow beyond tol::kWideCellCap cells.
WitsenhausenConstruction construct_witsenhausen(const Vec& px, const Vec& pu, int n,
                                                const std::vector<int>& s1);

struct BoundReport {
    bool pass = false;
    bool gap_ok = false;        // gap <= pmax^n (greedy selection guarantee)
    bool certified_ok = false;  // lambda2 >= certified_lower
    bool sigma1_ok = false;     // top singular value is 1
    bool marginals_ok = false;  // row/column marginals preserved exactly
    double row_marginal_err = 0.0;
    double col_factor_err = 0.0;
};

BoundReport verify_app_bound(const WitsenhausenConstruction& c);

// empirical check of the two perturbation lemmas on the constructed instance:
// additive (singular values move at most ||E~||2) and multiplicative (diagonal
// scalings move them by at most the scaling spread), plus the exactly-decomposed
// reference having its top two singular values at 1.
struct PerturbationReport {
    bool pass = false;
    double additive_worst = 0.0;       // max_i |sigma_i(P~) - sigma_i(A~)| - ||E~||2
    double multiplicative_low = 0.0;   // min_i ratio * c3 - 1   (>= -tol)
    double multiplicative_high = 0.0;  // max_i ratio / c3 - 1   (<= tol)
    double reference_sigma2 = 0.0;     // sigma_2 of the decomposed reference
};

PerturbationReport perturbation_check(const WitsenhausenConstruction& c);

// materialized joint for small instances (cross-checks); SizeOverflow beyond
// tol::kKronCellCap cells
JointDist to_joint(const WitsenhausenConstruction& c);

} // namespace corrspec::asymptotic
