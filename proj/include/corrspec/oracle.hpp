#pragma once

#include <cstdint>
#include <limits>

#include "corrspec/factored.hpp"
#include "corrspec/prob.hpp"

namespace corrspec::oracle {

using prob::FactoredDist;
using prob::JointDist;
using prob::Kernel;
using prob::Mat;
using prob::Vec;

// ---------------------------------------------------------------------------
// encoder pairs p(x1 | u^n), p(x2 | v^n) acting on n source letters
// ---------------------------------------------------------------------------

struct EncoderPair {
    Kernel enc1; // from: |U|^n sequences (first letter most significant), to: X1
    Kernel enc2;
    int n = 1;
};

// exact product tensor p(u^n, v^n) p(x1|u^n) p(x2|v^n) with one axis per source
// letter (u1..un, v1..vn) plus x1, x2; CapExceeded beyond tol::kKronCellCap
// source cells
FactoredDist induced_joint(const JointDist& sources, const EncoderPair& pair);

// the (X1, X2) marginal, computed directly as enc1^T P_{U^n V^n} enc2
JointDist induced_pair(const JointDist& sources, const EncoderPair& pair);

// ---------------------------------------------------------------------------
// the encoder-pair id space: deterministic maps enumerate exactly once in a
// fixed order, random ids draw Dirichlet(1) kernel rows
// ---------------------------------------------------------------------------

struct EnumerationPlan {
    long long rows1 = 0, rows2 = 0;       // |U|^n, |V|^n
    std::uint64_t count1 = 0, count2 = 0; // |X1|^rows1, |X2|^rows2
    std::uint64_t total = 0;              // count1 * count2 = number of pair ids
};

// counts the deterministic sweep and refuses totals above `cap` (CapExceeded
// names the exact count that was refused)
EnumerationPlan enumerate_deterministic(const JointDist& sources, int n, int x1_size,
                                        int x2_size, std::uint64_t cap);

// pair number `id` of the deterministic order: id = id1 * count2 + id2, and
// id1's base-|X1| digit r is the image of sequence row r (row 0 least
// significant); one-hot kernel rows
EncoderPair deterministic_pair(const JointDist& sources, int n, int x1_size, int x2_size,
                               std::uint64_t id);

// seeded stochastic pair: every kernel row is an independent Dirichlet(1) draw
// from the item's own stream, so results do not depend on the worker split
EncoderPair random_pair(const JointDist& sources, int n, int x1_size, int x2_size,
                        std::uint64_t seed, std::uint64_t item);

// ---------------------------------------------------------------------------
// frontier sweeps: best observed spectrum plus bound-violation tallies
// ---------------------------------------------------------------------------

enum class Mode { Exhaustive, Random };

struct OracleConfig {
    int n = 1;
    int x1_size = 2;
    int x2_size = 2;
    Mode mode = Mode::Exhaustive;
    std::uint64_t budget = 100000; // exhaustive: largest sweep accepted; random: sample count
    std::uint64_t seed = 7;
    int workers = 1;
    bool check_nec = true;    // subset-conditioned spectra; SubsetExplosion when
                              // (2^n)^2 exceeds tol::kSubsetPairCap
    bool check_outer2 = true; // signed binary bounds on 2x2 pairs
};

inline constexpr std::uint64_t kNoPair = std::numeric_limits<std::uint64_t>::max();

struct FrontierResult {
    // best_lambda(i) = max over evaluated pairs of singular value i+1 of the
    // support-restricted tilde of P_{X1X2}; best_id holds the lowest pair id
    // attaining each entry (kNoPair when the index never appeared)
    Vec best_lambda;
    std::vector<std::uint64_t> best_id;
    EncoderPair argmax; // the pair behind the lambda2 record
    std::uint64_t samples_evaluated = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::Exhaustive;
    double lambda2_uv = 0.0;

    // bound audits over every evaluated pair; margins are min over all checked
    // clauses (negative = violation), +inf when a check never fired
    std::uint64_t necc_violations = 0;
    std::uint64_t nec_violations = 0;
    std::uint64_t outer2_violations = 0;
    std::uint64_t outer2_skipped = 0; // 2x2 pairs with a degenerate marginal
    std::uint64_t first_violation_id = kNoPair;
    double worst_necc_margin = std::numeric_limits<double>::infinity();
    double worst_nec_margin = std::numeric_limits<double>::infinity();
    double worst_outer2_margin = std::numeric_limits<double>::infinity();
    bool clean = false; // zero violations of every audited bound
};

FrontierResult frontier(const JointDist& sources, const OracleConfig& cfg);

} // namespace corrspec::oracle
