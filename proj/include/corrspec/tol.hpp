#pragma once

// Numeric contract of the whole library, pinned in one place. Tests assert against
// exactly these values; loosening any of them is an interface change.
namespace corrspec::tol {

inline constexpr double kMassSum = 1e-9;        // |sum(mass) - 1| for a valid distribution
inline constexpr double kRowSum = 1e-9;         // kernel rows
inline constexpr double kNegClip = 1e-15;       // entries in (-kNegClip, 0) are treated as 0
inline constexpr double kZeroMass = 1e-12;      // at/below this a probability counts as zero
inline constexpr double kIdentity = 1e-12;      // exact algebraic identities (round trips)
inline constexpr double kSpectral = 1e-8;       // SVD contract residuals, sigma in [0, 1+...]
inline constexpr double kSigmaFloor = -1e-10;   // sigma may undershoot 0 by at most this
inline constexpr double kFactorization = 1e-10; // tilde(P_XZ) vs product of tildes
inline constexpr double kInequality = 1e-8;     // one-sided slack for spectral inequalities
inline constexpr double kMembership = 1e-9;     // factorization residuals for set membership
inline constexpr double kTrifactorAccept = 1e-6;// alternating-minimization acceptance
inline constexpr double kDecomposeLambda = 1e-7;// lambda2 >= 1 - this <=> support decomposes
inline constexpr double kRecovery = 1e-7;       // recovered top pair vs sqrt-marginals
inline constexpr double kRateSlack = 1e-9;      // rate inequalities in region/MAC checks

inline constexpr long long kKronCellCap = 1LL << 22;   // max cells in a materialized product joint
inline constexpr long long kWideCellCap = 1LL << 23;   // max cells for the streamed wide construction
inline constexpr int kSubsetPairCap = 256;             // subset-pair intersection cap
inline constexpr long long kOracleBudgetCap = 100000;  // default/ceiling for oracle sweeps

} // namespace corrspec::tol
