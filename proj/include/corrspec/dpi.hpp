#pragma once

#include <string>
#include <vector>

#include "corrspec/factored.hpp"
#include "corrspec/spectral.hpp"

namespace corrspec::dpi {

using prob::FactoredDist;
using prob::JointDist;
using prob::Kernel;
using prob::Mat;
using prob::Vec;

// ---------------------------------------------------------------------------
// two-link chain X - Y - Z: a joint on (X,Y) and a kernel Z|Y
// ---------------------------------------------------------------------------

struct ChainSpec {
    JointDist pxy;
    Kernel kzy; // from = Y alphabet, to = Z alphabet
};

struct ComposeResult {
    JointDist pxz;
    JointDist pyz;
    // |tilde(P_XZ) - tilde(P_XY) * tilde(P_YZ)|_inf; the product identity is exact for
    // any chain, so exceeding tol::kFactorization is an internal error. NaN when some
    // Z symbol has zero marginal (tilde undefined there).
    double factorization_residual = 0.0;
};

// marginalizes Y out; requires the X and Y marginals of pxy to be positive
ComposeResult compose(const ChainSpec& chain);

// ---------------------------------------------------------------------------
// per-index data processing report: lambda_i(XZ) <= lambda_i(XY) * lambda2(YZ)
// ---------------------------------------------------------------------------

struct DPIReport {
    Vec lam_xy, lam_yz, lam_xz; // tail spectra (lambda_2 ..), clamped
    Vec slack;                  // lambda_i(XY)*lambda2(YZ) - lambda_i(XZ), i = 2..
    double min_slack = 0.0;
    bool holds = false; // min_slack >= -tol::kInequality
    double factorization_residual = 0.0;
};

DPIReport check_dpi(const ChainSpec& chain);

// ---------------------------------------------------------------------------
// necessary-condition membership reports
// ---------------------------------------------------------------------------

struct Constraint {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0; // bound - measured; negative beyond tolerance fails
    bool pass = true;
};

struct MembershipReport {
    bool pass = true;
    double lambda2_bound = 0.0;
    std::vector<Constraint> constraints;
    std::vector<std::string> skipped_events; // zero-probability conditionings
    std::string worst;                       // constraint with the smallest margin
    double worst_margin = 0.0;
};

// tail of the (X1,X2) spectrum against lambda2 of the letter source
MembershipReport necc_check(const JointDist& px1x2, double lambda2_uv,
                            double slack = tol::kInequality);

// same check conditioned on every positive assignment of the chosen letter subsets.
// `f` holds axes x1, x2 plus letter axes; subsets are lists of letter-axis names.
MembershipReport conditional_necc_check(const FactoredDist& f, double lambda2_uv,
                                        const std::vector<std::string>& subset_u,
                                        const std::vector<std::string>& subset_v,
                                        const std::string& x1 = "x1",
                                        const std::string& x2 = "x2",
                                        double slack = tol::kInequality);

// conjunction over all subset pairs of the given letter axes (including empty);
// SubsetExplosion beyond tol::kSubsetPairCap pairs
MembershipReport intersection_membership(const FactoredDist& f, double lambda2_uv,
                                         const std::vector<std::string>& u_axes,
                                         const std::vector<std::string>& v_axes,
                                         const std::string& x1 = "x1",
                                         const std::string& x2 = "x2",
                                         double slack = tol::kInequality);

} // namespace corrspec::dpi
