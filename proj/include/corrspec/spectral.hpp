#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrspec/prob.hpp"

namespace corrspec::spectral {

using prob::JointDist;
using prob::Mat;
using prob::Vec;

// ---------------------------------------------------------------------------
// tilde transform: T = diag(px)^(-1/2) * P * diag(py)^(-1/2)
// ---------------------------------------------------------------------------

struct TildeMatrix {
    Mat mat;
    // marginals the matrix was built from; absent for raw candidates, in which case
    // verification recovers them from the top singular pair
    std::optional<Vec> px, py;
};

// requires strictly positive marginals (> tol::kZeroMass); ZeroMarginal otherwise
TildeMatrix tilde(const JointDist& j);

TildeMatrix tilde_from_candidate(Mat m); // no marginals attached

// inverse transform. Uses stored marginals when present, otherwise the positive top
// singular pair (InvalidTilde if none exists).
Mat untilde(const TildeMatrix& t);

// ---------------------------------------------------------------------------
// deterministic SVD
//
// Computed through the Gram matrix of the smaller side. Conventions, pinned so
// that repeated runs and reordered inputs give identical bytes:
//   * singular values descending, clamped at >= 0;
//   * each left vector's first coordinate of magnitude > 1e-12 is positive, the
//     right vector's sign is slaved to it;
//   * equal singular values (within 1e-12) are ordered by the first coordinate
//     where their left vectors differ, larger coordinate first;
//   * zero singular values get right vectors completed deterministically from
//     canonical basis vectors.
// ---------------------------------------------------------------------------

struct SpectralDecomposition {
    Vec sigma; // length min(rows, cols), descending
    Mat M;     // rows x l, orthonormal columns (left vectors)
    Mat N;     // cols x l, orthonormal columns (right vectors)
};

SpectralDecomposition svd(const Mat& a);

// singular values only (same Gram route, cheaper)
Vec singular_values(const Mat& a);

// ---------------------------------------------------------------------------
// validity of a candidate tilde matrix (spectral characterization of joints)
// ---------------------------------------------------------------------------

struct IffReport {
    bool valid = false;
    std::vector<std::string> failures; // names of violated conditions, in check order
    Vec sigma;
    Vec recovered_px, recovered_py; // meaningful when the positive-pair check passed
};

// Checks, in order: nonnegative entries; all sigma <= 1 + tol; sigma_1 = 1 within
// tol; a strictly positive top singular pair exists; the back-transformed matrix is
// a valid joint. All five pass iff the matrix is the tilde of some valid joint.
IffReport verify_theorem_iff(const TildeMatrix& t);

// ---------------------------------------------------------------------------
// correlation spectrum of a joint
// ---------------------------------------------------------------------------

struct CorrelationSpectrum {
    double lambda1 = 0.0; // top singular value, should be 1
    Vec lambdas;          // lambda_2 .. lambda_l, descending, clamped to [0,1]
};

CorrelationSpectrum correlation_spectrum(const JointDist& j);
double lambda2(const JointDist& j); // 0 when min(|rows|,|cols|) == 1

// spectrum of an unnormalized nonnegative block after support restriction and
// renormalization; returns all singular values (sigma_1 first), clamped to [0,1].
// This is the fast path for conditional-membership sweeps; it agrees with
// correlation_spectrum on the restricted joint (property-tested).
Vec support_spectrum(const Mat& block);

// signed second correlation of a 2x2 block: det(P)/sqrt(r0 r1 c0 c1).
// NotBinary unless the support-restricted block is 2x2 with positive marginals.
double signed_lambda_2x2(const Mat& block);

// ---------------------------------------------------------------------------
// support decomposition (the lambda2 = 1 characterization)
// ---------------------------------------------------------------------------

struct Decomposition {
    std::vector<std::string> s1_rows; // block rows
    std::vector<std::string> s2_cols; // block cols
};

// splits the support graph into components; returns the first block when there are
// at least two components of positive mass, nullopt otherwise
std::optional<Decomposition> decomposes(const JointDist& j);

} // namespace corrspec::spectral
