#pragma once

#include <vector>

#include "corrspec/prob.hpp"
#include "corrspec/tol.hpp"

namespace corrspec::binary {

using prob::JointDist;

// ---------------------------------------------------------------------------
// bounds on the signed correlation of a pair of binary variables with one-masses
// a^2 and b^2, extracted from a source whose correlation spectrum tail starts at
// lambda2. All three xi values share the denominator a*b*sqrt((1-a^2)(1-b^2)).
// ---------------------------------------------------------------------------

struct XiValues {
    double xi1 = 0.0; // positive-side cap
    double xi2 = 0.0; // negative-side cap
    double xi3 = 0.0; // achievable inner radius
    double denom = 0.0;
};

// a, b are amplitudes in (0,1); DegenerateMarginal at the endpoints
XiValues xi_values(double a, double b);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

bool contains(const Interval& iv, double s, double slack = tol::kInequality);

struct BoundSet {
    Interval outer1; // [-min(xi2, l2), min(xi1, l2)]
    Interval outer2; // [-min(xi2, l2(1+xi2)/2), min(xi1, l2(1+xi1)/2)]
    Interval inner;  // [-l2*xi3, l2*xi3]
};

BoundSet bounds(double a, double b, double lambda2);

struct CurveRow {
    double a = 0.0;
    double b = 0.0;
    BoundSet set;
};

// grid points i/(grid+1), i = 1..grid; diagonal a = b by default, all (a, b)
// pairs in row-major order when full_grid is set
std::vector<CurveRow> curve_data(int grid, bool full_grid, double lambda2);

// ---------------------------------------------------------------------------
// extreme points over indicator pairs on n uniform bits: X1 = 1_A, X2 = 1_B with
// |A| = 2^n a^2, |B| = 2^n b^2 (NonIntegralCount otherwise). The signed
// correlation is affine in the overlap |A and B|, so the maximum sits at the
// largest feasible overlap and equals xi1.
// ---------------------------------------------------------------------------

struct ExtremePoint {
    long long overlap = 0; // |A and B| at the maximum
    double value = 0.0;    // max signed correlation
};

ExtremePoint extreme_point_max(double a, double b, int n);

// the 2x2 joint realized by an indicator pair with the given overlap
JointDist extreme_joint(double a, double b, int n, long long overlap);

} // namespace corrspec::binary
