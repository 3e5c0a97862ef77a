#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "corrspec/error.hpp"
#include "corrspec/tol.hpp"

namespace corrspec::prob {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// alphabets
// ---------------------------------------------------------------------------

struct Alphabet {
    std::vector<std::string> labels;

    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> l) : labels(std::move(l)) {}

    int size() const { return static_cast<int>(labels.size()); }
    bool operator==(const Alphabet& o) const { return labels == o.labels; }
};

// numeric alphabet "0","1",...,"n-1"
Alphabet indexed_alphabet(int n, const std::string& prefix = "");

// product alphabet; labels joined with '|'
Alphabet product_alphabet(const Alphabet& a, const Alphabet& b);

// all length-n sequences over `base`, most-significant letter first
Alphabet sequence_alphabet(const Alphabet& base, int n);

void validate_alphabet(const Alphabet& a, const std::string& where);

// ---------------------------------------------------------------------------
// joint distribution of a pair, stored as a dense row x col mass matrix
// ---------------------------------------------------------------------------

struct JointDist {
    Alphabet rows;
    Alphabet cols;
    Mat mass; // mass(i,j) = P(row=i, col=j)

    JointDist() = default;
    JointDist(Alphabet r, Alphabet c, Mat m)
        : rows(std::move(r)), cols(std::move(c)), mass(std::move(m)) {}
};

// Throws Error naming the first violated invariant: labels well-formed, dimensions
// consistent, entries >= 0 (tiny negatives below tol::kNegClip are clipped in place),
// total mass within tol::kMassSum of 1. Zero marginals are legal here; they are only
// rejected by the tilde transform.
void validate_joint(JointDist& j);

// true when some row or column marginal is at/below tol::kZeroMass
bool has_zero_marginal(const JointDist& j);

Vec row_marginal(const JointDist& j);
Vec col_marginal(const JointDist& j);

// ---------------------------------------------------------------------------
// conditional kernel K(to | from), rows indexed by `from`
// ---------------------------------------------------------------------------

struct Kernel {
    Alphabet from;
    Alphabet to;
    Mat rows; // rows(i,j) = P(to=j | from=i), each row sums to 1

    Kernel() = default;
    Kernel(Alphabet f, Alphabet t, Mat r)
        : from(std::move(f)), to(std::move(t)), rows(std::move(r)) {}
};

void validate_kernel(Kernel& k);

enum class Given { Rows, Cols };

// conditional of one side given the other; conditioning symbols with marginal at/below
// tol::kZeroMass are reported in `zero_events` and get a uniform placeholder row
Kernel conditional(const JointDist& j, Given given, std::vector<std::string>* zero_events = nullptr);

// joint from input distribution and kernel: P(x,y) = p(x) K(y|x)
JointDist joint_from(const Vec& px, const Alphabet& x, const Kernel& k);

// independent product of two joints; SizeOverflow beyond tol::kKronCellCap cells
JointDist kron(const JointDist& a, const JointDist& b);

// n-fold product of a joint with itself (same cap)
JointDist kron_power(const JointDist& j, int n);

// ---------------------------------------------------------------------------
// entropies (bits)
// ---------------------------------------------------------------------------

double entropy(const Vec& p);
double joint_entropy(const JointDist& j);
double conditional_entropy(const JointDist& j, Given given); // H(other | given)
double mutual_information(const JointDist& j);

// H(p) for p an initializer-style probability vector
double binary_entropy(double p);

} // namespace corrspec::prob
