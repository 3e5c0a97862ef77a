#pragma once

#include <map>
#include <string>
#include <vector>

#include "corrspec/prob.hpp"

namespace corrspec::prob {

// ---------------------------------------------------------------------------
// joint distribution over several named variables, dense row-major tensor.
// Axes are kept in canonical order (sorted by name) so serialized output and
// flat indexing are independent of construction order.
// ---------------------------------------------------------------------------

struct Axis {
    std::string name;
    Alphabet alphabet;
};

struct FactoredDist {
    std::vector<Axis> axes;   // sorted by name
    std::vector<double> mass; // row-major over axes in order

    int axis_index(const std::string& name) const; // UnknownAxis if missing
    int rank() const { return static_cast<int>(axes.size()); }
    long long cells() const;
    std::vector<long long> strides() const; // row-major strides per axis

    // decode flat index into per-axis symbol indices
    void decode(long long flat, std::vector<int>& out) const;
};

// sorts axes by name, permutes mass accordingly, validates entries and total
FactoredDist make_factored(std::vector<Axis> axes, std::vector<double> mass);

// keep only the named axes (any order given; result is canonical)
FactoredDist marginalize(const FactoredDist& f, const std::vector<std::string>& keep);

// condition on {axis -> symbol index}; remaining axes keep their order.
// ZeroEvent if the event mass is at/below tol::kZeroMass.
FactoredDist condition(const FactoredDist& f,
                       const std::map<std::string, int>& assignment);

// probability of an event {axis -> symbol index}
double event_mass(const FactoredDist& f, const std::map<std::string, int>& assignment);

// flatten two disjoint axis groups into a pair joint; groups use the order given
JointDist pair_joint(const FactoredDist& f, const std::vector<std::string>& rows,
                     const std::vector<std::string>& cols);

// marginal over a single axis
Vec axis_marginal(const FactoredDist& f, const std::string& name);

// H(group) in bits
double group_entropy(const FactoredDist& f, const std::vector<std::string>& group);

// I(A ; B | C) in bits; C may be empty
double cond_mutual_information(const FactoredDist& f, const std::vector<std::string>& a,
                               const std::vector<std::string>& b,
                               const std::vector<std::string>& c = {});

// product assembly: start from a base factored dist and attach a new variable via a
// conditional table p(new | given-axes), given as a row-major matrix over the given
// axes' cells (rows) and the new alphabet (cols)
FactoredDist attach_conditional(const FactoredDist& base, const Axis& fresh,
                                const std::vector<std::string>& given, const Mat& table);

// view a two-variable joint as a factored dist with the given axis names
FactoredDist from_pair(const JointDist& j, const std::string& row_axis,
                       const std::string& col_axis);

} // namespace corrspec::prob
