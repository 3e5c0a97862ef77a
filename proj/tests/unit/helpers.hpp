#pragma once

#include <vector>

#include "corrspec/prob.hpp"
#include "corrspec/rng.hpp"
#include "doctest.h"

namespace testutil {

using corrspec::prob::Alphabet;
using corrspec::prob::JointDist;
using corrspec::prob::Mat;
using corrspec::prob::Vec;

inline JointDist make_joint(std::vector<std::vector<double>> rows) {
    int r = static_cast<int>(rows.size());
    int c = static_cast<int>(rows[0].size());
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return JointDist(corrspec::prob::indexed_alphabet(r, "r"),
                     corrspec::prob::indexed_alphabet(c, "c"), std::move(m));
}

// doubly symmetric binary source: uniform marginals, crossover p
inline JointDist bss(double p) {
    return make_joint({{(1.0 - p) / 2.0, p / 2.0}, {p / 2.0, (1.0 - p) / 2.0}});
}

inline corrspec::prob::Kernel bsc(double eps) {
    Mat m(2, 2);
    m << 1.0 - eps, eps, eps, 1.0 - eps;
    return corrspec::prob::Kernel(corrspec::prob::indexed_alphabet(2, "y"),
                                  corrspec::prob::indexed_alphabet(2, "z"), std::move(m));
}

// seeded random joint with Dirichlet(1) cells
inline JointDist random_joint(corrspec::rng::Stream& s, int r, int c) {
    auto cells = s.next_simplex(static_cast<std::size_t>(r) * c);
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cells[static_cast<std::size_t>(i * c + j)];
    return JointDist(corrspec::prob::indexed_alphabet(r, "r"),
                     corrspec::prob::indexed_alphabet(c, "c"), std::move(m));
}

inline corrspec::prob::Kernel random_kernel(corrspec::rng::Stream& s, int from, int to) {
    Mat m(from, to);
    for (int i = 0; i < from; ++i) {
        auto row = s.next_simplex(static_cast<std::size_t>(to));
        for (int j = 0; j < to; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return corrspec::prob::Kernel(corrspec::prob::indexed_alphabet(from, "y"),
                                  corrspec::prob::indexed_alphabet(to, "z"), std::move(m));
}

} // namespace testutil
