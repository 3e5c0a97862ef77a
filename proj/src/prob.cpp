#include "corrspec/prob.hpp"

#include <cmath>
#include <set>

namespace corrspec {

const char* to_string(Err e) {
    switch (e) {
        case Err::NegativeEntry: return "NegativeEntry";
        case Err::SumNotOne: return "SumNotOne";
        case Err::ZeroMarginal: return "ZeroMarginal";
        case Err::AlphabetMismatch: return "AlphabetMismatch";
        case Err::UnknownAxis: return "UnknownAxis";
        case Err::ZeroEvent: return "ZeroEvent";
        case Err::SizeOverflow: return "SizeOverflow";
        case Err::SubsetExplosion: return "SubsetExplosion";
        case Err::CapExceeded: return "CapExceeded";
        case Err::BudgetExceeded: return "BudgetExceeded";
        case Err::DegenerateSource: return "DegenerateSource";
        case Err::DegenerateMarginal: return "DegenerateMarginal";
        case Err::NotBinary: return "NotBinary";
        case Err::NonIntegralCount: return "NonIntegralCount";
        case Err::InvalidTilde: return "InvalidTilde";
        case Err::SingularScaling: return "SingularScaling";
        case Err::ConvergenceFailure: return "ConvergenceFailure";
        case Err::ParseError: return "ParseError";
        case Err::UsageError: return "UsageError";
        case Err::Internal: return "Internal";
    }
    return "Unknown";
}

} // namespace corrspec

namespace corrspec::prob {

Alphabet indexed_alphabet(int n, const std::string& prefix) {
    Alphabet a;
    a.labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a.labels.push_back(prefix + std::to_string(i));
    return a;
}

Alphabet product_alphabet(const Alphabet& a, const Alphabet& b) {
    Alphabet p;
    p.labels.reserve(static_cast<std::size_t>(a.size()) * b.size());
    for (const auto& la : a.labels)
        for (const auto& lb : b.labels) p.labels.push_back(la + "|" + lb);
    return p;
}

Alphabet sequence_alphabet(const Alphabet& base, int n) {
    Alphabet out;
    if (n <= 0) fail(Err::UsageError, "sequence length must be >= 1");
    out = base;
    for (int i = 1; i < n; ++i) out = product_alphabet(out, base);
    return out;
}

void validate_alphabet(const Alphabet& a, const std::string& where) {
    if (a.labels.empty()) fail(Err::AlphabetMismatch, where + ": empty alphabet");
    std::set<std::string> seen;
    for (const auto& l : a.labels) {
        if (l.empty()) fail(Err::AlphabetMismatch, where + ": empty label");
        if (!seen.insert(l).second)
            fail(Err::AlphabetMismatch, where + ": duplicate label '" + l + "'");
    }
}

void validate_joint(JointDist& j) {
    validate_alphabet(j.rows, "rows");
    validate_alphabet(j.cols, "cols");
    if (j.mass.rows() != j.rows.size() || j.mass.cols() != j.cols.size())
        fail(Err::AlphabetMismatch,
             "mass is " + std::to_string(j.mass.rows()) + "x" + std::to_string(j.mass.cols()) +
                 " but alphabets are " + std::to_string(j.rows.size()) + "x" +
                 std::to_string(j.cols.size()));
    for (int r = 0; r < j.mass.rows(); ++r)
        for (int c = 0; c < j.mass.cols(); ++c) {
            double v = j.mass(r, c);
            if (v < -tol::kNegClip)
                fail(Err::NegativeEntry, "mass[" + std::to_string(r) + "][" + std::to_string(c) +
                                             "] = " + std::to_string(v));
            if (v < 0.0) j.mass(r, c) = 0.0;
        }
    double total = j.mass.sum();
    if (std::abs(total - 1.0) > tol::kMassSum)
        fail(Err::SumNotOne, "total mass = " + std::to_string(total));
}

bool has_zero_marginal(const JointDist& j) {
    Vec r = row_marginal(j), c = col_marginal(j);
    return r.minCoeff() <= tol::kZeroMass || c.minCoeff() <= tol::kZeroMass;
}

Vec row_marginal(const JointDist& j) { return j.mass.rowwise().sum(); }
Vec col_marginal(const JointDist& j) { return j.mass.colwise().sum().transpose(); }

void validate_kernel(Kernel& k) {
    validate_alphabet(k.from, "kernel.from");
    validate_alphabet(k.to, "kernel.to");
    if (k.rows.rows() != k.from.size() || k.rows.cols() != k.to.size())
        fail(Err::AlphabetMismatch, "kernel table shape does not match alphabets");
    for (int r = 0; r < k.rows.rows(); ++r) {
        for (int c = 0; c < k.rows.cols(); ++c) {
            double v = k.rows(r, c);
            if (v < -tol::kNegClip)
                fail(Err::NegativeEntry,
                     "kernel[" + std::to_string(r) + "][" + std::to_string(c) + "] = " + std::to_string(v));
            if (v < 0.0) k.rows(r, c) = 0.0;
        }
        double s = k.rows.row(r).sum();
        if (std::abs(s - 1.0) > tol::kRowSum)
            fail(Err::SumNotOne, "kernel row " + std::to_string(r) + " sums to " + std::to_string(s));
    }
}

Kernel conditional(const JointDist& j, Given given, std::vector<std::string>* zero_events) {
    // orient so conditioning runs over matrix rows
    Mat m = given == Given::Rows ? j.mass : Mat(j.mass.transpose());
    const Alphabet& from = given == Given::Rows ? j.rows : j.cols;
    const Alphabet& to = given == Given::Rows ? j.cols : j.rows;
    Mat out(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r) {
        double s = m.row(r).sum();
        if (s <= tol::kZeroMass) {
            if (zero_events)
                zero_events->push_back(from.labels[static_cast<std::size_t>(r)]);
            else
                fail(Err::ZeroEvent, "conditioning symbol '" +
                                         from.labels[static_cast<std::size_t>(r)] +
                                         "' has zero probability");
            out.row(r).setConstant(1.0 / m.cols()); // placeholder, never a real event
        } else {
            out.row(r) = m.row(r) / s;
        }
    }
    return Kernel(from, to, std::move(out));
}

JointDist joint_from(const Vec& px, const Alphabet& x, const Kernel& k) {
    if (px.size() != x.size() || !(k.from == x))
        fail(Err::AlphabetMismatch, "input distribution does not match kernel.from");
    Mat m = px.asDiagonal() * k.rows;
    return JointDist(x, k.to, std::move(m));
}

JointDist kron(const JointDist& a, const JointDist& b) {
    long long cells = static_cast<long long>(a.rows.size()) * b.rows.size() * a.cols.size() *
                      b.cols.size();
    if (cells > tol::kKronCellCap)
        fail(Err::SizeOverflow, "product joint would have " + std::to_string(cells) + " cells");
    Alphabet r = product_alphabet(a.rows, b.rows);
    Alphabet c = product_alphabet(a.cols, b.cols);
    Mat m(r.size(), c.size());
    for (int i = 0; i < a.rows.size(); ++i)
        for (int k2 = 0; k2 < b.rows.size(); ++k2)
            for (int jj = 0; jj < a.cols.size(); ++jj)
                for (int l = 0; l < b.cols.size(); ++l)
                    m(i * b.rows.size() + k2, jj * b.cols.size() + l) =
                        a.mass(i, jj) * b.mass(k2, l);
    return JointDist(std::move(r), std::move(c), std::move(m));
}

JointDist kron_power(const JointDist& j, int n) {
    if (n <= 0) fail(Err::UsageError, "kron power needs n >= 1");
    JointDist out = j;
    for (int i = 1; i < n; ++i) out = kron(out, j);
    return out;
}

double entropy(const Vec& p) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
    return h;
}

double joint_entropy(const JointDist& j) {
    double h = 0.0;
    for (int r = 0; r < j.mass.rows(); ++r)
        for (int c = 0; c < j.mass.cols(); ++c)
            if (j.mass(r, c) > 0.0) h -= j.mass(r, c) * std::log2(j.mass(r, c));
    return h;
}

double conditional_entropy(const JointDist& j, Given given) {
    Vec g = given == Given::Rows ? row_marginal(j) : col_marginal(j);
    return joint_entropy(j) - entropy(g);
}

double mutual_information(const JointDist& j) {
    return entropy(row_marginal(j)) + entropy(col_marginal(j)) - joint_entropy(j);
}

double binary_entropy(double p) {
    Vec v(2);
    v << p, 1.0 - p;
    return entropy(v);
}

} // namespace corrspec::prob
