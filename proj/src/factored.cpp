#include "corrspec/factored.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace corrspec::prob {

int FactoredDist::axis_index(const std::string& name) const {
    for (std::size_t i = 0; i < axes.size(); ++i)
        if (axes[i].name == name) return static_cast<int>(i);
    fail(Err::UnknownAxis, "no axis named '" + name + "'");
}

long long FactoredDist::cells() const {
    long long c = 1;
    for (const auto& a : axes) c *= a.alphabet.size();
    return c;
}

std::vector<long long> FactoredDist::strides() const {
    std::vector<long long> s(axes.size(), 1);
    for (int i = rank() - 2; i >= 0; --i)
        s[static_cast<std::size_t>(i)] =
            s[static_cast<std::size_t>(i) + 1] * axes[static_cast<std::size_t>(i) + 1].alphabet.size();
    return s;
}

void FactoredDist::decode(long long flat, std::vector<int>& out) const {
    out.resize(axes.size());
    for (int i = rank() - 1; i >= 0; --i) {
        int n = axes[static_cast<std::size_t>(i)].alphabet.size();
        out[static_cast<std::size_t>(i)] = static_cast<int>(flat % n);
        flat /= n;
    }
}

FactoredDist make_factored(std::vector<Axis> axes, std::vector<double> mass) {
    if (axes.empty()) fail(Err::AlphabetMismatch, "factored dist needs at least one axis");
    std::set<std::string> names;
    for (auto& a : axes) {
        validate_alphabet(a.alphabet, "axis '" + a.name + "'");
        if (a.name.empty()) fail(Err::UnknownAxis, "axis with empty name");
        if (!names.insert(a.name).second) fail(Err::UnknownAxis, "duplicate axis '" + a.name + "'");
    }
    long long cells = 1;
    for (const auto& a : axes) {
        cells *= a.alphabet.size();
        if (cells > tol::kKronCellCap)
            fail(Err::SizeOverflow, "factored dist exceeds the cell cap");
    }
    if (static_cast<long long>(mass.size()) != cells)
        fail(Err::AlphabetMismatch, "mass has " + std::to_string(mass.size()) + " cells, expected " +
                                        std::to_string(cells));

    // canonical order: sort axes by name and permute the tensor to match
    std::vector<std::size_t> order(axes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return axes[a].name < axes[b].name; });
    bool already = std::is_sorted(order.begin(), order.end());

    FactoredDist out;
    for (std::size_t i : order) out.axes.push_back(axes[i]);
    if (already) {
        out.mass = std::move(mass);
    } else {
        // permute: walk the destination tensor, pull from the source index
        std::vector<long long> src_strides(axes.size(), 1);
        for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i)
            src_strides[static_cast<std::size_t>(i)] =
                src_strides[static_cast<std::size_t>(i) + 1] *
                axes[static_cast<std::size_t>(i) + 1].alphabet.size();
        out.mass.assign(static_cast<std::size_t>(cells), 0.0);
        std::vector<int> idx;
        for (long long flat = 0; flat < cells; ++flat) {
            out.decode(flat, idx);
            long long src = 0;
            for (std::size_t k = 0; k < order.size(); ++k)
                src += idx[k] * src_strides[order[k]];
            out.mass[static_cast<std::size_t>(flat)] = mass[static_cast<std::size_t>(src)];
        }
    }

    double total = 0.0;
    for (auto& v : out.mass) {
        if (v < -tol::kNegClip) fail(Err::NegativeEntry, "negative tensor entry " + std::to_string(v));
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (std::abs(total - 1.0) > tol::kMassSum)
        fail(Err::SumNotOne, "tensor mass = " + std::to_string(total));
    return out;
}

namespace {

// positions of `keep` names inside f.axes, validating existence
std::vector<int> axis_positions(const FactoredDist& f, const std::vector<std::string>& names) {
    std::vector<int> pos;
    pos.reserve(names.size());
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) fail(Err::UnknownAxis, "axis '" + n + "' listed twice");
        pos.push_back(f.axis_index(n));
    }
    return pos;
}

} // namespace

FactoredDist marginalize(const FactoredDist& f, const std::vector<std::string>& keep) {
    std::vector<int> pos = axis_positions(f, keep);
    std::vector<Axis> axes;
    for (int p : pos) axes.push_back(f.axes[static_cast<std::size_t>(p)]);

    // accumulate into the kept-axes tensor (in the *given* order; make_factored sorts)
    std::vector<long long> kept_strides(pos.size(), 1);
    for (int i = static_cast<int>(pos.size()) - 2; i >= 0; --i)
        kept_strides[static_cast<std::size_t>(i)] =
            kept_strides[static_cast<std::size_t>(i) + 1] *
            axes[static_cast<std::size_t>(i) + 1].alphabet.size();
    long long out_cells = 1;
    for (const auto& a : axes) out_cells *= a.alphabet.size();
    std::vector<double> acc(static_cast<std::size_t>(out_cells), 0.0);

    std::vector<int> idx;
    long long cells = f.cells();
    for (long long flat = 0; flat < cells; ++flat) {
        double v = f.mass[static_cast<std::size_t>(flat)];
        if (v == 0.0) continue;
        f.decode(flat, idx);
        long long o = 0;
        for (std::size_t k = 0; k < pos.size(); ++k)
            o += idx[static_cast<std::size_t>(pos[k])] * kept_strides[k];
        acc[static_cast<std::size_t>(o)] += v;
    }
    return make_factored(std::move(axes), std::move(acc));
}

double event_mass(const FactoredDist& f, const std::map<std::string, int>& assignment) {
    std::vector<int> fixed(f.axes.size(), -1);
    for (const auto& [name, sym] : assignment) {
        int p = f.axis_index(name);
        if (sym < 0 || sym >= f.axes[static_cast<std::size_t>(p)].alphabet.size())
            fail(Err::UnknownAxis, "symbol index out of range for axis '" + name + "'");
        fixed[static_cast<std::size_t>(p)] = sym;
    }
    double total = 0.0;
    std::vector<int> idx;
    long long cells = f.cells();
    for (long long flat = 0; flat < cells; ++flat) {
        double v = f.mass[static_cast<std::size_t>(flat)];
        if (v == 0.0) continue;
        f.decode(flat, idx);
        bool match = true;
        for (std::size_t k = 0; k < fixed.size(); ++k)
            if (fixed[k] >= 0 && idx[k] != fixed[k]) { match = false; break; }
        if (match) total += v;
    }
    return total;
}

FactoredDist condition(const FactoredDist& f, const std::map<std::string, int>& assignment) {
    if (assignment.empty()) return f;
    if (assignment.size() >= f.axes.size())
        fail(Err::UsageError, "conditioning on every axis leaves nothing");
    double ev = event_mass(f, assignment);
    if (ev <= tol::kZeroMass) fail(Err::ZeroEvent, "conditioning event has zero probability");

    std::vector<int> fixed(f.axes.size(), -1);
    for (const auto& [name, sym] : assignment)
        fixed[static_cast<std::size_t>(f.axis_index(name))] = sym;

    std::vector<Axis> axes;
    std::vector<int> kept_pos;
    for (int i = 0; i < f.rank(); ++i)
        if (fixed[static_cast<std::size_t>(i)] < 0) {
            axes.push_back(f.axes[static_cast<std::size_t>(i)]);
            kept_pos.push_back(i);
        }
    std::vector<long long> kept_strides(kept_pos.size(), 1);
    for (int i = static_cast<int>(kept_pos.size()) - 2; i >= 0; --i)
        kept_strides[static_cast<std::size_t>(i)] =
            kept_strides[static_cast<std::size_t>(i) + 1] *
            axes[static_cast<std::size_t>(i) + 1].alphabet.size();
    long long out_cells = 1;
    for (const auto& a : axes) out_cells *= a.alphabet.size();
    std::vector<double> acc(static_cast<std::size_t>(out_cells), 0.0);

    std::vector<int> idx;
    long long cells = f.cells();
    for (long long flat = 0; flat < cells; ++flat) {
        double v = f.mass[static_cast<std::size_t>(flat)];
        if (v == 0.0) continue;
        f.decode(flat, idx);
        bool match = true;
        for (std::size_t k = 0; k < fixed.size(); ++k)
            if (fixed[k] >= 0 && idx[k] != fixed[k]) { match = false; break; }
        if (!match) continue;
        long long o = 0;
        for (std::size_t k = 0; k < kept_pos.size(); ++k)
            o += idx[static_cast<std::size_t>(kept_pos[k])] * kept_strides[k];
        acc[static_cast<std::size_t>(o)] += v / ev;
    }
    return make_factored(std::move(axes), std::move(acc));
}

JointDist pair_joint(const FactoredDist& f, const std::vector<std::string>& rows,
                     const std::vector<std::string>& cols) {
    for (const auto& r : rows)
        for (const auto& c : cols)
            if (r == c) fail(Err::UnknownAxis, "axis '" + r + "' on both sides");
    std::vector<std::string> keep = rows;
    keep.insert(keep.end(), cols.begin(), cols.end());
    FactoredDist m = marginalize(f, keep);

    Alphabet ra, ca;
    {
        bool first = true;
        for (const auto& n : rows) {
            const Alphabet& a = m.axes[static_cast<std::size_t>(m.axis_index(n))].alphabet;
            ra = first ? a : product_alphabet(ra, a);
            first = false;
        }
        first = true;
        for (const auto& n : cols) {
            const Alphabet& a = m.axes[static_cast<std::size_t>(m.axis_index(n))].alphabet;
            ca = first ? a : product_alphabet(ca, a);
            first = false;
        }
    }

    // row index = row-major over `rows` in the given order; same for cols
    std::vector<int> rpos = axis_positions(m, rows), cpos = axis_positions(m, cols);
    std::vector<long long> rstr(rpos.size(), 1), cstr(cpos.size(), 1);
    for (int i = static_cast<int>(rpos.size()) - 2; i >= 0; --i)
        rstr[static_cast<std::size_t>(i)] =
            rstr[static_cast<std::size_t>(i) + 1] *
            m.axes[static_cast<std::size_t>(rpos[static_cast<std::size_t>(i) + 1])].alphabet.size();
    for (int i = static_cast<int>(cpos.size()) - 2; i >= 0; --i)
        cstr[static_cast<std::size_t>(i)] =
            cstr[static_cast<std::size_t>(i) + 1] *
            m.axes[static_cast<std::size_t>(cpos[static_cast<std::size_t>(i) + 1])].alphabet.size();

    Mat out = Mat::Zero(ra.size(), ca.size());
    std::vector<int> idx;
    long long cells = m.cells();
    for (long long flat = 0; flat < cells; ++flat) {
        double v = m.mass[static_cast<std::size_t>(flat)];
        if (v == 0.0) continue;
        m.decode(flat, idx);
        long long r = 0, c = 0;
        for (std::size_t k = 0; k < rpos.size(); ++k)
            r += idx[static_cast<std::size_t>(rpos[k])] * rstr[k];
        for (std::size_t k = 0; k < cpos.size(); ++k)
            c += idx[static_cast<std::size_t>(cpos[k])] * cstr[k];
        out(static_cast<int>(r), static_cast<int>(c)) += v;
    }
    return JointDist(std::move(ra), std::move(ca), std::move(out));
}

Vec axis_marginal(const FactoredDist& f, const std::string& name) {
    FactoredDist m = marginalize(f, {name});
    Vec v(m.axes[0].alphabet.size());
    for (int i = 0; i < v.size(); ++i) v(i) = m.mass[static_cast<std::size_t>(i)];
    return v;
}

double group_entropy(const FactoredDist& f, const std::vector<std::string>& group) {
    FactoredDist m = marginalize(f, group);
    double h = 0.0;
    for (double v : m.mass)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

double cond_mutual_information(const FactoredDist& f, const std::vector<std::string>& a,
                               const std::vector<std::string>& b,
                               const std::vector<std::string>& c) {
    auto join = [](std::vector<std::string> x, const std::vector<std::string>& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    double hac = group_entropy(f, join(a, c));
    double hbc = group_entropy(f, join(b, c));
    double habc = group_entropy(f, join(join(a, b), c));
    double hc = c.empty() ? 0.0 : group_entropy(f, c);
    return hac + hbc - habc - hc;
}

FactoredDist attach_conditional(const FactoredDist& base, const Axis& fresh,
                                const std::vector<std::string>& given, const Mat& table) {
    std::vector<int> gpos = axis_positions(base, given);
    long long grows = 1;
    for (int p : gpos) grows *= base.axes[static_cast<std::size_t>(p)].alphabet.size();
    if (table.rows() != grows || table.cols() != fresh.alphabet.size())
        fail(Err::AlphabetMismatch, "conditional table shape mismatch");
    std::vector<long long> gstr(gpos.size(), 1);
    for (int i = static_cast<int>(gpos.size()) - 2; i >= 0; --i)
        gstr[static_cast<std::size_t>(i)] =
            gstr[static_cast<std::size_t>(i) + 1] *
            base.axes[static_cast<std::size_t>(gpos[static_cast<std::size_t>(i) + 1])].alphabet.size();

    std::vector<Axis> axes = base.axes;
    axes.push_back(fresh);
    long long cells = base.cells() * fresh.alphabet.size();
    std::vector<double> mass(static_cast<std::size_t>(cells), 0.0);
    std::vector<int> idx;
    int k = fresh.alphabet.size();
    for (long long flat = 0; flat < base.cells(); ++flat) {
        double v = base.mass[static_cast<std::size_t>(flat)];
        base.decode(flat, idx);
        long long g = 0;
        for (std::size_t q = 0; q < gpos.size(); ++q)
            g += idx[static_cast<std::size_t>(gpos[q])] * gstr[q];
        for (int s = 0; s < k; ++s)
            mass[static_cast<std::size_t>(flat * k + s)] = v * table(static_cast<int>(g), s);
    }
    return make_factored(std::move(axes), std::move(mass));
}

FactoredDist from_pair(const JointDist& j, const std::string& row_axis,
                       const std::string& col_axis) {
    std::vector<Axis> axes{{row_axis, j.rows}, {col_axis, j.cols}};
    std::vector<double> mass;
    mass.reserve(static_cast<std::size_t>(j.mass.size()));
    for (int r = 0; r < j.mass.rows(); ++r)
        for (int c = 0; c < j.mass.cols(); ++c) mass.push_back(j.mass(r, c));
    return make_factored(std::move(axes), std::move(mass));
}

} // namespace corrspec::prob
