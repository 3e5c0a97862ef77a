#include "corrspec/dpi.hpp"

#include <cmath>
#include <limits>

namespace corrspec::dpi {

namespace {

void check_chain_shape(const ChainSpec& chain) {
    if (!(chain.kzy.from == chain.pxy.cols))
        fail(Err::AlphabetMismatch, "kernel conditions on '" +
                                        (chain.kzy.from.labels.empty() ? std::string("?")
                                                                       : chain.kzy.from.labels[0]) +
                                        "...' which is not the Y alphabet of the joint");
}

} // namespace

ComposeResult compose(const ChainSpec& chain) {
    check_chain_shape(chain);
    Vec py = prob::col_marginal(chain.pxy);

    ComposeResult out;
    out.pxz = JointDist(chain.pxy.rows, chain.kzy.to, chain.pxy.mass * chain.kzy.rows);
    out.pyz = JointDist(chain.pxy.cols, chain.kzy.to, py.asDiagonal() * chain.kzy.rows);

    // product identity of the tilde transforms; needs every marginal positive
    Vec px = prob::row_marginal(chain.pxy);
    Vec pz = prob::col_marginal(out.pxz);
    if (px.minCoeff() > tol::kZeroMass && py.minCoeff() > tol::kZeroMass &&
        pz.minCoeff() > tol::kZeroMass) {
        Mat lhs = spectral::tilde(out.pxz).mat;
        Mat rhs = spectral::tilde(chain.pxy).mat * spectral::tilde(out.pyz).mat;
        out.factorization_residual = (lhs - rhs).cwiseAbs().maxCoeff();
        if (out.factorization_residual > tol::kFactorization)
            fail(Err::Internal, "tilde factorization residual " +
                                    std::to_string(out.factorization_residual));
    } else {
        out.factorization_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

DPIReport check_dpi(const ChainSpec& chain) {
    ComposeResult comp = compose(chain);
    DPIReport rep;
    rep.factorization_residual = comp.factorization_residual;
    auto tail_of = [](const Mat& m) {
        Vec s = spectral::support_spectrum(m);
        return Vec(s.tail(s.size() - 1));
    };
    rep.lam_xy = tail_of(chain.pxy.mass);
    rep.lam_yz = tail_of(comp.pyz.mass);
    rep.lam_xz = tail_of(comp.pxz.mass);

    double lam2_yz = rep.lam_yz.size() > 0 ? rep.lam_yz(0) : 0.0;
    // Slack is checked for i = 2..min(|X|,|Y|,|Z|) only.  Beyond that the
    // factorization P~_XZ = P~_XY * P~_YZ forces lambda_i(XZ) = 0 exactly, so
    // the comparison would measure Gram-route rounding on zeros, not the DPI.
    const auto n = std::min(rep.lam_xy.size(), rep.lam_xz.size());
    rep.slack = Vec(n);
    for (int i = 0; i < n; ++i) {
        rep.slack(i) = rep.lam_xy(i) * lam2_yz - rep.lam_xz(i);
    }
    rep.min_slack = rep.slack.size() > 0 ? rep.slack.minCoeff() : 0.0;
    rep.holds = rep.min_slack >= -tol::kInequality;
    return rep;
}

namespace {

void push_spectrum_constraints(MembershipReport& rep, const Vec& sigma,
                               const std::string& prefix, double bound, double slack) {
    for (int i = 1; i < sigma.size(); ++i) {
        Constraint c;
        c.name = prefix + "lambda_" + std::to_string(i + 1);
        c.measured = sigma(i);
        c.bound = bound;
        c.margin = bound - sigma(i);
        c.pass = sigma(i) <= bound + slack;
        rep.pass = rep.pass && c.pass;
        rep.constraints.push_back(std::move(c));
    }
}

void finalize(MembershipReport& rep) {
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& c : rep.constraints)
        if (c.margin < rep.worst_margin) {
            rep.worst_margin = c.margin;
            rep.worst = c.name;
        }
    if (rep.constraints.empty()) rep.worst_margin = 0.0;
}

} // namespace

MembershipReport necc_check(const JointDist& px1x2, double lambda2_uv, double slack) {
    MembershipReport rep;
    rep.lambda2_bound = lambda2_uv;
    push_spectrum_constraints(rep, spectral::support_spectrum(px1x2.mass), "", lambda2_uv, slack);
    finalize(rep);
    return rep;
}

MembershipReport conditional_necc_check(const FactoredDist& f, double lambda2_uv,
                                        const std::vector<std::string>& subset_u,
                                        const std::vector<std::string>& subset_v,
                                        const std::string& x1, const std::string& x2,
                                        double slack) {
    MembershipReport rep;
    rep.lambda2_bound = lambda2_uv;

    std::vector<std::string> cond = subset_u;
    cond.insert(cond.end(), subset_v.begin(), subset_v.end());
    std::vector<int> sizes;
    sizes.reserve(cond.size());
    long long total = 1;
    for (const auto& n : cond) {
        int sz = f.axes[static_cast<std::size_t>(f.axis_index(n))].alphabet.size();
        sizes.push_back(sz);
        total *= sz;
    }

    std::vector<int> asg(cond.size(), 0);
    for (long long it = 0; it < total; ++it) {
        // decode row-major over the conditioning axes in their given order
        long long rem = it;
        for (int k = static_cast<int>(cond.size()) - 1; k >= 0; --k) {
            asg[static_cast<std::size_t>(k)] =
                static_cast<int>(rem % sizes[static_cast<std::size_t>(k)]);
            rem /= sizes[static_cast<std::size_t>(k)];
        }
        std::map<std::string, int> assignment;
        std::string tag;
        for (std::size_t k = 0; k < cond.size(); ++k) {
            assignment[cond[k]] = asg[k];
            tag += (k ? "," : "") + cond[k] + "=" +
                   f.axes[static_cast<std::size_t>(f.axis_index(cond[k]))]
                       .alphabet.labels[static_cast<std::size_t>(asg[k])];
        }
        if (!assignment.empty() && event_mass(f, assignment) <= tol::kZeroMass) {
            rep.skipped_events.push_back(tag);
            continue;
        }
        FactoredDist sliced = assignment.empty() ? f : condition(f, assignment);
        JointDist pair = pair_joint(sliced, {x1}, {x2});
        std::string prefix = tag.empty() ? "" : "cond[" + tag + "].";
        push_spectrum_constraints(rep, spectral::support_spectrum(pair.mass), prefix,
                                  lambda2_uv, slack);
    }
    finalize(rep);
    return rep;
}

MembershipReport intersection_membership(const FactoredDist& f, double lambda2_uv,
                                         const std::vector<std::string>& u_axes,
                                         const std::vector<std::string>& v_axes,
                                         const std::string& x1, const std::string& x2,
                                         double slack) {
    if (u_axes.size() >= 31 || v_axes.size() >= 31)
        fail(Err::SubsetExplosion, "too many letter axes");
    long long pairs = (1LL << u_axes.size()) * (1LL << v_axes.size());
    if (pairs > tol::kSubsetPairCap)
        fail(Err::SubsetExplosion, std::to_string(pairs) + " subset pairs exceed the cap of " +
                                       std::to_string(tol::kSubsetPairCap));

    MembershipReport rep;
    rep.lambda2_bound = lambda2_uv;
    for (unsigned mu = 0; mu < (1u << u_axes.size()); ++mu) {
        for (unsigned mv = 0; mv < (1u << v_axes.size()); ++mv) {
            std::vector<std::string> su, sv;
            std::string label = "S[";
            for (std::size_t k = 0; k < u_axes.size(); ++k)
                if (mu & (1u << k)) {
                    su.push_back(u_axes[k]);
                    label += (label.size() > 2 ? "," : "") + u_axes[k];
                }
            label += "|";
            bool first = true;
            for (std::size_t k = 0; k < v_axes.size(); ++k)
                if (mv & (1u << k)) {
                    sv.push_back(v_axes[k]);
                    label += (first ? "" : ",") + v_axes[k];
                    first = false;
                }
            label += "].";
            MembershipReport one = conditional_necc_check(f, lambda2_uv, su, sv, x1, x2, slack);
            rep.pass = rep.pass && one.pass;
            for (auto& c : one.constraints) {
                c.name = label + c.name;
                rep.constraints.push_back(std::move(c));
            }
            for (auto& s : one.skipped_events) rep.skipped_events.push_back(label + s);
        }
    }
    finalize(rep);
    return rep;
}

} // namespace corrspec::dpi
