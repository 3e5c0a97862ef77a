#include "corrspec/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace corrspec::spectral {

namespace {

constexpr double kTieTol = 1e-12;    // sigma values closer than this count as tied
constexpr double kSignTol = 1e-12;   // smallest coordinate magnitude that fixes a sign
constexpr double kSigmaZero = 1e-13; // below this a singular value is treated as 0
constexpr int kGramBlock = 4096;     // column block size for the streamed Gram product

// P * P^T accumulated in fixed block order so wide matrices stay accurate and the
// result does not depend on threading or column count quirks
Mat gram_of(const Mat& w) {
    if (w.cols() <= kGramBlock) return w * w.transpose();
    Mat g = Mat::Zero(w.rows(), w.rows());
    for (Eigen::Index c0 = 0; c0 < w.cols(); c0 += kGramBlock) {
        Eigen::Index n = std::min<Eigen::Index>(kGramBlock, w.cols() - c0);
        auto blk = w.middleCols(c0, n);
        g += blk * blk.transpose();
    }
    return g;
}

void canonical_sign(Vec& u, Vec* slaved) {
    for (int k = 0; k < u.size(); ++k) {
        if (std::abs(u(k)) > kSignTol) {
            if (u(k) < 0.0) {
                u = -u;
                if (slaved) *slaved = -*slaved;
            }
            return;
        }
    }
}

// deterministic orthonormal completion: first canonical basis vector with a
// significant residual against the columns collected so far
Vec complete_column(const Mat& existing, int used, int dim) {
    for (int e = 0; e < dim; ++e) {
        Vec v = Vec::Zero(dim);
        v(e) = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k < used; ++k) v -= existing.col(k).dot(v) * existing.col(k);
        double n = v.norm();
        if (n > 1e-6) return v / n;
    }
    fail(Err::Internal, "orthonormal completion found no candidate");
}

SpectralDecomposition svd_tall_free(const Mat& w) {
    // w has rows <= cols here
    const int r = static_cast<int>(w.rows());
    const int c = static_cast<int>(w.cols());
    Eigen::SelfAdjointEigenSolver<Mat> es(gram_of(w));
    if (es.info() != Eigen::Success) fail(Err::Internal, "eigensolver failed");

    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);

    Mat u(r, r);
    Vec sig(r);
    for (int i = 0; i < r; ++i) {
        // eigenvalues ascend; flip to descending
        int src = r - 1 - i;
        sig(i) = std::sqrt(std::max(0.0, es.eigenvalues()(src)));
        u.col(i) = es.eigenvectors().col(src);
        Vec col = u.col(i);
        canonical_sign(col, nullptr);
        u.col(i) = col;
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(sig(a) - sig(b)) > kTieTol) return sig(a) > sig(b);
        for (int k = 0; k < r; ++k) {
            double d = u(k, a) - u(k, b);
            if (std::abs(d) > kTieTol) return d > 0.0;
        }
        return a < b;
    });

    SpectralDecomposition out;
    out.sigma = Vec(r);
    out.M = Mat(r, r);
    out.N = Mat(c, r);
    int filled = 0;
    for (int i = 0; i < r; ++i) {
        out.sigma(i) = sig(order[static_cast<std::size_t>(i)]);
        out.M.col(i) = u.col(order[static_cast<std::size_t>(i)]);
        if (out.sigma(i) > kSigmaZero) {
            Vec v = w.transpose() * out.M.col(i) / out.sigma(i);
            double n = v.norm();
            if (n <= 0.0) fail(Err::Internal, "degenerate right vector");
            out.N.col(i) = v / n;
            ++filled;
        }
    }
    for (int i = filled; i < r; ++i) {
        Vec v = complete_column(out.N, i, c);
        canonical_sign(v, nullptr);
        out.N.col(i) = v;
    }
    return out;
}

} // namespace

SpectralDecomposition svd(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) fail(Err::AlphabetMismatch, "empty matrix");
    if (a.rows() <= a.cols()) return svd_tall_free(a);
    SpectralDecomposition t = svd_tall_free(a.transpose());
    SpectralDecomposition out;
    out.sigma = std::move(t.sigma);
    out.M = std::move(t.N);
    out.N = std::move(t.M);
    for (int i = 0; i < out.sigma.size(); ++i) {
        Vec m = out.M.col(i), n = out.N.col(i);
        canonical_sign(m, &n);
        out.M.col(i) = m;
        out.N.col(i) = n;
    }
    return out;
}

Vec singular_values(const Mat& a) {
    const Mat& small_side = a; // gram_of handles orientation below
    Mat g = a.rows() <= a.cols() ? gram_of(small_side) : gram_of(Mat(a.transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(Err::Internal, "eigensolver failed");
    Vec out(g.rows());
    for (int i = 0; i < g.rows(); ++i)
        out(i) = std::sqrt(std::max(0.0, es.eigenvalues()(g.rows() - 1 - i)));
    return out;
}

TildeMatrix tilde(const JointDist& j) {
    Vec px = prob::row_marginal(j), py = prob::col_marginal(j);
    for (int i = 0; i < px.size(); ++i)
        if (px(i) <= tol::kZeroMass)
            fail(Err::ZeroMarginal, "row symbol '" + j.rows.labels[static_cast<std::size_t>(i)] +
                                        "' has zero marginal; restrict the support first");
    for (int i = 0; i < py.size(); ++i)
        if (py(i) <= tol::kZeroMass)
            fail(Err::ZeroMarginal, "col symbol '" + j.cols.labels[static_cast<std::size_t>(i)] +
                                        "' has zero marginal; restrict the support first");
    TildeMatrix t;
    t.mat = px.cwiseSqrt().cwiseInverse().asDiagonal() * j.mass *
            py.cwiseSqrt().cwiseInverse().asDiagonal();
    t.px = std::move(px);
    t.py = std::move(py);
    return t;
}

TildeMatrix tilde_from_candidate(Mat m) {
    TildeMatrix t;
    t.mat = std::move(m);
    return t;
}

namespace {

// recover the positive top pair of a candidate: project the all-ones vector onto the
// sigma ~= 1 left subspace (the limit of nonnegative power iteration), slave the right
// vector through the matrix. Returns false when the pair is not strictly positive.
bool recover_top_pair(const Mat& m, const SpectralDecomposition& d, Vec& u, Vec& v) {
    constexpr double kTopBand = 1e-9;  // sigma within this of sigma_1 joins the subspace
    constexpr double kPosEntry = 1e-8; // strict positivity threshold for sqrt-marginals
    u = Vec::Zero(m.rows());
    Vec ones = Vec::Ones(m.rows());
    for (int i = 0; i < d.sigma.size(); ++i) {
        if (d.sigma(i) < 1.0 - kTopBand) break;
        u += d.M.col(i).dot(ones) * d.M.col(i);
    }
    double nu = u.norm();
    if (nu <= kPosEntry) return false;
    u /= nu;
    v = m.transpose() * u;
    double nv = v.norm();
    if (nv <= kPosEntry) return false;
    v /= nv;
    return u.minCoeff() > kPosEntry && v.minCoeff() > kPosEntry;
}

} // namespace

Mat untilde(const TildeMatrix& t) {
    Vec sx, sy;
    if (t.px && t.py) {
        sx = t.px->cwiseSqrt();
        sy = t.py->cwiseSqrt();
    } else {
        SpectralDecomposition d = svd(t.mat);
        Vec u, v;
        if (!recover_top_pair(t.mat, d, u, v))
            fail(Err::InvalidTilde, "no strictly positive top singular pair to recover marginals");
        sx = u;
        sy = v;
    }
    return sx.asDiagonal() * t.mat * sy.asDiagonal();
}

IffReport verify_theorem_iff(const TildeMatrix& t) {
    IffReport rep;
    const Mat& m = t.mat;
    bool nonneg = true;
    for (int r = 0; r < m.rows() && nonneg; ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (m(r, c) < -tol::kNegClip) { nonneg = false; break; }
    if (!nonneg) rep.failures.push_back("nonnegative-entries");

    SpectralDecomposition d = svd(m);
    rep.sigma = d.sigma;
    if (d.sigma.maxCoeff() > 1.0 + tol::kSpectral) rep.failures.push_back("sigma-above-one");
    if (std::abs(d.sigma(0) - 1.0) > tol::kSpectral) rep.failures.push_back("sigma1-not-one");

    Vec u, v;
    bool pair_ok = false;
    if (t.px && t.py) {
        // marginals known: the theorem's candidate pair is (sqrt(px), sqrt(py))
        u = t.px->cwiseSqrt();
        v = t.py->cwiseSqrt();
        pair_ok = u.minCoeff() > 0.0 && v.minCoeff() > 0.0 &&
                  (m * v - u).cwiseAbs().maxCoeff() <= tol::kSpectral &&
                  (m.transpose() * u - v).cwiseAbs().maxCoeff() <= tol::kSpectral;
    } else {
        pair_ok = recover_top_pair(m, d, u, v);
    }
    if (!pair_ok) {
        rep.failures.push_back("no-positive-top-pair");
    } else {
        rep.recovered_px = u.cwiseAbs2();
        rep.recovered_py = v.cwiseAbs2();
        // back-transform must be a genuine joint
        prob::JointDist back(prob::indexed_alphabet(static_cast<int>(m.rows())),
                             prob::indexed_alphabet(static_cast<int>(m.cols())),
                             u.asDiagonal() * m * v.asDiagonal());
        try {
            prob::validate_joint(back);
        } catch (const Error&) {
            rep.failures.push_back("untilde-not-a-joint");
        }
    }
    rep.valid = rep.failures.empty();
    return rep;
}

CorrelationSpectrum correlation_spectrum(const JointDist& j) {
    TildeMatrix t = tilde(j);
    Vec sig = singular_values(t.mat);
    if (sig(0) < 1.0 + tol::kSigmaFloor || sig(0) > 1.0 + tol::kSpectral)
        fail(Err::Internal, "top singular value " + std::to_string(sig(0)) +
                                " violates the valid-joint contract");
    CorrelationSpectrum out;
    out.lambda1 = sig(0);
    out.lambdas = Vec(sig.size() - 1);
    for (int i = 1; i < sig.size(); ++i)
        out.lambdas(i - 1) = std::clamp(sig(i), 0.0, 1.0);
    return out;
}

double lambda2(const JointDist& j) {
    CorrelationSpectrum s = correlation_spectrum(j);
    return s.lambdas.size() > 0 ? s.lambdas(0) : 0.0;
}

Vec support_spectrum(const Mat& block) {
    double total = block.sum();
    if (total <= tol::kZeroMass) fail(Err::ZeroEvent, "block carries no mass");
    Vec r = block.rowwise().sum() / total;
    Vec c = block.colwise().sum().transpose() / total;
    std::vector<int> ri, ci;
    for (int i = 0; i < r.size(); ++i)
        if (r(i) > tol::kZeroMass) ri.push_back(i);
    for (int i = 0; i < c.size(); ++i)
        if (c(i) > tol::kZeroMass) ci.push_back(i);
    if (ri.empty() || ci.empty()) fail(Err::Internal, "support restriction emptied the block");

    Mat m(ri.size(), ci.size());
    for (std::size_t a = 0; a < ri.size(); ++a)
        for (std::size_t b = 0; b < ci.size(); ++b)
            m(static_cast<int>(a), static_cast<int>(b)) = block(ri[a], ci[b]);
    m /= m.sum();

    const int l = static_cast<int>(std::min(ri.size(), ci.size()));
    Vec out;
    if (l == 1) {
        out = Vec::Ones(1);
        return out;
    }
    Vec rm = m.rowwise().sum(), cm = m.colwise().sum().transpose();
    if (m.rows() == 2 && m.cols() == 2) {
        double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        double denom = std::sqrt(rm(0) * rm(1) * cm(0) * cm(1));
        out = Vec(2);
        out(0) = 1.0;
        out(1) = std::clamp(std::abs(det) / denom, 0.0, 1.0);
        return out;
    }
    Mat t = rm.cwiseSqrt().cwiseInverse().asDiagonal() * m *
            cm.cwiseSqrt().cwiseInverse().asDiagonal();
    Vec sig = singular_values(t);
    out = Vec(l);
    for (int i = 0; i < l; ++i) out(i) = std::clamp(sig(i), 0.0, 1.0);
    return out;
}

double signed_lambda_2x2(const Mat& block) {
    double total = block.sum();
    if (total <= tol::kZeroMass) fail(Err::ZeroEvent, "block carries no mass");
    Mat m = block / total;
    Vec r = m.rowwise().sum(), c = m.colwise().sum().transpose();
    if (m.rows() != 2 || m.cols() != 2 || r.minCoeff() <= tol::kZeroMass ||
        c.minCoeff() <= tol::kZeroMass)
        fail(Err::NotBinary, "signed correlation needs a full-support 2x2 block");
    double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double v = det / std::sqrt(r(0) * r(1) * c(0) * c(1));
    return std::clamp(v, -1.0, 1.0);
}

std::optional<Decomposition> decomposes(const JointDist& j) {
    const int r = j.rows.size(), c = j.cols.size();
    // union of rows and cols as one node set; edges are support cells
    std::vector<int> comp(static_cast<std::size_t>(r + c), -1);
    int ncomp = 0;
    for (int start = 0; start < r + c; ++start) {
        if (comp[static_cast<std::size_t>(start)] >= 0) continue;
        // skip isolated zero-marginal symbols; they may sit on either side of a split
        std::vector<int> stack{start};
        comp[static_cast<std::size_t>(start)] = ncomp;
        bool any_edge = false;
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            if (node < r) {
                for (int b = 0; b < c; ++b)
                    if (j.mass(node, b) > tol::kZeroMass) {
                        any_edge = true;
                        if (comp[static_cast<std::size_t>(r + b)] < 0) {
                            comp[static_cast<std::size_t>(r + b)] = ncomp;
                            stack.push_back(r + b);
                        }
                    }
            } else {
                int b = node - r;
                for (int a = 0; a < r; ++a)
                    if (j.mass(a, b) > tol::kZeroMass) {
                        any_edge = true;
                        if (comp[static_cast<std::size_t>(a)] < 0) {
                            comp[static_cast<std::size_t>(a)] = ncomp;
                            stack.push_back(a);
                        }
                    }
            }
        }
        if (any_edge) ++ncomp; else comp[static_cast<std::size_t>(start)] = -1;
    }
    if (ncomp < 2) return std::nullopt;
    Decomposition d;
    for (int a = 0; a < r; ++a)
        if (comp[static_cast<std::size_t>(a)] == 0)
            d.s1_rows.push_back(j.rows.labels[static_cast<std::size_t>(a)]);
    for (int b = 0; b < c; ++b)
        if (comp[static_cast<std::size_t>(r + b)] == 0)
            d.s2_cols.push_back(j.cols.labels[static_cast<std::size_t>(b)]);
    if (d.s1_rows.empty() || d.s2_cols.empty()) fail(Err::Internal, "degenerate component");
    return d;
}

} // namespace corrspec::spectral
