#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrspec/dpi.hpp"
#include "corrspec/factored.hpp"
#include "corrspec/prob.hpp"

namespace corrspec::regions {

using dpi::MembershipReport;
using prob::Alphabet;
using prob::FactoredDist;
using prob::JointDist;
using prob::Kernel;
using prob::Mat;
using prob::Vec;

// ---------------------------------------------------------------------------
// test channels: p(q) * p(u,v) * p(x1,x2 | u,v,q) over axes q, u, v, x1, x2
// ---------------------------------------------------------------------------

struct Candidate {
    Vec pq;        // time-sharing weights
    Alphabet x1;
    Alphabet x2;
    Mat table;     // rows: (q,u,v) cells row-major; cols: (x1,x2) row-major
};

struct TestChannel {
    FactoredDist dist; // axes q, u, v, x1, x2 in canonical order
    Vec pq;
};

// validates the candidate, assembles the factored joint, and confirms the
// p(q)*p(u,v) factorization within tol::kMembership
TestChannel make_test_channel(const JointDist& sources, const Candidate& c);

// ---------------------------------------------------------------------------
// membership predicates for the probability-set hierarchy; every positive
// q-slice must pass. Zero-mass conditioning events are skipped and listed.
// ---------------------------------------------------------------------------

struct FactorReport {
    bool member = false;
    double residual = 0.0; // worst conditional factorization gap
    std::vector<std::string> skipped;
};

// long chain X1 - U - V - X2: p(x1,x2|u,v,q) = p(x1|u,q) p(x2|v,q)
FactorReport membership_sin(const TestChannel& tc);

// the two short chains X1 - U - V and U - V - X2
FactorReport membership_sout1(const TestChannel& tc);

struct TrifactorVerdict {
    bool member = false;
    int w_used = 0;         // |W| of the accepted factorization, 0 when absent
    int w_max = 0;
    double residual = 0.0;  // best factorization gap seen (or the prefilter gap)
    bool prefiltered = false;
};

struct TrifactorConfig {
    int w_max = 0;          // 0: default |X1|*|X2| + 2
    int restarts = 32;
    int iterations = 300;
    std::uint64_t seed = 1;
    bool prefilter = true;  // reject via the two-chain test before searching
};

// bounded search for p(x1,x2|u,v) = sum_w p(w) p(x1|u,w) p(x2|v,w); the verdict
// is one-sided: notFound up to w_max is not a disproof. A failed two-chain
// test (membership_sout1) soundly prefilters, since any near-exact
// trifactorization forces both chains within 2*max(|X1|,|X2|) times the gap.
TrifactorVerdict membership_sout2(const TestChannel& tc, const TrifactorConfig& cfg = {});

// four spectral conditionings (none), ({u}), ({v}), ({u},{v}) per q-slice
MembershipReport membership_sout4(const TestChannel& tc, double lambda2_uv);

// ---------------------------------------------------------------------------
// rates and distortion
// ---------------------------------------------------------------------------

struct RatePoint {
    double r1 = 0.0;   // I(U,V; X1 | X2, Q)
    double r2 = 0.0;   // I(U,V; X2 | X1, Q)
    double rsum = 0.0; // I(U,V; X1,X2 | Q)
};

// Internal if the chain-rule identity r1 + r2 + I(X1;X2|Q) - rsum = I(X1;X2|U,V,Q)
// drifts beyond 1e-10
RatePoint rd_rates(const TestChannel& tc);

struct DistortionSpec {
    Mat d1; // |U| x |Uhat|, entries >= 0
    Mat d2; // |V| x |Vhat|
};

struct DistortionResult {
    double ed1 = 0.0;
    double ed2 = 0.0;
    // per-cell argmin reconstructions, (x1, x2, q) row-major; ties break toward
    // the smaller reconstruction index
    std::vector<int> uhat;
    std::vector<int> vhat;
};

DistortionResult best_distortion(const TestChannel& tc, const DistortionSpec& ds);

// ---------------------------------------------------------------------------
// sampled region evaluation
// ---------------------------------------------------------------------------

enum class SetPredicate { Sin, Sout2, Sout4, Sout2Cap4 };

struct SamplerConfig {
    std::uint64_t seed = 1;
    int budget = 100;
    int x1_size = 2;
    int x2_size = 2;
    int q_size = 1;
    int workers = 1;
    TrifactorConfig trifactor{2, 6, 150, 0}; // bounded search while sampling
};

struct SampleRecord {
    int id = 0;
    bool sin = false;
    bool sout1 = false;
    bool sout2 = false;
    int sout2_w = 0; // |W| of the accepted certificate, 0 when none found
    bool sout4 = false;
    RatePoint rates;
    double ed1 = 0.0;
    double ed2 = 0.0;
    bool meets_distortion = false;
    bool selected = false;
};

struct RegionSampleResult {
    std::vector<SampleRecord> records;
    std::vector<RatePoint> region; // rates of selected samples, id order
    double lambda2_uv = 0.0;
    int count_sin = 0, count_sout1 = 0, count_sout2 = 0, count_sout4 = 0, count_cap = 0;
    // hierarchy violations on the shared sample stream; all must stay zero:
    // Sin => Sout2(|W|=1 certificate) => Sout1, Sin => Sout4, and the selected
    // Sout2-cap-Sout4 region must sit inside the selected Sout4 region
    int sin_not_sout2 = 0, sout2cert_not_sout1 = 0, sin_not_sout4 = 0, cap_not_sout4 = 0;
    bool hierarchy_ok = false;
};

// alphabet caps: |X1|,|X2| <= 4, |Q| <= 4, budget <= tol::kOracleBudgetCap
RegionSampleResult rd_region_sample(const JointDist& sources, const DistortionSpec& ds,
                                    double d1_max, double d2_max, SetPredicate set,
                                    const SamplerConfig& cfg);

// ---------------------------------------------------------------------------
// multiple-access necessary conditions
// ---------------------------------------------------------------------------

struct EntropyTriple {
    double h_u_given_v = 0.0;
    double h_v_given_u = 0.0;
    double h_uv = 0.0;
};

EntropyTriple source_entropies(const JointDist& sources);

struct MacRates {
    double i1 = 0.0;   // I(X1; Y | X2, V, Q)
    double i2 = 0.0;   // I(X2; Y | X1, U, Q)
    double isum = 0.0; // I(X1, X2; Y | Q)
};

// channel rows are indexed by (x1, x2) cells, x1-major
MacRates mac_rates(const TestChannel& tc, const Kernel& channel);

// spectral clauses (per q-slice, all four conditionings) plus the three rate
// inequalities H(U|V) <= i1, H(V|U) <= i2, H(U,V) <= isum
MembershipReport mare_check(const JointDist& sources, const Kernel& channel,
                            const Candidate& cand, double lambda2_uv);

} // namespace corrspec::regions
