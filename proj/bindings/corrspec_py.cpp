// ===========================================================================
// _corrspec: thin python bindings over the core library. Joints enter as
// dense mass matrices (indexed alphabets are attached internally); verdicts
// come back as plain dicts mirroring the JSON schemas.
// ===========================================================================
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "corrspec/asymptotic.hpp"
#include "corrspec/binary.hpp"
#include "corrspec/dpi.hpp"
#include "corrspec/error.hpp"
#include "corrspec/oracle.hpp"
#include "corrspec/regions.hpp"
#include "corrspec/spectral.hpp"

namespace py = pybind11;
using namespace corrspec;

namespace {

prob::JointDist joint_of(const prob::Mat& mass) {
    prob::JointDist d(prob::indexed_alphabet(static_cast<int>(mass.rows()), "u"),
                      prob::indexed_alphabet(static_cast<int>(mass.cols()), "v"), mass);
    prob::validate_joint(d);
    return d;
}

py::list constraints_list(const dpi::MembershipReport& r) {
    py::list out;
    for (const auto& c : r.constraints)
        out.append(py::dict(py::arg("name") = c.name, py::arg("measured") = c.measured,
                            py::arg("bound") = c.bound, py::arg("margin") = c.margin,
                            py::arg("pass") = c.pass));
    return out;
}

py::dict membership_dict(const dpi::MembershipReport& r) {
    return py::dict(py::arg("pass") = r.pass, py::arg("lambda2_bound") = r.lambda2_bound,
                    py::arg("constraints") = constraints_list(r),
                    py::arg("skipped_events") = r.skipped_events, py::arg("worst") = r.worst,
                    py::arg("worst_margin") = r.worst_margin);
}

} // namespace

PYBIND11_MODULE(_corrspec, m) {
    m.doc() = "spectral correlation measures of discrete joint distributions";

    static py::exception<Error> exc(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(exc, e.what());
        }
    });

    m.def(
        "lambda2", [](const prob::Mat& mass) { return spectral::lambda2(joint_of(mass)); },
        py::arg("mass"), "second singular value of the tilde transform");

    m.def(
        "correlation_spectrum",
        [](const prob::Mat& mass) {
            const auto s = spectral::correlation_spectrum(joint_of(mass));
            prob::Vec sigma(s.lambdas.size() + 1);
            sigma(0) = s.lambda1;
            sigma.tail(s.lambdas.size()) = s.lambdas;
            return sigma;
        },
        py::arg("mass"), "all singular values of the tilde transform, sigma_1 first");

    m.def(
        "check_dpi",
        [](const prob::Mat& pxy, const prob::Mat& kzy) {
            dpi::ChainSpec chain;
            chain.pxy = joint_of(pxy);
            chain.kzy = prob::Kernel(chain.pxy.cols,
                                     prob::indexed_alphabet(static_cast<int>(kzy.cols()), "z"),
                                     kzy);
            prob::validate_kernel(chain.kzy);
            const auto r = dpi::check_dpi(chain);
            return py::dict(py::arg("holds") = r.holds, py::arg("min_slack") = r.min_slack,
                            py::arg("lambda_xy") = r.lam_xy, py::arg("lambda_yz") = r.lam_yz,
                            py::arg("lambda_xz") = r.lam_xz, py::arg("slack") = r.slack);
        },
        py::arg("pxy"), py::arg("kzy"),
        "per-index data-processing report for the chain X - Y - Z");

    m.def(
        "necc_check",
        [](const prob::Mat& mass, double lambda2_uv) {
            return membership_dict(dpi::necc_check(joint_of(mass), lambda2_uv));
        },
        py::arg("mass"), py::arg("lambda2_uv"),
        "single-letter necessary condition on the (X1, X2) spectrum tail");

    m.def("nletter_spectrum",
          [](const prob::Vec& base, int n, int topk) {
              return asymptotic::nletter_spectrum(base, n, topk).values;
          },
          py::arg("base"), py::arg("n"), py::arg("topk") = 16,
          "top singular values of the n-fold product source");

    m.def(
        "witsenhausen",
        [](const prob::Vec& px, const prob::Vec& pu, int n, const std::vector<int>& s1) {
            const auto c = asymptotic::construct_witsenhausen(px, pu, n, s1);
            const auto v = asymptotic::verify_app_bound(c);
            return py::dict(py::arg("gap") = c.gap,
                            py::arg("certified_lower") = c.certified_lower,
                            py::arg("lambda2") = c.lambda2, py::arg("sigma1") = c.sigma1,
                            py::arg("exact_hit") = c.exact_hit, py::arg("pass") = v.pass);
        },
        py::arg("px"), py::arg("pu"), py::arg("n"), py::arg("s1"),
        "block construction over (X1, U^n) with its certificate");

    m.def(
        "binary_bounds",
        [](double a, double b, double lambda2) {
            const auto s = binary::bounds(a, b, lambda2);
            return py::dict(
                py::arg("outer1") = py::make_tuple(s.outer1.lo, s.outer1.hi),
                py::arg("outer2") = py::make_tuple(s.outer2.lo, s.outer2.hi),
                py::arg("inner") = py::make_tuple(s.inner.lo, s.inner.hi));
        },
        py::arg("a"), py::arg("b"), py::arg("lambda2"),
        "outer/inner intervals for the signed binary correlation");

    m.def(
        "rd_region_sample",
        [](const prob::Mat& sources, const prob::Mat& d1, const prob::Mat& d2, double d1max,
           double d2max, const std::string& set, int budget, std::uint64_t seed, int x1_size,
           int x2_size, int q_size, int workers) {
            regions::SetPredicate pred;
            if (set == "sin")
                pred = regions::SetPredicate::Sin;
            else if (set == "sout2")
                pred = regions::SetPredicate::Sout2;
            else if (set == "sout4")
                pred = regions::SetPredicate::Sout4;
            else if (set == "sout2cap4")
                pred = regions::SetPredicate::Sout2Cap4;
            else
                fail(Err::UsageError, "set: expected sin|sout2|sout4|sout2cap4");
            regions::DistortionSpec ds{d1, d2};
            regions::SamplerConfig cfg;
            cfg.seed = seed;
            cfg.budget = budget;
            cfg.x1_size = x1_size;
            cfg.x2_size = x2_size;
            cfg.q_size = q_size;
            cfg.workers = workers;
            const auto r = regions::rd_region_sample(joint_of(sources), ds, d1max, d2max,
                                                     pred, cfg);
            py::list region;
            for (const auto& p : r.region)
                region.append(py::make_tuple(p.r1, p.r2, p.rsum));
            return py::dict(
                py::arg("region") = region, py::arg("lambda2_uv") = r.lambda2_uv,
                py::arg("counts") = py::dict(
                    py::arg("sin") = r.count_sin, py::arg("sout1") = r.count_sout1,
                    py::arg("sout2") = r.count_sout2, py::arg("sout4") = r.count_sout4,
                    py::arg("sout2cap4") = r.count_cap),
                py::arg("hierarchy_ok") = r.hierarchy_ok);
        },
        py::arg("sources"), py::arg("d1"), py::arg("d2"), py::arg("d1max"), py::arg("d2max"),
        py::arg("set") = "sout4", py::arg("budget") = 100, py::arg("seed") = 0,
        py::arg("x1_size") = 2, py::arg("x2_size") = 2, py::arg("q_size") = 1,
        py::arg("workers") = 1, "seeded sweep of test channels against a region predicate");

    m.def(
        "oracle_frontier",
        [](const prob::Mat& sources, int n, int x1_size, int x2_size, const std::string& mode,
           std::uint64_t budget, std::uint64_t seed, int workers, bool check_nec,
           bool check_outer2) {
            oracle::OracleConfig cfg;
            cfg.n = n;
            cfg.x1_size = x1_size;
            cfg.x2_size = x2_size;
            if (mode == "exhaustive")
                cfg.mode = oracle::Mode::Exhaustive;
            else if (mode == "random")
                cfg.mode = oracle::Mode::Random;
            else
                fail(Err::UsageError, "mode: expected exhaustive|random");
            cfg.budget = budget;
            cfg.seed = seed;
            cfg.workers = workers;
            cfg.check_nec = check_nec;
            cfg.check_outer2 = check_outer2;
            const auto r = oracle::frontier(joint_of(sources), cfg);
            return py::dict(
                py::arg("best_lambda") = r.best_lambda, py::arg("best_id") = r.best_id,
                py::arg("samples_evaluated") = r.samples_evaluated,
                py::arg("lambda2_uv") = r.lambda2_uv, py::arg("clean") = r.clean,
                py::arg("necc_violations") = r.necc_violations,
                py::arg("nec_violations") = r.nec_violations,
                py::arg("outer2_violations") = r.outer2_violations,
                py::arg("outer2_skipped") = r.outer2_skipped);
        },
        py::arg("sources"), py::arg("n") = 1, py::arg("x1_size") = 2, py::arg("x2_size") = 2,
        py::arg("mode") = "exhaustive", py::arg("budget") = 100000, py::arg("seed") = 7,
        py::arg("workers") = 1, py::arg("check_nec") = true, py::arg("check_outer2") = true,
        "brute-force encoder sweep validating every spectral bound");
}
