// ===========================================================================
// corrspec: single command-line entry point.
//
// Exit codes: 0 pass/success, 1 fail verdict (bound violated or membership
// rejected), 2 usage error, 3 input error. Diagnostics go to stderr; data goes
// to --out (default stdout). JSON documents carry "schema": "corrspec/1" with
// sorted keys; CSV uses ',' separators, '.' decimals, LF line endings.
// ===========================================================================
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "corrspec/asymptotic.hpp"
#include "corrspec/binary.hpp"
#include "corrspec/dpi.hpp"
#include "corrspec/error.hpp"
#include "corrspec/json_io.hpp"
#include "corrspec/oracle.hpp"
#include "corrspec/regions.hpp"
#include "corrspec/spectral.hpp"
#include "corrspec/tol.hpp"

namespace {

using corrspec::Err;
using corrspec::Error;
using corrspec::fail;
using corrspec::jsonio::json;
namespace jio = corrspec::jsonio;
namespace prob = corrspec::prob;
namespace spectral = corrspec::spectral;
namespace dpi = corrspec::dpi;
namespace asymptotic = corrspec::asymptotic;
namespace binary = corrspec::binary;
namespace regions = corrspec::regions;
namespace oracle = corrspec::oracle;

// ---------------------------------------------------------------------------
// run configuration shared across subcommands
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string out = "-";     // data target; "-" is stdout
    std::uint64_t seed = 0;
    int workers = 1;
    double tol = corrspec::tol::kInequality;
    std::string format;        // validated against the subcommand's native format
};

void check_format(const RunConfig& rc, const std::string& native) {
    if (!rc.format.empty() && rc.format != native)
        fail(Err::UsageError, "this subcommand emits " + native + " only");
}

void write_text(const std::string& out, const std::string& text) {
    if (out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) fail(Err::ParseError, "cannot write file: " + out);
    f << text;
}

void write_json(const std::string& out, const json& j) { write_text(out, j.dump(2) + "\n"); }

// fixed shortest-ish decimal rendering: deterministic and plot-ready
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

prob::Vec parse_csv_vec(const std::string& text, const std::string& flag) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(Err::UsageError, flag + ": expected comma-separated numbers, got \"" +
                                      item + "\"");
        }
    }
    if (vals.empty()) fail(Err::UsageError, flag + ": empty list");
    return Eigen::Map<const prob::Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<int> parse_csv_ints(const std::string& text, const std::string& flag) {
    std::vector<int> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            vals.push_back(std::stoi(item));
        } catch (const std::exception&) {
            fail(Err::UsageError, flag + ": expected comma-separated integers");
        }
    }
    if (vals.empty()) fail(Err::UsageError, flag + ": empty list");
    return vals;
}

// "4..16" inclusive, or a single "4"
std::pair<int, int> parse_range(const std::string& text, const std::string& flag) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const int n = std::stoi(text);
            return {n, n};
        }
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (lo > hi) fail(Err::UsageError, flag + ": empty range " + text);
        return {lo, hi};
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(Err::UsageError, flag + ": expected N or LO..HI, got \"" + text + "\"");
    }
}

// letter axes of a factored tensor, split by leading letter of the axis name
void split_letter_axes(const prob::FactoredDist& f, std::vector<std::string>& u_axes,
                       std::vector<std::string>& v_axes) {
    for (const auto& a : f.axes) {
        if (a.name == "x1" || a.name == "x2") continue;
        if (!a.name.empty() && a.name[0] == 'u')
            u_axes.push_back(a.name);
        else if (!a.name.empty() && a.name[0] == 'v')
            v_axes.push_back(a.name);
        else
            fail(Err::ParseError,
                 "axis \"" + a.name + "\": letter axes must be named u*/v* (x1, x2 fixed)");
    }
}

// ---------------------------------------------------------------------------
// subcommand bodies; each returns the process exit code
// ---------------------------------------------------------------------------

int run_validate(const RunConfig& rc, const std::string& input) {
    check_format(rc, "json");
    const json doc = jio::load_file(input);
    json out;
    if (jio::is_factored_document(doc)) {
        const auto f = jio::parse_factored(doc);
        out = {{"schema", jio::kSchema}, {"kind", "validate"}, {"type", "factored"},
               {"valid", true},          {"cells", f.cells()}};
    } else {
        auto d = jio::parse_joint(doc);
        out = {{"schema", jio::kSchema},
               {"kind", "validate"},
               {"type", "joint"},
               {"valid", true},
               {"cells", static_cast<long long>(d.mass.size())},
               {"zero_marginal", prob::has_zero_marginal(d)}};
    }
    write_json(rc.out, out);
    return 0;
}

int run_spectrum(const RunConfig& rc, const std::string& input) {
    check_format(rc, "json");
    const auto d = jio::parse_joint(jio::load_file(input));
    write_json(rc.out, jio::spectrum_report(d));
    return 0;
}

int run_dpi_check(const RunConfig& rc, const std::string& input) {
    check_format(rc, "json");
    const auto chain = jio::parse_chain(jio::load_file(input));
    const auto report = dpi::check_dpi(chain);
    write_json(rc.out, jio::to_json(report));
    return report.holds ? 0 : 1;
}

int run_necc(const RunConfig& rc, const std::string& input, double lambda2,
             const std::string& subsets) {
    check_format(rc, "json");
    const json doc = jio::load_file(input);
    dpi::MembershipReport report;
    std::string set_name;
    if (jio::is_factored_document(doc)) {
        const auto f = jio::parse_factored(doc);
        if (subsets == "all") {
            std::vector<std::string> u_axes, v_axes;
            split_letter_axes(f, u_axes, v_axes);
            report = dpi::intersection_membership(f, lambda2, u_axes, v_axes, "x1", "x2",
                                                  rc.tol);
            set_name = "intersection";
        } else {
            report = dpi::necc_check(prob::pair_joint(f, {"x1"}, {"x2"}), lambda2, rc.tol);
            set_name = "single_letter";
        }
    } else {
        report = dpi::necc_check(jio::parse_joint(doc), lambda2, rc.tol);
        set_name = "single_letter";
    }
    write_json(rc.out, jio::to_json(report, set_name));
    return report.pass ? 0 : 1;
}

int run_nletter(const RunConfig& rc, const std::string& input, int n, int topk) {
    check_format(rc, "json");
    auto d = jio::parse_joint(jio::load_file(input));
    const auto spec = spectral::correlation_spectrum(d);
    prob::Vec base(spec.lambdas.size() + 1);
    base(0) = spec.lambda1;
    base.tail(spec.lambdas.size()) = spec.lambdas;
    write_json(rc.out, jio::to_json(asymptotic::nletter_spectrum(base, n, topk), n));
    return 0;
}

int run_witsenhausen(const RunConfig& rc, const std::string& px1, const std::string& pu,
                     const std::string& nrange, const std::string& s1) {
    check_format(rc, "csv");
    const prob::Vec px = parse_csv_vec(px1, "--px1");
    const prob::Vec pw = parse_csv_vec(pu, "--pu");
    const auto [nlo, nhi] = parse_range(nrange, "--n");
    const std::vector<int> block = parse_csv_ints(s1, "--s1");

    std::string csv = "n,gap,certified_lower,lambda2\n";
    bool all_pass = true;
    for (int n = nlo; n <= nhi; ++n) {
        const auto c = asymptotic::construct_witsenhausen(px, pw, n, block);
        const auto verdict = asymptotic::verify_app_bound(c);
        all_pass = all_pass && verdict.pass;
        csv += std::to_string(n) + "," + fmt(c.gap) + "," + fmt(c.certified_lower) + "," +
               fmt(c.lambda2) + "\n";
    }
    write_text(rc.out, csv);
    return all_pass ? 0 : 1;
}

int run_binary_bounds(const RunConfig& rc, double lambda2, int grid, bool full_grid) {
    check_format(rc, "csv");
    const auto rows = binary::curve_data(grid, full_grid, lambda2);
    std::string csv = "a,b,outer1_lo,outer1_hi,outer2_lo,outer2_hi,inner_lo,inner_hi\n";
    bool contained = true;
    for (const auto& r : rows) {
        const auto& s = r.set;
        csv += fmt(r.a) + "," + fmt(r.b) + "," + fmt(s.outer1.lo) + "," + fmt(s.outer1.hi) +
               "," + fmt(s.outer2.lo) + "," + fmt(s.outer2.hi) + "," + fmt(s.inner.lo) +
               "," + fmt(s.inner.hi) + "\n";
        contained = contained && s.outer1.lo <= s.outer2.lo + corrspec::tol::kInequality &&
                    s.outer2.lo <= s.inner.lo + corrspec::tol::kInequality &&
                    s.inner.hi <= s.outer2.hi + corrspec::tol::kInequality &&
                    s.outer2.hi <= s.outer1.hi + corrspec::tol::kInequality;
    }
    write_text(rc.out, csv);
    return contained ? 0 : 1;
}

int run_rd_region(const RunConfig& rc, const std::string& sources_path,
                  const std::string& distortion_path, double d1max, double d2max,
                  const std::string& set_name, int budget, int x1_size, int x2_size,
                  int q_size, const std::string& summary_path) {
    const auto sources = jio::parse_joint(jio::load_file(sources_path));
    const auto ds = jio::parse_distortion(jio::load_file(distortion_path));

    regions::SetPredicate set;
    if (set_name == "sin")
        set = regions::SetPredicate::Sin;
    else if (set_name == "sout2")
        set = regions::SetPredicate::Sout2;
    else if (set_name == "sout4")
        set = regions::SetPredicate::Sout4;
    else if (set_name == "sout2cap4")
        set = regions::SetPredicate::Sout2Cap4;
    else
        fail(Err::UsageError, "--set: expected sin|sout2|sout4|sout2cap4");

    regions::SamplerConfig cfg;
    cfg.seed = rc.seed;
    cfg.budget = budget;
    cfg.x1_size = x1_size;
    cfg.x2_size = x2_size;
    cfg.q_size = q_size;
    cfg.workers = rc.workers;
    const auto result = regions::rd_region_sample(sources, ds, d1max, d2max, set, cfg);

    std::string csv = "r1,r2,rsum\n";
    for (const auto& p : result.region)
        csv += fmt(p.r1) + "," + fmt(p.r2) + "," + fmt(p.rsum) + "\n";
    const json summary = jio::to_json(result, set_name);

    // both artifacts are data: CSV at --out, summary at --summary (stdout when
    // omitted; after the CSV if both share stdout)
    write_text(rc.out, csv);
    if (summary_path == "-" && rc.out == "-")
        std::cout << summary.dump(2) << "\n";
    else
        write_json(summary_path, summary);
    return result.hierarchy_ok ? 0 : 1;
}

int run_mac_check(const RunConfig& rc, const std::string& sources_path,
                  const std::string& channel_path, const std::string& candidate_path,
                  double lambda2) {
    check_format(rc, "json");
    const auto sources = jio::parse_joint(jio::load_file(sources_path));
    const auto channel = jio::parse_kernel(jio::load_file(channel_path));
    const auto cand = jio::parse_candidate(jio::load_file(candidate_path));
    const auto report = regions::mare_check(sources, channel, cand, lambda2);
    write_json(rc.out, jio::to_json(report, "mac_outer"));
    return report.pass ? 0 : 1;
}

int run_oracle(const RunConfig& rc, const std::string& sources_path, int n, int x1_size,
               int x2_size, const std::string& mode, std::uint64_t budget, bool no_nec,
               bool no_outer2) {
    check_format(rc, "json");
    const auto sources = jio::parse_joint(jio::load_file(sources_path));
    oracle::OracleConfig cfg;
    cfg.n = n;
    cfg.x1_size = x1_size;
    cfg.x2_size = x2_size;
    if (mode == "exhaustive")
        cfg.mode = oracle::Mode::Exhaustive;
    else if (mode == "random")
        cfg.mode = oracle::Mode::Random;
    else
        fail(Err::UsageError, "--mode: expected exhaustive|random");
    cfg.budget = budget;
    cfg.seed = rc.seed;
    cfg.workers = rc.workers;
    cfg.check_nec = !no_nec;
    cfg.check_outer2 = !no_outer2;
    const auto result = oracle::frontier(sources, cfg);
    write_json(rc.out, jio::to_json(result));
    return result.clean ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "spectral correlation measures: bounds, membership verdicts, and brute-force "
        "sweeps over discrete joint distributions.\n\n"
        "Input schemas (UTF-8 JSON, optional \"schema\": \"corrspec/1\"):\n"
        "  joint       {\"rows\": [labels], \"cols\": [labels], \"mass\": [[row], ...]}\n"
        "  factored    {\"axes\": [{\"name\": n, \"labels\": [...]}, ...],\n"
        "               \"mass\": [flat row-major over axes sorted by name]}\n"
        "  kernel      {\"from\": [labels], \"to\": [labels], \"rows\": [[row-stochastic]]}\n"
        "  chain       {\"pxy\": joint, \"kzy\": kernel}\n"
        "  candidate   {\"pq\": [weights], \"x1\": [labels], \"x2\": [labels],\n"
        "               \"table\": [(q,u,v)-major rows over (x1,x2) columns]}\n"
        "  distortion  {\"d1\": [[...]], \"d2\": [[...]]}\n\n"
        "Outputs carry \"schema\": \"corrspec/1\" and a \"kind\" key; CSV uses ','\n"
        "separators, '.' decimals, LF endings. Exit codes: 0 pass, 1 fail verdict,\n"
        "2 usage error, 3 input error."};
    app.require_subcommand(1);

    RunConfig rc;
    std::string input, sources_path, channel_path, candidate_path, distortion_path;
    std::string subsets = "all", set_name = "sout4", mode = "exhaustive";
    std::string px1, pu, nrange = "1", s1 = "0", summary_path = "-";
    double lambda2 = 0.5, mac_lambda2 = -1.0, d1max = 0.0, d2max = 0.0;
    int n = 1, topk = 16, grid = 99, x1_size = 2, x2_size = 2, q_size = 1;
    int budget = 100;
    std::uint64_t oracle_budget = 100000;
    bool full_grid = false, no_nec = false, no_outer2 = false;

    auto add_common = [&](CLI::App* sub, bool seeded) {
        sub->add_option("--out", rc.out, "output target, '-' for stdout")
            ->capture_default_str();
        sub->add_option("--format", rc.format, "output format (json|csv)")
            ->check(CLI::IsMember({"json", "csv"}));
        if (seeded) {
            sub->add_option("--seed", rc.seed, "RNG seed")->capture_default_str();
            sub->add_option("--workers", rc.workers, "worker threads")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
    };

    auto* validate = app.add_subcommand("validate", "validate a joint or factored document");
    validate->add_option("input", input, "JSON file")->required();
    add_common(validate, false);

    auto* spectrum =
        app.add_subcommand("spectrum", "correlation spectrum, validity, decomposition");
    spectrum->add_option("input", input, "joint JSON file")->required();
    add_common(spectrum, false);

    auto* dpic = app.add_subcommand(
        "dpi-check", "data-processing inequality report for a two-link chain");
    dpic->add_option("input", input, "chain JSON file")->required();
    add_common(dpic, false);

    auto* necc = app.add_subcommand(
        "necc", "single-letter necessary conditions against a lambda2 bound");
    necc->add_option("input", input, "joint or factored JSON file")->required();
    necc->add_option("--lambda2", lambda2, "letter-source second correlation")->required();
    necc->add_option("--subsets", subsets, "all: every letter-subset conditioning")
        ->check(CLI::IsMember({"all", "none"}))
        ->capture_default_str();
    necc->add_option("--tol", rc.tol, "inequality slack")->capture_default_str();
    add_common(necc, false);

    auto* nletter =
        app.add_subcommand("nletter", "singular values of the n-fold product source");
    nletter->add_option("input", input, "joint JSON file")->required();
    nletter->add_option("--n", n, "letter count")->required()->check(CLI::PositiveNumber);
    nletter->add_option("--topk", topk, "values to expand")->capture_default_str();
    add_common(nletter, false);

    auto* wits = app.add_subcommand(
        "witsenhausen", "block construction driving lambda2 to 1, with certificates");
    wits->add_option("--px1", px1, "X1 marginal, comma separated")->required();
    wits->add_option("--pu", pu, "letter distribution, comma separated")->required();
    wits->add_option("--n", nrange, "letter count or range LO..HI")->capture_default_str();
    wits->add_option("--s1", s1, "X1 block indices, comma separated")->capture_default_str();
    add_common(wits, false);

    auto* bb = app.add_subcommand(
        "binary-bounds", "outer/inner bounds on the signed binary correlation");
    bb->add_option("--lambda2", lambda2, "letter-source second correlation")->required();
    bb->add_option("--grid", grid, "amplitudes i/(grid+1), i=1..grid")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bb->add_flag("--full-grid", full_grid, "all (a,b) pairs instead of the diagonal");
    add_common(bb, false);

    auto* rd = app.add_subcommand(
        "rd-region", "sample test channels, emit rate points and a region summary");
    rd->add_option("--sources", sources_path, "joint JSON file")->required();
    rd->add_option("--distortion", distortion_path, "distortion JSON file")->required();
    rd->add_option("--d1max", d1max, "distortion budget for the first source")->required();
    rd->add_option("--d2max", d2max, "distortion budget for the second source")->required();
    rd->add_option("--set", set_name, "sin|sout2|sout4|sout2cap4")->capture_default_str();
    rd->add_option("--budget", budget, "candidates to sample")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    rd->add_option("--x1-size", x1_size, "|X1|")->capture_default_str();
    rd->add_option("--x2-size", x2_size, "|X2|")->capture_default_str();
    rd->add_option("--q-size", q_size, "time-sharing symbols")->capture_default_str();
    rd->add_option("--summary", summary_path, "summary JSON target, '-' for stdout")
        ->capture_default_str();
    add_common(rd, true);

    auto* mac = app.add_subcommand(
        "mac-check", "necessary conditions for correlated sources over a MAC");
    mac->add_option("--sources", sources_path, "joint JSON file")->required();
    mac->add_option("--channel", channel_path, "kernel JSON file")->required();
    mac->add_option("--candidate", candidate_path, "candidate JSON file")->required();
    mac->add_option("--lambda2", mac_lambda2, "bound; negative derives it from the sources")
        ->capture_default_str();
    add_common(mac, false);

    auto* orc = app.add_subcommand(
        "oracle", "brute-force encoder sweep validating every spectral bound");
    orc->add_option("--sources", sources_path, "joint JSON file")->required();
    orc->add_option("--n", n, "letters per encoder")->capture_default_str();
    orc->add_option("--x1-size", x1_size, "|X1|")->capture_default_str();
    orc->add_option("--x2-size", x2_size, "|X2|")->capture_default_str();
    orc->add_option("--mode", mode, "exhaustive|random")->capture_default_str();
    orc->add_option("--budget", oracle_budget, "evaluation cap")->capture_default_str();
    orc->add_flag("--no-nec", no_nec, "skip the subset-conditioned audit");
    orc->add_flag("--no-outer2", no_outer2, "skip the binary outer-bound audit");
    add_common(orc, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return run_validate(rc, input);
        if (*spectrum) return run_spectrum(rc, input);
        if (*dpic) return run_dpi_check(rc, input);
        if (*necc) return run_necc(rc, input, lambda2, subsets);
        if (*nletter) return run_nletter(rc, input, n, topk);
        if (*wits) return run_witsenhausen(rc, px1, pu, nrange, s1);
        if (*bb) return run_binary_bounds(rc, lambda2, grid, full_grid);
        if (*rd) return run_rd_region(rc, sources_path, distortion_path, d1max, d2max,
                                      set_name, budget, x1_size, x2_size, q_size,
                                      summary_path);
        if (*mac) return run_mac_check(rc, sources_path, channel_path, candidate_path,
                                       mac_lambda2);
        if (*orc) return run_oracle(rc, sources_path, n, x1_size, x2_size, mode,
                                    oracle_budget, no_nec, no_outer2);
        fail(Err::UsageError, "no subcommand selected");
    } catch (const Error& e) {
        std::cerr << "corrspec: " << e.what() << "\n";
        return e.code() == Err::UsageError ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "corrspec: " << e.what() << "\n";
        return 3;
    }
}
