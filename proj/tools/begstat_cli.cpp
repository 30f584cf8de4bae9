#include "begstat/begstat.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace begstat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPrecision = 3;
constexpr int kExitAcceptance = 4;

json measure_json(const MeasureValue& v) {
    return {{"coeff", rational_string(v.coeff)}, {"tail", decimal(v.tail)}, {"value", decimal(v.value())}};
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_text(path, text);
    }
}

// "a,b;c,d" -> row-major entries
std::vector<i64> parse_matrix(const std::string& s, int r) {
    std::vector<i64> out;
    std::string row;
    std::istringstream rows(s);
    while (std::getline(rows, row, ';')) {
        std::istringstream cells(row);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                out.push_back(std::stoll(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw InvalidArgument("");
            } catch (const std::exception&) {
                throw InvalidArgument("malformed matrix entry '" + cell + "'");
            }
        }
    }
    if (static_cast<int>(out.size()) != r * r) throw InvalidArgument("psi must have rank^2 entries");
    return out;
}

struct MeasureArgs {
    i64 ell = 3;
    int n = 1, t = 0;
    std::string group, format = "json", output, triple, psi;
    double tol = 0;
};

int cmd_measure(const MeasureArgs& a) {
    MeasureParams p{a.ell, a.n, a.t, a.tol > 0 ? static_cast<long double>(a.tol) : default_tol()};
    p.validate();
    json out;
    out["schema"] = kSchema;
    out["kind"] = "measure";
    out["ell"] = p.ell;
    out["n"] = p.n;
    out["t"] = p.t;
    out["tol"] = decimal(p.tol, 6);

    if (!a.triple.empty()) {
        BegTriple tr = triple_from_json(read_json_file(a.triple));
        if (tr.ell() != p.ell || tr.n != p.n) throw InvalidArgument("triple file does not match --ell/--n");
        out["triple"] = triple_to_json(tr);
        out["mu_point"] = measure_json(mu_point(tr, p));
        out["qtmu_point"] = measure_json(qtmu_point(tr, p));
        out["conditional"] = rational_string(qtmu_point(tr, p).coeff / qtmu_group(tr.G, p).coeff);
        emit(a.format == "csv" ? "mu_point,qtmu_point\n" + decimal(mu_point(tr, p).value()) + "," + decimal(qtmu_point(tr, p).value()) + "\n"
                               : out.dump(2),
             a.output);
        return kExitOk;
    }

    AbelianLGroup G(p.ell, parse_exponents(a.group));
    out["exponents"] = G.exponents;
    out["mu_group"] = measure_json(mu_group(G, p));
    out["qtmu_group"] = measure_json(qtmu_group(G, p));
    if (!a.psi.empty()) {
        Rational c = psi_conditional(G, parse_matrix(a.psi, G.rank()), p);
        out["psi_conditional"] = {{"exact", rational_string(c)}, {"value", decimal(to_long_double(c))}};
    }
    std::ostringstream csv;
    csv << "omega,psi,aut,orbit,corank,mu_point,qtmu_point,conditional\n";
    try {
        json classes = json::array();
        for (const auto& r : class_measure_rows(G, p)) {
            json x;
            x["triple"] = triple_to_json(r.cls.rep);
            x["aut"] = r.cls.aut.str();
            x["orbit"] = r.cls.orbit.str();
            x["corank"] = r.cls.corank;
            x["mu_point"] = measure_json(r.mu);
            x["qtmu_point"] = measure_json(r.qtmu);
            x["conditional"] = {{"exact", rational_string(r.conditional)}, {"value", decimal(to_long_double(r.conditional))}};
            classes.push_back(x);
            const auto& tj = x["triple"];
            std::string om = tj["omega"].dump(), ps = tj["psi"].dump();
            csv << '"' << om << "\",\"" << ps << "\"," << r.cls.aut << ',' << r.cls.orbit << ',' << r.cls.corank << ','
                << decimal(r.mu.value()) << ',' << decimal(r.qtmu.value()) << ',' << decimal(to_long_double(r.conditional)) << '\n';
        }
        out["classes"] = classes;
    } catch (const OracleTooLarge& e) {
        out["classes"] = nullptr;
        out["notice"] = e.what();
        std::cerr << "notice: " << e.what() << "\n";
    }
    emit(a.format == "csv" ? csv.str() : out.dump(2), a.output);
    return kExitOk;
}

struct SampleArgs {
    SampleConfig cfg;
    std::string model = "linear", output, histogram_out, format = "json";
    unsigned threads = 0;
    std::string bound = "27";
    int exact_order_exp = 4;
    bool no_verify = false, report_only = false;
    AcceptanceThresholds th;
};

int cmd_sample(const SampleArgs& a) {
    Model model = a.model == "nonlinear" ? Model::Nonlinear : Model::Linear;
    a.cfg.validate(model);
    BigInt bound;
    try {
        bound = BigInt(a.bound);
    } catch (const std::exception&) {
        throw InvalidArgument("bound must be an integer");
    }
    MeasureParams p{a.cfg.ell, a.cfg.n, a.cfg.t, default_tol()};
    ExperimentOptions opts;
    opts.exact_order_exp = a.exact_order_exp;
    opts.threads = a.threads;
    opts.verify = !a.no_verify;
    TripleHistogram h = run_experiment(a.cfg, model, opts);
    ComparisonReport rep = compare(h, p, bound);
    auto failures = acceptance_failures(h, rep, a.th);

    json out = report_to_json(rep);
    out["model"] = h.model;
    out["config"] = {{"ell", a.cfg.ell}, {"n", a.cfg.n}, {"g", a.cfg.g}, {"K", a.cfg.K}, {"q", a.cfg.q},
                     {"t", a.cfg.t}, {"seed", a.cfg.seed}, {"N", a.cfg.samples}, {"max_resamples", a.cfg.max_resamples}};
    out["sampling_seconds"] = decimal(h.runtime_seconds, 6);
    out["violations"] = histogram_to_json(h)["violations"];
    out["acceptance"] = {{"pass", failures.empty()}, {"failures", failures}};
    if (a.histogram_out.empty())
        out["histogram"] = histogram_to_json(h);
    else
        write_text(a.histogram_out, histogram_to_json(h).dump(1));
    emit(a.format == "csv" ? report_to_csv(rep) : out.dump(1), a.output);

    std::cerr << "samples=" << h.total << " unresolved=" << h.unresolved << " tv=" << rep.tv << " chi2=" << rep.chi2 << "/" << rep.dof
              << " p=" << rep.p_value << " out-of-support=" << rep.out_of_support_observed << " (theory "
              << rep.out_of_support_expected << ")\n";
    if (h.total > 0 && static_cast<double>(h.unresolved) > a.th.max_unresolved * static_cast<double>(h.total)) {
        std::cerr << "error: precision exhausted for " << h.unresolved << " samples; raise --K or --max-resamples\n";
        return kExitPrecision;
    }
    for (const auto& f : failures) std::cerr << "acceptance: " << f << "\n";
    if (!failures.empty() && !a.report_only) return kExitAcceptance;
    return kExitOk;
}

struct OracleArgs {
    std::string suite = "all", group;
    i64 ell = 3;
    std::vector<int> ns;
    int rmax = 4, tmax = 3, max_order_exp = 6;
};

int cmd_oracle(const OracleArgs& a) {
    if (!is_odd_prime(a.ell)) throw InvalidArgument("ell must be an odd prime");
    std::vector<AbelianLGroup> groups;
    if (a.group.empty() && a.suite != "malle")
        groups = structure_suite(a.ell);
    else if (!a.group.empty())
        groups.emplace_back(a.ell, parse_exponents(a.group));
    std::vector<int> ns = a.ns.empty() ? std::vector<int>{1, 2, 3} : a.ns;
    for (int n : ns) require_n(n);

    std::vector<OracleCheck> checks;
    auto guarded = [&](const std::string& what, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const OracleTooLarge& e) {
            std::cout << "SKIP " << what << ": " << e.what() << "\n";
        }
    };
    const bool all = a.suite == "all";
    for (const auto& G : groups)
        for (int n : ns) {
            if (all || a.suite == "begs") guarded("begs " + case_label(G, n), [&] { checks.push_back(check_beg_count(G, n)); });
            if (all || a.suite == "counts")
                guarded("counts " + case_label(G, n), [&] {
                    for (auto& c : check_structure_counts(G, n)) checks.push_back(c);
                });
            if (all || a.suite == "garton")
                for (int t = 0; t <= std::min(a.tmax, 2); ++t)
                    guarded("garton " + case_label(G, n, t), [&] {
                        for (auto& c : check_aggregate(G, n, t)) checks.push_back(c);
                    });
        }
    if (all || a.suite == "malle") {
        auto mg = a.group.empty() ? groups_by_rank(a.ell, a.rmax, a.max_order_exp) : groups;
        for (const auto& G : mg)
            for (int t = 0; t <= a.tmax; ++t) checks.push_back(check_malle(G, t));
    }
    int failed = 0;
    for (const auto& c : checks) {
        if (!c.pass) ++failed;
        if (!c.pass || a.suite != "malle") std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << " " << c.label << ": " << c.detail << "\n";
    }
    std::cout << (failed ? "FAIL" : "PASS") << " " << a.suite << ": " << checks.size() - static_cast<std::size_t>(failed) << "/"
              << checks.size() << " checks\n";
    return failed ? kExitAcceptance : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Statistics of bilinearly enhanced groups"};
    app.require_subcommand(1);

    MeasureArgs ma;
    auto* measure = app.add_subcommand("measure", "Evaluate point and group measures");
    measure->add_option("--ell", ma.ell, "Odd prime")->capture_default_str();
    measure->add_option("--n", ma.n, "Level n >= 1")->capture_default_str();
    measure->add_option("--t", ma.t, "Quotient steps t >= 0")->capture_default_str();
    measure->add_option("--group", ma.group, "Exponent list, e.g. 1,1 (empty for trivial)");
    measure->add_option("--psi", ma.psi, "psi matrix rows separated by ';', e.g. \"0,1;1,0\"");
    measure->add_option("--triple", ma.triple, "JSON triple record to evaluate");
    measure->add_option("--tol", ma.tol, "Truncation tolerance for infinite products");
    measure->add_option("--format", ma.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    measure->add_option("--output,-o", ma.output, "Output path (default stdout)");

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Run a matrix-model experiment and compare with theory");
    sample->add_option("--model", sa.model)->check(CLI::IsMember({"linear", "nonlinear"}))->capture_default_str();
    sample->add_option("--ell", sa.cfg.ell)->capture_default_str();
    sample->add_option("--n", sa.cfg.n)->capture_default_str();
    sample->add_option("--g", sa.cfg.g, "Half matrix size")->capture_default_str();
    sample->add_option("--K", sa.cfg.K, "Working precision")->capture_default_str();
    sample->add_option("--q", sa.cfg.q, "Similitude factor (nonlinear model)");
    sample->add_option("--t", sa.cfg.t)->capture_default_str();
    sample->add_option("--seed", sa.cfg.seed)->capture_default_str();
    sample->add_option("--N", sa.cfg.samples, "Number of samples")->capture_default_str();
    sample->add_option("--max-resamples", sa.cfg.max_resamples)->capture_default_str();
    sample->add_option("--threads", sa.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sample->add_option("--bound", sa.bound, "Support bound on |G|")->capture_default_str();
    sample->add_option("--exact-order-exp", sa.exact_order_exp, "Canonicalize classes with |G| <= ell^k")->capture_default_str();
    sample->add_option("--sigma", sa.th.sigma)->capture_default_str();
    sample->add_option("--alpha", sa.th.alpha)->capture_default_str();
    sample->add_option("--min-expected", sa.th.min_expected)->capture_default_str();
    sample->add_flag("--no-verify", sa.no_verify, "Skip per-sample invariant checks");
    sample->add_flag("--report-only", sa.report_only, "Exit 0 even if acceptance thresholds fail");
    sample->add_option("--format", sa.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sample->add_option("--output,-o", sa.output, "Report path (default stdout)");
    sample->add_option("--histogram", sa.histogram_out, "Write the histogram to a separate file");

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "Run brute-force identity suites");
    oracle->add_option("--suite", oa.suite)->check(CLI::IsMember({"begs", "malle", "garton", "counts", "all"}))->capture_default_str();
    oracle->add_option("--ell", oa.ell)->capture_default_str();
    oracle->add_option("--group", oa.group, "Exponent list (default: built-in suite)");
    oracle->add_option("--n", oa.ns, "Levels (default 1 2 3)");
    oracle->add_option("--rmax", oa.rmax)->capture_default_str();
    oracle->add_option("--tmax", oa.tmax)->capture_default_str();
    oracle->add_option("--max-order-exp", oa.max_order_exp)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    try {
        if (*measure) return cmd_measure(ma);
        if (*sample) return cmd_sample(sa);
        if (*oracle) return cmd_oracle(oa);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const OracleTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
