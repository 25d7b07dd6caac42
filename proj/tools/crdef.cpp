#include "bott/bott.hpp"
#include "crx/crx.hpp"
#include "crx/tensor.hpp"
#include "kuranishi/kuranishi.hpp"
#include "obstruction/obstruction.hpp"
#include "suites/suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kUnstable = 3 };

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int n = 5;
    int kmin = -6;
    int kmax = 6;
    std::optional<int> cutoff;
    int order = 4;
    std::string format = "table";
    std::string input;
    std::uint64_t seed = 1;
    // cohomology
    std::optional<int> max_dim;
    bool products = false;
    // verify
    bool fault = false;
    int kuranishi_seeds = 3;
    // kuranishi
    bool n4_route = false;
    std::vector<int> weights{0, 1};

    void validate() const
    {
        if (n < 2 || n > crx::kMaxCoords + 1) throw Usage("--n must lie in [2, " + std::to_string(crx::kMaxCoords + 1) + "]");
        if (kmin > kmax) throw Usage("--kmin must not exceed --kmax");
        if (cutoff && *cutoff < 0) throw Usage("--cutoff must be >= 0");
        if (order < 1) throw Usage("--order must be >= 1");
        if (max_dim && (*max_dim < -1 || *max_dim > 4)) throw Usage("--max-dim must lie in [-1, 4]");
        if (kuranishi_seeds < 0) throw Usage("--kuranishi-seeds must be >= 0");
    }
};

// Aligned plain-text table; numbers right aligned, text left aligned.
class Table {
public:
    explicit Table(std::vector<std::string> header) : rows_{std::move(header)} {}
    void row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }

    void print(std::ostream& os) const
    {
        std::vector<std::size_t> width(rows_[0].size(), 0);
        for (const auto& r : rows_)
            for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const auto& r = rows_[k];
            std::string line;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const std::string pad(width[i] - r[i].size(), ' ');
                const bool numeric = !r[i].empty() && r[i].find_first_not_of("-0123456789") == std::string::npos;
                line += (i ? "  " : "") + (numeric ? pad + r[i] : r[i] + pad);
            }
            line.erase(line.find_last_not_of(' ') + 1);
            os << line << "\n";
            if (k == 0) {
                std::size_t total = 0;
                for (auto w : width) total += w;
                os << std::string(total + 2 * (width.size() - 1), '-') << "\n";
            }
        }
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

std::string yes(bool b) { return b ? "yes" : "NO"; }
std::string num(long v) { return std::to_string(v); }

void emit(const json& j)
{
    std::cout << j.dump(2) << "\n";
}

json envelope(const std::string& kind)
{
    return {{"schema_version", crx::kSchemaVersion}, {"kind", kind}};
}

// ---- cohomology ------------------------------------------------------------------

int cmd_cohomology(const RunConfig& cfg)
{
    const int max_dim = cfg.max_dim.value_or(std::min(cfg.n, 4));
    const auto rows = suites::cohomology_grid(max_dim, cfg.kmin, cfg.kmax, cfg.n, cfg.products);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.match(); });
    if (cfg.format == "json") {
        json j = envelope("cohomology_table");
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"bundle", r.bundle}, {"q", r.q}, {"closed", r.closed}, {"oracle", r.oracle}, {"match", r.match()}});
        j["rows"] = arr;
        j["all_match"] = ok;
        emit(j);
    } else {
        Table t({"bundle", "q", "bott", "cech", "match"});
        for (const auto& r : rows) t.row({r.bundle, num(r.q), num(r.closed), num(r.oracle), yes(r.match())});
        t.print(std::cout);
        std::cout << rows.size() << " rows, " << (ok ? "all match" : "MISMATCH") << "\n";
    }
    return ok ? kOk : kNegative;
}

// ---- obstructions ----------------------------------------------------------------

int cmd_obstructions(const RunConfig& cfg)
{
    const auto rep = obstruction::obstruction_report(cfg.n, cfg.kmin, cfg.kmax, cfg.cutoff);
    std::optional<obstruction::Dim7Report> d7;
    if (cfg.n == 4 && rep.all_stable()) d7 = obstruction::dim7_analysis(cfg.kmin, cfg.kmax, cfg.seed);
    if (cfg.format == "json") {
        json j = obstruction::to_json(rep);
        if (d7) j["dimension7"] = obstruction::to_json(*d7);
        emit(j);
    } else {
        Table t({"k", "W closed", "W linear", "H1 ext", "H2", "match", "stable"});
        for (const auto& r : rep.rows)
            t.row({num(r.k), num(r.w_closed), num(r.w_linear), num(r.h1_ext), num(r.h2), yes(r.match), yes(r.stable)});
        t.print(std::cout);
        for (const auto& d : rep.diagnostics) std::cout << "note: " << d << "\n";
        if (d7) {
            std::cout << "\ndimension 7 (n = 4)\n";
            Table h({"k", "H1 ext", "H2"});
            for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
                std::string a = "", b = "";
                for (const auto& [kk, v] : d7->h1_ext)
                    if (kk == k) a = num(v);
                for (const auto& [kk, v] : d7->h2)
                    if (kk == k) b = num(v);
                h.row({num(k), a, b});
            }
            h.print(std::cout);
            std::cout << "ambient H^1 summand at k = 3: " << d7->ambient_h1_k3 << "\n";
            for (const auto& b : d7->brackets)
                std::cout << "bracket of weights " << b.k1 << ", " << b.k2 << ": "
                          << (b.zero_bracket ? "zero" : (b.exact ? "exact" : "NOT EXACT")) << "\n";
            std::cout << "dimension 7 checks: " << (d7->ok ? "ok" : "FAILED") << "\n";
        }
    }
    if (!rep.all_stable()) {
        std::cerr << "error: cutoff did not stabilize; raise --cutoff or drop it for automatic levels\n";
        return kUnstable;
    }
    if (!rep.all_match() || (d7 && !d7->ok)) return kNegative;
    return kOk;
}

// ---- classify --------------------------------------------------------------------

int cmd_classify(const RunConfig& cfg, bool n_given)
{
    if (cfg.input.empty()) throw Usage("classify needs --input PATH");
    const auto dt = crx::read_tensor_file(cfg.input);
    if (n_given && dt.n != cfg.n) throw Usage("--n " + std::to_string(cfg.n) + " differs from n = " + std::to_string(dt.n) + " in the input");
    obstruction::ClassifyOptions opt;
    opt.kmin = cfg.kmin;
    opt.kmax = cfg.kmax;
    opt.cutoff = cfg.cutoff;
    const auto v = obstruction::classify(dt, opt);
    if (cfg.format == "json") {
        json j = envelope("fillability_verdict");
        j["n"] = dt.n;
        j["kmin"] = cfg.kmin;
        j["kmax"] = cfg.kmax;
        j["verdict"] = obstruction::to_json(v);
        emit(j);
    } else {
        std::cout << "n = " << dt.n << ", weights [" << cfg.kmin << ", " << cfg.kmax << "]\n";
        std::cout << "fillable (N side): " << yes(v.fillable_N) << "\n";
        std::cout << "fillable (M side): " << yes(v.fillable_M) << (v.m_theorem_backed ? "" : " (criterion level)") << "\n";
        std::cout << "stable: " << yes(v.stable) << "\n";
        auto show = [](const char* title, const std::vector<obstruction::Residual>& rs) {
            for (const auto& r : rs) {
                std::cout << title << " at weight " << r.k << ":\n";
                for (const auto& b : r.blocks) {
                    std::cout << "  block z(" << b.w.z[0] << "," << b.w.z[1] << ") y(";
                    for (int i = 0; i < crx::kMaxCoords; ++i) std::cout << (i ? "," : "") << b.w.y[i];
                    std::cout << "):";
                    for (const auto& c : b.coefficients) std::cout << " " << exactalg::to_string(c);
                    std::cout << "\n";
                }
            }
        };
        show("residual", v.residuals);
        show("weight-0 component (informational)", v.informational);
    }
    return v.fillable_N ? kOk : kNegative;
}

// ---- verify ----------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg)
{
    suites::VerifyConfig vc;
    vc.n = cfg.n;
    vc.kmin = cfg.kmin;
    vc.kmax = cfg.kmax;
    vc.order = cfg.order;
    vc.seed = cfg.seed;
    vc.kuranishi_seeds = cfg.kuranishi_seeds;
    crx::testing::set_bracket_fault(cfg.fault);
    const auto checks = suites::verify(vc);
    crx::testing::set_bracket_fault(false);
    const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    if (cfg.format == "json") {
        json j = envelope("verify_report");
        j["n"] = cfg.n;
        j["kmin"] = cfg.kmin;
        j["kmax"] = cfg.kmax;
        j["seed"] = cfg.seed;
        j["fault_injected"] = cfg.fault;
        json arr = json::array();
        for (const auto& c : checks)
            arr.push_back({{"group", c.group}, {"pass", c.pass}, {"cases", c.cases}, {"detail", c.detail}});
        j["groups"] = arr;
        j["all_pass"] = ok;
        emit(j);
    } else {
        Table t({"group", "result", "cases", "detail"});
        for (const auto& c : checks) t.row({c.group, c.pass ? "pass" : "FAIL", num(c.cases), c.detail});
        t.print(std::cout);
        if (cfg.fault) std::cout << "bracket fault injected\n";
    }
    return ok ? kOk : kNegative;
}

// ---- kuranishi -------------------------------------------------------------------

int cmd_kuranishi(const RunConfig& cfg, bool n_given)
{
    crx::DeformationTensor seed;
    std::string source;
    if (!cfg.input.empty()) {
        seed = crx::read_tensor_file(cfg.input);
        if (n_given && seed.n != cfg.n) throw Usage("--n differs from n in the input");
        source = "file";
    } else {
        for (int w : cfg.weights)
            if (w < cfg.kmin || w > cfg.kmax) throw Usage("seed weight " + std::to_string(w) + " outside [--kmin, --kmax]");
        std::mt19937_64 rng(cfg.seed);
        seed = kuranishi::random_seed(cfg.n, cfg.weights, rng, true);
        source = "random";
    }
    json j = envelope("kuranishi_run");
    j["n"] = seed.n;
    j["order"] = cfg.order;
    j["seed_source"] = source;
    j["n4_route"] = cfg.n4_route;
    if (cfg.n4_route) {
        const auto rep = kuranishi::negative_representative(seed);
        j["removed_exact_part"] = crx::to_json(crx::DeformationTensor::from_cochain(seed.n, crx::add(seed.total(), rep.seed.total(), crx::Scalar(-1))))["entries"];
        seed = rep.seed;
    }
    kuranishi::ChartOptions opt;
    opt.kmin = cfg.kmin;
    opt.kmax = cfg.kmax;
    kuranishi::FormalSeries s;
    try {
        s = kuranishi::chart_phi(seed, cfg.order, opt);
    } catch (const kuranishi::NoSolution& e) {
        j["obstructed"] = true;
        j["message"] = e.what();
        j["obstruction_order"] = e.order;
        j["obstruction"] = crx::to_json(crx::DeformationTensor::from_cochain(seed.n, e.obstruction))["entries"];
        if (cfg.format == "json")
            emit(j);
        else
            std::cout << "obstructed: " << e.what() << "\n";
        return kNegative;
    }
    const auto res = kuranishi::integrability_residual(s, cfg.order);
    const bool zero = std::all_of(res.begin(), res.end(), [](const auto& r) { return r.zero(); });
    const int m = std::min(3, cfg.order);
    const auto back = kuranishi::inverse_chart(s.truncated(m));
    bool round = back.term(1).total() == seed.total();
    for (int i = 2; i <= m; ++i) round = round && back.term(i).empty();
    const bool nonneg_in = kuranishi::nonnegative_weights(seed);
    const bool nonneg_out = kuranishi::nonnegative_weights(s);
    const bool nonneg_inv = kuranishi::nonnegative_weights(kuranishi::inverse_chart(s));
    const bool positivity = !nonneg_in || (nonneg_out && nonneg_inv);

    if (cfg.format == "json") {
        j["obstructed"] = false;
        j["series"] = kuranishi::to_json(s);
        json rs = json::array();
        for (const auto& r : res) rs.push_back({{"order", r.order}, {"zero", r.zero()}});
        j["residuals"] = rs;
        j["round_trip_order"] = m;
        j["round_trip"] = round;
        j["nonnegative_seed"] = nonneg_in;
        j["nonnegative_series"] = nonneg_out;
        j["nonnegative_inverse"] = nonneg_inv;
        emit(j);
    } else {
        Table t({"order", "terms", "weights", "residual"});
        for (int i = 1; i <= s.truncation_order(); ++i) {
            std::string ws;
            std::size_t terms = 0;
            for (const auto& [k, c] : s.term(i).coeffs) {
                if (c.empty()) continue;
                ws += (ws.empty() ? "" : ",") + std::to_string(k);
                terms += c.size();
            }
            t.row({num(i), num(static_cast<long>(terms)), ws.empty() ? "-" : ws, res[i - 1].zero() ? "0" : "NONZERO"});
        }
        t.print(std::cout);
        std::cout << "round trip through order " << m << ": " << yes(round) << "\n";
        if (nonneg_in) std::cout << "nonnegative weights kept by both charts: " << yes(nonneg_out && nonneg_inv) << "\n";
    }
    return zero && round && positivity ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Deformations of the CR hypersurface X^{2n-1} in P^n: cohomology, obstructions, classification"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    auto* n_opt = app.add_option("--n", cfg.n, "dimension of the ambient P^n (2..6)");
    app.add_option("--kmin", cfg.kmin, "lowest weight");
    app.add_option("--kmax", cfg.kmax, "highest weight");
    app.add_option("--cutoff", cfg.cutoff, "common polynomial level (default: raised until stable)");
    app.add_option("--order", cfg.order, "truncation order of the Kuranishi series");
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--input", cfg.input, "deformation tensor JSON file");
    app.add_option("--seed", cfg.seed, "seed for randomized suites");

    auto* coh = app.add_subcommand("cohomology", "Bott formula against the Čech oracle");
    coh->add_option("--max-dim", cfg.max_dim, "largest projective factor, -1 for an empty grid (default min(n, 4))");
    coh->add_flag("--products", cfg.products, "add O(k,-k) and T(k,-k) on P^1 x P^{n-2}");
    auto* obs = app.add_subcommand("obstructions", "per-weight obstruction spaces W_k, H^1 and H^2");
    auto* cls = app.add_subcommand("classify", "fillability verdict for a deformation tensor");
    auto* ver = app.add_subcommand("verify", "run the invariant suites");
    ver->add_flag("--inject-bracket-fault", cfg.fault, "flip a sign in the bracket (detector check)");
    ver->add_option("--kuranishi-seeds", cfg.kuranishi_seeds, "random seeds in the Kuranishi group");
    auto* kur = app.add_subcommand("kuranishi", "formal Kuranishi series from a seed");
    kur->add_flag("--n4-route", cfg.n4_route, "replace the seed by a negative-weight representative first");
    kur->add_option("--weights", cfg.weights, "weights of the random seed")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return kUsage;
    }

    try {
        cfg.validate();
        const bool n_given = n_opt->count() > 0;
        if (*coh) return cmd_cohomology(cfg);
        if (*obs) return cmd_obstructions(cfg);
        if (*cls) return cmd_classify(cfg, n_given);
        if (*ver) return cmd_verify(cfg);
        if (*kur) return cmd_kuranishi(cfg, n_given);
    } catch (const Usage& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const crx::FormatError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const obstruction::ScopeError& e) {
        std::cerr << "out of scope: " << e.what() << "\n";
        return kUsage;
    } catch (const kuranishi::RangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return kUsage;
    } catch (const crx::Unstable& e) {
        std::cerr << "cutoff instability: " << e.what() << "\n";
        return kUnstable;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const obstruction::Discrepancy& e) {
        std::cerr << "mismatch: " << e.what() << "\n";
        return kNegative;
    }
    return kUsage;
}
