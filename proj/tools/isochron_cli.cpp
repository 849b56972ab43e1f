// Batch front end: systems and ideals in; quantities, bases, normal forms
// and Darboux verdicts out. Exit codes: 0 success / verified true, 1 verified
// false, 2 usage or parse error, 3 resource limit.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <isochron/darboux.hpp>
#include <isochron/ideal_io.hpp>
#include <isochron/quantities.hpp>

using namespace isochron;
using nlohmann::json;

namespace {

enum class Fmt { text, js, csv };

Fmt to_fmt(const std::string& s) {
    if (s == "json") return Fmt::js;
    if (s == "csv") return Fmt::csv;
    return Fmt::text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sci(double v) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(3) << v;
    return ss.str();
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void print_json(const json& j) { std::fputs((j.dump(2) + "\n").c_str(), stdout); }

// Shared knobs; subcommand callbacks read these after parsing.
struct Common {
    std::string format = "text";
    std::uint64_t budget = 0;
    unsigned seed = 20260815;
    Fmt fmt() const { return to_fmt(format); }
    GBOptions gb() const {
        GBOptions opt;
        if (budget) opt.max_pairs = opt.max_terms = budget;
        return opt;
    }
};

template <class C>
void print_basis(const Ideal<C>& I, Fmt fmt) {
    if (fmt == Fmt::js) {
        json gens = json::array();
        for (auto& g : I.gens) gens.push_back(g.str());
        print_json({{"order", I.ring->order.str()}, {"generators", gens}});
    } else {
        std::fputs(ideal_file_str(I).c_str(), stdout);
    }
}

// ---------------------------------------------------------------------------
// Ideal commands

int cmd_gb(const Common& co, const std::string& path, const std::string& order_str,
           std::uint64_t modulus) {
    IdealVariant iv = parse_ideal_file(read_file(path));
    if (modulus) {
        if (auto* I = std::get_if<Ideal<BigRational>>(&iv))
            iv = modular_image(*I, modulus);
        else if (auto* I = std::get_if<Ideal<GaussianRational>>(&iv))
            iv = modular_image(*I, modulus);
        else
            throw Error("--modulus needs an ideal over Q or Qi");
    }
    std::visit(
        [&](auto& I) {
            using C = typename std::decay_t<decltype(I)>::coeff_type;
            GroebnerBasis<C> gb;
            if (!order_str.empty()) {
                auto ord = order_from_str(order_str);
                if (!ord) throw Error("unknown order '" + order_str + "'");
                gb = buchberger(I, *ord, co.gb());
            } else {
                gb = buchberger(I, co.gb());
            }
            print_basis(Ideal<C>{gb.ring, gb.polys}, co.fmt());
        },
        iv);
    return 0;
}

int cmd_nf(const Common& co, const std::string& path, const std::string& ptext) {
    IdealVariant iv = parse_ideal_file(read_file(path));
    std::visit(
        [&](auto& I) {
            using C = typename std::decay_t<decltype(I)>::coeff_type;
            Polynomial<C> f = parse_polynomial<C>(ptext, I.ring);
            Polynomial<C> r = normal_form(f, buchberger(I, co.gb()));
            if (co.fmt() == Fmt::js)
                print_json({{"normal_form", r.str()}});
            else
                std::fputs((r.str() + "\n").c_str(), stdout);
        },
        iv);
    return 0;
}

int cmd_member(const Common& co, const std::string& path, const std::string& ptext,
               bool radical) {
    bool in = false;
    IdealVariant iv = parse_ideal_file(read_file(path));
    std::visit(
        [&](auto& I) {
            using C = typename std::decay_t<decltype(I)>::coeff_type;
            Polynomial<C> f = parse_polynomial<C>(ptext, I.ring);
            in = radical ? radical_membership(f, I, co.gb())
                         : ideal_membership(f, I, co.gb());
        },
        iv);
    if (co.fmt() == Fmt::js)
        print_json({{radical ? "radical_member" : "member", in}});
    else
        std::fputs(in ? "true\n" : "false\n", stdout);
    return in ? 0 : 1;
}

int cmd_intersect(const Common& co, const std::string& path_a, const std::string& path_b) {
    IdealVariant va = parse_ideal_file(read_file(path_a));
    IdealVariant vb = parse_ideal_file(read_file(path_b));
    std::visit(
        [&](auto& A, auto& B) {
            if constexpr (std::is_same_v<std::decay_t<decltype(A)>, std::decay_t<decltype(B)>>) {
                using C = typename std::decay_t<decltype(A)>::coeff_type;
                Ideal<C> out = intersect(A, B, co.gb());
                print_basis(out, co.fmt());
            } else {
                throw RingMismatchError("intersect inputs use different domains");
            }
        },
        va, vb);
    return 0;
}

int cmd_quotient(const Common& co, const std::string& path_a, const std::string& by_poly,
                 const std::string& path_b) {
    if (by_poly.empty() == path_b.empty())
        throw Error("quotient needs exactly one of --by or --with");
    IdealVariant va = parse_ideal_file(read_file(path_a));
    if (!by_poly.empty()) {
        std::visit(
            [&](auto& A) {
                using C = typename std::decay_t<decltype(A)>::coeff_type;
                Polynomial<C> f = parse_polynomial<C>(by_poly, A.ring);
                print_basis(quotient(A, f, co.gb()), co.fmt());
            },
            va);
        return 0;
    }
    IdealVariant vb = parse_ideal_file(read_file(path_b));
    std::visit(
        [&](auto& A, auto& B) {
            if constexpr (std::is_same_v<std::decay_t<decltype(A)>, std::decay_t<decltype(B)>>) {
                print_basis(quotient(A, B, co.gb()), co.fmt());
            } else {
                throw RingMismatchError("quotient inputs use different domains");
            }
        },
        va, vb);
    return 0;
}

int cmd_lift(const Common& co, const std::string& path, std::uint64_t modulus,
             const std::string& value) {
    if (!value.empty()) {
        if (!modulus) throw Error("lift --value needs --modulus");
        std::uint64_t v = std::stoull(value);
        auto r = rational_reconstruct(v, modulus);
        if (!r) throw ReconstructionError("residue " + value);
        if (co.fmt() == Fmt::js)
            print_json({{"value", r->str()}});
        else
            std::fputs((r->str() + "\n").c_str(), stdout);
        return 0;
    }
    if (path.empty()) throw Error("lift needs --ideal or --value");
    IdealVariant iv = parse_ideal_file(read_file(path));
    if (auto* I = std::get_if<Ideal<PrimeFieldElement>>(&iv))
        print_basis(lift_basis(*I), co.fmt());
    else if (auto* I = std::get_if<Ideal<GaussianPrimeElement>>(&iv))
        print_basis(lift_basis(*I), co.fmt());
    else
        throw Error("lift --ideal needs a modular ideal");
    return 0;
}

// ---------------------------------------------------------------------------
// Quantity commands

int cmd_quantities(const Common& co, const std::string& path, unsigned count) {
    PlanarSystem s = parse_system(read_file(path));
    auto qs = linearizability_quantities(s, count);
    Fmt fmt = co.fmt();
    if (fmt == Fmt::js) {
        json pairs = json::array();
        for (auto& q : qs)
            pairs.push_back({{"k", q.k}, {"I", q.I.str()}, {"J", q.J.str()}});
        print_json({{"pairs", pairs}});
    } else if (fmt == Fmt::csv) {
        std::fputs("k,quantity,value\n", stdout);
        for (auto& q : qs) {
            std::fputs((std::to_string(q.k) + ",I," + csv_cell(q.I.str()) + "\n").c_str(), stdout);
            std::fputs((std::to_string(q.k) + ",J," + csv_cell(q.J.str()) + "\n").c_str(), stdout);
        }
    } else {
        for (auto& q : qs) {
            std::fputs(("I_" + std::to_string(q.k) + " = " + q.I.str() + "\n").c_str(), stdout);
            std::fputs(("J_" + std::to_string(q.k) + " = " + q.J.str() + "\n").c_str(), stdout);
        }
    }
    return 0;
}

int cmd_focus(const Common& co, const std::string& path, unsigned count) {
    PlanarSystem s = parse_system(read_file(path));
    auto gs = focus_quantities(s, count);
    Fmt fmt = co.fmt();
    if (fmt == Fmt::js) {
        json out = json::array();
        for (auto& g : gs) out.push_back({{"k", g.k}, {"g", g.g.str()}});
        print_json({{"focus", out}});
    } else if (fmt == Fmt::csv) {
        std::fputs("k,value\n", stdout);
        for (auto& g : gs)
            std::fputs((std::to_string(g.k) + "," + csv_cell(g.g.str()) + "\n").c_str(), stdout);
    } else {
        for (auto& g : gs)
            std::fputs(("g_" + std::to_string(g.k) + " = " + g.g.str() + "\n").c_str(), stdout);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Darboux commands

struct LoadedRecipe {
    PlanarSystem sys;
    ComplexSystem cs;
    LinearizationRecipe recipe;
};

LoadedRecipe load_recipe(const std::string& sys_path, const std::string& recipe_path) {
    PlanarSystem s = parse_system(read_file(sys_path));
    ComplexSystem cs = complexify(s);
    LinearizationRecipe r = parse_recipe(read_file(recipe_path), cs);
    return {std::move(s), std::move(cs), std::move(r)};
}

// Complex parameter draws, rejecting points where any radical of the recipe
// nearly collapses (the verification residual blows up near branch points).
struct Sampler {
    std::mt19937 rng;
    std::uniform_real_distribution<double> u{-1.5, 1.5};
    const LoadedRecipe& lr;

    Sampler(unsigned seed, const LoadedRecipe& lr_) : rng(seed), lr(lr_) {}

    std::map<std::string, ComplexApprox> next() {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            std::map<std::string, ComplexApprox> pt;
            for (auto& p : lr.sys.params) pt[p] = ComplexApprox(u(rng), u(rng));
            try {
                auto env = numeric_env(lr.recipe, pt);
                bool ok = true;
                for (auto& [name, unused] : lr.recipe.radicals)
                    if (std::abs(env.at(name)) < 0.2) ok = false;
                if (ok) return pt;
            } catch (const Error&) {
                // degenerate draw (division by zero in a radical); retry
            }
        }
        throw DegeneracyError("could not draw a usable parameter sample");
    }

    std::map<std::string, GaussianRational> next_exact() {
        std::uniform_int_distribution<long> coin(-6, 6);
        auto nz = [&] {
            long v = 0;
            while (v == 0) v = coin(rng);
            return v;
        };
        std::map<std::string, GaussianRational> pt;
        for (auto& p : lr.sys.params)
            pt[p] = GaussianRational(BigRational(nz(), 2), BigRational(coin(rng), 2));
        return pt;
    }
};

int cmd_darboux_verify(const Common& co, const std::string& sys_path,
                       const std::string& recipe_path, unsigned samples, double tol) {
    LoadedRecipe lr = load_recipe(sys_path, recipe_path);
    Fmt fmt = co.fmt();

    if (lr.recipe.radicals.empty()) {
        RecipeReport rep = verify_recipe(lr.cs, lr.recipe);
        bool pass = rep.passed();
        if (fmt == Fmt::js) {
            print_json({{"mode", "exact"},
                        {"shape_ok", rep.shape_ok},
                        {"cofactors_ok", rep.cofactors_ok},
                        {"z_sum_ok", rep.z_sum_ok},
                        {"w_sum_ok", rep.w_sum_ok},
                        {"notes", rep.notes},
                        {"verdict", pass ? "pass" : "fail"}});
        } else {
            std::fputs("mode: exact\n", stdout);
            for (auto& n : rep.notes) std::fputs(("note: " + n + "\n").c_str(), stdout);
            std::fputs((std::string("verdict: ") + (pass ? "pass" : "fail") + "\n").c_str(),
                       stdout);
        }
        return pass ? 0 : 1;
    }

    Sampler sampler(co.seed, lr);
    bool all = true;
    double worst = 0.0;
    std::vector<std::string> lines;
    for (unsigned i = 1; i <= samples; ++i) {
        auto pt = sampler.next();
        RecipeReport rep = verify_recipe_numeric(lr.cs, lr.recipe, pt, tol);
        bool pass = rep.passed();
        all = all && pass;
        worst = std::max(worst, rep.residual);
        lines.push_back("sample " + std::to_string(i) + ": " + (pass ? "pass" : "fail") +
                        " (residual " + sci(rep.residual) + ")");
    }
    if (fmt == Fmt::js) {
        print_json({{"mode", "numeric"},
                    {"samples", samples},
                    {"max_residual", worst},
                    {"verdict", all ? "pass" : "fail"}});
    } else {
        std::fputs("mode: numeric\n", stdout);
        for (auto& l : lines) std::fputs((l + "\n").c_str(), stdout);
        std::fputs(("max residual: " + sci(worst) + "\n").c_str(), stdout);
        std::fputs((std::string("verdict: ") + (all ? "pass" : "fail") + "\n").c_str(), stdout);
    }
    return all ? 0 : 1;
}

int cmd_darboux_series(const Common& co, const std::string& sys_path,
                       const std::string& recipe_path, unsigned N, unsigned samples,
                       double tol) {
    LoadedRecipe lr = load_recipe(sys_path, recipe_path);
    Fmt fmt = co.fmt();
    Sampler sampler(co.seed, lr);
    bool exact = lr.recipe.radicals.empty();
    bool all = true;
    double worst = 0.0;
    std::vector<std::string> lines;
    for (unsigned i = 1; i <= samples; ++i) {
        bool pass = false;
        if (exact) {
            auto pt = sampler.next_exact();
            SeriesReport sr = series_linearization_check(lr.cs, lr.recipe, pt, N);
            pass = sr.zero;
            lines.push_back("sample " + std::to_string(i) + ": " +
                            (pass ? "zero" : "nonzero"));
        } else {
            auto pt = sampler.next();
            SeriesReport sr = series_linearization_check_numeric(lr.cs, lr.recipe, pt, N);
            pass = sr.passed(tol);
            worst = std::max(worst, sr.residual);
            lines.push_back("sample " + std::to_string(i) + ": " + (pass ? "pass" : "fail") +
                            " (residual " + sci(sr.residual) + ")");
        }
        all = all && pass;
    }
    if (fmt == Fmt::js) {
        json j = {{"mode", exact ? "exact" : "numeric"},
                  {"truncation", N},
                  {"samples", samples},
                  {"verdict", all ? "pass" : "fail"}};
        if (!exact) j["max_residual"] = worst;
        print_json(j);
    } else {
        std::fputs((std::string("mode: ") + (exact ? "exact" : "numeric") + "\n").c_str(),
                   stdout);
        std::fputs(("truncation: " + std::to_string(N) + "\n").c_str(), stdout);
        for (auto& l : lines) std::fputs((l + "\n").c_str(), stdout);
        std::fputs((std::string("verdict: ") + (all ? "pass" : "fail") + "\n").c_str(), stdout);
    }
    return all ? 0 : 1;
}

std::map<std::string, GaussianRational> parse_assignments(const std::string& text,
                                                          const RingPtr& ring) {
    std::map<std::string, GaussianRational> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error("expected name=value in '" + item + "'");
        std::string name = iodetail::strip_line(item.substr(0, eq));
        std::string val = item.substr(eq + 1);
        PolyQi p = parse_polynomial<GaussianRational>(val, ring);
        if (!p.is_constant()) throw Error("value for " + name + " is not constant");
        out[name] = p.constant_value();
    }
    return out;
}

int cmd_darboux_discover(const Common& co, const std::string& sys_path, const std::string& at,
                         unsigned degree) {
    PlanarSystem s = parse_system(read_file(sys_path));
    if (!s.params.empty()) {
        if (at.empty()) throw Error("system has parameters; bind them with --at");
        s = at_parameters(s, parse_assignments(at, s.ring));
    }
    ComplexSystem cs = complexify(s);
    auto factors = discover_factors(cs, degree, co.gb());
    if (co.fmt() == Fmt::js) {
        json out = json::array();
        for (auto& df : factors)
            out.push_back({{"f", df.f.str()}, {"cofactor", df.cofactor.str()}});
        print_json({{"factors", out}});
    } else if (co.fmt() == Fmt::csv) {
        std::fputs("f,cofactor\n", stdout);
        for (auto& df : factors)
            std::fputs((csv_cell(df.f.str()) + "," + csv_cell(df.cofactor.str()) + "\n").c_str(),
                       stdout);
    } else {
        for (auto& df : factors) {
            std::fputs(("factor: " + df.f.str() + "\n").c_str(), stdout);
            std::fputs(("cofactor: " + df.cofactor.str() + "\n").c_str(), stdout);
        }
    }
    return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
    json j = {{"error", {{"kind", kind}, {"message", message}}}};
    std::fputs((j.dump() + "\n").c_str(), stderr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact toolkit for linearizability of planar polynomial systems"};
    app.require_subcommand(1);
    app.fallthrough();

    Common co;
    app.add_option("--format", co.format, "output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    app.add_option("--budget", co.budget, "cap on Groebner S-pairs and term counts");
    app.add_option("--seed", co.seed, "seed for sampled verification");

    int rc = 0;

    std::string q_sys;
    unsigned q_count = 3;
    auto* quantities = app.add_subcommand("quantities", "linearizability quantities I_k, J_k");
    quantities->add_option("--system", q_sys, "system file")->required();
    quantities->add_option("-k,--count", q_count, "number of pairs");
    quantities->callback([&] { rc = cmd_quantities(co, q_sys, q_count); });

    std::string f_sys;
    unsigned f_count = 3;
    auto* focus = app.add_subcommand("focus", "focus quantities g_k");
    focus->add_option("--system", f_sys, "system file")->required();
    focus->add_option("-k,--count", f_count, "number of quantities");
    focus->callback([&] { rc = cmd_focus(co, f_sys, f_count); });

    std::string gb_ideal, gb_order;
    std::uint64_t gb_mod = 0;
    auto* gb = app.add_subcommand("gb", "reduced Groebner basis");
    gb->add_option("--ideal", gb_ideal, "ideal file")->required();
    gb->add_option("--order", gb_order, "override the file's order");
    gb->add_option("--modulus", gb_mod, "compute modulo a prime");
    gb->callback([&] { rc = cmd_gb(co, gb_ideal, gb_order, gb_mod); });

    std::string nf_ideal, nf_poly;
    auto* nf = app.add_subcommand("nf", "normal form modulo an ideal");
    nf->add_option("--ideal", nf_ideal, "ideal file")->required();
    nf->add_option("--poly", nf_poly, "polynomial to reduce")->required();
    nf->callback([&] { rc = cmd_nf(co, nf_ideal, nf_poly); });

    std::string mem_ideal, mem_poly;
    auto* member = app.add_subcommand("member", "ideal membership");
    member->add_option("--ideal", mem_ideal, "ideal file")->required();
    member->add_option("--poly", mem_poly, "polynomial to test")->required();
    member->callback([&] { rc = cmd_member(co, mem_ideal, mem_poly, false); });

    std::string rad_ideal, rad_poly;
    auto* radmember = app.add_subcommand("radmember", "radical membership");
    radmember->add_option("--ideal", rad_ideal, "ideal file")->required();
    radmember->add_option("--poly", rad_poly, "polynomial to test")->required();
    radmember->callback([&] { rc = cmd_member(co, rad_ideal, rad_poly, true); });

    std::string int_a, int_b;
    auto* inter = app.add_subcommand("intersect", "ideal intersection");
    inter->add_option("--ideal", int_a, "first ideal file")->required();
    inter->add_option("--with", int_b, "second ideal file")->required();
    inter->callback([&] { rc = cmd_intersect(co, int_a, int_b); });

    std::string quo_a, quo_by, quo_b;
    auto* quo = app.add_subcommand("quotient", "ideal quotient");
    quo->add_option("--ideal", quo_a, "ideal file")->required();
    quo->add_option("--by", quo_by, "divisor polynomial");
    quo->add_option("--with", quo_b, "divisor ideal file");
    quo->callback([&] { rc = cmd_quotient(co, quo_a, quo_by, quo_b); });

    std::string lift_ideal, lift_value;
    std::uint64_t lift_mod = 0;
    auto* lift = app.add_subcommand("lift", "rational reconstruction from a modular image");
    lift->add_option("--ideal", lift_ideal, "modular ideal file");
    lift->add_option("--modulus", lift_mod, "prime modulus");
    lift->add_option("--value", lift_value, "single residue to lift");
    lift->callback([&] { rc = cmd_lift(co, lift_ideal, lift_mod, lift_value); });

    auto* darboux = app.add_subcommand("darboux", "Darboux linearization checks");
    darboux->require_subcommand(1);
    darboux->fallthrough();

    std::string dv_sys, dv_recipe;
    unsigned dv_samples = 20;
    double dv_tol = 1e-9;
    auto* dverify = darboux->add_subcommand("verify", "verify a linearization recipe");
    dverify->add_option("--system", dv_sys, "system file")->required();
    dverify->add_option("--recipe", dv_recipe, "recipe file")->required();
    dverify->add_option("--samples", dv_samples, "numeric samples when radicals are present");
    dverify->add_option("--tol", dv_tol, "numeric residual tolerance");
    dverify->callback([&] { rc = cmd_darboux_verify(co, dv_sys, dv_recipe, dv_samples, dv_tol); });

    std::string ds_sys, ds_recipe;
    unsigned ds_N = 8, ds_samples = 5;
    double ds_tol = 1e-9;
    auto* dseries = darboux->add_subcommand("series-check",
                                            "power-series check of a recipe at sampled points");
    dseries->add_option("--system", ds_sys, "system file")->required();
    dseries->add_option("--recipe", ds_recipe, "recipe file")->required();
    dseries->add_option("--truncation", ds_N, "series truncation degree");
    dseries->add_option("--samples", ds_samples, "number of parameter samples");
    dseries->add_option("--tol", ds_tol, "numeric residual tolerance");
    dseries->callback(
        [&] { rc = cmd_darboux_series(co, ds_sys, ds_recipe, ds_N, ds_samples, ds_tol); });

    std::string dd_sys, dd_at;
    unsigned dd_deg = 2;
    auto* ddisc = darboux->add_subcommand("discover", "search for Darboux factors");
    ddisc->add_option("--system", dd_sys, "system file")->required();
    ddisc->add_option("--at", dd_at, "parameter values, name=value comma separated");
    ddisc->add_option("--degree", dd_deg, "maximal factor degree");
    ddisc->callback([&] { rc = cmd_darboux_discover(co, dd_sys, dd_at, dd_deg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        emit_error("parse", e.what());
        return 2;
    } catch (const ResourceLimitError& e) {
        emit_error("resource-limit", e.what());
        return 3;
    } catch (const ReconstructionError& e) {
        emit_error("reconstruction", e.what());
        return 1;
    } catch (const ObstructionError& e) {
        emit_error("obstruction", e.what());
        return 1;
    } catch (const NotExactError& e) {
        emit_error("not-exact", e.what());
        return 1;
    } catch (const Error& e) {
        emit_error("error", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("error", e.what());
        return 2;
    }
    return rc;
}
