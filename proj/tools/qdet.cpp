#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qdet/analyzer.hpp"
#include "qdet/builder.hpp"
#include "qdet/catalog.hpp"
#include "qdet/compare.hpp"
#include "qdet/evaluator.hpp"
#include "qdet/formulas.hpp"
#include "qdet/generators.hpp"

namespace {

using namespace qdet;
using nlohmann::ordered_json;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& data, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path);
    out << data;
    if (!out.flush()) throw IoError("short write to " + out_path);
}

/// Shared option state; every flag lands here so --json can echo it back.
struct Options {
    bool json = false;
    std::string store;
    std::string doubling = "on";
    std::string sharing = "dag";
    std::string chain_count = "exact";
    std::vector<std::string> params;
    std::optional<int> iterations;
    std::vector<std::string> inputs;

    bool doubling_on() const { return doubling == "on"; }

    AnalyzeConfig analyze_config() const {
        AnalyzeConfig cfg;
        cfg.sharing = *sharing_from_string(sharing);
        cfg.doubling = doubling_on();
        cfg.chain_count = *chain_count_from_string(chain_count);
        return cfg;
    }

    std::map<std::string, int> param_map() const {
        std::map<std::string, int> m;
        for (const std::string& p : params) {
            auto eq = p.find('=');
            if (eq == std::string::npos || eq == 0)
                throw DomainError("--param expects name=value, got '" + p +
                                  "'");
            std::size_t pos = 0;
            int v;
            try {
                v = std::stoi(p.substr(eq + 1), &pos);
            } catch (const std::exception&) {
                throw DomainError("--param value in '" + p +
                                  "' is not an integer");
            }
            if (eq + 1 + pos != p.size())
                throw DomainError("--param value in '" + p +
                                  "' is not an integer");
            m[p.substr(0, eq)] = v;
        }
        return m;
    }

    /// --input a(1,1)=2,a(1,2)=0.5  (commas split only outside parentheses)
    Interpretation interpretation() const {
        Interpretation in;
        for (const std::string& arg : inputs) {
            std::vector<std::string> items;
            std::string cur;
            int depth = 0;
            for (char c : arg) {
                if (c == '(') ++depth;
                if (c == ')') --depth;
                if (c == ',' && depth == 0) {
                    items.push_back(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!cur.empty()) items.push_back(cur);
            for (const std::string& item : items) {
                auto eq = item.rfind('=');
                if (eq == std::string::npos || eq == 0)
                    throw DomainError("--input expects var=value, got '" +
                                      item + "'");
                Var v = Var::parse(item.substr(0, eq));
                char* end = nullptr;
                const std::string num = item.substr(eq + 1);
                double x = std::strtod(num.c_str(), &end);
                if (end != num.c_str() + num.size() || num.empty())
                    throw DomainError("--input value in '" + item +
                                      "' is not a number");
                in.bind(v, x);
            }
        }
        return in;
    }

    Catalog open_store() const {
        std::string root = store;
        if (root.empty())
            if (const char* env = std::getenv("QDET_HOME")) root = env;
        if (root.empty())
            throw DomainError(
                "no store selected: pass --store DIR or set QDET_HOME");
        return Catalog(root);
    }

    ordered_json flags_json() const {
        ordered_json f;
        f["sharing"] = sharing;
        f["doubling"] = doubling;
        f["chainCount"] = chain_count;
        if (!store.empty()) f["store"] = store;
        if (!params.empty()) f["param"] = params;
        if (iterations) f["iterations"] = *iterations;
        if (!inputs.empty()) f["input"] = inputs;
        return f;
    }

    /// Envelope for --json mode; result is command-specific.
    void print(const std::string& command, const std::string& plain,
               ordered_json result) const {
        if (!json) {
            std::cout << plain;
            return;
        }
        ordered_json env;
        env["command"] = command;
        env["flags"] = flags_json();
        env["result"] = std::move(result);
        std::cout << env.dump(2) << "\n";
    }
};

void add_common_flags(CLI::App* cmd, Options& opt, bool with_inputs = false) {
    cmd->fallthrough(); // let parent-scope flags (e.g. --store) match
    cmd->add_flag("--json", opt.json, "machine-readable JSON envelope");
    cmd->add_option("--doubling", opt.doubling,
                    "apply the doubling scheme to chains")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--sharing", opt.sharing, "subexpression counting mode")
        ->check(CLI::IsMember({"dag", "tree"}));
    cmd->add_option("--chain-count", opt.chain_count, "chain width model")
        ->check(CLI::IsMember({"exact", "floor"}));
    cmd->add_option("--param", opt.params,
                    "dimension parameter value name=value (repeatable)");
    cmd->add_option("--iterations", opt.iterations, "truncation depth");
    if (with_inputs)
        cmd->add_option("--input", opt.inputs,
                        "input values var=value[,var=value...] (repeatable)");
}

ordered_json characteristics_json(const Characteristics& c) {
    return ordered_json::parse(characteristics_to_json(c));
}

ordered_json record_json(const DeterminantRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["algorithm"] = r.algorithm_id;
    j["params"] = r.params;
    j["iterations"] = r.iterations;
    j["D"] = r.D;
    j["P"] = r.P;
    j["sharing"] = to_string(r.sharing);
    j["doubling"] = r.doubling;
    j["chainCount"] = to_string(r.chain_count);
    return j;
}

std::string outcome_line(const Var& v, const Outcome& oc) {
    if (!oc.determined()) return v.text() + " undetermined: " + oc.cause;
    if (std::holds_alternative<bool>(*oc.value))
        return v.text() + " = " +
               (std::get<bool>(*oc.value) ? "true" : "false");
    return v.text() + " = " +
           ExprArena::canonical_number(std::get<double>(*oc.value));
}

ordered_json outcome_json(const Outcome& oc) {
    ordered_json o;
    o["determined"] = oc.determined();
    if (oc.determined()) {
        if (std::holds_alternative<bool>(*oc.value))
            o["value"] = std::get<bool>(*oc.value);
        else
            o["value"] = std::get<double>(*oc.value);
    } else {
        o["cause"] = oc.cause;
    }
    return o;
}

int run(int argc, char** argv) {
    CLI::App app{"Q-determinant toolkit: build, analyze, evaluate and "
                 "catalog algorithm determinants"};
    app.require_subcommand(1);
    Options opt;

    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand(
        "gen", "emit a built-in reference algorithm");
    std::string gen_name, gen_out;
    int gn = 2, gk = 2, gm = 2, gridK = 2, gridJ = 2, gridL = 2;
    gen->add_option("name", gen_name, "algorithm")
        ->required()
        ->check(CLI::IsMember({"scalar-product", "matmul", "gauss-jordan",
                               "jacobi", "gauss-seidel", "grid-jacobi"}));
    gen->add_option("-o,--output", gen_out, "output file (default stdout)");
    gen->add_option("--n", gn, "rows / system size");
    gen->add_option("--k", gk, "inner dimension");
    gen->add_option("--m", gm, "columns");
    gen->add_option("--K", gridK, "grid rows");
    gen->add_option("--J", gridJ, "grid columns");
    gen->add_option("--L", gridL, "truncation depth");
    add_common_flags(gen, opt);

    // ---- build --------------------------------------------------------
    auto* build = app.add_subcommand(
        "build", "construct the Q-determinant of a flowchart");
    std::string build_in, build_out, guard_mode;
    build->add_option("chart", build_in, "flowchart file")->required();
    build->add_option("-o,--output", build_out, "output file (default stdout)");
    build->add_option("--guard-mode", guard_mode, "guard accumulation")
        ->check(CLI::IsMember({"full", "last"}));
    add_common_flags(build, opt);

    // ---- analyze / schedule ------------------------------------------
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "height and width of a determinant");
    std::string analyze_in;
    analyze_cmd->add_option("determinant", analyze_in, "determinant file")
        ->required();
    add_common_flags(analyze_cmd, opt);

    auto* schedule_cmd = app.add_subcommand(
        "schedule", "level-ordered execution plan of a determinant");
    std::string schedule_in, schedule_out;
    schedule_cmd->add_option("determinant", schedule_in, "determinant file")
        ->required();
    schedule_cmd->add_option("-o,--output", schedule_out,
                             "output file (default stdout)");
    add_common_flags(schedule_cmd, opt);

    // ---- eval ---------------------------------------------------------
    auto* eval_cmd = app.add_subcommand(
        "eval", "evaluate a determinant or flowchart under input values");
    std::string eval_in;
    bool eval_effective = false;
    eval_cmd->add_option("file", eval_in, "determinant (.qd) or chart (.fc)")
        ->required();
    eval_cmd->add_flag("--effective", eval_effective,
                       "level-synchronous effective run (determinants only)");
    add_common_flags(eval_cmd, opt, true);

    // ---- formula ------------------------------------------------------
    auto* formula = app.add_subcommand(
        "formula", "closed-form height/width oracles");
    std::string formula_name;
    std::int64_t f_n = 0, f_kj = 0, f_n0 = 0;
    int f_s = 0;
    formula->add_option("name", formula_name, "oracle")
        ->required()
        ->check(CLI::IsMember({"scalar-product", "gauss-jordan",
                               "grid-jacobi-height", "grid-jacobi-width",
                               "grid-jacobi-width-pow2",
                               "grid-jacobi-width-increment"}));
    formula->add_option("--n", f_n, "system size");
    formula->add_option("--kj", f_kj, "number of grid points K*J");
    formula->add_option("--n0", f_n0, "iteration count");
    formula->add_option("--s", f_s, "exponent for KJ = 2^s");
    add_common_flags(formula, opt);

    // ---- compare ------------------------------------------------------
    auto* compare_cmd = app.add_subcommand(
        "compare", "height/width comparison of two stored algorithms");
    std::string cmp_a, cmp_b, metric = "both";
    compare_cmd->add_option("algoA", cmp_a, "first algorithm id")->required();
    compare_cmd->add_option("algoB", cmp_b, "second algorithm id")->required();
    compare_cmd->add_option("--metric", metric, "which sums to print")
        ->check(CLI::IsMember({"height", "width", "both"}));
    compare_cmd->add_option("--store", opt.store, "store directory");
    add_common_flags(compare_cmd, opt);

    // ---- catalog ------------------------------------------------------
    auto* catalog_cmd = app.add_subcommand("catalog", "persistent store");
    catalog_cmd->require_subcommand(1);
    catalog_cmd->add_option("--store", opt.store, "store directory");

    auto* alg = catalog_cmd->add_subcommand("algorithm", "algorithm records");
    alg->require_subcommand(1);
    alg->fallthrough();
    std::string a_id, a_name, a_desc;
    auto* alg_add = alg->add_subcommand("add", "record a new algorithm");
    alg_add->add_option("id", a_id)->required();
    alg_add->add_option("--name", a_name, "display name");
    alg_add->add_option("--description", a_desc, "free-form description");
    add_common_flags(alg_add, opt);
    auto* alg_upd = alg->add_subcommand("update", "change name/description");
    alg_upd->add_option("id", a_id)->required();
    alg_upd->add_option("--name", a_name, "display name");
    alg_upd->add_option("--description", a_desc, "free-form description");
    add_common_flags(alg_upd, opt);
    auto* alg_list = alg->add_subcommand("list", "list algorithms");
    add_common_flags(alg_list, opt);
    auto* alg_rm = alg->add_subcommand(
        "remove", "remove an algorithm and its determinants");
    alg_rm->add_option("id", a_id)->required();
    add_common_flags(alg_rm, opt);

    auto* det = catalog_cmd->add_subcommand("determinant",
                                            "determinant records");
    det->require_subcommand(1);
    det->fallthrough();
    std::string d_id, d_algo, d_file, d_out;
    auto* det_add = det->add_subcommand("add", "store a determinant");
    det_add->add_option("id", d_id)->required();
    det_add->add_option("--algorithm", d_algo, "owning algorithm id")
        ->required();
    det_add->add_option("--file", d_file, "determinant file")->required();
    add_common_flags(det_add, opt);
    auto* det_list = det->add_subcommand("list", "list determinants");
    det_list->add_option("--algorithm", d_algo, "restrict to one algorithm");
    add_common_flags(det_list, opt);
    auto* det_dl = det->add_subcommand("download", "emit a stored file");
    det_dl->add_option("id", d_id)->required();
    det_dl->add_option("-o,--output", d_out, "output file (default stdout)");
    add_common_flags(det_dl, opt);
    auto* det_rm = det->add_subcommand("remove", "remove a determinant");
    det_rm->add_option("id", d_id)->required();
    add_common_flags(det_rm, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    // ---- dispatch -----------------------------------------------------
    if (gen->parsed()) {
        std::string data;
        if (gen_name == "scalar-product")
            data = serialize_flowchart(gen::scalar_product(opt.doubling_on()));
        else if (gen_name == "matmul")
            data = serialize_qdet(gen::matmul(gn, gk, gm, opt.doubling_on()));
        else if (gen_name == "gauss-jordan")
            data = serialize_flowchart(gen::gauss_jordan());
        else if (gen_name == "jacobi")
            data = serialize_flowchart(gen::jacobi_linear());
        else if (gen_name == "gauss-seidel")
            data = serialize_flowchart(gen::gauss_seidel());
        else
            data = serialize_qdet(gen::grid_jacobi(gridK, gridJ, gridL));
        emit(data, gen_out);
        return 0;
    }

    if (build->parsed()) {
        Flowchart fc = parse_flowchart(slurp(build_in));
        BuildConfig cfg;
        cfg.params = opt.param_map();
        cfg.iterations = opt.iterations;
        if (guard_mode == "full") cfg.guard_mode = GuardMode::FullConjunction;
        if (guard_mode == "last") cfg.guard_mode = GuardMode::LastConditionOnly;
        QDeterminant q = build_qdet(fc, cfg);
        emit(serialize_qdet(q), build_out);
        return 0;
    }

    if (analyze_cmd->parsed()) {
        QDeterminant q = parse_qdet(slurp(analyze_in));
        Characteristics c = analyze(q, opt.analyze_config());
        std::string plain = "D=" + std::to_string(c.D) +
                            " P=" + std::to_string(c.P) + "\n";
        opt.print("analyze", plain, characteristics_json(c));
        return 0;
    }

    if (schedule_cmd->parsed()) {
        QDeterminant q = parse_qdet(slurp(schedule_in));
        AnalyzeConfig cfg = opt.analyze_config();
        auto roots = analysis_roots(q, cfg.doubling);
        Schedule s = make_schedule(q.arena, roots, cfg.sharing);
        emit(serialize_schedule(q.arena, s), schedule_out);
        return 0;
    }

    if (eval_cmd->parsed()) {
        std::string text = slurp(eval_in);
        Interpretation in = opt.interpretation();
        std::vector<std::pair<Var, Outcome>> outs;
        std::string mode;
        auto first_printable = text.find_first_not_of(" \t\r\n");
        if (first_printable != std::string::npos &&
            text[first_printable] == '{') {
            Flowchart fc = parse_flowchart(text);
            outs = run_flowchart(fc, opt.param_map(), in, opt.iterations)
                       .outputs;
            mode = "flowchart";
        } else {
            QDeterminant q = parse_qdet(text);
            if (eval_effective)
                outs = run_q_effective(q, in).outputs;
            else
                outs = qdet_value(q, in);
            mode = eval_effective ? "effective" : "value";
        }
        std::string plain;
        ordered_json jr;
        jr["mode"] = mode;
        jr["outputs"] = ordered_json::object();
        for (const auto& [v, oc] : outs) {
            plain += outcome_line(v, oc) + "\n";
            jr["outputs"][v.text()] = outcome_json(oc);
        }
        opt.print("eval", plain, jr);
        return 0;
    }

    if (formula->parsed()) {
        namespace fm = qdet::formulas;
        std::string plain;
        ordered_json jr;
        if (formula_name == "scalar-product") {
            int d = fm::scalar_product_height(f_n);
            std::int64_t p = fm::scalar_product_width(f_n);
            plain = "D=" + std::to_string(d) + " P=" + std::to_string(p) +
                    "\n";
            jr["D"] = d;
            jr["P"] = p;
        } else if (formula_name == "gauss-jordan") {
            int d = fm::gauss_jordan_height(f_n);
            fm::BigInt p = fm::gauss_jordan_width_lower_bound(f_n);
            plain = "D=" + std::to_string(d) +
                    " P>=" + p.str() + "\n";
            jr["D"] = d;
            jr["PLowerBound"] = p.str();
            jr["guardHeight"] = fm::gauss_jordan_guard_height(f_n);
        } else if (formula_name == "grid-jacobi-height") {
            int d = fm::grid_jacobi_height(f_kj, f_n0);
            plain = std::to_string(d) + "\n";
            jr["D"] = d;
        } else if (formula_name == "grid-jacobi-width") {
            std::int64_t p = fm::grid_jacobi_width(f_kj);
            plain = std::to_string(p) + "\n";
            jr["P"] = p;
        } else if (formula_name == "grid-jacobi-width-pow2") {
            std::int64_t p = fm::grid_jacobi_width_pow2(f_s);
            plain = std::to_string(p) + "\n";
            jr["P"] = p;
        } else {
            int inc = fm::grid_jacobi_width_increment(f_kj);
            plain = std::to_string(inc) + "\n";
            jr["increment"] = inc;
        }
        opt.print("formula", plain, jr);
        return 0;
    }

    if (compare_cmd->parsed()) {
        Catalog cat = opt.open_store();
        ComparisonReport r = cat.compare_via_catalog(cmp_a, cmp_b);
        std::string plain =
            "shared points: " + std::to_string(r.shared.size()) + "\n";
        if (metric != "width")
            plain += "deltaD=" + std::to_string(r.delta_d) + " (" +
                     to_string(r.verdict_d) + ")\n";
        if (metric != "height")
            plain += "deltaP=" + std::to_string(r.delta_p) + " (" +
                     to_string(r.verdict_p) + ")\n";
        opt.print("compare", plain,
                  ordered_json::parse(report_to_json(r)));
        return 0;
    }

    // catalog subcommands
    Catalog cat = opt.open_store();
    if (alg_add->parsed()) {
        cat.algorithm_add(a_id, a_name, a_desc);
        opt.print("catalog algorithm add", "added " + a_id + "\n",
                  {{"id", a_id}});
    } else if (alg_upd->parsed()) {
        cat.algorithm_update(a_id, a_name, a_desc);
        opt.print("catalog algorithm update", "updated " + a_id + "\n",
                  {{"id", a_id}});
    } else if (alg_list->parsed()) {
        std::string plain;
        ordered_json jr = ordered_json::array();
        for (const AlgorithmRecord& r : cat.algorithm_list()) {
            plain += r.id + "\t" + r.name + "\t" +
                     std::to_string(r.determinant_count) + " determinant(s)" +
                     (r.description.empty() ? "" : "\t" + r.description) +
                     "\n";
            ordered_json e;
            e["id"] = r.id;
            e["name"] = r.name;
            e["description"] = r.description;
            e["determinants"] = r.determinant_count;
            jr.push_back(std::move(e));
        }
        opt.print("catalog algorithm list", plain, jr);
    } else if (alg_rm->parsed()) {
        cat.algorithm_remove(a_id);
        opt.print("catalog algorithm remove", "removed " + a_id + "\n",
                  {{"id", a_id}});
    } else if (det_add->parsed()) {
        DeterminantRecord r = cat.determinant_add(
            d_id, d_algo, slurp(d_file), opt.analyze_config());
        opt.print("catalog determinant add",
                  "added " + d_id + " D=" + std::to_string(r.D) +
                      " P=" + std::to_string(r.P) + "\n",
                  record_json(r));
    } else if (det_list->parsed()) {
        auto rows = d_algo.empty() ? cat.determinant_list()
                                   : cat.determinant_list(d_algo);
        std::string plain;
        ordered_json jr = ordered_json::array();
        for (const DeterminantRecord& r : rows) {
            plain += r.id + "\t" + r.algorithm_id +
                     "\tD=" + std::to_string(r.D) +
                     " P=" + std::to_string(r.P) + "\n";
            jr.push_back(record_json(r));
        }
        opt.print("catalog determinant list", plain, jr);
    } else if (det_dl->parsed()) {
        emit(cat.determinant_download(d_id), d_out);
    } else if (det_rm->parsed()) {
        cat.determinant_remove(d_id);
        opt.print("catalog determinant remove", "removed " + d_id + "\n",
                  {{"id", d_id}});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qdet::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qdet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
