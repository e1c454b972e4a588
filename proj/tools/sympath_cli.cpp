#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sympath/io.hpp"

using namespace sympath;

namespace {

enum Exit { Ok = 0, ChecksFailed = 1, BadInput = 2, Numerical = 3 };

struct RunConfig {
    double tol = 0.0;  // 0 keeps the defaults
    int samples = 0;   // 0 keeps the default grid
    std::uint64_t seed = 20240601;
    std::string format;
    std::string out;

    Tolerances tolerances() const {
        Tolerances t = default_tolerances();
        if (tol > 0.0) t.unit_band = t.real_band = t.pm1_band = tol;
        return t;
    }
    void validate() const {
        if (tol < 0.0) throw InputError("--tol must be positive");
        if (samples != 0 && samples < 64) throw InputError("--samples must be at least 64");
        if (!format.empty() && format != "json" && format != "csv") throw InputError("--format must be json or csv");
    }
};

void emit(const RunConfig& cfg, const Json& j) { write_output(cfg.out, dump(j)); }

PathModel model_from(const Json& j, const RunConfig& cfg) {
    if (j.is_object() && j.contains("gamma")) return interpolate(positive_path_from_json(j));
    return build(path_spec_from_json(j), cfg.tolerances());
}

PositivePath path_from(const Json& j, const RunConfig& cfg) {
    if (j.is_object() && j.contains("loop") && j.at("loop").is_object()) return path_from(j.at("loop"), cfg);
    if (j.is_object() && j.contains("gamma")) return positive_path_from_json(j);
    const PathModel m = build(path_spec_from_json(j), cfg.tolerances());
    const int intervals = cfg.samples > 0 ? cfg.samples : default_intervals(m, cfg.tolerances());
    return sample(m, intervals, cfg.tolerances());
}

Json read_input(const std::string& file) {
    if (file == "-") {
        std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
        return parse_json(text);
    }
    return read_json_file(file);
}

int cmd_classify(const RunConfig& cfg, const std::string& file) {
    const Matrix m = symplectic_from_json(read_input(file));
    validate(m, cfg.tolerances());
    ClassifyOptions opt;
    opt.tol = cfg.tolerances();
    emit(cfg, to_json(classify(m, opt)));
    return Ok;
}

int cmd_trace(const RunConfig& cfg, const std::string& file) {
    const Json in = read_input(file);
    if (in.is_object() && in.empty()) throw InputError("empty path spec");
    const PositivePath p = path_from(in, cfg);
    if (cfg.format == "json")
        emit(cfg, to_json(p));
    else
        write_output(cfg.out, trace_csv(p));
    return Ok;
}

int cmd_collisions(const RunConfig& cfg, const std::string& file) {
    const Json in = read_input(file);
    const PathModel m = model_from(in, cfg);
    CollisionOptions opt;
    opt.intervals = cfg.samples;
    const CollisionReport r = find_collisions(m, opt);
    if (cfg.format == "csv") {
        write_output(cfg.out, events_csv(r));
        return Ok;
    }
    const int n = m.n;
    Json segs = Json::array();
    for (const auto& s : detect_elementary(r)) segs.push_back(to_json(s));
    emit(cfg, Json{{"report", to_json(r)},
                   {"constraints", n == 2 ? to_json(check_collision_constraints(r, n)) : Json(nullptr)},
                   {"elementary", segs}});
    return Ok;
}

bool is_fixture(const std::string& name) {
    for (const auto& f : fixture_registry())
        if (f.name == name) return true;
    return false;
}

int cmd_verify(const RunConfig& cfg, const std::string& name, int trials) {
    if (trials < 1) throw InputError("--trials must be at least 1");
    Json lemmas = Json::array(), fixtures = Json::array();
    bool passed = true;
    if (name == "all" || !is_fixture(name)) {
        std::vector<LemmaReport> reps;
        try {
            reps = verify_lemmas(name, trials, cfg.seed);
        } catch (const std::invalid_argument&) {
            throw InputError("unknown lemma or fixture '" + name + "'");
        }
        for (const auto& r : reps) {
            lemmas.push_back(to_json(r));
            passed = passed && r.passed;
        }
    }
    if (name == "all" || is_fixture(name)) {
        for (const auto& f : fixture_registry()) {
            if (name != "all" && f.name != name) continue;
            const FixtureResult r = f.run();
            fixtures.push_back(to_json(r));
            passed = passed && r.passed();
        }
    }
    emit(cfg, Json{{"target", name}, {"trials", trials}, {"seed", cfg.seed},
                   {"lemmas", lemmas}, {"fixtures", fixtures}, {"passed", passed}});
    return passed ? Ok : ChecksFailed;
}

int cmd_make_loop(const RunConfig& cfg, int n, int m) {
    const Realization r = realize_index(n, m, cfg.tolerances());
    if (!r.realizable) {
        emit(cfg, Json{{"n", n}, {"m", m}, {"unrealizable", true}, {"explanation", r.explanation}});
        return Ok;
    }
    emit(cfg, Json{{"n", n},
                   {"m", m},
                   {"unrealizable", false},
                   {"ks", r.ks},
                   {"index", r.index},
                   {"explanation", r.explanation},
                   {"loop", to_json(r.loop)}});
    return Ok;
}

int cmd_index(const RunConfig& cfg, const std::string& file) {
    const Json in = read_input(file);
    if (in.is_object() && in.value("unrealizable", false)) throw InputError("input holds no loop");
    const PositivePath p = path_from(in, cfg);
    Json j = to_json(loop_index_report(p));
    j["winding"] = p.n == 1 ? to_json(sp2_winding(p)) : Json(nullptr);
    emit(cfg, j);
    return Ok;
}

int cmd_join(const RunConfig& cfg, const std::string& a_file, const std::string& b_file, const std::string& k_arg) {
    int k = 0;
    if (k_arg != "auto") {
        try {
            std::size_t used = 0;
            k = std::stoi(k_arg, &used);
            if (used != k_arg.size() || k < 1) throw std::invalid_argument("k");
        } catch (const std::exception&) {
            throw InputError("--k must be a positive integer or 'auto'");
        }
    }
    const Matrix A = symplectic_from_json(read_input(a_file));
    const Matrix B = symplectic_from_json(read_input(b_file));
    if (A.rows() != B.rows()) throw InputError("A and B differ in size");
    validate(A, cfg.tolerances());
    validate(B, cfg.tolerances());
    JoinResult r = join(A, B, k, cfg.tolerances());
    if (cfg.samples > 0) r.path = sample(r.model, cfg.samples, cfg.tolerances());
    const double start_err = max_abs_diff(r.path.gamma.front(), A);
    const double end_err = max_abs_diff(r.path.gamma.back(), B);
    emit(cfg, Json{{"k", r.k},
                   {"k_requested", k_arg},
                   {"endpoint_error", std::max(start_err, end_err)},
                   {"positive", r.path.positive()},
                   {"path", to_json(r.path)}});
    return Ok;
}

int cmd_fixtures(const RunConfig& cfg, const std::string& name) {
    if (name.empty()) {
        Json list = Json::array();
        for (const auto& f : fixture_registry()) list.push_back({{"name", f.name}, {"description", f.description}});
        emit(cfg, Json{{"fixtures", list}});
        return Ok;
    }
    if (name != "all" && !is_fixture(name)) throw InputError("unknown fixture '" + name + "'");
    Json results = Json::array();
    bool passed = true;
    for (const auto& f : fixture_registry()) {
        if (name != "all" && f.name != name) continue;
        const FixtureResult r = f.run();
        results.push_back(to_json(r));
        passed = passed && r.passed();
    }
    emit(cfg, Json{{"fixtures", results}, {"passed", passed}});
    return passed ? Ok : ChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positive paths in Sp(2n): normal forms, strata, collisions and loop indices"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--tol", cfg.tol, "Band tolerance for unit circle, real axis and +-1 placement");
    app.add_option("--samples", cfg.samples, "Grid intervals on [t0, t1] (at least 64)");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--out", cfg.out, "Output file, stdout when omitted");
    app.add_option("--format", cfg.format, "json or csv");

    std::string file, file_b, name, k_arg = "auto";
    int trials = 50, n = 0, m = 0;

    auto* classify_cmd = app.add_subcommand("classify", "Classify a symplectic matrix");
    classify_cmd->add_option("matrix", file, "Matrix or normal form JSON")->required();
    auto* trace_cmd = app.add_subcommand("trace", "Eigenvalue trajectory of a path");
    trace_cmd->add_option("path", file, "Path spec or path JSON")->required();
    auto* coll_cmd = app.add_subcommand("collisions", "Detect and classify collisions along a path");
    coll_cmd->add_option("path", file, "Path spec or path JSON")->required();
    auto* verify_cmd = app.add_subcommand("verify", "Run a closed-form check, a fixture, or all");
    verify_cmd->add_option("name", name, "Check or fixture name, or all")->required();
    verify_cmd->add_option("--trials", trials, "Random trials per check");
    auto* loop_cmd = app.add_subcommand("make-loop", "Positive loop in Sp(2n) with index 2m");
    loop_cmd->add_option("n", n)->required();
    loop_cmd->add_option("m", m)->required();
    auto* index_cmd = app.add_subcommand("index", "Index of a positive loop");
    index_cmd->add_option("loop", file, "Loop JSON, path JSON, or path spec")->required();
    auto* join_cmd = app.add_subcommand("join", "Positive path from A to B");
    join_cmd->add_option("A", file)->required();
    join_cmd->add_option("B", file_b)->required();
    join_cmd->add_option("--k", k_arg, "Twist count or auto");
    auto* fix_cmd = app.add_subcommand("fixtures", "List fixtures, or run one or all");
    fix_cmd->add_option("name", name, "Fixture name or all");

    // option values may follow the subcommand as well
    for (auto* sub : {classify_cmd, trace_cmd, coll_cmd, verify_cmd, loop_cmd, index_cmd, join_cmd, fix_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return BadInput;
    }

    try {
        cfg.validate();
        if (*classify_cmd) return cmd_classify(cfg, file);
        if (*trace_cmd) return cmd_trace(cfg, file);
        if (*coll_cmd) return cmd_collisions(cfg, file);
        if (*verify_cmd) return cmd_verify(cfg, name, trials);
        if (*loop_cmd) return cmd_make_loop(cfg, n, m);
        if (*index_cmd) return cmd_index(cfg, file);
        if (*join_cmd) return cmd_join(cfg, file, file_b, k_arg);
        if (*fix_cmd) return cmd_fixtures(cfg, name);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return Numerical;
    }
    return BadInput;
}
