#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "sympath/io.hpp"

namespace sympath {

namespace {

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json complex_list(const std::vector<Complex>& v) {
    Json a = Json::array();
    for (Complex z : v) a.push_back(complex_json(z));
    return a;
}

Json opt_double(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double get_double(const Json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    if (!j.at(key).is_number()) throw InputError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::vector<double> get_doubles(const Json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    const Json& a = j.at(key);
    if (!a.is_array()) throw InputError(std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : a) {
        if (!x.is_number()) throw InputError(std::string("field '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<Matrix> matrix_list(const Json& a, const char* key) {
    if (!a.is_array()) throw InputError(std::string("field '") + key + "' must be an array of matrices");
    std::vector<Matrix> out;
    for (const auto& m : a) out.push_back(matrix_from_json(m));
    return out;
}

}  // namespace

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (const auto& r : m.to_rows()) rows.push_back(r);
    Json j{{"rows", rows}};
    if (m.rows() == m.cols() && m.rows() % 2 == 0) j["n"] = m.rows() / 2;
    return j;
}

Matrix matrix_from_json(const Json& j) {
    const Json* rows = &j;
    if (j.is_object()) {
        if (!j.contains("rows")) throw InputError("matrix object needs 'rows'");
        rows = &j.at("rows");
    }
    if (!rows->is_array() || rows->empty()) throw InputError("matrix rows must be a non-empty array");
    std::vector<std::vector<double>> data;
    for (const auto& r : *rows) {
        if (!r.is_array()) throw InputError("matrix row must be an array");
        std::vector<double> row;
        for (const auto& x : r) {
            if (!x.is_number()) throw InputError("matrix entries must be numbers");
            row.push_back(x.get<double>());
        }
        if (!data.empty() && row.size() != data.front().size()) throw InputError("matrix rows differ in length");
        data.push_back(std::move(row));
    }
    Matrix m(data.size(), data.front().size());
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t k = 0; k < data[i].size(); ++k) m(i, k) = data[i][k];
    if (j.is_object() && j.contains("n")) {
        if (!j.at("n").is_number_integer() || 2 * j.at("n").get<long>() != static_cast<long>(m.rows()) ||
            m.rows() != m.cols())
            throw InputError("matrix 'n' does not match its rows");
    }
    return m;
}

NormalFormSpec normal_form_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw InputError("normal form needs a string 'kind'");
    NormalFormSpec s;
    try {
        s.kind = parse_kind(j.at("kind").get<std::string>());
    } catch (const ConstraintError& e) {
        throw InputError(e.what());
    }
    switch (s.kind) {
        case NormalKind::D: s.params = {get_double(j, "lambda")}; break;
        case NormalKind::R: s.params = {get_double(j, "theta")}; break;
        case NormalKind::N1: s.params = {get_double(j, "lambda"), get_double(j, "a")}; break;
        case NormalKind::M2: {
            const auto c = get_doubles(j, "c");
            if (c.size() != 2) throw InputError("M2 needs c = [c1, c2]");
            s.params = {get_double(j, "lambda"), c[0], c[1]};
            break;
        }
        default: {
            const auto b = get_doubles(j, "b");
            if (b.size() != 3 && b.size() != 4) throw InputError("normal form needs b = [b1, b2, b3] or four entries");
            s.params = {get_double(j, "theta")};
            s.params.insert(s.params.end(), b.begin(), b.end());
        }
    }
    return s;
}

Json to_json(const NormalFormSpec& s) {
    Json j{{"kind", kind_name(s.kind)}};
    const auto& p = s.params;
    switch (s.kind) {
        case NormalKind::D: j["lambda"] = p.at(0); break;
        case NormalKind::R: j["theta"] = p.at(0); break;
        case NormalKind::N1:
            j["lambda"] = p.at(0);
            j["a"] = p.at(1);
            break;
        case NormalKind::M2:
            j["lambda"] = p.at(0);
            j["c"] = {p.at(1), p.at(2)};
            break;
        default: j["theta"] = p.at(0); j["b"] = std::vector<double>(p.begin() + 1, p.end());
    }
    return j;
}

Matrix symplectic_from_json(const Json& j) {
    if (j.is_object() && j.contains("kind")) return make_normal(normal_form_from_json(j)).m;
    return matrix_from_json(j);
}

TauSpec tau_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("tau must be an object");
    if (j.contains("through")) {
        const auto v = get_doubles(j, "through");
        if (v.size() != 2) throw InputError("tau 'through' needs [a, b]");
        const double t0 = j.value("t0", 0.0), t1 = j.value("t1", 1.0);
        return TauSpec::through(t0, t1, v[0], v[1]);
    }
    TauSpec t{get_doubles(j, "knots"), get_doubles(j, "values"), get_doubles(j, "slopes")};
    try {
        check_tau(t);
    } catch (const PathError& e) {
        throw InputError(e.what());
    }
    return t;
}

PathSpec path_spec_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw InputError("path spec needs a string 'kind'");
    PathSpec s;
    s.kind = j.at("kind").get<std::string>();
    static const std::vector<std::string> kinds = {"samples", "rotation_loop", "alpha_family", "join",
                                                   "product", "conjugated",    "retimed",      "concat"};
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end())
        throw InputError("unknown path kind '" + s.kind + "'");
    if (j.contains("t0")) s.t0 = get_double(j, "t0");
    if (j.contains("t1")) s.t1 = get_double(j, "t1");
    if (j.contains("ks")) {
        for (const auto& k : j.at("ks")) {
            if (!k.is_number_integer()) throw InputError("ks must hold integers");
            s.ks.push_back(k.get<int>());
        }
    }
    if (j.contains("base")) s.base = normal_form_from_json(j.at("base"));
    if (j.contains("A")) s.A = symplectic_from_json(j.at("A"));
    if (j.contains("B")) s.B = symplectic_from_json(j.at("B"));
    if (j.contains("k")) {
        if (!j.at("k").is_number_integer()) throw InputError("k must be an integer");
        s.k = j.at("k").get<int>();
    }
    if (j.contains("gamma0")) s.gamma0 = symplectic_from_json(j.at("gamma0"));
    if (j.contains("knot_t")) s.knot_t = get_doubles(j, "knot_t");
    if (j.contains("knot_P")) s.knot_P = matrix_list(j.at("knot_P"), "knot_P");
    if (j.contains("X0")) s.X0 = symplectic_from_json(j.at("X0"));
    if (j.contains("Y")) s.Y = matrix_from_json(j.at("Y"));
    if (j.contains("tau")) s.tau = tau_from_json(j.at("tau"));
    if (j.contains("window")) s.window = get_double(j, "window");
    if (j.contains("children")) {
        if (!j.at("children").is_array()) throw InputError("children must be an array");
        for (const auto& c : j.at("children")) s.children.push_back(path_spec_from_json(c));
    }
    if (s.kind == "rotation_loop" && s.ks.empty()) throw InputError("rotation_loop needs ks");
    if (s.kind == "alpha_family" && s.base.params.empty()) throw InputError("alpha_family needs base");
    if (s.kind == "join" && (s.A.rows() == 0 || s.B.rows() == 0)) throw InputError("join needs A and B");
    if (s.kind == "conjugated" && s.X0.rows() == 0) throw InputError("conjugated needs X0");
    if (s.kind == "retimed" && s.tau.knots.empty()) throw InputError("retimed needs tau");
    if (s.kind == "samples" && s.gamma0.rows() == 0) throw InputError("samples needs gamma0");
    return s;
}

Json to_json(const SpectrumReport& r) {
    Json groups = Json::array();
    for (const auto& g : r.groups)
        groups.push_back({{"location", location_name(g.location)},
                          {"lambda", complex_json(g.lambda)},
                          {"algebraic", g.algebraic},
                          {"geometric", g.geometric},
                          {"mu", complex_json(g.mu)}});
    return Json{{"n", r.n},
                {"eigenvalues", complex_list(r.eigenvalues)},
                {"groups", groups},
                {"sigma", r.sigma},
                {"mu", complex_list(r.mu)},
                {"delta", r.has_delta ? Json(r.delta) : Json(nullptr)},
                {"stratum", {{"name", r.stratum.name}, {"detail", r.stratum.detail}}}};
}

Json to_json(const PositivePath& p) {
    Json g = Json::array(), P = Json::array();
    for (const auto& m : p.gamma) g.push_back(to_json(m)["rows"]);
    for (const auto& m : p.P) P.push_back(to_json(m)["rows"]);
    return Json{{"n", p.n},
                {"t", p.t},
                {"gamma", g},
                {"P", P},
                {"min_eig_P", p.min_eig_P},
                {"symp_defect", p.symp_defect},
                {"fd_constant", p.fd_constant}};
}

PositivePath positive_path_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("path must be an object");
    PositivePath p;
    p.t = get_doubles(j, "t");
    if (!j.contains("gamma") || !j.contains("P")) throw InputError("path needs 'gamma' and 'P'");
    p.gamma = matrix_list(j.at("gamma"), "gamma");
    p.P = matrix_list(j.at("P"), "P");
    if (p.t.size() < 2 || p.gamma.size() != p.t.size() || p.P.size() != p.t.size())
        throw InputError("path arrays t, gamma and P must have equal length >= 2");
    for (std::size_t k = 0; k + 1 < p.t.size(); ++k)
        if (!(p.t[k] < p.t[k + 1])) throw InputError("path times must increase");
    p.n = half_dim(p.gamma.front());
    for (const auto& g : p.gamma)
        if (g.rows() != p.gamma.front().rows() || g.cols() != g.rows()) throw InputError("path matrices differ in size");
    certify(p);
    return p;
}

Json to_json(const WindingRecord& w) {
    return Json{{"t", w.t},
                {"lifted_theta", w.lifted_theta},
                {"winding", w.winding},
                {"loop", w.loop},
                {"increasing", w.increasing},
                {"index", w.index ? Json(*w.index) : Json(nullptr)}};
}

Json to_json(const LoopIndex& l) {
    return Json{{"index", l.index},
                {"block_windings", l.block_windings},
                {"determinant_index", l.determinant_index},
                {"method", l.method},
                {"note", l.note}};
}

Json to_json(const CollisionEvent& e) {
    return Json{{"t_star", e.t_star},
                {"location", location_name(e.location)},
                {"location_value", e.location_value},
                {"multiplicity", e.multiplicity},
                {"geometric", e.geometric},
                {"stratum", e.stratum},
                {"stratum_before", e.stratum_before},
                {"stratum_after", e.stratum_after},
                {"delta_sign_change", sign_change_name(e.delta_sign_change)},
                {"source", e.source},
                {"adjacent", e.adjacent ? Json(*e.adjacent) : Json(nullptr)}};
}

Json to_json(const CollisionReport& r) {
    Json ev = Json::array(), ps = Json::array();
    for (const auto& e : r.events) ev.push_back(to_json(e));
    for (const auto& p : r.passes) ps.push_back({{"t", p.t}, {"stratum", p.stratum}, {"source", p.source}});
    return Json{{"t0", r.t0}, {"t1", r.t1}, {"events", ev}, {"passes", ps}, {"warnings", r.warnings}};
}

Json to_json(const ConstraintReport& r) {
    Json c = Json::array();
    for (const auto& x : r.checks)
        c.push_back({{"event", x.event},
                     {"clause", x.clause},
                     {"status", constraint_name(x.status)},
                     {"detail", x.detail}});
    return Json{{"checks", c}, {"satisfied", r.satisfied()}};
}

Json to_json(const ElementarySegment& s) {
    return Json{{"kind", elementary_name(s.kind)},
                {"t_begin", s.t_begin},
                {"t_end", s.t_end},
                {"first_event", s.first_event}};
}

Json to_json(const LemmaReport& r) {
    return Json{{"lemma", r.lemma},
                {"trials", r.trials},
                {"worst_residual", opt_double(r.worst_residual)},
                {"passed", r.passed},
                {"failures", r.failures},
                {"notes", r.notes}};
}

Json to_json(const FixtureResult& r) {
    Json c = Json::array();
    for (const auto& x : r.checks)
        c.push_back({{"name", x.name}, {"passed", x.passed}, {"value", opt_double(x.value)}, {"detail", x.detail}});
    return Json{{"fixture", r.name}, {"passed", r.passed()}, {"checks", c}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

std::string format_double(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string events_csv(const CollisionReport& r) {
    std::ostringstream os;
    os << "t,location_kind,location_value,multiplicity,stratum_before,stratum_after,stratum,delta_sign_change\n";
    for (const auto& e : r.events)
        os << format_double(e.t_star) << ',' << location_name(e.location) << ',' << format_double(e.location_value)
           << ',' << e.multiplicity << ',' << e.stratum_before << ',' << e.stratum_after << ',' << e.stratum << ','
           << sign_change_name(e.delta_sign_change) << '\n';
    return os.str();
}

std::string trace_csv(const PositivePath& p) {
    const std::size_t d = 2 * static_cast<std::size_t>(p.n);
    std::ostringstream os;
    os << 't';
    for (std::size_t i = 1; i <= d; ++i) os << ",re_" << i << ",im_" << i;
    os << ",delta,stratum\n";
    std::vector<Complex> prev;
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::vector<Complex> ev = eigenvalues(p.gamma[k]);
        if (prev.empty()) {
            std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
                return std::arg(a) != std::arg(b) ? std::arg(a) < std::arg(b) : std::abs(a) < std::abs(b);
            });
        } else {
            // greedy matching by increasing distance to the previous sample
            std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) pairs.emplace_back(std::abs(prev[i] - ev[j]), i, j);
            std::sort(pairs.begin(), pairs.end());
            std::vector<Complex> out(d);
            std::vector<bool> used_i(d, false), used_j(d, false);
            for (const auto& [dist, i, j] : pairs) {
                if (used_i[i] || used_j[j]) continue;
                out[i] = ev[j];
                used_i[i] = used_j[j] = true;
            }
            ev = out;
        }
        prev = ev;
        os << format_double(p.t[k]);
        for (Complex z : ev) os << ',' << format_double(z.real()) << ',' << format_double(z.imag());
        os << ',';
        if (p.n == 2 || p.n == 3) os << format_double(discriminant(p.gamma[k]));
        os << ',';
        try {
            os << classify(p.gamma[k]).stratum.name;
        } catch (const ClassificationAmbiguity&) {
            os << "ambiguous";
        }
        os << '\n';
    }
    return os.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw InputError("cannot replace " + path + ": " + ec.message());
    }
}

}  // namespace sympath
