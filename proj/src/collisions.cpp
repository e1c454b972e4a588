#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sympath/collisions.hpp"

namespace sympath {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double bisect(const std::function<double(double)>& f, double a, double b, double fa, double resolution) {
    while (b - a > resolution) {
        const double c = 0.5 * (a + b);
        const double fc = f(c);
        if (fc == 0.0) return c;
        if (sgn(fc) == sgn(fa)) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    return 0.5 * (a + b);
}

double golden_min(const std::function<double(double)>& g, double a, double b, double resolution) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > resolution) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return 0.5 * (a + b);
}

PathModel evaluable(const PathModel& m, int intervals) {
    if (m.closed_form()) return m;
    return interpolate(sample(m, intervals));
}

}  // namespace

DeltaTrace scalar_trace(const PathModel& m0, ScalarOfMatrix f, int intervals, double resolution) {
    const PathModel m = evaluable(m0, intervals);
    DeltaTrace out;
    out.t = uniform_grid(m.t0, m.t1, intervals);
    const auto g = [&](double t) { return f(m.gamma(t)); };
    for (double t : out.t) out.delta.push_back(g(t));
    const std::size_t N = out.t.size();
    double scale = 1.0;
    for (double v : out.delta) scale = std::max(scale, std::abs(v));
    const double zero_band = 1e-9 * scale;
    // samples below the noise floor count as zeros
    const double noise = 1e-12 * scale;
    std::vector<double> sg(N);
    for (std::size_t k = 0; k < N; ++k) sg[k] = std::abs(out.delta[k]) <= noise ? 0.0 : sgn(out.delta[k]);
    for (std::size_t k = 0; k + 1 < N; ++k) {
        if (sg[k] == 0.0) continue;
        std::size_t j = k + 1;
        while (j < N && sg[j] == 0.0) ++j;
        if (j == N) break;
        if (j == k + 1) {
            if (sg[j] != sg[k]) {
                const double t = bisect(g, out.t[k], out.t[j], out.delta[k], resolution);
                out.roots.push_back({t, RootKind::SignChange, sg[k], sg[j]});
            }
            continue;
        }
        // run of zero samples strictly between k and j
        const double t = golden_min([&](double s) { return std::abs(g(s)); }, out.t[k], out.t[j], resolution);
        out.roots.push_back({t, sg[j] != sg[k] ? RootKind::SignChange : RootKind::Touch, sg[k], sg[j]});
        k = j - 1;
    }
    for (std::size_t k = 1; k + 1 < N; ++k) {
        if (sg[k - 1] != sg[k] || sg[k] != sg[k + 1] || sg[k] == 0.0) continue;
        const double a = out.delta[k - 1], b = out.delta[k], c = out.delta[k + 1];
        if (!(std::abs(b) <= std::abs(a) && std::abs(b) <= std::abs(c))) continue;
        const double t = golden_min([&](double s) { return std::abs(g(s)); }, out.t[k - 1], out.t[k + 1], resolution);
        if (std::abs(g(t)) <= zero_band) out.roots.push_back({t, RootKind::Touch, sg[k], sg[k]});
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const DeltaRoot& x, const DeltaRoot& y) { return x.t < y.t; });
    return out;
}

DeltaTrace delta_trace(const PathModel& m, int intervals, double resolution) {
    if (m.n != 2 && m.n != 3) throw DimensionError("delta_trace needs n = 2 or 3");
    return scalar_trace(m, [](const Matrix& x) { return discriminant(x); }, intervals, resolution);
}

DeltaTrace delta_trace(const PositivePath& p, double resolution) {
    return delta_trace(interpolate(p), static_cast<int>(p.size()) - 1, resolution);
}

std::string sign_change_name(SignChange s) {
    switch (s) {
        case SignChange::PlusToMinus: return "+to-";
        case SignChange::MinusToPlus: return "-to+";
        case SignChange::Touch: return "touch";
    }
    return "touch";
}

std::string stratum_family(const std::string& name) {
    if (name == "B_U_plus" || name == "B_U_minus") return "B_U";
    return name;
}

std::optional<bool> strata_adjacent(const std::string& event, const std::string& a, const std::string& b, int n) {
    static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> table = {
        {"B_U", {{"O_U", "O_C"}}},
        {"B_R", {{"O_R", "O_C"}}},
        {"B_U_pm1", {{"O_UR", "O_U"}}},
        {"B_R_pm1", {{"O_R", "O_UR"}}},
        {"B_UD", {{"O_U", "O_U"}}},
        {"B_RD", {{"O_R", "O_R"}}},
        {"B_pm1", {{"O_U", "O_R"}}},
        {"B_U2", {{"O_U", "O_CU"}}},
        {"B_U3", {{"O_CU", "O_CU"}, {"O_CU", "O_U"}}},
    };
    if (event == "B_pm1" && n != 1) return std::nullopt;
    const auto it = table.find(stratum_family(event));
    if (it == table.end()) return std::nullopt;
    for (const auto& [x, y] : it->second)
        if ((a == x && b == y) || (a == y && b == x)) return true;
    return false;
}

namespace {

ClassifyOptions loose_options() {
    ClassifyOptions o;
    o.cluster_tol = 1e-3;
    o.ambiguity_check = false;
    o.tol.unit_band = 1e-4;
    o.tol.real_band = 1e-4;
    o.tol.pm1_band = 1e-4;
    o.tol.rank_rel = 1e-6;
    return o;
}

std::string side_stratum(const PathModel& m, double t, double dir, double delta, double limit) {
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double s = t + dir * std::min(delta, limit);
        try {
            return classify(m.gamma(s)).stratum.name;
        } catch (const ClassificationAmbiguity&) {
            delta *= 3.0;
        } catch (const NumericalError&) {
            delta *= 3.0;
        }
    }
    return "unresolved";
}

struct Candidate {
    DeltaRoot root;
    std::string source;
};

}  // namespace

CollisionReport find_collisions(const PathModel& m0, const CollisionOptions& opt) {
    const int intervals = opt.intervals > 0 ? opt.intervals : default_intervals(m0);
    const PathModel m = evaluable(m0, intervals);
    CollisionReport rep;
    rep.t0 = m.t0;
    rep.t1 = m.t1;
    std::vector<Candidate> cands;
    auto collect = [&](ScalarOfMatrix f, const std::string& source) {
        for (const auto& r : scalar_trace(m, f, intervals, opt.resolution).roots) cands.push_back({r, source});
    };
    if (m.n == 2 || m.n == 3) collect([](const Matrix& x) { return discriminant(x); }, "delta");
    collect([](const Matrix& x) { return d_plus_one(x); }, "d_plus_one");
    collect([](const Matrix& x) { return d_minus_one(x); }, "d_minus_one");
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.root.t < b.root.t; });

    // coincident roots of several detectors describe one point
    std::vector<Candidate> merged;
    const double merge_tol = std::max(1e-8, 100.0 * opt.resolution);
    for (const auto& c : cands) {
        if (!merged.empty() && c.root.t - merged.back().root.t <= merge_tol) {
            if (merged.back().root.kind == RootKind::Touch && c.root.kind == RootKind::SignChange) merged.back() = c;
            continue;
        }
        merged.push_back(c);
    }
    for (std::size_t i = 1; i < merged.size(); ++i)
        if (merged[i].root.t - merged[i - 1].root.t < 10.0 * merge_tol)
            rep.warnings.push_back("root cluster near t = " + std::to_string(merged[i].root.t) + " is unresolved");

    const double span = m.t1 - m.t0;
    const ClassifyOptions loose = loose_options();
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const Candidate& c = merged[i];
        const double t = c.root.t;
        const Matrix M = m.gamma(t);
        SpectrumReport sr;
        try {
            sr = classify(M, loose);
        } catch (const std::exception& e) {
            rep.warnings.push_back("classification failed at t = " + std::to_string(t) + ": " + e.what());
            continue;
        }
        const EigenGroup* hit = nullptr;
        for (const auto& g : sr.groups) {
            if (c.source == "d_plus_one" && g.location != Location::PlusOne) continue;
            if (c.source == "d_minus_one" && g.location != Location::MinusOne) continue;
            if (c.source == "delta" && g.algebraic < 2) continue;
            if (!hit || (g.geometric < g.algebraic && hit->geometric >= hit->algebraic)) hit = &g;
        }
        if (!hit || hit->geometric >= hit->algebraic) {
            rep.passes.push_back({t, sr.stratum.name, c.source});
            continue;
        }
        CollisionEvent e;
        e.t_star = t;
        e.location = hit->location;
        switch (hit->location) {
            case Location::U: e.location_value = std::abs(std::arg(hit->lambda)); break;
            case Location::R: e.location_value = hit->lambda.real(); break;
            case Location::PlusOne: e.location_value = 1.0; break;
            case Location::MinusOne: e.location_value = -1.0; break;
            case Location::C: e.location_value = std::abs(hit->lambda); break;
        }
        e.multiplicity = hit->algebraic;
        e.geometric = hit->geometric;
        e.stratum = sr.stratum.name;
        const double lo = i > 0 ? t - merged[i - 1].root.t : t - m.t0;
        const double hi = i + 1 < merged.size() ? merged[i + 1].root.t - t : m.t1 - t;
        const double delta = opt.side_offset * span;
        e.stratum_before = side_stratum(m, t, -1.0, delta, 0.4 * lo);
        e.stratum_after = side_stratum(m, t, 1.0, delta, 0.4 * hi);
        if (c.root.kind == RootKind::Touch)
            e.delta_sign_change = SignChange::Touch;
        else
            e.delta_sign_change = c.root.before > 0 ? SignChange::PlusToMinus : SignChange::MinusToPlus;
        e.source = c.source;
        e.adjacent = strata_adjacent(e.stratum, e.stratum_before, e.stratum_after, m.n);
        rep.events.push_back(e);
    }
    return rep;
}

CollisionReport find_collisions(const PositivePath& p, const CollisionOptions& opt) {
    CollisionOptions o = opt;
    if (o.intervals <= 0) o.intervals = static_cast<int>(p.size()) - 1;
    return find_collisions(interpolate(p), o);
}

AlphaFamily alpha_family(const NormalFormSpec& base, double alpha0, double alpha1, int m) {
    if (base.kind != NormalKind::N2 && base.kind != NormalKind::M2 && base.kind != NormalKind::N3 &&
        base.kind != NormalKind::N3tilde)
        throw ConstraintError("alpha families need an N2, M2 or N3 base");
    if (m < 2) throw ConstraintError("alpha family needs at least two samples");
    AlphaFamily f;
    f.base = make_normal(base).m;
    const int n = half_dim(f.base);
    for (int k = 0; k < m; ++k) {
        const double a = alpha0 + (alpha1 - alpha0) * k / (m - 1);
        f.alpha.push_back(a);
        f.values.push_back(validate(f.base * rot2n(n, a)).m);
    }
    return f;
}

double delta_N2_formula(double theta, double b1, double b2, double b3, double alpha) {
    const double b4 = complete_b4(theta, b1, b2, b3, 0.0);
    const double s = std::sin(theta), ca = std::cos(alpha), sa = std::sin(alpha);
    return 8.0 * (b2 - b3) * s * ca * sa + (16.0 * s * s + (b1 - b4) * (b1 - b4) + 4.0 * b2 * b3) * sa * sa;
}

double delta_M2_formula(double lambda, double c1, double c2, double alpha, double c2_sign) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double q = c1 + lambda * c2;
    return c2_sign * 4.0 * c2 * ca * sa + (q * q + 4.0 / (lambda * lambda)) * sa * sa;
}

const std::vector<Monomial>& kocak_terms() {
    // coefficient, powers of beta, lambda1, lambda2
    static const std::vector<Monomial> terms = {
        {27, 0, 0, 4},   {108, 1, 1, 3}, {432, 3, 0, 3}, {4, 0, 3, 2},   {54, 2, 2, 2},
        {864, 4, 1, 2},  {1728, 6, 0, 2}, {16, 1, 4, 1}, {-44, 3, 3, 1}, {432, 5, 2, 1},
        {12, 2, 5, 0},   {11, 4, 4, 0},  {256, 6, 3, 0},
    };
    return terms;
}

double evaluate(const std::vector<Monomial>& poly, double beta, double l1, double l2) {
    double s = 0.0;
    for (const auto& t : poly) s += t.coeff * std::pow(beta, t.beta) * std::pow(l1, t.l1) * std::pow(l2, t.l2);
    return s;
}

std::vector<Monomial> differentiate(const std::vector<Monomial>& poly, int var) {
    if (var != 1 && var != 2) throw std::invalid_argument("differentiate: var must be 1 or 2");
    std::vector<Monomial> out;
    for (const auto& t : poly) {
        const int p = var == 1 ? t.l1 : t.l2;
        if (p == 0) continue;
        Monomial d = t;
        d.coeff *= p;
        (var == 1 ? d.l1 : d.l2) -= 1;
        out.push_back(d);
    }
    return out;
}

KocakValue kocak_discriminant(double beta, double l1, double l2) {
    KocakValue v;
    v.expanded = evaluate(kocak_terms(), beta, l1, l2);
    const double b2 = beta * beta, b3 = b2 * beta;
    const double p = 4.0 * b3 * l2 - 5.0 / 6.0 * b2 * l1 * l1 - beta * l1 * l2 - 0.5 * l2 * l2 - l1 * l1 * l1 / 27.0;
    const double q = -4.0 / 3.0 * b2 * l1 - 2.0 * beta * l2 + l1 * l1 / 9.0;
    v.factored = 108.0 * (p * p - q * q * q);
    v.residual = std::abs(v.expanded - v.factored);
    return v;
}

Matrix kocak_matrix(double beta, double l1, double l2) {
    // block coordinates (x1, x2, x3 | y1, y2, y3)
    return Matrix{{0, 0, 0, -beta, 0, -l2}, {1, 0, l1, 0, -beta, 0}, {0, 1, 0, 0, 0, -beta},
                  {beta, 0, l2, 0, l1, 0},  {0, beta, 0, 1, 0, 0},   {0, 0, beta, 0, 1, 0}};
}

std::string constraint_name(ConstraintStatus s) {
    switch (s) {
        case ConstraintStatus::Satisfied: return "satisfied";
        case ConstraintStatus::Violated: return "violated";
        case ConstraintStatus::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

bool ConstraintReport::satisfied() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ConstraintCheck& c) { return c.status == ConstraintStatus::Satisfied; });
}

namespace {

bool at_pm1(const CollisionEvent& e) { return e.location == Location::PlusOne || e.location == Location::MinusOne; }

bool resolved(const CollisionEvent& e) { return e.stratum_before != "unresolved" && e.stratum_after != "unresolved"; }

}  // namespace

ConstraintReport check_collision_constraints(const CollisionReport& r, int n) {
    if (n != 2 && n != 3) throw DimensionError("collision constraints are stated for n = 2 or 3");
    const std::string u = "O_U", c = n == 2 ? "O_C" : "O_CU";
    const std::string family = n == 2 ? "B_U" : "B_U2";
    ConstraintReport out;
    const auto& ev = r.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const auto& e = ev[i];
        if (stratum_family(e.stratum) != family) continue;
        const bool exit_u = e.stratum_before == u && e.stratum_after == c;
        const bool enter_u = e.stratum_before == c && e.stratum_after == u;
        if (!exit_u && !enter_u) continue;
        ConstraintCheck chk;
        chk.event = i;
        chk.clause = exit_u ? "exit_U" : "enter_U";
        const bool has_nb = exit_u ? i > 0 : i + 1 < ev.size();
        if (!has_nb) {
            chk.status = ConstraintStatus::Inconclusive;
            chk.detail = exit_u ? "no earlier collision on the path" : "no later collision on the path";
            out.checks.push_back(chk);
            continue;
        }
        const auto& nb = exit_u ? ev[i - 1] : ev[i + 1];
        if (!resolved(nb) || !resolved(e)) {
            chk.status = ConstraintStatus::Inconclusive;
            chk.detail = "neighbouring strata unresolved";
        } else if (at_pm1(nb) && (exit_u ? nb.stratum_after == u : nb.stratum_before == u)) {
            chk.status = ConstraintStatus::Satisfied;
            std::ostringstream os;
            os << "pair " << (exit_u ? "departs " : "enters ") << nb.location_value << " at t = " << nb.t_star;
            chk.detail = os.str();
        } else if (n == 3 && stratum_family(nb.stratum) == "B_U3") {
            chk.status = ConstraintStatus::Satisfied;
            chk.detail = "triple collision at t = " + std::to_string(nb.t_star);
        } else {
            chk.status = ConstraintStatus::Violated;
            chk.detail = "neighbouring event " + nb.stratum + " at t = " + std::to_string(nb.t_star);
        }
        out.checks.push_back(chk);
    }
    return out;
}

std::string elementary_name(ElementaryKind k) {
    switch (k) {
        case ElementaryKind::CollideOut: return "collide_out";
        case ElementaryKind::CollideIn: return "collide_in";
        case ElementaryKind::TwoDoubleCollisions: return "two_double_collisions";
    }
    return "collide_out";
}

std::vector<ElementarySegment> detect_elementary(const CollisionReport& r) {
    std::vector<ElementarySegment> out;
    const auto& ev = r.events;
    auto is = [](const CollisionEvent& e, const char* fam, const char* a, const char* b) {
        return stratum_family(e.stratum) == fam && e.stratum_before == a && e.stratum_after == b;
    };
    for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
        const auto& a = ev[i];
        const auto& b = ev[i + 1];
        std::optional<ElementaryKind> kind;
        if (is(a, "B_U_pm1", "O_UR", "O_U") && is(b, "B_U", "O_U", "O_C")) kind = ElementaryKind::CollideOut;
        else if (is(a, "B_U", "O_C", "O_U") && is(b, "B_U_pm1", "O_U", "O_UR")) kind = ElementaryKind::CollideIn;
        else if (is(a, "B_U2", "O_CU", "O_U") && is(b, "B_U2", "O_U", "O_CU"))
            kind = ElementaryKind::TwoDoubleCollisions;
        if (!kind) continue;
        ElementarySegment s;
        s.kind = *kind;
        s.t_begin = i > 0 ? ev[i - 1].t_star : r.t0;
        s.t_end = i + 2 < ev.size() ? ev[i + 2].t_star : r.t1;
        s.first_event = i;
        out.push_back(s);
        ++i;
    }
    return out;
}

}  // namespace sympath
