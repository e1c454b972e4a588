#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sympath/fixtures.hpp"
#include "sympath/lemmas.hpp"

using namespace sympath;

namespace {

constexpr std::uint64_t kSeed = 20240601;

// pinned acceptance tolerances
constexpr double kClosedFormRel = 1e-7;
constexpr double kConjugationRel = 1e-6;
constexpr double kJoinEndpoint = 1e-9;
constexpr int kJoinMaxK = 8;
constexpr double kCuspRel = 1e-6;
constexpr double kN2Seconds = 10.0;
constexpr double kCollideOutSeconds = 5.0;
constexpr double kDeltaDecided = 1e-8;
constexpr double kPlacementBand = 1e-7;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string summary(const LemmaReport& r) {
    std::ostringstream os;
    os << r.lemma << " " << r.trials << " trials, worst " << r.worst_residual << ", " << r.failures.size()
       << " failures";
    for (const auto& n : r.notes) os << "; " << n;
    if (!r.failures.empty()) os << "; first failure: " << r.failures.front();
    return os.str();
}

bool lemma_ok(const LemmaReport& r, double limit) { return r.passed && r.worst_residual <= limit; }

Outcome criterion_n2() {
    const auto t0 = std::chrono::steady_clock::now();
    const LemmaReport r = verify_lemma("n2-family", 200, kSeed);
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << summary(r) << ", " << secs << " s";
    return {lemma_ok(r, kClosedFormRel) && secs < kN2Seconds, os.str()};
}

Outcome criterion_m2() {
    const LemmaReport u = verify_lemma("m2-unit-family", 200, kSeed);
    const LemmaReport g = verify_lemma("m2-family", 200, kSeed + 1);
    return {lemma_ok(u, kClosedFormRel) && lemma_ok(g, kClosedFormRel), summary(u) + " | " + summary(g)};
}

Outcome criterion_n3() {
    const LemmaReport r = verify_lemma("n3-family", 20, kSeed);
    return {r.passed, summary(r)};
}

Outcome criterion_positivity() {
    const LemmaReport p = verify_lemma("product", 100, kSeed);
    const LemmaReport q = verify_lemma("rotation-perturbation", 100, kSeed + 1);
    const LemmaReport c = verify_lemma("conjugation", 50, kSeed + 2);
    return {p.passed && q.passed && lemma_ok(c, kConjugationRel),
            summary(p) + " | " + summary(q) + " | " + summary(c)};
}

Outcome criterion_join() {
    Rng rng(kSeed);
    double worst = 0.0;
    int worst_k = 0, bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix A = random_symplectic(2, rng), B = random_symplectic(2, rng);
        const JoinResult j = join(A, B);
        const double err =
            std::max(max_abs_diff(j.path.gamma.front(), A), max_abs_diff(j.path.gamma.back(), B));
        const PositivityCertificate cert = verify_positive(j.path);
        worst = std::max(worst, err);
        worst_k = std::max(worst_k, j.k);
        if (!(err <= kJoinEndpoint && j.path.positive() && cert.ok && j.k <= kJoinMaxK)) ++bad;
    }
    std::ostringstream os;
    os << "50 joins, worst endpoint error " << worst << ", largest k " << worst_k << ", " << bad << " failures";
    return {bad == 0, os.str()};
}

Outcome criterion_sp2_angle() {
    const LemmaReport r = verify_lemma("sp2-angle", 100, kSeed);
    return {r.passed, summary(r)};
}

Outcome criterion_index() {
    std::ostringstream os;
    bool ok = true;
    for (int k = 1; k <= 5; ++k) {
        const PositivePath loop = sample(rotation_loop({k}), 2048);
        const int idx = loop_index(loop);
        if (idx != 2 * k) {
            ok = false;
            os << "rotation k=" << k << " gave " << idx << "; ";
        }
    }
    int realized = 0;
    for (int n = 1; n <= 3; ++n) {
        for (int m = n; m <= n + 3; ++m) {
            const Realization r = realize_index(n, m);
            const bool good = r.realizable && r.loop.positive() && loop_index(r.loop) == 2 * m &&
                              max_abs_diff(r.loop.gamma.front(), r.loop.gamma.back()) <= 1e-9;
            if (good)
                ++realized;
            else {
                ok = false;
                os << "realize(" << n << "," << m << ") failed; ";
            }
        }
    }
    for (const auto& [n, m] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}}) {
        if (realize_index(n, m).realizable) {
            ok = false;
            os << "realize(" << n << "," << m << ") should be unrealizable; ";
        }
    }
    os << "rotation loops k=1..5, " << realized << "/12 realized loops with index 2m, m<n unrealizable";
    return {ok, os.str()};
}

// real mu pairs from eigenvalue placement alone
int real_mu_count(const Matrix& m) {
    int off_c = 0;
    for (Complex z : eigenvalues(m))
        if (std::abs(z.imag()) <= kPlacementBand || std::abs(std::abs(z) - 1.0) <= kPlacementBand) ++off_c;
    return off_c / 2;
}

Outcome criterion_strata() {
    Rng rng(kSeed);
    int disagree = 0, undecided = 0, varied = 0, conj_bad = 0;
    int neg4 = 0, pos4 = 0, neg6 = 0, pos6 = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = trial < 500 ? 2 : 3;
        const Matrix m = random_symplectic(n, rng);
        const double d = discriminant(m);
        const int real = real_mu_count(m);
        if (std::abs(d) <= kDeltaDecided) {
            ++undecided;
        } else if (n == 2) {
            (d > 0 ? pos4 : neg4)++;
            if ((d > 0) != (real == 2)) ++disagree;
        } else {
            (d > 0 ? pos6 : neg6)++;
            if ((d < 0) != (real == 3)) ++disagree;
        }
        const Matrix x = random_symplectic(n, rng);
        std::string a, b;
        try {
            a = classify(m).stratum.name;
        } catch (const ClassificationAmbiguity&) {
            a = "ambiguous";
        }
        try {
            b = classify(conjugate(m, x)).stratum.name;
        } catch (const ClassificationAmbiguity&) {
            b = "ambiguous";
        }
        if (a != b) ++conj_bad;
        if (a != "O_C") ++varied;
    }
    std::ostringstream os;
    os << "Sp(4) delta>0 " << pos4 << " / <0 " << neg4 << ", Sp(6) delta>0 " << pos6 << " / <0 " << neg6
       << ", undecided " << undecided << ", sign disagreements " << disagree << ", conjugation mismatches "
       << conj_bad << ", non-O_C samples " << varied;
    return {disagree == 0 && conj_bad == 0, os.str()};
}

Outcome criterion_cusp() {
    const LemmaReport r = verify_lemma("cusp", 100, kSeed);
    return {lemma_ok(r, kCuspRel), summary(r)};
}

Outcome criterion_collide_out() {
    const auto t0 = std::chrono::steady_clock::now();
    const double pi = std::numbers::pi;
    const ElementaryPath e = fixture_elementary_collide_out(pi / 4, pi / 2, 2.0);
    const CollisionReport rep = find_collisions(e.model);
    const ConstraintReport cr = check_collision_constraints(rep, 2);
    const double secs = seconds_since(t0);
    std::vector<std::string> strata;
    std::ostringstream os;
    bool ok = e.path.positive() && rep.events.size() == 2;
    if (ok) {
        const auto& a = rep.events[0];
        const auto& b = rep.events[1];
        ok = stratum_family(a.stratum) == "B_U_pm1" && a.location == Location::PlusOne &&
             stratum_family(b.stratum) == "B_U";
        strata = {a.stratum_before, stratum_family(a.stratum), a.stratum_after, stratum_family(b.stratum),
                  b.stratum_after};
        const std::vector<std::string> want = {"O_UR", "B_U_pm1", "O_U", "B_U", "O_C"};
        ok = ok && strata == want && b.stratum_before == "O_U";
    }
    const auto seg = detect_elementary(rep);
    ok = ok && seg.size() == 1 && seg[0].kind == ElementaryKind::CollideOut;
    ok = ok && !cr.checks.empty() && cr.satisfied() && secs < kCollideOutSeconds;
    os << rep.events.size() << " events, strata";
    for (const auto& s : strata) os << " " << s;
    os << ", constraints " << (cr.satisfied() ? "satisfied" : "violated") << " (" << cr.checks.size()
       << " checks), " << secs << " s";
    return {ok, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"n2-closed-form", criterion_n2},
        {"m2-closed-forms", criterion_m2},
        {"n3-second-order", criterion_n3},
        {"positivity-calculus", criterion_positivity},
        {"join", criterion_join},
        {"sp2-angle", criterion_sp2_angle},
        {"loop-index", criterion_index},
        {"strata-discriminant", criterion_strata},
        {"kocak-cusp", criterion_cusp},
        {"collide-out-pipeline", criterion_collide_out},
    };
    int failed = 0, number = 0;
    for (const auto& [name, fn] : criteria) {
        ++number;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << number << " " << name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
