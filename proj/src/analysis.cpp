#include "bellsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "bellsim/error.hpp"

namespace bellsim {

namespace {

constexpr double kTsirelson = 2.8284271247461903;  // 2 sqrt(2)

std::string describe(const Setting &s) {
    std::ostringstream out;
    auto one = [&](const Basis &b) {
        if (b.is_circular()) {
            out << "circular";
        } else {
            out << b.primary.degrees() << " deg";
        }
    };
    out << "(A ";
    one(s.a);
    out << ", B ";
    one(s.b);
    out << ")";
    return out.str();
}

// Distinct linear angles, ascending, compared with a small tolerance.
std::vector<PolAngle> distinct_angles(const std::vector<PolAngle> &in) {
    std::vector<PolAngle> out;
    for (PolAngle a : in) {
        bool seen = std::any_of(out.begin(), out.end(),
                                [&](PolAngle b) { return std::fabs(a.radians() - b.radians()) < 1e-9; });
        if (!seen) {
            out.push_back(a);
        }
    }
    std::sort(out.begin(), out.end(), [](PolAngle x, PolAngle y) { return x.radians() < y.radians(); });
    return out;
}

}  // namespace

CorrelationTerm correlation_term(const SettingTally &tally) {
    double same = static_cast<double>(tally.cells[0][0] + tally.cells[1][1]);
    double diff = static_cast<double>(tally.cells[0][1] + tally.cells[1][0]);
    double total = same + diff;
    if (total <= 0.0) {
        throw InsufficientData("insufficient data: no conclusive coincidences for setting " + describe(tally.setting));
    }
    CorrelationTerm t;
    t.E = (same - diff) / total;
    t.sigma = 2.0 * std::sqrt(same * diff / (total * total * total));
    return t;
}

ChshSigns chsh_signs_for_angles(PolAngle a1, PolAngle a2, PolAngle b1, PolAngle b2) {
    const std::array<std::pair<PolAngle, PolAngle>, 4> pairs{{{a1, b1}, {a1, b2}, {a2, b1}, {a2, b2}}};
    std::array<int, 4> sgn{};
    for (std::size_t i = 0; i < 4; ++i) {
        double e = -std::cos(2.0 * (pairs[i].first.radians() - pairs[i].second.radians()));
        if (std::fabs(e) < 1e-12) {
            return kTextbookChshSigns;
        }
        sgn[i] = e > 0 ? 1 : -1;
    }
    int positives = static_cast<int>(std::count(sgn.begin(), sgn.end(), 1));
    int odd_sign;
    if (positives == 1) {
        odd_sign = 1;
    } else if (positives == 3) {
        odd_sign = -1;
    } else {
        return kTextbookChshSigns;
    }
    ChshSigns signs{+1, +1, +1, +1};
    for (std::size_t i = 0; i < 4; ++i) {
        if (sgn[i] == odd_sign) {
            signs[i] = -1;
        }
    }
    return signs;
}

ChshLayout chsh_layout(const CoincidenceTable &table) {
    std::vector<PolAngle> as;
    std::vector<PolAngle> bs;
    for (const auto &t : table.settings) {
        if (t.setting.a.is_circular() || t.setting.b.is_circular()) {
            throw InvalidArgument("CHSH analysis needs linear analyzers only");
        }
        as.push_back(t.setting.a.primary);
        bs.push_back(t.setting.b.primary);
    }
    auto a = distinct_angles(as);
    auto b = distinct_angles(bs);
    if (a.size() != 2 || b.size() != 2) {
        std::ostringstream msg;
        msg << "CHSH analysis needs exactly two A angles and two B angles, got " << a.size() << " and " << b.size();
        throw InvalidArgument(msg.str());
    }
    ChshLayout layout;
    layout.a1 = a[0];
    layout.a2 = a[1];
    layout.b1 = b[0];
    layout.b2 = b[1];
    const std::array<std::pair<PolAngle, PolAngle>, 4> want{{{a[0], b[0]}, {a[0], b[1]}, {a[1], b[0]}, {a[1], b[1]}}};
    static constexpr std::array<const char *, 4> names{"(a1,b1)", "(a1,b2)", "(a2,b1)", "(a2,b2)"};
    for (std::size_t i = 0; i < 4; ++i) {
        Setting s{Basis::linear(want[i].first), Basis::linear(want[i].second)};
        layout.terms[i] = table.find(s);
        if (layout.terms[i] == nullptr) {
            throw InvalidArgument(std::string("missing CHSH setting ") + names[i] + " " + describe(s));
        }
    }
    layout.signs = chsh_signs_for_angles(layout.a1, layout.a2, layout.b1, layout.b2);
    return layout;
}

BellEstimate chsh_from_terms(const std::array<CorrelationTerm, 4> &terms, const ChshSigns &signs,
                             double success_probability) {
    BellEstimate est;
    est.signs = signs;
    double sum = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        est.E[i] = terms[i].E;
        est.sigma_E[i] = terms[i].sigma;
        sum += signs[i] * terms[i].E;
        var += terms[i].sigma * terms[i].sigma;
    }
    est.S = std::fabs(sum);
    est.sigma_S = std::sqrt(var);
    est.success_probability = success_probability;
    est.super_quantum = est.S > kTsirelson + 1e-12;
    return est;
}

BellEstimate chsh(const CoincidenceTable &table) {
    ChshLayout layout = chsh_layout(table);
    std::array<CorrelationTerm, 4> terms;
    CoincidenceTable used;
    for (std::size_t i = 0; i < 4; ++i) {
        terms[i] = correlation_term(*layout.terms[i]);
        used.settings.push_back(*layout.terms[i]);
    }
    return chsh_from_terms(terms, layout.signs, success_probability(used));
}

double success_probability(const CoincidenceTable &table) {
    std::uint64_t trials = table.total_trials();
    if (trials == 0) {
        throw InsufficientData("insufficient data: no trials recorded");
    }
    return static_cast<double>(table.total_conclusive()) / static_cast<double>(trials);
}

VisibilityEstimate visibility_direct(const SettingTally &tally, std::string label) {
    const Basis &a = tally.setting.a;
    const Basis &b = tally.setting.b;
    bool matched = a.kind == b.kind &&
                   (a.is_circular() || std::fabs(a.primary.radians() - b.primary.radians()) < 1e-9);
    if (!matched) {
        throw InvalidArgument("direct visibility needs identical A and B bases, got " + describe(tally.setting));
    }
    CorrelationTerm t = correlation_term(tally);
    VisibilityEstimate v;
    v.label = std::move(label);
    v.V = std::fabs(t.E);
    v.sigma = t.sigma;
    v.method = VisibilityMethod::direct;
    v.anticorrelated = t.E < 0.0;
    return v;
}

VisibilityEstimate visibility_fringe_fit(std::span<const std::pair<double, double>> scan, std::string label) {
    if (scan.size() < 8) {
        throw InvalidArgument("fringe fit needs at least 8 scan points");
    }
    double lo = scan.front().first;
    double hi = scan.front().first;
    for (const auto &[alpha, count] : scan) {
        if (!std::isfinite(alpha) || !std::isfinite(count) || count < 0.0) {
            throw InvalidArgument("fringe scan points must be finite with non-negative counts");
        }
        lo = std::min(lo, alpha);
        hi = std::max(hi, alpha);
    }
    if (hi - lo < 180.0 - 1e-9) {
        throw InvalidArgument("fringe scan must span at least 180 degrees of alpha");
    }

    const auto n = static_cast<Eigen::Index>(scan.size());
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    Eigen::VectorXd w(n);
    constexpr double deg = std::numbers::pi / 180.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double a2 = 2.0 * scan[static_cast<std::size_t>(i)].first * deg;
        double c = scan[static_cast<std::size_t>(i)].second;
        X(i, 0) = 1.0;
        X(i, 1) = std::cos(a2);
        X(i, 2) = std::sin(a2);
        y(i) = c;
        w(i) = 1.0 / std::max(c, 1.0);  // Poisson variance
    }
    Eigen::Matrix3d normal = X.transpose() * w.asDiagonal() * X;
    Eigen::Vector3d rhs = X.transpose() * w.asDiagonal() * y;
    Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) {
        throw FitFailure("fringe fit failed: degenerate scan design");
    }
    Eigen::Vector3d c = ldlt.solve(rhs);
    Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
    if (!c.allFinite() || c(0) <= 0.0) {
        throw FitFailure("fringe fit failed: non-positive mean count");
    }

    double amp = std::hypot(c(1), c(2));
    double V = amp / c(0);
    if (!std::isfinite(V) || V > 1.05) {
        std::ostringstream msg;
        msg << "fringe fit failed: visibility " << V << " exceeds 1.05";
        throw FitFailure(msg.str());
    }

    Eigen::Vector3d grad;
    if (amp > 0.0) {
        grad << -amp / (c(0) * c(0)), c(1) / (amp * c(0)), c(2) / (amp * c(0));
    } else {
        grad << 0.0, 1.0 / c(0), 0.0;
    }
    double var = grad.dot(cov * grad);

    VisibilityEstimate v;
    v.label = std::move(label);
    v.V = V;
    v.sigma = std::sqrt(std::max(var, 0.0));
    v.method = VisibilityMethod::fringe_fit;
    double phase = 0.5 * std::atan2(c(2), c(1)) / deg;
    if (phase < 0.0) {
        phase += 180.0;
    }
    v.phase_deg = amp > 0.0 ? phase : 0.0;
    return v;
}

double WitnessResult::significance() const noexcept {
    double excess = total - bound;
    if (sigma_total > 0.0) {
        return excess / sigma_total;
    }
    if (excess == 0.0) {
        return 0.0;
    }
    return excess > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

namespace {

WitnessResult witness_of(std::initializer_list<const VisibilityEstimate *> vs) {
    WitnessResult w;
    double sum = 0.0;
    double var = 0.0;
    for (const auto *v : vs) {
        w.components.emplace_back(v->label, v->V);
        sum += v->V;
        var += v->sigma * v->sigma;
    }
    w.total = std::fabs(sum);
    w.sigma_total = std::sqrt(var);
    w.violated = w.total - w.bound > 0.0;
    return w;
}

}  // namespace

WitnessResult witness_two_visibilities(const VisibilityEstimate &v1, const VisibilityEstimate &v2) {
    return witness_of({&v1, &v2});
}

WitnessResult witness_three_visibilities(const VisibilityEstimate &v1, const VisibilityEstimate &v2,
                                         const VisibilityEstimate &v3) {
    return witness_of({&v1, &v2, &v3});
}

double MacroStateSummary::length() const noexcept { return std::sqrt(jx * jx + jy * jy + jz * jz); }

SeparableChain separable_chain(const MacroStateSummary &a, const MacroStateSummary &b) noexcept {
    SeparableChain c;
    c.correlation = std::fabs(a.jx * b.jx + a.jy * b.jy);
    c.projected = std::hypot(a.jx, a.jy) * std::hypot(b.jx, b.jy);
    c.full = a.length() * b.length();
    c.number = a.n * b.n;
    return c;
}

bool SeparableChain::holds(double rel_tol) const noexcept {
    auto le = [&](double x, double y) { return x <= y + rel_tol * std::max(std::fabs(y), 1e-300); };
    return le(correlation, projected) && le(projected, full) && le(full, number);
}

SeparableBoundReport check_separable_bound(std::uint64_t sample_count, Rng &rng, double rel_tol) {
    if (sample_count == 0) {
        throw InvalidArgument("separable bound check needs at least one sample");
    }
    auto sample = [&]() {
        MacroStateSummary s;
        // Photon number spread over six decades.
        s.n = std::pow(10.0, 6.0 * rng.uniform());
        double x = rng.normal();
        double y = rng.normal();
        double z = rng.normal();
        double norm = std::sqrt(x * x + y * y + z * z);
        if (norm == 0.0) {
            x = 1.0;
            norm = 1.0;
        }
        // One sample in four saturates |J| = N.
        double len = rng.uniform() < 0.25 ? s.n : s.n * rng.uniform();
        s.jx = len * x / norm;
        s.jy = len * y / norm;
        s.jz = len * z / norm;
        return s;
    };

    SeparableBoundReport report;
    for (std::uint64_t i = 0; i < sample_count; ++i) {
        MacroStateSummary a = sample();
        MacroStateSummary b = sample();
        SeparableChain c = separable_chain(a, b);
        ++report.samples;
        if (!c.holds(rel_tol)) {
            ++report.violations;
        }
        report.max_normalized_correlation = std::max(report.max_normalized_correlation, c.correlation / c.number);
    }
    return report;
}

}  // namespace bellsim
