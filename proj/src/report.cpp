#include "bellsim/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "bellsim/error.hpp"

namespace bellsim {

namespace {

std::string deg(double d) {
    double r = std::round(d * 1e9) / 1e9;
    std::ostringstream out;
    out << std::setprecision(12) << (r == 0.0 ? 0.0 : r);
    return out.str();
}

std::string angle_text(const Basis &b) { return b.is_circular() ? "circular" : deg(b.primary.degrees()); }

bool unbiased(const Basis &x, const Basis &y) {
    if (x.is_circular() || y.is_circular()) {
        return false;
    }
    double d = std::fmod(std::fabs(x.primary.degrees() - y.primary.degrees()), 90.0);
    return std::fabs(d - 45.0) < 1e-6;
}

const char *yes_no(bool b) { return b ? "yes" : "no"; }

std::size_t count_distinct(const CoincidenceTable &table, bool a_side) {
    std::vector<Basis> seen;
    for (const auto &t : table.settings) {
        const Basis &b = a_side ? t.setting.a : t.setting.b;
        bool found = false;
        for (const auto &s : seen) {
            found = found || same_basis(s, b);
        }
        if (!found) {
            seen.push_back(b);
        }
    }
    return seen.size();
}

void write_witness(std::ostream &out, const WitnessResult &w) {
    out << "components:";
    for (const auto &[label, v] : w.components) {
        out << ' ' << label << '=' << v;
    }
    out << '\n';
    out << "total: " << w.total << '\n';
    out << "sigma_total: " << w.sigma_total << '\n';
    out << "bound: " << w.bound << '\n';
    out << "violated: " << yes_no(w.violated) << '\n';
    double sig = w.significance();
    out << "significance_sigma: ";
    if (std::isfinite(sig)) {
        out << sig;
    } else {
        out << (sig > 0 ? "inf" : "-inf");
    }
    out << '\n';
}

}  // namespace

std::string basis_pair_label(const Basis &b) {
    if (b.is_circular()) {
        return "(R,L)";
    }
    double d = std::round(b.primary.degrees() * 1e6) / 1e6;
    if (d == 0.0) {
        return "(H,V)";
    }
    if (d == 45.0) {
        return "(+,-)";
    }
    if (d == 90.0) {
        return "(V,H)";
    }
    if (d == 135.0) {
        return "(-,+)";
    }
    return "(" + deg(b.primary.degrees()) + "," + deg(b.primary.orthogonal().degrees()) + ")";
}

Analysis analyze(const CoincidenceTable &table, std::span<const FringeScan> scans) {
    if (table.settings.empty() && scans.empty()) {
        throw InsufficientData("insufficient data: nothing to analyze");
    }
    Analysis a;
    a.table = table;
    if (!table.settings.empty()) {
        a.success_probability = success_probability(table);
    }
    for (const auto &t : table.settings) {
        if (t.coincidences() > 0) {
            a.terms.emplace_back(t.setting, correlation_term(t));
        }
    }

    // Two A angles against two B angles with at most one cell missing is a
    // CHSH design; a missing setting is then an error rather than a skip.
    if (table.settings.size() >= 3 && count_distinct(table, true) == 2 && count_distinct(table, false) == 2) {
        a.bell = chsh(table);
    }

    const SettingTally *circular = nullptr;
    std::vector<const SettingTally *> linear;
    for (const auto &t : table.settings) {
        if (!same_basis(t.setting.a, t.setting.b) || t.coincidences() == 0) {
            continue;
        }
        a.direct_visibilities.push_back(visibility_direct(t, basis_pair_label(t.setting.b)));
        if (t.setting.a.is_circular()) {
            circular = circular ? circular : &t;
        } else {
            linear.push_back(&t);
        }
    }
    for (std::size_t i = 0; i < linear.size(); ++i) {
        for (std::size_t j = i + 1; j < linear.size(); ++j) {
            if (!unbiased(linear[i]->setting.b, linear[j]->setting.b)) {
                continue;
            }
            auto v1 = visibility_direct(*linear[i], basis_pair_label(linear[i]->setting.b));
            auto v2 = visibility_direct(*linear[j], basis_pair_label(linear[j]->setting.b));
            a.witnesses.push_back(witness_two_visibilities(v1, v2));
            if (circular != nullptr) {
                auto v3 = visibility_direct(*circular, basis_pair_label(circular->setting.b));
                a.witnesses.push_back(witness_three_visibilities(v1, v2, v3));
            }
            i = linear.size();
            break;
        }
    }

    for (const auto &scan : scans) {
        std::string label = scan.label.empty() ? basis_pair_label(Basis::linear_degrees(scan.beta_deg)) : scan.label;
        a.fringe_visibilities.push_back(visibility_fringe_fit(scan.points, label));
    }
    const auto &fv = a.fringe_visibilities;
    if (fv.size() == 2) {
        a.witnesses.push_back(witness_two_visibilities(fv[0], fv[1]));
    } else if (fv.size() == 3) {
        a.witnesses.push_back(witness_three_visibilities(fv[0], fv[1], fv[2]));
    }
    return a;
}

std::string format_report(const Analysis &a, const std::string &title) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    out << "# bellsim report" << (title.empty() ? "" : ": " + title) << '\n';
    if (!a.table.settings.empty()) {
        out << "trials: " << a.table.total_trials() << '\n';
        out << "conclusive: " << a.table.total_conclusive() << '\n';
        out << "success_probability: " << a.success_probability << '\n';

        out << "\n[settings]\n";
        out << "# alpha_deg beta_deg trials conclusive N(A1,B+) N(A1,B-) N(A2,B+) N(A2,B-) E sigma_E\n";
        for (const auto &t : a.table.settings) {
            out << angle_text(t.setting.a) << ' ' << angle_text(t.setting.b) << ' ' << t.trials << ' '
                << t.conclusive << ' ' << t.cells[0][0] << ' ' << t.cells[0][1] << ' ' << t.cells[1][0] << ' '
                << t.cells[1][1];
            if (t.coincidences() > 0) {
                CorrelationTerm c = correlation_term(t);
                out << ' ' << c.E << ' ' << c.sigma << '\n';
            } else {
                out << " insufficient_data\n";
            }
        }
    }

    if (a.bell) {
        const BellEstimate &b = *a.bell;
        ChshLayout layout = chsh_layout(a.table);
        out << "\n[chsh]\n";
        out << "a1_deg: " << deg(layout.a1.degrees()) << '\n';
        out << "a2_deg: " << deg(layout.a2.degrees()) << '\n';
        out << "b1_deg: " << deg(layout.b1.degrees()) << '\n';
        out << "b2_deg: " << deg(layout.b2.degrees()) << '\n';
        static constexpr std::array<const char *, 4> names{"E(a1,b1)", "E(a1,b2)", "E(a2,b1)", "E(a2,b2)"};
        out << "signs:";
        for (int s : b.signs) {
            out << ' ' << (s > 0 ? '+' : '-');
        }
        out << '\n';
        for (std::size_t i = 0; i < 4; ++i) {
            out << names[i] << ": " << b.E[i] << " +/- " << b.sigma_E[i] << '\n';
        }
        out << "S: " << b.S << '\n';
        out << "sigma_S: " << b.sigma_S << '\n';
        out << "success_probability: " << b.success_probability << '\n';
        out << "local_bound: 2\n";
        out << "violates_local_bound: " << yes_no(b.S > 2.0) << '\n';
        out << "super_quantum: " << yes_no(b.super_quantum) << '\n';
        if (b.super_quantum) {
            out << "warning: S exceeds 2*sqrt(2); check the input counts\n";
        }
    }

    auto write_visibilities = [&](const std::vector<VisibilityEstimate> &vs, const char *section) {
        if (vs.empty()) {
            return;
        }
        out << "\n[" << section << "]\n";
        for (const auto &v : vs) {
            out << v.label << ": V = " << v.V << " +/- " << v.sigma;
            if (v.method == VisibilityMethod::direct) {
                out << (v.anticorrelated ? " anticorrelated" : " correlated");
            } else {
                out << " phase_deg = " << v.phase_deg;
            }
            out << '\n';
        }
    };
    write_visibilities(a.direct_visibilities, "visibilities.direct");
    write_visibilities(a.fringe_visibilities, "visibilities.fringe_fit");

    for (std::size_t i = 0; i < a.witnesses.size(); ++i) {
        out << "\n[witness." << (a.witnesses[i].components.size() == 2 ? "two" : "three") << "_visibilities]\n";
        write_witness(out, a.witnesses[i]);
    }
    return out.str();
}

std::string format_sweep_report(const SweepResult &sweep, const std::string &title) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    out << "# bellsim threshold sweep" << (title.empty() ? "" : ": " + title) << '\n';
    out << "# threshold P_s sigma_P_s S sigma_S violates_local_bound\n";
    for (const auto &row : sweep.rows) {
        out << row.threshold << ' ' << row.success_probability << ' ' << row.sigma_success_probability << ' '
            << row.bell.S << ' ' << row.bell.sigma_S << ' ' << yes_no(row.bell.S > 2.0) << '\n';
    }
    return out.str();
}

nlohmann::json bell_to_json(const BellEstimate &bell) {
    static constexpr std::array<const char *, 4> keys{"a1b1", "a1b2", "a2b1", "a2b2"};
    nlohmann::json e = nlohmann::json::object();
    nlohmann::json s = nlohmann::json::object();
    for (std::size_t i = 0; i < 4; ++i) {
        e[keys[i]] = bell.E[i];
        s[keys[i]] = bell.sigma_E[i];
    }
    return nlohmann::json{{"E", e},
                          {"sigma_E", s},
                          {"S", bell.S},
                          {"sigma_S", bell.sigma_S},
                          {"success_probability", bell.success_probability}};
}

}  // namespace bellsim
