#include "bellsim/formats.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bellsim/error.hpp"

namespace bellsim {

namespace {

using nlohmann::json;

double round_deg(double deg) {
    double r = std::round(deg * 1e9) / 1e9;
    return r == 0.0 ? 0.0 : r;  // no "-0"
}

std::string fmt_deg(double deg) {
    std::ostringstream out;
    out << std::setprecision(12) << round_deg(deg);
    return out.str();
}

json basis_to_json(const Basis &b) {
    if (b.is_circular()) {
        return "circular";
    }
    return round_deg(b.primary.degrees());
}

Basis basis_from_json(const json &v) {
    if (v.is_string() && v.get<std::string>() == "circular") {
        return Basis::circular();
    }
    if (!v.is_number()) {
        throw ParseError("basis must be an angle in degrees or \"circular\"");
    }
    return Basis::linear_degrees(v.get<double>());
}

std::string basis_label(const Basis &b, bool orthogonal) {
    if (b.is_circular()) {
        return orthogonal ? "circular_perp" : "circular";
    }
    return fmt_deg(orthogonal ? b.primary.orthogonal().degrees() : b.primary.degrees());
}

Basis basis_from_label(const std::string &token) {
    if (token == "circular") {
        return Basis::circular();
    }
    try {
        std::size_t used = 0;
        double deg = std::stod(token, &used);
        if (used != token.size()) {
            throw ParseError("bad analyzer label '" + token + "'");
        }
        return Basis::linear_degrees(deg);
    } catch (const std::logic_error &) {
        throw ParseError("bad analyzer label '" + token + "'");
    }
}

std::uint64_t parse_count(const std::string &token, int line) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(token, &used);
        if (used != token.size() || v < 0) {
            throw std::invalid_argument(token);
        }
        return static_cast<std::uint64_t>(v);
    } catch (const std::logic_error &) {
        throw ParseError("line " + std::to_string(line) + ": bad count '" + token + "'");
    }
}

std::vector<std::string> tokenize(const std::string &line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            break;
        }
        out.push_back(tok);
    }
    return out;
}

// Distinct analyzers among the table's settings, in first-seen order.
std::vector<Basis> distinct(const CoincidenceTable &table, bool a_side) {
    std::vector<Basis> out;
    for (const auto &t : table.settings) {
        const Basis &b = a_side ? t.setting.a : t.setting.b;
        bool seen = false;
        for (const auto &o : out) {
            seen = seen || same_basis(o, b);
        }
        if (!seen) {
            out.push_back(b);
        }
    }
    return out;
}

}  // namespace

void write_trial_log(std::ostream &out, std::span<const TrialRecord> records) {
    for (const auto &r : records) {
        json j;
        j["trial_id"] = r.trial_id;
        j["timestamp"] = r.timestamp;
        j["a_basis"] = basis_to_json(r.a_basis);
        j["b_basis"] = basis_to_json(r.b_basis);
        if (r.hidden_theta) {
            j["hidden_theta"] = round_deg(r.hidden_theta->degrees());
        }
        j["a_click"] = std::string(to_string(r.a_click));
        j["i_plus"] = r.i_plus;
        j["i_minus"] = r.i_minus;
        j["verdict"] = std::string(to_string(r.verdict));
        out << j.dump() << '\n';
    }
}

std::vector<TrialRecord> read_trial_log(std::istream &in) {
    std::vector<TrialRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            json j = json::parse(line);
            TrialRecord r;
            r.trial_id = j.at("trial_id").get<std::uint64_t>();
            r.timestamp = j.at("timestamp").get<std::uint64_t>();
            r.a_basis = basis_from_json(j.at("a_basis"));
            r.b_basis = basis_from_json(j.at("b_basis"));
            if (j.contains("hidden_theta")) {
                r.hidden_theta = PolAngle::degrees(j.at("hidden_theta").get<double>());
            }
            r.a_click = parse_a_click(j.at("a_click").get<std::string>());
            r.i_plus = j.at("i_plus").get<double>();
            r.i_minus = j.at("i_minus").get<double>();
            r.verdict = parse_verdict(j.at("verdict").get<std::string>());
            out.push_back(r);
        } catch (const json::exception &e) {
            throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError &e) {
            throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_counts(std::ostream &out, const CoincidenceTable &table) {
    auto as = distinct(table, true);
    auto bs = distinct(table, false);
    out << "# Coincidence counts: B analyzer rows, A analyzer columns (degrees)\n";
    for (const auto &t : table.settings) {
        out << "trials " << basis_label(t.setting.a, false) << ' ' << basis_label(t.setting.b, false) << ' '
            << t.trials << '\n';
        out << "conclusive " << basis_label(t.setting.a, false) << ' ' << basis_label(t.setting.b, false) << ' '
            << t.conclusive << '\n';
    }
    out << "beta\\alpha";
    for (const auto &a : as) {
        out << '\t' << basis_label(a, false) << '\t' << basis_label(a, true);
    }
    out << '\n';
    for (const auto &b : bs) {
        for (int b_arm = 0; b_arm < 2; ++b_arm) {
            out << basis_label(b, b_arm == 1);
            for (const auto &a : as) {
                const SettingTally *t = table.find(Setting{a, b});
                for (int a_arm = 0; a_arm < 2; ++a_arm) {
                    out << '\t';
                    if (t == nullptr) {
                        out << '-';
                    } else {
                        out << t->cells[static_cast<std::size_t>(a_arm)][static_cast<std::size_t>(b_arm)];
                    }
                }
            }
            out << '\n';
        }
    }
}

CoincidenceTable read_counts(std::istream &in) {
    struct Totals {
        std::optional<std::uint64_t> trials;
        std::optional<std::uint64_t> conclusive;
    };
    std::vector<std::pair<Setting, Totals>> totals;
    auto totals_for = [&](const Setting &s) -> Totals & {
        for (auto &[setting, t] : totals) {
            if (same_setting(setting, s)) {
                return t;
            }
        }
        totals.emplace_back(s, Totals{});
        return totals.back().second;
    };

    std::optional<std::uint64_t> trials_per_setting;
    std::vector<Basis> as;
    bool header_seen = false;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> row_lines;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) {
            continue;
        }
        if (tok[0] == "trials_per_setting") {
            if (tok.size() != 2 && !(tok.size() == 3 && tok[1] == "=")) {
                throw ParseError("line " + std::to_string(lineno) + ": expected 'trials_per_setting N'");
            }
            trials_per_setting = parse_count(tok.back(), lineno);
        } else if (tok[0] == "trials" || tok[0] == "conclusive") {
            if (tok.size() != 4) {
                throw ParseError("line " + std::to_string(lineno) + ": expected '" + tok[0] + " <alpha> <beta> <n>'");
            }
            Totals &t = totals_for(Setting{basis_from_label(tok[1]), basis_from_label(tok[2])});
            (tok[0] == "trials" ? t.trials : t.conclusive) = parse_count(tok[3], lineno);
        } else if (tok[0] == "beta\\alpha") {
            if (header_seen) {
                throw ParseError("line " + std::to_string(lineno) + ": second table header");
            }
            if (tok.size() < 3 || (tok.size() - 1) % 2 != 0) {
                throw ParseError("line " + std::to_string(lineno) + ": header needs (alpha, alpha_perp) column pairs");
            }
            for (std::size_t i = 1; i < tok.size(); i += 2) {
                as.push_back(basis_from_label(tok[i]));
            }
            header_seen = true;
        } else {
            if (!header_seen) {
                throw ParseError("line " + std::to_string(lineno) + ": table row before 'beta\\alpha' header");
            }
            if (tok.size() != 1 + 2 * as.size()) {
                throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(2 * as.size()) +
                                 " counts");
            }
            rows.push_back(tok);
            row_lines.push_back(lineno);
        }
    }
    if (!header_seen) {
        throw ParseError("counts file has no 'beta\\alpha' table header");
    }
    if (rows.empty() || rows.size() % 2 != 0) {
        throw ParseError("counts table needs rows in (beta, beta_perp) pairs");
    }

    CoincidenceTable table;
    for (std::size_t r = 0; r < rows.size(); r += 2) {
        Basis b = basis_from_label(rows[r][0]);
        for (std::size_t ai = 0; ai < as.size(); ++ai) {
            std::array<std::array<std::string, 2>, 2> cell_tokens{
                {{rows[r][1 + 2 * ai], rows[r + 1][1 + 2 * ai]}, {rows[r][2 + 2 * ai], rows[r + 1][2 + 2 * ai]}}};
            int dashes = 0;
            for (const auto &row : cell_tokens) {
                for (const auto &c : row) {
                    dashes += c == "-" ? 1 : 0;
                }
            }
            if (dashes == 4) {
                continue;
            }
            if (dashes != 0) {
                throw ParseError("line " + std::to_string(row_lines[r]) + ": partially missing setting block");
            }
            SettingTally t{Setting{as[ai], b}, {}, 0, 0};
            for (std::size_t i = 0; i < 2; ++i) {
                for (std::size_t j = 0; j < 2; ++j) {
                    t.cells[i][j] = parse_count(cell_tokens[i][j], row_lines[r + j]);
                }
            }
            Totals &tot = totals_for(t.setting);
            t.conclusive = tot.conclusive.value_or(t.coincidences());
            t.trials = tot.trials ? *tot.trials : trials_per_setting.value_or(t.conclusive);
            if (t.coincidences() > t.conclusive || t.conclusive > t.trials) {
                throw ParseError("counts for setting (" + basis_label(t.setting.a, false) + ", " +
                                 basis_label(t.setting.b, false) +
                                 ") violate coincidences <= conclusive <= trials");
            }
            table.settings.push_back(t);
        }
    }
    return table;
}

void write_scan(std::ostream &out, const FringeScan &scan) {
    out << "# Fringe scan: A1/B+ coincidences vs A analyzer angle\n";
    out << "label " << scan.label << '\n';
    out << "beta_deg " << fmt_deg(scan.beta_deg) << '\n';
    out << "trials_per_point " << scan.trials_per_point << '\n';
    out << "# alpha_deg\tcount\n";
    for (const auto &[alpha, count] : scan.points) {
        out << fmt_deg(alpha) << '\t' << std::setprecision(17) << count << '\n';
    }
}

FringeScan read_scan(std::istream &in) {
    FringeScan scan;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) {
            continue;
        }
        try {
            if (tok[0] == "label") {
                std::string rest;
                for (std::size_t i = 1; i < tok.size(); ++i) {
                    rest += (i > 1 ? " " : "") + tok[i];
                }
                scan.label = rest;
            } else if (tok[0] == "beta_deg" && tok.size() == 2) {
                scan.beta_deg = std::stod(tok[1]);
            } else if (tok[0] == "trials_per_point" && tok.size() == 2) {
                scan.trials_per_point = parse_count(tok[1], lineno);
            } else if (tok.size() == 2) {
                scan.points.emplace_back(std::stod(tok[0]), std::stod(tok[1]));
            } else {
                throw ParseError("unexpected content");
            }
        } catch (const std::logic_error &) {
            throw ParseError("scan line " + std::to_string(lineno) + ": bad number");
        } catch (const ParseError &e) {
            throw ParseError("scan line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (scan.points.empty()) {
        throw ParseError("scan file has no data points");
    }
    return scan;
}

void write_series(std::ostream &out, const SweepResult &sweep) {
    out << "# threshold\tsuccess_probability\tsigma_success_probability\tS\tsigma_S\n";
    out << std::setprecision(10);
    for (const auto &row : sweep.rows) {
        out << row.threshold << '\t' << row.success_probability << '\t' << row.sigma_success_probability << '\t'
            << row.bell.S << '\t' << row.bell.sigma_S << '\n';
    }
}

InputKind sniff_input(std::istream &in) {
    auto pos = in.tellg();
    char c = 0;
    while (in.get(c)) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            break;
        }
    }
    bool empty = !in;
    in.clear();
    in.seekg(pos);
    // An empty input reads as a trial log with no records.
    return (empty || c == '{') ? InputKind::trial_log : InputKind::counts;
}

CoincidenceTable load_table(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    CoincidenceTable table;
    if (sniff_input(in) == InputKind::trial_log) {
        auto records = read_trial_log(in);
        table = tally_records(records);
    } else {
        table = read_counts(in);
    }
    if (table.settings.empty()) {
        throw InsufficientData("insufficient data: " + path.string() + " holds no trials");
    }
    return table;
}

std::vector<TrialRecord> load_trial_log(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_trial_log(in);
}

FringeScan load_scan(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_scan(in);
}

}  // namespace bellsim
