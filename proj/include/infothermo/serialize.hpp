#pragma once

// JSON and CSV forms of the toolkit's values. CSV numbers carry 17
// significant digits; JSON numbers use the shortest round-trip form.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "infothermo/bounds.hpp"
#include "infothermo/errors.hpp"
#include "infothermo/langevin.hpp"
#include "infothermo/measurement.hpp"
#include "infothermo/operator.hpp"
#include "infothermo/protocol.hpp"
#include "infothermo/twobox.hpp"

namespace infothermo {

using json = nlohmann::json;

inline std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

// ---------------------------------------------------------------------------
// Source positions

struct SourcePosition {
    std::size_t line = 1;
    std::size_t column = 1;
};

inline SourcePosition position_of(std::string_view text, std::size_t offset) {
    SourcePosition p;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

namespace detail {

// Minimal scanner over already-validated JSON text, used only to map a JSON pointer to an offset.
class JsonLocator {
public:
    explicit JsonLocator(std::string_view text) : t_(text) {}

    std::optional<std::size_t> find(const json::json_pointer& ptr) {
        std::vector<std::string> tokens;
        for (json::json_pointer p = ptr; !p.empty(); p = p.parent_pointer()) tokens.insert(tokens.begin(), p.back());
        i_ = 0;
        ws();
        for (const auto& tok : tokens) {
            if (i_ >= t_.size()) return std::nullopt;
            if (t_[i_] == '{') {
                ++i_;
                bool found = false;
                for (ws(); i_ < t_.size() && t_[i_] != '}';) {
                    const std::size_t ks = i_;
                    skip_string();
                    const std::string key = json::parse(t_.substr(ks, i_ - ks)).get<std::string>();
                    ws();
                    ++i_;  // ':'
                    ws();
                    if (key == tok) {
                        found = true;
                        break;
                    }
                    skip_value();
                    ws();
                    if (i_ < t_.size() && t_[i_] == ',') ++i_;
                    ws();
                }
                if (!found) return std::nullopt;
            } else if (t_[i_] == '[') {
                ++i_;
                std::size_t idx = 0;
                try {
                    idx = std::stoul(tok);
                } catch (...) {
                    return std::nullopt;
                }
                ws();
                for (std::size_t n = 0; n < idx; ++n) {
                    if (i_ >= t_.size() || t_[i_] == ']') return std::nullopt;
                    skip_value();
                    ws();
                    if (i_ < t_.size() && t_[i_] == ',') ++i_;
                    ws();
                }
                if (i_ >= t_.size() || t_[i_] == ']') return std::nullopt;
            } else {
                return std::nullopt;
            }
        }
        return i_;
    }

private:
    void ws() {
        while (i_ < t_.size() && (t_[i_] == ' ' || t_[i_] == '\t' || t_[i_] == '\n' || t_[i_] == '\r')) ++i_;
    }
    void skip_string() {
        ++i_;
        while (i_ < t_.size() && t_[i_] != '"') i_ += t_[i_] == '\\' ? 2 : 1;
        ++i_;
    }
    void skip_value() {
        if (i_ >= t_.size()) return;
        const char c = t_[i_];
        if (c == '"') {
            skip_string();
        } else if (c == '{' || c == '[') {
            int depth = 0;
            while (i_ < t_.size()) {
                const char d = t_[i_];
                if (d == '"') {
                    skip_string();
                    continue;
                }
                if (d == '{' || d == '[') ++depth;
                if (d == '}' || d == ']') --depth;
                ++i_;
                if (depth == 0) return;
            }
        } else {
            while (i_ < t_.size() && t_[i_] != ',' && t_[i_] != ']' && t_[i_] != '}' && t_[i_] != ' ' && t_[i_] != '\n' && t_[i_] != '\r' &&
                   t_[i_] != '\t')
                ++i_;
        }
    }

    std::string_view t_;
    std::size_t i_ = 0;
};

} // namespace detail

/// A parsed document that can point back into its source text.
class JsonDocument {
public:
    JsonDocument(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {
        try {
            value_ = json::parse(text_);
        } catch (const json::parse_error& e) {
            const auto pos = position_of(text_, e.byte > 0 ? e.byte - 1 : 0);
            throw SchemaError(fmt::format("{}:{}:{}: invalid JSON: {}", source_, pos.line, pos.column, short_message(e.what())));
        }
    }

    static JsonDocument from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw SchemaError(fmt::format("{}: cannot open file", path));
        std::ostringstream ss;
        ss << in.rdbuf();
        return JsonDocument(ss.str(), path);
    }

    const json& value() const noexcept { return value_; }
    const std::string& source() const noexcept { return source_; }

    /// "source:line:col (pointer): message" for the element at `ptr`.
    [[noreturn]] void fail(const json::json_pointer& ptr, std::string_view message) const {
        const auto off = detail::JsonLocator(text_).find(ptr);
        const std::string where = ptr.empty() ? std::string("/") : ptr.to_string();
        if (off) {
            const auto pos = position_of(text_, *off);
            throw SchemaError(fmt::format("{}:{}:{} ({}): {}", source_, pos.line, pos.column, where, message));
        }
        throw SchemaError(fmt::format("{} ({}): {}", source_, where, message));
    }

private:
    static std::string short_message(std::string_view what) {
        // drop nlohmann's "[json.exception.parse_error.101] " prefix
        const auto p = what.find("] ");
        return std::string(p == std::string_view::npos ? what : what.substr(p + 2));
    }

    std::string text_;
    std::string source_;
    json value_;
};

/// Reads documents while tracking the JSON pointer for diagnostics.
class SchemaReader {
public:
    explicit SchemaReader(const JsonDocument& doc) : doc_(doc) {}

    const JsonDocument& document() const noexcept { return doc_; }

    const json& at(const json& parent, const json::json_pointer& ptr, const std::string& key) const {
        if (!parent.is_object()) doc_.fail(ptr, "expected an object");
        const auto it = parent.find(key);
        if (it == parent.end()) doc_.fail(ptr, fmt::format("missing key \"{}\"", key));
        return *it;
    }

    double number(const json& v, const json::json_pointer& ptr) const {
        if (!v.is_number()) doc_.fail(ptr, fmt::format("expected a number, found {}", v.type_name()));
        return v.get<double>();
    }

    long long integer(const json& v, const json::json_pointer& ptr) const {
        if (!v.is_number_integer()) doc_.fail(ptr, fmt::format("expected an integer, found {}", v.type_name()));
        return v.get<long long>();
    }

    const json& array(const json& v, const json::json_pointer& ptr, std::optional<std::size_t> size = std::nullopt) const {
        if (!v.is_array()) doc_.fail(ptr, fmt::format("expected an array, found {}", v.type_name()));
        if (size && v.size() != *size) doc_.fail(ptr, fmt::format("expected {} entries, found {}", *size, v.size()));
        return v;
    }

    Matrix matrix(const json& v, const json::json_pointer& ptr) const {
        const auto dim = integer(at(v, ptr, "dim"), ptr / "dim");
        if (dim < 1) doc_.fail(ptr / "dim", fmt::format("dim must be positive, got {}", dim));
        const auto n = static_cast<std::size_t>(dim);
        Matrix m(dim, dim);
        for (const char* part : {"re", "im"}) {
            const bool is_re = part[0] == 'r';
            const auto base = ptr / part;
            if (!is_re && !v.contains("im")) {
                m.imag().setZero();
                continue;
            }
            const json& rows = array(at(v, ptr, part), base, n);
            for (std::size_t i = 0; i < n; ++i) {
                const json& row = array(rows[i], base / i, n);
                for (std::size_t j = 0; j < n; ++j) {
                    const double x = number(row[j], base / i / j);
                    if (is_re)
                        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).real(x);
                    else
                        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).imag(x);
                }
            }
        }
        return m;
    }

    DensityOperator density(const json& v, const json::json_pointer& ptr) const {
        Matrix m = matrix(v, ptr);
        try {
            return DensityOperator(std::move(m));
        } catch (const Error& e) {
            doc_.fail(ptr, e.what());
        }
    }

    MeasurementModel measurement(const json& v, const json::json_pointer& ptr) const {
        const json& outs = array(at(v, ptr, "outcomes"), ptr / "outcomes");
        std::vector<Outcome> outcomes;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            const auto op = ptr / "outcomes" / i;
            Outcome o;
            o.k = static_cast<int>(integer(at(outs[i], op, "k"), op / "k"));
            const json& ops = array(at(outs[i], op, "operators"), op / "operators");
            for (std::size_t j = 0; j < ops.size(); ++j) o.operators.push_back(matrix(ops[j], op / "operators" / j));
            outcomes.push_back(std::move(o));
        }
        try {
            return MeasurementModel(std::move(outcomes));
        } catch (const Error& e) {
            doc_.fail(ptr, e.what());
        }
    }

private:
    const JsonDocument& doc_;
};

// ---------------------------------------------------------------------------
// Writers

inline json to_json(const Matrix& m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        json c = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.push_back(m(i, j).real());
            c.push_back(m(i, j).imag());
        }
        re.push_back(std::move(r));
        im.push_back(std::move(c));
    }
    return {{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline json to_json(const MeasurementModel& m) {
    json outs = json::array();
    for (const auto& o : m.outcomes()) {
        json ops = json::array();
        for (const auto& op : o.operators) ops.push_back(to_json(op));
        outs.push_back({{"k", o.k}, {"operators", std::move(ops)}});
    }
    return {{"outcomes", std::move(outs)}};
}

inline Matrix matrix_from_json(const std::string& text, const std::string& source = "<input>") {
    const JsonDocument doc(text, source);
    return SchemaReader(doc).matrix(doc.value(), json::json_pointer());
}

inline MeasurementModel measurement_from_json(const std::string& text, const std::string& source = "<input>") {
    const JsonDocument doc(text, source);
    return SchemaReader(doc).measurement(doc.value(), json::json_pointer());
}

inline json to_json(const BoundReport& b) {
    return {{"kind", std::string(to_string(b.kind))}, {"lhs", b.lhs},          {"rhs", b.rhs},
            {"margin", b.margin},                     {"tolerance", b.tolerance}, {"satisfied", b.satisfied}};
}

/// Summary of a protocol run; the step list itself is reduced to counts.
inline json to_json(const ProtocolRecord& r) {
    std::size_t quenches = 0;
    for (const auto& s : r.steps) quenches += std::holds_alternative<Quench>(s) ? 1 : 0;
    return {{"temperature", r.temperature},
            {"steps", r.steps.size()},
            {"quenches", quenches},
            {"thermalizations", r.steps.size() - quenches},
            {"initial_populations", r.initial_populations},
            {"initial_energies", r.initial_energies},
            {"final_populations", r.final_populations},
            {"final_energies", r.final_energies},
            {"work", r.work},
            {"heat", r.heat},
            {"internal_energy_change", r.internal_energy_change()},
            {"first_law_residual", r.first_law_residual()}};
}

inline std::string convergence_csv(std::span<const ConvergenceRow> rows) {
    std::string out = "n_steps,W,bound,margin\n";
    for (const auto& r : rows) out += fmt::format("{},{},{},{}\n", r.steps, fmt17(r.work), fmt17(r.bound), fmt17(r.margin));
    return out;
}

namespace twobox {

inline json to_json(const StageWorkReport& r) {
    return {{"erasure",
             {{"partition_move", r.partition_move}, {"removal", r.removal}, {"compression", r.compression}, {"total", r.erasure}}},
            {"measurement",
             {{"outcome0", r.outcome0},
              {"expansion", r.expansion},
              {"recompression", r.recompression},
              {"outcome1", r.outcome1},
              {"total", r.measurement}}},
            {"sum", r.sum}};
}

inline json to_json(const EntropyBalance& b) {
    return {{"physical_initial", b.physical_initial},
            {"physical_final", b.physical_final},
            {"shannon_initial", b.shannon_initial},
            {"shannon_final", b.shannon_final},
            {"total_change", b.total_change}};
}

inline json to_json(const SweepRow& r) {
    return {{"t", r.t},
            {"W_eras", r.erasure},
            {"W_meas", r.measurement},
            {"sum", r.sum},
            {"dF", r.delta_free_energy},
            {"eq3_margin", r.erasure_margin},
            {"eq2_margin", r.measurement_margin}};
}

inline std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "t,W_eras,W_meas,sum,dF,eq3_margin,eq2_margin\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{}\n", fmt17(r.t), fmt17(r.erasure), fmt17(r.measurement), fmt17(r.sum), fmt17(r.delta_free_energy),
                           fmt17(r.erasure_margin), fmt17(r.measurement_margin));
    return out;
}

} // namespace twobox

namespace langevin {

inline json to_json(const QuarticParams& p) { return {{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

inline json to_json(const ProtocolSchedule& s) {
    json knots = json::array();
    for (const auto& k : s.knots) knots.push_back({{"s", k.s}, {"a", k.params.a}, {"b", k.params.b}, {"c", k.params.c}});
    return {{"duration", s.duration}, {"knots", std::move(knots)}};
}

/// {"duration": tau, "knots": [{"s", "a", "b", "c"}, ...]}
inline ProtocolSchedule schedule_from_json(const JsonDocument& doc) {
    const SchemaReader rd(doc);
    const json& v = doc.value();
    const json::json_pointer root;
    ProtocolSchedule out;
    out.duration = rd.number(rd.at(v, root, "duration"), root / "duration");
    if (!(out.duration > 0.0)) doc.fail(root / "duration", "duration must be positive");
    const json& knots = rd.array(rd.at(v, root, "knots"), root / "knots");
    if (knots.size() < 2) doc.fail(root / "knots", "a schedule needs at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto kp = root / "knots" / i;
        Knot k;
        k.s = rd.number(rd.at(knots[i], kp, "s"), kp / "s");
        k.params.a = rd.number(rd.at(knots[i], kp, "a"), kp / "a");
        k.params.b = rd.number(rd.at(knots[i], kp, "b"), kp / "b");
        k.params.c = rd.number(rd.at(knots[i], kp, "c"), kp / "c");
        if (i > 0 && k.s < out.knots.back().s) doc.fail(kp / "s", "knot times must be nondecreasing");
        out.knots.push_back(k);
    }
    if (out.knots.front().s != 0.0) doc.fail(root / "knots" / 0 / "s", "first knot must be at s = 0");
    if (out.knots.back().s != 1.0) doc.fail(root / "knots" / (knots.size() - 1) / "s", "last knot must be at s = 1");
    return out;
}

inline std::string ensemble_csv(const TrajectoryEnsemble& ens) {
    std::string out = "trajectory_index,seed,W,final_basin\n";
    for (std::size_t j = 0; j < ens.work.size(); ++j)
        out += fmt::format("{},{},{},{}\n", j, ens.seeds[j], fmt17(ens.work[j]), ens.final_basin[j]);
    return out;
}

inline json to_json(const JarzynskiReport& r) {
    return {{"estimator", r.estimator},
            {"expected", r.expected},
            {"stderr", r.stderr_boot},
            {"z_score", r.z_score},
            {"effective_sample_size", r.effective_sample_size},
            {"rare_event_warning", r.rare_event_warning},
            {"flagged", r.flagged}};
}

inline json to_json(const LandauerReport& r) {
    return {{"mean_work", r.mean_work}, {"stderr", r.stderr_work},       {"bound", r.bound},
            {"margin", r.margin},       {"success_fraction", r.success_fraction}, {"satisfied", r.satisfied}};
}

} // namespace langevin

} // namespace infothermo
