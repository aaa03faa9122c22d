#include "riskscore/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace riskscore {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Features only; the intercept is never subject to operational constraints.
std::size_t resolve_feature(const Dataset& data, const std::string& name) {
    const std::size_t j = data.feature_index(name);
    if (j == 0) throw CompileError("constraints may not reference the intercept");
    return j;
}

struct NameCollector {
    std::vector<std::string> names;
    void operator()(const MaxModelSize&) {}
    void operator()(const SignConstraint& c) { names.push_back(c.feature); }
    void operator()(const AtMostKOf& c) {
        names.insert(names.end(), c.features.begin(), c.features.end());
    }
    void operator()(const ExclusiveChoice& c) {
        names.insert(names.end(), c.group_a.begin(), c.group_a.end());
        names.insert(names.end(), c.group_b.begin(), c.group_b.end());
    }
    void operator()(const Implies& c) {
        names.push_back(c.antecedent);
        names.insert(names.end(), c.consequents.begin(), c.consequents.end());
    }
    void operator()(const LinearIndicatorRow& c) {
        for (const auto& [name, coeff] : c.terms) names.push_back(name);
    }
};

}  // namespace

std::string describe(const OperationalConstraint& c) {
    struct Describe {
        std::string operator()(const MaxModelSize& c) {
            return "max_size " + std::to_string(c.k);
        }
        std::string operator()(const SignConstraint& c) {
            return "sign " + c.feature + (c.sign > 0 ? " +" : " -");
        }
        std::string operator()(const AtMostKOf& c) {
            return "at_most_k " + std::to_string(c.k) + " " + join(c.features, " ");
        }
        std::string operator()(const ExclusiveChoice& c) {
            return "exclusive " + join(c.group_a, " ") + " | " + join(c.group_b, " ");
        }
        std::string operator()(const Implies& c) {
            return "implies " + c.antecedent + " -> " + join(c.consequents, " ");
        }
        std::string operator()(const LinearIndicatorRow& c) {
            std::string out = "indicator_row";
            for (const auto& [name, coeff] : c.terms) {
                out += " " + format_double(coeff) + "*" + name;
            }
            out += c.relation == '<' ? " <= " : (c.relation == '>' ? " >= " : " = ");
            out += format_double(c.rhs);
            return out;
        }
    };
    return std::visit(Describe{}, c);
}

ProblemSpec::ProblemSpec(const Dataset& data, CoefficientSet coefset, double c0,
                         std::vector<OperationalConstraint> constraints)
    : data_(&data), coefset_(std::move(coefset)), c0_(c0), constraints_(std::move(constraints)) {
    coefset_.validate();
    if (coefset_.dim() != data.dim()) {
        throw ArgumentError("coefficient set dimension " + std::to_string(coefset_.dim()) +
                            " does not match data dimension " + std::to_string(data.dim()));
    }
    if (!(c0_ > 0.0) || !std::isfinite(c0_)) {
        throw ArgumentError("trade-off parameter C0 must be positive");
    }
    // Fail fast on bad feature names.
    NameCollector collector;
    for (const auto& c : constraints_) std::visit(collector, c);
    for (const auto& name : collector.names) resolve_feature(data, name);

    size_cap_ = dim();
    for (const auto& c : constraints_) {
        if (const auto* ms = std::get_if<MaxModelSize>(&c)) {
            size_cap_ = std::min(size_cap_, ms->k);
        }
    }
}

std::size_t ProblemSpec::support_size(const std::vector<std::int64_t>& coef) const {
    std::size_t count = 0;
    for (std::size_t j = 1; j < coef.size(); ++j) count += (coef[j] != 0);
    return count;
}

double ProblemSpec::penalty(const std::vector<std::int64_t>& coef) const {
    return c0_ * static_cast<double>(support_size(coef));
}

double objective_value(const std::vector<std::int64_t>& coef, const ProblemSpec& spec) {
    if (coef.size() != spec.dim() + 1) throw ArgumentError("coefficient dimension mismatch");
    if (!spec.coefficients().contains(coef)) {
        throw ArgumentError("coefficient vector lies outside the lattice box");
    }
    std::vector<double> real(coef.begin(), coef.end());
    return loss_value(real, spec.data()) + spec.penalty(coef);
}

FeasibilityResult is_feasible(const std::vector<std::int64_t>& coef, const ProblemSpec& spec) {
    if (coef.size() != spec.dim() + 1) throw ArgumentError("coefficient dimension mismatch");
    FeasibilityResult out;
    const auto& box = spec.coefficients();
    for (std::size_t j = 0; j < coef.size(); ++j) {
        if (coef[j] < box.lb[j] || coef[j] > box.ub[j]) {
            out.feasible = false;
            out.violations.push_back("bounds at dimension " + std::to_string(j));
        }
    }
    const Dataset& data = spec.data();
    auto nonzero = [&](const std::string& name) { return coef[resolve_feature(data, name)] != 0; };

    struct Check {
        const std::vector<std::int64_t>& coef;
        const ProblemSpec& spec;
        const std::function<bool(const std::string&)>& nonzero;

        bool operator()(const MaxModelSize& c) const { return spec.support_size(coef) <= c.k; }
        bool operator()(const SignConstraint& c) const {
            const std::int64_t v = coef[resolve_feature(spec.data(), c.feature)];
            return c.sign > 0 ? v >= 0 : v <= 0;
        }
        bool operator()(const AtMostKOf& c) const {
            std::size_t count = 0;
            for (const auto& f : c.features) count += nonzero(f);
            return count <= c.k;
        }
        bool operator()(const ExclusiveChoice& c) const {
            bool a = false, b = false;
            for (const auto& f : c.group_a) a = a || nonzero(f);
            for (const auto& f : c.group_b) b = b || nonzero(f);
            return !(a && b);
        }
        bool operator()(const Implies& c) const {
            if (!nonzero(c.antecedent)) return true;
            for (const auto& f : c.consequents) {
                if (nonzero(f)) return true;
            }
            return false;
        }
        bool operator()(const LinearIndicatorRow& c) const {
            double lhs = 0.0;
            for (const auto& [name, coeff] : c.terms) lhs += coeff * (nonzero(name) ? 1.0 : 0.0);
            constexpr double tol = 1e-9;
            if (c.relation == '<') return lhs <= c.rhs + tol;
            if (c.relation == '>') return lhs >= c.rhs - tol;
            return std::abs(lhs - c.rhs) <= tol;
        }
    };

    std::function<bool(const std::string&)> nz = nonzero;
    Check check{coef, spec, nz};
    for (const auto& c : spec.constraints()) {
        if (!std::visit(check, c)) {
            out.feasible = false;
            out.violations.push_back(describe(c));
        }
    }
    return out;
}

CompiledConstraints compile_constraints(const ProblemSpec& spec) {
    const std::size_t d = spec.dim();
    const auto& box = spec.coefficients();
    const Dataset& data = spec.data();
    CompiledConstraints out;

    auto alpha = [&](std::size_t j) { return out.alpha_var(d, j); };

    // Indicator linking: lambda_j <= ub_j alpha_j and lambda_j >= lb_j alpha_j,
    // so alpha_j = 0 collapses lambda_j to 0.
    for (std::size_t j = 1; j <= d; ++j) {
        LinearRow up;
        up.terms = {{out.lambda_var(j), 1.0}, {alpha(j), -static_cast<double>(box.ub[j])}};
        up.relation = Relation::LessEqual;
        up.rhs = 0.0;
        out.rows.push_back(std::move(up));

        LinearRow down;
        down.terms = {{out.lambda_var(j), 1.0}, {alpha(j), -static_cast<double>(box.lb[j])}};
        down.relation = Relation::GreaterEqual;
        down.rhs = 0.0;
        out.rows.push_back(std::move(down));
    }

    struct Compile {
        CompiledConstraints& out;
        const Dataset& data;
        std::size_t d;

        std::size_t alpha(const std::string& name) const {
            return out.alpha_var(d, resolve_feature(data, name));
        }

        void operator()(const MaxModelSize& c) {
            LinearRow row;
            for (std::size_t j = 1; j <= d; ++j) row.terms.emplace_back(out.alpha_var(d, j), 1.0);
            row.relation = Relation::LessEqual;
            row.rhs = static_cast<double>(c.k);
            out.rows.push_back(std::move(row));
        }
        void operator()(const SignConstraint& c) {
            LinearRow row;
            row.terms = {{out.lambda_var(resolve_feature(data, c.feature)), 1.0}};
            row.relation = c.sign > 0 ? Relation::GreaterEqual : Relation::LessEqual;
            row.rhs = 0.0;
            out.rows.push_back(std::move(row));
        }
        void operator()(const AtMostKOf& c) {
            LinearRow row;
            for (const auto& f : c.features) row.terms.emplace_back(alpha(f), 1.0);
            row.relation = Relation::LessEqual;
            row.rhs = static_cast<double>(c.k);
            out.rows.push_back(std::move(row));
        }
        void operator()(const ExclusiveChoice& c) {
            const std::size_t g = out.aux_var(d, out.num_aux++);
            LinearRow block_a;  // g = 1 shuts group A off
            for (const auto& f : c.group_a) block_a.terms.emplace_back(alpha(f), 1.0);
            block_a.terms.emplace_back(g, static_cast<double>(c.group_a.size()));
            block_a.relation = Relation::LessEqual;
            block_a.rhs = static_cast<double>(c.group_a.size());
            out.rows.push_back(std::move(block_a));

            LinearRow block_b;  // g = 0 shuts group B off
            for (const auto& f : c.group_b) block_b.terms.emplace_back(alpha(f), 1.0);
            block_b.terms.emplace_back(g, -static_cast<double>(c.group_b.size()));
            block_b.relation = Relation::LessEqual;
            block_b.rhs = 0.0;
            out.rows.push_back(std::move(block_b));
        }
        void operator()(const Implies& c) {
            LinearRow row;
            row.terms.emplace_back(alpha(c.antecedent), 1.0);
            for (const auto& f : c.consequents) row.terms.emplace_back(alpha(f), -1.0);
            row.relation = Relation::LessEqual;
            row.rhs = 0.0;
            out.rows.push_back(std::move(row));
        }
        void operator()(const LinearIndicatorRow& c) {
            LinearRow row;
            for (const auto& [name, coeff] : c.terms) row.terms.emplace_back(alpha(name), coeff);
            row.relation = c.relation == '<'   ? Relation::LessEqual
                           : c.relation == '>' ? Relation::GreaterEqual
                                               : Relation::Equal;
            row.rhs = c.rhs;
            out.rows.push_back(std::move(row));
        }
    };

    Compile compile{out, data, d};
    for (const auto& c : spec.constraints()) std::visit(compile, c);
    return out;
}

std::vector<std::vector<std::int64_t>> enumerate_feasible(const ProblemSpec& spec, double cap) {
    const double size = spec.coefficients().lattice_size();
    if (size > cap) {
        throw ArgumentError("lattice has about " + format_double(size) +
                            " points, above the enumeration cap of " + format_double(cap));
    }
    const std::size_t width = spec.dim() + 1;
    const auto& box = spec.coefficients();
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> point(box.lb.begin(), box.lb.end());
    while (true) {
        if (is_feasible(point, spec)) out.push_back(point);
        // Lexicographic odometer over (lambda_0, ..., lambda_d).
        std::size_t j = width;
        while (j > 0) {
            --j;
            if (point[j] < box.ub[j]) {
                ++point[j];
                for (std::size_t l = j + 1; l < width; ++l) point[l] = box.lb[l];
                break;
            }
            if (j == 0) return out;
        }
    }
}

std::vector<OperationalConstraint> parse_constraint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open constraint file '" + path + "'");
    std::vector<OperationalConstraint> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind)) continue;

        auto fail = [&](const std::string& why) -> ParseError {
            return ParseError("constraint file line " + std::to_string(lineno) + ": " + why);
        };

        if (kind == "max_size") {
            std::size_t k;
            if (!(ss >> k)) throw fail("expected max_size K");
            out.push_back(MaxModelSize{k});
        } else if (kind == "sign") {
            std::string feature, sign;
            if (!(ss >> feature >> sign) || (sign != "+" && sign != "-")) {
                throw fail("expected sign FEATURE +|-");
            }
            out.push_back(SignConstraint{feature, sign == "+" ? +1 : -1});
        } else if (kind == "at_most_k") {
            std::size_t k;
            if (!(ss >> k)) throw fail("expected at_most_k K F1 F2 ...");
            std::vector<std::string> features;
            std::string f;
            while (ss >> f) features.push_back(f);
            if (features.empty()) throw fail("at_most_k needs at least one feature");
            out.push_back(AtMostKOf{k, std::move(features)});
        } else if (kind == "exclusive") {
            std::vector<std::string> a, b;
            bool after_bar = false;
            std::string tok;
            while (ss >> tok) {
                if (tok == "|") {
                    after_bar = true;
                } else {
                    (after_bar ? b : a).push_back(tok);
                }
            }
            if (a.empty() || b.empty() || !after_bar) {
                throw fail("expected exclusive A1 A2 | B1 B2");
            }
            out.push_back(ExclusiveChoice{std::move(a), std::move(b)});
        } else if (kind == "implies") {
            std::string antecedent, arrow;
            if (!(ss >> antecedent >> arrow) || arrow != "->") {
                throw fail("expected implies F -> F1 F2 ...");
            }
            std::vector<std::string> consequents;
            std::string f;
            while (ss >> f) consequents.push_back(f);
            if (consequents.empty()) throw fail("implies needs at least one consequent");
            out.push_back(Implies{std::move(antecedent), std::move(consequents)});
        } else {
            throw fail("unknown constraint kind '" + kind + "'");
        }
    }
    return out;
}

}  // namespace riskscore
