#include "riskscore/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "riskscore/loss.hpp"

namespace riskscore {

double RiskScoreModel::score(const Dataset& data, std::size_t i) const {
    std::vector<double> real(coefficients.begin(), coefficients.end());
    return data.score(real, i);
}

double RiskScoreModel::points(const Dataset& data, std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 1; j < coefficients.size(); ++j) {
        s += static_cast<double>(coefficients[j]) * data.x(i, j);
    }
    return s;
}

double predicted_risk(double score) { return sigmoid(score); }

namespace {

std::vector<double> model_scores(const RiskScoreModel& model, const Dataset& data) {
    if (model.coefficients.size() != data.dim() + 1) {
        throw ArgumentError("model dimension does not match the dataset");
    }
    std::vector<double> real(model.coefficients.begin(), model.coefficients.end());
    std::vector<double> out(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) out[i] = data.score(real, i);
    return out;
}

}  // namespace

double cal(const RiskScoreModel& model, const Dataset& data) {
    if (data.n() == 0) throw ArgumentError("empty dataset");
    const std::vector<double> scores = model_scores(model, data);
    std::map<double, std::pair<std::size_t, std::size_t>> groups;  // score -> (count, positives)
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto& g = groups[scores[i]];
        ++g.first;
        g.second += (data.label(i) == +1);
    }
    double total = 0.0;
    for (const auto& [score, g] : groups) {
        const double predicted = predicted_risk(score);
        const double observed = static_cast<double>(g.second) / static_cast<double>(g.first);
        total += static_cast<double>(g.first) * std::abs(predicted - observed);
    }
    return 100.0 * total / static_cast<double>(data.n());
}

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::size_t pos = 0;
    for (int y : labels) pos += (y == +1);
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) throw ArgumentError("AUC requires both classes");

    if (n <= 10000) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] != +1) continue;
            for (std::size_t k = 0; k < n; ++k) {
                if (labels[k] != -1) continue;
                if (scores[i] > scores[k]) {
                    sum += 1.0;
                } else if (scores[i] == scores[k]) {
                    sum += 0.5;
                }
            }
        }
        return sum / (static_cast<double>(pos) * static_cast<double>(neg));
    }

    // Rank-based Mann-Whitney with midranks for ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of i+1..j
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == +1) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double q = static_cast<double>(neg);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
}

double auc(const RiskScoreModel& model, const Dataset& data) {
    const std::vector<double> scores = model_scores(model, data);
    std::vector<int> labels(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) labels[i] = data.label(i);
    return auc_from_scores(scores, labels);
}

ReliabilityDiagram reliability_diagram(const RiskScoreModel& model, const Dataset& data) {
    const std::vector<double> scores = model_scores(model, data);
    std::map<double, std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto& g = groups[scores[i]];
        ++g.first;
        g.second += (data.label(i) == +1);
    }

    ReliabilityDiagram out;
    if (groups.size() <= 30) {
        for (const auto& [score, g] : groups) {
            out.points.push_back({predicted_risk(score),
                                  static_cast<double>(g.second) / static_cast<double>(g.first),
                                  g.first});
        }
        return out;
    }

    // 10 equal-frequency bins over the sorted scores.
    out.binned = true;
    std::vector<std::size_t> order(data.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    const std::size_t n = data.n();
    for (std::size_t b = 0; b < 10; ++b) {
        const std::size_t lo = b * n / 10;
        const std::size_t hi = (b + 1) * n / 10;
        if (lo >= hi) continue;
        double pred = 0.0;
        std::size_t positives = 0;
        for (std::size_t t = lo; t < hi; ++t) {
            pred += predicted_risk(scores[order[t]]);
            positives += (data.label(order[t]) == +1);
        }
        const std::size_t count = hi - lo;
        out.points.push_back({pred / static_cast<double>(count),
                              static_cast<double>(positives) / static_cast<double>(count),
                              count});
    }
    return out;
}

namespace {

std::string risk_percent(double risk) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * risk);
    return buf;
}

}  // namespace

RiskTable render_risk_table(const RiskScoreModel& model, const Dataset& data) {
    // Observed distinct point totals (intercept excluded from the display;
    // the risk column includes it).
    std::map<std::int64_t, bool> seen;
    bool integral = true;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double p = model.points(data, i);
        if (std::abs(p - std::round(p)) > 1e-9) {
            integral = false;
            break;
        }
        seen[static_cast<std::int64_t>(std::llround(p))] = true;
    }
    RiskTable out;
    if (!integral || seen.empty()) {
        // Non-integer scores: fall back to binned rows over total scores.
        const ReliabilityDiagram diagram = reliability_diagram(model, data);
        std::ostringstream score_line, risk_line;
        score_line << "BIN  |";
        risk_line << "RISK |";
        for (std::size_t b = 0; b < diagram.points.size(); ++b) {
            score_line << ' ' << (b + 1);
            risk_line << ' ' << risk_percent(diagram.points[b].predicted);
        }
        out.rendered = score_line.str() + "\n" + risk_line.str() + "\n";
        for (std::size_t b = 0; b < diagram.points.size(); ++b) {
            out.rows.push_back({static_cast<std::int64_t>(b), static_cast<std::int64_t>(b),
                                diagram.points[b].predicted, false, false});
        }
        return out;
    }

    const double intercept = static_cast<double>(model.coefficients[0]);
    std::vector<std::int64_t> scores;
    for (const auto& [s, _] : seen) scores.push_back(s);

    auto risk_at = [&](std::int64_t s) {
        return predicted_risk(static_cast<double>(s) + intercept);
    };

    // Leading run with risk < 5% and trailing run with risk > 95% collapse
    // when they hold at least two observed scores.
    std::size_t lead = 0;
    while (lead < scores.size() && risk_at(scores[lead]) < 0.05) ++lead;
    std::size_t trail = scores.size();
    while (trail > lead && risk_at(scores[trail - 1]) > 0.95) --trail;

    const bool collapse_low = lead >= 2;
    const bool collapse_high = scores.size() - trail >= 2;

    if (collapse_low) {
        out.rows.push_back({scores.front(), scores[lead - 1], 0.05, true, false});
    }
    const std::size_t body_lo = collapse_low ? lead : 0;
    const std::size_t body_hi = collapse_high ? trail : scores.size();
    for (std::size_t t = body_lo; t < body_hi; ++t) {
        out.rows.push_back({scores[t], scores[t], risk_at(scores[t]), false, false});
    }
    if (collapse_high) {
        out.rows.push_back({scores[trail], scores.back(), 0.95, false, true});
    }

    std::vector<std::string> score_cells, risk_cells;
    for (const auto& row : out.rows) {
        if (row.below_cut) {
            score_cells.push_back(std::to_string(row.score_lo) + " to " +
                                  std::to_string(row.score_hi));
            risk_cells.push_back("< 5.0%");
        } else if (row.above_cut) {
            score_cells.push_back(std::to_string(row.score_lo) + " to " +
                                  std::to_string(row.score_hi));
            risk_cells.push_back("> 95.0%");
        } else {
            score_cells.push_back(std::to_string(row.score_lo));
            risk_cells.push_back(risk_percent(row.risk));
        }
    }
    std::ostringstream score_line, risk_line;
    score_line << "SCORE |";
    risk_line << "RISK  |";
    for (std::size_t c = 0; c < score_cells.size(); ++c) {
        const std::size_t width = std::max(score_cells[c].size(), risk_cells[c].size());
        score_line << ' ' << score_cells[c] << std::string(width - score_cells[c].size(), ' ');
        risk_line << ' ' << risk_cells[c] << std::string(width - risk_cells[c].size(), ' ');
        if (c + 1 < score_cells.size()) {
            score_line << " |";
            risk_line << " |";
        }
    }
    out.rendered = score_line.str() + "\n" + risk_line.str() + "\n";
    return out;
}

MetricSet evaluate_model(const RiskScoreModel& model, const Dataset& data) {
    MetricSet out;
    out.cal = cal(model, data);
    out.auc = auc(model, data);
    std::vector<double> real(model.coefficients.begin(), model.coefficients.end());
    out.loss = loss_value(real, data);
    return out;
}

CvReport cross_validate(const std::function<RiskScoreModel(const Dataset&)>& trainer,
                        const Dataset& data, int k, std::uint64_t seed) {
    const FoldAssignment folds = split_folds(data, k, seed);
    CvReport out;
    for (int f = 1; f <= k; ++f) {
        const Dataset train = data.subset(folds.train_rows(f));
        const Dataset test = data.subset(folds.test_rows(f));
        {
            std::size_t pos = test.positives();
            if (pos == 0 || pos == test.n()) {
                throw ValidationError("fold " + std::to_string(f) + " contains a single class");
            }
        }
        RiskScoreModel model = trainer(train);
        out.fold_test.push_back(evaluate_model(model, test));
        out.fold_models.push_back(std::move(model));
    }
    out.final_model = trainer(data);

    auto fold_metric = [&](auto pick) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& m : out.fold_test) {
            const double v = pick(m);
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::array<double, 3>{sum / static_cast<double>(out.fold_test.size()), lo, hi};
    };
    const auto c = fold_metric([](const MetricSet& m) { return m.cal; });
    const auto a = fold_metric([](const MetricSet& m) { return m.auc; });
    const auto l = fold_metric([](const MetricSet& m) { return m.loss; });
    out.mean = {c[0], a[0], l[0]};
    out.min = {c[1], a[1], l[1]};
    out.max = {c[2], a[2], l[2]};
    return out;
}

void save_model(const RiskScoreModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write model file '" + path + "'");
    out << "@format risk-score-model v1\n";
    out << "@method " << (model.method.empty() ? "unspecified" : model.method) << "\n";
    out << "@options " << (model.options_digest.empty() ? "-" : model.options_digest) << "\n";
    out << "@gap " << format_double(model.gap) << "\n";
    const std::int64_t intercept = model.coefficients.empty() ? 0 : model.coefficients[0];
    out << "@intercept " << intercept << "\n";
    for (std::size_t j = 1; j < model.coefficients.size(); ++j) {
        out << model.names[j] << ' ' << model.coefficients[j] << '\n';
    }
}

RiskScoreModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    RiskScoreModel model;
    model.names.push_back("(Intercept)");
    model.coefficients.push_back(0);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        if (line[0] == '@') {
            std::string key;
            ss >> key;
            if (key == "@method") {
                ss >> model.method;
            } else if (key == "@options") {
                ss >> model.options_digest;
            } else if (key == "@gap") {
                ss >> model.gap;
            } else if (key == "@intercept") {
                ss >> model.coefficients[0];
            }
            continue;
        }
        std::string name;
        std::int64_t points = 0;
        if (!(ss >> name >> points)) {
            throw ParseError("malformed model line '" + line + "'");
        }
        model.names.push_back(name);
        model.coefficients.push_back(points);
    }
    return model;
}

}  // namespace riskscore
