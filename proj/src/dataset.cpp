#include "riskscore/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "riskscore/rng.hpp"

namespace riskscore {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw ParseError("missing value at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    }
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("non-numeric cell '" + t + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    }
    return value;
}

int normalize_label(double v, std::size_t row) {
    if (v == 1.0) return +1;
    if (v == 0.0 || v == -1.0) return -1;
    throw ValidationError("label " + format_double(v) + " at row " + std::to_string(row) +
                          " is outside {0,1,-1,+1}");
}

bool all_integral(const std::vector<double>& values) {
    for (double v : values) {
        if (v != std::floor(v)) return false;
    }
    return true;
}

}  // namespace

void Dataset::validate() const {
    if (labels_.empty()) throw ValidationError("dataset has no rows");
    if (names_.empty() || names_[0] != "(Intercept)") {
        throw ValidationError("name 0 must be (Intercept)");
    }
    std::set<std::string> seen;
    for (const auto& name : names_) {
        if (!seen.insert(name).second) {
            throw ValidationError("duplicate feature name '" + name + "'");
        }
    }
    const std::size_t width = names_.size();
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (values_[i * width] != 1.0) {
            throw ValidationError("intercept column is not 1 at row " + std::to_string(i + 1));
        }
        if (labels_[i] != 1 && labels_[i] != -1) {
            throw ValidationError("label outside {-1,+1} at row " + std::to_string(i + 1));
        }
    }
}

Dataset Dataset::build(const std::vector<std::vector<double>>& feature_rows,
                       const std::vector<int>& labels,
                       std::vector<std::string> feature_names,
                       std::string outcome_name) {
    if (feature_rows.size() != labels.size()) {
        throw ArgumentError("feature rows and labels disagree in length");
    }
    if (feature_rows.empty()) throw ArgumentError("empty dataset");
    const std::size_t d = feature_rows.front().size();
    if (feature_names.empty()) {
        for (std::size_t j = 0; j < d; ++j) feature_names.push_back("x" + std::to_string(j + 1));
    }
    if (feature_names.size() != d) throw ArgumentError("feature name count mismatch");

    Dataset out;
    out.outcome_name_ = std::move(outcome_name);
    out.names_.reserve(d + 1);
    out.names_.push_back("(Intercept)");
    for (auto& name : feature_names) out.names_.push_back(std::move(name));
    out.values_.reserve(labels.size() * (d + 1));
    out.labels_.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (feature_rows[i].size() != d) {
            throw ArgumentError("ragged feature row at index " + std::to_string(i));
        }
        out.values_.push_back(1.0);
        for (double v : feature_rows[i]) {
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
            out.values_.push_back(v);
        }
        out.labels_.push_back(normalize_label(labels[i], i + 1));
    }
    out.integer_valued_ = all_integral(out.values_);
    out.validate();
    return out;
}

double Dataset::score(std::span<const double> coef, std::size_t i) const {
    const std::size_t width = dim() + 1;
    if (coef.size() != width) throw ArgumentError("coefficient dimension mismatch");
    const double* x = values_.data() + i * width;
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += coef[j] * x[j];
    return s;
}

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(
        std::count(labels_.begin(), labels_.end(), +1));
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    if (rows.empty()) throw ArgumentError("empty row subset");
    Dataset out;
    out.names_ = names_;
    out.outcome_name_ = outcome_name_;
    const std::size_t width = dim() + 1;
    out.values_.reserve(rows.size() * width);
    out.labels_.reserve(rows.size());
    for (std::size_t i : rows) {
        if (i >= n()) throw ArgumentError("row index out of range");
        out.values_.insert(out.values_.end(), values_.begin() + i * width,
                           values_.begin() + (i + 1) * width);
        out.labels_.push_back(labels_[i]);
    }
    out.integer_valued_ = all_integral(out.values_);
    return out;
}

std::size_t Dataset::feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (names_[j] == name) return j;
    }
    throw ArgumentError("unknown feature name '" + name + "'");
}

Dataset load_csv(const std::string& path, const std::string& outcome_column) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file '" + path + "'");
    const std::vector<std::string> raw_header = split_line(line);
    std::vector<std::string> header;
    header.reserve(raw_header.size());
    for (const auto& h : raw_header) header.push_back(trim(h));

    std::size_t outcome_idx = 0;
    if (!outcome_column.empty()) {
        auto it = std::find(header.begin(), header.end(), outcome_column);
        if (it == header.end()) {
            throw ParseError("outcome column '" + outcome_column + "' not found in '" + path + "'");
        }
        outcome_idx = static_cast<std::size_t>(it - header.begin());
    }

    Dataset out;
    out.outcome_name_ = header[outcome_idx];
    out.names_.push_back("(Intercept)");
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != outcome_idx) out.names_.push_back(header[j]);
    }

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        out.values_.push_back(1.0);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = parse_cell(cells[j], row, j + 1);
            if (j == outcome_idx) {
                out.labels_.push_back(normalize_label(v, row));
            } else {
                out.values_.push_back(v);
            }
        }
    }
    if (out.labels_.empty()) throw ParseError("no data rows in '" + path + "'");
    out.integer_valued_ = all_integral(out.values_);
    out.validate();
    return out;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw ParseError("cannot write file '" + path + "'");
    outf << data.outcome_name();
    for (std::size_t j = 1; j <= data.dim(); ++j) outf << ',' << data.names()[j];
    outf << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        outf << data.label(i);
        for (std::size_t j = 1; j <= data.dim(); ++j) {
            outf << ',' << format_double(data.x(i, j));
        }
        outf << '\n';
    }
}

std::vector<std::size_t> FoldAssignment::train_rows(int f) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] != f) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldAssignment::test_rows(int f) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] == f) rows.push_back(i);
    }
    return rows;
}

FoldAssignment split_folds(const Dataset& data, int k, std::uint64_t seed) {
    const std::size_t n = data.n();
    if (k < 2 || static_cast<std::size_t>(k) > n) {
        throw ArgumentError("fold count " + std::to_string(k) + " is outside [2, n]");
    }
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) {
        (data.label(i) == +1 ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw ValidationError("both classes must be present to split folds");
    }

    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);

    FoldAssignment out;
    out.fold.assign(n, 0);
    out.k = k;
    out.seed = seed;
    // Deal each stratum cyclically; the cursor carries over so total fold
    // sizes stay balanced as well.
    int cursor = 0;
    for (std::size_t i : pos) {
        out.fold[i] = cursor + 1;
        cursor = (cursor + 1) % k;
    }
    for (std::size_t i : neg) {
        out.fold[i] = cursor + 1;
        cursor = (cursor + 1) % k;
    }
    for (int f = 1; f <= k; ++f) {
        if (std::count(out.fold.begin(), out.fold.end(), f) == 0) {
            throw ValidationError("fold " + std::to_string(f) + " is empty");
        }
    }
    return out;
}

SyntheticCollection simulate_nested(const Dataset& original,
                                    std::vector<std::size_t> dims,
                                    std::vector<std::size_t> sizes,
                                    std::uint64_t seed) {
    if (dims.empty() || sizes.empty()) throw ArgumentError("dims and sizes must be non-empty");
    if (!std::is_sorted(dims.begin(), dims.end()) ||
        !std::is_sorted(sizes.begin(), sizes.end())) {
        throw ArgumentError("dims and sizes must be increasing");
    }
    const std::size_t d_orig = original.dim();
    for (std::size_t i = 0; i < original.n(); ++i) {
        for (std::size_t j = 1; j <= d_orig; ++j) {
            const double v = original.x(i, j);
            if (v != std::floor(v) || v < 0.0 || v > 10.0) {
                throw ValidationError("original features must be integers in [0,10]; found " +
                                      format_double(v) + " at row " + std::to_string(i + 1));
            }
        }
    }

    const std::size_t d_max = dims.back();
    const std::size_t n_max = sizes.back();
    Rng rng(seed);

    // Feature index map for the largest dataset: whole permuted copies of the
    // original feature list, then a without-replacement sample for the rest.
    std::vector<std::size_t> feature_map;
    feature_map.reserve(d_max);
    const std::size_t full_blocks = d_max / d_orig;
    for (std::size_t b = 0; b < full_blocks; ++b) {
        std::vector<std::size_t> perm(d_orig);
        std::iota(perm.begin(), perm.end(), std::size_t{1});
        rng.shuffle(perm);
        feature_map.insert(feature_map.end(), perm.begin(), perm.end());
    }
    const std::size_t remainder = d_max - full_blocks * d_orig;
    if (remainder > 0) {
        std::vector<std::size_t> pool(d_orig);
        std::iota(pool.begin(), pool.end(), std::size_t{1});
        rng.shuffle(pool);
        feature_map.insert(feature_map.end(), pool.begin(), pool.begin() + remainder);
    }

    std::vector<std::vector<double>> rows(n_max, std::vector<double>(d_max));
    std::vector<int> labels(n_max);
    for (std::size_t i = 0; i < n_max; ++i) {
        const std::size_t l = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(original.n()) - 1));
        labels[i] = original.label(l);
        for (std::size_t j = 0; j < d_max; ++j) {
            const double noise = rng.normal(0.0, 0.5);
            double v = std::round(original.x(l, feature_map[j]) + noise);
            rows[i][j] = std::min(10.0, std::max(0.0, v));
        }
    }

    std::vector<std::string> names(d_max);
    for (std::size_t j = 0; j < d_max; ++j) {
        names[j] = original.names()[feature_map[j]] + "_" + std::to_string(j + 1);
    }

    SyntheticCollection out;
    out.dims = dims;
    out.sizes = sizes;
    out.datasets.reserve(dims.size() * sizes.size());
    for (std::size_t d : dims) {
        for (std::size_t n : sizes) {
            std::vector<std::vector<double>> block(n);
            std::vector<int> y(labels.begin(), labels.begin() + n);
            for (std::size_t i = 0; i < n; ++i) {
                block[i].assign(rows[i].begin(), rows[i].begin() + d);
            }
            std::vector<std::string> block_names(names.begin(), names.begin() + d);
            out.datasets.push_back(
                Dataset::build(block, y, block_names, original.outcome_name()));
        }
    }
    return out;
}

}  // namespace riskscore
