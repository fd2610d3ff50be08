#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wcopt/rng.hpp"
#include "wcopt/vec.hpp"

namespace wcopt {

// Row-compressed feature matrix with optional +-1 labels and a boolean mask
// marking the minority subset of the rows.
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;
    std::optional<std::vector<double>> labels;
    std::optional<std::vector<std::uint8_t>> group_mask;

    void add_row(const std::vector<std::pair<std::uint32_t, double>>& entries) {
        for (const auto& [j, v] : entries) {
            col_idx.push_back(j);
            values.push_back(v);
            if (j + 1 > cols) cols = j + 1;
        }
        row_ptr.push_back(col_idx.size());
        ++rows;
    }

    void add_dense_row(const Vector& a) {
        for (std::uint32_t j = 0; j < a.size(); ++j) {
            col_idx.push_back(j);
            values.push_back(a[j]);
        }
        if (a.size() > cols) cols = a.size();
        row_ptr.push_back(col_idx.size());
        ++rows;
    }

    double row_dot(std::size_t i, const Vector& x) const {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            s += values[k] * x[col_idx[k]];
        return s;
    }

    // out += coef * a_i
    void row_axpy(std::size_t i, double coef, Vector& out) const {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            out[col_idx[k]] += coef * values[k];
    }

    double row_sq_norm(std::size_t i) const {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            s += values[k] * values[k];
        return s;
    }

    double max_row_sq_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows; ++i) m = std::max(m, row_sq_norm(i));
        return m;
    }

    Vector dense_row(std::size_t i) const {
        Vector a(cols, 0.0);
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            a[col_idx[k]] = values[k];
        return a;
    }

    std::size_t minority_count() const {
        if (!group_mask) return 0;
        std::size_t c = 0;
        for (auto b : *group_mask) c += b ? 1 : 0;
        return c;
    }

    void pad_columns(std::size_t d) {
        if (d > cols) cols = d;
    }
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line,
                                    const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double(const std::string& tok, const std::string& path,
                           std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) parse_fail(path, line, "trailing junk in number '" + tok + "'");
        return v;
    } catch (const std::invalid_argument&) {
        parse_fail(path, line, "expected a number, got '" + tok + "'");
    } catch (const std::out_of_range&) {
        parse_fail(path, line, "number out of range: '" + tok + "'");
    }
}

}  // namespace detail

// LIBSVM text rows: "label idx:val idx:val ..." with 1-based indices.
// The matrix width is the largest index seen; a bare label is an all-zero row.
inline Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);
    Dataset ds;
    ds.labels.emplace();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;  // blank line
        ds.labels->push_back(detail::parse_double(tok, path, lineno));
        std::vector<std::pair<std::uint32_t, double>> entries;
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                detail::parse_fail(path, lineno, "expected idx:val, got '" + tok + "'");
            const std::string idx_s = tok.substr(0, colon);
            const std::string val_s = tok.substr(colon + 1);
            std::uint32_t idx = 0;
            const auto [p, ec] =
                std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
            if (ec != std::errc{} || p != idx_s.data() + idx_s.size() || idx == 0)
                detail::parse_fail(path, lineno, "bad 1-based index '" + idx_s + "'");
            entries.emplace_back(idx - 1, detail::parse_double(val_s, path, lineno));
        }
        ds.add_row(entries);
    }
    return ds;
}

inline void save_libsvm(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_libsvm: cannot open " + path);
    char buf[64];
    for (std::size_t i = 0; i < ds.rows; ++i) {
        const double label = ds.labels ? (*ds.labels)[i] : 1.0;
        std::snprintf(buf, sizeof buf, "%.17g", label);
        out << buf;
        for (std::size_t k = ds.row_ptr[i]; k < ds.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.values[k]);
            out << ' ' << (ds.col_idx[k] + 1) << ':' << buf;
        }
        out << '\n';
    }
}

// CSV with a header row. label_column / group_column name the special columns
// ("" = absent); every other column is a feature, in header order.
inline Dataset load_csv(const std::string& path, const std::string& label_column = "",
                        const std::string& group_column = "") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    };

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    const auto header = split(line);
    std::ptrdiff_t label_at = -1, group_at = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (!label_column.empty() && header[j] == label_column) label_at = j;
        if (!group_column.empty() && header[j] == group_column) group_at = j;
    }
    if (!label_column.empty() && label_at < 0)
        throw std::runtime_error("load_csv: no column named '" + label_column + "'");
    if (!group_column.empty() && group_at < 0)
        throw std::runtime_error("load_csv: no column named '" + group_column + "'");

    Dataset ds;
    if (label_at >= 0) ds.labels.emplace();
    if (group_at >= 0) ds.group_mask.emplace();
    std::size_t n_features = header.size() - (label_at >= 0 ? 1 : 0) - (group_at >= 0 ? 1 : 0);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            detail::parse_fail(path, lineno,
                               "expected " + std::to_string(header.size()) +
                                   " cells, got " + std::to_string(cells.size()));
        Vector a;
        a.reserve(n_features);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = detail::parse_double(cells[j], path, lineno);
            if (static_cast<std::ptrdiff_t>(j) == label_at) {
                if (v != 1.0 && v != -1.0)
                    detail::parse_fail(path, lineno, "labels must be +1 or -1");
                ds.labels->push_back(v);
            } else if (static_cast<std::ptrdiff_t>(j) == group_at) {
                ds.group_mask->push_back(v != 0.0 ? 1 : 0);
            } else {
                a.push_back(v);
            }
        }
        ds.add_dense_row(a);
    }
    ds.pad_columns(n_features);
    return ds;
}

// ---- synthetic generators (desk-scale stand-ins for the real datasets) ----

struct FairnessData {
    Dataset train;      // n labeled rows
    Dataset unlabeled;  // n rows with the minority mask
};

// Two Gaussian class-conditional clouds at distance `separation` along a
// random unit direction, coordinate noise N(0, 1/d). The unlabeled half gets
// a uniformly random minority mask of exactly round(fraction * n) rows.
inline FairnessData generate_fairness_data(std::size_t n, std::size_t d,
                                           std::uint64_t seed,
                                           double minority_fraction = 0.3,
                                           double separation = 1.0) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("generate_fairness_data: n, d must be >= 1");
    Rng rng(seed);
    Vector dir = rng.normal_vector(d);
    scale(1.0 / std::max(norm2(dir), 1e-300), dir);
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));

    auto draw_row = [&](double label) {
        Vector a(d);
        for (std::size_t j = 0; j < d; ++j)
            a[j] = label * 0.5 * separation * dir[j] + sd * rng.normal();
        return a;
    };

    FairnessData out;
    out.train.labels.emplace();
    for (std::size_t i = 0; i < n; ++i) {
        const double label = rng.uniform() < 0.5 ? 1.0 : -1.0;
        out.train.add_dense_row(draw_row(label));
        out.train.labels->push_back(label);
    }
    out.unlabeled.group_mask.emplace();
    for (std::size_t i = 0; i < n; ++i) {
        const double label = rng.uniform() < 0.5 ? 1.0 : -1.0;
        out.unlabeled.add_dense_row(draw_row(label));
        out.unlabeled.group_mask->push_back(0);
    }
    // exact minority cardinality via partial Fisher-Yates
    const auto want = static_cast<std::size_t>(std::llround(minority_fraction * n));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < want && i < n; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
        (*out.unlabeled.group_mask)[idx[i]] = 1;
    }
    out.train.pad_columns(d);
    out.unlabeled.pad_columns(d);
    return out;
}

// K Gaussian classes with means `separation` from the origin in random
// directions; one dataset per class.
inline std::vector<Dataset> generate_multiclass_data(std::size_t n_classes,
                                                     std::size_t n_per_class,
                                                     std::size_t d, std::uint64_t seed,
                                                     double separation = 1.0) {
    if (n_classes < 2)
        throw std::invalid_argument("generate_multiclass_data: need >= 2 classes");
    Rng rng(seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Dataset> out(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        Vector mean = rng.normal_vector(d);
        scale(separation / std::max(norm2(mean), 1e-300), mean);
        for (std::size_t i = 0; i < n_per_class; ++i) {
            Vector a(d);
            for (std::size_t j = 0; j < d; ++j) a[j] = mean[j] + sd * rng.normal();
            out[k].add_dense_row(a);
        }
        out[k].pad_columns(d);
    }
    return out;
}

}  // namespace wcopt
