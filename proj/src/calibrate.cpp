#include "admitlab/calibrate.hpp"

#include "admitlab/errors.hpp"
#include "admitlab/rng.hpp"
#include "admitlab/statfns.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace admitlab {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

bool parse_double(const std::string& cell, double& out) {
    auto b = cell.data(), e = cell.data() + cell.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    if (b == e) return false;
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void ColumnMapping::check() const {
    if (skill_column.empty()) throw InputError("mapping: skill_column is required");
    if (group_column.empty()) throw InputError("mapping: group_column is required");
    if (group_b_values.empty()) throw InputError("mapping: group_b_values must not be empty");
    if (feature_columns.empty()) throw InputError("mapping: feature_columns must not be empty");
    if (!contains(feature_columns, test_column))
        throw InputError("mapping: test_column '" + test_column + "' is not among feature_columns");
    if (contains(feature_columns, skill_column))
        throw InputError("mapping: skill_column must not be a feature");
    std::set<std::string> uniq(feature_columns.begin(), feature_columns.end());
    if (uniq.size() != feature_columns.size()) throw InputError("mapping: repeated feature column");
    for (const auto& c : categorical_columns)
        if (!contains(feature_columns, c))
            throw InputError("mapping: categorical column '" + c + "' is not a feature");
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
        any = false;
    };
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get(c);
            end_row();
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
        }
    }
    if (quoted) throw InputError("csv: unterminated quoted field");
    if (any || !row.empty()) end_row();
    return rows;
}

Dataset load_csv(const std::string& path, const ColumnMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    return load_csv(in, mapping);
}

Dataset load_csv(std::istream& in, const ColumnMapping& mapping) {
    mapping.check();
    auto table = parse_csv(in);
    if (table.empty()) throw InputError("csv: header row required");
    auto header = table.front();
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (!col.emplace(header[j], j).second) throw InputError("csv: duplicated header '" + header[j] + "'");
    auto index_of = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw InputError("csv: missing column '" + name + "'");
        return it->second;
    };
    const std::size_t skill_j = index_of(mapping.skill_column), group_j = index_of(mapping.group_column);
    std::vector<std::size_t> feat_j;
    for (const auto& f : mapping.feature_columns) feat_j.push_back(index_of(f));

    Dataset d;
    struct Raw {
        std::vector<std::string> cells;  // one per feature
        double skill;
        bool b;
    };
    std::vector<Raw> kept;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        const std::size_t line = r + 1;
        auto cell = [&](std::size_t j) -> std::string { return j < row.size() ? row[j] : std::string(); };
        auto drop = [&](const std::string& why) {
            ++d.dropped;
            d.drop_report.push_back("row " + std::to_string(line) + ": " + why);
        };
        std::string missing;
        for (auto [name, j] : {std::pair{mapping.skill_column, skill_j}, std::pair{mapping.group_column, group_j}})
            if (blank(cell(j))) missing = name;
        for (std::size_t f = 0; f < feat_j.size() && missing.empty(); ++f)
            if (blank(cell(feat_j[f]))) missing = mapping.feature_columns[f];
        if (!missing.empty()) {
            drop("missing value in '" + missing + "'");
            continue;
        }
        Raw raw;
        if (!parse_double(cell(skill_j), raw.skill)) {
            drop("unparseable value in '" + mapping.skill_column + "'");
            continue;
        }
        raw.b = contains(mapping.group_b_values, cell(group_j));
        bool ok = true;
        for (std::size_t f = 0; f < feat_j.size(); ++f) {
            std::string v = cell(feat_j[f]);
            double x;
            if (!contains(mapping.categorical_columns, mapping.feature_columns[f]) && !parse_double(v, x)) {
                drop("unparseable value in '" + mapping.feature_columns[f] + "'");
                ok = false;
                break;
            }
            raw.cells.push_back(std::move(v));
        }
        if (ok) kept.push_back(std::move(raw));
    }

    // Encoding plan: numeric columns map to one design column, categoricals to L-1 indicators.
    struct Plan {
        bool categorical;
        std::vector<std::string> levels;  // non-reference levels
    };
    std::vector<Plan> plan;
    for (std::size_t f = 0; f < mapping.feature_columns.size(); ++f) {
        const auto& name = mapping.feature_columns[f];
        const bool is_test = name == mapping.test_column;
        Plan p{contains(mapping.categorical_columns, name), {}};
        if (p.categorical) {
            std::set<std::string> lv;
            for (const auto& r : kept) lv.insert(r.cells[f]);
            p.levels.assign(lv.begin(), lv.end());
            if (!p.levels.empty()) p.levels.erase(p.levels.begin());
            for (const auto& l : p.levels) {
                d.design_names.push_back(name + "=" + l);
                d.design_is_test.push_back(is_test);
            }
        } else {
            d.design_names.push_back(name);
            d.design_is_test.push_back(is_test);
        }
        plan.push_back(std::move(p));
    }

    for (auto& r : kept) {
        std::vector<double> x;
        x.reserve(d.design_names.size());
        for (std::size_t f = 0; f < plan.size(); ++f) {
            if (plan[f].categorical) {
                for (const auto& l : plan[f].levels) x.push_back(r.cells[f] == l ? 1.0 : 0.0);
            } else {
                double v;
                parse_double(r.cells[f], v);
                x.push_back(v);
            }
        }
        d.rows.push_back(std::move(x));
        d.skill.push_back(r.skill);
        d.is_b.push_back(r.b ? 1 : 0);
    }
    return d;
}

double FitResult::predict(const std::vector<double>& row) const {
    double y = coef[0];
    for (std::size_t j = 0; j < columns.size(); ++j) y += coef[j + 1] * row[columns[j]];
    return y;
}

FitResult fit_ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                  const std::vector<std::size_t>& columns) {
    const std::size_t n = X.size(), p = columns.size() + 1;
    if (y.size() != n) throw InputError("ols: response length does not match design rows");
    if (p >= n) throw InputError("ols: need more rows than parameters (n=" + std::to_string(n) +
                                 ", p=" + std::to_string(p) + ")");
    Eigen::MatrixXd A(n, p);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        for (std::size_t j = 0; j < columns.size(); ++j) A(i, j + 1) = X[i][columns[j]];
        b(i) = y[i];
    }
    Eigen::MatrixXd G = A.transpose() * A;
    Eigen::VectorXd rhs = A.transpose() * b;

    FitResult fr;
    fr.columns = columns;
    fr.n = n;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    constexpr double kRcondFloor = 1e-13;
    if (llt.info() != Eigen::Success || llt.rcond() < kRcondFloor) {
        fr.ridge_used = true;
        llt.compute(G + 1e-10 * Eigen::MatrixXd::Identity(p, p));
        if (llt.info() != Eigen::Success) throw InputError("ols: design is rank-deficient after ridge fallback");
    }
    Eigen::VectorXd beta = llt.solve(rhs);
    fr.coef.assign(beta.data(), beta.data() + p);
    double rss = (A * beta - b).squaredNorm();
    fr.residual_variance = rss / static_cast<double>(n - p);
    return fr;
}

FitResult fit_ols(const Dataset& d, Group g, bool with_test) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < d.design_names.size(); ++j)
        if (with_test || !d.design_is_test[j]) cols.push_back(j);
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    const std::uint8_t want = g == Group::B;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.is_b[i] != want) continue;
        X.push_back(d.rows[i]);
        y.push_back(d.skill[i]);
    }
    return fit_ols(X, y, cols);
}

GroupFits fit_all(const Dataset& d) {
    GroupFits f;
    for (int g = 0; g < 2; ++g) {
        Group grp = g ? Group::B : Group::A;
        f.with_test[g] = fit_ols(d, grp, true);
        f.without_test[g] = fit_ols(d, grp, false);
    }
    return f;
}

namespace {

ConfigResult admit_top(const Dataset& d, const std::vector<std::size_t>& pool,
                       const std::vector<double>& pred, std::size_t k) {
    if (k == 0 || pool.empty()) throw InputError("experiment: empty admit set");
    if (k > pool.size()) throw InputError("experiment: capacity exceeds the applicant pool");
    std::vector<std::size_t> idx = pool;
    auto better = [&](std::size_t x, std::size_t y) { return pred[x] > pred[y] || (pred[x] == pred[y] && x < y); };
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), better);
    ConfigResult r;
    r.applicants = pool.size();
    r.admitted = k;
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        sum += d.skill[idx[j]];
        r.admitted_b += d.is_b[idx[j]];
    }
    r.merit = sum / static_cast<double>(k);
    r.diversity = static_cast<double>(r.admitted_b) / static_cast<double>(k);
    return r;
}

}  // namespace

ExperimentResult run_experiment(const Dataset& d, const GroupFits& fits, double capacity,
                                double access_rate_b, std::uint64_t seed) {
    if (!(capacity > 0.0 && capacity < 1.0)) throw InputError("experiment: capacity must lie in (0,1)");
    if (!(access_rate_b >= 0.0 && access_rate_b <= 1.0))
        throw InputError("experiment: access rate must lie in [0,1]");
    const std::size_t n = d.size();
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * capacity));

    CounterRng rng(seed, 0xCA11B);
    std::vector<double> pred_with(n), pred_without(n);
    std::vector<std::size_t> pool_with, pool_without;
    for (std::size_t i = 0; i < n; ++i) {
        const int g = d.is_b[i];
        pred_with[i] = fits.with_test[g].predict(d.rows[i]);
        pred_without[i] = fits.without_test[g].predict(d.rows[i]);
        pool_without.push_back(i);
        if (!g || rng.uniform_at(i) < access_rate_b) pool_with.push_back(i);
    }

    ExperimentResult r;
    r.capacity = capacity;
    r.access_rate_b = access_rate_b;
    r.seed = seed;
    r.with_test = admit_top(d, pool_with, pred_with, k);
    r.without_test = admit_top(d, pool_without, pred_without, k);
    return r;
}

ExperimentResult run_experiment(const Dataset& d, double capacity, double access_rate_b, std::uint64_t seed) {
    return run_experiment(d, fit_all(d), capacity, access_rate_b, seed);
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

void write_table_csv(std::ostream& out, const std::vector<ExperimentResult>& rows) {
    auto old = out.precision(17);
    out << "case,capacity,gamma_b,merit_with_test,merit_without_test,diversity_with_test,"
           "diversity_without_test,admitted\n";
    for (const auto& r : rows) {
        out << csv_quote(r.label) << ',' << r.capacity << ',' << r.access_rate_b << ',' << r.with_test.merit << ','
            << r.without_test.merit << ',' << r.with_test.diversity << ',' << r.without_test.diversity << ','
            << r.with_test.admitted << '\n';
    }
    out.precision(old);
}

void write_synthetic_csv(std::ostream& out, std::size_t n, std::uint64_t seed) {
    // Per-student draws: group, skill, rank noise, college, first-year noise, test noise,
    // coaching indicator, coaching size.
    constexpr std::uint64_t kSlots = 8;
    CounterRng rng(seed, 0x5EED);
    auto old = out.precision(10);
    out << "student_id,group,class_rank,college,first_year_gpa,test_score,college_gpa\n";
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t c = i * kSlots;
        const bool b = rng.uniform_at(c) < 0.5;
        const double q = rng.normal_at(c + 1);
        const double rank = q + (b ? 15.0 : 1.0) * rng.normal_at(c + 2);
        const int college = static_cast<int>(rng.uniform_at(c + 3) * 4.0);
        const double fy = q + 0.3 * rng.normal_at(c + 4);
        double test = q + 0.5 * rng.normal_at(c + 5);
        if (rng.uniform_at(c + 6) < (b ? 0.05 : 0.25)) test += -2.5 * std::log(rng.uniform_at(c + 7));
        out << i + 1 << ',' << (b ? "B" : "A") << ',' << rank << ",C" << college + 1 << ',' << fy << ','
            << test << ',' << q << '\n';
    }
    out.precision(old);
}

void write_model_csv(std::ostream& out, const Scenario& s, std::size_t n, std::uint64_t seed) {
    const std::size_t K = s.num_features();
    const std::uint64_t slots = K + 2;
    CounterRng rng(seed, 0x30DE1);
    auto old = out.precision(17);
    out << "group,skill";
    for (std::size_t k = 0; k < K; ++k) out << ",f" << k + 1;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t c = i * slots;
        const bool b = rng.uniform_at(c) < s.pi;
        const double q = s.prior_mean + s.sigma() * rng.normal_at(c + 1);
        out << (b ? "B" : "A") << ',' << q;
        const auto& gp = s.params(b ? Group::B : Group::A);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& fn = gp.features[k];
            out << ',' << q + fn.bias + std::sqrt(fn.variance) * rng.normal_at(c + 2 + k);
        }
        out << '\n';
    }
    out.precision(old);
}

ColumnMapping model_mapping(const Scenario& s) {
    ColumnMapping m;
    m.label = "model";
    m.skill_column = "skill";
    m.group_column = "group";
    m.group_b_values = {"B"};
    for (std::size_t k = 0; k < s.num_features(); ++k) m.feature_columns.push_back("f" + std::to_string(k + 1));
    m.test_column = m.feature_columns.back();
    return m;
}

}  // namespace admitlab
