#pragma once

#include "admitlab/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace admitlab {

struct ColumnMapping {
    std::string label;  // informational case name, e.g. "Low informativeness"
    std::string skill_column;
    std::string group_column;
    std::vector<std::string> group_b_values;
    std::vector<std::string> feature_columns;  // test_column must be one of them
    std::string test_column;
    std::vector<std::string> categorical_columns;  // subset of feature_columns

    // Throws InputError when an invariant fails.
    void check() const;
};

// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF, newlines inside quotes.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

struct Dataset {
    std::vector<std::string> design_names;  // encoded columns, intercept excluded
    std::vector<bool> design_is_test;       // column derived from the test feature
    std::vector<std::vector<double>> rows;  // encoded feature values per kept row
    std::vector<double> skill;
    std::vector<std::uint8_t> is_b;
    std::size_t dropped = 0;
    std::vector<std::string> drop_report;  // one message per dropped row

    std::size_t size() const { return rows.size(); }
};

// Categoricals are one-hot encoded against the first level in sorted order.
Dataset load_csv(const std::string& path, const ColumnMapping& mapping);
Dataset load_csv(std::istream& in, const ColumnMapping& mapping);

struct FitResult {
    std::vector<double> coef;  // intercept first, then the selected design columns
    std::vector<std::size_t> columns;
    double residual_variance = 0.0;
    std::size_t n = 0;
    bool ridge_used = false;

    double predict(const std::vector<double>& row) const;
};

// Least squares on the rows of one group via Cholesky normal equations, ridge 1e-10 on failure.
FitResult fit_ols(const Dataset& d, Group g, bool with_test);
// Raw interface: X without intercept column.
FitResult fit_ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                  const std::vector<std::size_t>& columns);

struct GroupFits {
    FitResult with_test[2];
    FitResult without_test[2];
};

GroupFits fit_all(const Dataset& d);

struct ConfigResult {
    double merit = 0.0;      // mean true skill of admitted students
    double diversity = 0.0;  // share of group B among admitted
    std::uint64_t applicants = 0;
    std::uint64_t admitted = 0;
    std::uint64_t admitted_b = 0;
};

struct ExperimentResult {
    std::string label;
    double capacity = 0.0;
    double access_rate_b = 1.0;
    std::uint64_t seed = 0;
    ConfigResult with_test;
    ConfigResult without_test;
};

// Admits floor(n * C) students in each configuration; without access, group-B students cannot
// apply under the test requirement.
ExperimentResult run_experiment(const Dataset& d, const GroupFits& fits, double capacity,
                                double access_rate_b, std::uint64_t seed);
ExperimentResult run_experiment(const Dataset& d, double capacity, double access_rate_b,
                                std::uint64_t seed);

// Rows: informational case; columns: merit and diversity with/without the test.
void write_table_csv(std::ostream& out, const std::vector<ExperimentResult>& rows);

// Synthetic applicant cohort with class rank, college, first-year GPA, test score and a later
// GPA used as skill. Group B's class rank is nearly uninformative; test scores of some group-A
// students carry coaching inflation.
void write_synthetic_csv(std::ostream& out, std::size_t n, std::uint64_t seed);
// Cohort generated from a model scenario: columns group, skill, f1..fK.
void write_model_csv(std::ostream& out, const Scenario& s, std::size_t n, std::uint64_t seed);
ColumnMapping model_mapping(const Scenario& s);

}  // namespace admitlab
