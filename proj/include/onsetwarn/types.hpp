#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace onsetwarn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws
/// Error{UnparseableDate} on malformed or non-existent dates.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

int year_of(const Date& date) noexcept;
int month_of(const Date& date) noexcept;
/// 1-based ordinal day within the year (1..366).
int day_of_year(const Date& date) noexcept;
/// Signed number of days from `from` to `to`.
int days_between(const Date& from, const Date& to) noexcept;
Date add_days(const Date& date, int days) noexcept;
Date last_day_of_year(int year) noexcept;

}  // namespace onsetwarn
