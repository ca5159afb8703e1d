#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace conelab {

/// Shortest decimal string that parses back to exactly `value`, always with
/// '.' as separator ("nan", "inf", "-inf" for non-finite values).
std::string format_real(double value);

/// Writes one comma-separated line terminated by '\n'. Fields are written as
/// given; callers format numbers with format_real.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
void write_csv_row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace conelab
