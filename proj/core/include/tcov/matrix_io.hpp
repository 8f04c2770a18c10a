#ifndef TCOV_MATRIX_IO_HPP
#define TCOV_MATRIX_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "tcov/hermitian.hpp"

namespace tcov {

// Text format: a line holding m, then m rows of m entries written as
// "re{+|-}imj", e.g. "1.5-0.25j". Doubles use the shortest round-trip form.

std::string format_double(double v);
std::string format_complex(Complex z);

/// Parses "re{+|-}imj", a bare real ("2.5") or a bare imaginary ("-3j").
Complex parse_complex(std::string_view token);

void write_matrix(std::ostream& os, const Matrix& a);
Matrix read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Matrix& a);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace tcov

#endif  // TCOV_MATRIX_IO_HPP
