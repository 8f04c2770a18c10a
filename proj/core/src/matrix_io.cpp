#include "tcov/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace tcov {

namespace {

double parse_double(std::string_view s, std::string_view token) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError("malformed complex entry '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_complex(Complex z) {
  std::string out = format_double(z.real());
  const double im = z.imag();
  // Keep the sign of negative zero so that the entry round-trips bit-exactly.
  out += std::signbit(im) ? '-' : '+';
  out += format_double(std::abs(im));
  out += 'j';
  return out;
}

Complex parse_complex(std::string_view token) {
  if (token.empty()) throw ValidationError("empty complex entry");
  if (token.back() != 'j' && token.back() != 'i') {
    return {parse_double(token, token), 0.0};
  }
  const std::string_view body = token.substr(0, token.size() - 1);
  // The imaginary part starts at the last sign that is not an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    const char c = body[k];
    const char prev = body[k - 1];
    if ((c == '+' || c == '-') && prev != 'e' && prev != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    return {0.0, parse_double(body, token)};
  }
  return {parse_double(body.substr(0, split), token), parse_double(body.substr(split), token)};
}

void write_matrix(std::ostream& os, const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("write_matrix: matrix is not square");
  os << a.rows() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = 0; k < a.cols(); ++k) {
      if (k > 0) os << ' ';
      os << format_complex(a(i, k));
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is) {
  long long m = 0;
  if (!(is >> m) || m < 1) throw ValidationError("read_matrix: missing or invalid dimension");
  Matrix a(m, m);
  std::string token;
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < m; ++k) {
      if (!(is >> token)) {
        throw ValidationError("read_matrix: expected " + std::to_string(m * m) + " entries");
      }
      a(i, k) = parse_complex(token);
    }
  }
  return a;
}

void save_matrix(const std::filesystem::path& path, const Matrix& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_matrix(os, a);
  if (!os) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return read_matrix(is);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace tcov
