#include "tcov/structure.hpp"

#include <charconv>
#include <cmath>

#include "tcov/matrix_io.hpp"

namespace tcov {

namespace {

Index parse_index(std::string_view s, std::string_view text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("invalid structure '" + std::string(text) + "'");
  }
  return static_cast<Index>(v);
}

}  // namespace

StructureSpec StructureSpec::toeplitz() { return {}; }

StructureSpec StructureSpec::banded(Index b) {
  StructureSpec s;
  s.kind = StructureKind::BandedToeplitz;
  s.bandwidth = b;
  return s;
}

StructureSpec StructureSpec::tbt(Index p, Index l) {
  StructureSpec s;
  s.kind = StructureKind::TBT;
  s.blocks = p;
  s.block_size = l;
  return s;
}

StructureSpec StructureSpec::lowrank_plus_scalar(Index r) {
  StructureSpec s;
  s.kind = StructureKind::LowRankPlusScalar;
  s.rank = r;
  return s;
}

StructureSpec StructureSpec::cond_number(double kappa) {
  StructureSpec s;
  s.kind = StructureKind::ToeplitzCondNum;
  s.kappa = kappa;
  return s;
}

StructureSpec StructureSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) throw ValidationError("structure '" + std::string(text) + "' needs a parameter");
  };
  if (name == "toeplitz") {
    if (!arg.empty()) throw ValidationError("structure 'toeplitz' takes no parameter");
    return toeplitz();
  }
  if (name == "banded") {
    need_arg();
    return banded(parse_index(arg, text));
  }
  if (name == "tbt") {
    need_arg();
    const auto x = arg.find('x');
    if (x == std::string_view::npos) throw ValidationError("TBT structure must read 'tbt:<p>x<l>'");
    return tbt(parse_index(arg.substr(0, x), text), parse_index(arg.substr(x + 1), text));
  }
  if (name == "lowrank") {
    need_arg();
    return lowrank_plus_scalar(parse_index(arg, text));
  }
  if (name == "condnum") {
    need_arg();
    double k = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) {
      throw ValidationError("invalid structure '" + std::string(text) + "'");
    }
    return cond_number(k);
  }
  throw ValidationError("unknown structure '" + std::string(text) + "'");
}

std::string StructureSpec::to_string() const {
  switch (kind) {
    case StructureKind::Toeplitz:
      return "toeplitz";
    case StructureKind::BandedToeplitz:
      return "banded:" + std::to_string(bandwidth);
    case StructureKind::TBT:
      return "tbt:" + std::to_string(blocks) + "x" + std::to_string(block_size);
    case StructureKind::LowRankPlusScalar:
      return "lowrank:" + std::to_string(rank);
    case StructureKind::ToeplitzCondNum:
      return "condnum:" + format_double(kappa);
  }
  return "?";
}

void StructureSpec::validate(Index m) const {
  if (m < 1) throw ValidationError("dimension must be at least 1");
  switch (kind) {
    case StructureKind::Toeplitz:
      return;
    case StructureKind::BandedToeplitz:
      if (bandwidth < 0 || bandwidth > m - 1) {
        throw ValidationError("bandwidth must lie in [0, m-1], got " + std::to_string(bandwidth));
      }
      return;
    case StructureKind::TBT:
      if (blocks < 1 || block_size < 1 || blocks * block_size != m) {
        throw ValidationError("TBT requires p*l = m (p=" + std::to_string(blocks) +
                              ", l=" + std::to_string(block_size) + ", m=" + std::to_string(m) + ")");
      }
      return;
    case StructureKind::LowRankPlusScalar:
      if (rank < 1 || rank >= m) {
        throw ValidationError("rank must lie in [1, m-1], got " + std::to_string(rank));
      }
      return;
    case StructureKind::ToeplitzCondNum:
      if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
        throw ValidationError("condition bound must be finite and >= 1");
      }
      return;
  }
}

StructureSpec StructureSpec::linear_part() const { return is_linear() ? *this : toeplitz(); }

bool StructureSpec::is_linear() const {
  return kind == StructureKind::Toeplitz || kind == StructureKind::BandedToeplitz ||
         kind == StructureKind::TBT;
}

}  // namespace tcov
