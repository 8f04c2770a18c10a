#ifndef TCOV_STRUCTURE_HPP
#define TCOV_STRUCTURE_HPP

#include <string>
#include <string_view>

#include "tcov/hermitian.hpp"

namespace tcov {

enum class StructureKind { Toeplitz, BandedToeplitz, TBT, LowRankPlusScalar, ToeplitzCondNum };

/**
 * Selects the structural set an estimate is constrained to.
 *
 * TBT denotes the symmetric-block class R = Σ_w S_w ⊗ R_w with S_0 = I,
 * S_w = C_w + C_w^T (C_w the w-th block shift) and every R_w Hermitian
 * Toeplitz of size l. It has (2l-1)p real parameters.
 *
 * Text form: "toeplitz", "banded:<b>", "tbt:<p>x<l>", "lowrank:<r>",
 * "condnum:<kappa>".
 */
struct StructureSpec {
  StructureKind kind = StructureKind::Toeplitz;
  Index bandwidth = 0;   // BandedToeplitz
  Index blocks = 1;      // TBT: p
  Index block_size = 0;  // TBT: l
  Index rank = 0;        // LowRankPlusScalar
  double kappa = 1.0;    // ToeplitzCondNum

  static StructureSpec toeplitz();
  static StructureSpec banded(Index b);
  static StructureSpec tbt(Index p, Index l);
  static StructureSpec lowrank_plus_scalar(Index r);
  static StructureSpec cond_number(double kappa);

  static StructureSpec parse(std::string_view text);
  std::string to_string() const;

  /// Throws ValidationError if the parameters do not fit dimension m.
  void validate(Index m) const;

  /// Linear subspace part: itself for Toeplitz/Banded/TBT, Toeplitz otherwise.
  StructureSpec linear_part() const;

  bool is_linear() const;
  bool is_convex() const { return kind != StructureKind::LowRankPlusScalar; }

  bool operator==(const StructureSpec&) const = default;
};

}  // namespace tcov

#endif  // TCOV_STRUCTURE_HPP
