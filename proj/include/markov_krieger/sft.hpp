// Symbolic layer: adjacency matrices of topologically mixing subshifts of
// finite type, primitivity certificates, admissible blocks/cylinders, and
// block enumeration. Everything downstream (measures, cocycles, sampling)
// speaks in these types.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "markov_krieger/errors.hpp"

namespace mk {

// 0/1 transition structure on states {0, ..., d-1}. Valid instances are
// square, d >= 2, entries in {0,1}, and every row and column has at least
// one 1 (no stranded states).
struct Adjacency {
  Eigen::MatrixXi a;

  int size() const { return static_cast<int>(a.rows()); }
  bool allowed(int s, int t) const { return a(s, t) != 0; }
};

// Construct and validate an adjacency matrix from a 0/1 integer matrix.
Adjacency make_adjacency(const Eigen::MatrixXi& a);

// Convenience instances used throughout the tests and the CLI.
Adjacency full_shift(int states);
Adjacency golden_mean_shift();  // [[1,0,1],[1,0,1],[0,1,0]] on 3 states

struct PrimitivityCertificate {
  int exponent;  // minimal M with A^M entrywise positive
};

// Default search cap d^2 + 1 (a safe upper bound for primitive matrices).
int default_primitivity_cap(int states);

// Minimal M <= cap with A^M > 0; throws NotPrimitiveWithinCap otherwise.
// Uses boolean matrix powers, so no overflow for any cap.
PrimitivityCertificate primitivity_index(const Adjacency& adj, int cap = 0);

// A finite admissible word b_1..b_L (stored as symbol ids). Length 1 is
// valid: a single symbol has no transitions to check.
struct Block {
  std::vector<int> symbols;

  int length() const { return static_cast<int>(symbols.size()); }
  int first() const { return symbols.front(); }
  int last() const { return symbols.back(); }
  bool operator==(const Block& o) const { return symbols == o.symbols; }
};

// Validates symbols against the adjacency; throws InadmissibleTransition
// with the first offending position (0-based index of the transition).
Block validate_block(const Adjacency& adj, const std::vector<int>& symbols);

// Block pinned at a coordinate: symbols occupy positions base, ..., base+L-1.
struct Cylinder {
  std::int64_t base;
  Block block;

  std::int64_t end() const { return base + block.length() - 1; }
};

// Two distinct admissible blocks of equal length with the same first and
// last symbols — the raw material for admissible permutations.
struct AdmissiblePair {
  Block first;
  Block second;
  int length;
};

// Checks both blocks against adj and the pair constraints; throws
// LengthMismatch / EndpointMismatch / IdenticalBlocks.
AdmissiblePair make_admissible_pair(const Adjacency& adj, const Block& b1,
                                    const Block& b2);

// All admissible blocks of the given length from alpha to beta, interior
// symbols in lexicographic order. Requires length >= 2. The count equals
// (A^(L-1))(alpha, beta).
std::vector<Block> enumerate_blocks(const Adjacency& adj, int alpha, int beta,
                                    int length);

// Concatenation b1 . b2 with the junction transition re-validated.
Block concat_blocks(const Adjacency& adj, const Block& b1, const Block& b2);

// A window of coordinates [lo, hi] with one symbol per coordinate — the
// finite view of a two-sided sequence used by likelihood ratios, admissible
// permutations, and sampled trajectories.
struct Word {
  std::int64_t lo = 0;
  std::vector<int> symbols;

  std::int64_t hi() const { return lo + static_cast<std::int64_t>(symbols.size()) - 1; }
  int at(std::int64_t coord) const { return symbols[static_cast<std::size_t>(coord - lo)]; }
  int& at(std::int64_t coord) { return symbols[static_cast<std::size_t>(coord - lo)]; }
  bool covers(std::int64_t a, std::int64_t b) const { return lo <= a && b <= hi(); }
};

// Validates every transition inside the window; throws InadmissibleWord
// with the offending coordinate.
Word validate_word(const Adjacency& adj, std::int64_t lo,
                   const std::vector<int>& symbols);

}  // namespace mk
