#include "markov_krieger/sft.hpp"

#include <string>

namespace mk {

Adjacency make_adjacency(const Eigen::MatrixXi& a) {
  if (a.rows() != a.cols() || a.rows() < 2)
    throw Error(Err::InvalidInput,
                "adjacency must be square with at least 2 states");
  const int d = static_cast<int>(a.rows());
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t)
      if (a(s, t) != 0 && a(s, t) != 1)
        throw Error(Err::InvalidInput, "adjacency entries must be 0 or 1");
  for (int s = 0; s < d; ++s) {
    if (a.row(s).sum() == 0)
      throw Error(Err::InvalidInput,
                  "state " + std::to_string(s) + " has no outgoing edge", s);
    if (a.col(s).sum() == 0)
      throw Error(Err::InvalidInput,
                  "state " + std::to_string(s) + " has no incoming edge", s);
  }
  return Adjacency{a};
}

Adjacency full_shift(int states) {
  return make_adjacency(Eigen::MatrixXi::Ones(states, states));
}

Adjacency golden_mean_shift() {
  Eigen::MatrixXi g(3, 3);
  g << 1, 0, 1,
       1, 0, 1,
       0, 1, 0;
  return make_adjacency(g);
}

int default_primitivity_cap(int states) { return states * states + 1; }

PrimitivityCertificate primitivity_index(const Adjacency& adj, int cap) {
  const int d = adj.size();
  if (cap <= 0) cap = default_primitivity_cap(d);
  // Boolean powers: pw = support of A^m.
  Eigen::MatrixXi pw = adj.a;
  for (int m = 1; m <= cap; ++m) {
    if ((pw.array() > 0).all()) return PrimitivityCertificate{m};
    pw = (pw * adj.a).unaryExpr([](int v) { return v > 0 ? 1 : 0; }).eval();
  }
  throw Error(Err::NotPrimitiveWithinCap,
              "no positive power up to cap " + std::to_string(cap));
}

Block validate_block(const Adjacency& adj, const std::vector<int>& symbols) {
  if (symbols.empty()) throw Error(Err::InvalidInput, "empty block");
  const int d = adj.size();
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] < 0 || symbols[i] >= d)
      throw Error(Err::InvalidInput,
                  "symbol out of range at position " + std::to_string(i),
                  static_cast<std::int64_t>(i));
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
    if (!adj.allowed(symbols[i], symbols[i + 1]))
      throw Error(Err::InadmissibleTransition,
                  "transition " + std::to_string(symbols[i]) + "->" +
                      std::to_string(symbols[i + 1]) + " at position " +
                      std::to_string(i),
                  static_cast<std::int64_t>(i));
  return Block{symbols};
}

AdmissiblePair make_admissible_pair(const Adjacency& adj, const Block& b1,
                                    const Block& b2) {
  validate_block(adj, b1.symbols);
  validate_block(adj, b2.symbols);
  if (b1.length() != b2.length())
    throw Error(Err::LengthMismatch, "blocks have lengths " +
                                         std::to_string(b1.length()) + " and " +
                                         std::to_string(b2.length()));
  if (b1.first() != b2.first() || b1.last() != b2.last())
    throw Error(Err::EndpointMismatch, "blocks must share first and last symbols");
  if (b1 == b2) throw Error(Err::IdenticalBlocks, "blocks must differ");
  return AdmissiblePair{b1, b2, b1.length()};
}

std::vector<Block> enumerate_blocks(const Adjacency& adj, int alpha, int beta,
                                    int length) {
  if (length < 2) throw Error(Err::InvalidInput, "enumeration needs length >= 2");
  const int d = adj.size();
  if (alpha < 0 || alpha >= d || beta < 0 || beta >= d)
    throw Error(Err::InvalidInput, "endpoint symbol out of range");
  std::vector<Block> out;
  std::vector<int> word(static_cast<std::size_t>(length));
  word.front() = alpha;
  word.back() = beta;
  // Depth-first over interior positions in lexicographic order.
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == length - 1) {
      if (adj.allowed(word[static_cast<std::size_t>(length) - 2], beta))
        out.push_back(Block{word});
      return;
    }
    for (int sym = 0; sym < d; ++sym) {
      if (!adj.allowed(word[static_cast<std::size_t>(pos) - 1], sym)) continue;
      word[static_cast<std::size_t>(pos)] = sym;
      self(self, pos + 1);
    }
  };
  rec(rec, 1);
  return out;
}

Block concat_blocks(const Adjacency& adj, const Block& b1, const Block& b2) {
  if (!adj.allowed(b1.last(), b2.first()))
    throw Error(Err::InadmissibleTransition,
                "junction " + std::to_string(b1.last()) + "->" +
                    std::to_string(b2.first()) + " not allowed",
                b1.length() - 1);
  std::vector<int> joined = b1.symbols;
  joined.insert(joined.end(), b2.symbols.begin(), b2.symbols.end());
  return validate_block(adj, joined);
}

Word validate_word(const Adjacency& adj, std::int64_t lo,
                   const std::vector<int>& symbols) {
  if (symbols.empty()) throw Error(Err::InvalidInput, "empty word");
  const int d = adj.size();
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] < 0 || symbols[i] >= d)
      throw Error(Err::InadmissibleWord, "symbol out of range",
                  lo + static_cast<std::int64_t>(i));
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
    if (!adj.allowed(symbols[i], symbols[i + 1]))
      throw Error(Err::InadmissibleWord,
                  "transition not allowed at coordinate " +
                      std::to_string(lo + static_cast<std::int64_t>(i)),
                  lo + static_cast<std::int64_t>(i));
  return Word{lo, symbols};
}

const char* to_string(Err code) {
  switch (code) {
    case Err::NotPrimitiveWithinCap: return "NotPrimitiveWithinCap";
    case Err::InadmissibleTransition: return "InadmissibleTransition";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::EndpointMismatch: return "EndpointMismatch";
    case Err::IdenticalBlocks: return "IdenticalBlocks";
    case Err::DoeblinViolation: return "DoeblinViolation";
    case Err::SupportMismatch: return "SupportMismatch";
    case Err::OverlappingRanges: return "OverlappingRanges";
    case Err::InequalityViolated: return "InequalityViolated";
    case Err::AdjacencyMismatch: return "AdjacencyMismatch";
    case Err::InadmissibleWord: return "InadmissibleWord";
    case Err::TailsUnknown: return "TailsUnknown";
    case Err::TailsEqual: return "TailsEqual";
    case Err::AssumptionViolated: return "AssumptionViolated";
    case Err::SpacingViolation: return "SpacingViolation";
    case Err::LengthViolation: return "LengthViolation";
    case Err::PairInvalid: return "PairInvalid";
    case Err::OutsideDomain: return "OutsideDomain";
    case Err::NoneFoundWithinLen: return "NoneFoundWithinLen";
    case Err::NotApplicable: return "NotApplicable";
    case Err::InsufficientWindow: return "InsufficientWindow";
    case Err::InvalidInterleaving: return "InvalidInterleaving";
    case Err::SeedInvalid: return "SeedInvalid";
    case Err::DegenerateVariance: return "DegenerateVariance";
    case Err::InvalidInput: return "InvalidInput";
    case Err::InternalInvariant: return "InternalInvariant";
  }
  return "UnknownError";
}

}  // namespace mk
