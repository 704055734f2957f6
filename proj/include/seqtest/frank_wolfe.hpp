#pragma once

// Away-step conditional gradient method for maximizing a smooth concave
// function over a product of convex bodies. Each block keeps its own active
// set of vertices; the stopping rule is the Frank-Wolfe duality gap, which
// upper-bounds the distance to the optimal value.

#include <functional>
#include <vector>

#include "seqtest/convex_body.hpp"

namespace seqtest {

using BlockPoint = std::vector<Vector>;

struct ConcaveProgram {
  std::vector<const ConvexBody*> blocks;
  std::function<double(const BlockPoint&)> value;
  /// Writes the gradient, block by block.
  std::function<void(const BlockPoint&, BlockPoint&)> gradient;
};

struct FrankWolfeOptions {
  double tol = 1e-9;
  int max_iterations = 100000;
};

struct FrankWolfeResult {
  BlockPoint x;
  double value = 0.0;
  double gap = 0.0;                 // sum of the block gaps
  std::vector<double> block_gaps;   // max over block of grad^T (s - x)
  int iterations = 0;
  bool converged = false;
};

/// Runs from a vertex of each block. Never throws on non-convergence; the
/// caller inspects `converged`.
FrankWolfeResult maximize_concave(const ConcaveProgram& program,
                                  const FrankWolfeOptions& options = {});

}  // namespace seqtest
