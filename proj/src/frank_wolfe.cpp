#include "seqtest/frank_wolfe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqtest {

namespace {

struct Atom {
  Vector vertex;
  double weight;
};

bool same_vertex(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() <=
         1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>());
}

Vector combination(const std::vector<Atom>& atoms) {
  Vector x = Vector::Zero(atoms.front().vertex.size());
  double total = 0.0;
  for (const Atom& a : atoms) {
    x += a.weight * a.vertex;
    total += a.weight;
  }
  return x / total;
}

double directional_derivative(const ConcaveProgram& program, const BlockPoint& x,
                              const BlockPoint& d, double step, BlockPoint& trial,
                              BlockPoint& grad) {
  for (std::size_t b = 0; b < x.size(); ++b) trial[b] = x[b] + step * d[b];
  program.gradient(trial, grad);
  double h = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) h += grad[b].dot(d[b]);
  return h;
}

// Largest maximizer of the concave function along x + t d, t in [0, t_max].
double line_search(const ConcaveProgram& program, const BlockPoint& x,
                   const BlockPoint& d, double h0, double t_max) {
  BlockPoint trial(x.size()), grad(x.size());
  double h_hi = directional_derivative(program, x, d, t_max, trial, grad);
  if (h_hi >= 0.0) return t_max;
  double lo = 0.0, hi = t_max, h_lo = h0;
  int side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    // Illinois variant of regula falsi, with bisection as a safeguard.
    double t = lo + (hi - lo) * h_lo / (h_lo - h_hi);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    const double h = directional_derivative(program, x, d, t, trial, grad);
    if (h == 0.0) return t;
    if (h > 0.0) {
      lo = t;
      h_lo = h;
      if (side == 1) h_hi *= 0.5;
      side = 1;
    } else {
      hi = t;
      h_hi = h;
      if (side == -1) h_lo *= 0.5;
      side = -1;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, t_max) || std::abs(h) <= 1e-18 * std::abs(h0)) break;
  }
  return lo;
}

}  // namespace

FrankWolfeResult maximize_concave(const ConcaveProgram& program,
                                  const FrankWolfeOptions& options) {
  const std::size_t nb = program.blocks.size();
  std::vector<std::vector<Atom>> atoms(nb);
  FrankWolfeResult result;
  result.x.resize(nb);
  result.block_gaps.assign(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const ConvexBody& body = *program.blocks[b];
    Vector start = linear_minimize(body, Vector::Zero(body.dim()));
    atoms[b].push_back({start, 1.0});
    result.x[b] = start;
  }

  BlockPoint grad(nb), direction(nb), fw_vertex(nb);
  std::vector<int> away_index(nb, -1);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter;
    program.gradient(result.x, grad);

    double gap = 0.0;
    std::vector<double> fw_gap(nb), away_gap(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      fw_vertex[b] = linear_minimize(*program.blocks[b], -grad[b]);
      fw_gap[b] = std::max(0.0, grad[b].dot(fw_vertex[b] - result.x[b]));
      gap += fw_gap[b];
      result.block_gaps[b] = fw_gap[b];
    }
    result.gap = gap;
    if (gap <= options.tol) {
      result.converged = true;
      break;
    }

    double t_max = 1.0, h0 = 0.0;
    std::vector<double> block_t_max(nb, std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b < nb; ++b) {
      away_index[b] = -1;
      if (atoms[b].size() > 1) {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < atoms[b].size(); ++k) {
          const double v = grad[b].dot(atoms[b][k].vertex);
          if (v < worst) {
            worst = v;
            away_index[b] = static_cast<int>(k);
          }
        }
        away_gap[b] = grad[b].dot(result.x[b]) - worst;
      }
      if (away_index[b] >= 0 && away_gap[b] > fw_gap[b]) {
        const Atom& a = atoms[b][away_index[b]];
        direction[b] = result.x[b] - a.vertex;
        block_t_max[b] = a.weight / (1.0 - a.weight);
        h0 += away_gap[b];
      } else {
        away_index[b] = -1;
        direction[b] = fw_vertex[b] - result.x[b];
        block_t_max[b] = 1.0;
        h0 += fw_gap[b];
      }
    }
    t_max = *std::min_element(block_t_max.begin(), block_t_max.end());

    const double t = line_search(program, result.x, direction, h0, t_max);
    if (t <= 0.0) {
      // No progress possible at working precision; report the gap reached.
      break;
    }

    for (std::size_t b = 0; b < nb; ++b) {
      auto& set = atoms[b];
      if (away_index[b] < 0) {
        for (Atom& a : set) a.weight *= (1.0 - t);
        auto it = std::find_if(set.begin(), set.end(),
                               [&](const Atom& a) { return same_vertex(a.vertex, fw_vertex[b]); });
        if (it != set.end()) it->weight += t;
        else set.push_back({fw_vertex[b], t});
      } else {
        for (Atom& a : set) a.weight *= (1.0 + t);
        set[away_index[b]].weight -= t;
        if (t >= block_t_max[b] * (1.0 - 1e-12)) set[away_index[b]].weight = 0.0;
      }
      std::erase_if(set, [](const Atom& a) { return a.weight <= 1e-15; });
      result.x[b] = combination(set);
    }
  }
  result.value = program.value(result.x);
  return result;
}

}  // namespace seqtest
