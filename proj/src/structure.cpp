#include "mlyap/structure.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

namespace mlyap {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::Primitive: return "Primitive";
    case StructureKind::IrreducibleImprimitive: return "IrreducibleImprimitive";
    case StructureKind::Reducible: return "Reducible";
  }
  return "Unknown";
}

namespace {

void require_nonnegative(const MatrixXd& A) {
  require_square_finite(A, "classify");
  if ((A.array() < 0).any()) {
    throw Error(ErrorCode::NegativeEntry, "matrix has negative entries");
  }
}

// Tarjan's algorithm; components come out sinks first.
std::vector<std::vector<int>> strongly_connected(const BoolMatrix& G) {
  const int n = static_cast<int>(G.rows());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> comps;
  int counter = 0;

  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (int w = 0; w < n; ++w) {
      if (!G(v, w)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comps;
}

// Period of a strongly connected pattern from BFS levels; also returns the
// level of each vertex.
int period_of(const BoolMatrix& G, std::vector<int>& level) {
  const int n = static_cast<int>(G.rows());
  level.assign(n, -1);
  level[0] = 0;
  std::queue<int> q;
  q.push(0);
  int g = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (!G(u, v)) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g;
}

MatrixXd submatrix(const MatrixXd& A, const std::vector<int>& idx) {
  const int m = static_cast<int>(idx.size());
  MatrixXd S(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = A(idx[i], idx[j]);
  return S;
}

BoolMatrix bool_product(const BoolMatrix& X, const BoolMatrix& Y) {
  const Eigen::MatrixXi P = X.cast<int>() * Y.cast<int>();
  return (P.array() > 0).matrix();
}

}  // namespace

BoolMatrix zero_pattern(const MatrixXd& A) {
  const double cut = kStructuralZero * A.cwiseAbs().maxCoeff();
  return (A.array().abs() > cut).matrix();
}

Classification classify(const MatrixXd& A) {
  require_nonnegative(A);
  const BoolMatrix G = zero_pattern(A);
  Classification cls;
  auto comps = strongly_connected(G);

  const bool trivial_single = comps.size() == 1 && G.rows() == 1 && !G(0, 0);
  if (comps.size() > 1 || trivial_single) {
    cls.kind = StructureKind::Reducible;
    std::reverse(comps.begin(), comps.end());
    cls.blocks = comps;
    for (const auto& c : comps)
      cls.permutation.insert(cls.permutation.end(), c.begin(), c.end());
    return cls;
  }

  std::vector<int> level;
  const int h = period_of(G, level);
  cls.period = h;
  cls.permutation.resize(G.rows());
  std::iota(cls.permutation.begin(), cls.permutation.end(), 0);
  cls.blocks = {cls.permutation};
  if (h == 1) {
    cls.kind = StructureKind::Primitive;
    return cls;
  }
  cls.kind = StructureKind::IrreducibleImprimitive;
  cls.cyclic_classes.assign(h, {});
  for (int v = 0; v < static_cast<int>(level.size()); ++v)
    cls.cyclic_classes[level[v] % h].push_back(v);
  return cls;
}

std::vector<MatrixXd> primitive_components(const MatrixXd& A,
                                           const Classification& cls) {
  std::vector<MatrixXd> out;
  switch (cls.kind) {
    case StructureKind::Primitive:
      out.push_back(A);
      break;
    case StructureKind::IrreducibleImprimitive: {
      MatrixXd Ah = A;
      for (int i = 1; i < cls.period; ++i) Ah = Ah * A;
      for (const auto& c : cls.cyclic_classes) out.push_back(submatrix(Ah, c));
      break;
    }
    case StructureKind::Reducible:
      for (const auto& block : cls.blocks) {
        const MatrixXd S = submatrix(A, block);
        if (S.rows() == 1 && !zero_pattern(A)(block[0], block[0])) continue;
        const auto sub = primitive_components(S, classify(S));
        out.insert(out.end(), sub.begin(), sub.end());
      }
      break;
  }
  return out;
}

int index_of_primitivity(const MatrixXd& A) {
  if (classify(A).kind != StructureKind::Primitive) {
    throw Error(ErrorCode::NotPrimitive, "matrix is not primitive");
  }
  const int n = static_cast<int>(A.rows());
  const BoolMatrix G = zero_pattern(A);
  BoolMatrix P = G;
  const int bound = wielandt_bound(n);
  for (int p = 1; p <= bound; ++p) {
    if (P.all()) return p;
    P = bool_product(P, G);
  }
  throw std::logic_error("primitive matrix exceeded the Wielandt bound");
}

}  // namespace mlyap
