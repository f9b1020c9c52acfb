#include "linktheft/features.hpp"

#include <algorithm>
#include <cmath>

#include "linktheft/errors.hpp"

namespace linktheft {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("vectors of length " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  if (a.empty()) throw ShapeError("empty vectors");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::string metric_name(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::kCosine: return "cosine";
    case DistanceMetric::kEuclidean: return "euclidean";
    case DistanceMetric::kCorrelation: return "correlation";
    case DistanceMetric::kChebyshev: return "chebyshev";
    case DistanceMetric::kBraycurtis: return "braycurtis";
    case DistanceMetric::kManhattan: return "manhattan";
    case DistanceMetric::kCanberra: return "canberra";
    case DistanceMetric::kSqeuclidean: return "sqeuclidean";
  }
  return "?";
}

std::optional<DistanceMetric> metric_from_name(const std::string& name) {
  for (DistanceMetric m : kAllMetrics)
    if (metric_name(m) == name) return m;
  return std::nullopt;
}

double distance(DistanceMetric metric, std::span<const double> a,
                std::span<const double> b) {
  require_same_length(a, b);
  const size_t n = a.size();
  switch (metric) {
    case DistanceMetric::kCosine: {
      // Identical vectors are exactly at distance 0 (no rounding residue).
      if (std::equal(a.begin(), a.end(), b.begin())) return 0.0;
      const double aa = dot(a, a), bb = dot(b, b);
      // Zero vectors have no direction: both zero -> 0, exactly one -> 1.
      if (aa == 0.0 && bb == 0.0) return 0.0;
      if (aa == 0.0 || bb == 0.0) return 1.0;
      return 1.0 - dot(a, b) / (std::sqrt(aa) * std::sqrt(bb));
    }
    case DistanceMetric::kEuclidean: {
      double s = 0.0;
      for (size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(s);
    }
    case DistanceMetric::kCorrelation: {
      if (std::equal(a.begin(), a.end(), b.begin())) return 0.0;
      double ma = 0.0, mb = 0.0;
      for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
      }
      ma /= static_cast<double>(n);
      mb /= static_cast<double>(n);
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double ca = a[i] - ma, cb = b[i] - mb;
        ab += ca * cb;
        aa += ca * ca;
        bb += cb * cb;
      }
      // Constant vectors have no direction; the Table-9 formula is 0/0.
      // Convention: equal raw vectors -> 0, otherwise -> 1.
      if (aa == 0.0 && bb == 0.0)
        return std::equal(a.begin(), a.end(), b.begin()) ? 0.0 : 1.0;
      if (aa == 0.0 || bb == 0.0) return 1.0;
      return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
    }
    case DistanceMetric::kChebyshev: {
      double mx = 0.0;
      for (size_t i = 0; i < n; ++i) mx = std::max(mx, std::abs(a[i] - b[i]));
      return mx;
    }
    case DistanceMetric::kBraycurtis: {
      double num = 0.0, den = 0.0;
      for (size_t i = 0; i < n; ++i) {
        num += std::abs(a[i] - b[i]);
        den += std::abs(a[i] + b[i]);
      }
      return den == 0.0 ? 0.0 : num / den;
    }
    case DistanceMetric::kManhattan: {
      double s = 0.0;
      for (size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
      return s;
    }
    case DistanceMetric::kCanberra: {
      double s = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double den = std::abs(a[i]) + std::abs(b[i]);
        if (den != 0.0) s += std::abs(a[i] - b[i]) / den;
      }
      return s;
    }
    case DistanceMetric::kSqeuclidean: {
      double s = 0.0;
      for (size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return s;
    }
  }
  throw ConfigError("unknown metric");
}

std::vector<double> pairwise_op(PairwiseOp op, std::span<const double> a,
                                std::span<const double> b) {
  require_same_length(a, b);
  std::vector<double> out(a.size());
  switch (op) {
    case PairwiseOp::kAverage:
      for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) / 2.0;
      break;
    case PairwiseOp::kHadamard:
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
      break;
    case PairwiseOp::kWeightedL1:
      for (size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]);
      break;
    case PairwiseOp::kWeightedL2:
      for (size_t i = 0; i < a.size(); ++i)
        out[i] = (a[i] - b[i]) * (a[i] - b[i]);
      break;
  }
  return out;
}

double entropy(std::span<const double> p) {
  double e = 0.0;
  for (double v : p) {
    if (v > 0.0) e -= v * std::log(v);
  }
  return e;
}

std::string block_name(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::kFDist: return "f_dist";
    case FeatureBlock::kFPsi: return "f_psi";
    case FeatureBlock::kFEntPsi: return "f_ent_psi";
    case FeatureBlock::kGDist: return "g_dist";
    case FeatureBlock::kGPsi: return "g_psi";
    case FeatureBlock::kGEntPsi: return "g_ent_psi";
    case FeatureBlock::kAttrDist: return "attr_dist";
    case FeatureBlock::kAttrPsi: return "attr_psi";
  }
  return "?";
}

std::optional<FeatureBlock> block_from_name(const std::string& name) {
  for (FeatureBlock b :
       {FeatureBlock::kFDist, FeatureBlock::kFPsi, FeatureBlock::kFEntPsi,
        FeatureBlock::kGDist, FeatureBlock::kGPsi, FeatureBlock::kGEntPsi,
        FeatureBlock::kAttrDist, FeatureBlock::kAttrPsi})
    if (block_name(b) == name) return b;
  return std::nullopt;
}

FeatureSchema FeatureSchema::for_attack(int attack_id, int num_classes,
                                        int attr_dim) {
  FeatureSchema s;
  s.attack_id = attack_id;
  auto push = [&s](FeatureBlock b, int len) {
    s.blocks.push_back({b, s.dim, len});
    s.dim += len;
  };
  const int d = kNumDistanceMetrics;
  const int o = kNumPairwiseOps;
  switch (attack_id) {
    case 1:
    case 4:
      push(FeatureBlock::kFDist, d);
      push(FeatureBlock::kFEntPsi, o);
      break;
    case 3:
      push(FeatureBlock::kFDist, d);
      push(FeatureBlock::kFPsi, o * num_classes);
      push(FeatureBlock::kFEntPsi, o);
      break;
    case 5:
    case 7:
      push(FeatureBlock::kFDist, d);
      push(FeatureBlock::kFEntPsi, o);
      push(FeatureBlock::kGDist, d);
      push(FeatureBlock::kGEntPsi, o);
      push(FeatureBlock::kAttrDist, d);
      break;
    case 6:
      push(FeatureBlock::kFDist, d);
      push(FeatureBlock::kFPsi, o * num_classes);
      push(FeatureBlock::kFEntPsi, o);
      push(FeatureBlock::kGDist, d);
      push(FeatureBlock::kGPsi, o * num_classes);
      push(FeatureBlock::kGEntPsi, o);
      push(FeatureBlock::kAttrDist, d);
      push(FeatureBlock::kAttrPsi, o * attr_dim);
      break;
    default:
      throw ConfigError("attack " + std::to_string(attack_id) +
                        " has no feature schema (unsupervised)");
  }
  return s;
}

bool FeatureSchema::has_block(FeatureBlock b) const {
  return find(b) != nullptr;
}

const BlockSpan* FeatureSchema::find(FeatureBlock b) const {
  for (const auto& span : blocks)
    if (span.block == b) return &span;
  return nullptr;
}

void FeatureSchema::mask_outside(std::vector<double>& features,
                                 const std::set<FeatureBlock>& keep) const {
  for (const auto& span : blocks) {
    if (keep.count(span.block)) continue;
    std::fill(features.begin() + span.offset,
              features.begin() + span.offset + span.length, 0.0);
  }
}

namespace {

void fill_dist(std::span<const double> a, std::span<const double> b,
               double* out) {
  for (int i = 0; i < kNumDistanceMetrics; ++i)
    out[i] = distance(kAllMetrics[i], a, b);
}

void fill_psi(std::span<const double> a, std::span<const double> b,
              double* out) {
  int off = 0;
  for (PairwiseOp op : kAllPairwiseOps) {
    auto v = pairwise_op(op, a, b);
    std::copy(v.begin(), v.end(), out + off);
    off += static_cast<int>(v.size());
  }
}

void fill_ent_psi(double ea, double eb, double* out) {
  const double sa[1] = {ea}, sb[1] = {eb};
  for (int i = 0; i < kNumPairwiseOps; ++i)
    out[i] = pairwise_op(kAllPairwiseOps[i], sa, sb)[0];
}

std::span<const double> row_of(const Matrix* m, int node, const char* what) {
  if (!m)
    throw KnowledgeError(std::string("feature assembly needs ") + what +
                         " but the context does not hold it");
  if (node < 0 || node >= m->rows)
    throw ShapeError(std::string(what) + ": node " + std::to_string(node) +
                     " outside [0, " + std::to_string(m->rows) + ")");
  return m->row(node);
}

}  // namespace

std::vector<double> assemble(const FeatureSchema& schema, int u, int v,
                             const PairFeatureContext& ctx) {
  std::vector<double> out(schema.dim, 0.0);
  for (const auto& span : schema.blocks) {
    double* dst = out.data() + span.offset;
    switch (span.block) {
      case FeatureBlock::kFDist:
        fill_dist(row_of(ctx.f_posteriors, u, "target posteriors"),
                  row_of(ctx.f_posteriors, v, "target posteriors"), dst);
        break;
      case FeatureBlock::kFPsi: {
        auto a = row_of(ctx.f_posteriors, u, "target posteriors");
        auto b = row_of(ctx.f_posteriors, v, "target posteriors");
        if (static_cast<int>(a.size()) * kNumPairwiseOps != span.length)
          throw ShapeError("posterior width does not match schema");
        fill_psi(a, b, dst);
        break;
      }
      case FeatureBlock::kFEntPsi:
        fill_ent_psi(entropy(row_of(ctx.f_posteriors, u, "target posteriors")),
                     entropy(row_of(ctx.f_posteriors, v, "target posteriors")),
                     dst);
        break;
      case FeatureBlock::kGDist:
        fill_dist(row_of(ctx.g_posteriors, u, "reference posteriors"),
                  row_of(ctx.g_posteriors, v, "reference posteriors"), dst);
        break;
      case FeatureBlock::kGPsi: {
        auto a = row_of(ctx.g_posteriors, u, "reference posteriors");
        auto b = row_of(ctx.g_posteriors, v, "reference posteriors");
        if (static_cast<int>(a.size()) * kNumPairwiseOps != span.length)
          throw ShapeError("posterior width does not match schema");
        fill_psi(a, b, dst);
        break;
      }
      case FeatureBlock::kGEntPsi:
        fill_ent_psi(
            entropy(row_of(ctx.g_posteriors, u, "reference posteriors")),
            entropy(row_of(ctx.g_posteriors, v, "reference posteriors")), dst);
        break;
      case FeatureBlock::kAttrDist:
        fill_dist(row_of(ctx.attrs, u, "attributes"),
                  row_of(ctx.attrs, v, "attributes"), dst);
        break;
      case FeatureBlock::kAttrPsi: {
        auto a = row_of(ctx.attrs, u, "attributes");
        auto b = row_of(ctx.attrs, v, "attributes");
        if (static_cast<int>(a.size()) * kNumPairwiseOps != span.length)
          throw ShapeError("attribute width does not match schema");
        fill_psi(a, b, dst);
        break;
      }
    }
  }
  return out;
}

std::vector<double> assemble(int attack_id, int u, int v,
                             const PairFeatureContext& ctx) {
  const int num_classes = ctx.f_posteriors ? ctx.f_posteriors->cols : 0;
  const int attr_dim = ctx.attrs ? ctx.attrs->cols : 0;
  return assemble(FeatureSchema::for_attack(attack_id, num_classes, attr_dim),
                  u, v, ctx);
}

void write_features_csv(std::ostream& out, const FeatureSchema& schema,
                        const std::vector<std::vector<double>>& rows) {
  bool first = true;
  for (const auto& span : schema.blocks) {
    for (int i = 0; i < span.length; ++i) {
      if (!first) out << ',';
      out << block_name(span.block) << '.' << i;
      first = false;
    }
  }
  out << '\n';
  out.precision(17);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

}  // namespace linktheft
