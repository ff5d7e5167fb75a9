#include "blaser/unsupervised.hpp"

#include <algorithm>
#include <cmath>

#include "blaser/error.hpp"

namespace blaser {

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) throw DegenerateInput("cosine: zero-norm embedding");
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

UScore blaser_u(std::span<const float> src, std::span<const float> mt, std::span<const float> ref) {
  UScore s;
  s.src_term = cosine(src, mt);
  s.ref_term = cosine(ref, mt);
  s.total = (s.src_term + s.ref_term) / 2.0;
  return s;
}

UScoreResult score_dataset_u(const Dataset& ds) {
  UScoreResult out;
  out.scores.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& inst = ds.instances()[i];
    const TripleView t = ds.triple(i);
    try {
      out.scores.emplace_back(inst.id, blaser_u(t.src, t.mt, t.ref));
    } catch (const Error& e) {
      out.errors.push_back({inst.id, e.what()});
    }
  }
  return out;
}

double corpus_score(std::span<const double> sentence_scores) {
  if (sentence_scores.empty()) throw Error("corpus_score: empty score list");
  double sum = 0.0;
  for (double s : sentence_scores) {
    if (!std::isfinite(s)) throw Error("corpus_score: non-finite sentence score");
    sum += s;
  }
  return sum / static_cast<double>(sentence_scores.size());
}

}  // namespace blaser
