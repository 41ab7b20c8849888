/* Copyright 2026 The CamGuide Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "camguide/losses3d.hpp"

#include <cmath>
#include <map>

#include "camguide/error.hpp"

namespace camguide {
namespace {

Tensor zero_scalar(Tape& tape) { return tape.constant(Array::scalar(0.0)); }

// Mean over rows of KL(softmax(student_row) || exp(log_q_row)), with log_q
// a constant log-probability table of the same shape.
Tensor mean_row_kl(Tensor student_logits, const Array& log_q) {
  Tensor lp = log_softmax_rows(student_logits);
  Tensor p = softmax_rows(student_logits);
  Tensor elem = mul(p, sub_const(lp, log_q));
  double inv_rows = 1.0 / static_cast<double>(log_q.rows());
  return mul_scalar(sum(elem), inv_rows);
}

}  // namespace

Tensor supervised_ce(const Prediction& pred, const std::vector<std::uint16_t>& labels,
                     const std::vector<std::uint8_t>& weak_mask) {
  Tape& tape = *pred.logits.tape;
  const Array& logits = pred.logits.val();
  check(labels.size() == logits.rows() && weak_mask.size() == labels.size(),
        ErrorCode::kInternal, "supervised_ce: labels/mask length mismatch");
  std::vector<int> rows;
  std::vector<int> cols;
  for (std::size_t i = 0; i < weak_mask.size(); ++i) {
    if (weak_mask[i]) {
      rows.push_back(static_cast<int>(i));
      cols.push_back(static_cast<int>(labels[i]));
    }
  }
  if (rows.empty()) return zero_scalar(tape);
  Tensor sel = gather_rows(pred.logits, rows);
  Tensor ce = sub(logsumexp_rows(sel), pick_per_row(sel, cols));
  return mean(ce);
}

Tensor mt_consistency(const Prediction& pred, const Array& teacher_logits,
                      const std::vector<std::uint8_t>& weak_mask) {
  Tape& tape = *pred.logits.tape;
  const Array& logits = pred.logits.val();
  check(teacher_logits.same_shape(logits), ErrorCode::kInternal,
        "mt_consistency: teacher logits shape mismatch");
  std::vector<int> unlabeled;
  for (std::size_t i = 0; i < weak_mask.size(); ++i) {
    if (!weak_mask[i]) unlabeled.push_back(static_cast<int>(i));
  }
  if (unlabeled.empty()) return zero_scalar(tape);
  Tensor s = gather_rows(pred.logits, unlabeled);
  Array log_q = log_softmax_rows(gather_rows(teacher_logits, unlabeled));
  return mean_row_kl(s, log_q);
}

Tensor ig_distill(const Prediction& pred, const GuidanceTargets& guidance,
                  const std::vector<int>& in_image, LossFlags* flags) {
  Tape& tape = *pred.aux.tape;
  if (in_image.empty()) {
    if (flags) flags->empty_in_image = true;
    return zero_scalar(tape);
  }
  check(guidance.ig_features.rows() == in_image.size(), ErrorCode::kInternal,
        "ig_distill: guidance row count != |I|");
  Tensor f = gather_rows(pred.aux, in_image);
  Array log_q = log_softmax_rows(guidance.ig_features);
  return mean_row_kl(f, log_q);
}

Tensor one_way_contrastive(const Prediction& pred, const GuidanceTargets& guidance,
                           const std::vector<int>& in_image, const std::vector<int>& out_image,
                           double tau, LossFlags* flags) {
  Tape& tape = *pred.aux.tape;
  check(tau > 0.0, ErrorCode::kConfig, "one_way_contrastive: tau must be positive");
  if (in_image.empty() || out_image.empty()) {
    if (flags) flags->contrastive_skipped = true;
    return zero_scalar(tape);
  }
  check(guidance.ig_features.rows() == in_image.size(), ErrorCode::kInternal,
        "one_way_contrastive: guidance row count != |I|");

  // Positions (into the I list / O list) per teacher class.
  std::map<int, std::vector<int>> in_by_class;
  std::map<int, std::vector<int>> out_by_class;
  for (std::size_t j = 0; j < in_image.size(); ++j) {
    in_by_class[guidance.teacher_class[in_image[j]]].push_back(static_cast<int>(j));
  }
  for (std::size_t r = 0; r < out_image.size(); ++r) {
    out_by_class[guidance.teacher_class[out_image[r]]].push_back(static_cast<int>(r));
  }

  Tensor fo = l2_normalize_rows(gather_rows(pred.aux, out_image));
  Array fig = l2_normalize_rows(guidance.ig_features);
  Tensor sims = mul_scalar(matmul_nt(fo, fig), 1.0 / tau);  // |O| x |I|
  Tensor lse_all = logsumexp_rows(sims);

  bool have_term = false;
  Tensor total = zero_scalar(tape);
  for (const auto& [cls, out_rows] : out_by_class) {
    auto it = in_by_class.find(cls);
    if (it == in_by_class.end()) continue;
    const std::vector<int>& in_cols = it->second;
    Tensor lse_cls = logsumexp_rows(gather_cols(sims, in_cols));
    Tensor diff = sub(gather_elems(lse_all, out_rows), gather_elems(lse_cls, out_rows));
    double sz = static_cast<double>(out_rows.size());
    Tensor term = add_scalar(sum(diff), sz * std::log(sz));
    total = have_term ? add(total, term) : term;
    have_term = true;
  }
  if (!have_term) {
    if (flags) flags->contrastive_skipped = true;
    return zero_scalar(tape);
  }
  return total;
}

Tensor total_loss(const LossTerms& terms, double lambda) {
  check(lambda >= 0.0, ErrorCode::kConfig, "total_loss: lambda must be non-negative");
  const char* names[4] = {"supervised", "consistency", "ig", "contrastive"};
  const Tensor* ts[4] = {&terms.supervised, &terms.consistency, &terms.ig, &terms.contrastive};
  for (int i = 0; i < 4; ++i) {
    check(std::isfinite(ts[i]->val()[0]), ErrorCode::kNumeric,
          std::string("total_loss: term '") + names[i] + "' is not finite");
  }
  Tensor t = add(add(terms.supervised, terms.consistency), terms.ig);
  return add(t, mul_scalar(terms.contrastive, lambda));
}

}  // namespace camguide
