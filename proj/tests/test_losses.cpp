// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sst/config.hpp"
#include "sst/equiv.hpp"
#include "sst/gradcheck.hpp"
#include "sst/losses.hpp"
#include "sst/matrix.hpp"
#include "sst/model.hpp"

namespace {

using sst::Mat;
using sst::RowRange;

Mat<double> rows2x4(std::vector<double> a, std::vector<double> b) {
  Mat<double> m(0, 4);
  m.append_row(std::span<const double>(a));
  m.append_row(std::span<const double>(b));
  return m;
}

}  // namespace

TEST_CASE("word grouping mean-pools each row range") {
  const Mat<double> emb = Mat<double>::from_rows({{1, 1}, {1, 1}, {3, 3}, {9, 9}, {5, 5}});
  const Mat<double> one = sst::group_words(emb, {RowRange{2, 3}});
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == 3.0);

  const Mat<double> two = sst::group_words(emb, {RowRange{1, 2}, RowRange{3, 5}});
  CHECK(two(0, 0) == 1.0);
  CHECK(two(1, 0) == 7.0);
  CHECK(two(1, 1) == 7.0);

  // Rows outside every range never contribute.
  Mat<double> emb2 = emb;
  emb2(0, 0) = 1e9;
  CHECK(sst::exactly_equal(sst::group_words(emb2, {RowRange{1, 2}, RowRange{3, 5}}), two));
}

TEST_CASE("word grouping validates its ranges") {
  const Mat<double> emb = Mat<double>::filled(4, 2, 1.0);
  CHECK_THROWS_WITH_AS(sst::group_words(emb, {}), "invalid-alignment: no word ranges",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(sst::group_words(emb, {RowRange{1, 1}}), "invalid-alignment: empty word range",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(sst::group_words(emb, {RowRange{0, 2}, RowRange{1, 3}}),
                       "invalid-alignment: overlapping or unordered ranges", std::invalid_argument);
  CHECK_THROWS_WITH_AS(sst::group_words(emb, {RowRange{2, 5}}),
                       "invalid-alignment: range out of bounds", std::invalid_argument);
}

TEST_CASE("contrastive loss is zero for a single word pair") {
  const Mat<double> ws = Mat<double>::from_rows({{0.3, -1.2, 0.5}});
  const Mat<double> wt = Mat<double>::from_rows({{2.0, 0.1, -0.4}});
  CHECK(sst::waco_loss(ws, wt, 0.2) == 0.0);
}

TEST_CASE("contrastive loss matches the closed form for orthogonal pairs") {
  // cos(i,i) = 1 and cos(i,j) = 0, so each term is log(1 + exp(-1/tau)).
  const Mat<double> ws = rows2x4({1, 0, 0, 0}, {0, 1, 0, 0});
  const Mat<double> wt = rows2x4({1, 0, 0, 0}, {0, 1, 0, 0});
  const double expect = std::log(1.0 + std::exp(-5.0));
  CHECK(sst::waco_loss(ws, wt, 0.2) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(sst::waco_loss(ws, wt, 0.2) ==
        doctest::Approx(0.006715348489117967).epsilon(1e-12));
}

TEST_CASE("contrastive loss depends only on directions") {
  std::mt19937_64 rng(91);
  Mat<double> ws = sst::detail::uniform_matrix<double>(rng, 3, 5);
  const Mat<double> wt = sst::detail::uniform_matrix<double>(rng, 3, 5);
  const double base = sst::waco_loss(ws, wt, 0.2);
  for (int c = 0; c < ws.cols(); ++c) ws(1, c) *= 3.7;
  CHECK(sst::waco_loss(ws, wt, 0.2) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("pulling a speech word toward the wrong text word raises the loss") {
  const Mat<double> ws = rows2x4({1, 0, 0, 0}, {0, 1, 0, 0});
  const Mat<double> wt = rows2x4({1, 0, 0, 0}, {0, 1, 0, 0});
  const double base = sst::waco_loss(ws, wt, 0.2);
  // Rotate ws row 0 toward wt row 1: its wrong-pair similarity grows.
  const Mat<double> worse = rows2x4({0.8, 0.6, 0, 0}, {0, 1, 0, 0});
  CHECK(sst::waco_loss(worse, wt, 0.2) > base);

  std::mt19937_64 rng(92);
  const Mat<double> rs = sst::detail::uniform_matrix<double>(rng, 4, 6);
  const Mat<double> rt = sst::detail::uniform_matrix<double>(rng, 4, 6);
  CHECK(sst::waco_loss(rs, rt, 0.2) >= 0.0);
}

TEST_CASE("contrastive loss input validation") {
  const Mat<double> ok = rows2x4({1, 0, 0, 0}, {0, 1, 0, 0});
  Mat<double> zero = ok;
  zero(1, 0) = 0;
  zero(1, 1) = 0;
  CHECK_THROWS_WITH_AS(sst::waco_loss(zero, ok, 0.2), "invalid-input: zero-norm word embedding",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(sst::waco_loss(ok, ok, 0.0), "invalid-argument: tau must be positive",
                       std::invalid_argument);
  CHECK_THROWS_AS(sst::waco_loss(ok, ok, -1.0), std::invalid_argument);
}

TEST_CASE("contrastive gradients agree with finite differences") {
  std::mt19937_64 rng(93);
  const Mat<double> ws = sst::detail::uniform_matrix<double>(rng, 3, 4);
  const Mat<double> wt = sst::detail::uniform_matrix<double>(rng, 3, 4);
  const double tau = 0.2;
  const sst::WacoGradients<double> g = sst::waco_loss_grad(ws, wt, tau);
  CHECK(g.loss == doctest::Approx(sst::waco_loss(ws, wt, tau)).epsilon(1e-12));

  const Mat<double> num_ws = sst::finite_diff_grad<double>(
      [&](const Mat<double>& x) { return sst::waco_loss(x, wt, tau); }, ws);
  const Mat<double> num_wt = sst::finite_diff_grad<double>(
      [&](const Mat<double>& x) { return sst::waco_loss(ws, x, tau); }, wt);
  CHECK(sst::max_relative_error(g.d_ws, num_ws) <= 1e-3);
  CHECK(sst::max_relative_error(g.d_wt, num_wt) <= 1e-3);
}

TEST_CASE("training mask grid for one-frame segments") {
  sst::Stage2MaskSpec spec;
  spec.segment_sizes = {1, 1, 1};
  spec.token_groups = {0, 0, 1};
  spec.k = 1;
  spec.n = 1;
  const sst::Mask m = sst::build_stage2_mask(spec);
  const int expect[6][6] = {{1, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0}, {1, 1, 1, 0, 0, 0},
                            {1, 0, 0, 1, 0, 0}, {1, 0, 0, 1, 1, 0}, {1, 1, 0, 1, 1, 1}};
  REQUIRE(m.rows() == 6);
  for (int q = 0; q < 6; ++q)
    for (int k = 0; k < 6; ++k) CHECK(m.allowed(q, k) == (expect[q][k] == 1));
}

TEST_CASE("training mask structural properties") {
  std::mt19937_64 rng(94);
  for (int trial = 0; trial < 20; ++trial) {
    sst::Stage2MaskSpec spec;
    const int segs = 2 + static_cast<int>(rng() % 4);
    for (int s = 0; s < segs; ++s) spec.segment_sizes.push_back(1 + static_cast<int>(rng() % 3));
    const int text = 2 + static_cast<int>(rng() % 5);
    int g = 0;
    for (int t = 0; t < text; ++t) {
      spec.token_groups.push_back(g);
      if (rng() % 2 == 0) ++g;
    }
    spec.k = 1 + static_cast<int>(rng() % 3);
    spec.n = 1 + static_cast<int>(rng() % 3);

    const sst::Mask m = sst::build_stage2_mask(spec);
    int speech_rows = 0;
    for (int s : spec.segment_sizes) speech_rows += s;

    // Speech never attends text.
    for (int q = 0; q < speech_rows; ++q)
      for (int k = speech_rows; k < m.cols(); ++k) CHECK_FALSE(m.allowed(q, k));

    // A later text row sees a superset of what any earlier text row sees.
    for (int q = speech_rows + 1; q < m.rows(); ++q)
      for (int k = 0; k < m.cols(); ++k)
        if (m.allowed(q - 1, k) && k < q) CHECK(m.allowed(q, k));

    // With k >= number of segments, text sees all speech.
    sst::Stage2MaskSpec wide = spec;
    wide.k = segs + 5;
    const sst::Mask w = sst::build_stage2_mask(wide);
    for (int q = speech_rows; q < w.rows(); ++q)
      for (int k = 0; k < speech_rows; ++k) CHECK(w.allowed(q, k));
  }
}

TEST_CASE("training mask input validation") {
  sst::Stage2MaskSpec spec;
  spec.segment_sizes = {1};
  spec.token_groups = {0};
  spec.k = 0;
  CHECK_THROWS_WITH_AS(sst::build_stage2_mask(spec), "invalid-argument: k must be >= 1",
                       std::invalid_argument);
  spec.k = 1;
  spec.n = 0;
  CHECK_THROWS_AS(sst::build_stage2_mask(spec), std::invalid_argument);
  spec.n = 1;
  spec.token_groups = {1, 0};
  CHECK_THROWS_WITH_AS(sst::build_stage2_mask(spec),
                       "invalid-argument: token groups must be nondecreasing",
                       std::invalid_argument);
  spec.token_groups = {0};
  spec.segment_sizes = {-1};
  CHECK_THROWS_WITH_AS(sst::build_stage2_mask(spec), "invalid-argument: negative segment size",
                       std::invalid_argument);
}

TEST_CASE("token group assignment counts boundaries before each row") {
  const sst::Vocabulary vocab;
  const std::vector<int> tokens{5, 2, 6, 2, 7, 2};
  CHECK(sst::token_groups_for(std::span<const int>(tokens), vocab, 2) ==
        std::vector<int>{0, 0, 0, 0, 0, 1, 1});
  CHECK(sst::token_groups_for(std::span<const int>(tokens), vocab, 1) ==
        std::vector<int>{0, 0, 0, 1, 1, 2, 2});
  CHECK_THROWS_AS(sst::token_groups_for(std::span<const int>(tokens), vocab, 0),
                  std::invalid_argument);
}

TEST_CASE("cross entropy of uniform logits is log vocabulary size") {
  const std::vector<int> t7{0, 3};
  CHECK(sst::masked_ce(Mat<double>::filled(2, 7, 0.25), std::span<const int>(t7)) ==
        doctest::Approx(1.9459101490553132).epsilon(1e-12));
  const std::vector<int> t8{5};
  CHECK(sst::masked_ce(Mat<double>::filled(1, 8, -3.0), std::span<const int>(t8)) ==
        doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy of a confident correct prediction is near zero") {
  Mat<double> logits = Mat<double>::filled(2, 6, 0.0);
  logits(0, 2) = 1e6;
  logits(1, 4) = 1e6;
  const std::vector<int> targets{2, 4};
  CHECK(sst::masked_ce(logits, std::span<const int>(targets)) <= 1e-9);
}

TEST_CASE("cross entropy input validation") {
  const Mat<double> logits = Mat<double>::filled(2, 4, 0.0);
  const std::vector<int> big{0, 4};
  CHECK_THROWS_WITH_AS(sst::masked_ce(logits, std::span<const int>(big)),
                       "invalid-target: target id outside vocabulary", std::invalid_argument);
  const std::vector<int> neg{0, -1};
  CHECK_THROWS_AS(sst::masked_ce(logits, std::span<const int>(neg)), std::invalid_argument);
  const std::vector<int> short_targets{0};
  CHECK_THROWS_AS(sst::masked_ce(logits, std::span<const int>(short_targets)),
                  std::invalid_argument);
}

TEST_CASE("cross entropy gradients agree with finite differences") {
  std::mt19937_64 rng(95);
  const Mat<double> logits = sst::detail::uniform_matrix<double>(rng, 3, 6);
  const std::vector<int> targets{2, 0, 5};
  const sst::CeGradients<double> g = sst::masked_ce_grad(logits, std::span<const int>(targets));
  CHECK(g.loss ==
        doctest::Approx(sst::masked_ce(logits, std::span<const int>(targets))).epsilon(1e-12));
  const Mat<double> num = sst::finite_diff_grad<double>(
      [&](const Mat<double>& x) { return sst::masked_ce(x, std::span<const int>(targets)); },
      logits);
  CHECK(sst::max_relative_error(g.d_logits, num) <= 1e-3);
}

TEST_CASE("k sampling is deterministic and near-uniform") {
  sst::KSampler single({3}, 17);
  for (int i = 0; i < 5; ++i) CHECK(single.next() == 3);

  sst::KSampler a({1, 2, 3}, 5);
  sst::KSampler b({1, 2, 3}, 5);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  const std::vector<int> candidates{1, 2, 3, 4, 5, 100};
  sst::KSampler s(candidates, 123);
  std::vector<int> counts(candidates.size(), 0);
  for (int i = 0; i < 60000; ++i) {
    const int v = s.next();
    bool found = false;
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (candidates[c] == v) {
        ++counts[c];
        found = true;
      }
    CHECK(found);
  }
  for (int c : counts) {
    CHECK(c > 8800);
    CHECK(c < 11200);
  }

  CHECK(sst::sample_k({1, 2, 3}, 5) == sst::KSampler({1, 2, 3}, 5).next());
  CHECK_THROWS_WITH_AS(sst::KSampler({}, 0), "invalid-config: empty candidate set",
                       std::invalid_argument);
}

TEST_CASE("training and streaming arrangements give the same logits") {
  std::mt19937_64 rng(96);
  const sst::Model model = sst::Model::random(41);
  std::vector<Mat<float>> segments;
  for (int s = 0; s < 3; ++s)
    segments.push_back(sst::detail::uniform_matrix<float>(rng, 2, model.cfg.d_model));
  const std::vector<int> tokens{5, 2, 6, 2, 7, 2};

  CHECK(sst::stage2_logit_equivalence(model, segments, std::span<const int>(tokens), 1, 2) <=
        1e-5f);
  CHECK(sst::stage2_logit_equivalence(model, segments, std::span<const int>(tokens), 9, 2) <=
        1e-5f);

  const sst::ModelT<double> dmodel = sst::ModelT<double>::random(41);
  std::vector<Mat<double>> dsegments;
  for (int s = 0; s < 3; ++s)
    dsegments.push_back(sst::detail::uniform_matrix<double>(rng, 2, dmodel.cfg.d_model));
  CHECK(sst::stage2_logit_equivalence(dmodel, dsegments, std::span<const int>(tokens), 2, 1) <=
        1e-10);

  CHECK_THROWS_AS(
      sst::stage2_logit_equivalence(model, {}, std::span<const int>(tokens), 1, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      sst::stage2_logit_equivalence(model, segments, std::span<const int>(tokens), 0, 1),
      std::invalid_argument);
}
