#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/metrics/selection.hpp"
#include "mcorr/metrics/ssim.hpp"
#include "mcorr/parallel.hpp"
#include "oracles.hpp"

using namespace mcorr;
using namespace mcorr::metrics;

namespace {

const SsimConstants kConsts;

Image2D shifted(const Image2D& img, double d) {
  std::vector<double> v(img.data().begin(), img.data().end());
  for (auto& x : v) x += d;
  return Image2D(img.width(), img.height(), 1, 1.0, Domain::raw, std::move(v));
}

Image2D constant(std::size_t n, double v) {
  return Image2D(n, n, 1, 1.0, Domain::signed_unit, std::vector<double>(n * n, v));
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Psnr, ClosedForms) {
  auto a = constant(16, 0.1);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_NEAR(psnr(a, constant(16, 0.3)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(constant(16, -1.0), constant(16, 1.0)), 0.0, 1e-12);
}

TEST(Psnr, SymmetricAndMatchesOracle) {
  auto a = oracle::random_signed(20, 17, 1);
  auto b = oracle::random_signed(20, 17, 2);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-9);
}

TEST(Psnr, ShapeMismatch) { EXPECT_THROW(psnr(constant(8, 0), constant(9, 0)), ShapeError); }

TEST(Ssim, IdentityIsOne) {
  auto a = oracle::random_signed(32, 32, 3);
  EXPECT_NEAR(ssim_global(a, a, kConsts), 1.0, 1e-12);
}

TEST(Ssim, AntiCorrelatedIsNegative) {
  // shared mean keeps the luminance term positive; the structure term flips sign
  auto u = oracle::random_signed(32, 32, 4);
  std::vector<double> xs(u.size()), ys(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    xs[i] = 0.3 + 0.5 * u.data()[i];
    ys[i] = 0.3 - 0.5 * u.data()[i];
  }
  Image2D x(32, 32, 1, 1.0, Domain::signed_unit, xs), y(32, 32, 1, 1.0, Domain::signed_unit, ys);
  EXPECT_LT(ssim_global(x, y, kConsts), 0.0);
  EXPECT_LT(oracle::ssim_global(x, y, kConsts.c1(), kConsts.c2()), 0.0);
}

TEST(Ssim, MatchesBruteForceWindows) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    auto a = oracle::random_signed(16, 16, seed);
    auto b = oracle::random_signed(16, 16, seed + 100);
    EXPECT_NEAR(ssim_global(a, b, kConsts), oracle::ssim_global(a, b, kConsts.c1(), kConsts.c2()), 1e-9);
  }
  auto a = oracle::random_signed(23, 19, 7);
  auto b = oracle::random_signed(23, 19, 8);
  auto map = ssim_map(a, b, kConsts);
  ASSERT_EQ(map.width(), 13u);
  ASSERT_EQ(map.height(), 9u);
  for (std::size_t y = 0; y < 9; ++y)
    for (std::size_t x = 0; x < 13; ++x)
      EXPECT_NEAR(map.at(x, y), oracle::ssim_at_window(a, b, x, y, kConsts.c1(), kConsts.c2()), 1e-9);
}

TEST(Ssim, SymmetricAndBounded) {
  auto a = oracle::random_signed(24, 24, 20);
  auto b = oracle::random_signed(24, 24, 21);
  EXPECT_NEAR(ssim_global(a, b), ssim_global(b, a), 1e-15);
  EXPECT_LT(ssim_global(a, b), 1.0);
}

TEST(Ssim, TooSmall) {
  auto a = oracle::random_signed(10, 16, 1);
  EXPECT_THROW(ssim_global(a, a), ShapeError);
}

TEST(Ssim, ThreadCountIndependent) {
  auto a = oracle::random_signed(64, 48, 30);
  auto b = oracle::random_signed(64, 48, 31);
  parallel::set_threads(1);
  const double one = ssim_global(a, b);
  parallel::set_threads(7);
  const double many = ssim_global(a, b);
  parallel::set_threads(1);
  EXPECT_EQ(one, many);
}

TEST(SsimPatch, ClosedForms) {
  std::vector<double> a(16, 0.2), b(16, 0.5);
  const double c1 = kConsts.c1();
  EXPECT_NEAR(ssim_patch(a, b, kConsts), (2 * 0.2 * 0.5 + c1) / (0.04 + 0.25 + c1), 1e-15);
  auto x = oracle::random_signed(16, 16, 40);
  EXPECT_EQ(ssim_patch(x.data(), x.data(), kConsts), 1.0);
}

TEST(SsimPatch, MatchesOracle) {
  auto x = oracle::random_signed(16, 16, 41);
  auto y = oracle::random_signed(16, 16, 42);
  std::vector<double> a(x.data().begin(), x.data().end()), b(y.data().begin(), y.data().end());
  EXPECT_NEAR(ssim_patch(a, b, kConsts), oracle::ssim_patch(a, b, kConsts.c1(), kConsts.c2()), 1e-12);
  EXPECT_NEAR(ssim_patch(a, b, kConsts), ssim_patch(b, a, kConsts), 1e-15);
  EXPECT_THROW(ssim_patch(std::vector<double>(3), std::vector<double>(4)), ShapeError);
}

TEST(Constants, Derived) {
  SsimConstants k;
  EXPECT_DOUBLE_EQ(k.c1(), 0.0004);
  EXPECT_DOUBLE_EQ(k.c2(), 0.0036);
  k.k1 = 0;
  EXPECT_THROW(k.validate(), DomainError);
}

TEST(Selection, RhoOneSelectsAll) {
  auto gt = oracle::random_signed(64, 64, 50);
  auto sel = select_patches(gt, 16, 1.0);
  EXPECT_EQ(sel.selected.size(), 16u);
  EXPECT_EQ(sorted(sel.selected), sel.grid.admitted_cells());
}

TEST(Selection, UniqueMaximum) {
  auto gt = constant(64, 0.0);
  for (std::size_t y = 32; y < 48; ++y)
    for (std::size_t x = 16; x < 32; ++x) gt.at(x, y) = ((x + y) % 2) ? 0.5 : -0.5;
  auto sel = select_patches(gt, 16, 0.01);
  ASSERT_EQ(sel.selected.size(), 1u);
  EXPECT_EQ(sel.selected[0], 2u * 4u + 1u);
}

TEST(Selection, MatchesSortOracle) {
  for (std::uint64_t seed : {60u, 61u, 62u}) {
    auto gt = oracle::random_signed(128, 128, seed);
    for (double rho : {0.05, 0.25, 0.5, 1.0}) {
      auto sel = select_patches(gt, 16, rho);
      EXPECT_EQ(sorted(sel.selected), oracle::select_cells(gt, 16, rho));
    }
  }
}

TEST(Selection, TiesGoToLowerIndex) {
  auto gt = constant(32, 0.0);
  auto sel = select_patches(gt, 8, 0.25);
  EXPECT_EQ(sel.selected, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Selection, VarianceOrderInvariant) {
  auto gt = oracle::random_signed(96, 80, 70);
  auto mask = MaskFeatureMap(96, 80);
  for (std::size_t y = 0; y < 80; ++y)
    for (std::size_t x = 0; x < 60; ++x) mask.set(x, y, true);
  auto sel = select_patches(gt, 8, 0.3, mask, 0.5);
  double min_in = INFINITY, max_out = -INFINITY;
  for (std::size_t i = 0; i < sel.cells.size(); ++i) {
    if (sel.contains(sel.cells[i]))
      min_in = std::min(min_in, sel.variances[i]);
    else
      max_out = std::max(max_out, sel.variances[i]);
  }
  EXPECT_GE(min_in, max_out);
  for (auto c : sel.selected) EXPECT_TRUE(sel.grid.is_admitted(c));
}

TEST(Selection, ShiftInvariant) {
  auto gt = oracle::random_signed(64, 64, 71, -0.5, 0.5);
  auto a = select_patches(gt, 8, 0.25);
  auto b = select_patches(shifted(gt, 0.25), 8, 0.25);
  EXPECT_EQ(sorted(a.selected), sorted(b.selected));
}

TEST(Selection, OutsideMaskNeverSelected) {
  auto gt = oracle::random_signed(64, 64, 72);
  MaskFeatureMap mask(64, 64);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 24; ++x) mask.set(x, y, true);
  for (double rho : {0.1, 0.5, 1.0}) {
    auto sel = select_patches(gt, 8, rho, mask, 0.5);
    for (auto c : sel.selected) EXPECT_LT(sel.grid.col_of(c), 3u);
    EXPECT_EQ(sorted(sel.selected), oracle::select_cells(gt, 8, rho, mask, 0.5));
  }
}

TEST(Selection, Errors) {
  auto gt = oracle::random_signed(32, 32, 73);
  EXPECT_THROW(select_patches(gt, 8, 0.0), DomainError);
  EXPECT_THROW(select_patches(gt, 8, 1.5), DomainError);
  EXPECT_THROW(select_patches(gt, 8, 0.5, MaskFeatureMap(32, 32), 0.5), EmptySelectionError);
}

TEST(Selection, SizeRounding) {
  EXPECT_EQ(selection_size(0.25, 10), 3u);  // 2.5 rounds away from zero
  EXPECT_EQ(selection_size(0.001, 10), 1u);
  EXPECT_EQ(selection_size(1.0, 7), 7u);
}

TEST(VsSsim, IdentityAndRhoOne) {
  auto gt = oracle::random_signed(64, 64, 80);
  auto gen = oracle::random_signed(64, 64, 81);
  auto sel = select_patches(gt, 16, 0.25);
  EXPECT_EQ(vs_ssim(gt, gt, sel), 1.0);
  auto all = select_patches(gt, 16, 1.0);
  double mean = 0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      mean += oracle::ssim_patch(oracle::patch_values(gt, 16, r, c), oracle::patch_values(gen, 16, r, c), kConsts.c1(),
                                 kConsts.c2());
  EXPECT_NEAR(vs_ssim(gt, gen, all), mean / 16.0, 1e-12);
}

TEST(VsSsim, CorruptingTopPatchHurtsMore) {
  auto gt = oracle::random_signed(64, 64, 82, -0.3, 0.3);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 48; x < 64; ++x) gt.at(x, y) = ((x + y) % 2) ? 0.9 : -0.9;
  auto gen = gt;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 48; x < 64; ++x) gen.at(x, y) = 0.0;
  auto top = select_patches(gt, 16, 1.0 / 16.0);
  ASSERT_EQ(top.selected, (std::vector<std::size_t>{3}));
  auto all = select_patches(gt, 16, 1.0);
  EXPECT_GT(1.0 - vs_ssim(gt, gen, top), 1.0 - vs_ssim(gt, gen, all));
}

TEST(VsSsim, GridMismatch) {
  auto gt = oracle::random_signed(64, 64, 83);
  auto sel = select_patches(gt, 16, 0.5);
  auto other = oracle::random_signed(32, 32, 84);
  EXPECT_THROW(vs_ssim(other, other, sel), ShapeError);
}

TEST(Dice, CountingCases) {
  Image2D a(20, 10, 1, 1.0, Domain::signed_unit), b(20, 10, 1, 1.0, Domain::signed_unit);
  for (auto& v : a.data()) v = -1.0;
  for (auto& v : b.data()) v = -1.0;
  EXPECT_EQ(dice(a, b), 1.0);
  // |A| = |B| = 100, overlap 50
  for (std::size_t y = 0; y < 10; ++y) {
    for (std::size_t x = 0; x < 10; ++x) a.at(x, y) = 1.0;
    for (std::size_t x = 5; x < 15; ++x) b.at(x, y) = 1.0;
  }
  EXPECT_DOUBLE_EQ(dice(a, b), 0.5);
  EXPECT_DOUBLE_EQ(dice(a, b), oracle::dice(a, b, -0.5));
  EXPECT_EQ(dice(a, a), 1.0);
  Image2D c = b;
  for (auto& v : c.data()) v = -1.0;
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 10; x < 20; ++x) c.at(x, y) = 1.0;
  EXPECT_EQ(dice(a, c), 0.0);
}

TEST(Dice, MonotoneInOverlap) {
  Image2D a(40, 1, 1, 1.0, Domain::signed_unit), b(40, 1, 1, 1.0, Domain::signed_unit);
  double prev = 2.0;
  for (std::size_t shift = 0; shift <= 20; ++shift) {
    for (std::size_t x = 0; x < 40; ++x) {
      a.at(x, 0) = x < 20 ? 1.0 : -1.0;
      b.at(x, 0) = (x >= shift && x < shift + 20) ? 1.0 : -1.0;
    }
    const double d = dice(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Report, CsvAndJson) {
  MetricsReport r{"case7", INFINITY, 1.0, 1.0, 1.0};
  EXPECT_EQ(to_csv_row(r), "case7,inf,1.000000,1.000000,1.000000");
  auto j = to_json(r);
  EXPECT_EQ(j["psnr_db"], "inf");
  auto back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(std::isinf(back.psnr_db));
  MetricsReport s{"x", 22.3813101, 0.7165641, 0.5, 0.25};
  EXPECT_EQ(to_csv_row(s), "x,22.381310,0.716564,0.500000,0.250000");
  EXPECT_EQ(std::string(kReportCsvHeader), "case_id,psnr_db,ssim,vs_ssim,dice");
}

TEST(Report, EvaluateSelfIsPerfect) {
  auto gt = oracle::random_signed(64, 64, 90);
  auto r = evaluate("self", gt, gt);
  EXPECT_TRUE(std::isinf(r.psnr_db));
  EXPECT_NEAR(r.ssim, 1.0, 1e-12);
  EXPECT_EQ(r.vs_ssim, 1.0);
  EXPECT_EQ(r.dice, 1.0);
}
