#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "occsim/rank_experiments.hpp"

using namespace occsim;

namespace {

BandedMatrixSpec make_spec(std::size_t n, std::size_t k, std::size_t alpha, std::size_t gamma, bool regular,
                           bool symmetric) {
  BandedMatrixSpec s;
  s.n = n, s.k = k, s.alpha = alpha, s.gamma = gamma, s.regular = regular, s.symmetric = symmetric;
  return s;
}

// Exact Pr[rank < k] for a uniform k × k matrix over GF(2).
double dense_square_failure(std::size_t k) {
  double full = 1.0;
  for (std::size_t i = 1; i <= k; ++i) full *= 1.0 - std::ldexp(1.0, -static_cast<int>(i));
  return 1.0 - full;
}

}  // namespace

TEST(BandedMatrixSpec, ChiAndValidation) {
  EXPECT_EQ(make_spec(8, 8, 4, 2, false, true).chi(), 4U);
  EXPECT_EQ(make_spec(8, 10, 4, 2, false, false).chi(), 4U);  // (10-2)/2
  EXPECT_THROW(make_spec(8, 9, 4, 2, false, true).validate(), SpecViolation);
  EXPECT_THROW(make_spec(8, 9, 4, 2, false, false).validate(), SpecViolation);
  EXPECT_THROW(make_spec(10, 8, 4, 2, true, true).validate(), SpecViolation);  // χ = 4 ∤ 10
  EXPECT_THROW(make_spec(8, 8, 4, 4, false, true).validate(), SpecViolation);  // γ = α
  EXPECT_NO_THROW(make_spec(12, 8, 4, 2, true, true).validate());
}

TEST(BuildBanded, SingleFullApertureIsDense) {
  const auto spec = make_spec(20, 16, 16, 0, false, true);
  EXPECT_EQ(spec.chi(), 1U);
  const auto m = build_banded(spec, 1);
  std::size_t ones = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) ones += m.row(r).count();
  EXPECT_GT(ones, 20U * 16 / 4);  // roughly half the entries, not a band
}

TEST(BuildBanded, SymmetricAperturesWrap) {
  const auto spec = make_spec(400, 8, 4, 2, false, true);
  std::vector<std::size_t> ap;
  const auto m = build_banded(spec, 2, &ap);
  std::vector<std::uint64_t> support(4, 0);
  for (std::size_t r = 0; r < m.rows(); ++r) support[ap[r]] |= m.row(r).words()[0];
  EXPECT_EQ(support[0], 0x0FU);
  EXPECT_EQ(support[1], 0x3CU);
  EXPECT_EQ(support[2], 0xF0U);
  EXPECT_EQ(support[3], 0xC3U);  // columns 6, 7, 0, 1
}

TEST(BuildBanded, AsymmetricAperturesEndAtLastColumn) {
  const auto spec = make_spec(400, 10, 4, 2, false, false);
  std::vector<std::size_t> ap;
  const auto m = build_banded(spec, 3, &ap);
  std::uint64_t last = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (ap[r] == 3) last |= m.row(r).words()[0];
  EXPECT_EQ(last, 0x3C0U);  // columns 6..9
}

TEST(BuildBanded, RegularAssignsEqualGroups) {
  const auto spec = make_spec(12, 8, 4, 2, true, true);
  std::vector<std::size_t> ap;
  build_banded(spec, 4, &ap);
  std::vector<int> counts(4, 0);
  for (auto a : ap) ++counts[a];
  EXPECT_EQ(counts, (std::vector<int>{3, 3, 3, 3}));
}

TEST(BuildBanded, RowsStayInsideTheirAperture) {
  for (bool regular : {false, true})
    for (bool symmetric : {false, true}) {
      const auto spec = symmetric ? make_spec(40, 40, 8, 4, regular, true) : make_spec(36, 40, 8, 4, regular, false);
      for (std::uint64_t s = 0; s < 1000 / 40; ++s) {
        std::vector<std::size_t> ap;
        const auto m = build_banded(spec, s, &ap);
        for (std::size_t r = 0; r < m.rows(); ++r) {
          const std::size_t start = spec.aperture_start(ap[r]);
          for (auto j : m.row(r).set_bits()) {
            const std::size_t offset = (j + spec.k - start) % spec.k;
            EXPECT_LT(offset, spec.alpha) << spec.variant_name();
            if (!symmetric) EXPECT_GE(j, start);
          }
        }
      }
    }
}

TEST(BuildBanded, IrregularApertureChoiceUniform) {
  const auto spec = make_spec(100000, 40, 8, 4, false, true);
  std::vector<std::size_t> ap;
  build_banded(spec, 5, &ap);
  const std::size_t chi = spec.chi();
  std::vector<double> counts(chi, 0.0);
  for (auto a : ap) counts[a] += 1.0;
  const double p = 1.0 / static_cast<double>(chi);
  const double sigma = std::sqrt(p * (1 - p) / 100000.0);
  for (double c : counts) EXPECT_NEAR(c / 100000.0, p, 3 * sigma);
}

TEST(EstimateFailure, DenseSquareMatchesProductFormula) {
  const auto spec = make_spec(16, 16, 16, 0, false, true);
  const auto r = estimate_failure(spec, 10000, 6);
  const double exact = dense_square_failure(16);
  EXPECT_NEAR(exact, 0.7112, 1e-3);
  EXPECT_LE(r.ci95.lo, exact);
  EXPECT_GE(r.ci95.hi, exact);
  EXPECT_DOUBLE_EQ(r.p_hat, static_cast<double>(r.failures) / 10000.0);
}

TEST(EstimateFailure, TooFewRowsAlwaysFails) {
  const auto r = estimate_failure(make_spec(50, 100, 40, 20, false, true), 200, 7);
  EXPECT_EQ(r.failures, r.trials);
  EXPECT_EQ(r.p_hat, 1.0);
}

TEST(EstimateFailure, IndependentOfJobs) {
  const auto spec = make_spec(70, 64, 16, 8, false, true);
  const auto a = estimate_failure(spec, 300, 8, 1);
  const auto b = estimate_failure(spec, 300, 8, 3);
  EXPECT_EQ(a.failures, b.failures);
}

TEST(EstimateFailure, NonIncreasingInRows) {
  const std::size_t k = 64;
  double prev_hi = 1.0;
  for (std::size_t n : {64, 66, 68, 72, 80}) {
    const auto r = estimate_failure(make_spec(n, k, 16, 8, false, true), 2000, 9);
    EXPECT_LE(r.ci95.lo, prev_hi) << "n = " << n;
    prev_hi = r.ci95.hi;
  }
}

TEST(RegimeCheck, Examples) {
  auto v = conjecture_regime_check(make_spec(110, 100, 40, 20, false, true), 0.01);
  EXPECT_NEAR(v.log_term, 6.6439, 1e-4);
  EXPECT_TRUE(v.capacity_ok);
  EXPECT_EQ(v.gamma_threshold, 20U);
  EXPECT_TRUE(v.overlap_ok);
  EXPECT_TRUE(v.in_regime());

  v = conjecture_regime_check(make_spec(103, 100, 40, 20, false, true), 0.01);
  EXPECT_FALSE(v.capacity_ok);

  // τ = 2: α = 80, γ = 40 gives τ_e·τ = 4 and threshold 40.
  v = conjecture_regime_check(make_spec(110, 100, 80, 40, false, false), 0.01);
  EXPECT_DOUBLE_EQ(v.overlap_factor, 4.0);
  EXPECT_EQ(v.gamma_threshold, 40U);
  EXPECT_TRUE(v.overlap_ok);

  EXPECT_THROW(conjecture_regime_check(make_spec(110, 100, 40, 20, false, true), 1.5), std::invalid_argument);
}

TEST(RankCsv, HeaderAndRow) {
  std::ostringstream os;
  const auto spec = make_spec(107, 100, 40, 20, false, true);
  RankTrialResult r;
  r.trials = 10, r.failures = 1, r.p_hat = 0.1, r.ci95 = {0.0025, 0.445};
  write_rank_csv_header(os);
  write_rank_csv_row(os, spec, r, 5);
  EXPECT_EQ(os.str(),
            "variant,n,k,alpha,gamma,regular,symmetric,chi,trials,failures,p_hat,ci_low,ci_high,seed\n"
            "irregular-symmetric,107,100,40,20,0,1,5,10,1,0.1,0.0025,0.445,5\n");
}
