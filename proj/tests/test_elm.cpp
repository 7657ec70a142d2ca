#include <gtest/gtest.h>

#include "ofdmml/channel/channel.hpp"
#include "ofdmml/elm/elm.hpp"
#include "ofdmml/elm/elm_io.hpp"
#include "test_util.hpp"

namespace ofdmml {
namespace {

RMat qpsk_pairs(std::size_t n, RngStream& rng) {
  const QamConstellation c(4);
  CVec x(n);
  for (auto& v : x) v = c.point(rng.below(4));
  return to_real_pairs(x);
}

RMat through_channel(const RMat& x, cplx h, double noise, RngStream& rng) {
  CVec y = from_real_pairs(x);
  for (auto& v : y) v = v * h + (noise > 0.0 ? rng.complex_normal(noise) : cplx{});
  return to_real_pairs(y);
}

TEST(Radbas, Values) {
  EXPECT_EQ(radbas(0.0), 1.0);
  EXPECT_DOUBLE_EQ(radbas(2.0), std::exp(-4.0));
  EXPECT_DOUBLE_EQ(radbas(-1.5), radbas(1.5));
}

TEST(HiddenMatrix, ZeroInputZeroBiasIsAllOnes) {
  RngStream rng(51, 1);
  ElmSubnet s(testing::random_matrix<double>(7, 2, rng), std::vector<double>(7, 0.0));
  const RMat o = s.hidden_matrix(RMat(3, 2));
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_EQ(o.data()[i], 1.0);
}

TEST(HiddenMatrix, SingleNodeHandValue) {
  ElmSubnet s(RMat{{1.0, 0.0}}, {0.0});
  const RMat o = s.hidden_matrix(RMat{{2.0, 5.0}});
  EXPECT_DOUBLE_EQ(o(0, 0), std::exp(-4.0));
}

TEST(HiddenMatrix, MatchesElementLoopOracle) {
  RngStream rng(51, 2);
  const ElmSubnet s(50, rng);
  const RMat y = testing::random_matrix<double>(100, 2, rng);
  const RMat o = s.hidden_matrix(y);
  ASSERT_EQ(o.rows(), 100u);
  ASSERT_EQ(o.cols(), 50u);
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t l = 0; l < 50; ++l) {
      const double z = s.input_weights()(l, 0) * y(i, 0) + s.input_weights()(l, 1) * y(i, 1) + s.biases()[l];
      EXPECT_NEAR(o(i, l), std::exp(-z * z), 1e-14);
    }
  }
}

TEST(Subnet, InitialWeightsAreUniformInUnitBox) {
  RngStream rng(51, 3);
  const ElmSubnet s(1000, rng);
  double mean = 0.0;
  for (std::size_t i = 0; i < s.input_weights().size(); ++i) {
    const double v = s.input_weights().data()[i];
    ASSERT_GE(v, -1.0);
    ASSERT_LT(v, 1.0);
    mean += v;
  }
  for (double b : s.biases()) {
    ASSERT_GE(b, -1.0);
    ASSERT_LT(b, 1.0);
  }
  EXPECT_NEAR(mean / 2000.0, 0.0, 4.0 * std::sqrt(1.0 / 3.0 / 2000.0));
}

TEST(Train, InterpolatesWhenHiddenExceedsPilots) {
  RngStream rng(52, 1);
  ElmSubnet s(50, rng);
  const RMat x = qpsk_pairs(20, rng);
  // Distinct received samples so the interpolation problem is well posed.
  const RMat y = through_channel(x, cplx{1.0, 0.0}, 0.01, rng);
  s.train(y, x);
  EXPECT_LT(frobenius_norm(s.hidden_matrix(y) * s.output_weights() - x), 1e-8);
}

TEST(Train, PerturbingOutputWeightsIncreasesResidual) {
  RngStream rng(52, 2);
  ElmSubnet s(50, rng);
  const RMat x = qpsk_pairs(100, rng);
  const RMat y = through_channel(x, rng.complex_normal(1.0), 0.03, rng);
  s.train(y, x);
  const RMat o = s.hidden_matrix(y);
  const double base = frobenius_norm(o * s.output_weights() - x);
  for (int d = 0; d < 100; ++d) {
    RMat b = s.output_weights();
    const RMat delta = testing::random_matrix<double>(50, 2, rng);
    const double step = 1e-3 / frobenius_norm(delta);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += step * delta.data()[i];
    EXPECT_GE(frobenius_norm(o * b - x), base);
  }
}

TEST(Train, ResidualIsOrthogonalToHiddenColumns) {
  RngStream rng(52, 3);
  ElmSubnet s(50, rng);
  const RMat x = qpsk_pairs(100, rng);
  const RMat y = through_channel(x, rng.complex_normal(1.0), std::pow(10.0, -1.5), rng);
  s.train(y, x);
  const RMat o = s.hidden_matrix(y);
  const RMat g = adjoint(o) * (o * s.output_weights() - x);
  EXPECT_LT(frobenius_norm(g) / (frobenius_norm(o) * frobenius_norm(x)), 1e-9);
}

TEST(Train, MatchesNormalEquationsWhenWellConditioned) {
  // At L = 50 the radbas hidden matrix has condition number near 1e8, which
  // squares past double precision in O^T O; L = 10 keeps the oracle meaningful.
  RngStream rng(52, 4);
  ElmSubnet s(10, rng);
  const RMat x = qpsk_pairs(100, rng);
  const RMat y = through_channel(x, rng.complex_normal(1.0), std::pow(10.0, -1.5), rng);
  s.train(y, x);
  const RMat o = s.hidden_matrix(y);
  const auto sv = svd(o);
  ASSERT_LT(sv.s.front() / sv.s.back(), 1e4);
  const RMat oracle = testing::gauss_jordan_inverse(adjoint(o) * o) * (adjoint(o) * x);
  EXPECT_LT(max_abs_diff(s.output_weights(), oracle), 1e-8);
}

TEST(Train, DegenerateEqualRowsGiveMinimumNormSolution) {
  RngStream rng(52, 5);
  ElmSubnet s(5, rng);
  const RMat y(6, 2, 0.3);
  const RMat x(6, 2, 0.7);
  s.train(y, x, ElmConfig{.hidden = 5, .normalize_inputs = false});
  const RMat o = s.hidden_matrix(y);
  EXPECT_TRUE(all_finite(s.output_weights()));
  EXPECT_LT(max_abs_diff(o * s.output_weights(), x), 1e-10);
  EXPECT_LT(max_abs_diff(s.output_weights(), pinv(o) * x), 1e-12);
}

TEST(Train, HiddenLayerStaysFixed) {
  RngStream rng(52, 6);
  ElmSubnet s(50, rng);
  const RMat a = s.input_weights();
  const std::vector<double> b = s.biases();
  const RMat x = qpsk_pairs(100, rng);
  s.train(through_channel(x, cplx{0.3, -0.8}, 0.05, rng), x);
  EXPECT_EQ(s.input_weights(), a);
  EXPECT_EQ(s.biases(), b);
}

TEST(Detect, UntrainedSubnetThrows) {
  RngStream rng(53, 1);
  const ElmSubnet s(5, rng);
  EXPECT_THROW((void)s.predict(RMat(1, 2)), std::logic_error);
  const ElmBank bank(4, ElmConfig{}, 1);
  EXPECT_THROW((void)bank.detect(CMat(1, 4)), std::logic_error);
  EXPECT_THROW((void)bank.detect(CMat(1, 3)), std::invalid_argument);
}

struct BankBlock {
  CMat tx_pilots;
  CMat rx_pilots;
  CMat tx_data;
  CMat rx_data;
};

BankBlock simulate_block(std::size_t pilots, std::size_t data, double snr_db, RngStream& rng) {
  const QamConstellation c(4);
  const UserChannel ch = draw_user_channel(ChannelProfile::exponential(), 1.0, 64, rng);
  const double noise = std::pow(10.0, -snr_db / 10.0);
  BankBlock b{CMat(pilots, 64), CMat(pilots, 64), CMat(data, 64), CMat(data, 64)};
  auto fill = [&](CMat& tx, CMat& rx) {
    for (std::size_t i = 0; i < tx.rows(); ++i) {
      for (std::size_t k = 0; k < 64; ++k) {
        tx(i, k) = c.point(rng.below(4));
        rx(i, k) = tx(i, k) * ch.response[k] + (noise > 0.0 ? rng.complex_normal(noise) : cplx{});
      }
    }
  };
  fill(b.tx_pilots, b.rx_pilots);
  fill(b.tx_data, b.rx_data);
  return b;
}

TEST(Bank, OneSubnetPerSubcarrierSharingShape) {
  const ElmBank bank(64, ElmConfig{}, 9);
  EXPECT_EQ(bank.subcarriers(), 64u);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(bank.subnet(k).hidden(), 50u);
  EXPECT_NE(bank.subnet(0).biases(), bank.subnet(1).biases());
}

TEST(Bank, TrainingIsOneSolvePerSubnet) {
  RngStream rng(54, 1);
  ElmBank bank(64, ElmConfig{}, 9);
  const BankBlock b = simulate_block(100, 1, 15.0, rng);
  FlopCounter fc;
  {
    FlopScope scope(fc);
    bank.train(b.rx_pilots, b.tx_pilots);
  }
  EXPECT_EQ(fc.get(Op::linear_solve), 64u);
}

TEST(Bank, ResidualOrthogonalityForEverySubnet) {
  RngStream rng(54, 2);
  ElmBank bank(64, ElmConfig{}, 9);
  const BankBlock b = simulate_block(100, 1, 15.0, rng);
  bank.train(b.rx_pilots, b.tx_pilots);
  for (std::size_t k = 0; k < 64; ++k) {
    const auto& s = bank.subnet(k);
    const RMat o = s.hidden_matrix(to_real_pairs(b.rx_pilots.col(k)));
    const RMat x = to_real_pairs(b.tx_pilots.col(k));
    const RMat g = adjoint(o) * (o * s.output_weights() - x);
    EXPECT_LT(frobenius_norm(g) / (frobenius_norm(o) * frobenius_norm(x)), 1e-9) << "subnet " << k;
  }
}

TEST(Bank, NoiselessReplayRecoversPilots) {
  RngStream rng(54, 3);
  ElmBank bank(64, ElmConfig{}, 9);
  // Unit-modulus channel per subcarrier keeps the pilot constellation distinct.
  const QamConstellation c(4);
  CMat tx(4, 64);
  CMat rx(4, 64);
  for (std::size_t k = 0; k < 64; ++k) {
    const cplx h = std::polar(1.0, rng.uniform(0.0, 6.0));
    for (std::size_t i = 0; i < 4; ++i) {
      tx(i, k) = c.point(i);
      rx(i, k) = tx(i, k) * h;
    }
  }
  bank.train(rx, tx);
  EXPECT_LT(max_abs_diff(bank.detect(rx), tx), 1e-8);
  EXPECT_EQ(bank.detect_bits(rx, c), demap_symbols(std::span<const cplx>(tx.data(), tx.size()), c));
}

TEST(Bank, OutputWeightsReusedWithinBlockAndChangeAcrossBlocks) {
  RngStream rng(54, 4);
  ElmBank bank(64, ElmConfig{}, 9);
  const BankBlock b1 = simulate_block(100, 3, 20.0, rng);
  bank.train(b1.rx_pilots, b1.tx_pilots);
  const RMat w1 = bank.subnet(0).output_weights();
  const CMat all = bank.detect(b1.rx_data);
  // Detecting symbols one at a time gives the same answers as a batch.
  for (std::size_t i = 0; i < 3; ++i) {
    CMat one(1, 64);
    for (std::size_t k = 0; k < 64; ++k) one(0, k) = b1.rx_data(i, k);
    const CMat d = bank.detect(one);
    for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(d(0, k), all(i, k));
  }
  EXPECT_EQ(bank.subnet(0).output_weights(), w1);
  const BankBlock b2 = simulate_block(100, 3, 20.0, rng);
  bank.train(b2.rx_pilots, b2.tx_pilots);
  EXPECT_GT(max_abs_diff(bank.subnet(0).output_weights(), w1), 0.0);
}

TEST(Bank, CheckpointRoundTrip) {
  RngStream rng(54, 5);
  ElmBank bank(8, ElmConfig{.hidden = 12}, 77);
  const BankBlock b = simulate_block(30, 2, 20.0, rng);
  CMat rx(30, 8);
  CMat tx(30, 8);
  CMat data(2, 8);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t k = 0; k < 8; ++k) {
      rx(i, k) = b.rx_pilots(i, k);
      tx(i, k) = b.tx_pilots(i, k);
    }
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 8; ++k) data(i, k) = b.rx_data(i, k);
  bank.train(rx, tx);
  const auto j = to_json(bank);
  const ElmBank back = elm_bank_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.seed(), 77u);
  EXPECT_EQ(back.config().hidden, 12u);
  EXPECT_EQ(back.detect(data), bank.detect(data));
  EXPECT_THROW(elm_bank_from_json(nlohmann::json{{"format", "other"}}), std::runtime_error);
}

TEST(Bank, SameSeedSameHiddenLayer) {
  const ElmBank a(64, ElmConfig{}, 5);
  const ElmBank b(64, ElmConfig{}, 5);
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(a.subnet(k).input_weights(), b.subnet(k).input_weights());
    EXPECT_EQ(a.subnet(k).biases(), b.subnet(k).biases());
  }
}

}  // namespace
}  // namespace ofdmml
