#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathvar/net_json.hpp"
#include "pathvar/nets.hpp"
#include "pathvar/jsonfmt.hpp"
#include "test_util.hpp"

using namespace pathvar;
using testutil::close_rel;

namespace {

GeneralReLUNet linear_net_3x1_minus_2x2() {
  DenseStage out;
  out.weights = Matrix::from_rows({{3.0, -2.0}});
  return GeneralReLUNet(2, {out}, OutputSpec::linear());
}

}  // namespace

TEST_CASE("canonicalize splits signs onto duplicates") {
  auto net = linear_net_3x1_minus_2x2();
  auto canon = canonicalize(net);
  CHECK(canon.encoding() == InputEncoding::signed_locked);
  CHECK(canon.inner_width() == 6);  // [x1, x2, 1, -x1, -x2, -1]
  auto row = canon.stages().back().weights.row(0);
  CHECK(row[0] == 3.0);  // +x1
  CHECK(row[4] == 2.0);  // -x2
  CHECK(row[1] == 0.0);
  CHECK(row[3] == 0.0);

  InputPoint x({0.5, -0.5});
  CHECK(evaluate(net, x) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(evaluate(canon, x) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("offsets route through the locked unit") {
  DenseStage hidden;
  hidden.weights = Matrix::from_rows({{1.0}});
  hidden.offsets = {0.7};
  DenseStage out;
  out.weights = Matrix::from_rows({{1.0}});
  GeneralReLUNet net(1, {hidden, out}, OutputSpec::linear());
  auto canon = canonicalize(net);

  // input layout [x1, 1, -x1, -1]; offset 0.7 sits on the locked +1 slot
  CHECK(canon.stages()[0].weights(0, 1) == 0.7);
  InputPoint x({-0.5});
  CHECK(evaluate(net, x) == doctest::Approx(0.2));
  CHECK(evaluate(canon, x) == doctest::Approx(0.2));
  CHECK(canon.has_duplicate_structure());
}

TEST_CASE("canonicalization preserves values on random nets") {
  Stream rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + static_cast<int>(rng.index(3));
    int depth = 1 + static_cast<int>(rng.index(3));
    auto net = testutil::random_general_net(rng, d, depth, 4, true, trial % 3 == 0);
    auto canon = canonicalize(net);
    CHECK(canon.has_duplicate_structure());
    for (std::size_t s = 0; s + 1 < canon.depth(); ++s)
      CHECK(canon.stages()[s].weights.rows ==
            2 * (net.stages()[s].weights.rows + 1));
    for (int k = 0; k < 100; ++k) {
      InputPoint x(testutil::random_input(rng, d));
      double a = evaluate(net, x);
      double b = evaluate(canon, x);
      REQUIRE(close_rel(a, b, 1e-10));
    }
  }
}

TEST_CASE("evaluate hand examples") {
  SUBCASE("zero net maps everything to zero") {
    DenseStage out;
    out.weights = Matrix(1, 3, 0.0);
    GeneralReLUNet net(3, {out}, OutputSpec::linear());
    Stream rng(7);
    for (int i = 0; i < 10; ++i)
      CHECK(evaluate(net, InputPoint(testutil::random_input(rng, 3))) == 0.0);
  }
  SUBCASE("two-unit relu net on the positive region") {
    DenseStage hidden;
    hidden.weights = Matrix::from_rows({{3.0, 0.0}, {1.0, 1.0}});
    DenseStage out;
    out.weights = Matrix::from_rows({{2.0, 1.0}});
    GeneralReLUNet net(2, {hidden, out}, OutputSpec::linear());
    CHECK(evaluate(net, InputPoint({1.0, 1.0})) == 8.0);

    GeneralReLUNet clipped(2, {hidden, out}, OutputSpec::clip(1.0));
    CHECK(evaluate(clipped, InputPoint({1.0, 1.0})) == 1.0);
  }
}

TEST_CASE("clip is 1-Lipschitz and fixes zero") {
  OutputSpec clip = OutputSpec::clip(1.0);
  CHECK(clip.apply(0.0) == 0.0);
  Stream rng(11);
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform(-5.0, 5.0);
    double b = rng.uniform(-5.0, 5.0);
    CHECK(std::abs(clip.apply(a) - clip.apply(b)) <= std::abs(a - b));
  }
  CHECK(clip.apply(8.0) == 1.0);
}

TEST_CASE("clip output keeps evaluations inside [-B, B]") {
  Stream rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = testutil::random_general_net(rng, 3, 3, 4, true, true);
    double b = net.output().clip_bound;
    for (int k = 0; k < 50; ++k) {
      double f = evaluate(net, InputPoint(testutil::random_input(rng, 3)));
      CHECK(f <= b);
      CHECK(f >= -b);
    }
  }
}

TEST_CASE("duplicate pairs flip contributions exactly") {
  Stream rng(17);
  auto net = canonicalize(testutil::random_general_net(rng, 3, 3, 4, true));
  const auto& stage = net.stages()[0];
  std::size_t rows_half = stage.weights.rows / 2;
  std::size_t cols_half = stage.weights.cols / 2;
  std::vector<double> zeta(net.inner_width());
  for (int trial = 0; trial < 50; ++trial) {
    // twin-structured signal: second half mirrors the first with flipped sign
    for (std::size_t j = 0; j < cols_half; ++j) {
      zeta[j] = rng.uniform(-1.0, 1.0);
      zeta[cols_half + j] = -zeta[j];
    }
    auto unit_value = [&](std::size_t u, const std::vector<double>& in) {
      double pre = dot(stage.weights.row(u), in);
      double v = pre > 0.0 ? pre : 0.0;
      return stage.signs[u] == 1 ? v : -v;
    };
    std::vector<double> neg(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) neg[i] = -zeta[i];
    for (std::size_t u = 0; u < rows_half; ++u) {
      // twin units report the exact sign flip of their partner
      CHECK(unit_value(rows_half + u, zeta) == -unit_value(u, zeta));
      // negating the signal of a source pair negates its contribution
      auto row = stage.weights.row(u);
      for (std::size_t j = 0; j < cols_half; ++j) {
        double c = row[j] * zeta[j] + row[cols_half + j] * zeta[cols_half + j];
        double c_neg = row[j] * neg[j] + row[cols_half + j] * neg[cols_half + j];
        CHECK(c_neg == -c);
      }
      // whole preactivations negate with the whole signal
      CHECK(dot(row, neg) == -dot(row, zeta));
    }
  }
}

TEST_CASE("input domain and dimensions are enforced") {
  CHECK_THROWS_AS(InputPoint({1.5}), PreconditionError);
  CHECK_THROWS_AS(InputPoint({-1.0001}), PreconditionError);

  auto net = linear_net_3x1_minus_2x2();
  CHECK_THROWS_AS(evaluate(net, InputPoint({0.1})), DimensionError);

  DenseStage bad_out;
  bad_out.weights = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(GeneralReLUNet(2, {bad_out}, OutputSpec::linear()), DimensionError);

  DenseStage mismatched;
  mismatched.weights = Matrix::from_rows({{1.0, 1.0, 1.0}});
  CHECK_THROWS_AS(GeneralReLUNet(2, {mismatched}, OutputSpec::linear()), DimensionError);

  CHECK_THROWS_AS(OutputSpec::clip(0.0).validate(), PreconditionError);
}

TEST_CASE("canonical nets reject signed weights and bad sign tags") {
  CanonicalStage out;
  out.weights = Matrix::from_rows({{1.0, -0.5}});
  CHECK_THROWS_AS(CanonicalNet(2, InputEncoding::raw, {out}, OutputSpec::linear()),
                  PreconditionError);

  CanonicalStage hidden;
  hidden.weights = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  hidden.signs = {1, 2};
  CanonicalStage top;
  top.weights = Matrix::from_rows({{1.0, 1.0}});
  CHECK_THROWS_AS(CanonicalNet(2, InputEncoding::raw, {hidden, top}, OutputSpec::linear()),
                  PreconditionError);
}

TEST_CASE("json round trip for the three net forms") {
  Stream rng(23);
  auto gen = testutil::random_general_net(rng, 3, 3, 4, true, true);
  auto parsed_gen = general_net_from_json(nlohmann::json::parse(dump_json(to_json(gen))));
  for (std::size_t s = 0; s < gen.depth(); ++s) {
    CHECK(parsed_gen.stages()[s].weights.data == gen.stages()[s].weights.data);
    CHECK(parsed_gen.stages()[s].offsets == gen.stages()[s].offsets);
  }

  auto canon = canonicalize(gen);
  auto parsed_can = canonical_net_from_json(nlohmann::json::parse(dump_json(to_json(canon))));
  CHECK(parsed_can.encoding() == canon.encoding());
  for (std::size_t s = 0; s < canon.depth(); ++s)
    CHECK(parsed_can.stages()[s].weights.data == canon.stages()[s].weights.data);

  auto variant = net_from_json(to_json(canon));
  CHECK(std::holds_alternative<CanonicalNet>(variant));
}

TEST_CASE("strict net schema rejects unknown keys and orientations") {
  auto j = to_json(linear_net_3x1_minus_2x2());
  j["surprise"] = 1;
  CHECK_THROWS_WITH_AS(general_net_from_json(j), doctest::Contains("surprise"),
                       PreconditionError);
  j.erase("surprise");
  j["orientation"] = "outer_first";
  CHECK_THROWS_AS(general_net_from_json(j), PreconditionError);
}

TEST_CASE("constant shift through the locked pair") {
  Stream rng(29);
  auto net = canonicalize(testutil::random_general_net(rng, 2, 2, 3, true));
  auto shifted = shift_output_by_constant(net, 0.75);
  auto shifted_neg = shift_output_by_constant(net, -0.4);
  for (int k = 0; k < 30; ++k) {
    InputPoint x(testutil::random_input(rng, 2));
    double base = evaluate(net, x);
    CHECK(close_rel(evaluate(shifted, x), base + 0.75, 1e-12));
    CHECK(close_rel(evaluate(shifted_neg, x), base - 0.4, 1e-12));
  }
}
