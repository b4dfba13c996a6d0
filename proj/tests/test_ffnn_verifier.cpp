#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rnncert/ffnn_verifier.hpp"
#include "rnncert/rng.hpp"

using namespace rnncert;
using rnncert::test::make_feedforward_toy;
using rnncert::test::make_single_memory_toy;
using rnncert::test::random_rnn;

namespace {

NeuronConstraint nc(std::vector<NeuronTerm> terms, Rel rel, double rhs) {
  return NeuronConstraint{std::move(terms), -rhs, rel};
}

std::vector<NeuronConstraint> input_box_rows(const FfnnNetwork& net, double lo, double hi) {
  std::vector<NeuronConstraint> rows;
  for (int k = 0; k < net.input_dim(); ++k) {
    rows.push_back(nc({{{0, k}, 1.0}}, Rel::GreaterEq, lo));
    rows.push_back(nc({{{0, k}, 1.0}}, Rel::LessEq, hi));
  }
  return rows;
}

}  // namespace

TEST_SUITE("ffnn_verifier") {

TEST_CASE("interval propagation through the feed-forward toy") {
  FfnnNetwork net = memory_free_ffnn(make_feedforward_toy());
  NeuronBounds nb = propagate_bounds(net, {{-5.0, 5.0}});
  CHECK(nb.post[1][0].lo == doctest::Approx(0.0));
  CHECK(nb.post[1][0].hi == doctest::Approx(5.0));
  CHECK(nb.post[1][1].lo == doctest::Approx(0.0));
  CHECK(nb.post[1][1].hi == doctest::Approx(5.0));
  CHECK(nb.post[2][0].lo == doctest::Approx(0.0));
  CHECK(nb.post[2][0].hi == doctest::Approx(15.0));
}

TEST_CASE("zero weights clamp bounds to the biased relu image") {
  LayerWeights hidden{Matrix(2, 1), std::nullopt, {1.5, -0.5}, Activation::ReLU};
  LayerWeights out{Matrix(1, 2), std::nullopt, {0.25}, Activation::Identity};
  FfnnNetwork net = memory_free_ffnn(RnnNetwork(1, {hidden, out}));
  NeuronBounds nb = propagate_bounds(net, {{-9.0, 9.0}});
  CHECK(nb.post[1][0].lo == doctest::Approx(1.5));
  CHECK(nb.post[1][0].hi == doctest::Approx(1.5));
  CHECK(nb.post[1][1].lo == doctest::Approx(0.0));
  CHECK(nb.post[1][1].hi == doctest::Approx(0.0));
  CHECK(nb.post[2][0].lo == doctest::Approx(0.25));
}

TEST_CASE("sampled evaluations never escape propagated bounds") {
  SplitMix64 rng(31);
  for (int n = 0; n < 100; ++n) {
    FfnnNetwork net = memory_free_ffnn(random_rnn(rng));
    std::vector<Interval> box(net.input_dim());
    for (auto& iv : box) {
      iv.lo = rng.uniform(-3.0, 0.0);
      iv.hi = iv.lo + rng.uniform(0.0, 4.0);
    }
    NeuronBounds nb = propagate_bounds(net, box);
    for (int s = 0; s < 1000; ++s) {
      Vector in(net.input_dim());
      for (int k = 0; k < net.input_dim(); ++k) in[k] = rng.uniform(box[k].lo, box[k].hi);
      auto vals = net.evaluate_all(in);
      for (int l = 1; l <= net.num_layers(); ++l)
        for (int j = 0; j < net.layer_size(l); ++j)
          CHECK(nb.post[l][j].contains(vals[l][j], 1e-9));
    }
  }
}

TEST_CASE("satisfiable output threshold yields a replaying witness") {
  auto net = std::make_shared<FfnnNetwork>(memory_free_ffnn(make_feedforward_toy()));
  auto rows = input_box_rows(*net, -100.0, 5.0);
  rows.push_back(nc({{{2, 0}, 1.0}}, Rel::GreaterEq, 20.0));
  auto res = verify(*net, rows);
  REQUIRE(res.status == VerifyStatus::Sat);
  CHECK(res.replay_clean);
  CHECK(res.witness[2][0] >= 20.0 - 1e-6);
  CHECK(res.witness[0][0] <= 5.0 + 1e-6);
  // The replayed witness is a genuine network evaluation.
  Vector again = net->evaluate({res.witness[0][0]});
  CHECK(again[0] == doctest::Approx(res.witness[2][0]));
}

TEST_CASE("snapshot query with invariant rows is unsatisfiable") {
  RnnNetwork rnn = make_single_memory_toy();
  SnapshotNetwork snap = snapshot(rnn);
  // P: -3 <= x <= 3, 1 <= t <= 5, 0 <= v^m <= 3(t-1); Q: out >= 16.
  std::vector<NeuronConstraint> rows;
  int t_pos = snap.time_input, m_pos = snap.memory_vars.at({1, 0});
  int x_pos = snap.original_input_offset;
  rows.push_back(nc({{{0, x_pos}, 1.0}}, Rel::GreaterEq, -3.0));
  rows.push_back(nc({{{0, x_pos}, 1.0}}, Rel::LessEq, 3.0));
  rows.push_back(nc({{{0, t_pos}, 1.0}}, Rel::GreaterEq, 1.0));
  rows.push_back(nc({{{0, t_pos}, 1.0}}, Rel::LessEq, 5.0));
  rows.push_back(nc({{{0, m_pos}, 1.0}}, Rel::GreaterEq, 0.0));
  rows.push_back(nc({{{0, m_pos}, 1.0}, {{0, t_pos}, -3.0}}, Rel::LessEq, -3.0));
  rows.push_back(nc({{{2, 0}, 1.0}}, Rel::GreaterEq, 16.0));
  auto res = verify(snap.ffnn, rows);
  CHECK(res.status == VerifyStatus::Unsat);

  // Dropping the invariant upper bound makes it satisfiable.
  auto weaker = rows;
  weaker.erase(weaker.begin() + 5);
  weaker.push_back(nc({{{0, m_pos}, 1.0}}, Rel::LessEq, 50.0));
  CHECK(verify(snap.ffnn, weaker).status == VerifyStatus::Sat);
}

TEST_CASE("a contradictory output row is unsat regardless of the network") {
  auto net = memory_free_ffnn(make_feedforward_toy());
  auto rows = input_box_rows(net, -1.0, 1.0);
  rows.push_back(nc({}, Rel::GreaterEq, 1.0));  // 0 >= 1
  CHECK(verify(net, rows).status == VerifyStatus::Unsat);
}

TEST_CASE("unbounded inputs are rejected") {
  auto net = memory_free_ffnn(make_feedforward_toy());
  std::vector<NeuronConstraint> rows;
  rows.push_back(nc({{{0, 0}, 1.0}}, Rel::LessEq, 5.0));
  CHECK_THROWS_AS(verify(net, rows), UnboundedVariableError);
}

TEST_CASE("exhaustive enumeration agrees with the MILP path on the toy queries") {
  auto net = memory_free_ffnn(make_feedforward_toy());
  auto rows = input_box_rows(net, -100.0, 5.0);
  rows.push_back(nc({{{2, 0}, 1.0}}, Rel::GreaterEq, 20.0));
  CHECK(verify_exhaustive(net, rows).status == VerifyStatus::Sat);

  RnnNetwork rnn = make_single_memory_toy();
  SnapshotNetwork snap = snapshot(rnn);
  std::vector<NeuronConstraint> rows2;
  int t_pos = snap.time_input, m_pos = snap.memory_vars.at({1, 0});
  int x_pos = snap.original_input_offset;
  rows2.push_back(nc({{{0, x_pos}, 1.0}}, Rel::GreaterEq, -3.0));
  rows2.push_back(nc({{{0, x_pos}, 1.0}}, Rel::LessEq, 3.0));
  rows2.push_back(nc({{{0, t_pos}, 1.0}}, Rel::GreaterEq, 1.0));
  rows2.push_back(nc({{{0, t_pos}, 1.0}}, Rel::LessEq, 5.0));
  rows2.push_back(nc({{{0, m_pos}, 1.0}}, Rel::GreaterEq, 0.0));
  rows2.push_back(nc({{{0, m_pos}, 1.0}, {{0, t_pos}, -3.0}}, Rel::LessEq, -3.0));
  rows2.push_back(nc({{{2, 0}, 1.0}}, Rel::GreaterEq, 16.0));
  CHECK(verify_exhaustive(snap.ffnn, rows2).status == VerifyStatus::Unsat);
}

TEST_CASE("forced-inactive relus leave nothing to enumerate") {
  LayerWeights hidden{Matrix::from_rows({{1.0}}), std::nullopt, {-10.0}, Activation::ReLU};
  LayerWeights out{Matrix::from_rows({{1.0}}), std::nullopt, {0.0}, Activation::Identity};
  FfnnNetwork net = memory_free_ffnn(RnnNetwork(1, {hidden, out}));
  auto rows = input_box_rows(net, -1.0, 1.0);
  rows.push_back(nc({{{2, 0}, 1.0}}, Rel::GreaterEq, 1.0));
  // All relus are forced inactive; max_unstable = 0 must still succeed.
  CHECK(verify_exhaustive(net, rows, 0).status == VerifyStatus::Unsat);
}

TEST_CASE("random queries: MILP path and exhaustive oracle always agree") {
  SplitMix64 rng(32);
  int done = 0, sat = 0;
  while (done < 200) {
    FfnnNetwork net = memory_free_ffnn(random_rnn(rng));
    double lo = rng.uniform(-3.0, 0.0);
    double hi = lo + rng.uniform(0.5, 4.0);
    auto rows = input_box_rows(net, lo, hi);
    int out = rng.uniform_int(0, net.output_dim() - 1);
    double thr = rng.uniform(-2.0, 4.0);
    rows.push_back(nc({{{net.num_layers(), out}, 1.0}}, Rel::GreaterEq, thr));

    std::vector<Interval> box(net.input_dim(), Interval{lo, hi});
    NeuronBounds nb = propagate_bounds(net, box);
    int unstable = 0;
    for (int l = 1; l <= net.num_layers(); ++l)
      if (net.layer(l).activation == Activation::ReLU)
        for (const auto& iv : nb.pre[l])
          if (iv.lo < 0.0 && iv.hi > 0.0) ++unstable;
    if (unstable > 12) continue;
    ++done;

    auto got = verify(net, rows);
    auto want = verify_exhaustive(net, rows, 12);
    REQUIRE_MESSAGE(got.status == want.status,
                    "disagreement on query ", done, ": milp=", to_string(got.status),
                    " oracle=", to_string(want.status));
    if (got.status == VerifyStatus::Sat) {
      ++sat;
      CHECK(got.replay_clean);
    } else if (got.status == VerifyStatus::Unsat) {
      // Spot-check the relaxation: sampling from the box never satisfies Q.
      for (int s = 0; s < 200; ++s) {
        Vector in(net.input_dim());
        for (double& x : in) x = rng.uniform(lo, hi);
        CHECK(net.evaluate(in)[out] < thr - 1e-9);
      }
    }
  }
  CHECK(sat > 20);
  CHECK(sat < 180);
}

}  // TEST_SUITE
