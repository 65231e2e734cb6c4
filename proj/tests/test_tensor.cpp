#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dualenc/grad_check.hpp"
#include "dualenc/ops.hpp"
#include "dualenc/tensor.hpp"
#include "test_util.hpp"

using namespace dualenc;
using testutil::tensor1d;
using testutil::tensor2d;

TEST_CASE("tensor construction validates shape against payload") {
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::from_data({0}, {}), std::invalid_argument);
  Tensor t = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
}

TEST_CASE("matvec_affine identity case") {
  Tensor w = tensor2d({{1, 0}, {0, 1}});
  Tensor b = tensor1d({0, 0});
  Tensor x = tensor1d({3, -1});
  Tensor y = matvec_affine(x, w, b);
  CHECK(y.values()[0] == doctest::Approx(3.0));
  CHECK(y.values()[1] == doctest::Approx(-1.0));
}

TEST_CASE("matvec_affine direct evaluation") {
  Tensor w = tensor2d({{1, 2}, {3, 4}});
  Tensor b = tensor1d({1, 1});
  Tensor x = tensor1d({1, 1});
  Tensor y = matvec_affine(x, w, b);
  CHECK(y.values()[0] == doctest::Approx(4.0));
  CHECK(y.values()[1] == doctest::Approx(8.0));
}

TEST_CASE("matvec_affine shape mismatch names both shapes") {
  Tensor w = tensor2d({{1, 2}, {3, 4}});
  Tensor b = tensor1d({0, 0});
  Tensor x = tensor1d({1, 1, 1});
  try {
    matvec_affine(x, w, b);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("(3)") != std::string::npos);
    CHECK(msg.find("(2, 2)") != std::string::npos);
  }
}

TEST_CASE("matvec_affine gradient matches finite differences") {
  Rng rng(11);
  Tensor w = tensor2d(testutil::random_mat(rng, 3, 4), true);
  Tensor b = tensor1d(testutil::random_vec(rng, 3), true);
  Tensor x = tensor1d(testutil::random_vec(rng, 4), true);
  double err = grad_check([&] { return sum(matvec_affine(x, w, b)); }, {w, b, x});
  CHECK(err < 1e-6);
}

TEST_CASE("matvec_affine batched rows behave like independent vectors") {
  Rng rng(12);
  Tensor w = tensor2d(testutil::random_mat(rng, 3, 4), true);
  Tensor b = tensor1d(testutil::random_vec(rng, 3), true);
  auto m = testutil::random_mat(rng, 5, 4);
  Tensor batch = tensor2d(m);
  Tensor y = matvec_affine(batch, w, b);
  for (int r = 0; r < 5; ++r) {
    Tensor single = matvec_affine(tensor1d(m[static_cast<std::size_t>(r)]), w, b);
    for (int o = 0; o < 3; ++o) {
      CHECK(y.values()[static_cast<std::size_t>(r) * 3 + o] ==
            doctest::Approx(single.values()[static_cast<std::size_t>(o)]).epsilon(1e-12));
    }
  }
  double err = grad_check([&] { return sum(matvec_affine(batch, w, b)); }, {w, b});
  CHECK(err < 1e-6);
}

TEST_CASE("pool_mean and pool_max fixtures") {
  Tensor x = tensor2d({{1, 2}, {3, 4}});
  CHECK(pool_mean(x).values() == std::vector<double>{2, 3});
  CHECK(pool_max(x).values() == std::vector<double>{3, 4});

  Tensor single = tensor2d({{7, -2, 0.5}});
  CHECK(pool_mean(single).values() == std::vector<double>{7, -2, 0.5});
  CHECK(pool_max(single).values() == std::vector<double>{7, -2, 0.5});
}

TEST_CASE("pool_mean is invariant to row permutation") {
  Rng rng(13);
  auto m = testutil::random_mat(rng, 6, 4);
  auto shuffled = m;
  rng.shuffle(shuffled);
  auto a = pool_mean(tensor2d(m)).values();
  auto b = pool_mean(tensor2d(shuffled)).values();
  CHECK(testutil::max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("pool_max is monotone in every input element") {
  Rng rng(14);
  auto m = testutil::random_mat(rng, 5, 3);
  auto base = pool_max(tensor2d(m)).values();
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      auto bumped = m;
      bumped[r][c] += 0.5;
      auto out = pool_max(tensor2d(bumped)).values();
      for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] >= base[i]);
    }
  }
}

TEST_CASE("pooling gradients") {
  Rng rng(15);
  Tensor x = tensor2d(testutil::random_mat(rng, 4, 3), true);
  CHECK(grad_check([&] { return sum(pool_mean(x)); }, {x}) < 1e-6);
  CHECK(grad_check([&] { return sum(pool_max(x)); }, {x}) < 1e-6);
}

TEST_CASE("elementwise ops pass finite-difference checks") {
  Rng rng(16);
  Tensor a = tensor1d(testutil::random_vec(rng, 6), true);
  Tensor b = tensor1d(testutil::random_vec(rng, 6), true);
  CHECK(grad_check([&] { return sum(mul(add(a, b), sub(a, b))); }, {a, b}) < 1e-4);
  CHECK(grad_check([&] { return sum(sigmoid(a)); }, {a}) < 1e-4);
  CHECK(grad_check([&] { return sum(tanh(mul(a, b))); }, {a, b}) < 1e-4);
  CHECK(grad_check([&] { return sum(relu(a)); }, {a}) < 1e-4);
  CHECK(grad_check([&] { return sum(scale(a, -2.5)); }, {a}) < 1e-6);
}

TEST_CASE("structure ops pass finite-difference checks") {
  Rng rng(17);
  Tensor a = tensor1d(testutil::random_vec(rng, 3), true);
  Tensor b = tensor1d(testutil::random_vec(rng, 5), true);
  CHECK(grad_check([&] { return sum(concat({a, b})); }, {a, b}) < 1e-6);
  Tensor c = tensor1d(testutil::random_vec(rng, 5), true);
  CHECK(grad_check([&] { return sum(mul(stack_rows({b, c}), stack_rows({c, b}))); }, {b, c}) <
        1e-4);
  Tensor m = tensor2d(testutil::random_mat(rng, 4, 3), true);
  CHECK(grad_check([&] { return sum(mul(row(m, 2), row(m, 0))); }, {m}) < 1e-4);

  Tensor table = tensor2d(testutil::random_mat(rng, 7, 4), true);
  CHECK(grad_check([&] { return sum(embedding_rows(table, {3, 1, 3})); }, {table}) < 1e-6);
  CHECK_THROWS_AS(embedding_rows(table, {7}), std::out_of_range);
}

TEST_CASE("forward ops keep values finite on finite inputs") {
  Rng rng(18);
  for (int it = 0; it < 20; ++it) {
    Tensor a = tensor1d(testutil::random_vec(rng, 8, -50.0, 50.0));
    Tensor out = sigmoid(tanh(relu(scale(a, 3.0))));
    for (double v : out.values()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("grad_check on a linear closure is near machine precision") {
  Rng rng(19);
  Tensor w = tensor2d(testutil::random_mat(rng, 2, 3), true);
  Tensor b = tensor1d(testutil::random_vec(rng, 2), true);
  Tensor x = tensor1d(testutil::random_vec(rng, 3));
  double err = grad_check([&] { return sum(matvec_affine(x, w, b)); }, {w, b});
  CHECK(err < 1e-9);
}

TEST_CASE("grad_check on a constant closure reports zero error") {
  Tensor a = tensor1d({1.0, 2.0}, true);
  double err = grad_check([] { return Tensor::scalar(42.0); }, {a});
  CHECK(err == 0.0);
}

TEST_CASE("grad_check rejects non-scalar closures") {
  Tensor a = tensor1d({1.0, 2.0}, true);
  CHECK_THROWS_AS(grad_check([&] { return add(a, a); }, {a}), std::invalid_argument);
}

TEST_CASE("backward demands a scalar loss") {
  Tensor a = tensor1d({1.0, 2.0}, true);
  CHECK_THROWS_AS(backward(add(a, a)), std::invalid_argument);
}

TEST_CASE("gradients accumulate until zeroed") {
  Tensor a = tensor1d({2.0}, true);
  Tensor loss = sum(mul(a, a));
  backward(loss);
  CHECK(a.grad()[0] == doctest::Approx(4.0));
  backward(loss);
  CHECK(a.grad()[0] == doctest::Approx(8.0));
  a.zero_grad();
  CHECK(a.grad()[0] == 0.0);
}

TEST_CASE("NoGradGuard suppresses tape construction") {
  Tensor a = tensor1d({1.0, -2.0}, true);
  NoGradGuard guard;
  Tensor out = sum(sigmoid(a));
  CHECK_FALSE(out.requires_grad());
}
