#include <cmath>
#include <limits>

#include "doctest.h"
#include "advattr/tensor.hpp"

using namespace advattr;

TEST_CASE("tensor data length must match the shape") {
  CHECK_THROWS_AS(Tensor({2, 3}, Vec(5, 0.0)), ShapeError);
  const Tensor t({2, 3}, Vec{1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t[4] == 5.0);
}

TEST_CASE("non-finite values are rejected") {
  CHECK_THROWS_AS(Tensor::vector({1.0, std::numeric_limits<double>::quiet_NaN()}), NumericError);
  CHECK_THROWS_AS(Tensor::scalar(std::numeric_limits<double>::infinity()), NumericError);
}

TEST_CASE("factories") {
  CHECK(Tensor::scalar(2.5).is_scalar());
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK(Tensor::zeros({3, 2}).shape() == std::vector<std::size_t>{3, 2});
  CHECK(Tensor::matrix(2, 2, {1, 0, 0, 1}) == Tensor({2, 2}, Vec{1, 0, 0, 1}));
  CHECK_THROWS(Tensor::vector({1, 2}).item());
  CHECK(shape_string({3, 4}) == "[3,4]");
}
