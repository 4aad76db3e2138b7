#include <vector>

#include "doctest.h"
#include "scnn/error.hpp"
#include "scnn/tensor.hpp"

using scnn::Tensor;

TEST_SUITE("tensor") {

TEST_CASE("construction validates shape against data") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.shape().size() == 2);
  CHECK(t.shape()[0] == 2);
  CHECK(t.shape()[1] == 3);

  CHECK_THROWS_AS(Tensor({2, 3}, {1, 2, 3}), scnn::ShapeError);
  CHECK_THROWS_AS(Tensor({2, 0}, {}), scnn::ShapeError);
}

TEST_CASE("factories produce the expected ranks") {
  Tensor v = Tensor::vector({7, 8, 9, 10});
  CHECK(v.rank() == 1);
  CHECK(v.size() == 4);
  CHECK(v[3] == 10);

  Tensor m = Tensor::matrix(3, 5, std::vector<double>(15, 0.5));
  CHECK(m.rank() == 2);
  CHECK(m.dim(0) == 3);
  CHECK(m.dim(1) == 5);
  CHECK(m.size() == 15);
  CHECK(m.at(2, 4) == 0.5);
  CHECK_THROWS_AS(Tensor::matrix(3, 5, {1, 2}), scnn::ShapeError);

  Tensor empty;  // default: rank 0, no elements
  CHECK(empty.rank() == 0);
  CHECK(empty.size() == 0);
}

TEST_CASE("matrix indexing is row-major") {
  Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 2) == 3);
  CHECK(m.at(1, 0) == 4);
  CHECK(m.at(1, 2) == 6);
  m.at(1, 1) = 50;
  CHECK(m[4] == 50);
}

TEST_CASE("reshaped copies data and validates the new size") {
  Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor r = m.reshaped({3, 2});
  CHECK(r.shape()[0] == 3);
  CHECK(r.shape()[1] == 2);
  CHECK(r.at(2, 1) == 6);
  r.at(0, 0) = 99;
  CHECK(m.at(0, 0) == 1);  // deep copy, not a view

  CHECK_THROWS_AS(m.reshaped({4, 2}), scnn::ShapeError);
}

TEST_CASE("gradient storage is lazy and zeroable") {
  Tensor t({3}, {1, 2, 3});
  CHECK_FALSE(t.has_grad());
  t.ensure_grad();
  REQUIRE(t.has_grad());
  for (const double g : t.grad_values()) CHECK(g == 0.0);

  t.grad()[1] = 7.5;
  t.zero_grad();
  CHECK(t.grad_values()[1] == 0.0);

  // ensure_grad must not clobber existing gradient contents
  t.grad()[2] = 3.25;
  t.ensure_grad();
  CHECK(t.grad_values()[2] == 3.25);
}

TEST_CASE("fill overwrites every element") {
  Tensor t({2, 2});
  t.fill(4.5);
  for (const double x : t.values()) CHECK(x == 4.5);
}

TEST_CASE("shape_str and require_rank report usable diagnostics") {
  Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(m.shape_str() == "[2,3]");

  CHECK_NOTHROW(scnn::require_rank(m, 2, "test"));
  CHECK_THROWS_AS(scnn::require_rank(m, 1, "test"), scnn::ShapeError);
  try {
    scnn::require_rank(m, 1, "widget");
    FAIL("expected ShapeError");
  } catch (const scnn::ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("widget") != std::string::npos);
    CHECK(msg.find("[2,3]") != std::string::npos);
  }
}

}  // TEST_SUITE
