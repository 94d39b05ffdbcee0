#pragma once

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <initializer_list>

namespace testing_helpers {

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) {
    v(i++) = x;
  }
  return v;
}

inline void expect_near(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                        double tol) {
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LE((a - b).lpNorm<Eigen::Infinity>(), tol)
      << a.transpose() << "\n vs \n"
      << b.transpose();
}

} // namespace testing_helpers
