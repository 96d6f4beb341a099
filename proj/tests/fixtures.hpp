#pragma once

#include <Eigen/Dense>

#include "ck/estimands.hpp"

// Hand-checkable fixtures used across the test suite.
//
// The confounded eight (F8): one binary confounder L, treatment more common
// and outcomes higher when L = 1.  Within each L stratum the treated-control
// gap is exactly 6 except row 3 / row 4, chosen so ATE and ATT differ.
//
//   row  L  A  Y
//    0   0  0   5
//    1   0  0   7
//    2   0  1   9
//    3   0  1  11
//    4   1  0  10
//    5   1  1  16
//    6   1  1  18
//    7   1  1  20
//
// True propensity: e(L=0) = 1/2, e(L=1) = 3/4.  Stratum effects: 4 (L=0,
// averaging 9,11 against 5,7) and 6 (L=1).  Population shares 1/2, 1/2 give
// ATE = ((9+11)/2-(5+7)/2)/2 + ((16+18+20)/3-10)/2 = 2 + 4 = 6; treated
// shares 2/5, 3/5 give ATT = 4*(2/5) + 8*(3/5) = 6.4.
//
// The encouragement eight (FIV): a randomized offer Z, exposure A, outcome Y.
//
//   Z=1 arm: Y = 12, 10, 11, 7   A = 1, 1, 1, 0
//   Z=0 arm: Y = 10,  6,  7, 5   A = 1, 0, 0, 0
//
// Offer-arm mean 10, control-arm mean 7 (effect of offer on Y = 3); exposure
// rates 3/4 and 1/4 (effect of offer on A = 1/2); ratio = 6.

namespace ckt {

inline ck::AnalysisFrame f8_frame() {
  ck::AnalysisFrame frame;
  frame.spec = ck::parse_estimand("ate:a2");
  frame.y.resize(8);
  frame.y << 5, 7, 9, 11, 10, 16, 18, 20;
  frame.a.resize(8);
  frame.a << 0, 0, 1, 1, 0, 1, 1, 1;
  Eigen::VectorXd L(8);
  L << 0, 0, 0, 0, 1, 1, 1, 1;
  frame.confounders.values = L;
  frame.confounders.column_labels = {"L"};
  for (Eigen::Index i = 0; i < 8; ++i) frame.rows.push_back(i);
  return frame;
}

inline Eigen::VectorXd f8_scores() {
  Eigen::VectorXd scores(8);
  scores << 0.5, 0.5, 0.5, 0.5, 0.75, 0.75, 0.75, 0.75;
  return scores;
}

inline ck::AnalysisFrame fiv_frame() {
  ck::AnalysisFrame frame;
  frame.spec = ck::parse_estimand("cace:a2,iv=a1");
  frame.y.resize(8);
  frame.y << 12, 10, 11, 7, 10, 6, 7, 5;
  frame.a.resize(8);
  frame.a << 1, 1, 1, 0, 1, 0, 0, 0;
  frame.z.resize(8);
  frame.z << 1, 1, 1, 1, 0, 0, 0, 0;
  for (Eigen::Index i = 0; i < 8; ++i) frame.rows.push_back(i);
  return frame;
}

}  // namespace ckt
