#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "qrna/structure.hpp"

namespace qrna {

// Exact base-pair confusion counts. The negative universe is every unordered
// index pair, so tp+fp+fn+tn == n(n-1)/2.
struct Confusion {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;
};

// Pairs must match exactly; a stem shifted by one base scores nothing.
// Throws LengthMismatchError unless pred.n == truth.n.
Confusion confusion(const SecondaryStructure& pred, const SecondaryStructure& truth);

// Matthews correlation coefficient in [-1, 1]; 0 when any denominator factor
// vanishes (the degenerate confusions score like random predictions).
double mcc(const Confusion& c);

struct KsResult {
  double d = 0;  // sup_x |F_a(x) - F_b(x)|
  double p = 1;  // asymptotic Kolmogorov tail at sqrt(na*nb/(na+nb)) * d
};

// Two-sample Kolmogorov-Smirnov statistic. Throws EmptySampleError.
KsResult ks_2sample(std::span<const double> a, std::span<const double> b);

// Rejection threshold for D at significance alpha (0.05 or 0.01 supported).
double ks_critical_d(double alpha, size_t na, size_t nb);

// One report row: id, model, pseudoknotted flag, tp, fp, fn, tn, mcc.
std::string score_row(const std::string& id, int model, bool pseudoknotted, const Confusion& c);
std::string score_header();

}  // namespace qrna
