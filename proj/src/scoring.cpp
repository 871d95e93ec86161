#include "qrna/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "qrna/errors.hpp"

namespace qrna {

Confusion confusion(const SecondaryStructure& pred, const SecondaryStructure& truth) {
  if (pred.n != truth.n)
    throw LengthMismatchError("prediction is over " + std::to_string(pred.n) +
                              " bases, truth over " + std::to_string(truth.n));
  Confusion c;
  for (const auto& pair : pred.pairs)
    truth.pairs.count(pair) ? ++c.tp : ++c.fp;
  c.fn = static_cast<int64_t>(truth.pairs.size()) - c.tp;
  const int64_t n = truth.n;
  c.tn = n * (n - 1) / 2 - c.tp - c.fp - c.fn;
  return c;
}

double mcc(const Confusion& c) {
  const double f1 = static_cast<double>(c.tp + c.fp);
  const double f2 = static_cast<double>(c.tp + c.fn);
  const double f3 = static_cast<double>(c.tn + c.fp);
  const double f4 = static_cast<double>(c.tn + c.fn);
  if (f1 == 0 || f2 == 0 || f3 == 0 || f4 == 0) return 0.0;
  const double numerator =
      static_cast<double>(c.tp) * static_cast<double>(c.tn) -
      static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return numerator / std::sqrt(f1 * f2 * f3 * f4);
}

namespace {

// Upper tail of the Kolmogorov distribution, Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_q(double lambda) {
  if (lambda < 1e-9) return 1.0;
  double sum = 0;
  double sign = 1;
  for (int j = 1; j <= 1000; ++j) {
    const double term = sign * 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_2sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySampleError("KS test needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < sa.size() || j < sb.size()) {
    const double x = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }

  KsResult result;
  result.d = d;
  const double effective = na * nb / (na + nb);
  result.p = kolmogorov_q(std::sqrt(effective) * d);
  return result;
}

double ks_critical_d(double alpha, size_t na, size_t nb) {
  double c;
  if (alpha == 0.05) {
    c = 1.358;
  } else if (alpha == 0.01) {
    c = 1.628;
  } else {
    throw DomainError("tabulated significance levels are 0.05 and 0.01");
  }
  const double inv = (static_cast<double>(na) + nb) / (static_cast<double>(na) * nb);
  return c * std::sqrt(inv);
}

std::string score_header() { return "id\tmodel\tpseudoknotted\ttp\tfp\tfn\ttn\tmcc"; }

std::string score_row(const std::string& id, int model, bool pseudoknotted, const Confusion& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s\t%d\t%s\t%lld\t%lld\t%lld\t%lld\t%.6f", id.c_str(), model,
                pseudoknotted ? "true" : "false", static_cast<long long>(c.tp),
                static_cast<long long>(c.fp), static_cast<long long>(c.fn),
                static_cast<long long>(c.tn), mcc(c));
  return buf;
}

}  // namespace qrna
