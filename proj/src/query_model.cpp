#include "spike/query_model.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "spike/errors.hpp"
#include "spike/kernels.hpp"

namespace spike {

namespace {

constexpr double kSkipTol = 1e-10;

double rdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double rnorm(const std::vector<double>& a) { return std::sqrt(rdot(a, a)); }

void check_unit(const CVector& v) {
  if (std::abs(norm2(v) - 1.0) > 1e-8)
    fail("invalid-query", "query vector must be unit norm within 1e-8");
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 0.36787944117144233))
    fail("invalid-delta", "delta must lie in (0, 1/e)");
}

double tau0(double lambda, double delta) {
  const double lm1 = lambda - 1.0;
  return 64.0 / (lambda * lambda * lm1 * lm1) *
         (std::log(1.0 / delta) + 1.0 / std::log(lambda));
}

}  // namespace

QueryLedger::QueryLedger(std::size_t d) : d_(d) {
  if (d == 0) fail("invalid-dimension", "ledger needs d >= 1");
}

void QueryLedger::append_part(const std::vector<double>& x) {
  const double n0 = rnorm(x);
  std::vector<double> c(basis_.size(), 0.0);
  std::vector<double> y = x;
  // Two projection passes keep the basis orthonormal to ~1e-15 even when the
  // new part is nearly dependent on it.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const double a = rdot(basis_[j], y);
      for (std::size_t i = 0; i < d_; ++i) y[i] -= a * basis_[j][i];
      c[j] += a;
    }
  }
  const double n1 = rnorm(y);
  if (n1 > kSkipTol * std::max(1.0, n0)) {
    for (double& v : y) v /= n1;
    basis_.push_back(std::move(y));
    c.push_back(n1);
  }
  raw_parts_.push_back(x);
  coefs_.push_back(std::move(c));
}

void QueryLedger::record(const CVector& query, QueryResponse response) {
  if (query.size() != d_) fail("invalid-dimension", "query has wrong length");
  std::vector<double> re(d_), im(d_);
  for (std::size_t i = 0; i < d_; ++i) {
    re[i] = query[i].real();
    im[i] = query[i].imag();
  }
  append_part(re);
  append_part(im);
  queries_.push_back(query);
  responses_.push_back(std::move(response));
  width_after_round_.push_back(basis_.size());
}

void QueryLedger::append_output_query(const CVector& vhat) {
  if (vhat.size() != d_) fail("invalid-dimension", "output has wrong length");
  check_unit(vhat);
  std::vector<double> re(d_), im(d_);
  for (std::size_t i = 0; i < d_; ++i) {
    re[i] = vhat[i].real();
    im[i] = vhat[i].imag();
  }
  append_part(re);
  append_part(im);
}

std::size_t QueryLedger::basis_width_after_round(std::size_t k) const {
  if (k == 0 || k > width_after_round_.size())
    fail("invalid-index", "round index out of range");
  return width_after_round_[k - 1];
}

ComplexMatrix QueryLedger::ortho_basis() const {
  ComplexMatrix v(d_, basis_.size());
  for (std::size_t j = 0; j < basis_.size(); ++j)
    for (std::size_t i = 0; i < d_; ++i) v(i, j) = basis_[j][i];
  return v;
}

double QueryLedger::overlap_potential(const CVector& u) const {
  double phi = 0.0;
  for (const auto& col : basis_) {
    cdouble ip = 0.0;
    for (std::size_t i = 0; i < d_; ++i) ip += col[i] * u[i];
    phi += std::norm(ip);
  }
  return phi;
}

double QueryLedger::overlap_potential_at_round(const CVector& u,
                                               std::size_t k) const {
  const std::size_t width = basis_width_after_round(k);
  double phi = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    cdouble ip = 0.0;
    for (std::size_t i = 0; i < d_; ++i) ip += basis_[j][i] * u[i];
    phi += std::norm(ip);
  }
  return phi;
}

std::vector<double> QueryLedger::reconstruct_part(std::size_t j) const {
  if (j >= coefs_.size()) fail("invalid-index", "part index out of range");
  std::vector<double> x(d_, 0.0);
  const std::vector<double>& c = coefs_[j];
  for (std::size_t b = 0; b < c.size(); ++b)
    for (std::size_t i = 0; i < d_; ++i) x[i] += c[b] * basis_[b][i];
  return x;
}

QueryOracle::QueryOracle(PlantedInstance instance, QueryMode mode,
                         std::size_t budget)
    : instance_(std::move(instance)),
      mode_(mode),
      budget_(budget),
      ledger_(instance_.matrix.rows) {
  if (!instance_.matrix.square())
    fail("invalid-dimension", "oracle needs a square matrix");
}

QueryOracle::QueryOracle(ComplexMatrix matrix, QueryMode mode,
                         std::size_t budget)
    : QueryOracle(
          [&] {
            PlantedInstance inst;
            inst.spec.d = matrix.rows;
            inst.matrix = std::move(matrix);
            return inst;
          }(),
          mode, budget) {}

QueryResponse QueryOracle::query(const CVector& v) {
  if (v.size() != dimension())
    fail("invalid-dimension", "query has wrong length");
  check_unit(v);
  if (used_ >= budget_)
    fail("query-budget-exceeded",
         "budget of " + std::to_string(budget_) + " queries is exhausted");
  QueryResponse resp;
  resp.w = matvec(instance_.matrix, v);
  if (mode_ == QueryMode::two_side) {
    resp.z = matvec_adj(instance_.matrix, v);
    resp.has_z = true;
  }
  ledger_.record(v, resp);
  ++used_;
  return resp;
}

std::pair<CVector, CVector> projected_two_side_responses(
    const QueryLedger& ledger, const CVector& v, const ComplexMatrix& m) {
  const std::size_t d = ledger.dimension();
  if (v.size() != d || m.rows != d || !m.square())
    fail("invalid-dimension", "dimension mismatch");
  check_unit(v);
  for (std::size_t j = 0; j < ledger.basis_width(); ++j) {
    cdouble ip = 0.0;
    for (std::size_t i = 0; i < d; ++i) ip += ledger.basis_column(j)[i] * v[i];
    if (std::abs(ip) > 1e-8)
      fail("non-orthogonal-query",
           "query must be orthogonal to the prior basis within 1e-8");
  }
  CVector w = matvec(m, v);
  CVector z = matvec_adj(m, v);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < ledger.basis_width(); ++j) {
      const std::vector<double>& q = ledger.basis_column(j);
      cdouble iw = 0.0, iz = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        iw += q[i] * w[i];
        iz += q[i] * z[i];
      }
      for (std::size_t i = 0; i < d; ++i) {
        w[i] -= iw * q[i];
        z[i] -= iz * q[i];
      }
    }
  }
  return {std::move(w), std::move(z)};
}

double overlap_potential(const ComplexMatrix& basis, const CVector& u) {
  if (basis.rows != u.size()) fail("invalid-dimension", "dimension mismatch");
  double phi = 0.0;
  for (std::size_t j = 0; j < basis.cols; ++j) {
    cdouble ip = 0.0;
    for (std::size_t i = 0; i < basis.rows; ++i)
      ip += std::conj(basis(i, j)) * u[i];
    phi += std::norm(ip);
  }
  return phi;
}

ThresholdSchedule ThresholdSchedule::from_gap(double gap, double delta,
                                              std::size_t d) {
  if (!(gap > 0.0) || gap > 0.5)
    fail("invalid-gap", "gap must lie in (0, 1/2]");
  check_delta(delta);
  ThresholdSchedule s;
  s.gap = gap;
  s.delta = delta;
  s.d = d;
  s.lambda = 1.0 / (1.0 - gap);
  return s;
}

double tau_k(const ThresholdSchedule& sched, std::size_t k) {
  check_delta(sched.delta);
  if (!(sched.lambda > 1.0)) fail("invalid-gap", "lambda must exceed 1");
  return std::pow(sched.lambda, 4.0 * static_cast<double>(k)) *
         tau0(sched.lambda, sched.delta);
}

double overlap_bound(const ThresholdSchedule& sched, std::size_t k) {
  if (k == 0) fail("invalid-index", "overlap_bound needs k >= 1");
  check_delta(sched.delta);
  if (!(sched.gap > 0.0) || sched.gap > 0.5 || sched.d == 0)
    fail("invalid-gap", "schedule needs gap in (0, 1/2] and d >= 1");
  const double num =
      64.0 * std::pow(sched.lambda, 4.0 * static_cast<double>(k) - 4.0) *
      (std::log(1.0 / sched.delta) + 1.0 / sched.gap);
  return num / (static_cast<double>(sched.d) * sched.gap * sched.gap);
}

std::string ledger_json(const QueryLedger& ledger, const CVector& u,
                        const ThresholdSchedule& sched) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t k = 1; k <= ledger.rounds(); ++k) {
    const CVector& q = ledger.queries()[k - 1];
    const QueryResponse& r = ledger.responses()[k - 1];
    nlohmann::json entry;
    entry["k"] = k;
    std::vector<double> re, im;
    re.reserve(q.size());
    im.reserve(q.size());
    for (const cdouble& c : q) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    entry["query_re"] = re;
    entry["query_im"] = im;
    re.clear();
    im.clear();
    for (const cdouble& c : r.w) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    entry["response_re"] = re;
    entry["response_im"] = im;
    if (r.has_z) {
      re.clear();
      im.clear();
      for (const cdouble& c : r.z) {
        re.push_back(c.real());
        im.push_back(c.imag());
      }
      entry["z_re"] = re;
      entry["z_im"] = im;
    }
    entry["phi"] = ledger.overlap_potential_at_round(u, k);
    entry["tau_k"] = tau_k(sched, k);
    entry["bound_k"] = overlap_bound(sched, k);
    arr.push_back(std::move(entry));
  }
  return arr.dump();
}

}  // namespace spike
