#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/ensembles.hpp"

namespace spike {

struct QueryResponse {
  CVector w;
  CVector z;  // adjoint-side response, present in two-side mode only
  bool has_z = false;
};

// Query history with an incrementally maintained orthonormal view. Basis
// columns are real d-vectors spanning the Re/Im parts of every query made so
// far; raw queries and responses are stored untouched alongside. Each
// appended part keeps its coefficients over the basis, so the original
// vectors are recoverable from the orthonormalized view.
class QueryLedger {
 public:
  explicit QueryLedger(std::size_t d);

  void record(const CVector& query, QueryResponse response);

  // Extends the basis so Re(vhat) and Im(vhat) lie in its span. Used for the
  // algorithm's final output vector; not counted as a query round.
  void append_output_query(const CVector& vhat);

  std::size_t dimension() const { return d_; }
  std::size_t rounds() const { return queries_.size(); }
  std::size_t basis_width() const { return basis_.size(); }
  const std::vector<CVector>& queries() const { return queries_; }
  const std::vector<QueryResponse>& responses() const { return responses_; }
  const std::vector<double>& basis_column(std::size_t j) const {
    return basis_[j];
  }
  // Basis width right after round k (1-based).
  std::size_t basis_width_after_round(std::size_t k) const;

  // Copy of the orthonormal basis as a d x width matrix with real entries.
  ComplexMatrix ortho_basis() const;

  // Squared norm of the basis projection of u, over the whole basis or over
  // the prefix recorded up to round k.
  double overlap_potential(const CVector& u) const;
  double overlap_potential_at_round(const CVector& u, std::size_t k) const;

  // Re/Im parts in appending order, rebuilt from stored coefficients.
  std::size_t part_count() const { return coefs_.size(); }
  const std::vector<double>& part_raw(std::size_t j) const {
    return raw_parts_[j];
  }
  std::vector<double> reconstruct_part(std::size_t j) const;

 private:
  void append_part(const std::vector<double>& x);

  std::size_t d_;
  std::vector<CVector> queries_;
  std::vector<QueryResponse> responses_;
  std::vector<std::vector<double>> basis_;
  std::vector<std::vector<double>> raw_parts_;
  std::vector<std::vector<double>> coefs_;
  std::vector<std::size_t> width_after_round_;
};

enum class QueryMode { one_side, two_side };

class TruthGrant;

// Passkey for the evaluation-only truth hook. Only TruthGrant can mint one;
// query algorithms receive a plain oracle reference and have no way to
// construct a key.
class TruthKey {
 private:
  TruthKey() = default;
  friend class TruthGrant;
};

class TruthGrant {
 public:
  static TruthKey key() { return TruthKey{}; }
};

// Matrix-vector oracle over a hidden instance. Responses are raw Mv (and
// M*v in two-side mode); projection belongs to the separate pure helper
// below. Every accepted query is appended to the embedded ledger.
class QueryOracle {
 public:
  QueryOracle(PlantedInstance instance, QueryMode mode, std::size_t budget);
  QueryOracle(ComplexMatrix matrix, QueryMode mode, std::size_t budget);

  QueryResponse query(const CVector& v);

  QueryMode mode() const { return mode_; }
  std::size_t budget() const { return budget_; }
  std::size_t used() const { return used_; }
  std::size_t dimension() const { return instance_.matrix.rows; }
  const QueryLedger& ledger() const { return ledger_; }
  QueryLedger& ledger() { return ledger_; }

  // Evaluation hook, gated by the passkey.
  const PlantedInstance& truth(TruthKey) const { return instance_; }

 private:
  PlantedInstance instance_;
  QueryMode mode_;
  std::size_t budget_;
  std::size_t used_ = 0;
  QueryLedger ledger_;
};

// (w~, z~) = ((I - VV^T)Mv, (I - VV^T)M*v) against the ledger's current
// basis V. Requires v unit and orthogonal to every basis column.
std::pair<CVector, CVector> projected_two_side_responses(
    const QueryLedger& ledger, const CVector& v, const ComplexMatrix& m);

// ||V*u||^2 for an explicit orthonormal-column basis.
double overlap_potential(const ComplexMatrix& basis, const CVector& u);

struct ThresholdSchedule {
  double lambda = 2.0;  // > 1
  double delta = 0.1;   // in (0, 1/e)
  std::size_t d = 2;
  double gap = 0.5;  // in (0, 1/2]; lambda = 1/(1 - gap) via from_gap

  static ThresholdSchedule from_gap(double gap, double delta, std::size_t d);
};

// tau_k = lambda^{4k} * tau_0 with
// tau_0 = 64 lambda^{-2}(lambda-1)^{-2}(ln(1/delta) + 1/ln(lambda)).
double tau_k(const ThresholdSchedule& sched, std::size_t k);

// 64 lambda^{4k-4}(ln(1/delta) + 1/gap)/(d gap^2), k >= 1.
double overlap_bound(const ThresholdSchedule& sched, std::size_t k);

// JSON array with one entry per round:
// {k, query_re, query_im, response_re, response_im, phi, tau_k, bound_k}
// (plus z_re/z_im when the round carries an adjoint-side response). phi is
// the overlap potential of u against the basis as of that round.
std::string ledger_json(const QueryLedger& ledger, const CVector& u,
                        const ThresholdSchedule& sched);

}  // namespace spike
