#include "spike/ensembles.hpp"

#include <cmath>

#include "spike/linalg.hpp"

namespace spike {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kSqrt3 = 1.7320508075688772;

// Frame draws in build_planted start here so they never overlap the noise
// draws (blocks from 0) of the same (value, stream).
constexpr std::uint64_t kFrameBlock = std::uint64_t{1} << 32;

StiefelFrame stiefel_from(Rng& rng, std::size_t d, std::size_t r, Field field) {
  ComplexMatrix g(d, r);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < r; ++j)
      g(i, j) = sample_entry(field == Field::real ? EntryLaw::real_gaussian
                                                  : EntryLaw::complex_gaussian,
                             rng);
  ThinQR qr = qr_thin(g);
  for (std::size_t j = 0; j < r; ++j) {
    const cdouble rjj = qr.r(j, j);
    const double m = std::abs(rjj);
    const cdouble ph = m == 0.0 ? cdouble(1.0) : std::conj(rjj / m);
    for (std::size_t i = 0; i < d; ++i) qr.q(i, j) *= ph;
  }
  return StiefelFrame{d, r, std::move(qr.q)};
}

void check_dim(std::size_t d) {
  if (d == 0) fail("invalid-dimension", "dimension must be positive");
}

}  // namespace

std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::real_gaussian: return "real-gaussian";
    case EntryLaw::complex_gaussian: return "complex-gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform_symmetric: return "uniform-symmetric";
  }
  fail("invalid-entry-law", "unknown entry law");
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::hermitian_spike: return "hermitian-spike";
    case Shape::one_side_rank1: return "one-side-rank1";
    case Shape::two_side_rank1: return "two-side-rank1";
  }
  fail("invalid-shape", "unknown shape");
}

std::string to_string(Field field) {
  return field == Field::real ? "real" : "complex";
}

EntryLaw entry_law_from_string(const std::string& s) {
  if (s == "real-gaussian") return EntryLaw::real_gaussian;
  if (s == "complex-gaussian") return EntryLaw::complex_gaussian;
  if (s == "rademacher") return EntryLaw::rademacher;
  if (s == "uniform-symmetric") return EntryLaw::uniform_symmetric;
  fail("invalid-entry-law", "unknown entry law: " + s);
}

Shape shape_from_string(const std::string& s) {
  if (s == "hermitian-spike") return Shape::hermitian_spike;
  if (s == "one-side-rank1") return Shape::one_side_rank1;
  if (s == "two-side-rank1") return Shape::two_side_rank1;
  fail("invalid-shape", "unknown shape: " + s);
}

Field field_from_string(const std::string& s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  fail("invalid-field", "unknown field: " + s);
}

cdouble sample_entry(EntryLaw law, Rng& rng) {
  switch (law) {
    case EntryLaw::real_gaussian:
      return cdouble(rng.gaussian(), 0.0);
    case EntryLaw::complex_gaussian: {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      return cdouble(re * kInvSqrt2, im * kInvSqrt2);
    }
    case EntryLaw::rademacher:
      return cdouble((rng.next_u32() & 1u) ? 1.0 : -1.0, 0.0);
    case EntryLaw::uniform_symmetric:
      return cdouble((2.0 * rng.uniform() - 1.0) * kSqrt3, 0.0);
  }
  fail("invalid-entry-law", "unknown entry law");
}

ComplexMatrix sample_iid(std::size_t d, EntryLaw law, Seed seed) {
  check_dim(d);
  Rng rng(seed);
  ComplexMatrix w(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) w(i, j) = sample_entry(law, rng);
  return w;
}

ComplexMatrix sample_goe(std::size_t d, Seed seed) {
  check_dim(d);
  Rng rng(seed);
  const double off = std::sqrt(1.0 / static_cast<double>(d));
  const double diag = std::sqrt(2.0 / static_cast<double>(d));
  ComplexMatrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double g = rng.gaussian() * (i == j ? diag : off);
      a(i, j) = g;
      a(j, i) = g;
    }
  return a;
}

ComplexMatrix sample_ginoe(std::size_t d, Seed seed) {
  check_dim(d);
  Rng rng(seed);
  const double s = std::sqrt(1.0 / static_cast<double>(d));
  ComplexMatrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.gaussian() * s;
  return a;
}

ComplexMatrix sample_cginoe(std::size_t d, Seed seed) {
  check_dim(d);
  Rng rng(seed);
  const double s = std::sqrt(1.0 / (2.0 * static_cast<double>(d)));
  ComplexMatrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      a(i, j) = cdouble(re * s, im * s);
    }
  return a;
}

StiefelFrame sample_stiefel(std::size_t d, std::size_t r, Field field, Seed seed) {
  check_dim(d);
  if (r < 1 || r > d) fail("invalid-dimension", "stiefel needs 1 <= r <= d");
  Rng rng(seed);
  return stiefel_from(rng, d, r, field);
}

ComplexMatrix sample_noise(const DeformedSpec& spec) {
  check_dim(spec.d);
  ComplexMatrix w = sample_iid(spec.d, spec.entry_law, spec.seed);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(spec.d));
  for (cdouble& z : w.data) z *= inv_sqrt_d;
  return w;
}

ComplexMatrix perturbation_matrix(const DeformedSpec& spec,
                                  const StiefelFrame& left,
                                  const StiefelFrame& right) {
  const std::size_t d = spec.d, r = spec.r;
  ComplexMatrix p(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      cdouble s = 0.0;
      for (std::size_t k = 0; k < r; ++k)
        s += spec.lambdas[k] * left.columns(i, k) * std::conj(right.columns(j, k));
      p(i, j) = s;
    }
  return p;
}

PlantedInstance build_planted(const DeformedSpec& spec) {
  check_dim(spec.d);
  if (spec.r < 1) fail("invalid-dimension", "rank must be at least 1");
  if (spec.d < 2 * spec.r) fail("invalid-dimension", "spec requires d >= 2r");
  if (spec.lambdas.size() != spec.r)
    fail("invalid-dimension", "lambdas size must equal r");
  for (std::size_t k = 1; k < spec.r; ++k)
    if (std::abs(spec.lambdas[k]) > std::abs(spec.lambdas[k - 1]))
      fail("invalid-spike-order", "lambdas must have non-increasing modulus");
  if (spec.shape == Shape::hermitian_spike) {
    if (std::abs(spec.lambdas[spec.r - 1]) <= 1.0)
      fail("invalid-spike-strength", "hermitian spike needs |lambda_r| > 1");
  } else {
    if (spec.r != 1)
      fail("invalid-dimension", "rank-1 planted shapes need r = 1");
    if (spec.lambdas[0].imag() != 0.0 || spec.lambdas[0].real() <= 1.0)
      fail("invalid-spike-strength", "planted rank-1 needs real lambda > 1");
  }

  PlantedInstance inst;
  inst.spec = spec;

  Rng frame_rng(spec.seed, kFrameBlock);
  inst.truth = stiefel_from(frame_rng, spec.d,
                            spec.shape == Shape::hermitian_spike ? spec.r : 1,
                            spec.field);
  if (spec.shape == Shape::two_side_rank1)
    inst.truth_right = stiefel_from(frame_rng, spec.d, 1, spec.field);
  else
    inst.truth_right = inst.truth;

  inst.matrix = sample_noise(spec);
  const ComplexMatrix pert = perturbation_matrix(spec, inst.truth, inst.truth_right);
  for (std::size_t i = 0; i < inst.matrix.data.size(); ++i)
    inst.matrix.data[i] += pert.data[i];
  return inst;
}

}  // namespace spike
