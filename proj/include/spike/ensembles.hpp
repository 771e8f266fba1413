#pragma once

#include <string>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/rng.hpp"

namespace spike {

enum class EntryLaw { real_gaussian, complex_gaussian, rademacher, uniform_symmetric };
enum class Shape { hermitian_spike, one_side_rank1, two_side_rank1 };
enum class Field { real, complex };

std::string to_string(EntryLaw law);
std::string to_string(Shape shape);
std::string to_string(Field field);
EntryLaw entry_law_from_string(const std::string& s);
Shape shape_from_string(const std::string& s);
Field field_from_string(const std::string& s);

struct StiefelFrame {
  std::size_t d = 0;
  std::size_t r = 0;
  ComplexMatrix columns;  // d x r; U*U = I_r within 1e-12
};

// Recipe for one planted instance. `field` is the field of the hidden
// frame(s); `entry_law` is the law of the noise entries.
struct DeformedSpec {
  std::size_t d = 0;
  std::size_t r = 1;
  std::vector<cdouble> lambdas;  // |l_1| >= ... >= |l_r| > 1
  EntryLaw entry_law = EntryLaw::real_gaussian;
  Shape shape = Shape::hermitian_spike;
  Field field = Field::real;
  Seed seed;
};

struct PlantedInstance {
  ComplexMatrix matrix;      // W/sqrt(d) + perturbation
  StiefelFrame truth;        // U, u, or u_l
  StiefelFrame truth_right;  // u_r for two-side; copy of truth otherwise
  DeformedSpec spec;
};

// One draw from `law`: mean 0, unit variance (modulus-squared for the
// complex law); real laws have zero imaginary part.
cdouble sample_entry(EntryLaw law, Rng& rng);

ComplexMatrix sample_iid(std::size_t d, EntryLaw law, Seed seed);
ComplexMatrix sample_goe(std::size_t d, Seed seed);
ComplexMatrix sample_ginoe(std::size_t d, Seed seed);
ComplexMatrix sample_cginoe(std::size_t d, Seed seed);

// Haar frame via Gaussian QR; each column of Q is multiplied by the
// conjugate phase of the matching R diagonal, making the law exactly Haar.
StiefelFrame sample_stiefel(std::size_t d, std::size_t r, Field field, Seed seed);

// The W/sqrt(d) half of build_planted(spec), from the same seed.
ComplexMatrix sample_noise(const DeformedSpec& spec);
// The low-rank half, rebuilt from hidden frames.
ComplexMatrix perturbation_matrix(const DeformedSpec& spec,
                                  const StiefelFrame& left,
                                  const StiefelFrame& right);
PlantedInstance build_planted(const DeformedSpec& spec);

}  // namespace spike
