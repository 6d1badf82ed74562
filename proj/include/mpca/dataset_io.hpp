#pragma once

// Plain-text interchange format for observation sequences.
//
//   T,p,q
//   <blank line>
//   p lines of q values      (observation 1)
//   <blank line>
//   ...
//
// Values are printed with the shortest decimal that round-trips to the same
// double, so write followed by read is bit-exact. Lines starting with '#' are
// comments. The reader accepts ',', ';', tab or space as the delimiter.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mpca/model.hpp"

namespace mpca {

/// Shortest round-trip decimal representation ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);
/// Parses a full token as a double; throws InputError on trailing garbage.
double parse_double(std::string_view token);

void write_dataset(std::ostream& os, const ObservationSet& x, char delimiter = ',');
ObservationSet read_dataset(std::istream& is);

/// File wrappers; I/O failures raise IoError.
void save_dataset(const std::filesystem::path& path, const ObservationSet& x,
                  char delimiter = ',');
ObservationSet load_dataset(const std::filesystem::path& path);

/// Ground truth (loadings, factors, common components) as JSON.
void save_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_truth(const std::filesystem::path& path);

/// Fitted loadings and factor scores as JSON.
void save_fit(const std::filesystem::path& path, const FactorModelFit& fit);

}  // namespace mpca
