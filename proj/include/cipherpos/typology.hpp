#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cipherpos {

inline constexpr int kWalsFeatures = 102;
inline constexpr int kReducedDims = 50;

// Typological feature vector of one language. Missing raw features are NaN.
struct TypologyVector {
  std::string language;
  std::vector<double> raw;
  std::vector<double> reduced;
};

// Mean and principal axes (rows, unit length, largest-magnitude coordinate
// positive) fitted over a set of languages.
struct TypologyProjection {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;
  std::vector<double> variances;
};

// WALS file: `language<TAB>f1<TAB>...<TAB>fN`, empty cell = missing.
std::vector<TypologyVector> parse_wals(const std::vector<std::string>& lines,
                                       int expected_features = kWalsFeatures,
                                       const std::string& source = "<memory>");
std::vector<TypologyVector> load_wals(const std::filesystem::path& path,
                                      int expected_features = kWalsFeatures);

// Fits a mean-imputed, mean-centred PCA and fills `reduced` for every vector
// (padded with zeros when fewer than `dims` axes exist).
TypologyProjection fit_projection(std::vector<TypologyVector>& vectors, int dims = kReducedDims);

// Parents ranked by cosine similarity to `child` in the reduced space
// (descending, ties by name). Fills `reduced` as a side effect.
std::vector<std::pair<std::string, double>> typology_similarity(
    std::vector<TypologyVector>& vectors, const std::string& child,
    TypologyProjection* projection = nullptr, int dims = kReducedDims);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

std::string write_projection(const TypologyProjection& projection);

}  // namespace cipherpos
