#include "cipherpos/typology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cipherpos/error.hpp"
#include "cipherpos/tsv.hpp"

namespace cipherpos {

std::vector<TypologyVector> parse_wals(const std::vector<std::string>& lines,
                                       int expected_features, const std::string& source) {
  std::vector<TypologyVector> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto fields = tsv::split(line, '\t');
    if (static_cast<int>(fields.size()) != expected_features + 1 || fields[0].empty()) {
      throw InputError(source + ":" + std::to_string(i + 1) + ": expected language and " +
                       std::to_string(expected_features) + " features");
    }
    if (!names.insert(fields[0]).second) {
      throw InputError(source + ": duplicate language '" + fields[0] + "'");
    }
    TypologyVector v;
    v.language = fields[0];
    for (std::size_t f = 1; f < fields.size(); ++f) {
      v.raw.push_back(fields[f].empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : tsv::parse_double(fields[f], "WALS feature"));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<TypologyVector> load_wals(const std::filesystem::path& path, int expected_features) {
  return parse_wals(tsv::read_lines(path), expected_features, path.string());
}

TypologyProjection fit_projection(std::vector<TypologyVector>& vectors, int dims) {
  if (vectors.empty()) throw InputError("no typology vectors");
  const auto width = static_cast<Eigen::Index>(vectors.front().raw.size());
  const auto rows = static_cast<Eigen::Index>(vectors.size());
  if (width == 0) throw InputError("typology vectors have no features");
  for (const auto& v : vectors) {
    if (static_cast<Eigen::Index>(v.raw.size()) != width) {
      throw InputError("typology vectors differ in length");
    }
  }

  TypologyProjection proj;
  proj.mean.assign(static_cast<std::size_t>(width), 0.0);
  for (Eigen::Index f = 0; f < width; ++f) {
    double sum = 0.0;
    int present = 0;
    for (const auto& v : vectors) {
      if (!std::isnan(v.raw[f])) {
        sum += v.raw[f];
        ++present;
      }
    }
    proj.mean[f] = present > 0 ? sum / present : 0.0;
  }

  // Imputed entries sit exactly at the mean, so they centre to zero.
  Eigen::MatrixXd x(rows, width);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index f = 0; f < width; ++f) {
      const double value = vectors[r].raw[f];
      x(r, f) = std::isnan(value) ? 0.0 : value - proj.mean[f];
    }
  }
  const double denom = rows > 1 ? static_cast<double>(rows - 1) : 1.0;
  Eigen::MatrixXd cov = (x.transpose() * x) / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InvariantError("covariance eigendecomposition failed");

  const int kept = std::min<int>(dims, static_cast<int>(width));
  for (int k = 0; k < kept; ++k) {
    // Eigen sorts ascending.
    Eigen::VectorXd axis = solver.eigenvectors().col(width - 1 - k);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    proj.components.emplace_back(axis.data(), axis.data() + width);
    proj.variances.push_back(solver.eigenvalues()(width - 1 - k));
  }

  for (Eigen::Index r = 0; r < rows; ++r) {
    auto& reduced = vectors[r].reduced;
    reduced.assign(static_cast<std::size_t>(dims), 0.0);
    for (int k = 0; k < kept; ++k) {
      double dot = 0.0;
      for (Eigen::Index f = 0; f < width; ++f) dot += x(r, f) * proj.components[k][f];
      reduced[k] = dot;
    }
  }
  return proj;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::pair<std::string, double>> typology_similarity(
    std::vector<TypologyVector>& vectors, const std::string& child,
    TypologyProjection* projection, int dims) {
  if (vectors.size() < 2) throw InputError("typology ranking needs at least two languages");
  auto child_it = std::find_if(vectors.begin(), vectors.end(),
                               [&](const TypologyVector& v) { return v.language == child; });
  if (child_it == vectors.end()) throw InputError("child language '" + child + "' not in WALS data");
  const std::size_t child_index = static_cast<std::size_t>(child_it - vectors.begin());

  auto proj = fit_projection(vectors, dims);
  if (projection != nullptr) *projection = proj;

  std::vector<std::pair<std::string, double>> ranking;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (i == child_index) continue;
    ranking.emplace_back(vectors[i].language,
                         cosine_similarity(vectors[child_index].reduced, vectors[i].reduced));
  }
  std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranking;
}

std::string write_projection(const TypologyProjection& projection) {
  std::string out = "#rows=mean,then one principal axis per row\n";
  std::vector<std::string> cells;
  for (double m : projection.mean) cells.push_back(tsv::format_double(m));
  out += "mean\t" + tsv::join(cells, "\t") + "\n";
  for (std::size_t k = 0; k < projection.components.size(); ++k) {
    cells.clear();
    for (double c : projection.components[k]) cells.push_back(tsv::format_double(c));
    out += "pc" + std::to_string(k + 1) + "\t" + tsv::join(cells, "\t") + "\n";
  }
  return out;
}

}  // namespace cipherpos
