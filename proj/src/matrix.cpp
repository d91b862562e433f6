#include "pathvar/matrix.hpp"

#include <cassert>

#include "pathvar/errors.hpp"

namespace pathvar {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rws) {
  Matrix m;
  m.rows = rws.size();
  m.cols = rws.empty() ? 0 : rws.front().size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rws) {
    if (r.size() != m.cols) throw DimensionError("ragged matrix rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = row(i);
    out[i].assign(r.begin(), r.end());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace pathvar
