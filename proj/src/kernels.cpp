#include "mpca/kernels.hpp"

#include <exception>
#include <string>

#include "mpca/error.hpp"

namespace mpca::kernels {

namespace {

// Runs fn(i) for i in [0, n) under OpenMP. The exception thrown by the
// lowest failing index is rethrown after the loop.
template <class Fn>
void parallel_for(Index n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Fixed-shape chunked sum of per-observation contributions into a dim×dim matrix.
template <class AddFn>
Matrix chunked_sum(Index T, Index dim, AddFn&& add) {
  const Index chunks = (T + kReductionChunk - 1) / kReductionChunk;
  std::vector<Matrix> partials(static_cast<std::size_t>(chunks));
  parallel_for(chunks, [&](Index c) {
    Matrix acc = Matrix::Zero(dim, dim);
    const Index end = std::min(T, (c + 1) * kReductionChunk);
    for (Index t = c * kReductionChunk; t < end; ++t) add(t, acc);
    partials[static_cast<std::size_t>(c)] = std::move(acc);
  });
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& part : partials) total += part;
  return total;
}

void check_leading(const Matrix& b, Index r) {
  if (r < 1 || r > b.cols()) {
    throw DimensionError("requested " + std::to_string(r) + " leading columns of a basis with " +
                         std::to_string(b.cols()));
  }
}

void check_projection_basis(const ObservationSet& x, const Matrix& basis, Side side) {
  const Index expected = side == Side::left ? x.q() : x.p();
  if (side == Side::both) throw ContractError("projection side must be left or right");
  if (basis.rows() != expected) {
    throw DimensionError("projection basis has " + std::to_string(basis.rows()) +
                         " rows, expected " + std::to_string(expected));
  }
}

ObservationSpectrum spectrum_of(const Matrix& x, Index k) {
  auto svd = top_singvecs(x, k, Side::both);
  return {std::move(svd.values), svd.left->matrix(), svd.right->matrix()};
}

Index clamp_k(const ObservationSet& x, Index k) {
  const Index r = std::min(x.p(), x.q());
  if (k < 1) throw DimensionError("observation_spectra: k must be at least 1");
  return std::min(k, r);
}

Matrix projected_vectors_one(const Matrix& x, const Matrix& basis, Index r, Side side) {
  const Matrix y = side == Side::left ? Matrix(x * basis) : Matrix(x.transpose() * basis);
  return top_singvecs(y, r, Side::left).left->matrix();
}

}  // namespace

ObservationSpectra observation_spectra(const ObservationSet& x, Index k) {
  k = clamp_k(x, k);
  std::vector<ObservationSpectrum> items(static_cast<std::size_t>(x.T()));
  parallel_for(x.T(), [&](Index t) { items[static_cast<std::size_t>(t)] = spectrum_of(x[t], k); });
  return ObservationSpectra(std::move(items), x.p(), x.q(), k);
}

Matrix average_projector(std::span<const Matrix> bases, Index r) {
  if (bases.empty()) throw InputError("average_projector: no bases");
  const Index dim = bases.front().rows();
  for (const auto& b : bases) {
    if (b.rows() != dim) throw DimensionError("average_projector: bases differ in dimension");
    check_leading(b, r);
  }
  const auto T = static_cast<Index>(bases.size());
  Matrix sum = chunked_sum(T, dim, [&](Index t, Matrix& acc) {
    const auto lead = bases[static_cast<std::size_t>(t)].leftCols(r);
    acc.noalias() += lead * lead.transpose();
  });
  return sum / static_cast<double>(T);
}

Matrix average_spectral_projector(const ObservationSpectra& s, Side side, Index r) {
  if (side == Side::both) throw ContractError("average_spectral_projector: side must be left or right");
  if (s.T() < 1) throw InputError("average_spectral_projector: no observations");
  if (r < 1 || r > s.k()) {
    throw DimensionError("average_spectral_projector: r=" + std::to_string(r) +
                         " exceeds stored vectors k=" + std::to_string(s.k()));
  }
  const Index dim = side == Side::left ? s.p() : s.q();
  Matrix sum = chunked_sum(s.T(), dim, [&](Index t, Matrix& acc) {
    const Matrix& b = side == Side::left ? s[t].left : s[t].right;
    const auto lead = b.leftCols(r);
    acc.noalias() += lead * lead.transpose();
  });
  return sum / static_cast<double>(s.T());
}

std::vector<Matrix> projected_leading_vectors(const ObservationSet& x, const Matrix& basis,
                                              Index r, Side side) {
  check_projection_basis(x, basis, side);
  std::vector<Matrix> out(static_cast<std::size_t>(x.T()));
  parallel_for(x.T(), [&](Index t) {
    out[static_cast<std::size_t>(t)] = projected_vectors_one(x[t], basis, r, side);
  });
  return out;
}

Matrix gram_average(const ObservationSet& x, Side side) {
  if (side == Side::both) throw ContractError("gram_average: side must be left or right");
  const Index dim = side == Side::left ? x.p() : x.q();
  Matrix sum = chunked_sum(x.T(), dim, [&](Index t, Matrix& acc) {
    if (side == Side::left) {
      acc.noalias() += x[t] * x[t].transpose();
    } else {
      acc.noalias() += x[t].transpose() * x[t];
    }
  });
  return sum / static_cast<double>(x.T());
}

Matrix projected_covariance(const ObservationSet& x, const Matrix& basis, Side side) {
  check_projection_basis(x, basis, side);
  const Index dim = side == Side::left ? x.p() : x.q();
  Matrix sum = chunked_sum(x.T(), dim, [&](Index t, Matrix& acc) {
    const Matrix y = side == Side::left ? Matrix(x[t] * basis) : Matrix(x[t].transpose() * basis);
    acc.noalias() += y * y.transpose();
  });
  return sum / static_cast<double>(x.T() * basis.rows());
}

Matrix leading_left_vectors_thin(const Matrix& y, Index r) {
  return top_singvecs(y, r, Side::left).left->matrix();
}

namespace reference {

ObservationSpectra observation_spectra(const ObservationSet& x, Index k) {
  k = clamp_k(x, k);
  std::vector<ObservationSpectrum> items;
  items.reserve(static_cast<std::size_t>(x.T()));
  for (Index t = 0; t < x.T(); ++t) items.push_back(spectrum_of(x[t], k));
  return ObservationSpectra(std::move(items), x.p(), x.q(), k);
}

Matrix average_projector(std::span<const Matrix> bases, Index r) {
  if (bases.empty()) throw InputError("average_projector: no bases");
  const Index dim = bases.front().rows();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& b : bases) {
    check_leading(b, r);
    sum += b.leftCols(r) * b.leftCols(r).transpose();
  }
  return sum / static_cast<double>(bases.size());
}

std::vector<Matrix> projected_leading_vectors(const ObservationSet& x, const Matrix& basis,
                                              Index r, Side side) {
  check_projection_basis(x, basis, side);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(x.T()));
  for (Index t = 0; t < x.T(); ++t) out.push_back(projected_vectors_one(x[t], basis, r, side));
  return out;
}

Matrix gram_average(const ObservationSet& x, Side side) {
  if (side == Side::both) throw ContractError("gram_average: side must be left or right");
  const Index dim = side == Side::left ? x.p() : x.q();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& m : x.matrices()) {
    sum += side == Side::left ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  }
  return sum / static_cast<double>(x.T());
}

Matrix projected_covariance(const ObservationSet& x, const Matrix& basis, Side side) {
  check_projection_basis(x, basis, side);
  const Index dim = side == Side::left ? x.p() : x.q();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& m : x.matrices()) {
    const Matrix y = side == Side::left ? Matrix(m * basis) : Matrix(m.transpose() * basis);
    sum += y * y.transpose();
  }
  return sum / static_cast<double>(x.T() * basis.rows());
}

}  // namespace reference

}  // namespace mpca::kernels
