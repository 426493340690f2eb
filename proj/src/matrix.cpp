#include "reslab/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include "reslab/rng.hpp"

namespace reslab {

namespace {

bool entry_is_zero(const cplx& v) { return v.real() == 0.0 && v.imag() == 0.0; }

void check_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag()))
        fail(Errc::NonFinite, "matrix entry (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") is not finite");
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::vector<int>> block_partition(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  UnionFind uf(n);
  for (int r = 0; r < n; ++r)
    for (int c = r + 1; c < n; ++c)
      if (!entry_is_zero(m(r, c)) || !entry_is_zero(m(c, r))) uf.unite(r, c);
  std::vector<std::vector<int>> by_root(n);
  for (int i = 0; i < n; ++i) by_root[uf.find(i)].push_back(i);
  std::vector<std::vector<int>> blocks;
  for (auto& g : by_root)
    if (!g.empty()) blocks.push_back(std::move(g));
  return blocks;
}

Eigen::MatrixXcd extract_block(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXcd b(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) b(r, c) = m(idx[r], idx[c]);
  return b;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& b) {
  if (b.rows() > 64) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
    return svd.singularValues();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
  return svd.singularValues();
}

/// sigma_min of (block - shift I) for one diagonal block of m.
double block_sigma_min(const Eigen::MatrixXcd& m, const std::vector<int>& idx, cplx shift) {
  if (idx.size() == 1) return std::abs(m(idx[0], idx[0]) - shift);
  Eigen::MatrixXcd b = extract_block(m, idx);
  b.diagonal().array() -= shift;
  return singular_values(b).minCoeff();
}

double block_sigma_max(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
  if (idx.size() == 1) return std::abs(m(idx[0], idx[0]));
  return singular_values(extract_block(m, idx)).maxCoeff();
}

}  // namespace

ComplexMatrix::ComplexMatrix(Eigen::MatrixXcd entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols())
    fail(Errc::BadDimension, "matrix must be square and nonempty, got " +
                                 std::to_string(entries.rows()) + "x" +
                                 std::to_string(entries.cols()));
  check_finite(entries);
  auto impl = std::make_shared<Impl>();
  impl->m = std::move(entries);
  impl->blocks = block_partition(impl->m);
  const int n = static_cast<int>(impl->m.rows());
  impl->upper_tri = impl->lower_tri = true;
  for (int r = 0; r < n && (impl->upper_tri || impl->lower_tri); ++r)
    for (int c = 0; c < n; ++c) {
      if (c < r && !entry_is_zero(impl->m(r, c))) impl->upper_tri = false;
      if (c > r && !entry_is_zero(impl->m(r, c))) impl->lower_tri = false;
    }
  double norm = 0.0;
  for (const auto& idx : impl->blocks) norm = std::max(norm, block_sigma_max(impl->m, idx));
  impl->op_norm = norm;
  impl_ = std::move(impl);
}

ComplexMatrix ComplexMatrix::jordan(cplx eigenvalue, int n) {
  if (n < 1) fail(Errc::BadDimension, "jordan block size must be >= 1, got " + std::to_string(n));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = eigenvalue;
    if (i + 1 < n) m(i, i + 1) = 1.0;
  }
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& points) {
  if (points.empty()) fail(Errc::BadDimension, "diagonal matrix needs at least one point");
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = points[i];
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::direct_sum(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int na = a.dim(), nb = b.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(na + nb, na + nb);
  m.topLeftCorner(na, na) = a.data();
  m.bottomRightCorner(nb, nb) = b.data();
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::random_triangular(int n, cplx center, double radius,
                                               std::uint64_t seed) {
  if (n < 1) fail(Errc::BadDimension, "dimension must be >= 1, got " + std::to_string(n));
  if (!(radius > 0.0)) fail(Errc::BadRegion, "spectrum disc radius must be positive");
  Rng rng(seed);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c)
      m(r, c) = (c == r) ? rng.in_disc(center, radius) : rng.in_disc(0.0, radius / 2.0);
  return ComplexMatrix(std::move(m));
}

nlohmann::json ComplexMatrix::to_json() const {
  const int n = dim();
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int r = 0; r < n; ++r) {
    nlohmann::json row_re = nlohmann::json::array(), row_im = nlohmann::json::array();
    for (int c = 0; c < n; ++c) {
      row_re.push_back(impl_->m(r, c).real());
      row_im.push_back(impl_->m(r, c).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  return {{"dim", n}, {"re", std::move(re)}, {"im", std::move(im)}};
}

ComplexMatrix ComplexMatrix::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
    fail(Errc::ParseError, "matrix JSON needs fields dim, re, im");
  if (!j["dim"].is_number_integer()) fail(Errc::ParseError, "matrix dim must be an integer");
  const int n = j["dim"].get<int>();
  if (n < 1) fail(Errc::BadDimension, "matrix dim must be >= 1, got " + std::to_string(n));
  const auto& re = j["re"];
  const auto& im = j["im"];
  if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != n ||
      static_cast<int>(im.size()) != n)
    fail(Errc::BadDimension, "re/im must be dim x dim arrays");
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r) {
    if (!re[r].is_array() || !im[r].is_array() || static_cast<int>(re[r].size()) != n ||
        static_cast<int>(im[r].size()) != n)
      fail(Errc::BadDimension, "re/im must be dim x dim arrays");
    for (int c = 0; c < n; ++c) {
      if (!re[r][c].is_number() || !im[r][c].is_number())
        fail(Errc::ParseError, "matrix entries must be numbers");
      m(r, c) = cplx(re[r][c].get<double>(), im[r][c].get<double>());
    }
  }
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty CSV input");
  auto strip = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  if (strip(line) != "row,col,re,im")
    fail(Errc::ParseError, "CSV header must be row,col,re,im, got '" + strip(line) + "'");
  struct Cell {
    int r, c;
    cplx v;
  };
  std::vector<Cell> cells;
  int max_index = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(fields, tok, ',')) parts.push_back(strip(tok));
    if (parts.size() != 4)
      fail(Errc::ParseError, "CSV line " + std::to_string(line_no) + " needs 4 fields");
    try {
      const int r = std::stoi(parts[0]);
      const int c = std::stoi(parts[1]);
      const double re = std::stod(parts[2]);
      const double im = std::stod(parts[3]);
      if (r < 0 || c < 0)
        fail(Errc::ParseError, "CSV line " + std::to_string(line_no) + ": negative index");
      cells.push_back({r, c, cplx(re, im)});
      max_index = std::max({max_index, r, c});
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(Errc::ParseError, "CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  if (cells.empty()) fail(Errc::ParseError, "CSV contains no matrix entries");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(max_index + 1, max_index + 1);
  for (const auto& cell : cells) m(cell.r, cell.c) = cell.v;
  return ComplexMatrix(std::move(m));
}

int SpectrumResult::total_multiplicity() const {
  int total = 0;
  for (const auto& e : eigenvalues) total += e.multiplicity;
  return total;
}

std::vector<cplx> SpectrumResult::flatten() const {
  std::vector<cplx> out;
  out.reserve(total_multiplicity());
  for (const auto& e : eigenvalues)
    for (int i = 0; i < e.multiplicity; ++i) out.push_back(e.value);
  return out;
}

double min_singular_value(const ComplexMatrix& T) {
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& idx : T.diagonal_blocks())
    smin = std::min(smin, block_sigma_min(T.data(), idx, cplx{0.0, 0.0}));
  return smin;
}

double resolvent_norm(const ComplexMatrix& T, cplx lambda, const Tolerances& tols) {
  double smin = std::numeric_limits<double>::infinity();
  for (const auto& idx : T.diagonal_blocks())
    smin = std::min(smin, block_sigma_min(T.data(), idx, lambda));
  if (smin < tols.sing * (1.0 + T.operator_norm())) {
    std::ostringstream msg;
    msg << "lambda (" << lambda.real() << "," << lambda.imag()
        << ") is within spectral tolerance of the spectrum (sigma_min = " << smin << ")";
    fail(Errc::SpectrumProximity, msg.str());
  }
  return 1.0 / smin;
}

SpectrumResult spectrum(const ComplexMatrix& T, const Tolerances& tols) {
  std::vector<cplx> raw;
  raw.reserve(T.dim());
  const bool exact = T.is_upper_triangular() || T.is_lower_triangular();
  if (exact) {
    for (int i = 0; i < T.dim(); ++i) raw.push_back(T(i, i));
  } else {
    for (const auto& idx : T.diagonal_blocks()) {
      if (idx.size() == 1) {
        raw.push_back(T(idx[0], idx[0]));
        continue;
      }
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(extract_block(T.data(), idx), false);
      if (es.info() != Eigen::Success) fail(Errc::RootFindingFailure, "eigensolver failed");
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        raw.push_back(es.eigenvalues()(i));
    }
  }
  std::sort(raw.begin(), raw.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  // Triangular input clusters only exact duplicates so the reported values
  // stay equal to the diagonal; dense eigenvalues cluster at tols.cluster.
  const double merge_radius = exact ? 0.0 : tols.cluster;
  SpectrumResult result;
  std::vector<cplx> sums;
  for (const cplx& v : raw) {
    int hit = -1;
    for (std::size_t g = 0; g < result.eigenvalues.size(); ++g)
      if (std::abs(v - result.eigenvalues[g].value) <= merge_radius) {
        hit = static_cast<int>(g);
        break;
      }
    if (hit < 0) {
      result.eigenvalues.push_back({v, 1});
      sums.push_back(v);
    } else {
      ++result.eigenvalues[hit].multiplicity;
      sums[hit] += v;
      if (!exact)
        result.eigenvalues[hit].value =
            sums[hit] / static_cast<double>(result.eigenvalues[hit].multiplicity);
    }
  }
  return result;
}

}  // namespace reslab
