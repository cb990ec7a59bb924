#include "qfals/dilation.hpp"

#include <cmath>
#include <string>

#include "qfals/error.hpp"

namespace qfals {

ComplexVector double_ket(const ComplexMatrix& m) {
  ComplexVector v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
  }
  return v;
}

ComplexMatrix from_double_ket(const ComplexVector& v, std::size_t rows,
                              std::size_t cols) {
  const auto nr = static_cast<Eigen::Index>(rows);
  const auto nc = static_cast<Eigen::Index>(cols);
  if (v.size() != nr * nc) {
    fail(ErrorKind::DimensionMismatch, "from_double_ket: length " +
                                           std::to_string(v.size()) + " != " +
                                           std::to_string(rows) + "*" +
                                           std::to_string(cols));
  }
  ComplexMatrix m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = v(r * nc + c);
  }
  return m;
}

State max_entangled_from_isometry(const ComplexMatrix& v, double tol) {
  require_finite(v, "max_entangled_from_isometry");
  if (v.rows() < v.cols()) {
    fail(ErrorKind::NotIsometry, "max_entangled_from_isometry: need d_A >= d_B");
  }
  const auto db = v.cols();
  if ((v.adjoint() * v - ComplexMatrix::Identity(db, db)).norm() > tol) {
    fail(ErrorKind::NotIsometry, "max_entangled_from_isometry: V^dagger V != I");
  }
  const ComplexVector k = double_ket(v);
  const System ab{"AB", static_cast<std::size_t>(v.rows() * db)};
  return State(ab, hermitian_part(k * k.adjoint()) / static_cast<double>(db));
}

ComplexMatrix isometry_from_max_entangled(const State& s, std::size_t dim_a,
                                          std::size_t dim_b, double tol) {
  if (s.system().dim != dim_a * dim_b) {
    fail(ErrorKind::DimensionMismatch, "isometry_from_max_entangled: state dim != d_A*d_B");
  }
  if (dim_a < dim_b) {
    fail(ErrorKind::InvalidArgument, "isometry_from_max_entangled: need d_A >= d_B");
  }
  const auto e = eig_hermitian(s.matrix());
  const double top = e.values.front();
  if (top <= tol || (e.values.size() > 1 && e.values[1] > tol * std::max(top, 1.0))) {
    fail(ErrorKind::NotRank1, "isometry_from_max_entangled: state is not rank one");
  }
  const std::size_t dims[] = {dim_a, dim_b};
  const std::size_t keep_b[] = {1};
  const ComplexMatrix marginal = partial_trace(s.matrix(), dims, keep_b);
  const ComplexMatrix mixed =
      identity(dim_b) * (s.trace() / static_cast<double>(dim_b));
  if ((marginal - mixed).norm() > tol * std::max(1.0, s.trace()) * 10.0) {
    fail(ErrorKind::NotMaxEntangled,
         "isometry_from_max_entangled: marginal on B is not maximally mixed");
  }
  ComplexMatrix v = from_double_ket(e.vectors.col(0), dim_a, dim_b) *
                    std::sqrt(static_cast<double>(dim_b));
  canonicalize_phase(v);
  return v;
}

PurificationResult purify(const State& rho, std::optional<std::size_t> env_dim,
                          std::optional<ComplexMatrix> isometry, Tolerance tol) {
  if (!rho.is_deterministic(tol)) {
    fail(ErrorKind::InvalidArgument, "purify: state must have unit trace");
  }
  const std::size_t da = rho.system().dim;
  const auto eig = eig_hermitian(rho.matrix());
  std::size_t rank = 0;
  for (double v : eig.values) {
    if (v > tol.value) ++rank;
  }
  const std::size_t de = env_dim.value_or(da);
  if (de < rank) {
    fail(ErrorKind::RankExceedsEnvironment,
         "purify: environment dim " + std::to_string(de) + " < rank " +
             std::to_string(rank));
  }
  const auto nde = static_cast<Eigen::Index>(de);
  const auto nda = static_cast<Eigen::Index>(da);

  ComplexMatrix w;
  if (isometry) {
    w = *isometry;
    if (w.rows() != nde || w.cols() != nda ||
        (w.adjoint() * w - identity(da)).norm() > 1e-10) {
      fail(ErrorKind::NotIsometry, "purify: supplied W is not an isometry A -> E");
    }
  } else if (de >= da) {
    w = ComplexMatrix::Identity(nde, nda);
  } else {
    // Isometric on Supp rho only: conj(v_k) -> |k>.
    w = ComplexMatrix::Zero(nde, nda);
    for (std::size_t k = 0; k < rank; ++k) {
      w.row(static_cast<Eigen::Index>(k)) =
          eig.vectors.col(static_cast<Eigen::Index>(k)).transpose();
    }
  }

  const ComplexMatrix root = sqrt_psd(rho.matrix(), tol.value);
  const ComplexVector psi = double_ket(root * w.transpose());
  const System ae{rho.system().label + "E", da * de};
  PurificationResult out{State(ae, psi * psi.adjoint(), tol),
                         System{"E", de}, w, {}};
  for (std::size_t k = 0; k < rank; ++k) {
    out.schmidt_coefficients.push_back(std::sqrt(std::max(eig.values[k], 0.0)));
  }
  return out;
}

DilationResult stinespring_dilate(const Instrument& inst) {
  const std::size_t da = inst.input().dim;
  const std::size_t db = inst.output().dim;

  std::vector<std::pair<std::size_t, long>> block_map;
  std::vector<const ComplexMatrix*> stacked;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& kraus = inst.operation(i).kraus();
    for (std::size_t k = 0; k < kraus.size(); ++k) {
      block_map.emplace_back(i, static_cast<long>(k));
      stacked.push_back(&kraus[k]);
    }
  }
  const std::size_t n = stacked.size();

  // Smallest ancilla F with da*df = db*de and de >= n.
  std::size_t df = 1;
  while ((da * df) % db != 0 || (da * df) / db < n) ++df;
  const std::size_t de = (da * df) / db;
  const std::size_t total = da * df;
  for (std::size_t e = n; e < de; ++e) block_map.emplace_back(0, -1);

  const auto nde = static_cast<Eigen::Index>(de);
  const auto ndf = static_cast<Eigen::Index>(df);
  const auto nt = static_cast<Eigen::Index>(total);

  // W : A -> B (x) E, row index b*de + e.
  ComplexMatrix w = ComplexMatrix::Zero(nt, static_cast<Eigen::Index>(da));
  for (std::size_t e = 0; e < n; ++e) {
    const ComplexMatrix& k = *stacked[e];
    for (Eigen::Index b = 0; b < k.rows(); ++b) {
      w.row(b * nde + static_cast<Eigen::Index>(e)) = k.row(b);
    }
  }

  ComplexMatrix u = ComplexMatrix::Zero(nt, nt);
  for (Eigen::Index a = 0; a < w.cols(); ++a) u.col(a * ndf) = w.col(a);
  const Subspace rest = Subspace{total, w}.complement();
  if (rest.dim() != total - da) {
    fail(ErrorKind::NotIsometry, "stinespring_dilate: stacked Kraus operators are not an isometry");
  }
  Eigen::Index next = 0;
  for (Eigen::Index c = 0; c < nt; ++c) {
    if (c % ndf == 0) continue;
    u.col(c) = rest.basis.col(next++);
  }

  const System f{"F", df};
  const System env{"E", de};
  ComplexMatrix sigma = ComplexMatrix::Zero(ndf, ndf);
  sigma(0, 0) = 1.0;

  std::vector<Effect> pvm;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    ComplexMatrix z = ComplexMatrix::Zero(nde, nde);
    for (std::size_t e = 0; e < de; ++e) {
      if (block_map[e].first == i) z(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(e)) = 1.0;
    }
    pvm.emplace_back(env, z);
  }

  return DilationResult{u, inst.input(), inst.output(), f, env,
                        State(f, sigma), std::move(pvm), std::move(block_map)};
}

ComplexMatrix dilation_outcome_choi(const DilationResult& d, std::size_t outcome) {
  const std::size_t da = d.input.dim;
  const std::size_t db = d.output.dim;
  const std::size_t de = d.environment.dim;
  if (outcome >= d.pvm.size()) {
    fail(ErrorKind::InvalidArgument, "dilation_outcome_choi: outcome out of range");
  }
  if (static_cast<std::size_t>(d.unitary.rows()) != da * d.ancilla.dim ||
      static_cast<std::size_t>(d.unitary.rows()) != db * de) {
    fail(ErrorKind::DimensionMismatch, "dilation_outcome_choi: inconsistent dimensions");
  }
  const ComplexMatrix meter = kron(identity(db), d.pvm[outcome].matrix());
  const std::size_t dims[] = {db, de};
  const std::size_t keep_b[] = {0};
  const auto nda = static_cast<Eigen::Index>(da);
  const auto n = static_cast<Eigen::Index>(da * db);
  ComplexMatrix choi = ComplexMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < nda; ++a) {
    for (Eigen::Index ap = 0; ap < nda; ++ap) {
      ComplexMatrix x = ComplexMatrix::Zero(nda, nda);
      x(a, ap) = 1.0;
      const ComplexMatrix joint =
          d.unitary * kron(x, d.ancilla_state.matrix()) * d.unitary.adjoint() * meter;
      choi += kron(partial_trace(joint, dims, keep_b), x);
    }
  }
  return choi;
}

Instrument instrument_from_dilation(const DilationResult& d, const System& input) {
  if (input.dim != d.input.dim) {
    fail(ErrorKind::DimensionMismatch, "instrument_from_dilation: input dim mismatch");
  }
  std::vector<std::string> labels;
  std::vector<QuantumOperation> ops;
  for (std::size_t i = 0; i < d.pvm.size(); ++i) {
    const ComplexMatrix choi = hermitian_part(dilation_outcome_choi(d, i));
    ops.emplace_back(input, d.output, choi_to_kraus(choi, input.dim, d.output.dim));
    labels.push_back(std::to_string(i));
  }
  return Instrument(std::move(labels), std::move(ops));
}

}  // namespace qfals
