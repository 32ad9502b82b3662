// Copyright 2026 The qadder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qadder/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "detail/dopri5.hpp"
#include "qadder/errors.hpp"

namespace qadder {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Right-hand side of the master equation for hermitian arguments X.
//   -i [H, X] = i (A - A^dag) with A = X H^dag, built column by column from
//   the rows of H.
//   L X L^dag is a gather: every collapse operator has at most one non-zero
//   per row, so (L X L^dag)_ij = w_i conj(w_j) X_{p(i) p(j)}.
//   L^dag L and the dephasing jumps are diagonal and act elementwise.
// All pieces map bitwise-hermitian input to bitwise-hermitian output.
class LindbladKernel {
 public:
  LindbladKernel(const HamiltonianSource& h, const NoiseSpec& noise) : layout_(layout_of(h)) {
    d_ = layout_.dim();
    if (const auto* op = std::get_if<Operator>(&h)) {
      build_pattern({&op->matrix()});
      term_values_.push_back(gather_values(op->matrix()));
      omegas_.push_back(0.0);
    } else if (const auto* rf = std::get_if<RotatingFrameHamiltonian>(&h)) {
      build_pattern({&rf->hamiltonian.matrix()});
      term_values_.push_back(gather_values(rf->hamiltonian.matrix()));
      omegas_.push_back(0.0);
    } else {
      const auto& td = std::get<TimeDependentHamiltonian>(h);
      std::vector<const CMatrix*> mats;
      for (const auto& term : td.terms()) mats.push_back(&term.op.matrix());
      build_pattern(mats);
      for (const auto& term : td.terms()) {
        term_values_.push_back(gather_values(term.op.matrix()));
        omegas_.push_back(term.omega);
      }
      time_dependent_ = true;
    }
    values_.resize(static_cast<Index>(cols_.size()));
    if (!time_dependent_) assemble(0.0);

    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(d_);
    elementwise_ = Eigen::ArrayXXd::Zero(d_, d_);
    for (const CollapseOperator& c : collapse_operators(noise, layout_)) {
      const CMatrix& l = c.op.matrix();
      const CMatrix ldl = l.adjoint() * l;
      if (!ldl.isDiagonal(0.0)) throw Error("collapse operator with non-diagonal L^dag L");
      gamma += c.rate * ldl.diagonal().real();
      if (l.isDiagonal(0.0)) {
        const Eigen::VectorXcd diag = l.diagonal();
        for (Index j = 0; j < d_; ++j)
          for (Index i = 0; i < d_; ++i)
            elementwise_(i, j) += c.rate * (diag(i) * std::conj(diag(j))).real();
        continue;
      }
      Jump jump;
      jump.src.assign(d_, -1);
      jump.weight = Eigen::VectorXd::Zero(d_);
      for (Index i = 0; i < d_; ++i) {
        for (Index k = 0; k < d_; ++k) {
          if (l(i, k) == cplx(0.0)) continue;
          if (jump.src[i] >= 0) throw Error("collapse operator is not a partial permutation");
          if (l(i, k).imag() != 0.0) throw Error("collapse operator with complex entries");
          jump.src[i] = k;
          jump.weight(i) = std::sqrt(c.rate) * l(i, k).real();
        }
      }
      for (Index i = 0; i < d_; ++i) {
        if (jump.src[i] < 0) continue;
        if (!jump.runs.empty()) {
          Run& last = jump.runs.back();
          if (last.row0 + last.len == i && last.src0 + last.len == jump.src[i]) {
            ++last.len;
            continue;
          }
        }
        jump.runs.push_back({i, jump.src[i], 1});
      }
      jump.weight_ri.resize(2 * d_);
      for (Index i = 0; i < d_; ++i) jump.weight_ri(2 * i) = jump.weight_ri(2 * i + 1) = jump.weight(i);
      jumps_.push_back(std::move(jump));
    }
    for (Index j = 0; j < d_; ++j)
      for (Index i = 0; i < d_; ++i) elementwise_(i, j) -= 0.5 * (gamma(i) + gamma(j));
    has_elementwise_ = (elementwise_ != 0.0).any();
    // Interleaved (re, im) copy so the elementwise term is a real product.
    elementwise_ri_.resize(2 * d_ * d_);
    for (Index k = 0; k < d_ * d_; ++k) {
      elementwise_ri_(2 * k) = elementwise_(k);
      elementwise_ri_(2 * k + 1) = elementwise_(k);
    }
    a_.resize(d_, d_);
  }

  bool time_dependent() const { return time_dependent_; }

  void apply(double t, const CMatrix& x, CMatrix& out) {
    if (time_dependent_) assemble(t);
    // A = X H^dag
    for (Index r = 0; r < d_; ++r) {
      auto col = a_.col(r);
      col.setZero();
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) col += std::conj(values_(k)) * x.col(cols_[k]);
    }
    out.resize(d_, d_);
    constexpr Index kBlock = 32;
    for (Index jb = 0; jb < d_; jb += kBlock) {
      const Index je = std::min(d_, jb + kBlock);
      for (Index ib = 0; ib < d_; ib += kBlock) {
        const Index ie = std::min(d_, ib + kBlock);
        for (Index j = jb; j < je; ++j)
          for (Index i = ib; i < ie; ++i) {
            const cplx z = a_(i, j) - std::conj(a_(j, i));
            out(i, j) = cplx(-z.imag(), z.real());
          }
      }
    }
    for (const Jump& jump : jumps_) {
      const double* w2 = jump.weight_ri.data();
      for (const Run& rj : jump.runs) {
        for (Index dj = 0; dj < rj.len; ++dj) {
          const Index j = rj.row0 + dj;
          const double wj = jump.weight(j);
          const double* xj = reinterpret_cast<const double*>(x.col(rj.src0 + dj).data());
          double* oj = reinterpret_cast<double*>(out.col(j).data());
          for (const Run& ri : jump.runs) {
            double* o = oj + 2 * ri.row0;
            const double* xs = xj + 2 * ri.src0;
            const double* ws = w2 + 2 * ri.row0;
            const Index n = 2 * ri.len;
            for (Index k = 0; k < n; ++k) o[k] += wj * ws[k] * xs[k];
          }
        }
      }
    }
    if (has_elementwise_) {
      const Index n = 2 * d_ * d_;
      Eigen::Map<Eigen::ArrayXd> o(reinterpret_cast<double*>(out.data()), n);
      const Eigen::Map<const Eigen::ArrayXd> xr(reinterpret_cast<const double*>(x.data()), n);
      o += elementwise_ri_ * xr;
    }
  }

  // -i H(t) psi
  void apply_vector(double t, const CVector& psi, CVector& out) {
    if (time_dependent_) assemble(t);
    out.resize(d_);
    for (Index r = 0; r < d_; ++r) {
      cplx acc = 0.0;
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_(k) * psi(cols_[k]);
      out(r) = cplx(acc.imag(), -acc.real());
    }
  }

 private:
  // Rows row0 .. row0+len-1 draw from sources src0 .. src0+len-1.
  struct Run {
    Index row0;
    Index src0;
    Index len;
  };
  struct Jump {
    std::vector<Index> src;
    std::vector<Run> runs;
    Eigen::VectorXd weight;
    Eigen::VectorXd weight_ri;  // weight repeated for (re, im)
  };

  // Union sparsity pattern of all Hamiltonian terms, in CSR form.
  void build_pattern(const std::vector<const CMatrix*>& mats) {
    row_ptr_.assign(d_ + 1, 0);
    cols_.clear();
    for (Index r = 0; r < d_; ++r) {
      for (Index c = 0; c < d_; ++c) {
        bool nz = false;
        for (const CMatrix* m : mats) nz = nz || (*m)(r, c) != cplx(0.0);
        if (nz) cols_.push_back(c);
      }
      row_ptr_[r + 1] = static_cast<Index>(cols_.size());
    }
  }

  Eigen::VectorXcd gather_values(const CMatrix& m) const {
    Eigen::VectorXcd v(static_cast<Index>(cols_.size()));
    for (Index r = 0; r < d_; ++r)
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) v(k) = m(r, cols_[k]);
    return v;
  }

  void assemble(double t) {
    if (t == assembled_at_) return;
    values_.setZero();
    for (size_t k = 0; k < omegas_.size(); ++k) {
      values_ += std::exp(cplx(0.0, omegas_[k] * t)) * term_values_[k];
    }
    assembled_at_ = t;
  }

  SpaceLayout layout_;
  Index d_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> cols_;
  Eigen::VectorXcd values_;
  bool time_dependent_ = false;
  std::vector<double> omegas_;
  std::vector<Eigen::VectorXcd> term_values_;
  double assembled_at_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<Jump> jumps_;
  Eigen::ArrayXXd elementwise_;
  Eigen::ArrayXd elementwise_ri_;
  bool has_elementwise_ = false;
  CMatrix a_;
};

const Eigen::VectorXd* frame_of(const HamiltonianSource& h) {
  if (const auto* rf = std::get_if<RotatingFrameHamiltonian>(&h)) return &rf->frame;
  return nullptr;
}

// exp(i D t) X exp(-i D t)
void to_interaction_frame(const Eigen::VectorXd& frame, double t, CMatrix& x) {
  const Index d = frame.size();
  Eigen::VectorXcd ph(d);
  for (Index i = 0; i < d; ++i) ph(i) = std::exp(cplx(0.0, frame(i) * t));
  for (Index j = 0; j < d; ++j) {
    const cplx cj = std::conj(ph(j));
    for (Index i = 0; i < d; ++i) x(i, j) *= ph(i) * cj;
  }
}

// Hermitian matrices packed into d^2 reals: diagonal, then the strict lower
// triangle as (re, im) pairs scaled by sqrt(2).  The Euclidean product of two
// packed vectors is Re tr(X^dag Y), and the basis takes half the memory of a
// plain complex layout.
void pack_hermitian(const CMatrix& x, double* out) {
  const Index d = x.rows();
  for (Index i = 0; i < d; ++i) out[i] = x(i, i).real();
  double* o = out + d;
  for (Index j = 0; j < d; ++j) {
    const cplx* col = x.col(j).data();
    for (Index i = j + 1; i < d; ++i) {
      *o++ = kSqrt2 * col[i].real();
      *o++ = kSqrt2 * col[i].imag();
    }
  }
}

void unpack_hermitian(const double* in, CMatrix& x) {
  const Index d = x.rows();
  for (Index i = 0; i < d; ++i) x(i, i) = in[i];
  const double* o = in + d;
  for (Index j = 0; j < d; ++j) {
    for (Index i = j + 1; i < d; ++i) {
      const cplx z(o[0] / kSqrt2, o[1] / kSqrt2);
      o += 2;
      x(i, j) = z;
      x(j, i) = std::conj(z);
    }
  }
}

// exp(t L) x for a static Liouvillian acting on hermitian matrices.  Step
// size and error control follow Sidje's expv.
CMatrix krylov_propagate(LindbladKernel& kernel, const CMatrix& x0, double t_out,
                         const IntegratorSpec& spec, EvolutionStats& stats) {
  const Index d = x0.rows();
  const Index n_real = d * d;
  const int m = static_cast<int>(std::clamp<Index>(spec.krylov_dim, 2, n_real));
  const double x0_norm = x0.norm();
  if (x0_norm == 0.0 || t_out <= 0.0) return x0;
  const double tol = spec.rel_tol * x0_norm;
  constexpr double kGamma = 0.9;
  constexpr double kDelta = 1.2;
  constexpr int kMaxReject = 40;

  Eigen::MatrixXd basis(n_real, m + 1);
  Eigen::VectorXd p(n_real);
  Eigen::VectorXd w(n_real);
  Eigen::VectorXd h(m + 1);
  Eigen::VectorXd h2(m + 1);
  CMatrix in(d, d);
  CMatrix out(d, d);

  // p = L(basis column j)
  auto apply_col = [&](int j) {
    unpack_hermitian(basis.col(j).data(), in);
    kernel.apply(0.0, in, out);
    ++stats.rhs_evals;
    pack_hermitian(out, p.data());
  };

  pack_hermitian(x0, w.data());
  basis.col(0) = w / x0_norm;
  apply_col(0);
  const double anorm = std::max(p.norm(), 1e-300);
  const double btol = 1e-12 * anorm;

  double t = 0.0;
  double tau = std::min(t_out, 0.5 * m / anorm);
  while (t < t_out) {
    if (stats.steps + stats.rejected >= spec.max_steps) throw IntegrationError("step budget exhausted", t);
    const double beta = w.norm();
    if (beta == 0.0) break;
    basis.col(0) = w / beta;
    Eigen::MatrixXd hmat = Eigen::MatrixXd::Zero(m + 2, m + 2);
    int mb = m;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      apply_col(j);
      // Classical Gram-Schmidt; a second pass only when the first one
      // cancelled most of the vector.
      auto v = basis.leftCols(j + 1);
      const double before = p.norm();
      h.head(j + 1).noalias() = v.transpose() * p;
      p.noalias() -= v * h.head(j + 1);
      double s = p.norm();
      if (s < 0.7071 * before) {
        h2.head(j + 1).noalias() = v.transpose() * p;
        p.noalias() -= v * h2.head(j + 1);
        h.head(j + 1) += h2.head(j + 1);
        s = p.norm();
      }
      hmat.col(j).head(j + 1) = h.head(j + 1);
      if (s < btol) {
        breakdown = true;
        mb = j + 1;
        tau = t_out - t;
        break;
      }
      hmat(j + 1, j) = s;
      basis.col(j + 1) = p / s;
    }
    double avnorm = 0.0;
    if (!breakdown) {
      hmat(m + 1, m) = 1.0;
      apply_col(m);
      avnorm = p.norm();
    }

    Eigen::MatrixXd f;
    double err_loc = 0.0;
    double xm = 1.0 / m;
    int rejects = 0;
    while (true) {
      const int mx = breakdown ? mb : m + 2;
      f = (tau * hmat.topLeftCorner(mx, mx)).exp();
      if (breakdown) {
        err_loc = btol;
        break;
      }
      const double phi1 = std::abs(beta * f(m, 0));
      const double phi2 = std::abs(beta * f(m + 1, 0) * avnorm);
      if (phi1 > 10.0 * phi2) {
        err_loc = phi2;
        xm = 1.0 / m;
      } else if (phi1 > phi2) {
        err_loc = (phi1 * phi2) / (phi1 - phi2);
        xm = 1.0 / m;
      } else {
        err_loc = phi1;
        xm = 1.0 / (m - 1);
      }
      if (err_loc <= kDelta * tau * tol) break;
      tau = kGamma * tau * std::pow(tau * tol / err_loc, xm);
      ++stats.rejected;
      if (++rejects > kMaxReject) throw IntegrationError("Krylov step size control failed", t);
    }

    const int used = breakdown ? mb : m + 1;
    w.noalias() = basis.leftCols(used) * (beta * f.col(0).head(used));
    t += tau;
    ++stats.steps;
    if (t >= t_out) break;
    const double grow = err_loc > 0.0 ? std::pow(tau * tol / err_loc, xm) : 10.0;
    tau = std::min(t_out - t, kGamma * tau * std::min(grow, 10.0));
    if (t_out - t - tau < 1e-14 * t_out) tau = t_out - t;
  }
  CMatrix result(d, d);
  unpack_hermitian(w.data(), result);
  return result;
}

double rk_max_step(const HamiltonianSource& h, const IntegratorSpec& spec) {
  double cap = spec.max_step;
  if (const auto* td = std::get_if<TimeDependentHamiltonian>(&h)) {
    const double w = td->fastest_frequency();
    if (w > 0.0) cap = std::min(cap, spec.max_step_fraction * kTwoPi / w);
  }
  return cap;
}

// Advances the engine-frame state from t0 to t1.
CMatrix advance(LindbladKernel& kernel, const HamiltonianSource& h, CMatrix y, double t0, double t1,
                const IntegratorSpec& spec, EvolutionStats& stats) {
  if (t1 <= t0) return y;
  if (spec.method == Method::KrylovExponential) {
    if (kernel.time_dependent()) {
      throw Error("Krylov propagation needs a time-independent generator (use the rotating frame form)");
    }
    return krylov_propagate(kernel, y, t1 - t0, spec, stats);
  }
  auto rhs = [&kernel](double t, const CMatrix& x, CMatrix& out) { kernel.apply(t, x, out); };
  return detail::dopri5(rhs, std::move(y), t0, t1, rk_max_step(h, spec), spec, stats);
}

}  // namespace

std::string to_string(Channel c) {
  switch (c) {
    case Channel::KappaA:
      return "kappa_a";
    case Channel::KappaB:
      return "kappa_b";
    case Channel::GammaEG:
      return "gamma_eg";
    case Channel::GammaFE:
      return "gamma_fe";
    case Channel::GammaFG:
      return "gamma_fg";
    case Channel::DephasingE:
      return "gamma_phi_e";
    case Channel::DephasingF:
      return "gamma_phi_f";
  }
  return "?";
}

NoiseSpec NoiseSpec::from_params(const ModelParams& p) {
  NoiseSpec n;
  n.rates = {p.kappa_a, p.kappa_b, p.gamma_eg, p.gamma_fe, p.gamma_fg, p.gamma_phi_e, p.gamma_phi_f};
  for (double r : n.rates) {
    if (r < 0.0) throw RegimeViolationError("noise rates must be non-negative");
  }
  return n;
}

NoiseSpec NoiseSpec::only(Channel c) const {
  NoiseSpec n = *this;
  n.enabled.fill(false);
  n.enabled[static_cast<int>(c)] = true;
  return n;
}

NoiseSpec NoiseSpec::without(Channel c) const {
  NoiseSpec n = *this;
  n.enabled[static_cast<int>(c)] = false;
  return n;
}

double NoiseSpec::rate(Channel c) const {
  const int i = static_cast<int>(c);
  return enabled[i] ? rates[i] : 0.0;
}

bool NoiseSpec::any() const {
  for (int i = 0; i < kNumChannels; ++i) {
    if (rate(static_cast<Channel>(i)) > 0.0) return true;
  }
  return false;
}

std::vector<CollapseOperator> collapse_operators(const NoiseSpec& noise, const SpaceLayout& layout) {
  std::vector<CollapseOperator> out;
  for (int i = 0; i < kNumChannels; ++i) {
    const Channel c = static_cast<Channel>(i);
    const double r = noise.rate(c);
    if (r < 0.0) throw RegimeViolationError("noise rates must be non-negative");
    if (r == 0.0) continue;
    switch (c) {
      case Channel::KappaA:
        out.push_back({c, r, embed(annihilation(layout.fock_a()), Slot::CavityA, layout)});
        break;
      case Channel::KappaB:
        out.push_back({c, r, embed(annihilation(layout.fock_b()), Slot::CavityB, layout)});
        break;
      case Channel::GammaEG:
        out.push_back({c, r, embed(qutrit_transition(Level::E, Level::G), Slot::Qutrit, layout)});
        break;
      case Channel::GammaFE:
        out.push_back({c, r, embed(qutrit_transition(Level::F, Level::E), Slot::Qutrit, layout)});
        break;
      case Channel::GammaFG:
        out.push_back({c, r, embed(qutrit_transition(Level::F, Level::G), Slot::Qutrit, layout)});
        break;
      case Channel::DephasingE:
        out.push_back({c, r, embed(qutrit_transition(Level::E, Level::E), Slot::Qutrit, layout)});
        break;
      case Channel::DephasingF:
        out.push_back({c, r, embed(qutrit_transition(Level::F, Level::F), Slot::Qutrit, layout)});
        break;
    }
  }
  return out;
}

std::string to_string(Method m) {
  return m == Method::DormandPrince45 ? "dopri5" : "krylov";
}

Method parse_method(const std::string& s) {
  if (s == "dopri5" || s == "rk45") return Method::DormandPrince45;
  if (s == "krylov") return Method::KrylovExponential;
  throw ConfigError("unknown integration method '" + s + "' (expected dopri5|krylov)");
}

std::string IntegratorSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "method=" << to_string(method) << " rel_tol=" << rel_tol << " abs_tol=" << abs_tol
     << " max_step_fraction=" << max_step_fraction;
  if (method == Method::KrylovExponential) os << " krylov_dim=" << krylov_dim;
  return os.str();
}

const SpaceLayout& layout_of(const HamiltonianSource& h) {
  if (const auto* op = std::get_if<Operator>(&h)) return op->layout();
  if (const auto* rf = std::get_if<RotatingFrameHamiltonian>(&h)) return rf->hamiltonian.layout();
  return std::get<TimeDependentHamiltonian>(h).layout();
}

CMatrix dissipator(const Operator& op, const CMatrix& rho) {
  const CMatrix& o = op.matrix();
  if (rho.rows() != o.rows() || rho.cols() != o.cols()) {
    throw LayoutMismatchError("dissipator: operator and density matrix sizes differ");
  }
  const CMatrix odo = o.adjoint() * o;
  return o * rho * o.adjoint() - 0.5 * (odo * rho + rho * odo);
}

CMatrix lindblad_rhs(const HamiltonianSource& h, const NoiseSpec& noise, const CMatrix& rho, double t) {
  const Index d = layout_of(h).dim();
  if (rho.rows() != d || rho.cols() != d) throw LayoutMismatchError("lindblad_rhs: size mismatch");
  LindbladKernel kernel(h, noise);
  CMatrix out(d, d);
  kernel.apply(t, rho, out);
  return out;
}

Diagnostics diagnose(const CMatrix& rho) {
  Diagnostics d;
  d.trace_deficit = std::abs(rho.trace() - cplx(1.0));
  d.hermiticity_deficit = hermiticity_deficit(rho);
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  d.min_eigenvalue = min_eigenvalue(herm);
  return d;
}

CMatrix propagate_hermitian(const CMatrix& x0, const HamiltonianSource& h, const NoiseSpec& noise,
                            double t_final, const IntegratorSpec& spec, EvolutionStats* stats) {
  const Index d = layout_of(h).dim();
  if (x0.rows() != d || x0.cols() != d) throw LayoutMismatchError("propagate_hermitian: size mismatch");
  if (t_final < 0.0) throw Error("negative evolution time");
  EvolutionStats local;
  LindbladKernel kernel(h, noise);
  CMatrix y = advance(kernel, h, x0, 0.0, t_final, spec, local);
  if (const auto* frame = frame_of(h)) to_interaction_frame(*frame, t_final, y);
  if (stats) *stats = local;
  return y;
}

MasterTrajectory evolve_master(const QuantumState& rho0, const HamiltonianSource& h,
                               const NoiseSpec& noise, double t_final, const IntegratorSpec& spec,
                               std::vector<double> sample_times) {
  require_same_layout(rho0.layout(), layout_of(h), "evolve_master");
  if (t_final < 0.0) throw Error("negative evolution time");
  const CMatrix start = rho0.density_matrix();
  const Diagnostics d0 = diagnose(start);
  if (d0.trace_deficit > 1e-8 || d0.hermiticity_deficit > 1e-10 || d0.min_eigenvalue < -1e-8) {
    throw NumericalPositivityError("initial state is not a valid density matrix");
  }

  if (sample_times.empty()) sample_times = {0.0, t_final};
  std::sort(sample_times.begin(), sample_times.end());
  if (sample_times.front() < 0.0 || sample_times.back() > t_final) {
    throw Error("sample times must lie in [0, t_final]");
  }

  MasterTrajectory out;
  LindbladKernel kernel(h, noise);
  const Eigen::VectorXd* frame = frame_of(h);
  CMatrix y = start;
  double t = 0.0;
  for (double ts : sample_times) {
    y = advance(kernel, h, std::move(y), t, ts, spec, out.stats);
    t = ts;
    CMatrix report = y;
    if (frame) to_interaction_frame(*frame, ts, report);
    out.times.push_back(ts);
    out.diagnostics.push_back(diagnose(report));
    out.states.push_back(QuantumState::density(rho0.layout(), std::move(report)));
  }
  return out;
}

QuantumState evolve_unitary(const QuantumState& psi0, const HamiltonianSource& h, double t_final,
                            const IntegratorSpec& spec, EvolutionStats* stats) {
  require_same_layout(psi0.layout(), layout_of(h), "evolve_unitary");
  if (std::abs(psi0.vector().norm() - 1.0) > 1e-10) throw Error("evolve_unitary needs a normalized state");
  if (t_final < 0.0) throw Error("negative evolution time");
  EvolutionStats local;
  LindbladKernel kernel(h, NoiseSpec::none());
  auto rhs = [&kernel](double t, const CVector& x, CVector& out) { kernel.apply_vector(t, x, out); };
  CVector psi = detail::dopri5(rhs, psi0.vector(), 0.0, t_final, rk_max_step(h, spec), spec, local);
  if (const auto* frame = frame_of(h)) {
    for (Index i = 0; i < psi.size(); ++i) psi(i) *= std::exp(cplx(0.0, (*frame)(i) * t_final));
  }
  if (stats) *stats = local;
  return QuantumState::pure(psi0.layout(), std::move(psi));
}

}  // namespace qadder
