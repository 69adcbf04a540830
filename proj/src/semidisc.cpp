#include "gdwave/semidisc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "gdwave/error.hpp"
#include "gdwave/fastpath.hpp"
#include "gdwave/pcg.hpp"
#include "gdwave/sparse.hpp"
#include "gdwave/tensor.hpp"

namespace gdwave {

FluxScheme FluxScheme::upwind(double xi) {
  if (!(xi > 0.0)) throw Error(Errc::invalid_argument, "upwind flux needs xi > 0");
  return {0.5, 0.5 * xi, 0.5 / xi, xi};
}

FluxScheme FluxScheme::from_name(const std::string& name, double xi) {
  if (name == "central") return central();
  if (name == "alternating") return alternating();
  if (name == "upwind") return upwind(xi);
  throw Error(Errc::unknown_tag, "unknown flux '" + name + "'");
}

FluxValues numerical_flux(const FluxScheme& s, double alpha, Trace in, Trace out) {
  return {alpha * in.v + (1.0 - alpha) * out.v - s.beta * (in.dn + out.dn),
          (1.0 - alpha) * in.dn - alpha * out.dn - s.tau * (in.v - out.v)};
}

double face_alpha(const FluxScheme& scheme, Endpoint side, bool boundary) noexcept {
  if (boundary) return 0.5;
  return side == Endpoint::right ? scheme.alpha : 1.0 - scheme.alpha;
}

BcKind bc_from_name(const std::string& name) {
  if (name == "periodic") return BcKind::periodic;
  if (name == "dirichlet") return BcKind::dirichlet;
  if (name == "neumann") return BcKind::neumann;
  throw Error(Errc::unknown_tag, "unknown boundary condition '" + name + "'");
}

const char* bc_name(BcKind kind) noexcept {
  switch (kind) {
    case BcKind::periodic: return "periodic";
    case BcKind::dirichlet: return "dirichlet";
    case BcKind::neumann: return "neumann";
  }
  return "?";
}

Trace apply_bc(BcKind kind, Trace in, double g, Trace opposite) {
  switch (kind) {
    case BcKind::periodic: return opposite;
    // mirror: the averaged value is g_t and the normal-derivative jump vanishes
    case BcKind::dirichlet: return {2.0 * g - in.v, -in.dn};
    // gradient average equals g, no value jump
    case BcKind::neumann: return {in.v, in.dn - 2.0 * g};
  }
  throw Error(Errc::unknown_tag, "unknown boundary condition");
}

SolverPath path_from_name(const std::string& name) {
  if (name == "fast") return SolverPath::fast;
  if (name == "direct") return SolverPath::direct;
  if (name == "pcg") return SolverPath::pcg;
  throw Error(Errc::unknown_tag, "unknown solver path '" + name + "'");
}

// ---------------------------------------------------------------- mesh

Mesh Mesh::uniform(int dim, int n, int cells, double lo, double hi, BcKind kind) {
  Mesh m;
  m.dim = dim;
  m.elements.assign(dim, n);
  m.cells = cells;
  m.lower.assign(dim, lo);
  m.upper.assign(dim, hi);
  m.bc.assign(dim, {kind, kind});
  return m;
}

void Mesh::validate(int degree) const {
  if (dim < 1 || dim > 3) throw Error(Errc::invalid_argument, "dimension must be 1, 2 or 3");
  if (static_cast<int>(elements.size()) != dim || static_cast<int>(lower.size()) != dim ||
      static_cast<int>(upper.size()) != dim || static_cast<int>(bc.size()) != dim)
    throw Error(Errc::dimension_mismatch, "mesh arrays must have one entry per axis");
  if (cells < degree) throw Error(Errc::mesh_too_coarse, "N must be at least p");
  for (int a = 0; a < dim; ++a) {
    if (elements[a] < 1) throw Error(Errc::invalid_argument, "need at least one element per axis");
    if (!(upper[a] > lower[a])) throw Error(Errc::invalid_argument, "empty domain");
    if ((bc[a][0] == BcKind::periodic) != (bc[a][1] == BcKind::periodic))
      throw Error(Errc::invalid_argument, "periodic boundaries must come in pairs");
  }
}

int Mesh::num_elements() const {
  int n = 1;
  for (int e : elements) n *= e;
  return n;
}

double Mesh::min_cell_size() const {
  double h = cell_size(0);
  for (int a = 1; a < dim; ++a) h = std::min(h, cell_size(a));
  return h;
}

std::vector<int> Mesh::element_coords(int e) const {
  std::vector<int> c(dim);
  for (int a = 0; a < dim; ++a) {
    c[a] = e % elements[a];
    e /= elements[a];
  }
  return c;
}

int Mesh::element_index(std::span<const int> c) const {
  int e = 0;
  for (int a = dim - 1; a >= 0; --a) e = e * elements[a] + c[a];
  return e;
}

int Mesh::neighbour(int e, int axis, Endpoint side) const {
  auto c = element_coords(e);
  c[axis] += side == Endpoint::right ? 1 : -1;
  if (c[axis] < 0 || c[axis] >= elements[axis]) {
    if (bc[axis][0] != BcKind::periodic) return -1;
    c[axis] = (c[axis] + elements[axis]) % elements[axis];
  }
  return element_index(c);
}

ElementBox Mesh::box(int e) const {
  const auto c = element_coords(e);
  ElementBox b;
  for (int a = 0; a < dim; ++a) {
    b.origin.push_back(lower[a] + c[a] * element_length(a));
    b.lengths.push_back(element_length(a));
  }
  return b;
}

Medium Medium::uniform(double c) {
  if (!(c > 0.0)) throw Error(Errc::nonpositive_coefficient, "sound speed must be positive");
  Medium m;
  m.c = c;
  m.c_max = c;
  m.c2 = [c2 = c * c](std::span<const double>) { return c2; };
  return m;
}

Medium Medium::field(PointFunction c2, double c_max) {
  if (!(c_max > 0.0)) throw Error(Errc::nonpositive_coefficient, "c_max must be positive");
  Medium m;
  m.constant = false;
  m.c2 = std::move(c2);
  m.c_max = c_max;
  return m;
}

int worker_count_from_env() {
  const char* s = std::getenv("GDWAVE_THREADS");
  if (!s) return 1;
  const int n = std::atoi(s);
  return std::max(1, n);
}

// ---------------------------------------------------------------- impl

namespace {

template <typename F>
void parallel_for(int count, int workers, F&& f) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) f(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) f(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Applies psi^T along every axis (modal load vectors).
std::vector<double> apply_psi_transpose(const std::vector<DiagonalBasis>& axes, const linalg::TensorShape& shape,
                                        std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end()), b(x.size());
  for (int j = 0; j < shape.dims(); ++j) {
    const int n = axes[j].size();
    std::vector<double> rows(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) rows[static_cast<std::size_t>(r) * n + c] = axes[j].psi(c, r);
    linalg::apply_dense_along_axis(shape, j, rows, a, b);
    std::swap(a, b);
  }
  return a;
}

struct PcgElement {
  linalg::CsrMatrix stiffness;  // S_{c^2}
  std::unique_ptr<linalg::IncompleteCholesky> ic;
  std::unique_ptr<linalg::AugmentedOperator> aug;
  std::unique_ptr<linalg::ShermanMorrisonPreconditioner> pre;
  // face masses weighted by c^2, per axis and side; scalars in 1-D
  std::vector<std::array<linalg::CsrMatrix, 2>> face_mass;
  std::vector<std::array<double, 2>> face_scalar;
};

struct Workspace {
  std::vector<double> fu, fv, jump, grad, wjump, wgrad, work, tmp;
};

}  // namespace

struct Semidiscretization::Impl {
  int workers = 1;
  linalg::TensorShape shape;
  std::vector<linalg::TensorShape> face_shape;
  std::vector<std::size_t> face_size;
  // trace vectors per axis and side, nodal or modal
  std::vector<std::array<const TraceVectors*, 2>> traces;
  // face trace buffers: [element][axis][side] -> face_size(axis)
  std::vector<std::size_t> face_offset;  // per (e, axis)
  std::size_t face_stride = 0;           // per element
  std::vector<double> tv, tdn;
  std::vector<Workspace> ws;
  std::vector<double> mean;  // d-dimensional m

  // fast
  std::vector<DiagonalBasis> diag;
  std::vector<double> lambda;  // sum of axis eigenvalues per modal index

  // direct
  std::unique_ptr<linalg::KroneckerFactorization> mass_factor;
  std::vector<linalg::SymmetricBandedMatrix> mass_factors;
  linalg::CsrMatrix stiffness;
  Eigen::LLT<Eigen::MatrixXd> aug_llt;

  // pcg
  linalg::CsrMatrix mass;
  std::unique_ptr<linalg::IncompleteCholesky> mass_ic;
  std::vector<std::unique_ptr<PcgElement>> elements;
  std::vector<double> ut_prev, vt_prev;
  std::vector<int> u_iters, v_iters;

  // forcing: per term, element-major loads in the stored representation
  std::vector<std::function<double(double)>> force_time;
  std::vector<std::vector<double>> loads;

  std::size_t offset(int e, int axis, int side) const {
    return static_cast<std::size_t>(e) * face_stride + face_offset[2 * axis + side];
  }
};

Semidiscretization::Semidiscretization(Mesh mesh, Medium medium, SemidiscOptions options,
                                       std::vector<ForcingTerm> forcing)
    : mesh_(std::move(mesh)),
      medium_(std::move(medium)),
      options_(options),
      basis_(options.degree, mesh_.cells),
      impl_(std::make_unique<Impl>()) {
  mesh_.validate(options_.degree);
  if (options_.path == SolverPath::fast && !medium_.constant)
    throw Error(Errc::fast_path_unavailable, "the fast path needs a constant sound speed");
  if (options_.path == SolverPath::direct && !medium_.constant)
    throw Error(Errc::invalid_argument, "the direct path needs a constant sound speed; use pcg");
  if (!(options_.flux.alpha >= 0.0 && options_.flux.alpha <= 1.0 && options_.flux.beta >= 0.0 &&
        options_.flux.tau >= 0.0))
    throw Error(Errc::invalid_argument, "flux parameters out of range");
  if (options_.quadrature_points <= 0) options_.quadrature_points = options_.degree + 3;

  Impl& im = *impl_;
  im.workers = options_.threads > 0 ? options_.threads : worker_count_from_env();
  const int d = mesh_.dim;
  const int n1 = basis_.nodes();
  im.shape = linalg::TensorShape(d, n1);
  element_size_ = im.shape.size();
  for (int a = 0; a < d; ++a) {
    ops_.push_back(assemble_ops_1d(basis_, mesh_.element_length(a)));
    im.face_shape.push_back(im.shape.without(a));
    im.face_size.push_back(im.face_shape.back().size());
  }
  for (int a = 0; a < d; ++a)
    for (int s = 0; s < 2; ++s) {
      im.face_offset.push_back(im.face_stride);
      im.face_stride += im.face_size[a];
    }
  const int ne = mesh_.num_elements();
  im.tv.assign(im.face_stride * ne, 0.0);
  im.tdn.assign(im.face_stride * ne, 0.0);

  im.mean.assign(element_size_, 1.0);
  for (std::size_t i = 0; i < element_size_; ++i) {
    std::size_t r = i;
    for (int a = 0; a < d; ++a) {
      im.mean[i] *= ops_[a].mean[r % n1];
      r /= n1;
    }
  }

  if (options_.path == SolverPath::fast) {
    for (int a = 0; a < d; ++a) im.diag.push_back(diagonalize(ops_[a]));
    for (int a = 0; a < d; ++a) im.traces.push_back({&im.diag[a].left, &im.diag[a].right});
    im.lambda.assign(element_size_, 0.0);
    for (std::size_t i = 0; i < element_size_; ++i) {
      std::size_t r = i;
      for (int a = 0; a < d; ++a) {
        im.lambda[i] += im.diag[a].eigenvalues[r % n1];
        r /= n1;
      }
    }
  } else {
    for (int a = 0; a < d; ++a) im.traces.push_back({&ops_[a].left, &ops_[a].right});
  }

  std::vector<const ElementOps1d*> axes;
  for (auto& o : ops_) axes.push_back(&o);

  if (options_.path == SolverPath::direct) {
    for (auto& o : ops_) im.mass_factors.push_back(o.mass);
    im.mass_factor = std::make_unique<linalg::KroneckerFactorization>(im.mass_factors);
    im.stiffness = kronecker_stiffness(axes);
    const auto diagonal = im.stiffness.diagonal();
    const double sigma = linalg::AugmentedOperator::default_scale(diagonal, im.mean);
    const Eigen::Map<const Eigen::VectorXd> m(im.mean.data(), element_size_);
    const Eigen::MatrixXd aug = im.stiffness.to_dense() + sigma * m * m.transpose();
    im.aug_llt.compute(aug);
    if (im.aug_llt.info() != Eigen::Success)
      throw Error(Errc::not_positive_definite, "augmented stiffness is not positive definite");
  }

  if (options_.path == SolverPath::pcg) {
    im.mass = kronecker_mass(axes);
    im.mass_ic = std::make_unique<linalg::IncompleteCholesky>(im.mass);
    const int qp = options_.quadrature_points;
    for (int e = 0; e < ne; ++e) {
      const ElementBox box = mesh_.box(e);
      auto pe = std::make_unique<PcgElement>();
      pe->stiffness = assemble_weighted_stiffness(basis_, box, medium_.c2, qp);
      pe->ic = std::make_unique<linalg::IncompleteCholesky>(pe->stiffness, 1e-4);
      const auto diagonal = pe->stiffness.diagonal();
      const double sigma = linalg::AugmentedOperator::default_scale(diagonal, im.mean);
      const linalg::CsrMatrix* sp = &pe->stiffness;
      pe->aug = std::make_unique<linalg::AugmentedOperator>(
          [sp](std::span<const double> x, std::span<double> y) { sp->multiply(x, y); }, im.mean, sigma);
      const linalg::IncompleteCholesky* icp = pe->ic.get();
      pe->pre = std::make_unique<linalg::ShermanMorrisonPreconditioner>(
          [icp](std::span<const double> r, std::span<double> z) { icp->apply(r, z); }, im.mean, sigma);
      for (int a = 0; a < d; ++a) {
        std::array<linalg::CsrMatrix, 2> fm;
        std::array<double, 2> fs{};
        for (int s = 0; s < 2; ++s) {
          const double fixed = box.origin[a] + (s == 1 ? box.lengths[a] : 0.0);
          if (d == 1) {
            const double x[1] = {fixed};
            fs[s] = medium_.c2(x);
            if (!(fs[s] > 0.0)) throw Error(Errc::nonpositive_coefficient, "c^2 must be positive");
            continue;
          }
          ElementBox fb;
          for (int b = 0; b < d; ++b)
            if (b != a) {
              fb.origin.push_back(box.origin[b]);
              fb.lengths.push_back(box.lengths[b]);
            }
          const Medium* med = &medium_;
          PointFunction c2_face = [med, a, fixed, d](std::span<const double> y) {
            double x[3];
            for (int b = 0, k = 0; b < d; ++b) x[b] = b == a ? fixed : y[k++];
            return med->c2(std::span<const double>(x, d));
          };
          fm[s] = assemble_weighted_mass(basis_, fb, c2_face, qp);
        }
        pe->face_mass.push_back(std::move(fm));
        pe->face_scalar.push_back(fs);
      }
      im.elements.push_back(std::move(pe));
    }
    im.ut_prev.assign(state_size(), 0.0);
    im.vt_prev.assign(state_size(), 0.0);
    im.u_iters.assign(ne, 0);
    im.v_iters.assign(ne, 0);
  }

  for (auto& term : forcing) {
    std::vector<double> load(state_size());
    for (int e = 0; e < ne; ++e) {
      auto l = assemble_load(basis_, mesh_.box(e), term.space, options_.quadrature_points);
      if (modal()) l = apply_psi_transpose(im.diag, im.shape, l);
      std::copy(l.begin(), l.end(), load.begin() + e * element_size_);
    }
    im.force_time.push_back(term.time);
    im.loads.push_back(std::move(load));
  }

  im.ws.resize(im.workers);
  std::size_t fmax = 1;
  for (auto f : im.face_size) fmax = std::max(fmax, f);
  for (auto& w : im.ws) {
    w.fu.assign(element_size_, 0.0);
    w.fv.assign(element_size_, 0.0);
    w.tmp.assign(element_size_, 0.0);
    w.work.assign(std::max(element_size_, fmax), 0.0);
    w.jump.assign(fmax, 0.0);
    w.grad.assign(fmax, 0.0);
    w.wjump.assign(fmax, 0.0);
    w.wgrad.assign(fmax, 0.0);
  }
}

Semidiscretization::~Semidiscretization() = default;

FieldState Semidiscretization::zero_state(double t) const {
  return {t, std::vector<double>(state_size(), 0.0), std::vector<double>(state_size(), 0.0)};
}

FieldState Semidiscretization::interpolate(const PointFunction& u0, const PointFunction& v0, double t) const {
  FieldState s = zero_state(t);
  const int d = mesh_.dim;
  const int n1 = basis_.nodes();
  std::vector<double> x(d);
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    const ElementBox box = mesh_.box(e);
    for (std::size_t i = 0; i < element_size_; ++i) {
      std::size_t r = i;
      for (int a = 0; a < d; ++a) {
        x[a] = box.origin[a] + static_cast<double>(r % n1) * mesh_.cell_size(a);
        r /= n1;
      }
      s.u[e * element_size_ + i] = u0(x);
      s.v[e * element_size_ + i] = v0(x);
    }
  }
  if (modal()) {
    s.u = from_nodal(s.u);
    s.v = from_nodal(s.v);
  }
  return s;
}

std::vector<double> Semidiscretization::to_nodal(std::span<const double> field) const {
  if (!modal()) return {field.begin(), field.end()};
  std::vector<const DiagonalBasis*> axes;
  for (auto& db : impl_->diag) axes.push_back(&db);
  std::vector<double> out(field.size());
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    const auto blk = from_modal(axes, field.subspan(e * element_size_, element_size_));
    std::copy(blk.begin(), blk.end(), out.begin() + e * element_size_);
  }
  return out;
}

std::vector<double> Semidiscretization::from_nodal(std::span<const double> nodal) const {
  if (!modal()) return {nodal.begin(), nodal.end()};
  std::vector<const DiagonalBasis*> axes;
  for (auto& db : impl_->diag) axes.push_back(&db);
  std::vector<double> out(nodal.size());
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    const auto blk = to_modal(axes, nodal.subspan(e * element_size_, element_size_));
    std::copy(blk.begin(), blk.end(), out.begin() + e * element_size_);
  }
  return out;
}

void Semidiscretization::build_face_traces(const FieldState& s) {
  Impl& im = *impl_;
  const int d = mesh_.dim;
  parallel_for(mesh_.num_elements(), im.workers, [&](int e, int) {
    const std::span<const double> u(s.u.data() + e * element_size_, element_size_);
    const std::span<const double> v(s.v.data() + e * element_size_, element_size_);
    for (int a = 0; a < d; ++a)
      for (int side = 0; side < 2; ++side) {
        const TraceVectors& t = *im.traces[a][side];
        const std::size_t off = im.offset(e, a, side);
        const std::span<double> fv(im.tv.data() + off, im.face_size[a]);
        const std::span<double> fd(im.tdn.data() + off, im.face_size[a]);
        linalg::contract_axis(im.shape, a, t.value, v, fv);
        linalg::contract_axis(im.shape, a, t.derivative, u, fd);
        if (side == 0)
          for (double& x : fd) x = -x;
      }
  });
}

// fu = sum_faces sign * d_X (x) W (v* - v),  fv = sum_faces b_X (x) W (grad u)*.n
// W is the face mass (identity in modal form); c^2 factors are applied by
// the caller on the constant-coefficient paths.
void Semidiscretization::element_lifts(int e, int worker) {
  Impl& im = *impl_;
  Workspace& w = im.ws[worker];
  const int d = mesh_.dim;
  const std::span<double> fu(w.fu), fv(w.fv);
  std::fill(fu.begin(), fu.end(), 0.0);
  std::fill(fv.begin(), fv.end(), 0.0);
  const FluxScheme& fl = options_.flux;
  double* jump = w.jump.data();
  double* grad = w.grad.data();
  double* wjump = w.wjump.data();
  double* wgrad = w.wgrad.data();
  double* work = w.work.data();
  for (int a = 0; a < d; ++a)
    for (int side = 0; side < 2; ++side) {
      const Endpoint end = side ? Endpoint::right : Endpoint::left;
      const std::size_t nf = im.face_size[a];
      const int nb = mesh_.neighbour(e, a, end);
      const bool boundary = nb < 0;
      const double alpha = face_alpha(fl, end, boundary);
      const double* v1 = im.tv.data() + im.offset(e, a, side);
      const double* a1 = im.tdn.data() + im.offset(e, a, side);
      const double* v2 = boundary ? nullptr : im.tv.data() + im.offset(nb, a, 1 - side);
      const double* a2 = boundary ? nullptr : im.tdn.data() + im.offset(nb, a, 1 - side);
      const BcKind kind = mesh_.bc[a][side];
      for (std::size_t j = 0; j < nf; ++j) {
        const Trace in{v1[j], a1[j]};
        const Trace out = boundary ? apply_bc(kind, in, 0.0) : Trace{v2[j], a2[j]};
        const FluxValues f = numerical_flux(fl, alpha, in, out);
        jump[j] = f.v_star - in.v;
        grad[j] = f.grad_n;
      }
      const double* wj = jump;
      const double* wg = grad;
      if (options_.path == SolverPath::pcg) {
        const PcgElement& pe = *im.elements[e];
        if (d == 1) {
          wjump[0] = pe.face_scalar[a][side] * jump[0];
          wgrad[0] = pe.face_scalar[a][side] * grad[0];
        } else {
          pe.face_mass[a][side].multiply(std::span<const double>(jump, nf), std::span<double>(wjump, nf));
          pe.face_mass[a][side].multiply(std::span<const double>(grad, nf), std::span<double>(wgrad, nf));
        }
        wj = wjump;
        wg = wgrad;
      } else if (options_.path == SolverPath::direct && d > 1) {
        // Kronecker face mass over the remaining axes
        const auto& fs = im.face_shape[a];
        auto apply = [&](const double* in, double* out) {
          std::copy(in, in + nf, out);
          for (int b = 0, k = 0; b < d; ++b) {
            if (b == a) continue;
            ops_[b].mass.apply_along_axis(fs, k, std::span<const double>(out, nf), std::span<double>(work, nf));
            std::copy(work, work + nf, out);
            ++k;
          }
        };
        apply(jump, wjump);
        apply(grad, wgrad);
        wj = wjump;
        wg = wgrad;
      }
      const TraceVectors& t = *im.traces[a][side];
      const double sign = side ? 1.0 : -1.0;
      linalg::outer_axis_add(im.shape, a, t.derivative, std::span<const double>(wj, nf), sign, fu);
      linalg::outer_axis_add(im.shape, a, t.value, std::span<const double>(wg, nf), 1.0, fv);
    }
}

void Semidiscretization::rhs(const FieldState& s, FieldState& out) {
  Impl& im = *impl_;
  const std::size_t total = state_size();
  if (s.u.size() != total || s.v.size() != total)
    throw Error(Errc::dimension_mismatch, "state length does not match the mesh");
  out.t = s.t;
  out.u.resize(total);
  out.v.resize(total);
  build_face_traces(s);

  const int d = mesh_.dim;
  const int ne = mesh_.num_elements();
  const double c2 = medium_.constant ? medium_.c * medium_.c : 1.0;
  std::vector<double> theta(im.loads.size());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = im.force_time[k](s.t);

  parallel_for(ne, im.workers, [&](int e, int wid) {
    Workspace& w = im.ws[wid];
    const std::size_t off = static_cast<std::size_t>(e) * element_size_;
    const std::span<const double> u(s.u.data() + off, element_size_);
    const std::span<const double> v(s.v.data() + off, element_size_);
    const std::span<double> ut(out.u.data() + off, element_size_);
    const std::span<double> vt(out.v.data() + off, element_size_);
    element_lifts(e, wid);

    switch (options_.path) {
      case SolverPath::fast: {
        // zero mode: dU/dt = V, lift discarded
        ut[0] = v[0];
        for (std::size_t i = 1; i < element_size_; ++i) ut[i] = v[i] + w.fu[i] / im.lambda[i];
        for (std::size_t i = 0; i < element_size_; ++i) vt[i] = c2 * (w.fv[i] - im.lambda[i] * u[i]);
        break;
      }
      case SolverPath::direct: {
        Eigen::Map<Eigen::VectorXd> z(w.fu.data(), element_size_);
        z = im.aug_llt.solve(z);
        for (std::size_t i = 0; i < element_size_; ++i) ut[i] = v[i] + w.fu[i];
        im.stiffness.multiply(u, w.tmp);
        for (std::size_t i = 0; i < element_size_; ++i) vt[i] = c2 * (w.fv[i] - w.tmp[i]);
        break;
      }
      case SolverPath::pcg: {
        PcgElement& pe = *im.elements[e];
        // (S + sigma m m^T) dU/dt = S V + lift + sigma m (m^T V)
        pe.aug->apply(v, w.tmp);
        for (std::size_t i = 0; i < element_size_; ++i) w.tmp[i] += w.fu[i];
        const std::span<double> xu(im.ut_prev.data() + off, element_size_);
        const auto ru = linalg::pcg_solve(
            pe.aug->action(), [&pe](std::span<const double> r, std::span<double> z) { pe.pre->apply(r, z); },
            w.tmp, xu, options_.pcg_tolerance, options_.pcg_max_iterations);
        std::copy(xu.begin(), xu.end(), ut.begin());
        im.u_iters[e] = ru.iterations;
        break;
      }
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
      if (theta[k] == 0.0) continue;
      const double* l = im.loads[k].data() + off;
      if (options_.path == SolverPath::pcg)
        for (std::size_t i = 0; i < element_size_; ++i) w.fv[i] += theta[k] * l[i];
      else
        for (std::size_t i = 0; i < element_size_; ++i) vt[i] += theta[k] * l[i];
    }
    if (options_.path == SolverPath::direct) {
      im.mass_factor->solve(vt);
    } else if (options_.path == SolverPath::pcg) {
      PcgElement& pe = *im.elements[e];
      pe.stiffness.multiply(u, w.tmp);
      for (std::size_t i = 0; i < element_size_; ++i) w.fv[i] -= w.tmp[i];
      const std::span<double> xv(im.vt_prev.data() + off, element_size_);
      const linalg::CsrMatrix* mp = &im.mass;
      const linalg::IncompleteCholesky* icp = im.mass_ic.get();
      const auto rv = linalg::pcg_solve(
          [mp](std::span<const double> x, std::span<double> y) { mp->multiply(x, y); },
          [icp](std::span<const double> r, std::span<double> z) { icp->apply(r, z); }, w.fv, xv,
          options_.pcg_tolerance, options_.pcg_max_iterations);
      std::copy(xv.begin(), xv.end(), vt.begin());
      im.v_iters[e] = rv.iterations;
    }
  });

  if (options_.path == SolverPath::pcg) {
    for (int e = 0; e < ne; ++e) {
      pcg_.u_iterations += im.u_iters[e];
      pcg_.v_iterations += im.v_iters[e];
    }
    pcg_.u_calls += ne;
    pcg_.v_calls += ne;
  }

  if (options_.path == SolverPath::fast) {
    // traces: two dense contractions per face; lifts: two spreads per face;
    // fluxes per face entry; modal update
    const std::uint64_t size = element_size_;
    std::uint64_t per = 0;
    for (int a = 0; a < d; ++a) per += 2 * (2 * 2 * size + 2 * 2 * size + 12 * im.face_size[a]);
    per += 6 * size + 2 * size * theta.size();
    last_flops_ = per * static_cast<std::uint64_t>(ne);
  } else {
    last_flops_ = 0;
  }
}

double Semidiscretization::energy(const FieldState& s) const {
  const Impl& im = *impl_;
  const int ne = mesh_.num_elements();
  double total = 0.0;
  std::vector<double> tmp(element_size_), work(element_size_);
  const double c2 = medium_.constant ? medium_.c * medium_.c : 1.0;
  for (int e = 0; e < ne; ++e) {
    const std::size_t off = static_cast<std::size_t>(e) * element_size_;
    const std::span<const double> u(s.u.data() + off, element_size_);
    const std::span<const double> v(s.v.data() + off, element_size_);
    switch (options_.path) {
      case SolverPath::fast:
        for (std::size_t i = 0; i < element_size_; ++i) total += v[i] * v[i] + c2 * im.lambda[i] * u[i] * u[i];
        break;
      case SolverPath::direct:
        apply_kronecker(im.mass_factors, im.shape, v, tmp, work);
        total += dot(v, tmp);
        im.stiffness.multiply(u, tmp);
        total += c2 * dot(u, tmp);
        break;
      case SolverPath::pcg:
        im.mass.multiply(v, tmp);
        total += dot(v, tmp);
        im.elements[e]->stiffness.multiply(u, tmp);
        total += dot(u, tmp);
        break;
    }
  }
  return 0.5 * total;
}

}  // namespace gdwave
