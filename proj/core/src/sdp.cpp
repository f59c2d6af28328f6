#include "sosdec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

namespace sosdec {

int SdpProblem::add_block(int size) {
  block_sizes.push_back(size);
  objective.push_back(Mat::Zero(size, size));
  return static_cast<int>(block_sizes.size()) - 1;
}

int SdpProblem::add_scalar(double objective_coeff) {
  scalar_objective.conservativeResize(num_scalars + 1);
  scalar_objective[num_scalars] = objective_coeff;
  return num_scalars++;
}

void SdpProblem::validate() const {
  if (objective.size() != block_sizes.size()) throw DimensionError("objective blocks do not match block sizes");
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    const auto& c = objective[b];
    if (c.rows() != block_sizes[b] || c.cols() != block_sizes[b]) throw DimensionError("objective block has wrong size");
    if (c.size() && (c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + c.cwiseAbs().maxCoeff()))
      throw DomainError("objective block is not symmetric");
  }
  if (scalar_objective.size() != num_scalars) throw DimensionError("scalar objective has wrong length");
  for (const auto& r : rows) {
    for (const auto& part : r.blocks) {
      if (part.block < 0 || part.block >= static_cast<int>(block_sizes.size())) throw DimensionError("row references a missing block");
      const int sz = block_sizes[static_cast<std::size_t>(part.block)];
      for (const auto& e : part.entries)
        if (e.i < 0 || e.j < e.i || e.j >= sz) throw DimensionError("row entry outside its block");
    }
    for (const auto& s : r.scalars)
      if (s.index < 0 || s.index >= num_scalars) throw DimensionError("row references a missing scalar");
  }
}

nlohmann::json SdpProblem::debug_dump() const {
  nlohmann::json j;
  j["blocks"] = block_sizes;
  j["num_scalars"] = num_scalars;
  nlohmann::json c = nlohmann::json::array();
  for (std::size_t b = 0; b < objective.size(); ++b)
    for (int i = 0; i < block_sizes[b]; ++i)
      for (int k = i; k < block_sizes[b]; ++k)
        if (objective[b](i, k) != 0.0) c.push_back({b, i, k, objective[b](i, k)});
  j["objective"] = c;
  j["scalar_objective"] = std::vector<double>(scalar_objective.data(), scalar_objective.data() + scalar_objective.size());
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json trip = nlohmann::json::array();
    for (const auto& p : r.blocks)
      for (const auto& e : p.entries) trip.push_back({p.block, e.i, e.j, e.v});
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : r.scalars) sc.push_back({s.index, s.v});
    rs.push_back({{"triplets", trip}, {"scalars", sc}, {"rhs", r.rhs}});
  }
  j["rows"] = rs;
  return j;
}

ToleranceConfig tolerance_from_json(const nlohmann::json& j) {
  ToleranceConfig t;
  try {
    if (j.contains("tol_feas")) t.tol_feas = j.at("tol_feas").get<double>();
    if (j.contains("tol_gap")) t.tol_gap = j.at("tol_gap").get<double>();
    if (j.contains("tol_psd")) t.tol_psd = j.at("tol_psd").get<double>();
    if (j.contains("max_iter")) t.max_iter = j.at("max_iter").get<int>();
    if (j.contains("phase1_tol")) t.phase1_tol = j.at("phase1_tol").get<double>();
    if (j.contains("phase1_trace_bound")) t.phase1_trace_bound = j.at("phase1_trace_bound").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad tolerance config: ") + e.what());
  }
  if (t.tol_feas <= 0 || t.tol_gap <= 0 || t.max_iter <= 0) throw InputError("tolerances must be positive");
  return t;
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

namespace {

double entry_dot(const std::vector<SymEntry>& es, const Mat& g) {
  double s = 0.0;
  for (const auto& e : es) s += e.i == e.j ? e.v * g(e.i, e.i) : e.v * (g(e.i, e.j) + g(e.j, e.i));
  return s;
}

void entry_axpy(const std::vector<SymEntry>& es, double a, Mat& g) {
  for (const auto& e : es) {
    g(e.i, e.j) += a * e.v;
    if (e.i != e.j) g(e.j, e.i) += a * e.v;
  }
}

// Min-form working copy: minimize <C,X> + c.x s.t. A(X, x) = b, after row scaling.
struct Work {
  int nb = 0;
  std::vector<int> sizes;
  int ns = 0;
  std::vector<Mat> c;
  Vec cs;
  std::vector<SdpRow> rows;
  Vec b;
  Vec row_scale;
  double c_scale = 1.0;
  // block -> list of (row, part index)
  std::vector<std::vector<std::pair<int, int>>> by_block;
  // scalar -> list of (row, coefficient)
  std::vector<std::vector<std::pair<int, double>>> by_scalar;

  int m() const { return static_cast<int>(rows.size()); }

  Vec apply(const std::vector<Mat>& x, const Vec& xs) const {
    Vec out = Vec::Zero(m());
    for (int r = 0; r < m(); ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      double s = 0.0;
      for (const auto& p : row.blocks) s += entry_dot(p.entries, x[static_cast<std::size_t>(p.block)]);
      for (const auto& sp : row.scalars) s += sp.v * xs[sp.index];
      out[r] = s;
    }
    return out;
  }

  void adjoint(const Vec& y, std::vector<Mat>& out, Vec& outs) const {
    out.resize(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) out[static_cast<std::size_t>(k)] = Mat::Zero(sizes[static_cast<std::size_t>(k)], sizes[static_cast<std::size_t>(k)]);
    outs = Vec::Zero(ns);
    for (int r = 0; r < m(); ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      for (const auto& p : row.blocks) entry_axpy(p.entries, y[r], out[static_cast<std::size_t>(p.block)]);
      for (const auto& sp : row.scalars) outs[sp.index] += y[r] * sp.v;
    }
  }
};

Work make_work(const SdpProblem& sdp) {
  Work w;
  w.nb = static_cast<int>(sdp.block_sizes.size());
  w.sizes = sdp.block_sizes;
  w.ns = sdp.num_scalars;
  double cmax = sdp.scalar_objective.size() ? sdp.scalar_objective.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& c : sdp.objective) cmax = std::max(cmax, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  w.c_scale = std::max(1.0, cmax);
  for (const auto& c : sdp.objective) w.c.push_back(-c / w.c_scale);
  w.cs = -sdp.scalar_objective / w.c_scale;
  w.rows = sdp.rows;
  w.b = Vec(w.m());
  w.row_scale = Vec(w.m());
  for (int r = 0; r < w.m(); ++r) {
    auto& row = w.rows[static_cast<std::size_t>(r)];
    double nrm = 0.0;
    for (const auto& p : row.blocks)
      for (const auto& e : p.entries) nrm += (e.i == e.j ? 1.0 : 2.0) * e.v * e.v;
    for (const auto& s : row.scalars) nrm += s.v * s.v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) nrm = 1.0;
    for (auto& p : row.blocks)
      for (auto& e : p.entries) e.v /= nrm;
    for (auto& s : row.scalars) s.v /= nrm;
    w.row_scale[r] = nrm;
    w.b[r] = row.rhs / nrm;
  }
  w.by_block.assign(static_cast<std::size_t>(w.nb), {});
  w.by_scalar.assign(static_cast<std::size_t>(w.ns), {});
  for (int r = 0; r < w.m(); ++r) {
    const auto& row = w.rows[static_cast<std::size_t>(r)];
    for (std::size_t p = 0; p < row.blocks.size(); ++p)
      w.by_block[static_cast<std::size_t>(row.blocks[p].block)].emplace_back(r, static_cast<int>(p));
    for (const auto& s : row.scalars) w.by_scalar[static_cast<std::size_t>(s.index)].emplace_back(r, s.v);
  }
  return w;
}

bool row_is_empty(const SdpRow& r) {
  for (const auto& p : r.blocks)
    for (const auto& e : p.entries)
      if (e.v != 0.0) return false;
  for (const auto& s : r.scalars)
    if (s.v != 0.0) return false;
  return true;
}

// Largest alpha with X + alpha dX PSD (infinity if never violated).
double psd_step(const Mat& x, const Mat& dx) {
  if (x.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat a = llt.matrixL().solve(dx);
  Mat s = llt.matrixL().solve(a.transpose());
  s = 0.5 * (s + s.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double lp_step(const Vec& x, const Vec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (dx[k] < 0.0) a = std::min(a, -x[k] / dx[k]);
  return a;
}

double inner(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].array() * b[k].array()).sum();
  return s;
}

double fro(const std::vector<Mat>& a, const Vec& as) {
  double s = as.squaredNorm();
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

struct Direction {
  std::vector<Mat> dx, dz;
  Vec dxs, dzs, dy;
};

// Least-norm correction X += A^T (A A^T)^{-1} r for the normalized rows.
class RowProjector {
 public:
  explicit RowProjector(const Work& w) : w_(w) {}

  void correct(std::vector<Mat>& x, Vec& xs, const Vec& r) {
    if (!gram_) {
      const int m = w_.m();
      Mat g(m, m);
      for (int j = 0; j < m; ++j) {
        std::vector<Mat> col;
        Vec cols;
        w_.adjoint(Vec::Unit(m, j), col, cols);
        g.col(j) = w_.apply(col, cols);
      }
      gram_.emplace(g);
    }
    std::vector<Mat> corr;
    Vec corrs;
    w_.adjoint(gram_->solve(r), corr, corrs);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += corr[k];
    xs += corrs;
  }

 private:
  const Work& w_;
  std::optional<Eigen::LDLT<Mat>> gram_;
};

// PSD up to the relative tolerance extraction applies.
bool psd_within(const std::vector<Mat>& x, const Vec& xs, double tol_psd) {
  if (xs.size() && xs.minCoeff() < -tol_psd) return false;
  for (const auto& b : x)
    if (b.rows() > 0 &&
        Eigen::SelfAdjointEigenSolver<Mat>(b, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -tol_psd * (1.0 + b.trace()))
      return false;
  return true;
}

// With a decision target (phase-I), stop as soon as the primal iterate certifies
// objective <= target or the dual iterate certifies objective > target.
SdpSolution run_ipm(const Work& w, const ToleranceConfig& tol, std::optional<double> target = std::nullopt) {
  const int m = w.m();
  double data_inf = w.b.size() ? w.b.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& c : w.c) data_inf = std::max(data_inf, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  if (w.cs.size()) data_inf = std::max(data_inf, w.cs.cwiseAbs().maxCoeff());
  const double tau = 1.0 + data_inf;

  int dim = w.ns;
  for (int s : w.sizes) dim += s;

  std::vector<Mat> x, z;
  for (int s : w.sizes) {
    x.push_back(tau * Mat::Identity(s, s));
    z.push_back(tau * Mat::Identity(s, s));
  }
  Vec xs = Vec::Constant(w.ns, tau), zs = Vec::Constant(w.ns, tau);
  Vec y = Vec::Zero(m);

  const double bnorm = w.b.norm();
  double cnorm = w.cs.squaredNorm();
  for (const auto& c : w.c) cnorm += c.squaredNorm();
  cnorm = std::sqrt(cnorm);

  // Without an interior the Schur system turns singular near the optimum and the
  // primal residual stalls around 1e-7. Such iterates are finished by a least-norm
  // projection onto A(X) = b, accepted only if it still meets every exit test.
  RowProjector projector(w);
  SdpSolution sol;
  sol.status = SdpStatus::max_iter;
  int stall = 0;
  std::vector<Mat> last_x = x, last_z = z;
  Vec last_xs = xs, last_zs = zs, last_y = y;
  for (int it = 0; it <= tol.max_iter; ++it) {
    sol.iterations = it;
    // residuals
    Vec rp = w.b - w.apply(x, xs);
    std::vector<Mat> aty;
    Vec atys;
    w.adjoint(y, aty, atys);
    std::vector<Mat> rd(static_cast<std::size_t>(w.nb));
    for (int k = 0; k < w.nb; ++k) rd[static_cast<std::size_t>(k)] = w.c[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(k)] - aty[static_cast<std::size_t>(k)];
    Vec rds = w.cs - zs - atys;

    const double pobj = inner(w.c, x) + w.cs.dot(xs);
    const double dobj = w.b.dot(y);
    const double xz = inner(x, z) + xs.dot(zs);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double dinf = fro(rd, rds) / (1.0 + cnorm);
    const double relgap = std::max(std::abs(pobj - dobj), xz) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.primal_residual = pinf;
    sol.dual_residual = dinf;
    sol.gap = relgap;
    if (tol.verbose)
      std::fprintf(stderr, "it %3d pobj % .8e dobj % .8e pinf %.2e dinf %.2e gap %.2e\n", it, pobj, dobj, pinf, dinf, relgap);

    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(pinf) || !std::isfinite(dinf)) {
      x = last_x, z = last_z, xs = last_xs, zs = last_zs, y = last_y;
      sol.message = "numerical breakdown";
      break;
    }
    last_x = x, last_z = z, last_xs = xs, last_zs = zs, last_y = y;
    if (pinf <= tol.tol_feas && dinf <= tol.tol_feas && relgap <= tol.tol_gap) {
      sol.status = SdpStatus::optimal;
      break;
    }
    if (pinf > tol.tol_feas && pinf <= 1e3 * tol.tol_feas && dinf <= tol.tol_feas && relgap <= tol.tol_gap) {
      std::vector<Mat> px = x;
      Vec pxs = xs;
      projector.correct(px, pxs, rp);
      const bool psd = psd_within(px, pxs, tol.tol_psd);
      const double ppobj = inner(w.c, px) + w.cs.dot(pxs);
      const double pxz = inner(px, z) + pxs.dot(zs);
      const double pgap = std::max(std::abs(ppobj - dobj), pxz) / (1.0 + std::abs(ppobj) + std::abs(dobj));
      const double ppinf = (w.b - w.apply(px, pxs)).norm() / (1.0 + bnorm);
      if (psd && ppinf <= tol.tol_feas && pgap <= tol.tol_gap) {
        x = std::move(px);
        xs = std::move(pxs);
        sol.primal_residual = ppinf;
        sol.gap = pgap;
        sol.status = SdpStatus::optimal;
        sol.message = "projected onto the equality constraints";
        break;
      }
    }
    if (target && ((pinf <= tol.tol_feas && pobj <= *target) || (dinf <= tol.tol_feas && dobj > *target))) {
      sol.status = SdpStatus::optimal;
      sol.message = "decided against target";
      break;
    }
    double xtrace = xs.sum();
    for (const auto& xb : x) xtrace += xb.trace();
    if (xtrace > 1e12 * tau && pinf < 1e-6 && pobj < -1e8) {
      sol.status = SdpStatus::unbounded;
      sol.message = "primal iterates diverge along an improving direction";
      break;
    }
    if (dobj > 1e10 && dinf < 1e-6) {
      sol.status = SdpStatus::infeasible;
      sol.message = "dual objective diverges";
      break;
    }
    if (it == tol.max_iter) break;

    const double mu = xz / dim;

    // NT scaling per block: W = R R^T with W Z W = X.
    std::vector<Mat> wmat(static_cast<std::size_t>(w.nb)), zinv(static_cast<std::size_t>(w.nb));
    bool ok = true;
    for (int k = 0; k < w.nb && ok; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      if (w.sizes[ku] == 0) {
        wmat[ku] = zinv[ku] = Mat(0, 0);
        continue;
      }
      Eigen::LLT<Mat> lx(x[ku]);
      Eigen::LLT<Mat> lz(z[ku]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Mat l = lx.matrixL();
      Mat s = l.transpose() * z[ku] * l;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
      Vec lam = es.eigenvalues().cwiseMax(1e-300);
      Mat r = l * es.eigenvectors() * lam.array().pow(-0.25).matrix().asDiagonal();
      wmat[ku] = r * r.transpose();
      zinv[ku] = lz.solve(Mat::Identity(w.sizes[ku], w.sizes[ku]));
    }
    if (!ok) {
      sol.message = "lost positive definiteness";
      break;
    }
    Vec dscal = xs.cwiseQuotient(zs);

    // Schur complement M_ij = sum_b <A_ib, W A_jb W> + sum_s a_is a_js x_s/z_s.
    Mat schur = Mat::Zero(m, m);
    for (int k = 0; k < w.nb; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const auto& list = w.by_block[ku];
      const Mat& wb = wmat[ku];
      const int n = w.sizes[ku];
      for (std::size_t a = 0; a < list.size(); ++a) {
        const auto& [ri, pi] = list[a];
        const auto& ents = w.rows[static_cast<std::size_t>(ri)].blocks[static_cast<std::size_t>(pi)].entries;
        Mat g = Mat::Zero(n, n);
        if (static_cast<long>(ents.size()) * 4 > static_cast<long>(n) * n) {
          Mat dense = Mat::Zero(n, n);
          entry_axpy(ents, 1.0, dense);
          g = wb * dense * wb;
        } else {
          for (const auto& e : ents) {
            if (e.i == e.j) {
              g.noalias() += e.v * wb.col(e.i) * wb.row(e.i);
            } else {
              g.noalias() += e.v * wb.col(e.i) * wb.row(e.j);
              g.noalias() += e.v * wb.col(e.j) * wb.row(e.i);
            }
          }
        }
        for (std::size_t bidx = a; bidx < list.size(); ++bidx) {
          const auto& [rj, pj] = list[bidx];
          const double v = entry_dot(w.rows[static_cast<std::size_t>(rj)].blocks[static_cast<std::size_t>(pj)].entries, g);
          schur(ri, rj) += v;
          if (rj != ri) schur(rj, ri) += v;
        }
      }
    }
    for (int s = 0; s < w.ns; ++s)
      for (const auto& [ri, vi] : w.by_scalar[static_cast<std::size_t>(s)])
        for (const auto& [rj, vj] : w.by_scalar[static_cast<std::size_t>(s)]) schur(ri, rj) += vi * vj * dscal[s];

    Eigen::LLT<Mat> chol(schur);
    Eigen::LDLT<Mat> ldlt;
    bool use_ldlt = false;
    if (chol.info() != Eigen::Success) {
      const double ridge = 1e-12 * std::max(1.0, schur.diagonal().maxCoeff());
      chol.compute(schur + ridge * Mat::Identity(m, m));
      if (chol.info() != Eigen::Success) {
        ldlt.compute(schur);
        use_ldlt = true;
      }
    }
    auto factor_solve = [&](const Vec& rhs) -> Vec { return use_ldlt ? Vec(ldlt.solve(rhs)) : Vec(chol.solve(rhs)); };
    // Schur operator applied matrix-free, for refinement against the ridge and rounding in M.
    auto schur_apply = [&](const Vec& y) -> Vec {
      std::vector<Mat> aty;
      Vec atys;
      w.adjoint(y, aty, atys);
      for (int k = 0; k < w.nb; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        aty[ku] = wmat[ku] * aty[ku] * wmat[ku];
      }
      return w.apply(aty, dscal.cwiseProduct(atys));
    };
    auto schur_solve = [&](const Vec& rhs) -> Vec {
      Vec y = factor_solve(rhs);
      double res = (rhs - schur_apply(y)).norm();
      for (int r = 0; r < 3 && res > 1e-15 * (1.0 + rhs.norm()); ++r) {
        const Vec cand = y + factor_solve(rhs - schur_apply(y));
        const double cres = (rhs - schur_apply(cand)).norm();
        if (!(cres < 0.5 * res)) break;
        y = cand;
        res = cres;
      }
      return y;
    };

    // Solve for a given centering target: dX + W dZ W = rc.
    auto direction = [&](const std::vector<Mat>& rc, const Vec& rcs) {
      Direction dir;
      std::vector<Mat> t(static_cast<std::size_t>(w.nb));
      for (int k = 0; k < w.nb; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        t[ku] = rc[ku] - wmat[ku] * rd[ku] * wmat[ku];
      }
      Vec ts = rcs - dscal.cwiseProduct(rds);
      Vec rhs = rp - w.apply(t, ts);
      dir.dy = schur_solve(rhs);
      std::vector<Mat> atdy;
      Vec atdys;
      w.adjoint(dir.dy, atdy, atdys);
      dir.dz.resize(static_cast<std::size_t>(w.nb));
      dir.dx.resize(static_cast<std::size_t>(w.nb));
      for (int k = 0; k < w.nb; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        dir.dz[ku] = rd[ku] - atdy[ku];
        Mat dx = rc[ku] - wmat[ku] * dir.dz[ku] * wmat[ku];
        dir.dx[ku] = 0.5 * (dx + dx.transpose());
      }
      dir.dzs = rds - atdys;
      dir.dxs = rcs - dscal.cwiseProduct(dir.dzs);
      return dir;
    };
    auto steps = [&](const Direction& dir) {
      double ap = lp_step(xs, dir.dxs), ad = lp_step(zs, dir.dzs);
      for (int k = 0; k < w.nb; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        ap = std::min(ap, psd_step(x[ku], dir.dx[ku]));
        ad = std::min(ad, psd_step(z[ku], dir.dz[ku]));
      }
      return std::pair<double, double>(ap, ad);
    };

    // predictor
    std::vector<Mat> rc(static_cast<std::size_t>(w.nb));
    for (int k = 0; k < w.nb; ++k) rc[static_cast<std::size_t>(k)] = -x[static_cast<std::size_t>(k)];
    Direction pred = direction(rc, -xs);
    auto [ap0, ad0] = steps(pred);
    ap0 = std::min(1.0, ap0);
    ad0 = std::min(1.0, ad0);
    double xz_aff = 0.0;
    for (int k = 0; k < w.nb; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      xz_aff += ((x[ku] + ap0 * pred.dx[ku]).array() * (z[ku] + ad0 * pred.dz[ku]).array()).sum();
    }
    xz_aff += (xs + ap0 * pred.dxs).dot(zs + ad0 * pred.dzs);
    const double expon = std::max(1.0, 3.0 * std::pow(std::min(ap0, ad0), 2));
    double sigma = std::clamp(std::pow(std::max(xz_aff, 0.0) / xz, expon), 0.0, 1.0);

    // corrector
    for (int k = 0; k < w.nb; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      rc[ku] = sigma * mu * zinv[ku] - x[ku];
    }
    Vec rcs = sigma * mu * zs.cwiseInverse() - xs;
    Direction dir = direction(rc, rcs);
    auto [apm, adm] = steps(dir);
    const double gamma = 0.9 + 0.09 * std::min(ap0, ad0);
    double ap = std::min(1.0, gamma * apm);
    double ad = std::min(1.0, gamma * adm);
    if (ap < 1e-12 && ad < 1e-12) {
      if (++stall > 5) {
        sol.message = "step length collapsed";
        break;
      }
    } else {
      stall = 0;
    }
    // Roundoff can leave a nominally interior step on the boundary; back off until Cholesky succeeds.
    auto advance = [&](std::vector<Mat>& base, const std::vector<Mat>& delta, double& alpha) {
      std::vector<Mat> trial(base.size());
      for (int tries = 0; tries < 60; ++tries) {
        bool pd = true;
        for (std::size_t k = 0; k < base.size() && pd; ++k) {
          trial[k] = base[k] + alpha * delta[k];
          trial[k] = 0.5 * (trial[k] + trial[k].transpose());
          pd = Eigen::LLT<Mat>(trial[k]).info() == Eigen::Success;
        }
        if (pd) {
          base = std::move(trial);
          return;
        }
        alpha *= 0.7;
      }
      alpha = 0.0;
    };
    advance(x, dir.dx, ap);
    advance(z, dir.dz, ad);
    xs += ap * dir.dxs;
    zs += ad * dir.dzs;
    y += ad * dir.dy;
  }

  sol.x = x;
  sol.scalars = xs;
  sol.objective = -(inner(w.c, x) + w.cs.dot(xs)) * w.c_scale;
  sol.dual_objective = -w.b.dot(y) * w.c_scale;
  sol.y = Vec(m);
  for (int r = 0; r < m; ++r) sol.y[r] = -y[r] * w.c_scale / w.row_scale[r];
  return sol;
}

FeasibilityResult feasibility_impl(const SdpProblem& sdp, const ToleranceConfig& tol);

}  // namespace

SdpSolution solve(const SdpProblem& sdp, const ToleranceConfig& tol) {
  sdp.validate();
  SdpProblem reduced = sdp;
  reduced.rows.clear();
  for (const auto& r : sdp.rows) {
    if (row_is_empty(r)) {
      if (std::abs(r.rhs) > tol.tol_feas) {
        SdpSolution s;
        s.status = SdpStatus::infeasible;
        s.message = "constraint with no variables and nonzero right-hand side";
        return s;
      }
      continue;
    }
    reduced.rows.push_back(r);
  }
  if (reduced.rows.empty()) {
    // Unconstrained: bounded iff every objective block is negative semidefinite.
    SdpSolution s;
    s.status = SdpStatus::optimal;
    for (std::size_t b = 0; b < sdp.block_sizes.size(); ++b) {
      s.x.push_back(Mat::Zero(sdp.block_sizes[b], sdp.block_sizes[b]));
      if (sdp.block_sizes[b] > 0 &&
          Eigen::SelfAdjointEigenSolver<Mat>(sdp.objective[b], Eigen::EigenvaluesOnly).eigenvalues().maxCoeff() > tol.tol_feas)
        s.status = SdpStatus::unbounded;
    }
    s.scalars = Vec::Zero(sdp.num_scalars);
    if (sdp.num_scalars && sdp.scalar_objective.maxCoeff() > tol.tol_feas) s.status = SdpStatus::unbounded;
    return s;
  }
  Work w = make_work(reduced);
  SdpSolution sol = run_ipm(w, tol);
  if (sol.status == SdpStatus::max_iter || sol.status == SdpStatus::infeasible) {
    const auto feas = feasibility_impl(reduced, tol);
    if (!feas.feasible) {
      sol.status = SdpStatus::infeasible;
      sol.message = "phase-I residual " + std::to_string(feas.margin);
    } else if (sol.status == SdpStatus::infeasible) {
      sol.status = SdpStatus::max_iter;
    }
  }
  return sol;
}

namespace {

FeasibilityResult feasibility_impl(const SdpProblem& sdp, const ToleranceConfig& tol) {
  FeasibilityResult out;
  // Normalized rows relaxed by u - v, total trace bounded by phase1_trace_bound.
  SdpProblem p;
  p.block_sizes = sdp.block_sizes;
  for (int s : sdp.block_sizes) p.objective.push_back(Mat::Zero(s, s));
  p.num_scalars = sdp.num_scalars;
  p.scalar_objective = Vec::Zero(sdp.num_scalars);
  SdpRow trace_row;
  for (std::size_t b = 0; b < sdp.block_sizes.size(); ++b) {
    BlockPart part{static_cast<int>(b), {}};
    for (int i = 0; i < sdp.block_sizes[b]; ++i) part.entries.push_back({i, i, 1.0});
    trace_row.blocks.push_back(part);
  }
  for (int s = 0; s < sdp.num_scalars; ++s) trace_row.scalars.push_back({s, 1.0});
  for (const auto& r : sdp.rows) {
    double nrm = 0.0;
    for (const auto& part : r.blocks)
      for (const auto& e : part.entries) nrm += (e.i == e.j ? 1.0 : 2.0) * e.v * e.v;
    for (const auto& s : r.scalars) nrm += s.v * s.v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      if (std::abs(r.rhs) > tol.tol_feas) {
        out.feasible = false;
        out.margin = std::abs(r.rhs);
        return out;
      }
      continue;
    }
    SdpRow q = r;
    for (auto& part : q.blocks)
      for (auto& e : part.entries) e.v /= nrm;
    for (auto& s : q.scalars) s.v /= nrm;
    q.rhs /= nrm;
    const int u = p.add_scalar(-1.0);
    const int v = p.add_scalar(-1.0);
    q.scalars.push_back({u, 1.0});
    q.scalars.push_back({v, -1.0});
    p.rows.push_back(q);
  }
  if (p.rows.empty()) {
    out.feasible = true;
    for (int s : sdp.block_sizes) out.x.push_back(Mat::Identity(s, s));
    out.scalars = Vec::Ones(sdp.num_scalars);
    return out;
  }
  const int t = p.add_scalar(0.0);
  trace_row.scalars.push_back({t, 1.0});
  trace_row.rhs = tol.phase1_trace_bound;
  p.rows.push_back(trace_row);

  ToleranceConfig t1 = tol;
  Work w = make_work(p);
  SdpSolution sol = run_ipm(w, t1, tol.phase1_tol / w.c_scale);
  // A stalled run can report u + v ~ 0 while the rows are still violated, so take
  // the residual of the returned point too.
  double viol = 0.0;
  for (const auto& q : p.rows) {
    if (&q == &p.rows.back()) break;
    double lhs = 0.0;
    for (const auto& part : q.blocks) lhs += entry_dot(part.entries, sol.x[static_cast<std::size_t>(part.block)]);
    for (std::size_t k = 0; k + 2 < q.scalars.size(); ++k) lhs += q.scalars[k].v * sol.scalars[q.scalars[k].index];
    viol += std::abs(lhs - q.rhs);
  }
  out.margin = std::max(-sol.objective, viol);
  // The primal value bounds the residual from above; the dual value from below.
  out.x = sol.x;
  out.scalars = sol.scalars.head(sdp.num_scalars);
  if (sol.primal_residual <= tol.tol_feas && out.margin <= tol.phase1_tol) {
    out.feasible = true;
    return out;
  }
  if (sol.dual_residual <= tol.tol_feas && -sol.dual_objective > tol.phase1_tol) {
    out.feasible = false;
    return out;
  }
  out.feasible = out.margin <= tol.phase1_tol;
  if (out.feasible) return out;
  // Inconclusive. Feasible sets without interior stall the relaxed problem; retry the
  // original rows with a minimum-trace objective, which pins a well-centred point.
  SdpProblem q = sdp;
  for (auto& c : q.objective) c = -Mat::Identity(c.rows(), c.cols());
  q.scalar_objective = -Vec::Ones(sdp.num_scalars);
  Work wq = make_work(q);
  SdpSolution alt = run_ipm(wq, tol);
  if (alt.status == SdpStatus::optimal) {
    out.feasible = true;
    out.margin = alt.primal_residual;
    out.x = alt.x;
    out.scalars = alt.scalars;
    return out;
  }
  // Still stalled near the face: move the point onto the rows exactly and accept it
  // if it stays PSD within tolerance.
  RowProjector projector(wq);
  std::vector<Mat> px = alt.x;
  Vec pxs = alt.scalars;
  projector.correct(px, pxs, wq.b - wq.apply(px, pxs));
  const double res = (wq.b - wq.apply(px, pxs)).norm() / (1.0 + wq.b.norm());
  if (res <= tol.tol_feas && psd_within(px, pxs, tol.tol_psd)) {
    out.feasible = true;
    out.margin = res;
    out.x = std::move(px);
    out.scalars = std::move(pxs);
  }
  return out;
}

}  // namespace

FeasibilityResult check_feasible(const SdpProblem& sdp, const ToleranceConfig& tol) {
  sdp.validate();
  return feasibility_impl(sdp, tol);
}

}  // namespace sosdec
